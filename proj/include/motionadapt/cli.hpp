// Copyright 2026 The motionadapt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>

namespace motionadapt {

// Exit codes of run_cli.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitFile = 3;

// Entry point of the motionadapt tool. Successful commands print one JSON
// summary line to `out`; failures print {"error", "field", "message"} as one
// JSON line to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace motionadapt
