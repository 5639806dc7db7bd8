// Copyright 2026 The motionadapt Authors
// SPDX-License-Identifier: Apache-2.0

// Batched rotation and projection ops with hand-written derivatives.

#include <cmath>
#include <string>

#include "motionadapt/autodiff.hpp"
#include "motionadapt/error.hpp"

namespace motionadapt::ad {

namespace {

void require_cols(const char* op, const Var& v, Eigen::Index cols) {
  if (!v.valid()) throw GraphError(std::string(op) + ": invalid variable");
  if (v.cols() != cols) {
    throw GraphError(std::string(op) + ": expected " + std::to_string(cols) + " columns, got " +
                     std::to_string(v.cols()));
  }
}

// d R / d q for one quaternion component, row-major 3x3.
using Jac9 = Eigen::Matrix<double, 9, 1>;

}  // namespace

Var quat_from_axis_angle(Var axis, Var angle) {
  require_cols("quat_from_axis_angle", axis, 3);
  require_cols("quat_from_axis_angle", angle, 1);
  if (axis.graph() != angle.graph() || axis.rows() != angle.rows()) {
    throw GraphError("quat_from_axis_angle: axis and angle batches differ");
  }
  const Tensor& a = axis.value();
  const Tensor& t = angle.value();
  Tensor out(a.rows(), 4);
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    const double n = a.row(i).norm();
    const double h = 0.5 * t(i, 0);
    if (n < 1e-12) {
      if (t(i, 0) != 0.0) {
        throw DegenerateError("quat_from_axis_angle: zero axis with nonzero angle in row " +
                              std::to_string(i));
      }
      out.row(i) << 1.0, 0.0, 0.0, 0.0;
      continue;
    }
    out(i, 0) = std::cos(h);
    out.block(i, 1, 1, 3) = a.row(i) * (std::sin(h) / n);
  }
  const int ia = axis.id(), it = angle.id();
  return axis.graph()->record(
      "quat_from_axis_angle", std::move(out), {axis, angle}, [ia, it](Graph& g, int, const Tensor& go) {
        const Tensor& a = g.value(ia);
        const Tensor& t = g.value(it);
        Tensor ga = Tensor::Zero(a.rows(), 3);
        Tensor gt = Tensor::Zero(a.rows(), 1);
        for (Eigen::Index i = 0; i < a.rows(); ++i) {
          const double n = a.row(i).norm();
          if (n < 1e-12) {
            gt(i, 0) = -0.5 * std::sin(0.5 * t(i, 0)) * go(i, 0);
            continue;
          }
          const double h = 0.5 * t(i, 0);
          const Eigen::RowVector3d u = a.row(i) / n;
          const Eigen::RowVector3d gv = go.block(i, 1, 1, 3);
          gt(i, 0) = -0.5 * std::sin(h) * go(i, 0) + 0.5 * std::cos(h) * gv.dot(u);
          const Eigen::RowVector3d gu = gv * std::sin(h);
          ga.row(i) = (gu - u * u.dot(gu)) / n;
        }
        g.accumulate(ia, ga);
        g.accumulate(it, gt);
      });
}

Var quat_from_rotation_vector(Var r) {
  require_cols("quat_from_rotation_vector", r, 3);
  // q = (cos(theta/2), r * s(theta)) with s(theta) = sin(theta/2) / theta.
  auto coeffs = [](double th, double& c, double& s, double& ds_over_th) {
    if (th < 1e-2) {
      const double t2 = th * th;
      c = 1.0 - t2 / 8.0 + t2 * t2 / 384.0;
      s = 0.5 - t2 / 48.0 + t2 * t2 / 3840.0;
      ds_over_th = -1.0 / 24.0 + t2 / 960.0;
    } else {
      const double sh = std::sin(0.5 * th), ch = std::cos(0.5 * th);
      c = ch;
      s = sh / th;
      ds_over_th = (0.5 * th * ch - sh) / (th * th * th);
    }
  };
  const Tensor& rv = r.value();
  Tensor out(rv.rows(), 4);
  for (Eigen::Index i = 0; i < rv.rows(); ++i) {
    double c, s, d;
    coeffs(rv.row(i).norm(), c, s, d);
    out(i, 0) = c;
    out.block(i, 1, 1, 3) = rv.row(i) * s;
  }
  const int ir = r.id();
  return r.graph()->record(
      "quat_from_rotation_vector", std::move(out), {r}, [ir, coeffs](Graph& g, int, const Tensor& go) {
        const Tensor& rv = g.value(ir);
        Tensor gr(rv.rows(), 3);
        for (Eigen::Index i = 0; i < rv.rows(); ++i) {
          double c, s, d;
          coeffs(rv.row(i).norm(), c, s, d);
          const Eigen::RowVector3d x = rv.row(i);
          const Eigen::RowVector3d gv = go.block(i, 1, 1, 3);
          gr.row(i) = -0.5 * s * go(i, 0) * x + s * gv + x * (d * x.dot(gv));
        }
        g.accumulate(ir, gr);
      });
}

Var rotmat_from_quat(Var q) {
  require_cols("rotmat_from_quat", q, 4);
  const Tensor& qv = q.value();
  Tensor out(qv.rows(), 9);
  for (Eigen::Index i = 0; i < qv.rows(); ++i) {
    const double n = qv.row(i).norm();
    if (std::abs(n - 1.0) > 1e-6) {
      throw DegenerateError("rotmat_from_quat: quaternion in row " + std::to_string(i) +
                            " has norm " + std::to_string(n));
    }
    const double w = qv(i, 0), x = qv(i, 1), y = qv(i, 2), z = qv(i, 3);
    out.row(i) << w * w + x * x - y * y - z * z, 2 * (x * y - w * z), 2 * (x * z + w * y),
        2 * (x * y + w * z), w * w - x * x + y * y - z * z, 2 * (y * z - w * x),
        2 * (x * z - w * y), 2 * (y * z + w * x), w * w - x * x - y * y + z * z;
  }
  const int iq = q.id();
  return q.graph()->record("rotmat_from_quat", std::move(out), {q}, [iq](Graph& g, int, const Tensor& go) {
    const Tensor& qv = g.value(iq);
    Tensor gq(qv.rows(), 4);
    for (Eigen::Index i = 0; i < qv.rows(); ++i) {
      const double w = qv(i, 0), x = qv(i, 1), y = qv(i, 2), z = qv(i, 3);
      Jac9 dw, dx, dy, dz;
      dw << w, -z, y, z, w, -x, -y, x, w;
      dx << x, y, z, y, -x, -w, z, w, -x;
      dy << -y, x, w, x, y, z, -w, z, -y;
      dz << -z, -w, x, w, -z, y, x, y, z;
      const Jac9 G = go.row(i).transpose();
      gq(i, 0) = 2.0 * G.dot(dw);
      gq(i, 1) = 2.0 * G.dot(dx);
      gq(i, 2) = 2.0 * G.dot(dy);
      gq(i, 3) = 2.0 * G.dot(dz);
    }
    g.accumulate(iq, gq);
  });
}

Var rotmat_from_euler(Var angles) {
  require_cols("rotmat_from_euler", angles, 3);
  const Tensor& e = angles.value();
  Tensor out(e.rows(), 9);
  for (Eigen::Index i = 0; i < e.rows(); ++i) {
    const double sa = std::sin(e(i, 0)), ca = std::cos(e(i, 0));
    const double sb = std::sin(e(i, 1)), cb = std::cos(e(i, 1));
    const double sg = std::sin(e(i, 2)), cg = std::cos(e(i, 2));
    out.row(i) << ca * cb, ca * sb * sg - sa * cg, ca * sb * cg + sa * sg,
        sa * cb, sa * sb * sg + ca * cg, sa * sb * cg - ca * sg,
        -sb, cb * sg, cb * cg;
  }
  const int ie = angles.id();
  return angles.graph()->record(
      "rotmat_from_euler", std::move(out), {angles}, [ie](Graph& g, int, const Tensor& go) {
        const Tensor& e = g.value(ie);
        Tensor ge(e.rows(), 3);
        for (Eigen::Index i = 0; i < e.rows(); ++i) {
          const double sa = std::sin(e(i, 0)), ca = std::cos(e(i, 0));
          const double sb = std::sin(e(i, 1)), cb = std::cos(e(i, 1));
          const double sg = std::sin(e(i, 2)), cg = std::cos(e(i, 2));
          Jac9 da, db, dg;
          da << -sa * cb, -sa * sb * sg - ca * cg, -sa * sb * cg + ca * sg,
              ca * cb, ca * sb * sg - sa * cg, ca * sb * cg + sa * sg,
              0, 0, 0;
          db << -ca * sb, ca * cb * sg, ca * cb * cg,
              -sa * sb, sa * cb * sg, sa * cb * cg,
              -cb, -sb * sg, -sb * cg;
          dg << 0, ca * sb * cg + sa * sg, -ca * sb * sg + sa * cg,
              0, sa * sb * cg - ca * sg, -sa * sb * sg - ca * cg,
              0, cb * cg, -cb * sg;
          const Jac9 G = go.row(i).transpose();
          ge(i, 0) = G.dot(da);
          ge(i, 1) = G.dot(db);
          ge(i, 2) = G.dot(dg);
        }
        g.accumulate(ie, ge);
      });
}

Var rotate_points(Var R, Var X) {
  require_cols("rotate_points", R, 9);
  if (R.graph() != X.graph() || R.rows() != X.rows() || X.cols() % 3 != 0) {
    throw GraphError("rotate_points: expected R (M x 9) and X (M x 3K)");
  }
  const Tensor& Rv = R.value();
  const Tensor& Xv = X.value();
  const Eigen::Index K = Xv.cols() / 3;
  Tensor out(Xv.rows(), Xv.cols());
  for (Eigen::Index i = 0; i < Xv.rows(); ++i) {
    const Eigen::Map<const Eigen::Matrix<double, 3, 3, Eigen::RowMajor>> Ri(Rv.row(i).data());
    const Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>> P(
        Xv.row(i).data(), K, 3);
    Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>> O(out.row(i).data(), K, 3);
    O = P * Ri.transpose();
  }
  const int iR = R.id(), iX = X.id();
  return R.graph()->record("rotate_points", std::move(out), {R, X}, [iR, iX, K](Graph& g, int, const Tensor& go) {
    const Tensor& Rv = g.value(iR);
    const Tensor& Xv = g.value(iX);
    Tensor gR(Rv.rows(), 9), gX(Xv.rows(), Xv.cols());
    using RowMat3 = Eigen::Matrix<double, 3, 3, Eigen::RowMajor>;
    using Points = Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>;
    for (Eigen::Index i = 0; i < Xv.rows(); ++i) {
      const Eigen::Map<const RowMat3> Ri(Rv.row(i).data());
      const Eigen::Map<const Points> P(Xv.row(i).data(), K, 3);
      const Eigen::Map<const Points> G(go.row(i).data(), K, 3);
      Eigen::Map<RowMat3> GR(gR.row(i).data());
      Eigen::Map<Points> GX(gX.row(i).data(), K, 3);
      GR = G.transpose() * P;
      GX = G * Ri;
    }
    g.accumulate(iR, gR);
    g.accumulate(iX, gX);
  });
}

Var project_perspective(Var X, const CameraIntrinsics& K) {
  if (!X.valid() || X.cols() % 3 != 0) throw GraphError("project_perspective: expected M x 3K");
  const Tensor& Xv = X.value();
  const Eigen::Index n = Xv.cols() / 3;
  Tensor out(Xv.rows(), 2 * n);
  for (Eigen::Index i = 0; i < Xv.rows(); ++i) {
    for (Eigen::Index k = 0; k < n; ++k) {
      const double z = Xv(i, 3 * k + 2);
      if (!(z > 0.0)) {
        throw ProjectionError("nonpositive depth in batch row " + std::to_string(i) + ", point " +
                              std::to_string(k));
      }
      out(i, 2 * k) = K.fx * Xv(i, 3 * k) / z + K.cx;
      out(i, 2 * k + 1) = K.fy * Xv(i, 3 * k + 1) / z + K.cy;
    }
  }
  const int ix = X.id();
  const double fx = K.fx, fy = K.fy;
  return X.graph()->record(
      "project_perspective", std::move(out), {X}, [ix, n, fx, fy](Graph& g, int, const Tensor& go) {
        const Tensor& Xv = g.value(ix);
        Tensor gx(Xv.rows(), Xv.cols());
        for (Eigen::Index i = 0; i < Xv.rows(); ++i) {
          for (Eigen::Index k = 0; k < n; ++k) {
            const double x = Xv(i, 3 * k), y = Xv(i, 3 * k + 1), z = Xv(i, 3 * k + 2);
            const double gu = go(i, 2 * k), gv = go(i, 2 * k + 1);
            gx(i, 3 * k) = gu * fx / z;
            gx(i, 3 * k + 1) = gv * fy / z;
            gx(i, 3 * k + 2) = -(gu * fx * x + gv * fy * y) / (z * z);
          }
        }
        g.accumulate(ix, gx);
      });
}

Var gram_upper(Var X, int num_vectors, int dim) {
  if (!X.valid() || num_vectors < 1 || dim < 1 || X.cols() != num_vectors * dim) {
    throw GraphError("gram_upper: expected M x " + std::to_string(num_vectors * dim));
  }
  const Tensor& Xv = X.value();
  const int P = num_vectors * (num_vectors + 1) / 2;
  Tensor out(Xv.rows(), P);
  for (Eigen::Index i = 0; i < Xv.rows(); ++i) {
    int p = 0;
    for (int a = 0; a < num_vectors; ++a) {
      for (int b = a; b < num_vectors; ++b, ++p) {
        out(i, p) = Xv.row(i).segment(a * dim, dim).dot(Xv.row(i).segment(b * dim, dim));
      }
    }
  }
  const int ix = X.id();
  return X.graph()->record(
      "gram_upper", std::move(out), {X}, [ix, num_vectors, dim](Graph& g, int, const Tensor& go) {
        const Tensor& Xv = g.value(ix);
        Tensor gx = Tensor::Zero(Xv.rows(), Xv.cols());
        for (Eigen::Index i = 0; i < Xv.rows(); ++i) {
          int p = 0;
          for (int a = 0; a < num_vectors; ++a) {
            for (int b = a; b < num_vectors; ++b, ++p) {
              const double w = go(i, p);
              gx.row(i).segment(a * dim, dim) += w * Xv.row(i).segment(b * dim, dim);
              gx.row(i).segment(b * dim, dim) += w * Xv.row(i).segment(a * dim, dim);
            }
          }
        }
        g.accumulate(ix, gx);
      });
}

}  // namespace motionadapt::ad
