#ifndef SCCA_GRADIENT_HPP
#define SCCA_GRADIENT_HPP

// Canonical gradient of the root-Pillai (and Pillai) functional at the
// empirical distribution of a row prefix.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <string>

#include "scca/data.hpp"
#include "scca/error.hpp"
#include "scca/linalg.hpp"
#include "scca/stats.hpp"

namespace scca {

/// Which functional the gradient differentiates.
enum class Target {
  kRootPillai,  // ||C||_F, the recommended target
  kPillai,      // ||C||_F^2; kept for bias comparisons only
};

inline const char* to_string(Target t) { return t == Target::kRootPillai ? "root" : "square"; }

/// Everything needed to evaluate the gradient at new observations, built
/// once per stream update.
///
/// With Sx, Sy, Sxy the prefix covariances of the selected columns:
///   a_x     = Sx^-1 Sxy Sy^-1 Syx Sx^-1
///   a_y     = Sy^-1 Syx Sx^-1 Sxy Sy^-1
///   a_cross = Sy^-1 Syx Sx^-1
/// so that dPhi(o) = -x'a_x x - y'a_y y + 2 y'a_cross x for centered (x, y).
struct GradientContext {
  IndexPair d;
  CoherenceBlock block;
  double phi = 0.0;  // Pillai trace at the prefix
  double psi = 0.0;  // root-Pillai (0 when degenerate)
  bool degenerate = false;
  Target target = Target::kRootPillai;

  Eigen::MatrixXd a_x;
  Eigen::MatrixXd a_y;
  Eigen::MatrixXd a_cross;
  // Degenerate fallback: gradient is y' fallback x with
  // fallback = Sy^-1/2 L Sx^-1/2 and L a unit-Frobenius s_y x s_x matrix.
  Eigen::MatrixXd fallback;

  /// Plug-in value of the targeted functional.
  double value() const { return target == Target::kRootPillai ? psi : phi; }
};

inline GradientContext build_context(const PairedDataset& data, const IndexPair& d,
                                     Eigen::Index rows, Target target = Target::kRootPillai,
                                     const Tolerances& tol = {}) {
  GradientContext ctx;
  ctx.d = d;
  ctx.target = target;
  ctx.block = coherence_block(data, d, rows, tol);
  const auto& b = ctx.block;
  ctx.phi = pillai_trace(b);
  const RootPillai rp = root_pillai(b, tol);
  ctx.psi = rp.value;
  ctx.degenerate = target == Target::kRootPillai && rp.degenerate;

  const Eigen::LLT<Eigen::MatrixXd> llt_x(b.sigma_xk);
  const Eigen::LLT<Eigen::MatrixXd> llt_y(b.sigma_yj);
  if (llt_x.info() != Eigen::Success || llt_y.info() != Eigen::Success)
    fail(ErrorKind::kNumerical, "gradient context: covariance factorization failed");
  const Eigen::MatrixXd sx_inv_sxy = llt_x.solve(b.sigma_xy);                // Sx^-1 Sxy
  const Eigen::MatrixXd sy_inv_syx = llt_y.solve(b.sigma_xy.transpose());    // Sy^-1 Syx
  ctx.a_cross = sy_inv_syx * llt_x.solve(Eigen::MatrixXd::Identity(d.s_x(), d.s_x()));
  ctx.a_x = sx_inv_sxy * ctx.a_cross;
  ctx.a_y = sy_inv_syx * llt_x.solve(b.sigma_xy) *
            llt_y.solve(Eigen::MatrixXd::Identity(d.s_y(), d.s_y()));
  ctx.a_x = 0.5 * (ctx.a_x + ctx.a_x.transpose());
  ctx.a_y = 0.5 * (ctx.a_y + ctx.a_y.transpose());

  if (ctx.degenerate) {
    // L = C/||C||_F when C is nonzero, else the outer product of the leading
    // singular vectors of C. Either way L has unit Frobenius norm.
    const Eigen::MatrixXd c_yx = b.coherence.transpose();
    const double norm = std::sqrt(ctx.phi);
    Eigen::MatrixXd l;
    if (norm > 0) {
      l = c_yx / norm;
    } else {
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(c_yx, Eigen::ComputeThinU | Eigen::ComputeThinV);
      l = svd.matrixU().col(0) * svd.matrixV().col(0).transpose();
    }
    const Eigen::MatrixXd rx = inv_sqrt_spd(b.sigma_xk, tol.spd_condition_cap, "X block");
    const Eigen::MatrixXd ry = inv_sqrt_spd(b.sigma_yj, tol.spd_condition_cap, "Y block");
    ctx.fallback = ry * l * rx;
  }
  return ctx;
}

/// Derivative of the Pillai trace along contamination towards `x`, `y`
/// (full-width rows of X and Y).
template <class RowX, class RowY>
double pillai_derivative(const GradientContext& ctx, const RowX& x, const RowY& y) {
  const auto sx = ctx.d.s_x(), sy = ctx.d.s_y();
  Eigen::VectorXd xc(sx), yc(sy);
  for (Eigen::Index i = 0; i < sx; ++i)
    xc(i) = x(ctx.d.k_set[static_cast<std::size_t>(i)]) - ctx.block.mean_x(i);
  for (Eigen::Index i = 0; i < sy; ++i)
    yc(i) = y(ctx.d.j_set[static_cast<std::size_t>(i)]) - ctx.block.mean_y(i);
  return -xc.dot(ctx.a_x * xc) - yc.dot(ctx.a_y * yc) + 2.0 * yc.dot(ctx.a_cross * xc);
}

/// Gradient of the targeted functional at one observation. For the
/// root-Pillai target this is dPhi / (2 psi); degenerate contexts use the
/// bilinear fallback form.
template <class RowX, class RowY>
double evaluate(const GradientContext& ctx, const RowX& x, const RowY& y) {
  if (ctx.target == Target::kPillai) return pillai_derivative(ctx, x, y);
  if (ctx.degenerate) {
    const auto sx = ctx.d.s_x(), sy = ctx.d.s_y();
    Eigen::VectorXd xc(sx), yc(sy);
    for (Eigen::Index i = 0; i < sx; ++i)
      xc(i) = x(ctx.d.k_set[static_cast<std::size_t>(i)]) - ctx.block.mean_x(i);
    for (Eigen::Index i = 0; i < sy; ++i)
      yc(i) = y(ctx.d.j_set[static_cast<std::size_t>(i)]) - ctx.block.mean_y(i);
    return yc.dot(ctx.fallback * xc);
  }
  return pillai_derivative(ctx, x, y) / (2.0 * ctx.psi);
}

inline double evaluate_row(const GradientContext& ctx, const PairedDataset& data,
                           Eigen::Index row) {
  return evaluate(ctx, data.x().row(row), data.y().row(row));
}

struct GradientSpread {
  double variance = 0.0;  // sd^2 after flooring
  double sd = 0.0;        // max(raw sd, sigma_floor)
  double mean = 0.0;      // ~0 at the plug-in; diagnostic
  double max_abs = 0.0;
};

/// Plug-in variance (divisor `rows`) of the gradient over the prefix rows.
inline GradientSpread empirical_variance(const GradientContext& ctx, const PairedDataset& data,
                                         Eigen::Index rows, const Tolerances& tol = {}) {
  Eigen::VectorXd g(rows);
  for (Eigen::Index i = 0; i < rows; ++i) g(i) = evaluate_row(ctx, data, i);
  GradientSpread s;
  s.mean = g.mean();
  s.max_abs = g.cwiseAbs().maxCoeff();
  const double raw = (g.array() - s.mean).square().sum() / static_cast<double>(rows);
  s.sd = std::max(std::sqrt(raw), tol.sigma_floor);
  s.variance = s.sd * s.sd;
  return s;
}

}  // namespace scca

#endif  // SCCA_GRADIENT_HPP
