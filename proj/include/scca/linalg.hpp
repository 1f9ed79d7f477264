#ifndef SCCA_LINALG_HPP
#define SCCA_LINALG_HPP

#include <Eigen/Dense>

#include <cmath>
#include <cstdlib>
#include <string>
#include <vector>

#include "scca/error.hpp"

namespace scca {

/// Numerical thresholds shared by every module.
struct Tolerances {
  double spd_condition_cap = 1e12;  // max eigenvalue ratio for covariance blocks
  double tau_floor = 1e-12;         // root-Pillai at or below this counts as zero
  double sigma_floor = 1e-8;        // lower bound on per-update gradient sd
  double ridge = 0.0;               // optional diagonal loading, off by default

  void validate() const {
    if (!(spd_condition_cap > 0 && tau_floor > 0 && sigma_floor > 0))
      fail(ErrorKind::kValidation, "tolerances must be strictly positive");
    if (!(ridge >= 0)) fail(ErrorKind::kValidation, "ridge must be non-negative");
  }

  // SCCA_SPD_CONDITION_CAP, SCCA_TAU_FLOOR, SCCA_SIGMA_FLOOR, SCCA_RIDGE.
  static Tolerances from_env(Tolerances base) {
    auto read = [](const char* name, double& slot) {
      if (const char* v = std::getenv(name)) {
        char* end = nullptr;
        const double d = std::strtod(v, &end);
        if (end == v || *end != '\0')
          fail(ErrorKind::kValidation, std::string("bad value for ") + name);
        slot = d;
      }
    };
    read("SCCA_SPD_CONDITION_CAP", base.spd_condition_cap);
    read("SCCA_TAU_FLOOR", base.tau_floor);
    read("SCCA_SIGMA_FLOOR", base.sigma_floor);
    read("SCCA_RIDGE", base.ridge);
    base.validate();
    return base;
  }
  static Tolerances from_env() { return from_env(Tolerances()); }
};

// Neumaier compensated sum.
class CompensatedSum {
 public:
  void add(double v) {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v))
      comp_ += (sum_ - t) + v;
    else
      comp_ += (v - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

inline double frobenius_sq(const Eigen::MatrixXd& m) {
  CompensatedSum acc;
  for (Eigen::Index c = 0; c < m.cols(); ++c)
    for (Eigen::Index r = 0; r < m.rows(); ++r) acc.add(m(r, c) * m(r, c));
  return acc.value();
}

/// Symmetric inverse square root of an SPD matrix via eigendecomposition.
/// Rejects (does not regularize) matrices whose condition number exceeds the
/// cap; `what` names the block in the error.
inline Eigen::MatrixXd inv_sqrt_spd(const Eigen::MatrixXd& s, double condition_cap,
                                    const std::string& what) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(s);
  if (eig.info() != Eigen::Success)
    fail(ErrorKind::kNumerical, what + ": eigendecomposition failed");
  const auto& ev = eig.eigenvalues();
  const double hi = ev.maxCoeff();
  const double lo = ev.minCoeff();
  if (!(hi > 0) || !(lo > 0) || hi / lo > condition_cap) {
    const double cond = (lo > 0 && hi > 0) ? hi / lo : INFINITY;
    fail(ErrorKind::kNumerical, what + " is singular or ill-conditioned (condition " +
                                    std::to_string(cond) + ")");
  }
  return eig.eigenvectors() * ev.cwiseSqrt().cwiseInverse().asDiagonal() *
         eig.eigenvectors().transpose();
}

/// Lower Cholesky factor that grows one row/column at a time.
class GrowingCholesky {
 public:
  Eigen::Index size() const { return l_.rows(); }
  const Eigen::MatrixXd& matrix() const { return l_; }

  // Append a variable with covariance `cross` against the current set and
  // variance `diag`. Returns false (and leaves the factor unchanged) when the
  // new pivot is not positive relative to `diag / condition_cap`.
  bool append(const Eigen::VectorXd& cross, double diag, double condition_cap) {
    const Eigen::Index m = l_.rows();
    Eigen::VectorXd l = cross;
    if (m > 0) l_.triangularView<Eigen::Lower>().solveInPlace(l);
    const double pivot = diag - l.squaredNorm();
    if (!(diag > 0) || !(pivot > diag / condition_cap)) return false;
    Eigen::MatrixXd next = Eigen::MatrixXd::Zero(m + 1, m + 1);
    next.topLeftCorner(m, m) = l_;
    next.row(m).head(m) = l.transpose();
    next(m, m) = std::sqrt(pivot);
    l_.swap(next);
    return true;
  }

  // In-place L^{-1} * rhs.
  void solve_lower(Eigen::MatrixXd& rhs) const {
    if (l_.rows() > 0) l_.triangularView<Eigen::Lower>().solveInPlace(rhs);
  }

 private:
  Eigen::MatrixXd l_;
};

// Rows/columns picked out by index lists.
inline Eigen::MatrixXd submatrix(const Eigen::MatrixXd& m,
                                 const std::vector<Eigen::Index>& rows,
                                 const std::vector<Eigen::Index>& cols) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()),
                      static_cast<Eigen::Index>(cols.size()));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < cols.size(); ++c)
      out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = m(rows[r], cols[c]);
  return out;
}

inline Eigen::MatrixXd select_columns(const Eigen::MatrixXd& m,
                                      const std::vector<Eigen::Index>& cols,
                                      Eigen::Index rows) {
  Eigen::MatrixXd out(rows, static_cast<Eigen::Index>(cols.size()));
  for (std::size_t c = 0; c < cols.size(); ++c)
    out.col(static_cast<Eigen::Index>(c)) = m.col(cols[c]).head(rows);
  return out;
}

}  // namespace scca

#endif  // SCCA_LINALG_HPP
