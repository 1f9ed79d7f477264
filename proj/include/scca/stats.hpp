#ifndef SCCA_STATS_HPP
#define SCCA_STATS_HPP

// Sample moments, coherence blocks, and the (root-)Pillai objectives.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "scca/data.hpp"
#include "scca/error.hpp"
#include "scca/linalg.hpp"

namespace scca {

/// A selection of X columns (k_set) and Y columns (j_set).
struct IndexPair {
  std::vector<Eigen::Index> k_set;
  std::vector<Eigen::Index> j_set;

  Eigen::Index s_x() const { return static_cast<Eigen::Index>(k_set.size()); }
  Eigen::Index s_y() const { return static_cast<Eigen::Index>(j_set.size()); }

  void validate(Eigen::Index p, Eigen::Index q) const {
    auto check = [](const std::vector<Eigen::Index>& set, Eigen::Index bound,
                    const char* side) {
      if (set.empty() || static_cast<Eigen::Index>(set.size()) > bound)
        fail(ErrorKind::kValidation, std::string(side) + " selection size " +
                                         std::to_string(set.size()) +
                                         " outside [1, " + std::to_string(bound) + "]");
      std::vector<Eigen::Index> sorted = set;
      std::sort(sorted.begin(), sorted.end());
      if (sorted.front() < 0 || sorted.back() >= bound)
        fail(ErrorKind::kValidation, std::string(side) + " index out of range");
      if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
        fail(ErrorKind::kValidation, std::string(side) + " selection has duplicates");
    };
    check(k_set, p, "X");
    check(j_set, q, "Y");
  }

  bool operator==(const IndexPair&) const = default;
};

/// Sample moments of a selected pair on a row prefix, plus the coherence
/// matrix S_X^{-1/2} S_XY S_Y^{-1/2}. Covariances use divisor `rows`.
struct CoherenceBlock {
  Eigen::MatrixXd sigma_xk;
  Eigen::MatrixXd sigma_yj;
  Eigen::MatrixXd sigma_xy;
  Eigen::MatrixXd coherence;
  Eigen::VectorXd mean_x;
  Eigen::VectorXd mean_y;
  Eigen::Index rows = 0;
};

/// Plug-in (divisor-n) mean and covariance of the columns of `m`.
inline void plugin_moments(const Eigen::MatrixXd& m, Eigen::VectorXd& mean,
                           Eigen::MatrixXd& centered) {
  mean = m.colwise().mean().transpose();
  centered = m.rowwise() - mean.transpose();
}

inline CoherenceBlock coherence_block(const PairedDataset& data, const IndexPair& d,
                                      Eigen::Index rows, const Tolerances& tol = {}) {
  d.validate(data.p(), data.q());
  if (rows > data.n() || rows < d.s_x() + d.s_y() + 2)
    fail(ErrorKind::kValidation,
         "prefix of " + std::to_string(rows) + " rows cannot support a " +
             std::to_string(d.s_x()) + "x" + std::to_string(d.s_y()) +
             " block (need at least s_x + s_y + 2, at most n)");

  CoherenceBlock b;
  b.rows = rows;
  Eigen::MatrixXd xc, yc;
  plugin_moments(select_columns(data.x(), d.k_set, rows), b.mean_x, xc);
  plugin_moments(select_columns(data.y(), d.j_set, rows), b.mean_y, yc);
  const double inv_n = 1.0 / static_cast<double>(rows);
  b.sigma_xk = (xc.transpose() * xc) * inv_n;
  b.sigma_yj = (yc.transpose() * yc) * inv_n;
  b.sigma_xy = (xc.transpose() * yc) * inv_n;
  if (tol.ridge > 0) {
    b.sigma_xk.diagonal().array() += tol.ridge;
    b.sigma_yj.diagonal().array() += tol.ridge;
  }
  const Eigen::MatrixXd rx =
      inv_sqrt_spd(b.sigma_xk, tol.spd_condition_cap, "covariance of selected X columns");
  const Eigen::MatrixXd ry =
      inv_sqrt_spd(b.sigma_yj, tol.spd_condition_cap, "covariance of selected Y columns");
  b.coherence = rx * b.sigma_xy * ry;
  return b;
}

/// Squared Frobenius norm of the coherence matrix (sum of squared sample
/// canonical correlations).
inline double pillai_trace(const CoherenceBlock& block) {
  return frobenius_sq(block.coherence);
}

struct RootPillai {
  double value = 0.0;
  bool degenerate = false;  // trace fell at or below the tau floor
};

inline RootPillai root_pillai(const CoherenceBlock& block, const Tolerances& tol = {}) {
  const double r = std::sqrt(std::max(0.0, pillai_trace(block)));
  if (r <= tol.tau_floor) return {0.0, true};
  return {r, false};
}

}  // namespace scca

#endif  // SCCA_STATS_HPP
