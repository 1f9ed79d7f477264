#ifndef SCCA_MOMENTS_HPP
#define SCCA_MOMENTS_HPP

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "scca/data.hpp"
#include "scca/error.hpp"
#include "scca/linalg.hpp"

namespace scca {

/// Plug-in moments of a growing row prefix.
///
/// The full p x q cross-covariance and the per-column variances are kept up
/// to date with one rank-1 (Welford) update per row; within-block covariance
/// columns are only formed on demand, since greedy search touches just the
/// selected ones. All covariances use divisor `rows()`.
class PrefixMoments {
 public:
  explicit PrefixMoments(const PairedDataset& data, Tolerances tol = {})
      : data_(&data), tol_(tol),
        mean_x_(Eigen::VectorXd::Zero(data.p())),
        mean_y_(Eigen::VectorXd::Zero(data.q())),
        m2_x_(Eigen::VectorXd::Zero(data.p())),
        m2_y_(Eigen::VectorXd::Zero(data.q())),
        co_xy_(Eigen::MatrixXd::Zero(data.p(), data.q())) {}

  static PrefixMoments at(const PairedDataset& data, Eigen::Index rows,
                          Tolerances tol = {}) {
    PrefixMoments m(data, tol);
    m.advance_to(rows);
    return m;
  }

  void advance_to(Eigen::Index rows) {
    if (rows < rows_ || rows > data_->n())
      fail(ErrorKind::kValidation, "cannot move prefix from " + std::to_string(rows_) +
                                       " to " + std::to_string(rows) + " rows");
    const auto& x = data_->x();
    const auto& y = data_->y();
    Eigen::VectorXd dx(data_->p()), dy_new(data_->q());
    for (Eigen::Index i = rows_; i < rows; ++i) {
      const double n = static_cast<double>(i + 1);
      dx = x.row(i).transpose() - mean_x_;
      mean_x_ += dx / n;
      const Eigen::VectorXd dy = y.row(i).transpose() - mean_y_;
      mean_y_ += dy / n;
      dy_new = y.row(i).transpose() - mean_y_;
      co_xy_.noalias() += dx * dy_new.transpose();
      m2_x_.array() += dx.array() * (x.row(i).transpose() - mean_x_).array();
      m2_y_.array() += dy.array() * dy_new.array();
    }
    rows_ = rows;
    if (rows_ > 0) {
      const double inv = 1.0 / static_cast<double>(rows_);
      cross_ = co_xy_ * inv;
      var_x_ = m2_x_ * inv;
      var_y_ = m2_y_ * inv;
      var_x_.array() += tol_.ridge;
      var_y_.array() += tol_.ridge;
    }
  }

  Eigen::Index rows() const { return rows_; }
  Eigen::Index p() const { return data_->p(); }
  Eigen::Index q() const { return data_->q(); }
  const PairedDataset& data() const { return *data_; }
  const Tolerances& tolerances() const { return tol_; }

  const Eigen::VectorXd& mean_x() const { return mean_x_; }
  const Eigen::VectorXd& mean_y() const { return mean_y_; }
  const Eigen::MatrixXd& cross() const { return cross_; }  // S_XY, p x q
  const Eigen::VectorXd& var_x() const { return var_x_; }
  const Eigen::VectorXd& var_y() const { return var_y_; }

  // Column k of S_XX (length p).
  Eigen::VectorXd xx_column(Eigen::Index k) const {
    Eigen::VectorXd c = block_column(data_->x(), mean_x_, k);
    c(k) = var_x_(k);
    return c;
  }

  // Column j of S_YY (length q).
  Eigen::VectorXd yy_column(Eigen::Index j) const {
    Eigen::VectorXd c = block_column(data_->y(), mean_y_, j);
    c(j) = var_y_(j);
    return c;
  }

  Eigen::MatrixXd xx_matrix() const { return full_block(data_->x(), mean_x_, var_x_); }
  Eigen::MatrixXd yy_matrix() const { return full_block(data_->y(), mean_y_, var_y_); }

 private:
  Eigen::VectorXd block_column(const Eigen::MatrixXd& m, const Eigen::VectorXd& mean,
                               Eigen::Index col) const {
    const Eigen::VectorXd centered =
        m.col(col).head(rows_).array() - mean(col);
    const double inv = 1.0 / static_cast<double>(rows_);
    Eigen::VectorXd out = (m.topRows(rows_).transpose() * centered) * inv;
    out -= mean * (centered.sum() * inv);
    return out;
  }

  Eigen::MatrixXd full_block(const Eigen::MatrixXd& m, const Eigen::VectorXd& mean,
                             const Eigen::VectorXd& var) const {
    const Eigen::MatrixXd c = m.topRows(rows_).rowwise() - mean.transpose();
    Eigen::MatrixXd s = (c.transpose() * c) / static_cast<double>(rows_);
    s.diagonal() = var;
    return s;
  }

  const PairedDataset* data_;
  Tolerances tol_;
  Eigen::Index rows_ = 0;
  Eigen::VectorXd mean_x_, mean_y_;
  Eigen::VectorXd m2_x_, m2_y_;
  Eigen::MatrixXd co_xy_;
  Eigen::MatrixXd cross_;
  Eigen::VectorXd var_x_, var_y_;
};

}  // namespace scca

#endif  // SCCA_MOMENTS_HPP
