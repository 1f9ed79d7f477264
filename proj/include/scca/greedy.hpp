#ifndef SCCA_GREEDY_HPP
#define SCCA_GREEDY_HPP

// Maximization of the (root-)Pillai trace over index pairs: exact
// enumeration for small problems and forward greedy search driven by the
// exact regression-residual increments of the trace.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "scca/data.hpp"
#include "scca/error.hpp"
#include "scca/linalg.hpp"
#include "scca/moments.hpp"
#include "scca/stats.hpp"

namespace scca {

enum class Side { kX, kY };

inline const char* to_string(Side s) { return s == Side::kX ? "X" : "Y"; }

/// What greedy search compares when choosing the next variable. Both give
/// the same choices; root-Pillai increments are a monotone map of the
/// Pillai increments at a fixed current trace.
enum class GreedyObjective { kPillai, kRootPillai };

struct StepRecord {
  Side side;
  Eigen::Index index;
  double increment;  // exact Pillai-trace increment
};

/// Least-squares residual of a target column on a set of given columns of
/// the same block, all centered on the first `rows` observations.
inline Eigen::VectorXd residual_column(const PairedDataset& data, Eigen::Index target,
                                       const std::vector<Eigen::Index>& given, Side side,
                                       Eigen::Index rows, const Tolerances& tol = {}) {
  const Eigen::MatrixXd& block = side == Side::kX ? data.x() : data.y();
  if (target < 0 || target >= block.cols())
    fail(ErrorKind::kValidation, "residual target index out of range");
  if (rows < 2 || rows > data.n())
    fail(ErrorKind::kValidation, "residual prefix length out of range");
  Eigen::VectorXd t = block.col(target).head(rows);
  t.array() -= t.mean();
  if (given.empty()) return t;

  Eigen::MatrixXd g = select_columns(block, given, rows);
  g.rowwise() -= g.colwise().mean();
  const Eigen::MatrixXd gram = (g.transpose() * g) / static_cast<double>(rows);
  inv_sqrt_spd(gram, tol.spd_condition_cap, "regression design");  // rejects singular
  const Eigen::VectorXd coef = g.colPivHouseholderQr().solve(t);
  return t - g * coef;
}

/// Partially built selection plus the factorizations needed to score every
/// remaining candidate in one pass.
class GreedyState {
 public:
  struct Candidates {
    Eigen::VectorXd increment;  // -inf for already selected columns
    std::vector<char> addable;  // residual variance is non-degenerate
  };

  explicit GreedyState(const PrefixMoments& moments)
      : m_(&moments),
        in_x_(static_cast<std::size_t>(moments.p()), 0),
        in_y_(static_cast<std::size_t>(moments.q()), 0),
        xx_cols_(moments.p(), 0),
        yy_cols_(moments.q(), 0) {}

  const IndexPair& current() const { return cur_; }
  double trace_sq() const { return trace_.value(); }
  const std::vector<StepRecord>& step_log() const { return log_; }
  bool has_x(Eigen::Index k) const { return in_x_[static_cast<std::size_t>(k)]; }
  bool has_y(Eigen::Index j) const { return in_y_[static_cast<std::size_t>(j)]; }

  /// Increments ||C_{E_{j|J} X_K}||_F^2 for every Y column j.
  Candidates y_candidates() const {
    return score(m_->cross(), m_->var_y(), yy_cols_, ly_, lx_, cur_.j_set, cur_.k_set,
                 in_y_);
  }

  /// Increments ||C_{Y_J R_{k|K}}||_F^2 for every X column k.
  Candidates x_candidates() const {
    return score(m_->cross().transpose(), m_->var_x(), xx_cols_, lx_, ly_, cur_.k_set,
                 cur_.j_set, in_x_);
  }

  double increment_y(Eigen::Index j) const {
    check_candidate(Side::kY, j);
    return y_candidates().increment(j);
  }

  double increment_x(Eigen::Index k) const {
    check_candidate(Side::kX, k);
    return x_candidates().increment(k);
  }

  void add_y(Eigen::Index j, double increment) {
    check_candidate(Side::kY, j);
    Eigen::VectorXd col = m_->yy_column(j);
    append(ly_, yy_cols_, col, cur_.j_set, j, m_->var_y()(j), Side::kY);
    in_y_[static_cast<std::size_t>(j)] = 1;
    accept(Side::kY, j, increment);
  }

  void add_x(Eigen::Index k, double increment) {
    check_candidate(Side::kX, k);
    Eigen::VectorXd col = m_->xx_column(k);
    append(lx_, xx_cols_, col, cur_.k_set, k, m_->var_x()(k), Side::kX);
    in_x_[static_cast<std::size_t>(k)] = 1;
    accept(Side::kX, k, increment);
  }

  /// Pillai trace of the current selection recomputed from its moments.
  double recompute_trace_sq() const {
    if (cur_.k_set.empty() || cur_.j_set.empty()) return 0.0;
    Eigen::MatrixXd m = submatrix(m_->cross(), cur_.k_set, cur_.j_set);
    lx_.solve_lower(m);
    Eigen::MatrixXd mt = m.transpose();
    ly_.solve_lower(mt);
    return frobenius_sq(mt);
  }

 private:
  // Scores candidates on the "own" side given the other side's selection.
  // `cross_other_own` is S_{other, own} (rows: other block columns).
  static Candidates score(const Eigen::MatrixXd& cross_other_own,
                          const Eigen::VectorXd& var_own,
                          const Eigen::MatrixXd& own_cols, const GrowingCholesky& l_own,
                          const GrowingCholesky& l_other,
                          const std::vector<Eigen::Index>& own_set,
                          const std::vector<Eigen::Index>& other_set,
                          const std::vector<char>& selected) {
    const Eigen::Index n_own = var_own.size();
    const auto a = static_cast<Eigen::Index>(other_set.size());
    const auto b = static_cast<Eigen::Index>(own_set.size());

    Eigen::VectorXd resid_var = var_own;
    Eigen::MatrixXd g(a, n_own);  // cov(other selected, residual of candidate)
    for (Eigen::Index r = 0; r < a; ++r) g.row(r) = cross_other_own.row(other_set[r]);
    if (b > 0) {
      Eigen::MatrixXd w = own_cols.transpose();  // S_{own set, all own}
      l_own.solve_lower(w);
      resid_var -= w.colwise().squaredNorm().transpose();
      if (a > 0) {
        Eigen::MatrixXd s_other_own_set(b, a);  // transpose of S_{other set, own set}
        for (Eigen::Index c = 0; c < b; ++c)
          for (Eigen::Index r = 0; r < a; ++r)
            s_other_own_set(c, r) = cross_other_own(other_set[r], own_set[c]);
        l_own.solve_lower(s_other_own_set);  // L_own^{-1} S_{own set, other set}
        g.noalias() -= s_other_own_set.transpose() * w;
      }
    }
    if (a > 0) l_other.solve_lower(g);

    Candidates out;
    out.increment.resize(n_own);
    out.addable.assign(static_cast<std::size_t>(n_own), 0);
    for (Eigen::Index c = 0; c < n_own; ++c) {
      if (selected[static_cast<std::size_t>(c)]) {
        out.increment(c) = -std::numeric_limits<double>::infinity();
        continue;
      }
      const double v = resid_var(c);
      const double scale = var_own(c);
      if (!(scale > 0) || !(v > scale * kCollinearRel)) {
        out.increment(c) = 0.0;  // candidate is (numerically) in the span
        continue;
      }
      out.addable[static_cast<std::size_t>(c)] = 1;
      out.increment(c) = a > 0 ? g.col(c).squaredNorm() / v : 0.0;
    }
    return out;
  }

  void append(GrowingCholesky& l, Eigen::MatrixXd& cols, const Eigen::VectorXd& col,
              std::vector<Eigen::Index>& set, Eigen::Index idx, double diag, Side side) {
    Eigen::VectorXd cross(static_cast<Eigen::Index>(set.size()));
    for (std::size_t i = 0; i < set.size(); ++i)
      cross(static_cast<Eigen::Index>(i)) = col(set[i]);
    if (!l.append(cross, diag, m_->tolerances().spd_condition_cap))
      fail(ErrorKind::kNumerical,
           "greedy step " + std::to_string(log_.size() + 1) + ": adding " +
               to_string(side) + " column " + std::to_string(idx) +
               " makes the selected covariance singular");
    cols.conservativeResize(Eigen::NoChange, cols.cols() + 1);
    cols.col(cols.cols() - 1) = col;
    set.push_back(idx);
  }

  void accept(Side side, Eigen::Index idx, double increment) {
    if (increment < 0) {
      if (increment < -kNegativeSlack)
        fail(ErrorKind::kInternal, "negative Pillai increment " + std::to_string(increment));
      increment = 0.0;
    }
    trace_.add(increment);
    log_.push_back({side, idx, increment});
  }

  void check_candidate(Side side, Eigen::Index idx) const {
    const auto bound = side == Side::kX ? m_->p() : m_->q();
    if (idx < 0 || idx >= bound)
      fail(ErrorKind::kValidation, std::string(to_string(side)) + " candidate out of range");
    if (side == Side::kX ? has_x(idx) : has_y(idx))
      fail(ErrorKind::kValidation, std::string(to_string(side)) + " column " +
                                       std::to_string(idx) + " is already selected");
  }

  static constexpr double kCollinearRel = 1e-12;
  static constexpr double kNegativeSlack = 1e-12;

  const PrefixMoments* m_;
  IndexPair cur_;
  std::vector<char> in_x_, in_y_;
  Eigen::MatrixXd xx_cols_, yy_cols_;  // S_XX[:, K] and S_YY[:, J]
  GrowingCholesky lx_, ly_;
  CompensatedSum trace_;
  std::vector<StepRecord> log_;
};

namespace detail {

// First index attaining the maximum among addable candidates; -1 if none.
inline Eigen::Index argmax_addable(const GreedyState::Candidates& c) {
  Eigen::Index best = -1;
  for (Eigen::Index i = 0; i < c.increment.size(); ++i)
    if (c.addable[static_cast<std::size_t>(i)] &&
        (best < 0 || c.increment(i) > c.increment(best)))
      best = i;
  return best;
}

inline double root_gain(double trace_sq, double inc) {
  return inc / (std::sqrt(trace_sq + inc) + std::sqrt(trace_sq));
}

// Best single pair by squared marginal correlation; lowest X index, then
// lowest Y index, on ties.
inline std::pair<Eigen::Index, Eigen::Index> best_pair(const PrefixMoments& m,
                                                       double* corr_sq = nullptr) {
  Eigen::Index bk = -1, bj = -1;
  double best = -1.0;
  for (Eigen::Index k = 0; k < m.p(); ++k) {
    const double vx = m.var_x()(k);
    if (!(vx > 0)) continue;
    for (Eigen::Index j = 0; j < m.q(); ++j) {
      const double vy = m.var_y()(j);
      if (!(vy > 0)) continue;
      const double c = m.cross()(k, j);
      const double r2 = c * c / (vx * vy);
      if (r2 > best) {
        best = r2;
        bk = k;
        bj = j;
      }
    }
  }
  if (bk < 0) fail(ErrorKind::kNumerical, "every column has zero variance");
  if (corr_sq) *corr_sq = best;
  return {bk, bj};
}

inline void check_sizes(const PrefixMoments& m, Eigen::Index s_x, Eigen::Index s_y) {
  if (s_x < 1 || s_x > m.p() || s_y < 1 || s_y > m.q())
    fail(ErrorKind::kValidation, "sparsity levels (" + std::to_string(s_x) + ", " +
                                     std::to_string(s_y) + ") outside [1, p] x [1, q] = [1, " +
                                     std::to_string(m.p()) + "] x [1, " +
                                     std::to_string(m.q()) + "]");
  if (m.rows() < s_x + s_y + 2)
    fail(ErrorKind::kValidation, "prefix of " + std::to_string(m.rows()) +
                                     " rows is too short for s_x + s_y = " +
                                     std::to_string(s_x + s_y));
}

}  // namespace detail

inline double pillai_from_moments(const PrefixMoments& m, const IndexPair& d);

struct SelectionResult {
  IndexPair selection;  // indices sorted ascending
  double trace_sq = 0.0;  // pillai_from_moments of the selection
  std::vector<StepRecord> step_log;
};

/// Forward greedy search: start from the best single pair, then add
/// whichever side/index has the larger exact increment while both sides are
/// unsaturated (X wins exact ties), then fill the remaining side.
inline SelectionResult greedy_select(const PrefixMoments& m, Eigen::Index s_x,
                                     Eigen::Index s_y,
                                     GreedyObjective objective = GreedyObjective::kPillai) {
  detail::check_sizes(m, s_x, s_y);
  GreedyState state(m);
  double r2 = 0.0;
  const auto [k0, j0] = detail::best_pair(m, &r2);
  state.add_x(k0, 0.0);
  state.add_y(j0, state.increment_y(j0));

  while (state.current().s_x() < s_x || state.current().s_y() < s_y) {
    const bool need_x = state.current().s_x() < s_x;
    const bool need_y = state.current().s_y() < s_y;
    GreedyState::Candidates cx, cy;
    Eigen::Index bx = -1, by = -1;
    if (need_x) bx = detail::argmax_addable(cx = state.x_candidates());
    if (need_y) by = detail::argmax_addable(cy = state.y_candidates());
    if ((need_x && bx < 0) || (need_y && by < 0))
      fail(ErrorKind::kNumerical,
           "greedy step " + std::to_string(state.step_log().size() + 1) +
               ": every remaining " + (need_x && bx < 0 ? "X" : "Y") +
               " candidate is collinear with the current selection");
    bool take_y = need_y && !need_x;
    if (need_x && need_y) {
      double gx = cx.increment(bx), gy = cy.increment(by);
      if (objective == GreedyObjective::kRootPillai) {
        gx = detail::root_gain(state.trace_sq(), gx);
        gy = detail::root_gain(state.trace_sq(), gy);
      }
      take_y = gy > gx;
    }
    if (take_y)
      state.add_y(by, cy.increment(by));
    else
      state.add_x(bx, cx.increment(bx));
  }
  SelectionResult out{state.current(), state.trace_sq(), state.step_log()};
  std::sort(out.selection.k_set.begin(), out.selection.k_set.end());
  std::sort(out.selection.j_set.begin(), out.selection.j_set.end());
  // Same evaluation as full_search, so equal selections report equal values.
  out.trace_sq = pillai_from_moments(m, out.selection);
  return out;
}

/// Pillai trace of an arbitrary selection from prefix moments (Cholesky
/// whitening). Empty sides give 0.
inline double pillai_from_moments(const PrefixMoments& m, const IndexPair& d) {
  if (d.k_set.empty() || d.j_set.empty()) return 0.0;
  const double cap = m.tolerances().spd_condition_cap;
  auto factor = [cap](const std::vector<Eigen::Index>& set, auto column, auto var,
                      const char* side) {
    GrowingCholesky l;
    for (std::size_t i = 0; i < set.size(); ++i) {
      const Eigen::VectorXd col = column(set[i]);
      Eigen::VectorXd cross(static_cast<Eigen::Index>(i));
      for (std::size_t t = 0; t < i; ++t) cross(static_cast<Eigen::Index>(t)) = col(set[t]);
      if (!l.append(cross, var(set[i]), cap))
        fail(ErrorKind::kNumerical, std::string("covariance of selected ") + side +
                                        " columns is singular");
    }
    return l;
  };
  const auto lx = factor(d.k_set, [&](Eigen::Index k) { return m.xx_column(k); },
                         [&](Eigen::Index k) { return m.var_x()(k); }, "X");
  const auto ly = factor(d.j_set, [&](Eigen::Index j) { return m.yy_column(j); },
                         [&](Eigen::Index j) { return m.var_y()(j); }, "Y");
  Eigen::MatrixXd c = submatrix(m.cross(), d.k_set, d.j_set);
  lx.solve_lower(c);
  Eigen::MatrixXd ct = c.transpose();
  ly.solve_lower(ct);
  return frobenius_sq(ct);
}

inline double root_pillai_from_moments(const PrefixMoments& m, const IndexPair& d) {
  return std::sqrt(std::max(0.0, pillai_from_moments(m, d)));
}

namespace detail {

inline double binomial(Eigen::Index n, Eigen::Index k) {
  if (k < 0 || k > n) return 0.0;
  double r = 1.0;
  for (Eigen::Index i = 1; i <= k; ++i)
    r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
  return std::round(r);
}

// Visit all k-subsets of {0..n-1} in lexicographic order.
template <class Fn>
void for_each_combination(Eigen::Index n, Eigen::Index k, Fn&& fn) {
  if (k < 0 || k > n) return;
  std::vector<Eigen::Index> c(static_cast<std::size_t>(k));
  for (Eigen::Index i = 0; i < k; ++i) c[static_cast<std::size_t>(i)] = i;
  while (true) {
    fn(static_cast<const std::vector<Eigen::Index>&>(c));
    Eigen::Index i = k - 1;
    while (i >= 0 && c[static_cast<std::size_t>(i)] == n - k + i) --i;
    if (i < 0) return;
    ++c[static_cast<std::size_t>(i)];
    for (Eigen::Index t = i + 1; t < k; ++t)
      c[static_cast<std::size_t>(t)] = c[static_cast<std::size_t>(t - 1)] + 1;
  }
}

// Inverse of the lower Cholesky factor of a small SPD block.
inline Eigen::MatrixXd inv_chol(const Eigen::MatrixXd& s, double cap, const char* side) {
  GrowingCholesky l;
  for (Eigen::Index i = 0; i < s.rows(); ++i)
    if (!l.append(s.col(i).head(i), s(i, i), cap))
      fail(ErrorKind::kNumerical,
           std::string("full search: singular covariance among ") + side + " columns");
  Eigen::MatrixXd inv = Eigen::MatrixXd::Identity(s.rows(), s.rows());
  l.solve_lower(inv);
  return inv;
}

}  // namespace detail

struct FullSearchResult {
  IndexPair selection;
  double trace_sq = 0.0;
  // Set when requested: maximum over all |K| <= s_x, |J| <= s_y.
  std::optional<double> trace_sq_up_to;
};

inline constexpr double kDefaultFullSearchCap = 1e6;

/// Exhaustive maximization of the Pillai trace over |K| = s_x, |J| = s_y.
/// Ties keep the lexicographically first (K, J).
inline FullSearchResult full_search(const PrefixMoments& m, Eigen::Index s_x,
                                    Eigen::Index s_y, double cap = kDefaultFullSearchCap,
                                    bool certify_smaller = false) {
  detail::check_sizes(m, s_x, s_y);
  const double combos = detail::binomial(m.p(), s_x) * detail::binomial(m.q(), s_y);
  if (combos > cap)
    fail(ErrorKind::kValidation, "full search needs " + std::to_string(combos) +
                                     " combinations, above the cap of " +
                                     std::to_string(cap));
  const Eigen::MatrixXd sxx = m.xx_matrix();
  const Eigen::MatrixXd syy = m.yy_matrix();
  const double tol_cap = m.tolerances().spd_condition_cap;

  auto search = [&](Eigen::Index ax, Eigen::Index ay, FullSearchResult& best) {
    std::vector<std::vector<Eigen::Index>> j_sets;
    std::vector<Eigen::MatrixXd> j_inv;  // L_J^{-1}
    detail::for_each_combination(m.q(), ay, [&](const std::vector<Eigen::Index>& js) {
      j_sets.push_back(js);
      j_inv.push_back(detail::inv_chol(submatrix(syy, js, js), tol_cap, "Y"));
    });
    std::vector<Eigen::Index> all_y(static_cast<std::size_t>(m.q()));
    for (Eigen::Index j = 0; j < m.q(); ++j) all_y[static_cast<std::size_t>(j)] = j;
    detail::for_each_combination(m.p(), ax, [&](const std::vector<Eigen::Index>& ks) {
      const Eigen::MatrixXd kinv = detail::inv_chol(submatrix(sxx, ks, ks), tol_cap, "X");
      const Eigen::MatrixXd t = kinv * submatrix(m.cross(), ks, all_y);  // a x q
      for (std::size_t i = 0; i < j_sets.size(); ++i) {
        Eigen::MatrixXd mkj(ax, ay);
        for (Eigen::Index c = 0; c < ay; ++c)
          mkj.col(c) = t.col(j_sets[i][static_cast<std::size_t>(c)]);
        const double v = frobenius_sq(mkj * j_inv[i].transpose());
        if (v > best.trace_sq || best.selection.k_set.empty()) {
          best.trace_sq = v;
          best.selection = IndexPair{ks, j_sets[i]};
        }
      }
    });
  };

  FullSearchResult out;
  search(s_x, s_y, out);
  out.trace_sq = pillai_from_moments(m, out.selection);
  if (certify_smaller) {
    double up_to = out.trace_sq;
    for (Eigen::Index ax = 1; ax <= s_x; ++ax)
      for (Eigen::Index ay = 1; ay <= s_y; ++ay) {
        if (ax == s_x && ay == s_y) continue;
        FullSearchResult r;
        search(ax, ay, r);
        up_to = std::max(up_to, pillai_from_moments(m, r.selection));
      }
    out.trace_sq_up_to = up_to;
  }
  return out;
}

/// Unconstrained greedy run, one record per added variable. The first
/// selected pair contributes two records: its X column (increment 0, since
/// the trace is zero while Y is empty) and its Y column (the squared
/// correlation). Stops after `max_total` records, when no addable candidate
/// is left, or when the best increment drops below `min_increment` (if > 0).
inline std::vector<StepRecord> scree_increments(const PrefixMoments& m,
                                                Eigen::Index max_total,
                                                double min_increment = 0.0) {
  if (max_total < 1) fail(ErrorKind::kValidation, "max_total must be at least 1");
  if (m.rows() < 3) fail(ErrorKind::kValidation, "prefix too short for scree");
  GreedyState state(m);
  const auto [k0, j0] = detail::best_pair(m);
  state.add_x(k0, 0.0);
  if (max_total >= 2) state.add_y(j0, state.increment_y(j0));

  while (static_cast<Eigen::Index>(state.step_log().size()) < max_total) {
    const Eigen::Index used = state.current().s_x() + state.current().s_y();
    if (used + 2 > m.rows()) break;
    Eigen::Index bx = -1, by = -1;
    GreedyState::Candidates cx, cy;
    if (state.current().s_x() < m.p()) bx = detail::argmax_addable(cx = state.x_candidates());
    if (state.current().s_y() < m.q()) by = detail::argmax_addable(cy = state.y_candidates());
    if (bx < 0 && by < 0) break;
    const bool take_y = by >= 0 && (bx < 0 || cy.increment(by) > cx.increment(bx));
    const double inc = take_y ? cy.increment(by) : cx.increment(bx);
    if (min_increment > 0 && inc < min_increment) break;
    if (take_y)
      state.add_y(by, inc);
    else
      state.add_x(bx, inc);
  }
  return state.step_log();
}

struct ProbeRecord {
  Eigen::Index probe;
  Side side;
  Eigen::Index index;
  double difference;  // Delta(e | S1) - Delta(e | S2)
};

using SetFunction = std::function<double(const IndexPair&)>;

/// Diminishing-returns check for a set function over (K, J).
///
/// S2 is drawn at random with |K| = |J| = size2; S1 keeps the first size1
/// drawn elements of each side. Each probe draws a variable e outside S2
/// (uniformly over the remaining X and Y columns, without replacement while
/// possible) and records Delta(e | S1) - Delta(e | S2).
inline std::vector<ProbeRecord> submodularity_probe(Eigen::Index p, Eigen::Index q,
                                                    Eigen::Index size1, Eigen::Index size2,
                                                    Eigen::Index n_probes,
                                                    std::uint64_t seed,
                                                    const SetFunction& f) {
  if (!(size1 >= 1 && size1 < size2))
    fail(ErrorKind::kValidation, "need 1 <= size1 < size2");
  if (size2 > p || size2 > q || (p - size2) + (q - size2) < 1)
    fail(ErrorKind::kValidation, "size2 leaves no room for probe elements");
  if (n_probes < 1) fail(ErrorKind::kValidation, "n_probes must be positive");

  std::mt19937_64 rng(seed);
  auto draw = [&rng](Eigen::Index n, Eigen::Index k) {
    std::vector<Eigen::Index> all(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) all[static_cast<std::size_t>(i)] = i;
    for (Eigen::Index i = 0; i < k; ++i) {
      std::uniform_int_distribution<Eigen::Index> pick(i, n - 1);
      std::swap(all[static_cast<std::size_t>(i)], all[static_cast<std::size_t>(pick(rng))]);
    }
    all.resize(static_cast<std::size_t>(k));
    return all;
  };
  IndexPair s2{draw(p, size2), draw(q, size2)};
  IndexPair s1{{s2.k_set.begin(), s2.k_set.begin() + size1},
               {s2.j_set.begin(), s2.j_set.begin() + size1}};

  std::vector<std::pair<Side, Eigen::Index>> pool;
  std::vector<char> in_k(static_cast<std::size_t>(p), 0), in_j(static_cast<std::size_t>(q), 0);
  for (auto k : s2.k_set) in_k[static_cast<std::size_t>(k)] = 1;
  for (auto j : s2.j_set) in_j[static_cast<std::size_t>(j)] = 1;
  for (Eigen::Index k = 0; k < p; ++k)
    if (!in_k[static_cast<std::size_t>(k)]) pool.emplace_back(Side::kX, k);
  for (Eigen::Index j = 0; j < q; ++j)
    if (!in_j[static_cast<std::size_t>(j)]) pool.emplace_back(Side::kY, j);

  const double f1 = f(s1);
  const double f2 = f(s2);
  std::vector<ProbeRecord> out;
  std::size_t fresh = 0;
  for (Eigen::Index t = 0; t < n_probes; ++t) {
    if (fresh == pool.size()) fresh = 0;  // pool exhausted: start sampling again
    std::uniform_int_distribution<std::size_t> pick(fresh, pool.size() - 1);
    std::swap(pool[fresh], pool[pick(rng)]);
    const auto [side, idx] = pool[fresh++];
    auto with = [side = side, idx = idx](IndexPair s) {
      (side == Side::kX ? s.k_set : s.j_set).push_back(idx);
      return s;
    };
    const double d1 = f(with(s1)) - f1;
    const double d2 = f(with(s2)) - f2;
    out.push_back({t + 1, side, idx, d1 - d2});
  }
  return out;
}

/// Root-Pillai set function on a fixed prefix, for submodularity_probe.
inline SetFunction root_pillai_set_function(const PrefixMoments& m) {
  return [&m](const IndexPair& d) { return root_pillai_from_moments(m, d); };
}

}  // namespace scca

#endif  // SCCA_GREEDY_HPP
