#ifndef SCCA_ONE_STEP_HPP
#define SCCA_ONE_STEP_HPP

// Stabilized one-step estimation of the maximal root-Pillai trace, its
// Wald interval, and the test of tau_max = 0.

#include <Eigen/Dense>
#include <boost/math/distributions/normal.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "scca/data.hpp"
#include "scca/error.hpp"
#include "scca/gradient.hpp"
#include "scca/greedy.hpp"
#include "scca/linalg.hpp"
#include "scca/moments.hpp"
#include "scca/random.hpp"
#include "scca/stats.hpp"

namespace scca {

enum class Selector { kGreedy, kFull };

/// How the stride C thins the stream.
enum class StrideMode {
  kBatch,    // refit every C rows; each fit scores the next C observations (n - ell terms)
  kThinned,  // one term per visited j (m = ceil((n - ell) / C) terms)
};

inline const char* to_string(StrideMode m) { return m == StrideMode::kBatch ? "batch" : "thinned"; }

inline const char* to_string(Selector s) { return s == Selector::kGreedy ? "greedy" : "full"; }

struct StreamConfig {
  double ell_frac = 0.5;     // burn-in is ceil(ell_frac * n) unless `ell` is set
  Eigen::Index ell = 0;      // explicit burn-in prefix length; 0 = use ell_frac
  Eigen::Index stride = 20;  // update stride C
  StrideMode stride_mode = StrideMode::kBatch;
  double alpha = 0.05;
  int reorderings = 10;
  bool shuffle = true;       // false: run each ordering on the rows as given
  std::uint64_t seed = 0;
  Selector selector = Selector::kGreedy;
  Target target = Target::kRootPillai;
  double full_search_cap = kDefaultFullSearchCap;

  Eigen::Index resolve_ell(Eigen::Index n) const {
    if (ell > 0) return ell;
    return static_cast<Eigen::Index>(std::ceil(ell_frac * static_cast<double>(n) - 1e-12));
  }

  void validate(Eigen::Index n) const {
    if (!(alpha > 0 && alpha < 1)) fail(ErrorKind::kValidation, "alpha must lie in (0, 1)");
    if (stride < 1) fail(ErrorKind::kValidation, "stride must be at least 1");
    if (reorderings < 1) fail(ErrorKind::kValidation, "reorderings must be at least 1");
    if (ell == 0 && !(ell_frac > 0 && ell_frac < 1))
      fail(ErrorKind::kValidation, "ell fraction must lie in (0, 1)");
    const Eigen::Index l = resolve_ell(n);
    if (l < 3 || l >= n)
      fail(ErrorKind::kValidation, "burn-in length " + std::to_string(l) +
                                       " must satisfy 3 <= ell < n = " + std::to_string(n));
  }
};

/// Upper-tail standard normal quantile z_a.
inline double normal_upper_quantile(double a) {
  return boost::math::quantile(boost::math::complement(boost::math::normal(), a));
}

inline double normal_upper_tail(double z) {
  return boost::math::cdf(boost::math::complement(boost::math::normal(), z));
}

struct StreamStep {
  Eigen::Index j = 0;   // prefix length; gradients are taken at rows j, j+1, ... (0-based)
  IndexPair d;
  double psi = 0.0;     // plug-in value of the target on the prefix
  double grad_next = 0.0;      // gradient at row j
  std::vector<double> grads;   // gradients at every row scored by this fit (grads[0] == grad_next)
  double sigma = 0.0;   // floored gradient sd on the prefix
  double weight = 0.0;  // filled in after the stream completes
  bool degenerate = false;
};

struct StreamTrace {
  std::vector<StreamStep> steps;
  double sigma_bar = 0.0;  // harmonic mean of the step sds
  Eigen::Index n_degenerate = 0;
};

struct StreamResult {
  double tau_hat = 0.0;
  double se = 0.0;
  StreamTrace trace;
};

inline IndexPair select_pair(const PrefixMoments& m, Eigen::Index s_x, Eigen::Index s_y,
                             const StreamConfig& cfg) {
  if (cfg.selector == Selector::kFull)
    return full_search(m, s_x, s_y, cfg.full_search_cap).selection;
  return greedy_select(m, s_x, s_y).selection;
}

/// One update of the stream: select on the first j rows, then evaluate the
/// target there and its gradient at rows j .. j + count - 1. `m` must be at
/// j rows; rows past j + count - 1 are never read.
inline StreamStep stream_step(const PairedDataset& data, const PrefixMoments& m,
                              Eigen::Index s_x, Eigen::Index s_y, const StreamConfig& cfg,
                              const Tolerances& tol, Eigen::Index count = 1) {
  const Eigen::Index j = m.rows();
  if (count < 1 || j + count > data.n())
    fail(ErrorKind::kValidation, "stream step needs a row after the prefix");
  StreamStep s;
  s.j = j;
  s.d = select_pair(m, s_x, s_y, cfg);
  const GradientContext ctx = build_context(data, s.d, j, cfg.target, tol);
  s.psi = ctx.value();
  s.degenerate = ctx.degenerate;
  for (Eigen::Index i = j; i < j + count; ++i) s.grads.push_back(evaluate_row(ctx, data, i));
  s.grad_next = s.grads.front();
  s.sigma = empirical_variance(ctx, data, j, tol).sd;
  return s;
}

/// Number of estimator terms in a trace (one per scored observation).
inline Eigen::Index term_count(const StreamTrace& trace) {
  Eigen::Index m = 0;
  for (const auto& s : trace.steps) m += static_cast<Eigen::Index>(s.grads.size());
  return m;
}

/// Direct weighted summation over a completed trace. Returns (tau_hat, sigma_bar).
inline std::pair<double, double> direct_estimate(const StreamTrace& trace) {
  const double m = static_cast<double>(term_count(trace));
  double inv_sum = 0.0;
  for (const auto& s : trace.steps) inv_sum += static_cast<double>(s.grads.size()) / s.sigma;
  const double sigma_bar = m / inv_sum;
  double acc = 0.0;
  for (const auto& s : trace.steps)
    for (double g : s.grads) acc += (sigma_bar / s.sigma) * (s.psi + g);
  return {acc / m, sigma_bar};
}

/// Runs the stabilized one-step stream on data in its given row order.
///
/// Fits happen at j = ell, ell + C, ... <= n - 1. In batch mode the fit at j
/// scores rows j .. min(j + C, n) - 1, so every observation after the burn-in
/// contributes one term; in thinned mode only row j does. The running ratio
/// psi_t / sigma_bar_t and the running mean of 1/sigma are updated
/// recursively per term, so the estimate is available without a second pass.
inline StreamResult run_stream(const PairedDataset& data, Eigen::Index s_x, Eigen::Index s_y,
                               const StreamConfig& cfg, const Tolerances& tol = {}) {
  cfg.validate(data.n());
  const Eigen::Index ell = cfg.resolve_ell(data.n());
  if (ell < s_x + s_y + 2)
    fail(ErrorKind::kValidation, "burn-in length " + std::to_string(ell) +
                                     " is too short for s_x + s_y = " +
                                     std::to_string(s_x + s_y));
  PrefixMoments m(data, tol);
  StreamResult out;
  double ratio = 0.0;    // running psi / sigma_bar
  double inv_sig = 0.0;  // running mean of 1 / sigma
  double t = 0.0;
  for (Eigen::Index j = ell; j <= data.n() - 1; j += cfg.stride) {
    m.advance_to(j);
    const Eigen::Index count = cfg.stride_mode == StrideMode::kBatch
                                   ? std::min(cfg.stride, data.n() - j)
                                   : 1;
    StreamStep step = stream_step(data, m, s_x, s_y, cfg, tol, count);
    for (double g : step.grads) {
      t += 1.0;
      ratio = ((t - 1.0) * ratio + (step.psi + g) / step.sigma) / t;
      inv_sig = ((t - 1.0) * inv_sig + 1.0 / step.sigma) / t;
    }
    if (step.degenerate) ++out.trace.n_degenerate;
    out.trace.steps.push_back(std::move(step));
  }
  if (out.trace.n_degenerate == static_cast<Eigen::Index>(out.trace.steps.size()))
    fail(ErrorKind::kNumerical,
         "every stream update was degenerate (sample root-Pillai trace is zero); "
         "use more observations or smaller sparsity levels");
  out.trace.sigma_bar = 1.0 / inv_sig;
  for (auto& s : out.trace.steps) s.weight = out.trace.sigma_bar / s.sigma;
  out.tau_hat = ratio / inv_sig;
  out.se = out.trace.sigma_bar / std::sqrt(t);
  return out;
}

struct OrderingReport {
  std::uint64_t seed = 0;
  double tau_hat = 0.0;
  double se = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  Eigen::Index n_updates = 0;
  Eigen::Index n_terms = 0;
  Eigen::Index n_degenerate = 0;
};

struct EstimateReport {
  double tau_hat = 0.0;
  double se = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  double z_stat = 0.0;
  double p_value = 1.0;
  double alpha = 0.05;
  Eigen::Index s_x = 0, s_y = 0;
  IndexPair selected;  // selection on the full data
  std::vector<OrderingReport> per_ordering;
  Eigen::Index n_degenerate = 0;
  StreamConfig config;
};

/// Averages the stream over cfg.reorderings random row orders: point
/// estimates and interval endpoints are averaged; the reported se is backed
/// out of the averaged interval width.
inline EstimateReport estimate(const PairedDataset& data, Eigen::Index s_x, Eigen::Index s_y,
                               const StreamConfig& cfg, const Tolerances& tol = {}) {
  cfg.validate(data.n());
  const double z = normal_upper_quantile(cfg.alpha / 2.0);
  EstimateReport rep;
  rep.alpha = cfg.alpha;
  rep.s_x = s_x;
  rep.s_y = s_y;
  rep.config = cfg;
  double tau_sum = 0.0, lo_sum = 0.0, hi_sum = 0.0;
  for (int r = 0; r < cfg.reorderings; ++r) {
    const Ordering ord = cfg.shuffle
                             ? Ordering::random(data.n(), derive_seed(cfg.seed, r, 1))
                             : Ordering::identity(data.n());
    const StreamResult res =
        cfg.shuffle ? run_stream(reorder(data, ord), s_x, s_y, cfg, tol)
                    : run_stream(data, s_x, s_y, cfg, tol);
    OrderingReport o;
    o.seed = ord.seed;
    o.tau_hat = res.tau_hat;
    o.se = res.se;
    o.ci_lo = res.tau_hat - z * res.se;
    o.ci_hi = res.tau_hat + z * res.se;
    o.n_updates = static_cast<Eigen::Index>(res.trace.steps.size());
    o.n_terms = term_count(res.trace);
    o.n_degenerate = res.trace.n_degenerate;
    tau_sum += o.tau_hat;
    lo_sum += o.ci_lo;
    hi_sum += o.ci_hi;
    rep.n_degenerate += o.n_degenerate;
    rep.per_ordering.push_back(o);
  }
  const double k = static_cast<double>(cfg.reorderings);
  rep.tau_hat = tau_sum / k;
  rep.ci_lo = lo_sum / k;
  rep.ci_hi = hi_sum / k;
  rep.se = (rep.ci_hi - rep.ci_lo) / (2.0 * z);
  rep.z_stat = rep.tau_hat / rep.se;
  rep.p_value = normal_upper_tail(rep.z_stat);
  rep.selected = select_pair(PrefixMoments::at(data, data.n(), tol), s_x, s_y, cfg);
  return rep;
}

struct TestDecision {
  bool reject = false;
  double alpha = 0.05;
  double z_alpha = 0.0;
  double ci_2alpha_lower = 0.0;  // lower end of the 100(1 - 2 alpha)% interval
  double z_stat = 0.0;
  double p_value = 1.0;
};

/// Reject tau_max = 0 when the lower end of the 100(1 - 2 alpha)% interval
/// is above zero; equivalently when z_stat > z_alpha.
inline TestDecision test_null(const EstimateReport& report, double alpha) {
  if (!(alpha > 0 && alpha < 1)) fail(ErrorKind::kValidation, "alpha must lie in (0, 1)");
  TestDecision d;
  d.alpha = alpha;
  d.z_alpha = normal_upper_quantile(alpha);
  d.ci_2alpha_lower = report.tau_hat - d.z_alpha * report.se;
  d.z_stat = report.tau_hat / report.se;
  d.p_value = normal_upper_tail(d.z_stat);
  d.reject = d.ci_2alpha_lower > 0;
  const bool by_z = d.z_stat > d.z_alpha;
  if (by_z != d.reject && std::abs(d.z_stat - d.z_alpha) > 1e-9 * (1.0 + d.z_alpha))
    fail(ErrorKind::kInternal, "interval and z-statistic test decisions disagree");
  return d;
}

}  // namespace scca

#endif  // SCCA_ONE_STEP_HPP
