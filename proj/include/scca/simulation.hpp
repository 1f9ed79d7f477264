#ifndef SCCA_SIMULATION_HPP
#define SCCA_SIMULATION_HPP

// Gaussian simulation models (null N, single-pair A1, three-pair A2) and
// the Monte Carlo harness for rejection rates, coverage, and estimator
// distributions.

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "scca/data.hpp"
#include "scca/error.hpp"
#include "scca/greedy.hpp"
#include "scca/linalg.hpp"
#include "scca/one_step.hpp"
#include "scca/random.hpp"

namespace scca {

enum class ModelKind { kNull, kA1, kA2 };

inline const char* to_string(ModelKind k) {
  switch (k) {
    case ModelKind::kNull: return "N";
    case ModelKind::kA1: return "A1";
    case ModelKind::kA2: return "A2";
  }
  return "?";
}

inline ModelKind parse_model(const std::string& s) {
  if (s == "N") return ModelKind::kNull;
  if (s == "A1") return ModelKind::kA1;
  if (s == "A2") return ModelKind::kA2;
  fail(ErrorKind::kValidation, "unknown model '" + s + "' (expected N, A1 or A2)");
}

struct ModelSpec {
  ModelKind kind = ModelKind::kNull;
  Eigen::Index p = 10;
  Eigen::Index q = 10;
  double tau = 0.0;  // ignored for the null model
  Eigen::Index n = 500;
};

inline constexpr Eigen::Index kSamplingCap = 2000;  // max p + q
inline constexpr Eigen::Index kBandedBlock = 100;   // AR(0.5) band applies below this index
inline constexpr Eigen::Index kActive = 3;          // active variables per side in A1/A2

/// Exact population moments of a model plus a sampling factor.
struct Population {
  ModelSpec spec;
  Eigen::MatrixXd sigma_x, sigma_y, sigma_xy;
  Eigen::MatrixXd lambda;  // coherence matrix Sx^-1/2 Sxy Sy^-1/2
  Eigen::VectorXd rho;     // canonical correlations used to build Sxy
  double tau_full = 0.0;   // ||lambda||_F
  Eigen::MatrixXd chol;    // lower factor of the joint covariance
};

inline Eigen::MatrixXd banded_covariance(Eigen::Index dim) {
  Eigen::MatrixXd s = Eigen::MatrixXd::Identity(dim, dim);
  const Eigen::Index band = std::min(dim, kBandedBlock);
  for (Eigen::Index j = 0; j < band; ++j)
    for (Eigen::Index l = 0; l < band; ++l)
      s(j, l) = std::pow(0.5, static_cast<double>(std::abs(j - l)));
  return s;
}

inline Population build_population(const ModelSpec& spec) {
  if (spec.p < 1 || spec.q < 1) fail(ErrorKind::kValidation, "p and q must be positive");
  if (spec.p + spec.q > kSamplingCap)
    fail(ErrorKind::kValidation, "p + q = " + std::to_string(spec.p + spec.q) +
                                     " exceeds the sampling cap of " +
                                     std::to_string(kSamplingCap));
  if (spec.kind != ModelKind::kNull && (spec.p < kActive || spec.q < kActive))
    fail(ErrorKind::kValidation, "models A1/A2 need p, q >= 3");
  if (spec.kind != ModelKind::kNull && !(spec.tau >= 0))
    fail(ErrorKind::kValidation, "tau must be non-negative");

  Population pop;
  pop.spec = spec;
  pop.sigma_x = banded_covariance(spec.p);
  pop.sigma_y = banded_covariance(spec.q);

  Eigen::MatrixXd core = Eigen::MatrixXd::Zero(spec.p, spec.q);  // sum_k rho_k a_k b_k'
  switch (spec.kind) {
    case ModelKind::kNull:
      pop.rho = Eigen::VectorXd(0);
      break;
    case ModelKind::kA1: {
      Eigen::VectorXd a = Eigen::VectorXd::Zero(spec.p), b = Eigen::VectorXd::Zero(spec.q);
      a.head(kActive).setOnes();
      b.head(kActive).setOnes();
      a /= std::sqrt(a.dot(pop.sigma_x * a));
      b /= std::sqrt(b.dot(pop.sigma_y * b));
      pop.rho = Eigen::VectorXd::Constant(1, spec.tau);
      core = spec.tau * a * b.transpose();
      break;
    }
    case ModelKind::kA2: {
      pop.rho = Eigen::Vector3d(1.0, 2.0, 3.0) * (spec.tau / std::sqrt(14.0));
      for (Eigen::Index k = 0; k < kActive; ++k) core(k, k) = pop.rho(k);
      break;
    }
  }
  pop.sigma_xy = pop.sigma_x * core * pop.sigma_y;

  const Eigen::Index dim = spec.p + spec.q;
  Eigen::MatrixXd joint(dim, dim);
  joint.topLeftCorner(spec.p, spec.p) = pop.sigma_x;
  joint.bottomRightCorner(spec.q, spec.q) = pop.sigma_y;
  joint.topRightCorner(spec.p, spec.q) = pop.sigma_xy;
  joint.bottomLeftCorner(spec.q, spec.p) = pop.sigma_xy.transpose();
  Eigen::LLT<Eigen::MatrixXd> llt(joint);
  if (llt.info() != Eigen::Success)
    fail(ErrorKind::kNumerical, std::string("joint covariance of model ") + to_string(spec.kind) +
                                    " is not positive definite at tau = " +
                                    std::to_string(spec.tau));
  pop.chol = llt.matrixL();

  const Eigen::MatrixXd rx = inv_sqrt_spd(pop.sigma_x, 1e15, "population Sigma_X");
  const Eigen::MatrixXd ry = inv_sqrt_spd(pop.sigma_y, 1e15, "population Sigma_Y");
  pop.lambda = rx * pop.sigma_xy * ry;
  pop.tau_full = std::sqrt(frobenius_sq(pop.lambda));
  return pop;
}

struct PopulationTarget {
  double tau_max = 0.0;
  bool exact = true;  // false when the search was restricted to leading columns
};

/// Population maximal root-Pillai trace at sparsity (s_x, s_y).
///
/// The null model gives 0. For A1/A2 the cross-covariance acts only through
/// the first three variables of each block, so any selection containing them
/// reaches ||lambda||_F. Smaller sparsity levels are searched exhaustively
/// (over the leading 12 columns when full enumeration is too large).
inline PopulationTarget population_tau_max(const Population& pop, Eigen::Index s_x,
                                           Eigen::Index s_y) {
  if (pop.spec.kind == ModelKind::kNull) return {0.0, true};
  if (s_x >= kActive && s_y >= kActive) return {pop.tau_full, true};

  auto pillai = [&pop](const std::vector<Eigen::Index>& ks, const std::vector<Eigen::Index>& js) {
    const Eigen::MatrixXd rx = inv_sqrt_spd(submatrix(pop.sigma_x, ks, ks), 1e15, "Sigma_XK");
    const Eigen::MatrixXd ry = inv_sqrt_spd(submatrix(pop.sigma_y, js, js), 1e15, "Sigma_YJ");
    return frobenius_sq(rx * submatrix(pop.sigma_xy, ks, js) * ry);
  };
  Eigen::Index px = pop.spec.p, qy = pop.spec.q;
  PopulationTarget out;
  if (detail::binomial(px, s_x) * detail::binomial(qy, s_y) > kDefaultFullSearchCap) {
    px = std::min<Eigen::Index>(px, 12);
    qy = std::min<Eigen::Index>(qy, 12);
    out.exact = false;
  }
  double best = 0.0;
  detail::for_each_combination(px, s_x, [&](const std::vector<Eigen::Index>& ks) {
    detail::for_each_combination(qy, s_y, [&](const std::vector<Eigen::Index>& js) {
      best = std::max(best, pillai(ks, js));
    });
  });
  out.tau_max = std::sqrt(best);
  return out;
}

/// n i.i.d. mean-zero Gaussian rows with the population's joint covariance.
inline PairedDataset sample(const Population& pop, Eigen::Index n, std::uint64_t seed) {
  if (n < 3) fail(ErrorKind::kValidation, "sample size must be at least 3");
  const Eigen::Index dim = pop.chol.rows();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  Eigen::MatrixXd z(n, dim);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index c = 0; c < dim; ++c) z(i, c) = gauss(rng);
  const Eigen::MatrixXd rows = z * pop.chol.transpose();
  return PairedDataset(rows.leftCols(pop.spec.p), rows.rightCols(pop.spec.q));
}

/// Shared-latent-factor data: X = F A + E, Y = F B + E with F, E standard
/// normal and loadings drawn N(0, loading_sd^2). Used as a stand-in for
/// dense expression-type data where no covariance model is available.
inline PairedDataset latent_factor_sample(Eigen::Index n, Eigen::Index p, Eigen::Index q,
                                          Eigen::Index factors, double loading_sd,
                                          std::uint64_t seed) {
  if (n < 3 || p < 1 || q < 1 || factors < 1 || !(loading_sd >= 0))
    fail(ErrorKind::kValidation, "invalid latent factor design");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  auto fill = [&](Eigen::Index r, Eigen::Index c, double scale) {
    Eigen::MatrixXd m(r, c);
    for (Eigen::Index i = 0; i < m.size(); ++i) m(i) = scale * gauss(rng);
    return m;
  };
  const Eigen::MatrixXd f = fill(n, factors, 1.0);
  const Eigen::MatrixXd a = fill(factors, p, loading_sd);
  const Eigen::MatrixXd b = fill(factors, q, loading_sd);
  Eigen::MatrixXd x = f * a + fill(n, p, 1.0);
  Eigen::MatrixXd y = f * b + fill(n, q, 1.0);
  return PairedDataset(std::move(x), std::move(y));
}

// Dense latent design shaped like a paired expression study: 397 samples,
// 1000 x 534 features. One-step estimates come out near 0.93 at s = 3 and
// 1.5 at s = 15.
inline constexpr Eigen::Index kDenseN = 397, kDenseP = 1000, kDenseQ = 534, kDenseFactors = 5;
inline constexpr double kDenseLoadingSd = 0.35;

struct ReplicationResult {
  Eigen::Index rep = 0;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  double tau_hat = 0.0;
  double se = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  double p_value = 1.0;
  bool reject = false;
  bool covered = false;
  bool has_tau_sq = false;
  double tau_sq_hat = 0.0;  // squared-target estimate (histogram studies only)
};

struct CellSummary {
  ModelSpec spec;
  Eigen::Index s = 1;
  Eigen::Index n_reps = 0;
  double truth = 0.0;
  bool truth_exact = true;
  double reject_rate = 0.0;
  double coverage = 0.0;
  double mean_tau_hat = 0.0;
  double sd_tau_hat = 0.0;
  double q05 = 0.0, q25 = 0.0, median = 0.0, q75 = 0.0, q95 = 0.0;
  Eigen::Index failures = 0;
  std::vector<ReplicationResult> reps;
};

namespace detail {

inline double quantile_sorted(const std::vector<double>& v, double prob) {
  if (v.empty()) return NAN;
  const double h = prob * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

// Runs fn(rep) for rep in [0, n) on `jobs` threads; fn writes only its slot.
template <class Fn>
void parallel_for(Eigen::Index n, int jobs, Fn&& fn) {
  if (jobs <= 1 || n <= 1) {
    for (Eigen::Index i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<Eigen::Index> next{0};
  std::vector<std::thread> pool;
  for (int t = 0; t < jobs; ++t)
    pool.emplace_back([&] {
      for (Eigen::Index i = next++; i < n; i = next++) fn(i);
    });
  for (auto& th : pool) th.join();
}

}  // namespace detail

/// Monte Carlo over replications of one model cell at s_x = s_y = s.
/// Replication r uses seed derive_seed(seed, r); failures are recorded, not
/// fatal. With `both_targets`, each replication also runs the squared-target
/// stream on the same sample.
inline CellSummary run_cell(const ModelSpec& spec, Eigen::Index s, Eigen::Index n_reps,
                                   const StreamConfig& cfg, std::uint64_t seed, int jobs = 1,
                                   const Tolerances& tol = {}, bool both_targets = false) {
  if (n_reps < 1) fail(ErrorKind::kValidation, "need at least one replication");
  const Population pop = build_population(spec);
  const PopulationTarget truth = population_tau_max(pop, s, s);

  CellSummary cell;
  cell.spec = spec;
  cell.s = s;
  cell.n_reps = n_reps;
  cell.truth = truth.tau_max;
  cell.truth_exact = truth.exact;
  cell.reps.resize(static_cast<std::size_t>(n_reps));

  detail::parallel_for(n_reps, jobs, [&](Eigen::Index r) {
    ReplicationResult& out = cell.reps[static_cast<std::size_t>(r)];
    out.rep = r;
    out.seed = derive_seed(seed, static_cast<std::uint64_t>(r), 2);
    try {
      const PairedDataset data = sample(pop, spec.n, out.seed);
      StreamConfig c = cfg;
      c.target = Target::kRootPillai;
      const EstimateReport rep = estimate(data, s, s, c, tol);
      const TestDecision dec = test_null(rep, cfg.alpha);
      out.tau_hat = rep.tau_hat;
      out.se = rep.se;
      out.ci_lo = rep.ci_lo;
      out.ci_hi = rep.ci_hi;
      out.p_value = rep.p_value;
      out.reject = dec.reject;
      out.covered = rep.ci_lo <= truth.tau_max && truth.tau_max <= rep.ci_hi;
      if (both_targets) {
        c.target = Target::kPillai;
        out.tau_sq_hat = estimate(data, s, s, c, tol).tau_hat;
        out.has_tau_sq = true;
      }
      out.ok = true;
    } catch (const Error& e) {
      out.ok = false;
      out.error = e.what();
    }
  });

  std::vector<double> est;
  Eigen::Index rejects = 0, covered = 0;
  for (const auto& r : cell.reps) {
    if (!r.ok) {
      ++cell.failures;
      continue;
    }
    est.push_back(r.tau_hat);
    rejects += r.reject;
    covered += r.covered;
  }
  const double ok = static_cast<double>(est.size());
  if (ok > 0) {
    cell.reject_rate = static_cast<double>(rejects) / ok;
    cell.coverage = static_cast<double>(covered) / ok;
    double sum = 0.0;
    for (double v : est) sum += v;
    cell.mean_tau_hat = sum / ok;
    double ss = 0.0;
    for (double v : est) ss += (v - cell.mean_tau_hat) * (v - cell.mean_tau_hat);
    cell.sd_tau_hat = ok > 1 ? std::sqrt(ss / (ok - 1)) : 0.0;
    std::sort(est.begin(), est.end());
    cell.q05 = detail::quantile_sorted(est, 0.05);
    cell.q25 = detail::quantile_sorted(est, 0.25);
    cell.median = detail::quantile_sorted(est, 0.5);
    cell.q75 = detail::quantile_sorted(est, 0.75);
    cell.q95 = detail::quantile_sorted(est, 0.95);
  }
  return cell;
}

struct Histogram {
  double lo = 0.0, hi = 0.0;
  std::vector<Eigen::Index> counts;
};

inline Histogram make_histogram(const std::vector<double>& values, int bins) {
  Histogram h;
  if (values.empty() || bins < 1) return h;
  h.lo = *std::min_element(values.begin(), values.end());
  h.hi = *std::max_element(values.begin(), values.end());
  if (h.hi <= h.lo) h.hi = h.lo + 1.0;
  h.counts.assign(static_cast<std::size_t>(bins), 0);
  for (double v : values) {
    auto b = static_cast<int>((v - h.lo) / (h.hi - h.lo) * bins);
    b = std::clamp(b, 0, bins - 1);
    ++h.counts[static_cast<std::size_t>(b)];
  }
  return h;
}

struct HistogramCell {
  ModelSpec spec;
  double truth = 0.0;
  std::vector<double> root_estimates;    // tau_max target
  std::vector<double> square_estimates;  // tau_max^2 target
  Histogram root_hist, square_hist;
  Eigen::Index failures = 0;
};

/// Estimator distributions for both targets over a grid of models.
inline std::vector<HistogramCell> histogram_study(const std::vector<ModelSpec>& grid,
                                                  Eigen::Index s, Eigen::Index n_reps,
                                                  const StreamConfig& cfg, std::uint64_t seed,
                                                  int bins = 30, int jobs = 1,
                                                  const Tolerances& tol = {}) {
  std::vector<HistogramCell> out;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const CellSummary cell = run_cell(grid[g], s, n_reps, cfg,
                                             derive_seed(seed, g, 3), jobs, tol, true);
    HistogramCell h;
    h.spec = grid[g];
    h.truth = cell.truth;
    h.failures = cell.failures;
    for (const auto& r : cell.reps) {
      if (!r.ok) continue;
      h.root_estimates.push_back(r.tau_hat);
      h.square_estimates.push_back(r.tau_sq_hat);
    }
    h.root_hist = make_histogram(h.root_estimates, bins);
    h.square_hist = make_histogram(h.square_estimates, bins);
    out.push_back(std::move(h));
  }
  return out;
}

}  // namespace scca

#endif  // SCCA_SIMULATION_HPP
