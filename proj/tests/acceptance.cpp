// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
// criterion fails.

#include <array>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <thread>

#include "scca/report_json.hpp"
#include "test_util.hpp"

using namespace scca;
using namespace scca::testing;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

int jobs() { return static_cast<int>(std::max(1u, std::thread::hardware_concurrency())); }

StreamConfig sim_config() {
  StreamConfig c;
  c.reorderings = 1;
  c.shuffle = false;
  return c;
}

std::vector<Eigen::Index> plus(std::vector<Eigen::Index> s, Eigen::Index e) {
  s.push_back(e);
  return s;
}

Eigen::Index outside(const std::vector<Eigen::Index>& s, Eigen::Index n, std::mt19937_64& rng) {
  while (true) {
    const Eigen::Index c = std::uniform_int_distribution<Eigen::Index>(0, n - 1)(rng);
    if (std::find(s.begin(), s.end(), c) == s.end()) return c;
  }
}

Outcome incremental_identities() {
  std::mt19937_64 rng(1001);
  double worst = 0.0;
  for (int t = 0; t < 200; ++t) {
    const Eigen::Index n = 30 + t % 31, p = 4 + t % 3, q = 4 + (t / 3) % 3;
    const PairedDataset d = random_pair(n, p, q, 5000 + t);
    const IndexPair ix{random_subset(p, 1 + t % (p - 1), rng), random_subset(q, 1 + (t / 2) % (q - 1), rng)};
    const PrefixMoments m = PrefixMoments::at(d, n);
    GreedyState st(m);
    for (auto k : ix.k_set) st.add_x(k, 0.0);
    for (auto j : ix.j_set) st.add_y(j, 0.0);
    const Eigen::Index k = outside(ix.k_set, p, rng), j = outside(ix.j_set, q, rng);
    const double base = pillai_oracle(d, ix);
    const double add_y = pillai_oracle(d, {ix.k_set, plus(ix.j_set, j)}) - base;
    const double add_x = pillai_oracle(d, {plus(ix.k_set, k), ix.j_set}) - base;
    const double add_both = pillai_oracle(d, {plus(ix.k_set, k), plus(ix.j_set, j)}) - base;
    const Eigen::MatrixXd r = residual_column(d, k, ix.k_set, Side::kX, n);
    const Eigen::MatrixXd e = residual_column(d, j, ix.j_set, Side::kY, n);
    const double iy = st.increment_y(j), ixx = st.increment_x(k);
    worst = std::max({worst, std::abs(st.recompute_trace_sq() - base), std::abs(iy - add_y),
                      std::abs(ixx - add_x),
                      std::abs(iy + ixx + pillai_of_centered(r, e) - add_both)});
  }
  return {worst <= 1e-10, fmt("200 datasets, max abs error %.2e", worst)};
}

Outcome gradient_oracle() {
  std::mt19937_64 rng(1002);
  const double eps = 1e-6;
  double worst_fd = 0.0, worst_univariate = 0.0;
  for (int t = 0; t < 100; ++t) {
    const Eigen::Index s = 1 + t % 3;
    const PairedDataset d = random_pair(60, 5, 5, 6000 + t);
    const IndexPair ix{random_subset(5, s, rng), random_subset(5, s, rng)};
    const GradientContext ctx = build_context(d, ix, 50);
    const Eigen::VectorXd ox = d.x().row(50 + t % 10).transpose();
    const Eigen::VectorXd oy = d.y().row(50 + t % 10).transpose();
    const double fd = (mixture_root_pillai(d, ix, 50, ox, oy, eps) -
                       mixture_root_pillai(d, ix, 50, ox, oy, -eps)) / (2 * eps);
    worst_fd = std::max(worst_fd, std::abs(evaluate(ctx, ox, oy) - fd) / std::max(1.0, std::abs(fd)));
  }
  for (int t = 0; t < 50; ++t) {
    const PairedDataset d = random_pair(60, 2, 2, 6500 + t, 1.5);
    const IndexPair ix{{t % 2}, {(t / 2) % 2}};
    const GradientContext ctx = build_context(d, ix, 60);
    const Eigen::VectorXd x = centered(d.x(), ix.k_set, 60).col(0);
    const Eigen::VectorXd y = centered(d.y(), ix.j_set, 60).col(0);
    const double sx = std::sqrt(x.squaredNorm() / 60), sy = std::sqrt(y.squaredNorm() / 60);
    const double rho = x.dot(y) / 60 / (sx * sy);
    for (Eigen::Index i = 0; i < 60; ++i) {
      const double u = x(i) / sx, v = y(i) / sy;
      const double influence = (rho > 0 ? 1 : -1) * (u * v - 0.5 * rho * (u * u + v * v));
      worst_univariate = std::max(worst_univariate, std::abs(evaluate_row(ctx, d, i) - influence));
    }
  }
  return {worst_fd <= 1e-5 && worst_univariate <= 1e-9,
          fmt("finite difference max rel error %.2e, univariate max abs error %.2e", worst_fd,
              worst_univariate)};
}

Outcome plugin_zero_mean() {
  std::mt19937_64 rng(1003);
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const PairedDataset d = random_pair(80, 6, 6, 7000 + t);
    const IndexPair ix{random_subset(6, 1 + t % 4, rng), random_subset(6, 1 + (t / 4) % 4, rng)};
    const GradientContext ctx = build_context(d, ix, 40 + t % 40);
    const GradientSpread sp = empirical_variance(ctx, d, 40 + t % 40);
    worst = std::max(worst, std::abs(sp.mean) / sp.max_abs);
  }
  return {worst <= 1e-10, fmt("100 contexts, max |mean| / max|D| = %.2e", worst)};
}

Outcome greedy_vs_full() {
  int above = 0, unequal = 0;
  double gap = 0.0;
  for (int t = 0; t < 200; ++t) {
    const PairedDataset d = random_pair(40, 5, 5, 8000 + t);
    const PrefixMoments m = PrefixMoments::at(d, 40);
    const auto g2 = greedy_select(m, 2, 2);
    const auto f2 = full_search(m, 2, 2);
    if (g2.trace_sq > f2.trace_sq) ++above;
    gap = std::max(gap, f2.trace_sq - g2.trace_sq);
    const auto g1 = greedy_select(m, 1, 1);
    const auto f1 = full_search(m, 1, 1);
    if (g1.trace_sq != f1.trace_sq || !(g1.selection == f1.selection)) ++unequal;
  }
  return {above == 0 && unequal == 0,
          fmt("200 instances: greedy above full %.0f times, s=1 mismatches %.0f, largest gap %.3g",
              above, unequal, gap)};
}

Outcome table_cells() {
  const StreamConfig c = sim_config();
  const CellSummary n = run_cell({ModelKind::kNull, 10, 10, 0.0, 500}, 1, 500, c, 12345, jobs());
  const CellSummary a = run_cell({ModelKind::kA1, 10, 10, 0.4, 500}, 3, 500, c, 12345, jobs());
  const CellSummary b = run_cell({ModelKind::kA1, 100, 100, 0.3, 500}, 3, 500, c, 12345, jobs());
  const bool ok = std::abs(n.reject_rate - 0.066) <= 0.03 && a.reject_rate >= 0.98 &&
                  std::abs(b.reject_rate - 0.660) <= 0.07 &&
                  n.failures + a.failures + b.failures == 0;
  return {ok, fmt("rejection N p=10: %.3f (0.066 +/- 0.03), A1 p=10: %.3f (>= 0.98), "
                  "A1 p=100: %.3f (0.660 +/- 0.07), failures %.0f",
                  n.reject_rate, a.reject_rate, b.reject_rate,
                  static_cast<double>(n.failures + a.failures + b.failures))};
}

Outcome centering() {
  const StreamConfig c = sim_config();
  const CellSummary a = run_cell({ModelKind::kA1, 10, 10, 0.8, 500}, 3, 200, c, 777, jobs());
  const CellSummary n = run_cell({ModelKind::kNull, 10, 10, 0.0, 500}, 3, 200, c, 778, jobs());
  const double bound = 3 * n.sd_tau_hat / std::sqrt(200.0);
  // Spread check: central 90% of the A1 estimates against a normal with the same sd.
  const double width = (a.q95 - a.q05) / (2 * 1.6448536269514722 * a.sd_tau_hat);
  const bool ok = std::abs(a.median - 0.8) <= 0.1 && std::abs(n.mean_tau_hat) <= bound &&
                  width > 0.8 && width < 1.2;
  return {ok, fmt("A1 tau=0.8 median %.4f, 90%% range / normal range %.3f; N mean %.4f, "
                  "bound %.4f",
                  a.median, width, n.mean_tau_hat, bound)};
}

Outcome square_target_bias() {
  const StreamConfig c = sim_config();
  const CellSummary n =
      run_cell({ModelKind::kNull, 10, 10, 0.0, 500}, 4, 200, c, 4242, jobs(), {}, true);
  double sum = 0, ss = 0, k = 0;
  for (const auto& r : n.reps)
    if (r.ok) {
      sum += r.tau_sq_hat;
      k += 1;
    }
  const double mean = sum / k;
  for (const auto& r : n.reps)
    if (r.ok) ss += (r.tau_sq_hat - mean) * (r.tau_sq_hat - mean);
  const double se = std::sqrt(ss / (k - 1)) / std::sqrt(k);
  return {mean < 0 && std::abs(mean) > 3 * se,
          fmt("N s=4, squared-target mean %.5f, standard error %.5f, ratio %.1f", mean, se,
              mean / se)};
}

Outcome recursion() {
  double worst = 0.0;
  for (int t = 0; t < 50; ++t) {
    const PairedDataset d = random_pair(80 + 5 * t, 6, 5, 9000 + t);
    StreamConfig c;
    c.stride = 1 + t % 13;
    c.stride_mode = t % 3 == 0 ? StrideMode::kThinned : StrideMode::kBatch;
    c.target = t % 4 == 0 ? Target::kPillai : Target::kRootPillai;
    const StreamResult r = run_stream(d, 1 + t % 3, 1 + t % 2, c);
    const double direct = direct_estimate(r.trace).first;
    worst = std::max(worst, std::abs(r.tau_hat - direct) / std::max(1.0, std::abs(direct)));
  }
  return {worst <= 1e-12, fmt("50 streams, max difference %.2e", worst)};
}

Outcome monotone_and_submodular() {
  std::mt19937_64 rng(1009);
  int violations = 0;
  for (int t = 0; t < 500; ++t) {
    const PairedDataset d = random_pair(60, 8, 8, 10000 + t);
    const PrefixMoments m = PrefixMoments::at(d, 60);
    const Eigen::Index a2 = 2 + t % 6, b2 = 2 + (t / 6) % 6;
    IndexPair s2{random_subset(8, a2, rng), random_subset(8, b2, rng)};
    IndexPair s1{{s2.k_set.begin(), s2.k_set.begin() + 1 + t % (a2 - 1)},
                 {s2.j_set.begin(), s2.j_set.begin() + 1 + t % (b2 - 1)}};
    if (root_pillai_from_moments(m, s1) > root_pillai_from_moments(m, s2) + 1e-12) ++violations;
  }
  const PairedDataset g = latent_factor_sample(kDenseN, kDenseP, kDenseQ, kDenseFactors, kDenseLoadingSd, 2024);
  const PrefixMoments gm = PrefixMoments::at(g, g.n());
  const auto probes = submodularity_probe(g.p(), g.q(), 5, 6, 100, 2024, root_pillai_set_function(gm));
  double nonneg = 0;
  for (const auto& p : probes) nonneg += p.difference >= 0;
  const double share = nonneg / static_cast<double>(probes.size());
  return {violations == 0 && share >= 0.95,
          fmt("nested pairs: %.0f violations of 500; latent-factor probe: %.2f nonnegative "
              "(need 0.95)",
              violations, share)};
}

struct Cmd {
  int code = -1;
  std::string out;
};

Cmd run(const std::string& args) {
  Cmd r;
  FILE* pipe = popen((std::string(SCCA_CLI_PATH) + " " + args + " 2>/dev/null").c_str(), "r");
  if (!pipe) return r;
  std::array<char, 4096> buf{};
  std::size_t got;
  while ((got = fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), got);
  r.code = pclose(pipe);
  return r;
}

Outcome cli_determinism() {
  const std::string dir = SCCA_DATA_DIR;
  const std::string data = " --x " + dir + "/tiny_x.csv --y " + dir + "/tiny_y.csv";
  const std::string tmp = (scratch_dir("acceptance_cli") / "first").string();
  const std::vector<std::pair<std::string, std::string>> cmds = {
      {"estimate", data + " --sx 2 --sy 2 --seed 5 --reorderings 3"},
      {"test", data + " --sx 1 --sy 2 --seed 6 --alpha 0.1 --stride-mode thinned --stride 3"},
      {"scree", data + " --max-steps 8"},
      {"submod", data + " --size1 1 --size2 3 --probes 10 --seed 4"},
      {"simulate", " --model A2 --p 6 --q 6 --tau 0.5 --n 100 --s 2 --reps 4 --seed 9"},
  };
  int ok = 0;
  std::string failed;
  for (const auto& [sub, args] : cmds) {
    const Cmd first = run(sub + args + " --quiet --out " + tmp);
    std::ifstream f(tmp);
    std::stringstream s;
    s << f.rdbuf();
    const Cmd replay = run(sub + " --config " + tmp + " --quiet");
    if (first.code == 0 && replay.code == 0 && replay.out == s.str() && !s.str().empty())
      ++ok;
    else
      failed += " " + sub;
  }
  return {ok == static_cast<int>(cmds.size()),
          fmt("%.0f of %.0f subcommands replay byte-identically", ok,
              static_cast<double>(cmds.size())) +
              (failed.empty() ? "" : "; failed:" + failed)};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"incremental trace identities", incremental_identities},
      {"gradient against finite differences", gradient_oracle},
      {"gradient mean zero on its prefix", plugin_zero_mean},
      {"greedy against exhaustive search", greedy_vs_full},
      {"simulated rejection rates", table_cells},
      {"estimator centering", centering},
      {"squared-target negative bias", square_target_bias},
      {"recursive and direct estimates agree", recursion},
      {"monotonicity and submodularity", monotone_and_submodular},
      {"CLI determinism under config replay", cli_determinism},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failures += !o.pass;
    std::printf("%s %2zu %s: %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", i + 1,
                criteria[i].first.c_str(), o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures,
              criteria.size());
  return failures == 0 ? 0 : 1;
}
