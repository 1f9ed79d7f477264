#ifndef SCCA_REPORT_JSON_HPP
#define SCCA_REPORT_JSON_HPP

// JSON and TSV serialization of estimator reports, test decisions, greedy
// traces, and simulation summaries.

#include <nlohmann/json.hpp>

#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

#include "scca/greedy.hpp"
#include "scca/one_step.hpp"
#include "scca/simulation.hpp"

namespace scca {

using json = nlohmann::ordered_json;

namespace detail {

inline json names_of(const std::vector<Eigen::Index>& idx, const std::vector<std::string>& names) {
  json out = json::array();
  for (auto i : idx) out.push_back(names[static_cast<std::size_t>(i)]);
  return out;
}

}  // namespace detail

/// Fixed 17-significant-digit rendering; round-trips every double.
inline std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline json to_json(const OrderingReport& o) {
  return json{{"seed", o.seed},       {"tau_hat", o.tau_hat},   {"se", o.se},
              {"ci", {o.ci_lo, o.ci_hi}}, {"n_updates", o.n_updates},
              {"n_terms", o.n_terms}, {"n_degenerate", o.n_degenerate}};
}

/// Report body. `config` is the caller's resolved configuration, echoed as is.
inline json to_json(const EstimateReport& r, const PairedDataset& data, const json& config) {
  json orderings = json::array();
  for (const auto& o : r.per_ordering) orderings.push_back(to_json(o));
  return json{{"tau_hat", r.tau_hat},
              {"se", r.se},
              {"ci", {r.ci_lo, r.ci_hi}},
              {"z", r.z_stat},
              {"p_value", r.p_value},
              {"alpha", r.alpha},
              {"s_x", r.s_x},
              {"s_y", r.s_y},
              {"selected",
               {{"x", detail::names_of(r.selected.k_set, data.x_names())},
                {"y", detail::names_of(r.selected.j_set, data.y_names())}}},
              {"orderings", orderings},
              {"n_degenerate", r.n_degenerate},
              {"config", config}};
}

inline json to_json(const TestDecision& d, json report) {
  return json{{"reject", d.reject},
              {"p_value", d.p_value},
              {"ci_2alpha_lower", d.ci_2alpha_lower},
              {"z", d.z_stat},
              {"z_alpha", d.z_alpha},
              {"alpha", d.alpha},
              {"report", std::move(report)}};
}

inline void write_config_line(std::ostream& os, const json& config) {
  os << "# config: " << config.dump() << '\n';
}

/// Scree TSV: one record per added variable. Indices are 1-based.
inline void write_scree_tsv(std::ostream& os, const std::vector<StepRecord>& steps,
                            const PairedDataset& data, const json& config) {
  write_config_line(os, config);
  os << "step\tside\tindex\tvalue\tname\n";
  for (std::size_t i = 0; i < steps.size(); ++i) {
    const auto& s = steps[i];
    const auto& names = s.side == Side::kX ? data.x_names() : data.y_names();
    os << i + 1 << '\t' << to_string(s.side) << '\t' << s.index + 1 << '\t'
       << fmt_double(s.increment) << '\t' << names[static_cast<std::size_t>(s.index)] << '\n';
  }
}

/// Submodularity TSV: one record per probe. Indices are 1-based.
inline void write_probe_tsv(std::ostream& os, const std::vector<ProbeRecord>& probes,
                            const PairedDataset& data, const json& config) {
  write_config_line(os, config);
  os << "step\tside\tindex\tvalue\tname\n";
  for (const auto& p : probes) {
    const auto& names = p.side == Side::kX ? data.x_names() : data.y_names();
    os << p.probe << '\t' << to_string(p.side) << '\t' << p.index + 1 << '\t'
       << fmt_double(p.difference) << '\t' << names[static_cast<std::size_t>(p.index)] << '\n';
  }
}

/// Harness TSV: one row per cell.
inline void write_cell_tsv(std::ostream& os, const std::vector<CellSummary>& cells,
                           const json& config, bool both_targets) {
  write_config_line(os, config);
  os << "model\tp\tq\ts\ttau\tn_reps\treject_rate\tcoverage\tmean_tau_hat\tsd_tau_hat\t"
        "failures\ttruth\ttruth_exact\tmedian_tau_hat\tq05_tau_hat\tq95_tau_hat";
  if (both_targets) os << "\tmean_tau_sq_hat";
  os << '\n';
  for (const auto& c : cells) {
    os << to_string(c.spec.kind) << '\t' << c.spec.p << '\t' << c.spec.q << '\t' << c.s << '\t'
       << fmt_double(c.spec.tau) << '\t' << c.n_reps << '\t' << fmt_double(c.reject_rate) << '\t'
       << fmt_double(c.coverage) << '\t' << fmt_double(c.mean_tau_hat) << '\t'
       << fmt_double(c.sd_tau_hat) << '\t' << c.failures << '\t' << fmt_double(c.truth) << '\t'
       << (c.truth_exact ? "true" : "false") << '\t' << fmt_double(c.median) << '\t'
       << fmt_double(c.q05) << '\t' << fmt_double(c.q95);
    if (both_targets) {
      double sum = 0.0;
      Eigen::Index ok = 0;
      for (const auto& r : c.reps)
        if (r.ok) {
          sum += r.tau_sq_hat;
          ++ok;
        }
      os << '\t' << fmt_double(ok > 0 ? sum / static_cast<double>(ok) : NAN);
    }
    os << '\n';
  }
}

inline json to_json(const ReplicationResult& r) {
  json j{{"rep", r.rep}, {"seed", r.seed}, {"ok", r.ok}};
  if (!r.ok) {
    j["error"] = r.error;
    return j;
  }
  j["tau_hat"] = r.tau_hat;
  j["se"] = r.se;
  j["ci"] = {r.ci_lo, r.ci_hi};
  j["p_value"] = r.p_value;
  j["reject"] = r.reject;
  j["covered"] = r.covered;
  if (r.has_tau_sq) j["tau_sq_hat"] = r.tau_sq_hat;
  return j;
}

}  // namespace scca

#endif  // SCCA_REPORT_JSON_HPP
