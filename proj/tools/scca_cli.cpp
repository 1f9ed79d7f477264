// scca: post-selection inference for sparse CCA from the command line.
//
//   scca estimate --x X.csv --y Y.csv --sx 3 --sy 3
//   scca test     --x X.csv --y Y.csv --sx 1 --sy 1 --alpha 0.05
//   scca scree    --x X.csv --y Y.csv --max-steps 60
//   scca simulate --model A1 --p 10 --q 10 --tau 0.4 --s 3 --reps 500
//   scca submod   --x X.csv --y Y.csv --size1 5 --size2 6 --probes 100
//
// Every output echoes its resolved configuration; `--config FILE` replays it
// (FILE may be a previous JSON report or TSV output). Exit codes: 0 success,
// 2 validation, 3 numerical, 4 I/O, 1 internal.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "scca/report_json.hpp"
#include "scca/scca.hpp"

namespace {

using scca::ErrorKind;
using scca::fail;
using scca::json;

struct Options {
  std::string x, y;
  bool header = true;
  long long sx = 1, sy = 1;

  double alpha = 0.05;
  long long stride = 20;
  std::string stride_mode = "batch";
  double ell_frac = 0.5;
  long long ell = 0;
  int reorderings = 10;
  bool shuffle = true;
  std::uint64_t seed = 0;
  std::string selector = "greedy";
  std::string target = "root";
  double full_cap = scca::kDefaultFullSearchCap;

  scca::Tolerances tol;

  long long max_steps = 60;
  double min_increment = 0.0;

  std::string model = "N";
  long long p = 10, q = 10, n = 500, s = 1, reps = 500;
  double tau = 0.0;
  bool both_targets = false;
  std::string raw;
  int jobs = 1;

  long long size1 = 5, size2 = 6, probes = 100;

  std::string out;
  bool quiet = false;
};

constexpr int kExitInternal = 1;

int exit_code(ErrorKind k) {
  switch (k) {
    case ErrorKind::kValidation: return 2;
    case ErrorKind::kNumerical: return 3;
    case ErrorKind::kIo: return 4;
    case ErrorKind::kInternal: return kExitInternal;
  }
  return kExitInternal;
}

void log(const Options& o, const std::string& msg) {
  if (!o.quiet) std::cerr << "scca: " << msg << '\n';
}

void emit(const Options& o, const std::string& text) {
  if (o.out.empty()) {
    std::cout << text << std::flush;
    return;
  }
  std::ofstream f(o.out, std::ios::binary);
  if (!f) fail(ErrorKind::kIo, "cannot write '" + o.out + "'");
  f << text;
  if (!f) fail(ErrorKind::kIo, "write failed for '" + o.out + "'");
}

void print_error(ErrorKind kind, const std::string& msg) {
  std::cout << json{{"error", {{"kind", scca::to_string(kind)}, {"message", msg}}}}.dump(2)
            << '\n';
}

// ---- option groups -------------------------------------------------------

void add_data(CLI::App* c, Options& o) {
  c->add_option("--x", o.x, "CSV file with the X block")->required();
  c->add_option("--y", o.y, "CSV file with the Y block")->required();
  c->add_flag("--header,!--no-header", o.header, "first line holds column labels (default)");
}

void add_tolerances(CLI::App* c, Options& o) {
  c->add_option("--ridge", o.tol.ridge, "diagonal loading of covariance blocks");
  c->add_option("--spd-cap", o.tol.spd_condition_cap, "max condition number of covariance blocks");
  c->add_option("--tau-floor", o.tol.tau_floor, "root-Pillai values at or below this are zero");
  c->add_option("--sigma-floor", o.tol.sigma_floor, "lower bound on gradient sd");
}

void add_stream(CLI::App* c, Options& o) {
  c->add_option("--alpha", o.alpha, "test / interval level");
  c->add_option("--stride", o.stride, "refit stride C");
  c->add_option("--stride-mode", o.stride_mode, "batch | thinned")
      ->check(CLI::IsMember({"batch", "thinned"}));
  c->add_option("--ell-frac", o.ell_frac, "burn-in fraction; ell = ceil(frac * n)");
  c->add_option("--ell", o.ell, "explicit burn-in length (overrides --ell-frac)");
  c->add_option("--reorderings", o.reorderings, "random row orders to average");
  c->add_flag("--shuffle,!--no-shuffle", o.shuffle, "randomly re-order rows before each stream");
  c->add_option("--seed", o.seed, "master seed");
  c->add_option("--selector", o.selector, "greedy | full")
      ->check(CLI::IsMember({"greedy", "full"}));
  c->add_option("--target", o.target, "root | square")->check(CLI::IsMember({"root", "square"}));
  c->add_option("--full-cap", o.full_cap, "max combinations for --selector full");
}

void add_common(CLI::App* c, Options& o) {
  c->add_option("--out", o.out, "write the result here instead of stdout");
  c->add_flag("--quiet", o.quiet, "suppress log lines on stderr");
  // Handled before parsing (see expand_config); registered for --help.
  c->add_option("--config", "replay the configuration echoed in a previous output");
}

// ---- config echo ---------------------------------------------------------

json tolerances_json(const Options& o) {
  return json{{"ridge", o.tol.ridge},
              {"spd-cap", o.tol.spd_condition_cap},
              {"tau-floor", o.tol.tau_floor},
              {"sigma-floor", o.tol.sigma_floor}};
}

json stream_json(const Options& o) {
  return json{{"alpha", o.alpha},         {"stride", o.stride},
              {"stride-mode", o.stride_mode}, {"ell-frac", o.ell_frac},
              {"ell", o.ell},             {"reorderings", o.reorderings},
              {"shuffle", o.shuffle},     {"seed", o.seed},
              {"selector", o.selector},   {"target", o.target},
              {"full-cap", o.full_cap}};
}

json base_config(const std::string& command) {
  return json{{"command", command}, {"version", scca::kVersion}};
}

json merged(json a, const json& b) {
  for (const auto& [k, v] : b.items()) a[k] = v;
  return a;
}

json data_json(const Options& o) { return json{{"x", o.x}, {"y", o.y}, {"header", o.header}}; }

// Pull the echoed config out of a previous output: a JSON report (key
// "config", possibly nested under "report"), a bare config object, or a TSV
// whose first line is "# config: {...}".
json read_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::kIo, "cannot open config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  const std::string tag = "# config: ";
  json j;
  if (text.rfind(tag, 0) == 0) {
    const auto eol = text.find('\n');
    j = json::parse(text.substr(tag.size(), eol - tag.size()), nullptr, false);
  } else {
    j = json::parse(text, nullptr, false);
  }
  if (j.is_discarded() || !j.is_object())
    fail(ErrorKind::kValidation, "'" + path + "' holds no echoed config");
  if (j.contains("report") && j["report"].is_object()) j = j["report"];
  if (j.contains("config") && j["config"].is_object()) j = j["config"];
  if (!j.contains("command"))
    fail(ErrorKind::kValidation, "'" + path + "' holds no echoed config");
  return j;
}

// Replace "--config FILE" by the flags it encodes, placed right after the
// subcommand so explicit flags given on the command line still win.
std::vector<std::string> expand_config(const std::vector<std::string>& args) {
  std::vector<std::string> out;
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[++i];
    } else if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
    } else {
      out.push_back(args[i]);
    }
  }
  if (path.empty()) return out;
  const json cfg = read_config_file(path);
  const std::string command = cfg["command"].get<std::string>();
  if (out.size() < 2 || out[1] != command)
    fail(ErrorKind::kValidation, "config is for '" + command + "'; run it as 'scca " + command +
                                     " --config " + path + "'");
  std::vector<std::string> flags;
  for (const auto& [k, v] : cfg.items()) {
    if (k == "command" || k == "version") continue;
    flags.push_back("--" + k + "=" + (v.is_string() ? v.get<std::string>() : v.dump()));
  }
  out.insert(out.begin() + 2, flags.begin(), flags.end());
  return out;
}

// ---- commands ------------------------------------------------------------

scca::StreamConfig stream_config(const Options& o) {
  scca::StreamConfig c;
  c.alpha = o.alpha;
  c.stride = o.stride;
  c.stride_mode = o.stride_mode == "batch" ? scca::StrideMode::kBatch : scca::StrideMode::kThinned;
  c.ell_frac = o.ell_frac;
  c.ell = o.ell;
  c.reorderings = o.reorderings;
  c.shuffle = o.shuffle;
  c.seed = o.seed;
  c.selector = o.selector == "full" ? scca::Selector::kFull : scca::Selector::kGreedy;
  c.target = o.target == "square" ? scca::Target::kPillai : scca::Target::kRootPillai;
  c.full_search_cap = o.full_cap;
  return c;
}

// Range checks that need no data.
void check_stream_flags(const Options& o) {
  if (!(o.alpha > 0 && o.alpha < 1)) fail(ErrorKind::kValidation, "--alpha must lie in (0, 1)");
  if (o.stride < 1) fail(ErrorKind::kValidation, "--stride must be at least 1");
  if (o.reorderings < 1) fail(ErrorKind::kValidation, "--reorderings must be at least 1");
  if (o.ell < 0) fail(ErrorKind::kValidation, "--ell must be non-negative");
  if (o.ell == 0 && !(o.ell_frac > 0 && o.ell_frac < 1))
    fail(ErrorKind::kValidation, "--ell-frac must lie in (0, 1)");
  if (!(o.full_cap >= 1)) fail(ErrorKind::kValidation, "--full-cap must be at least 1");
}

void check_sizes(const Options& o, const scca::PairedDataset& d) {
  if (o.sx < 1 || o.sx > d.p())
    fail(ErrorKind::kValidation, "--sx = " + std::to_string(o.sx) + " must lie in [1, p = " +
                                     std::to_string(d.p()) + "]");
  if (o.sy < 1 || o.sy > d.q())
    fail(ErrorKind::kValidation, "--sy = " + std::to_string(o.sy) + " must lie in [1, q = " +
                                     std::to_string(d.q()) + "]");
}

scca::PairedDataset load(const Options& o) {
  scca::PairedDataset d = scca::load_csv(o.x, o.y, o.header);
  log(o, "loaded n=" + std::to_string(d.n()) + " p=" + std::to_string(d.p()) +
             " q=" + std::to_string(d.q()));
  const auto warnings = scca::bound_check(d);
  if (!warnings.empty())
    log(o, std::to_string(warnings.size()) + " column(s) fall outside [-1, 1], first: " +
               warnings.front().name + " (informational)");
  return d;
}

int cmd_estimate(const Options& o, bool with_test) {
  check_stream_flags(o);
  const json config = merged(merged(merged(merged(base_config(with_test ? "test" : "estimate"),
                                                  data_json(o)),
                                           json{{"sx", o.sx}, {"sy", o.sy}}),
                                    stream_json(o)),
                             tolerances_json(o));
  const scca::PairedDataset d = load(o);
  check_sizes(o, d);
  const scca::EstimateReport r = scca::estimate(d, o.sx, o.sy, stream_config(o), o.tol);
  if (r.n_degenerate > 0)
    log(o, std::to_string(r.n_degenerate) + " degenerate update(s) used the fallback gradient");
  json body = scca::to_json(r, d, config);
  if (with_test) body = scca::to_json(scca::test_null(r, o.alpha), std::move(body));
  emit(o, body.dump(2) + "\n");
  return 0;
}

int cmd_scree(const Options& o) {
  if (o.max_steps < 1) fail(ErrorKind::kValidation, "--max-steps must be at least 1");
  if (!(o.min_increment >= 0)) fail(ErrorKind::kValidation, "--min-increment must be >= 0");
  const json config = merged(merged(merged(base_config("scree"), data_json(o)),
                                    json{{"max-steps", o.max_steps},
                                         {"min-increment", o.min_increment}}),
                             tolerances_json(o));
  const scca::PairedDataset d = load(o);
  const scca::PrefixMoments m = scca::PrefixMoments::at(d, d.n(), o.tol);
  const auto steps = scca::scree_increments(m, o.max_steps, o.min_increment);
  std::ostringstream os;
  scca::write_scree_tsv(os, steps, d, config);
  emit(o, os.str());
  return 0;
}

int cmd_simulate(const Options& o) {
  check_stream_flags(o);
  if (o.reps < 1) fail(ErrorKind::kValidation, "--reps must be at least 1");
  if (o.jobs < 1) fail(ErrorKind::kValidation, "--jobs must be at least 1");
  scca::ModelSpec spec;
  spec.kind = scca::parse_model(o.model);
  spec.p = o.p;
  spec.q = o.q;
  spec.tau = o.tau;
  spec.n = o.n;
  if (o.s < 1 || o.s > std::min(o.p, o.q))
    fail(ErrorKind::kValidation, "--s must lie in [1, min(p, q)]");
  // --jobs and --raw do not change the table, so they are not echoed.
  const json config =
      merged(merged(merged(base_config("simulate"),
                           json{{"model", o.model}, {"p", o.p}, {"q", o.q}, {"tau", o.tau},
                                {"n", o.n}, {"s", o.s}, {"reps", o.reps},
                                {"both-targets", o.both_targets}}),
                    stream_json(o)),
             tolerances_json(o));
  log(o, "simulating " + o.model + " p=" + std::to_string(o.p) + " q=" + std::to_string(o.q) +
             " reps=" + std::to_string(o.reps) + " jobs=" + std::to_string(o.jobs));
  const scca::CellSummary cell = scca::run_cell(spec, o.s, o.reps, stream_config(o),
                                                       o.seed, o.jobs, o.tol, o.both_targets);
  if (cell.failures > 0)
    log(o, std::to_string(cell.failures) + " replication(s) failed; see --raw for messages");
  if (!o.raw.empty()) {
    std::ofstream f(o.raw, std::ios::binary);
    if (!f) fail(ErrorKind::kIo, "cannot write '" + o.raw + "'");
    for (const auto& r : cell.reps) f << scca::to_json(r).dump() << '\n';
    if (!f) fail(ErrorKind::kIo, "write failed for '" + o.raw + "'");
  }
  std::ostringstream os;
  scca::write_cell_tsv(os, {cell}, config, o.both_targets);
  emit(o, os.str());
  return 0;
}

int cmd_submod(const Options& o) {
  const json config = merged(merged(merged(base_config("submod"), data_json(o)),
                                    json{{"size1", o.size1}, {"size2", o.size2},
                                         {"probes", o.probes}, {"seed", o.seed}}),
                             tolerances_json(o));
  if (o.probes < 1) fail(ErrorKind::kValidation, "--probes must be at least 1");
  if (!(o.size1 >= 1 && o.size1 < o.size2))
    fail(ErrorKind::kValidation, "need 1 <= --size1 < --size2");
  const scca::PairedDataset d = load(o);
  const scca::PrefixMoments m = scca::PrefixMoments::at(d, d.n(), o.tol);
  const auto probes = scca::submodularity_probe(d.p(), d.q(), o.size1, o.size2, o.probes,
                                                o.seed, scca::root_pillai_set_function(m));
  long long nonneg = 0;
  for (const auto& p : probes) nonneg += p.difference >= 0;
  log(o, std::to_string(nonneg) + "/" + std::to_string(probes.size()) +
             " differences are non-negative");
  std::ostringstream os;
  scca::write_probe_tsv(os, probes, d, config);
  emit(o, os.str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  Options o;
  CLI::App app{"Post-selection inference for sparse canonical correlation analysis"};
  app.set_version_flag("--version", scca::kVersion);
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  auto* est = app.add_subcommand("estimate", "stabilized one-step estimate of tau_max (JSON)");
  auto* tst = app.add_subcommand("test", "test tau_max = 0 (JSON decision plus report)");
  for (auto* c : {est, tst}) {
    add_data(c, o);
    c->add_option("--sx", o.sx, "number of X variables")->required();
    c->add_option("--sy", o.sy, "number of Y variables")->required();
    add_stream(c, o);
    add_tolerances(c, o);
    add_common(c, o);
  }

  auto* scr = app.add_subcommand("scree", "greedy Pillai-trace increments (TSV)");
  add_data(scr, o);
  scr->add_option("--max-steps", o.max_steps, "records to emit");
  scr->add_option("--min-increment", o.min_increment, "stop once the best increment is smaller");
  add_tolerances(scr, o);
  add_common(scr, o);

  auto* sim = app.add_subcommand("simulate", "Monte Carlo rejection rate and coverage (TSV)");
  sim->add_option("--model", o.model, "N | A1 | A2")->check(CLI::IsMember({"N", "A1", "A2"}));
  sim->add_option("--p", o.p, "X dimension");
  sim->add_option("--q", o.q, "Y dimension");
  sim->add_option("--tau", o.tau, "signal strength");
  sim->add_option("--n", o.n, "sample size");
  sim->add_option("--s", o.s, "sparsity level s_x = s_y");
  sim->add_option("--reps", o.reps, "replications");
  sim->add_flag("--both-targets", o.both_targets, "also run the squared (tau^2) target");
  sim->add_option("--raw", o.raw, "write per-replication JSON lines to this file");
  sim->add_option("--jobs", o.jobs, "worker threads");
  add_stream(sim, o);
  add_tolerances(sim, o);
  add_common(sim, o);

  auto* sub = app.add_subcommand("submod", "submodularity probe of the root-Pillai trace (TSV)");
  add_data(sub, o);
  sub->add_option("--size1", o.size1, "|K| = |J| of S1");
  sub->add_option("--size2", o.size2, "|K| = |J| of S2");
  sub->add_option("--probes", o.probes, "number of probe elements");
  sub->add_option("--seed", o.seed, "seed");
  add_tolerances(sub, o);
  add_common(sub, o);

  try {
    o.tol = scca::Tolerances::from_env();
    std::vector<std::string> args(argv, argv + argc);
    args = expand_config(args);
    // Simulation replicates i.i.d. rows, so it defaults to one pass in
    // the given order.
    if (args.size() > 1 && args[1] == "simulate") {
      o.reorderings = 1;
      o.shuffle = false;
    }
    std::vector<const char*> cargs;
    for (const auto& a : args) cargs.push_back(a.c_str());
    try {
      app.parse(static_cast<int>(cargs.size()), cargs.data());
    } catch (const CLI::CallForHelp& e) {
      return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
      return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
      return app.exit(e);
    } catch (const CLI::ParseError& e) {
      print_error(ErrorKind::kValidation, e.what());
      return exit_code(ErrorKind::kValidation);
    }
    o.tol.validate();

    if (est->parsed()) return cmd_estimate(o, false);
    if (tst->parsed()) return cmd_estimate(o, true);
    if (scr->parsed()) return cmd_scree(o);
    if (sim->parsed()) return cmd_simulate(o);
    if (sub->parsed()) return cmd_submod(o);
    fail(ErrorKind::kInternal, "no subcommand dispatched");
  } catch (const scca::Error& e) {
    print_error(e.kind(), e.what());
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    print_error(ErrorKind::kInternal, e.what());
    return kExitInternal;
  }
}
