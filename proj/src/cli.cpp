#include "qlil/cli.hpp"

#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "qlil/classfn.hpp"
#include "qlil/config.hpp"
#include "qlil/error.hpp"
#include "qlil/mle.hpp"
#include "qlil/montecarlo.hpp"
#include "qlil/numeric.hpp"
#include "qlil/qsim.hpp"
#include "qlil/serialize.hpp"

namespace qlil::cli {

namespace {

namespace fs = std::filesystem;

struct EnvelopeCheck {
  bool pass = true;
  std::vector<std::string> violations;

  void fail(std::string what) {
    pass = false;
    violations.push_back(std::move(what));
  }
  Json to_json() const { return {{"pass", pass}, {"violations", violations}}; }
};

// Command-line values; every set field overrides the config file.
struct Flags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<unsigned> parallel;
  std::optional<std::uint64_t> replications;
  bool strict = false;

  std::string window_path;
  std::optional<std::string> arrival;
  std::optional<std::string> service;
  std::optional<double> theta0;
  std::optional<double> phi0;

  std::optional<std::string> eps;
  std::optional<double> t_max;
  std::optional<double> margin;
  std::optional<std::string> family;
  std::optional<double> param;
  std::optional<double> c;
  std::optional<double> first;
  std::optional<double> last;
  std::optional<std::size_t> points;
  std::string probs_path;
  bool unit_weights = false;
};

Json read_json_file(const std::string& path, const char* what) {
  std::ifstream in(path);
  if (!in) {
    throw PreconditionError(std::string("cannot open ") + what + " '" + path + "'");
  }
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw PreconditionError(std::string("malformed JSON in ") + what + " '" + path +
                            "': " + e.what());
  }
}

RunConfig load_config(const Flags& f) {
  Json j = Json::object();
  if (!f.config_path.empty()) {
    j = read_json_file(f.config_path, "config");
    if (!j.is_object()) throw PreconditionError("config must be a JSON object");
  }
  if (f.seed) j["seed"] = *f.seed;
  if (f.out) j["out"] = *f.out;
  if (f.parallel) j["parallel"] = *f.parallel;
  if (f.replications) j["replications"] = *f.replications;
  if (f.arrival) j["arrival"]["model"] = *f.arrival;
  if (f.service) j["service"]["model"] = *f.service;
  if (f.theta0 || f.phi0) {
    if (!f.theta0 || !f.phi0) {
      throw PreconditionError("--theta0 and --phi0 must be given together");
    }
    j["true_params"] = {{"theta0", *f.theta0}, {"phi0", *f.phi0}};
  }
  if (f.eps) j["epsilon"] = *f.eps;
  if (f.t_max) j["t_max"] = *f.t_max;
  if (f.margin) j["margin"] = *f.margin;
  if (f.c) j["C"] = *f.c;
  if (f.family || f.param) {
    if (!f.family || !f.param) {
      throw PreconditionError("--family and --param must be given together");
    }
    j["boundary"] = {{"family", *f.family}, {"param", *f.param}};
  }
  if (f.first || f.last || f.points) {
    if (!f.first || !f.last || !f.points) {
      throw PreconditionError("--first, --last and --points must be given together");
    }
    j["grid"] = geometric_grid(*f.first, *f.last, *f.points);
  }
  return parse_run_config(j);
}

fs::path output_dir(const RunConfig& cfg, const std::string& command) {
  fs::path dir = fs::path(cfg.out) / command / cfg.hash();
  fs::create_directories(dir);
  return dir;
}

void write_file(const fs::path& path, const std::string& contents) {
  std::ofstream file(path, std::ios::binary);
  if (!file) throw std::runtime_error("cannot write '" + path.string() + "'");
  file << contents;
}

void write_report(const RunConfig& cfg, const std::string& command, const std::string& csv,
                  const Json& report, const EnvelopeCheck& envelope, std::ostream& out) {
  const fs::path dir = output_dir(cfg, command);
  const std::string stem = command + "_" + cfg.hash() + "_s" + std::to_string(cfg.seed);
  const Json summary = {{"command", command},     {"config", cfg.canonical},
                        {"config_hash", cfg.hash()}, {"seed", cfg.seed},
                        {"report", report},       {"envelope", envelope.to_json()}};
  write_file(dir / (stem + ".csv"), csv);
  write_file(dir / (stem + ".json"), summary.dump(2) + "\n");
  out << csv;
  out << "wrote " << (dir / (stem + ".csv")).string() << "\n";
  out << "wrote " << (dir / (stem + ".json")).string() << "\n";
}

int finish(const EnvelopeCheck& envelope, bool strict, std::ostream& err) {
  for (const auto& v : envelope.violations) {
    err << "envelope: " << v << "\n";
  }
  return strict && !envelope.pass ? kEnvelopeViolation : kSuccess;
}

ExperimentConfig experiment_for(const RunConfig& cfg, std::ostream& err) {
  ExperimentConfig e = cfg.experiment();
  if (const auto warning = stability_warning(e)) {
    err << "warning: " << *warning << "\n";
  }
  return e;
}

int cmd_simulate(const Flags& f, std::ostream& out, std::ostream&) {
  const RunConfig cfg = load_config(f);
  const BoundLaw arrival = cfg.require_law("arrival").bind();
  const BoundLaw service = cfg.require_law("service").bind();
  const StoppingRule rule = cfg.require_rule();
  RngStream rng(cfg.seed, 0);
  const ObservationWindow w = simulate(arrival, service, rule, rng);
  const fs::path path = output_dir(cfg, "simulate") / ("window_s" + std::to_string(cfg.seed) + ".json");
  write_file(path, window_to_json(w).dump(2) + "\n");
  out << path.string() << "\n";
  return kSuccess;
}

int cmd_estimate(const Flags& f, std::ostream& out, std::ostream&) {
  RunConfig cfg = load_config(f);
  if (!cfg.arrival) throw PreconditionError("config: missing key 'arrival.model'");
  if (!cfg.service) throw PreconditionError("config: missing key 'service.model'");
  const Json record = read_json_file(f.window_path, "window file");
  const ObservationWindow w = window_from_json(record);
  const MleResult r = estimate(w.view(), make_model(cfg.arrival->model),
                               make_model(cfg.service->model), cfg.true_params);
  cfg.canonical["window"] = record;
  const fs::path path = output_dir(cfg, "estimate") / "mle.json";
  const std::string text = mle_to_json(r).dump(2) + "\n";
  write_file(path, text);
  out << text;
  return kSuccess;
}

int cmd_normality(const Flags& f, std::ostream& out, std::ostream& err) {
  const RunConfig cfg = load_config(f);
  const NormalityReport report = run_normality(experiment_for(cfg, err));
  EnvelopeCheck envelope;
  for (const auto& row : report.rows) {
    if (row.ks_theta > row.envelope_25 || row.ks_phi > row.envelope_25) {
      envelope.fail("KS above 25 eps^(1/2)(T) at T = " + format_double(row.T));
    }
  }
  write_report(cfg, "normality", to_csv(report), report_to_json(report), envelope, out);
  return finish(envelope, f.strict, err);
}

int cmd_c1(const Flags& f, std::ostream& out, std::ostream& err) {
  const RunConfig cfg = load_config(f);
  const C1Report report = run_condition_c1(experiment_for(cfg, err));
  EnvelopeCheck envelope;
  for (const auto& row : report.rows) {
    if (row.freq_a > row.eps_sqrt + 2.0 * row.se_a) {
      envelope.fail("A(T) exceedance above eps^(1/2) at T = " + format_double(row.T));
    }
    if (row.freq_d > row.eps_sqrt + 2.0 * row.se_d) {
      envelope.fail("D(T) exceedance above eps^(1/2) at T = " + format_double(row.T));
    }
  }
  write_report(cfg, "c1check", to_csv(report), report_to_json(report), envelope, out);
  return finish(envelope, f.strict, err);
}

int cmd_consistency(const Flags& f, std::ostream& out, std::ostream& err) {
  const RunConfig cfg = load_config(f);
  const ConsistencyReport report = run_consistency(experiment_for(cfg, err));
  EnvelopeCheck envelope;
  for (const auto& row : report.rows) {
    if (row.T >= 400.0 && row.ratio_theta && (*row.ratio_theta < 0.4 || *row.ratio_theta > 0.6)) {
      envelope.fail("MAE ratio outside [0.4, 0.6] at T = " + format_double(row.T));
    }
  }
  write_report(cfg, "consistency", to_csv(report), report_to_json(report), envelope, out);
  return finish(envelope, f.strict, err);
}

int cmd_crossings(const Flags& f, std::ostream& out, std::ostream& err) {
  const RunConfig cfg = load_config(f);
  const ExperimentConfig e = experiment_for(cfg, err);
  std::vector<Verdict> verdicts;
  for (const auto& h : cfg.require_boundaries()) {
    verdicts.push_back(integral_test(h).verdict);
  }
  const auto has = [&](Verdict v) { return std::find(verdicts.begin(), verdicts.end(), v) != verdicts.end(); };
  if (!has(Verdict::Upper) || !has(Verdict::Lower)) {
    throw PreconditionError("crossings need at least one upper-class and one lower-class boundary");
  }
  const CrossingReport report = run_crossings(e);
  EnvelopeCheck envelope;
  for (std::size_t lo = 0; lo < verdicts.size(); ++lo) {
    if (verdicts[lo] != Verdict::Lower) continue;
    for (std::size_t up = 0; up < verdicts.size(); ++up) {
      if (verdicts[up] != Verdict::Upper) continue;
      const auto& a = report.boundaries[lo].tail_fraction;
      const auto& b = report.boundaries[up].tail_fraction;
      for (std::size_t j = 0; j < a.size(); ++j) {
        if (!(a[j] > b[j])) {
          envelope.fail(report.boundaries[lo].boundary + " does not dominate " +
                        report.boundaries[up].boundary + " at tail index " + std::to_string(j));
        }
      }
    }
  }
  Json json = report_to_json(report);
  for (std::size_t i = 0; i < verdicts.size(); ++i) {
    json["boundaries"][i]["class"] = to_string(verdicts[i]);
  }
  write_report(cfg, "crossings", to_csv(report), json, envelope, out);
  return finish(envelope, f.strict, err);
}

int cmd_c2(const Flags& f, std::ostream& out, std::ostream&) {
  const RunConfig cfg = load_config(f);
  const C2Report report =
      condition_c2_check(DecayFunction::parse(cfg.epsilon), cfg.t_max.value_or(kDefaultC2Horizon));
  Json j = report_to_json(report);
  j["epsilon"] = cfg.epsilon;
  out << j.dump(2) << "\n";
  return kSuccess;
}

int cmd_classify(const Flags& f, std::ostream& out, std::ostream&) {
  const RunConfig cfg = load_config(f);
  const ClassFunction h = cfg.require_boundary();
  const ClassificationReport report = integral_test(
      h, cfg.t_max.value_or(kDefaultClassifyHorizon), cfg.margin.value_or(kDefaultMargin));
  Json j = report_to_json(report);
  j["boundary"] = h.describe();
  out << j.dump(2) << "\n";
  return kSuccess;
}

int cmd_diagnostics(const Flags& f, std::ostream& out, std::ostream&) {
  const RunConfig cfg = load_config(f);
  const ClassFunction h = cfg.require_boundary();
  const std::vector<double> grid = cfg.require_grid();
  std::optional<std::vector<double>> probs;
  if (!f.probs_path.empty()) {
    try {
      probs = read_json_file(f.probs_path, "crossing probabilities").get<std::vector<double>>();
    } catch (const Json::exception&) {
      throw PreconditionError("crossing probabilities must be a JSON array of numbers");
    }
  }
  SeriesOptions options;
  options.c = cfg.c;
  options.weighting = f.unit_weights ? SeriesWeighting::Unit : SeriesWeighting::GridSpacing;
  const auto rows = series_diagnostics(
      h, grid,
      probs ? std::optional<std::span<const double>>(*probs) : std::nullopt, options);
  const std::string csv = to_csv(rows);
  RunConfig named = cfg;
  if (probs) named.canonical["crossing_probs"] = *probs;
  const fs::path dir = output_dir(named, "diagnostics");
  write_file(dir / ("diagnostics_" + named.hash() + ".csv"), csv);
  out << csv;
  return kSuccess;
}

void add_common(CLI::App* sub, Flags& f) {
  sub->add_option("--config", f.config_path, "JSON config file");
  sub->add_option("--seed", f.seed, "master seed (overrides config)");
  sub->add_option("--out", f.out, "output directory (default: runs)");
  sub->add_option("--parallel", f.parallel, "worker threads for replications");
  sub->add_option("--replications", f.replications, "number of replications");
  sub->add_flag("--strict", f.strict, "exit 4 when the report violates its envelope");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"GI/G/1 rate estimation and boundary-crossing toolkit"};
  app.require_subcommand(1);
  Flags f;

  auto* simulate_cmd = app.add_subcommand("simulate", "simulate one observation window");
  add_common(simulate_cmd, f);

  auto* estimate_cmd = app.add_subcommand("estimate", "estimate rates from a window file");
  add_common(estimate_cmd, f);
  estimate_cmd->add_option("--window", f.window_path, "window JSON file")->required();
  estimate_cmd->add_option("--arrival", f.arrival, "arrival model name");
  estimate_cmd->add_option("--service", f.service, "service model name");
  estimate_cmd->add_option("--theta0", f.theta0, "true arrival parameter");
  estimate_cmd->add_option("--phi0", f.phi0, "true service parameter");

  auto* normality_cmd = app.add_subcommand("normality", "KS distance of standardized estimates");
  add_common(normality_cmd, f);
  auto* crossings_cmd = app.add_subcommand("crossings", "nested-path boundary crossings");
  add_common(crossings_cmd, f);
  auto* c1_cmd = app.add_subcommand("c1check", "concentration of the counting processes");
  add_common(c1_cmd, f);
  auto* consistency_cmd = app.add_subcommand("consistency", "mean absolute error versus T");
  add_common(consistency_cmd, f);

  auto* c2_cmd = app.add_subcommand("c2check", "integrability of a decay function");
  add_common(c2_cmd, f);
  c2_cmd->add_option("--eps", f.eps, "power:<a> | inv_loglog_sq | exp");
  c2_cmd->add_option("--t-max", f.t_max, "integration horizon");

  auto* classify_cmd = app.add_subcommand("classify", "integral-test class of a boundary");
  add_common(classify_cmd, f);
  classify_cmd->add_option("--family", f.family, "scaled_lil | power_loglog");
  classify_cmd->add_option("--param", f.param, "boundary coefficient");
  classify_cmd->add_option("--t-max", f.t_max, "horizon for extrapolation");
  classify_cmd->add_option("--margin", f.margin, "band around the critical exponent");

  auto* diagnostics_cmd = app.add_subcommand("diagnostics", "partial sums of the class series");
  add_common(diagnostics_cmd, f);
  diagnostics_cmd->add_option("--family", f.family, "scaled_lil | power_loglog");
  diagnostics_cmd->add_option("--param", f.param, "boundary coefficient");
  diagnostics_cmd->add_option("--first", f.first, "first grid time");
  diagnostics_cmd->add_option("--last", f.last, "last grid time");
  diagnostics_cmd->add_option("--points", f.points, "grid size");
  diagnostics_cmd->add_option("--C", f.c, "constant in the (1 + C/loglog t) factor");
  diagnostics_cmd->add_option("--probs", f.probs_path, "JSON array of crossing probabilities");
  diagnostics_cmd->add_flag("--unit-weights", f.unit_weights, "literal series (no grid spacing)");

  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kConfigError;
  }

  try {
    if (simulate_cmd->parsed()) return cmd_simulate(f, out, err);
    if (estimate_cmd->parsed()) return cmd_estimate(f, out, err);
    if (normality_cmd->parsed()) return cmd_normality(f, out, err);
    if (crossings_cmd->parsed()) return cmd_crossings(f, out, err);
    if (c1_cmd->parsed()) return cmd_c1(f, out, err);
    if (consistency_cmd->parsed()) return cmd_consistency(f, out, err);
    if (c2_cmd->parsed()) return cmd_c2(f, out, err);
    if (classify_cmd->parsed()) return cmd_classify(f, out, err);
    if (diagnostics_cmd->parsed()) return cmd_diagnostics(f, out, err);
  } catch (const PreconditionError& e) {
    err << "error: " << e.what() << "\n";
    return kConfigError;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << "\n";
    return kConfigError;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << "\n";
    return kDataError;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kInternalError;
  }
  return kConfigError;
}

}  // namespace qlil::cli
