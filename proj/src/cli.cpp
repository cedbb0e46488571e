#include "boomforce/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "boomforce/config.hpp"
#include "boomforce/errors.hpp"
#include "boomforce/harness.hpp"
#include "boomforce/metrics.hpp"
#include "boomforce/serialize.hpp"
#include "boomforce/verify.hpp"

namespace boomforce {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Common {
  std::string config_path;
  std::vector<std::string> overrides;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
};

std::string opt(const std::optional<double>& v, int precision = 4) {
  if (!v) return "n/a";
  std::ostringstream ss;
  ss << std::setprecision(precision) << *v;
  return ss.str();
}

ScenarioConfig load_with_seed(const Common& c) {
  std::vector<std::string> overrides = c.overrides;
  if (c.seed) overrides.push_back("world.seed=" + std::to_string(*c.seed));
  return load_config(c.config_path, overrides);
}

void write_run(const fs::path& dir, const ScenarioResult& result) {
  fs::create_directories(dir);
  std::ostringstream csv;
  write_trace_csv(csv, result.trace);
  write_text_file(dir / "trace.csv", csv.str());
  write_text_file(dir / "summary.json", summary_to_json(result.summary).dump(2) + "\n");
}

std::optional<SecondOrderFit> try_fit(const ScenarioResult& r, double f_des) {
  if (!r.summary.t_contact) return std::nullopt;
  const double t0 = *r.summary.t_contact;
  const double t1 = r.summary.t_sweep ? *r.summary.t_sweep : t0 + 1.5;
  try {
    return fit_second_order(r.trace, f_des, {t0, t1});
  } catch (const Error&) {
    return std::nullopt;
  }
}

int cmd_run(const Common& c, std::ostream& out) {
  const ScenarioConfig config = load_with_seed(c);
  const ScenarioResult result = run_scenario(config);
  write_run(c.out_dir, result);
  const RunSummary& s = result.summary;
  out << "rms=" << opt(s.rms_force_error_after_contact) << " N"
      << " settle=" << opt(s.settle_time) << " s"
      << " contact=" << opt(s.t_contact) << " s"
      << " sweep=" << opt(s.t_sweep) << " s"
      << " diverged=" << (s.diverged ? "yes (" + s.diverged_reason + ")" : "no") << "\n";
  return s.diverged ? kExitDiverged : kExitOk;
}

struct GainsArgs {
  double omega_n = 10.0;
  double eta = 1.0;
  double mass = 1.0;
  double k_theta = 60.0;
  std::string k_ee = "5000";
  double theta1 = 1.0471975511965976;
  double d2 = 0.3;
  bool as_json = false;
  std::string out_dir;
};

int cmd_gains(const GainsArgs& a, std::ostream& out) {
  double k_ee = 0.0;
  if (a.k_ee == "inf" || a.k_ee == "infinity") {
    k_ee = kRigid;
  } else {
    try {
      k_ee = std::stod(a.k_ee);
    } catch (const std::exception&) {
      throw Error(ErrorCode::kInvalidArgument, "--k-ee must be a number or 'inf'");
    }
  }
  const AdmittanceSpec spec{a.omega_n, a.eta, a.mass};
  validate(spec);
  const StiffnessModel model{a.k_theta, k_ee};
  validate(model);
  if (!(a.d2 > 0.0)) throw Error(ErrorCode::kInvalidArgument, "--d2 must be > 0");

  const double k_eq = equivalent_stiffness(model, {a.theta1, a.d2});
  const AdmittanceGains gains = schedule_gains(spec, k_eq);
  const StabilityBound bound = stability_bound(spec, k_eq);

  json j = {{"k_eq", k_eq},
            {"k_f", gains.k_f},
            {"b", gains.b},
            {"mass", gains.mass},
            {"max_stable_dt_force", bound.max_stable_dt},
            {"scan_resolution", bound.resolution}};
  if (a.as_json) {
    out << j.dump(2) << "\n";
  } else {
    out << std::left << std::setprecision(6);
    out << std::setw(22) << "k_eq [N/m]" << k_eq << "\n";
    out << std::setw(22) << "K_f" << gains.k_f << "\n";
    out << std::setw(22) << "B [N*s/m]" << gains.b << "\n";
    out << std::setw(22) << "M [kg]" << gains.mass << "\n";
    out << std::setw(22) << "max stable dt [s]" << bound.max_stable_dt << "\n";
  }
  if (!a.out_dir.empty()) {
    fs::create_directories(a.out_dir);
    write_text_file(fs::path(a.out_dir) / "gains.json", j.dump(2) + "\n");
  }
  return kExitOk;
}

struct SweepArgs {
  std::string key;
  std::vector<std::string> values;
  unsigned jobs = 0;
};

int cmd_sweep(const Common& c, const SweepArgs& s, std::ostream& out, std::ostream& err) {
  if (s.key.empty()) throw Error(ErrorCode::kInvalidArgument, "sweep needs --key");
  if (s.values.empty()) throw Error(ErrorCode::kInvalidArgument, "sweep needs at least one value");
  if (!fs::exists(c.config_path)) {
    throw Error(ErrorCode::kIo, "config file not found: " + c.config_path);
  }
  const json doc = parse_json_text(read_text_file(c.config_path), c.config_path);

  std::vector<ScenarioConfig> configs;
  for (const std::string& value : s.values) {
    std::vector<std::string> overrides = c.overrides;
    if (c.seed) overrides.push_back("world.seed=" + std::to_string(*c.seed));
    overrides.push_back(s.key + "=" + value);
    configs.push_back(config_with_overrides(doc, overrides));
  }

  // Independent runs; each writes only to its own directory.
  std::vector<ScenarioResult> results(configs.size());
  std::vector<std::string> failures(configs.size());
  std::atomic<std::size_t> next{0};
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const unsigned workers =
      std::min<unsigned>(s.jobs ? s.jobs : hw, static_cast<unsigned>(configs.size()));
  auto work = [&] {
    for (std::size_t i = next++; i < configs.size(); i = next++) {
      try {
        results[i] = run_scenario(configs[i]);
        std::ostringstream dir;
        dir << "run_" << std::setw(3) << std::setfill('0') << i;
        write_run(fs::path(c.out_dir) / dir.str(), results[i]);
      } catch (const std::exception& e) {
        failures[i] = e.what();
      }
    }
  };
  std::vector<std::jthread> pool;
  for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
  pool.clear();

  for (std::size_t i = 0; i < failures.size(); ++i) {
    if (!failures[i].empty()) {
      throw Error(ErrorCode::kIo, "sweep run " + std::to_string(i) + ": " + failures[i]);
    }
  }

  std::ostringstream csv;
  csv << "value,rms,settle_time,diverged,omega_n_fit,eta_fit\n";
  bool any_diverged = false;
  auto cell = [](const std::optional<double>& v) {
    if (!v) return std::string();
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9g", *v);
    return std::string(buf);
  };
  for (std::size_t i = 0; i < results.size(); ++i) {
    const RunSummary& sum = results[i].summary;
    any_diverged = any_diverged || sum.diverged;
    const auto fit = try_fit(results[i], configs[i].setpoint.f_des);
    csv << s.values[i] << ',' << cell(sum.rms_force_error_after_contact) << ','
        << cell(sum.settle_time) << ',' << (sum.diverged ? "true" : "false") << ','
        << cell(fit ? std::optional(fit->omega_n) : std::nullopt) << ','
        << cell(fit ? std::optional(fit->eta) : std::nullopt) << '\n';
    out << s.key << "=" << s.values[i] << " rms=" << opt(sum.rms_force_error_after_contact)
        << " settle=" << opt(sum.settle_time) << " diverged=" << (sum.diverged ? "yes" : "no")
        << "\n";
  }
  fs::create_directories(c.out_dir);
  write_text_file(fs::path(c.out_dir) / "sweep.csv", csv.str());
  if (any_diverged) err << "one or more sweep runs diverged\n";
  return any_diverged ? kExitDiverged : kExitOk;
}

int cmd_verify(bool list_only, const std::string& fault, const std::string& out_dir,
               std::ostream& out) {
  if (list_only) {
    for (const std::string& name : verify_check_names()) out << name << "\n";
    return kExitOk;
  }
  VerifyOptions options;
  if (fault == "admittance-sign") {
    options.fault = Fault::kAdmittanceSignFlip;
  } else if (!fault.empty() && fault != "none") {
    throw Error(ErrorCode::kInvalidArgument, "unknown fault '" + fault + "'");
  }
  const auto results = run_verification(options);
  bool all = true;
  json report = json::array();
  for (const CheckResult& r : results) {
    out << (r.passed ? "PASS " : "FAIL ") << std::left << std::setw(24) << r.name << r.detail
        << "\n";
    all = all && r.passed;
    report.push_back({{"name", r.name}, {"passed", r.passed}, {"detail", r.detail}});
  }
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    write_text_file(fs::path(out_dir) / "verify.json", report.dump(2) + "\n");
  }
  return all ? kExitOk : kExitVerifyFailed;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Admittance-controlled long-reach boom: simulation and analysis"};
  app.require_subcommand(1);

  Common common;
  auto add_common = [&](CLI::App* sub, bool needs_config) {
    auto* cfg = sub->add_option("-c,--config", common.config_path, "Scenario JSON file");
    if (needs_config) cfg->required();
    sub->add_option("-s,--set", common.overrides, "Override, dotted.key=value (repeatable)");
    sub->add_option("-o,--out-dir", common.out_dir, "Output directory");
    sub->add_option("--seed", common.seed, "RNG seed (default: config value, 42)");
  };

  auto* run = app.add_subcommand("run", "Run one scenario; writes trace.csv and summary.json");
  add_common(run, true);

  GainsArgs gains;
  auto* g = app.add_subcommand("gains", "Scheduled admittance gains and stable loop period");
  g->add_option("--omega-n", gains.omega_n, "Target natural frequency [rad/s]");
  g->add_option("--eta", gains.eta, "Target damping ratio");
  g->add_option("--mass", gains.mass, "Virtual mass [kg]");
  g->add_option("--k-theta", gains.k_theta, "Pitch stiffness [N*m/rad]");
  g->add_option("--k-ee", gains.k_ee, "Contact stiffness [N/m] or 'inf'");
  g->add_option("--theta1", gains.theta1, "Pitch angle [rad]");
  g->add_option("--d2", gains.d2, "Boom extension [m]");
  g->add_flag("--json", gains.as_json, "Print JSON");
  g->add_option("-o,--out-dir", gains.out_dir, "Also write gains.json here");

  SweepArgs sweep;
  auto* sw = app.add_subcommand("sweep", "Run one scenario per value of a config key");
  add_common(sw, true);
  sw->add_option("-k,--key", sweep.key, "Dotted config key to sweep")->required();
  sw->add_option("-v,--values", sweep.values, "Comma-separated values")
      ->delimiter(',')
      ->required();
  sw->add_option("-j,--jobs", sweep.jobs, "Parallel runs (default: hardware threads)");

  bool list_only = false;
  std::string fault;
  std::string verify_out;
  auto* ver = app.add_subcommand("verify", "Run the invariant checks");
  ver->add_flag("--list", list_only, "List check names without running");
  ver->add_option("--inject-fault", fault, "Self-test: 'admittance-sign'");
  ver->add_option("-o,--out-dir", verify_out, "Also write verify.json here");

  std::vector<const char*> argv;
  for (const std::string& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*run) return cmd_run(common, out);
    if (*g) return cmd_gains(gains, out);
    if (*sw) return cmd_sweep(common, sweep, out, err);
    if (*ver) return cmd_verify(list_only, fault, verify_out, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace boomforce
