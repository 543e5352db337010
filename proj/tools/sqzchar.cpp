// sqzchar: photon-counting characterisation of single-mode squeezed vacuum.
//
// Exit codes:
//   0  success
//   2  parse error (arguments, config or data file)
//   3  domain error (argument out of range, unphysical state)
//   4  estimation failure (insufficient or degenerate data)

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

#include "sqz/ensemble.hpp"
#include "sqz/errors.hpp"
#include "sqz/estimators.hpp"
#include "sqz/forward_sim.hpp"
#include "sqz/io.hpp"

namespace {

constexpr int kExitParse = 2;
constexpr int kExitDomain = 3;
constexpr int kExitEstimation = 4;

constexpr const char* kExitCodeHelp =
    "Exit codes: 0 success, 2 parse error, 3 domain/unphysical error, "
    "4 estimation failure.";

using sqz::io::format_number;

// Output stream that is either a file or stdout.
class Sink {
 public:
  explicit Sink(const std::string& path) {
    if (!path.empty() && path != "-") {
      file_ = std::make_unique<std::ofstream>(path);
      if (!*file_) {
        throw sqz::ParseError("cannot open output file '" + path + "'");
      }
    }
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw sqz::ParseError("cannot open input file '" + path + "'");
  }
  return in;
}

void echo_state(std::ostream& out, const sqz::Invariants& inv) {
  const sqz::SqueezerParams gains = sqz::squeezer_from_invariants(inv.trace, inv.det);
  out << "# state: trace=" << format_number(inv.trace) << " det=" << format_number(inv.det)
      << " g=" << format_number(gains.g) << " h=" << format_number(gains.h) << '\n';
}

struct InvertArgs {
  double t1 = 0.0, p1 = 1.0, t2 = 0.0, p2 = 1.0, eta = 1.0;
};

int cmd_invert(const InvertArgs& a) {
  const sqz::Invariants inv = sqz::invert_two_point(a.eta * a.t1, a.p1, a.eta * a.t2, a.p2);
  const bool physical = sqz::check_physicality(inv.trace, inv.det);
  // Raw values even when unphysical; nan where the formula has no real value.
  const double disc = inv.trace * inv.trace - 4.0 * inv.det;
  const double root = disc >= 0.0 ? std::sqrt(disc) : std::nan("");
  const double purity = inv.det > 0.0 ? 1.0 / std::sqrt(inv.det) : std::nan("");
  std::cout << "trace,det,vmin,vmax,purity,physical\n"
            << format_number(inv.trace) << ',' << format_number(inv.det) << ','
            << format_number(0.5 * (inv.trace - root)) << ','
            << format_number(0.5 * (inv.trace + root)) << ',' << format_number(purity) << ','
            << (physical ? 1 : 0) << '\n';
  if (!physical) {
    std::cerr << "warning: unphysical result, violates 1 <= det <= (trace/2)^2\n";
  }
  return 0;
}

struct StateArgs {
  std::optional<double> trace, det, g, h;
};

sqz::Invariants resolve_state(const StateArgs& args, const sqz::io::ToolConfig& cfg) {
  sqz::io::StateSpec spec;
  if (args.trace || args.det) {
    if (!args.trace || !args.det) {
      throw sqz::ParseError("--trace and --det must be given together");
    }
    spec.invariants = sqz::Invariants{*args.trace, *args.det};
  } else if (args.g || args.h) {
    if (!args.g || !args.h) {
      throw sqz::ParseError("--g and --h must be given together");
    }
    spec.gains = sqz::SqueezerParams{*args.g, *args.h};
  } else if (cfg.state) {
    spec = *cfg.state;
  } else {
    throw sqz::ParseError("no state given: use --trace/--det, --g/--h or a config 'state'");
  }
  return spec.resolve();
}

sqz::io::ToolConfig load_or_default(const std::string& path) {
  return path.empty() ? sqz::io::ToolConfig{} : sqz::io::load_config(path);
}

struct SimulateArgs {
  std::string config, output;
  std::uint64_t seed = 1;
  StateArgs state;
  bool subtract_dark = false;
};

int cmd_simulate(const SimulateArgs& a) {
  const sqz::io::ToolConfig cfg = load_or_default(a.config);
  const sqz::Invariants inv = resolve_state(a.state, cfg);
  std::vector<sqz::ClickRecord> records =
      sqz::simulate_run(inv.trace, inv.det, cfg.experiment, a.seed);
  if (a.subtract_dark) {
    for (auto& r : records) {
      r = sqz::subtract_dark(r, cfg.experiment.dark_rate, cfg.experiment.duration);
    }
  }
  Sink sink(a.output);
  std::ostream& out = sink.stream();
  sqz::io::write_manifest(out, sqz::io::RunManifest::now("simulate", a.config, a.seed, a.output));
  echo_state(out, inv);
  out << "# eta_apd: " << format_number(cfg.experiment.eta_apd) << '\n';
  sqz::io::write_click_records(out, records);
  return 0;
}

struct EstimateArgs {
  std::string input, output;
  double eta = 0.0;
  double dark_rate = 0.0;
  double duration = 0.0;
};

int cmd_estimate(const EstimateArgs& a) {
  std::ifstream in = open_input(a.input);
  std::vector<sqz::ClickRecord> records = sqz::io::read_click_records(in);
  if (a.dark_rate > 0.0) {
    for (auto& r : records) {
      if (!r.dark_subtracted) {
        r = sqz::subtract_dark(r, a.dark_rate, a.duration);
      }
    }
  }
  const sqz::Estimate est = sqz::ml_estimate(records, a.eta);
  Sink sink(a.output);
  std::ostream& out = sink.stream();
  sqz::io::write_manifest(out, sqz::io::RunManifest::now("estimate", "", 0, a.output));
  out << "# input: " << a.input << '\n' << "# eta_assumed: " << format_number(a.eta) << '\n';
  if (!est.det_reliable) {
    const sqz::GainBounds b = sqz::gain_bounds_from_trace(est.trace);
    out << "# det unreliable (likelihood flat in det); bounds from the trace only: 1 <= det <= "
        << format_number(0.25 * est.trace * est.trace) << ", 1 <= G <= "
        << format_number(b.g_max) << ", 1 <= H <= " << format_number(b.h_max) << '\n';
  }
  sqz::io::write_estimate(out, est);
  return 0;
}

struct SweepArgs {
  std::string config, output, runs_output, mode;
  std::uint64_t seed = 1;
  std::optional<int> runs;
  bool full_scale = false;
  unsigned threads = 0;
};

int cmd_sweep(const SweepArgs& a) {
  const sqz::io::ToolConfig cfg = load_or_default(a.config);
  sqz::io::SweepSpec spec = cfg.sweep.value_or(sqz::io::SweepSpec{});
  if (a.mode == "eta") {
    spec.mode = sqz::io::SweepMode::kEta;
  } else if (a.mode == "state") {
    spec.mode = sqz::io::SweepMode::kState;
  }
  int runs = spec.runs.value_or(sqz::kDefaultRuns);
  if (a.full_scale) {
    runs = sqz::kFullScaleRuns;
  }
  if (a.runs) {
    runs = *a.runs;
  }
  sqz::EnsembleOptions options;
  options.threads = a.threads;

  std::vector<sqz::EnsembleResult> results;
  if (spec.mode == sqz::io::SweepMode::kEta) {
    if (spec.etas.empty()) {
      spec.etas = {0.01, 0.05, 0.15, 0.3, 0.5, 0.8};
    }
    const sqz::Invariants inv =
        cfg.state ? cfg.state->resolve() : sqz::Invariants{2.321, 1.156};
    results = sqz::eta_sweep(inv.trace, inv.det, cfg.experiment, spec.etas, runs,
                             spec.with_uncertainties, a.seed, options);
  } else {
    if (spec.states.empty()) {
      throw sqz::ParseError("state sweep needs sweep.states in the config");
    }
    std::vector<sqz::Invariants> states;
    for (const auto& s : spec.states) {
      states.push_back(s.resolve());
    }
    results = sqz::state_sweep(states, cfg.experiment, runs, a.seed, options);
  }

  Sink sink(a.output);
  std::ostream& out = sink.stream();
  sqz::io::write_manifest(out, sqz::io::RunManifest::now("sweep", a.config, a.seed, a.output));
  out << "# mode: " << (spec.mode == sqz::io::SweepMode::kEta ? "eta" : "state")
      << "\n# runs: " << runs << '\n';
  sqz::io::write_sweep(out, results);

  std::string runs_path = a.runs_output;
  if (runs_path.empty() && !a.output.empty() && a.output != "-") {
    runs_path = a.output + ".runs.csv";
  }
  if (!runs_path.empty()) {
    Sink runs_sink(runs_path);
    sqz::io::write_manifest(runs_sink.stream(),
                            sqz::io::RunManifest::now("sweep", a.config, a.seed, runs_path));
    sqz::io::write_sweep_runs(runs_sink.stream(), results);
  }
  return 0;
}

struct ModefitArgs {
  std::string input;
  int max_modes = 3;
};

int cmd_modefit(const ModefitArgs& a) {
  std::ifstream in = open_input(a.input);
  const auto samples = sqz::io::read_mode_samples(in);
  const sqz::ModeFitReport report = sqz::fit_mode_polynomials(samples, a.max_modes);
  std::cout << "modes,degree,chi2_per_dof,max_abs_residual\n";
  for (std::size_t n = 0; n < report.chi2_per_dof.size(); ++n) {
    std::cout << n << ',' << 2 * n << ',' << format_number(report.chi2_per_dof[n]) << ','
              << format_number(report.max_abs_residual[n]) << '\n';
  }
  if (!report.modes) {
    std::cerr << "error: no polynomial of degree <= " << 2 * a.max_modes
              << " fits the samples\n";
    return kExitEstimation;
  }
  if (report.no_signal()) {
    std::cout << "# result: no signal (P = 1 at every transmittance), N = 0\n";
  } else {
    std::cout << "# result: N = " << *report.modes << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Photon-counting characterisation of single-mode squeezed vacuum"};
  app.footer(kExitCodeHelp);
  app.require_subcommand(1);
  app.set_version_flag("--version", sqz::io::version());

  InvertArgs inv;
  auto* invert = app.add_subcommand("invert", "Closed-form (trace, det) from two no-click probabilities");
  invert->add_option("--t1", inv.t1, "First transmittance")->required();
  invert->add_option("--p1", inv.p1, "No-click probability at t1")->required();
  invert->add_option("--t2", inv.t2, "Second transmittance")->required();
  invert->add_option("--p2", inv.p2, "No-click probability at t2")->required();
  invert->add_option("--eta", inv.eta, "Detection efficiency folded into both transmittances")
      ->capture_default_str();

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Simulate click records for one run");
  simulate->set_help_flag("--help", "Print this help message and exit");  // -h would clash with --h
  simulate->add_option("--config", sim.config, "YAML experiment config");
  simulate->add_option("--seed", sim.seed, "Random seed")->capture_default_str();
  simulate->add_option("--output", sim.output, "Output file (default stdout)");
  simulate->add_option("--trace", sim.state.trace, "State trace");
  simulate->add_option("--det", sim.state.det, "State determinant");
  simulate->add_option("--g", sim.state.g, "Phase-sensitive gain G");
  simulate->add_option("--h", sim.state.h, "Phase-insensitive gain H");
  simulate->add_flag("--subtract-dark", sim.subtract_dark, "Subtract expected dark counts");

  EstimateArgs est;
  auto* estimate = app.add_subcommand("estimate", "Maximum-likelihood (trace, det) from click records");
  estimate->add_option("input", est.input, "Click-record file")->required();
  estimate->add_option("--eta", est.eta, "Assumed detection efficiency")->required();
  estimate->add_option("--output", est.output, "Output file (default stdout)");
  estimate->add_option("--dark-rate", est.dark_rate, "Dark count rate to subtract (1/s)");
  estimate->add_option("--duration", est.duration, "Duration per setting (s), for --dark-rate");

  SweepArgs sw;
  auto* sweep = app.add_subcommand("sweep", "Monte Carlo error analysis over eta or states");
  sweep->add_option("--config", sw.config, "YAML config with a 'sweep' section");
  sweep->add_option("--mode", sw.mode, "eta or state (overrides config)")
      ->check(CLI::IsMember({"eta", "state"}));
  sweep->add_option("--seed", sw.seed, "Master seed")->capture_default_str();
  sweep->add_option("--runs", sw.runs, "Runs per ensemble (default 200)");
  sweep->add_flag("--full-scale", sw.full_scale, "Use 1000 runs per ensemble");
  sweep->add_option("--output", sw.output, "Output file (default stdout)");
  sweep->add_option("--runs-output", sw.runs_output,
                    "Per-run artefacts file (default <output>.runs.csv)");
  sweep->add_option("--threads", sw.threads, "Worker threads (0 = hardware)");

  ModefitArgs mf;
  auto* modefit = app.add_subcommand("modefit", "Number of detected modes from P(eff_t)");
  modefit->add_option("input", mf.input, "Samples file with columns eff_t,p[,trials]")->required();
  modefit->add_option("--max-modes", mf.max_modes, "Largest mode count tried")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitParse;
  }

  try {
    if (*invert) return cmd_invert(inv);
    if (*simulate) return cmd_simulate(sim);
    if (*estimate) return cmd_estimate(est);
    if (*sweep) return cmd_sweep(sw);
    if (*modefit) return cmd_modefit(mf);
  } catch (const sqz::ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return kExitParse;
  } catch (const sqz::DomainError& e) {
    std::cerr << "domain error: " << e.what() << '\n';
    return kExitDomain;
  } catch (const sqz::UnphysicalError& e) {
    std::cerr << "unphysical: " << e.what() << '\n';
    return kExitDomain;
  } catch (const sqz::EstimationError& e) {
    std::cerr << "estimation failed: " << e.what() << '\n';
    return kExitEstimation;
  }
  return 0;
}
