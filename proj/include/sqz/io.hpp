#pragma once

// Text formats shared by the command-line tool: YAML run configs and
// comma-separated tables with a commented manifest block.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "sqz/ensemble.hpp"
#include "sqz/estimators.hpp"
#include "sqz/forward_sim.hpp"

namespace sqz::io {

// Significant digits of every number written by this module.
inline constexpr int kOutputDigits = 12;

std::string version();

struct RunManifest {
  std::string command;
  std::string config_path;
  std::uint64_t seed = 0;
  std::string output_path;
  std::string tool_version = version();
  std::string timestamp;  // ISO 8601, UTC

  static RunManifest now(std::string command, std::string config_path, std::uint64_t seed,
                         std::string output_path);
};

// "# key: value" lines; readers skip every line starting with '#'.
void write_manifest(std::ostream& out, const RunManifest& manifest);

// A state given either by its invariants or by squeezer gains.
struct StateSpec {
  std::optional<Invariants> invariants;
  std::optional<SqueezerParams> gains;

  // Invariants, converting from gains when needed. Throws UnphysicalError.
  [[nodiscard]] Invariants resolve() const;
};

enum class SweepMode { kEta, kState };

struct SweepSpec {
  SweepMode mode = SweepMode::kEta;
  std::vector<double> etas;
  std::vector<StateSpec> states;
  bool with_uncertainties = false;
  std::optional<int> runs;
};

struct ToolConfig {
  ExperimentConfig experiment;
  std::optional<StateSpec> state;
  std::optional<SweepSpec> sweep;
};

// Keys: rep_rate_hz, duration_s, transmittances, eta_apd, dark_rate_hz,
// t_uncertainty, eta_rel_uncertainty, state {trace, det | g, h},
// sweep {mode, etas, states, with_uncertainties, runs}. Unknown keys are
// rejected. Throws ParseError.
[[nodiscard]] ToolConfig parse_config(const std::string& yaml_text);
[[nodiscard]] ToolConfig load_config(const std::string& path);

[[nodiscard]] std::string format_number(double value);

void write_click_records(std::ostream& out, const std::vector<ClickRecord>& records);
[[nodiscard]] std::vector<ClickRecord> read_click_records(std::istream& in);

void write_estimate(std::ostream& out, const Estimate& estimate);

void write_sweep(std::ostream& out, const std::vector<EnsembleResult>& results);
// One row per run: group, run, seed, eta_assumed, trace_est, det_est,
// det_reliable, t_true (semicolon separated).
void write_sweep_runs(std::ostream& out, const std::vector<EnsembleResult>& results);

void write_mode_samples(std::ostream& out, const std::vector<NoClickSample>& samples);
// Columns eff_t,p with an optional third column trials.
[[nodiscard]] std::vector<NoClickSample> read_mode_samples(std::istream& in);

}  // namespace sqz::io
