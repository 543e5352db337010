#include "sqz/io.hpp"

#include <yaml-cpp/yaml.h>

#include <chrono>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include "sqz/errors.hpp"

#ifndef SQZ_VERSION
#define SQZ_VERSION "0.0.0"
#endif

namespace sqz::io {

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, sep)) {
    const auto first = field.find_first_not_of(" \t\r");
    const auto last = field.find_last_not_of(" \t\r");
    out.push_back(first == std::string::npos ? "" : field.substr(first, last - first + 1));
  }
  return out;
}

template <class T>
T parse_field(const std::string& text, const char* column, std::size_t line_no) {
  std::istringstream in(text);
  T value{};
  in >> value;
  if (in.fail() || !in.eof()) {
    std::ostringstream msg;
    msg << "line " << line_no << ": cannot parse column '" << column << "' from '" << text
        << "'";
    throw ParseError(msg.str());
  }
  return value;
}

// Data rows of a table: comment and blank lines dropped, header checked.
std::vector<std::pair<std::size_t, std::vector<std::string>>> read_table(
    std::istream& in, const std::vector<std::string>& header, std::size_t min_columns) {
  std::vector<std::pair<std::size_t, std::vector<std::string>>> rows;
  std::string line;
  std::size_t line_no = 0;
  bool seen_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#' || line.find_first_not_of(" \t\r") == std::string::npos) {
      continue;
    }
    auto fields = split(line, ',');
    if (!seen_header) {
      if (fields.size() < min_columns ||
          !std::equal(fields.begin(), fields.begin() + static_cast<std::ptrdiff_t>(min_columns),
                      header.begin())) {
        std::ostringstream msg;
        msg << "line " << line_no << ": expected header starting with '" << header[0] << "'";
        throw ParseError(msg.str());
      }
      seen_header = true;
      continue;
    }
    if (fields.size() < min_columns || fields.size() > header.size()) {
      std::ostringstream msg;
      msg << "line " << line_no << ": expected " << min_columns << " to " << header.size()
          << " columns, got " << fields.size();
      throw ParseError(msg.str());
    }
    rows.emplace_back(line_no, std::move(fields));
  }
  if (!seen_header) {
    throw ParseError("table has no header line");
  }
  return rows;
}

double as_double(const YAML::Node& node, const std::string& key) {
  try {
    return node.as<double>();
  } catch (const YAML::Exception&) {
    throw ParseError("config key '" + key + "' must be a number");
  }
}

std::vector<double> as_doubles(const YAML::Node& node, const std::string& key) {
  if (!node.IsSequence()) {
    throw ParseError("config key '" + key + "' must be a list of numbers");
  }
  std::vector<double> out;
  for (const auto& item : node) {
    out.push_back(as_double(item, key));
  }
  return out;
}

void reject_unknown(const YAML::Node& map, const std::set<std::string>& allowed,
                    const std::string& where) {
  for (const auto& kv : map) {
    const auto key = kv.first.as<std::string>();
    if (!allowed.contains(key)) {
      throw ParseError("unknown key '" + key + "' in " + where);
    }
  }
}

StateSpec parse_state(const YAML::Node& node) {
  StateSpec spec;
  if (node.IsSequence()) {
    const auto pair = as_doubles(node, "state");
    if (pair.size() != 2) {
      throw ParseError("a state list entry must be [trace, det]");
    }
    spec.invariants = Invariants{pair[0], pair[1]};
    return spec;
  }
  if (!node.IsMap()) {
    throw ParseError("state must be a map {trace, det} or {g, h}");
  }
  reject_unknown(node, {"trace", "det", "g", "h"}, "state");
  const bool has_inv = node["trace"] || node["det"];
  const bool has_gain = node["g"] || node["h"];
  if (has_inv == has_gain) {
    throw ParseError("state needs exactly one of {trace, det} or {g, h}");
  }
  if (has_inv) {
    if (!node["trace"] || !node["det"]) {
      throw ParseError("state needs both trace and det");
    }
    spec.invariants = Invariants{as_double(node["trace"], "trace"), as_double(node["det"], "det")};
  } else {
    if (!node["g"] || !node["h"]) {
      throw ParseError("state needs both g and h");
    }
    spec.gains = SqueezerParams{as_double(node["g"], "g"), as_double(node["h"], "h")};
  }
  return spec;
}

}  // namespace

std::string version() { return SQZ_VERSION; }

RunManifest RunManifest::now(std::string command, std::string config_path, std::uint64_t seed,
                             std::string output_path) {
  RunManifest m;
  m.command = std::move(command);
  m.config_path = std::move(config_path);
  m.seed = seed;
  m.output_path = std::move(output_path);
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm utc{};
  gmtime_r(&t, &utc);
  std::ostringstream ts;
  ts << std::put_time(&utc, "%Y-%m-%dT%H:%M:%SZ");
  m.timestamp = ts.str();
  return m;
}

void write_manifest(std::ostream& out, const RunManifest& m) {
  out << "# command: " << m.command << '\n'
      << "# config: " << (m.config_path.empty() ? "-" : m.config_path) << '\n'
      << "# seed: " << m.seed << '\n'
      << "# output: " << (m.output_path.empty() ? "-" : m.output_path) << '\n'
      << "# version: " << m.tool_version << '\n'
      << "# timestamp: " << m.timestamp << '\n';
}

Invariants StateSpec::resolve() const {
  Invariants inv;
  if (invariants) {
    inv = *invariants;
  } else if (gains) {
    const CovarianceMatrix cov = cov_from_squeezer(*gains);
    inv = {cov.trace(), cov.det()};
  } else {
    throw ParseError("state is empty");
  }
  if (!check_physicality(inv.trace, inv.det)) {
    std::ostringstream msg;
    msg << "state (trace=" << inv.trace << ", det=" << inv.det
        << ") violates 1 <= det <= (trace/2)^2";
    throw UnphysicalError(msg.str());
  }
  return inv;
}

ToolConfig parse_config(const std::string& yaml_text) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml_text);
  } catch (const YAML::Exception& e) {
    throw ParseError(std::string("config is not valid YAML: ") + e.what());
  }
  ToolConfig cfg;
  if (root.IsNull()) {
    return cfg;
  }
  if (!root.IsMap()) {
    throw ParseError("config must be a key-value map");
  }
  reject_unknown(root,
                 {"rep_rate_hz", "duration_s", "transmittances", "eta_apd", "dark_rate_hz",
                  "t_uncertainty", "eta_rel_uncertainty", "state", "sweep"},
                 "config");
  ExperimentConfig& ex = cfg.experiment;
  if (root["rep_rate_hz"]) ex.rep_rate = as_double(root["rep_rate_hz"], "rep_rate_hz");
  if (root["duration_s"]) ex.duration = as_double(root["duration_s"], "duration_s");
  if (root["transmittances"]) ex.transmittances = as_doubles(root["transmittances"], "transmittances");
  if (root["eta_apd"]) ex.eta_apd = as_double(root["eta_apd"], "eta_apd");
  if (root["dark_rate_hz"]) ex.dark_rate = as_double(root["dark_rate_hz"], "dark_rate_hz");
  if (root["t_uncertainty"]) ex.t_uncertainty = as_double(root["t_uncertainty"], "t_uncertainty");
  if (root["eta_rel_uncertainty"]) {
    ex.eta_rel_uncertainty = as_double(root["eta_rel_uncertainty"], "eta_rel_uncertainty");
  }
  if (root["state"]) {
    cfg.state = parse_state(root["state"]);
  }
  if (const YAML::Node sweep = root["sweep"]) {
    if (!sweep.IsMap()) {
      throw ParseError("sweep must be a map");
    }
    reject_unknown(sweep, {"mode", "etas", "states", "with_uncertainties", "runs"}, "sweep");
    SweepSpec spec;
    if (sweep["mode"]) {
      const auto mode = sweep["mode"].as<std::string>();
      if (mode == "eta") {
        spec.mode = SweepMode::kEta;
      } else if (mode == "state") {
        spec.mode = SweepMode::kState;
      } else {
        throw ParseError("sweep mode must be 'eta' or 'state', got '" + mode + "'");
      }
    }
    if (sweep["etas"]) spec.etas = as_doubles(sweep["etas"], "sweep.etas");
    if (const YAML::Node states = sweep["states"]) {
      if (!states.IsSequence()) {
        throw ParseError("sweep.states must be a list");
      }
      for (const auto& s : states) {
        spec.states.push_back(parse_state(s));
      }
    }
    if (sweep["with_uncertainties"]) {
      try {
        spec.with_uncertainties = sweep["with_uncertainties"].as<bool>();
      } catch (const YAML::Exception&) {
        throw ParseError("sweep.with_uncertainties must be true or false");
      }
    }
    if (sweep["runs"]) {
      spec.runs = static_cast<int>(as_double(sweep["runs"], "sweep.runs"));
    }
    cfg.sweep = std::move(spec);
  }
  try {
    validate(cfg.experiment);
  } catch (const DomainError& e) {
    throw ParseError(e.what());
  }
  return cfg;
}

ToolConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ParseError("cannot open config file '" + path + "'");
  }
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

std::string format_number(double value) {
  std::ostringstream out;
  out << std::setprecision(kOutputDigits) << value;
  return out.str();
}

void write_click_records(std::ostream& out, const std::vector<ClickRecord>& records) {
  out << "t_nominal,trials,clicks,dark_subtracted\n";
  for (const ClickRecord& r : records) {
    out << format_number(r.t_nominal) << ',' << r.trials << ',' << r.clicks << ','
        << (r.dark_subtracted ? 1 : 0) << '\n';
  }
}

std::vector<ClickRecord> read_click_records(std::istream& in) {
  static const std::vector<std::string> header{"t_nominal", "trials", "clicks",
                                               "dark_subtracted"};
  std::vector<ClickRecord> records;
  for (const auto& [line_no, f] : read_table(in, header, header.size())) {
    ClickRecord r;
    r.t_nominal = parse_field<double>(f[0], "t_nominal", line_no);
    r.trials = parse_field<std::int64_t>(f[1], "trials", line_no);
    r.clicks = parse_field<std::int64_t>(f[2], "clicks", line_no);
    const int flag = parse_field<int>(f[3], "dark_subtracted", line_no);
    if (flag != 0 && flag != 1) {
      throw ParseError("line " + std::to_string(line_no) + ": dark_subtracted must be 0 or 1");
    }
    r.dark_subtracted = flag == 1;
    if (r.trials < 0 || r.clicks < 0 || r.clicks > r.trials || !(r.t_nominal >= 0.0) ||
        !(r.t_nominal <= 1.0)) {
      throw ParseError("line " + std::to_string(line_no) +
                       ": need 0 <= clicks <= trials and t_nominal in [0, 1]");
    }
    records.push_back(r);
  }
  return records;
}

void write_estimate(std::ostream& out, const Estimate& e) {
  const DerivedQuantities d = e.derived ? *e.derived : derive_quantities(e.trace, e.det);
  out << "trace,det,det_reliable,vmin,vmax,purity,g_bound,h_bound,log_likelihood_at_max\n"
      << format_number(e.trace) << ',' << format_number(e.det) << ','
      << (e.det_reliable ? 1 : 0) << ',' << format_number(d.variances.vmin) << ','
      << format_number(d.variances.vmax) << ',' << format_number(d.purity) << ','
      << format_number(d.gain_bounds.g_max) << ',' << format_number(d.gain_bounds.h_max) << ','
      << format_number(e.log_likelihood_at_max) << '\n';
}

void write_sweep(std::ostream& out, const std::vector<EnsembleResult>& results) {
  out << "eta,trace_true,det_true,sigma_det,sigma_trace,mean_det_est,mean_trace_est,"
         "fraction_det_reliable,n_runs\n";
  for (const EnsembleResult& r : results) {
    out << format_number(r.eta) << ',' << format_number(r.trace_true) << ','
        << format_number(r.det_true) << ',' << format_number(r.sigma_det) << ','
        << format_number(r.sigma_trace) << ',' << format_number(r.mean_det_est) << ','
        << format_number(r.mean_trace_est) << ',' << format_number(r.fraction_det_reliable)
        << ',' << r.n_runs << '\n';
  }
}

void write_sweep_runs(std::ostream& out, const std::vector<EnsembleResult>& results) {
  out << "group,run,seed,eta_assumed,trace_est,det_est,det_reliable,t_true\n";
  for (std::size_t g = 0; g < results.size(); ++g) {
    const auto& runs = results[g].runs;
    for (std::size_t i = 0; i < runs.size(); ++i) {
      const RunRecord& r = runs[i];
      out << g << ',' << i << ',' << r.seed << ',' << format_number(r.eta_assumed) << ','
          << format_number(r.estimate.trace) << ',' << format_number(r.estimate.det) << ','
          << (r.estimate.det_reliable ? 1 : 0) << ',';
      for (std::size_t k = 0; k < r.true_transmittances.size(); ++k) {
        out << (k ? ";" : "") << format_number(r.true_transmittances[k]);
      }
      out << '\n';
    }
  }
}

void write_mode_samples(std::ostream& out, const std::vector<NoClickSample>& samples) {
  out << "eff_t,p,trials\n";
  for (const NoClickSample& s : samples) {
    out << format_number(s.eff_t) << ',' << format_number(s.p) << ',' << s.trials << '\n';
  }
}

std::vector<NoClickSample> read_mode_samples(std::istream& in) {
  static const std::vector<std::string> header{"eff_t", "p", "trials"};
  std::vector<NoClickSample> samples;
  for (const auto& [line_no, f] : read_table(in, header, 2)) {
    NoClickSample s;
    s.eff_t = parse_field<double>(f[0], "eff_t", line_no);
    s.p = parse_field<double>(f[1], "p", line_no);
    if (f.size() > 2 && !f[2].empty()) {
      s.trials = parse_field<std::int64_t>(f[2], "trials", line_no);
    }
    samples.push_back(s);
  }
  return samples;
}

}  // namespace sqz::io
