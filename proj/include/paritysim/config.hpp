#pragma once
// Experiment configuration: a single JSON key-tree with snake_case keys and
// unit suffixes.  Absent keys take the published device defaults; unknown
// keys are rejected so typos cannot silently change an experiment.

#include "paritysim/device.hpp"
#include "paritysim/schedule.hpp"

#include <json.hpp>

#include <cstdint>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace paritysim {

struct ExperimentConfig {
  DeviceParams device{};
  Timing timing{};
  std::string experiment = "custom";
  int rounds = 0;            // 0 = preset default
  Mode mode = Mode::Feedback;
  bool mode_overridden = false;  // presets fix the mode unless explicitly set
  std::int64_t shots = 0;    // 0 = exact expectation values
  std::uint64_t seed = 1;
  bool noiseless = false;
  Target target = Target::PhiPlus;
  std::string sequence;      // custom experiments: zz_only | alternating | "ZZ,XX,..."
  std::string initial_state = "plus_plus";
  bool emit_pauli_sets = false;
  std::string out;           // output path; empty = stdout
  std::string format = "csv";

  void validate() const {
    static const std::set<std::string> known_experiments = {
        "fig3a", "fig3bc", "fig3d", "fig3e", "fig4_zz",
        "fig4_alt", "fig9_zz", "fig9_alt", "custom"};
    if (!known_experiments.count(experiment))
      throw std::invalid_argument("config: unknown experiment '" + experiment + "'");
    if (rounds < 0) throw std::invalid_argument("config: rounds must be >= 0");
    if (shots < 0) throw std::invalid_argument("config: shots must be >= 0");
    if (format != "csv" && format != "json")
      throw std::invalid_argument("config: format must be 'csv' or 'json'");
    device.validate();
    timing.validate();
  }
};

namespace cfg_detail {

using nlohmann::json;

inline void check_keys(const json& j, const std::set<std::string>& allowed,
                       const std::string& where) {
  if (!j.is_object())
    throw std::invalid_argument("config: " + where + " must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (!allowed.count(key))
      throw std::invalid_argument("config: unknown key '" + where + key + "'");
  }
}

inline double get_num(const json& j, const char* key, double fallback, const std::string& where) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number())
    throw std::invalid_argument("config: " + where + key + " must be a number");
  return j.at(key).get<double>();
}

inline bool get_bool(const json& j, const char* key, bool fallback, const std::string& where) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_boolean())
    throw std::invalid_argument("config: " + where + key + " must be a boolean");
  return j.at(key).get<bool>();
}

inline std::string get_str(const json& j, const char* key, const std::string& fallback,
                           const std::string& where) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_string())
    throw std::invalid_argument("config: " + where + key + " must be a string");
  return j.at(key).get<std::string>();
}

inline QubitParams parse_qubit(const json& j, QubitParams base, const std::string& where) {
  check_keys(j, {"t1_us", "t2_echo_us", "t2_ramsey_us", "assignment_prob"}, where);
  base.t1_us = get_num(j, "t1_us", base.t1_us, where);
  base.t2_echo_us = get_num(j, "t2_echo_us", base.t2_echo_us, where);
  base.t2_ramsey_us = get_num(j, "t2_ramsey_us", base.t2_ramsey_us, where);
  base.assignment_prob = get_num(j, "assignment_prob", base.assignment_prob, where);
  return base;
}

inline DeviceParams parse_device(const json& j, DeviceParams base) {
  const std::string where = "device.";
  check_keys(j,
             {"d1", "a", "d2", "t2_source", "j_d1a_khz", "j_ad2_khz", "readout", "stark_d1_deg",
              "stark_d2_deg", "stark_compensation", "stark_overcorrection_deg",
              "cross_dephasing_prob"},
             where);
  if (j.contains("d1")) base.d1 = parse_qubit(j.at("d1"), base.d1, where + "d1.");
  if (j.contains("a")) base.a = parse_qubit(j.at("a"), base.a, where + "a.");
  if (j.contains("d2")) base.d2 = parse_qubit(j.at("d2"), base.d2, where + "d2.");
  const std::string t2src = get_str(j, "t2_source", "echo", where);
  if (t2src == "echo")
    base.t2_source = T2Source::Echo;
  else if (t2src == "ramsey")
    base.t2_source = T2Source::Ramsey;
  else
    throw std::invalid_argument("config: device.t2_source must be 'echo' or 'ramsey'");
  base.j_d1a_khz = get_num(j, "j_d1a_khz", base.j_d1a_khz, where);
  base.j_ad2_khz = get_num(j, "j_ad2_khz", base.j_ad2_khz, where);
  if (j.contains("readout")) {
    const json& r = j.at("readout");
    const std::string rw = where + "readout.";
    check_keys(r, {"p0_given_0", "p1_given_0", "p0_given_1", "p1_given_1"}, rw);
    base.readout.p0_given_0 = get_num(r, "p0_given_0", base.readout.p0_given_0, rw);
    base.readout.p1_given_0 = get_num(r, "p1_given_0", base.readout.p1_given_0, rw);
    base.readout.p0_given_1 = get_num(r, "p0_given_1", base.readout.p0_given_1, rw);
    base.readout.p1_given_1 = get_num(r, "p1_given_1", base.readout.p1_given_1, rw);
  }
  base.stark_d1_deg = get_num(j, "stark_d1_deg", base.stark_d1_deg, where);
  base.stark_d2_deg = get_num(j, "stark_d2_deg", base.stark_d2_deg, where);
  base.stark_compensation = get_bool(j, "stark_compensation", base.stark_compensation, where);
  base.stark_overcorrection_deg =
      get_num(j, "stark_overcorrection_deg", base.stark_overcorrection_deg, where);
  base.cross_dephasing_prob =
      get_num(j, "cross_dephasing_prob", base.cross_dephasing_prob, where);
  return base;
}

inline Timing parse_timing(const json& j, Timing base) {
  const std::string where = "timing.";
  check_keys(j,
             {"single_qubit_gate_ns", "flux_pulse_d1a_ns", "flux_pulse_ad2_ns", "buffer_ns",
              "readout_pulse_ns", "readout_integration_ns", "electronic_delay_ns", "cpmg_count",
              "cpmg_instantaneous"},
             where);
  base.single_qubit_gate_ns = get_num(j, "single_qubit_gate_ns", base.single_qubit_gate_ns, where);
  base.flux_pulse_d1a_ns = get_num(j, "flux_pulse_d1a_ns", base.flux_pulse_d1a_ns, where);
  base.flux_pulse_ad2_ns = get_num(j, "flux_pulse_ad2_ns", base.flux_pulse_ad2_ns, where);
  base.buffer_ns = get_num(j, "buffer_ns", base.buffer_ns, where);
  base.readout_pulse_ns = get_num(j, "readout_pulse_ns", base.readout_pulse_ns, where);
  base.readout_integration_ns =
      get_num(j, "readout_integration_ns", base.readout_integration_ns, where);
  base.electronic_delay_ns = get_num(j, "electronic_delay_ns", base.electronic_delay_ns, where);
  const double count = get_num(j, "cpmg_count", base.cpmg_count, where);
  if (count != static_cast<int>(count))
    throw std::invalid_argument("config: timing.cpmg_count must be an integer");
  base.cpmg_count = static_cast<int>(count);
  base.cpmg_instantaneous = get_bool(j, "cpmg_instantaneous", base.cpmg_instantaneous, where);
  return base;
}

}  // namespace cfg_detail

inline ExperimentConfig config_from_json(const nlohmann::json& j) {
  using namespace cfg_detail;
  ExperimentConfig cfg;
  check_keys(j,
             {"device", "timing", "experiment", "rounds", "mode", "shots", "seed", "noiseless",
              "target", "sequence", "initial_state", "emit_pauli_sets", "out", "format"},
             "");
  if (j.contains("device")) cfg.device = parse_device(j.at("device"), cfg.device);
  if (j.contains("timing")) cfg.timing = parse_timing(j.at("timing"), cfg.timing);
  cfg.experiment = get_str(j, "experiment", cfg.experiment, "");
  const double rounds = get_num(j, "rounds", cfg.rounds, "");
  if (rounds != static_cast<int>(rounds) || rounds < 0)
    throw std::invalid_argument("config: rounds must be a non-negative integer");
  cfg.rounds = static_cast<int>(rounds);
  if (j.contains("mode")) {
    cfg.mode = parse_mode(get_str(j, "mode", "feedback", ""));
    cfg.mode_overridden = true;
  }
  const double shots = get_num(j, "shots", static_cast<double>(cfg.shots), "");
  if (shots != static_cast<std::int64_t>(shots) || shots < 0)
    throw std::invalid_argument("config: shots must be a non-negative integer");
  cfg.shots = static_cast<std::int64_t>(shots);
  const double seed = get_num(j, "seed", static_cast<double>(cfg.seed), "");
  if (seed < 0 || seed != static_cast<std::uint64_t>(seed))
    throw std::invalid_argument("config: seed must be a non-negative integer");
  cfg.seed = static_cast<std::uint64_t>(seed);
  cfg.noiseless = get_bool(j, "noiseless", cfg.noiseless, "");
  cfg.target = parse_target(get_str(j, "target", to_string(cfg.target), ""));
  cfg.sequence = get_str(j, "sequence", cfg.sequence, "");
  cfg.initial_state = get_str(j, "initial_state", cfg.initial_state, "");
  cfg.emit_pauli_sets = get_bool(j, "emit_pauli_sets", cfg.emit_pauli_sets, "");
  cfg.out = get_str(j, "out", cfg.out, "");
  cfg.format = get_str(j, "format", cfg.format, "");
  cfg.validate();
  return cfg;
}

// Load a config file; an empty (or whitespace-only) file yields the defaults.
inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("config: cannot open file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();
  if (text.find_first_not_of(" \t\r\n") == std::string::npos) {
    ExperimentConfig cfg;
    cfg.validate();
    return cfg;
  }
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument("config: " + path + " is not valid JSON: " + e.what());
  }
  return config_from_json(j);
}

// Normalized echo of a config (used in JSON result emission).
inline nlohmann::json config_to_json(const ExperimentConfig& c) {
  nlohmann::json j;
  auto qubit = [](const QubitParams& q) {
    return nlohmann::json{{"t1_us", q.t1_us},
                          {"t2_echo_us", q.t2_echo_us},
                          {"t2_ramsey_us", q.t2_ramsey_us},
                          {"assignment_prob", q.assignment_prob}};
  };
  j["device"] = {
      {"d1", qubit(c.device.d1)},
      {"a", qubit(c.device.a)},
      {"d2", qubit(c.device.d2)},
      {"t2_source", c.device.t2_source == T2Source::Echo ? "echo" : "ramsey"},
      {"j_d1a_khz", c.device.j_d1a_khz},
      {"j_ad2_khz", c.device.j_ad2_khz},
      {"readout",
       {{"p0_given_0", c.device.readout.p0_given_0},
        {"p1_given_0", c.device.readout.p1_given_0},
        {"p0_given_1", c.device.readout.p0_given_1},
        {"p1_given_1", c.device.readout.p1_given_1}}},
      {"stark_d1_deg", c.device.stark_d1_deg},
      {"stark_d2_deg", c.device.stark_d2_deg},
      {"stark_compensation", c.device.stark_compensation},
      {"stark_overcorrection_deg", c.device.stark_overcorrection_deg},
      {"cross_dephasing_prob", c.device.cross_dephasing_prob}};
  j["timing"] = {{"single_qubit_gate_ns", c.timing.single_qubit_gate_ns},
                 {"flux_pulse_d1a_ns", c.timing.flux_pulse_d1a_ns},
                 {"flux_pulse_ad2_ns", c.timing.flux_pulse_ad2_ns},
                 {"buffer_ns", c.timing.buffer_ns},
                 {"readout_pulse_ns", c.timing.readout_pulse_ns},
                 {"readout_integration_ns", c.timing.readout_integration_ns},
                 {"electronic_delay_ns", c.timing.electronic_delay_ns},
                 {"cpmg_count", c.timing.cpmg_count},
                 {"cpmg_instantaneous", c.timing.cpmg_instantaneous}};
  j["experiment"] = c.experiment;
  j["rounds"] = c.rounds;
  j["mode"] = to_string(c.mode);
  j["shots"] = c.shots;
  j["seed"] = c.seed;
  j["noiseless"] = c.noiseless;
  j["target"] = to_string(c.target);
  j["sequence"] = c.sequence;
  j["initial_state"] = c.initial_state;
  j["emit_pauli_sets"] = c.emit_pauli_sets;
  j["format"] = c.format;
  return j;
}

}  // namespace paritysim
