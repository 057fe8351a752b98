#pragma once
// Experiment execution: resolves figure-named presets into schedules, runs
// the protocol (exact expectation values, or finite-shot tomography when
// shots > 0), and emits CSV/JSON result tables.

#include "paritysim/config.hpp"
#include "paritysim/oracle.hpp"
#include "paritysim/protocol.hpp"
#include "paritysim/tomography.hpp"

#include <json.hpp>

#include <cstdio>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace paritysim {

// Fig. 3(a)-style characterization of the register state at the first
// measurement point, compared against the ideal parity-mapped state.
struct StatePanel {
  double fidelity_vs_ideal = 0.0;
  double p_plus = 0.0;
  double ancilla_excited = 0.0;
  PauliSet sim;    // three-qubit Pauli set of the simulated state
  PauliSet ideal;  // same for the noise-free reference state
};

// Fig. 3(b)-(c)-style data-qubit states conditioned on the ancilla outcome.
struct ConditionedPanel {
  double p_even = 0.0, p_odd = 0.0;
  double fidelity_even = 0.0;  // vs |Phi+>
  double fidelity_odd = 0.0;   // vs |Psi+>
  PauliSet even, odd;
};

struct ExperimentOutput {
  ExperimentConfig config;
  std::vector<RoundResult> rows;
  std::optional<StatePanel> premeasure;
  std::optional<ConditionedPanel> conditioned;
  std::optional<PauliSet> final_pauli;  // data-qubit Pauli set after the last round
};

// ---------------------------------------------------------------------------
// Preset resolution
// ---------------------------------------------------------------------------

enum class Analysis { Rows, Premeasure, Conditioned };

struct ResolvedExperiment {
  ScheduleSpec spec;
  Analysis analysis = Analysis::Rows;
};

inline ResolvedExperiment resolve_experiment(const ExperimentConfig& cfg) {
  ResolvedExperiment r;
  r.spec.target = cfg.target;
  r.spec.initial_state = cfg.initial_state;

  struct Preset {
    const char* seq_kind;
    int rounds;
    Mode mode;
    bool rounds_adjustable;
  };
  auto apply_preset = [&](const Preset& p) {
    int rounds = p.rounds;
    if (cfg.rounds > 0) {
      if (!p.rounds_adjustable && cfg.rounds != p.rounds)
        throw std::invalid_argument("config: experiment '" + cfg.experiment +
                                    "' has a fixed round structure");
      rounds = cfg.rounds;
    }
    r.spec.sequence = make_sequence(p.seq_kind, rounds);
    r.spec.mode = cfg.mode_overridden ? cfg.mode : p.mode;
  };

  if (cfg.experiment == "fig3a") {
    apply_preset({"zz_only", 1, Mode::Feedback, false});
    r.analysis = Analysis::Premeasure;
  } else if (cfg.experiment == "fig3bc") {
    apply_preset({"zz_only", 1, Mode::Feedback, false});
    r.analysis = Analysis::Conditioned;
  } else if (cfg.experiment == "fig3d") {
    apply_preset({"zz_only", 1, Mode::Feedback, false});
  } else if (cfg.experiment == "fig3e") {
    apply_preset({"alternating", 2, Mode::Feedback, false});
  } else if (cfg.experiment == "fig4_zz") {
    apply_preset({"zz_only", 12, Mode::Feedback, true});
  } else if (cfg.experiment == "fig4_alt") {
    apply_preset({"alternating", 12, Mode::Feedback, true});
  } else if (cfg.experiment == "fig9_zz") {
    apply_preset({"zz_only", 12, Mode::Pfu, true});
  } else if (cfg.experiment == "fig9_alt") {
    apply_preset({"alternating", 12, Mode::Pfu, true});
  } else if (cfg.experiment == "custom") {
    if (cfg.sequence.empty())
      throw std::invalid_argument("config: custom experiment needs a 'sequence'");
    r.spec.mode = cfg.mode;
    if (cfg.sequence == "zz_only" || cfg.sequence == "alternating") {
      r.spec.sequence = make_sequence(cfg.sequence, cfg.rounds > 0 ? cfg.rounds : 1);
    } else {
      // Explicit comma-separated round list, e.g. "ZZ,XX,ZZ".
      std::stringstream ss(cfg.sequence);
      std::string token;
      while (std::getline(ss, token, ',')) r.spec.sequence.push_back(parse_basis(token));
      if (r.spec.sequence.empty())
        throw std::invalid_argument("config: custom sequence is empty");
      if (cfg.rounds > 0 && cfg.rounds != static_cast<int>(r.spec.sequence.size()))
        throw std::invalid_argument("config: rounds does not match the explicit sequence length");
    }
  } else {
    throw std::invalid_argument("config: unknown experiment '" + cfg.experiment + "'");
  }
  return r;
}

inline DeviceModel build_model(const ExperimentConfig& cfg) {
  return cfg.noiseless ? DeviceModel::ideal()
                       : DeviceModel::from_params(cfg.device, cfg.timing.readout_pulse_ns);
}

// ---------------------------------------------------------------------------
// Execution
// ---------------------------------------------------------------------------

namespace run_detail {

// Recompute a round row's metrics from a finite-shot MLE reconstruction.
inline void resample_row(RoundResult& row, const Eigen::MatrixXd& assignment, std::int64_t shots,
                         Target target, std::mt19937_64& rng) {
  row.data_state = tomograph(row.data_state, assignment, shots, rng);
  row.fidelity = fidelity(row.data_state, target_state(target));
  row.exp_zz = expectation(row.data_state, pauli_string("ZZ"));
  row.exp_xx = expectation(row.data_state, pauli_string("XX"));
  row.exp_yy = expectation(row.data_state, pauli_string("YY"));
}

// Joint sampling for the conditioned experiment: every shot first draws the
// ancilla outcome, then a readout outcome from that branch's distribution.
inline void conditioned_tomography(const ConditionedStates& cs, const Eigen::MatrixXd& assignment,
                                   std::int64_t shots, std::mt19937_64& rng, Matrix& even_out,
                                   Matrix& odd_out) {
  std::vector<ShotRecord> even_records, odd_records;
  for (const auto& basis : measurement_bases(2)) {
    const Eigen::VectorXd pe = reported_probabilities(cs.data_even, basis, assignment);
    const Eigen::VectorXd po = reported_probabilities(cs.data_odd, basis, assignment);
    ShotRecord rec_e{basis, std::vector<std::int64_t>(4, 0), 0};
    ShotRecord rec_o{basis, std::vector<std::int64_t>(4, 0), 0};
    for (std::int64_t s = 0; s < shots; ++s) {
      const bool even = uniform01(rng) < cs.p_even;
      const Eigen::VectorXd& p = even ? pe : po;
      ShotRecord& rec = even ? rec_e : rec_o;
      const double u = uniform01(rng);
      double acc = 0.0;
      Eigen::Index pick = p.size() - 1;
      for (Eigen::Index i = 0; i < p.size(); ++i) {
        acc += p(i);
        if (u < acc) {
          pick = i;
          break;
        }
      }
      ++rec.counts[static_cast<std::size_t>(pick)];
      ++rec.shots;
    }
    if (rec_e.shots == 0 || rec_o.shots == 0)
      throw std::runtime_error("tomography: a conditioned branch received no shots");
    even_records.push_back(std::move(rec_e));
    odd_records.push_back(std::move(rec_o));
  }
  even_out = mle_reconstruct(estimate_pauli_set(even_records, assignment), 2);
  odd_out = mle_reconstruct(estimate_pauli_set(odd_records, assignment), 2);
}

}  // namespace run_detail

inline ExperimentOutput run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const ResolvedExperiment exp = resolve_experiment(cfg);
  const DeviceModel model = build_model(cfg);
  const ExperimentSchedule sched = compile_experiment(exp.spec, cfg.timing);
  Propagator prop(model);
  std::mt19937_64 rng(cfg.seed);

  ExperimentOutput out;
  out.config = cfg;

  switch (exp.analysis) {
    case Analysis::Premeasure: {
      Matrix rho = premeasure_state(sched, prop);
      const MeasurementSplit split = measure_ancilla(rho, model.povm);
      StatePanel panel;
      panel.p_plus = split.p_plus;
      panel.ancilla_excited = ancilla_excited_population(rho);
      const Vector ideal = statevector_premeasure(sched);
      if (cfg.shots > 0) rho = tomograph(rho, model.assignment3(), cfg.shots, rng);
      panel.fidelity_vs_ideal = fidelity(rho, ideal);
      panel.sim = exact_pauli_set(rho);
      panel.ideal = exact_pauli_set(projector(ideal));
      out.premeasure = std::move(panel);

      RoundResult row;
      row.n = 0;
      row.basis = sched.rounds[0].basis;
      row.mode = sched.mode;
      row.data_state = data_reduced(rho);
      row.fidelity = out.premeasure->fidelity_vs_ideal;
      row.exp_zz = expectation(row.data_state, pauli_string("ZZ"));
      row.exp_xx = expectation(row.data_state, pauli_string("XX"));
      row.exp_yy = expectation(row.data_state, pauli_string("YY"));
      row.p_plus = out.premeasure->p_plus;
      row.ancilla_excited = out.premeasure->ancilla_excited;
      out.rows.push_back(std::move(row));
      break;
    }
    case Analysis::Conditioned: {
      ConditionedStates cs = condition_on_outcome(sched, prop);
      const double ancilla_excited =
          ancilla_excited_population(premeasure_state(sched, prop));
      if (cfg.shots > 0) {
        const Eigen::MatrixXd assignment = assignment_for(model, {kD1, kD2});
        run_detail::conditioned_tomography(cs, assignment, cfg.shots, rng, cs.data_even,
                                           cs.data_odd);
      }
      ConditionedPanel panel;
      panel.p_even = cs.p_even;
      panel.p_odd = cs.p_odd;
      panel.fidelity_even = fidelity(cs.data_even, bell_phi_plus());
      panel.fidelity_odd = fidelity(cs.data_odd, bell_psi_plus());
      panel.even = exact_pauli_set(cs.data_even);
      panel.odd = exact_pauli_set(cs.data_odd);
      out.conditioned = std::move(panel);

      auto branch_row = [&](const Matrix& data, double fid, double p_branch) {
        RoundResult row;
        row.n = 0;
        row.basis = Basis::ZZ;
        row.mode = sched.mode;
        row.data_state = data;
        row.fidelity = fid;
        row.exp_zz = expectation(data, pauli_string("ZZ"));
        row.exp_xx = expectation(data, pauli_string("XX"));
        row.exp_yy = expectation(data, pauli_string("YY"));
        row.p_plus = p_branch;  // this branch's probability
        row.ancilla_excited = ancilla_excited;
        return row;
      };
      out.rows.push_back(branch_row(cs.data_even, out.conditioned->fidelity_even, cs.p_even));
      out.rows.push_back(branch_row(cs.data_odd, out.conditioned->fidelity_odd, cs.p_odd));
      break;
    }
    case Analysis::Rows: {
      out.rows = run_protocol(sched, prop);
      if (cfg.shots > 0) {
        const Eigen::MatrixXd assignment = assignment_for(model, {kD1, kD2});
        for (auto& row : out.rows)
          run_detail::resample_row(row, assignment, cfg.shots, cfg.target, rng);
      }
      if (cfg.experiment == "fig3d" || cfg.experiment == "fig3e")
        out.final_pauli = exact_pauli_set(out.rows.back().data_state);
      break;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Emission
// ---------------------------------------------------------------------------

inline std::string to_csv(const ExperimentOutput& out) {
  std::ostringstream os;
  os << "N,basis,mode,fidelity,exp_zz,exp_xx,exp_yy,p_plus,ancilla_excited\n";
  char buf[256];
  for (const auto& r : out.rows) {
    std::snprintf(buf, sizeof(buf), "%d,%s,%s,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g\n", r.n,
                  to_string(r.basis).c_str(), to_string(r.mode).c_str(), r.fidelity, r.exp_zz,
                  r.exp_xx, r.exp_yy, r.p_plus, r.ancilla_excited);
    os << buf;
  }
  return os.str();
}

inline nlohmann::json pauli_set_to_json(const PauliSet& set) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [label, value] : set) j[label] = value;
  return j;
}

inline nlohmann::json to_json(const ExperimentOutput& out) {
  nlohmann::json j;
  j["config"] = config_to_json(out.config);
  j["rows"] = nlohmann::json::array();
  for (const auto& r : out.rows) {
    nlohmann::json row{{"n", r.n},
                       {"basis", to_string(r.basis)},
                       {"mode", to_string(r.mode)},
                       {"fidelity", r.fidelity},
                       {"exp_zz", r.exp_zz},
                       {"exp_xx", r.exp_xx},
                       {"exp_yy", r.exp_yy},
                       {"p_plus", r.p_plus},
                       {"ancilla_excited", r.ancilla_excited}};
    if (out.config.emit_pauli_sets && r.data_state.size() > 0)
      row["pauli"] = pauli_set_to_json(exact_pauli_set(r.data_state));
    j["rows"].push_back(std::move(row));
  }
  if (out.premeasure) {
    j["premeasure"] = {{"fidelity_vs_ideal", out.premeasure->fidelity_vs_ideal},
                       {"p_plus", out.premeasure->p_plus},
                       {"ancilla_excited", out.premeasure->ancilla_excited},
                       {"pauli_sim", pauli_set_to_json(out.premeasure->sim)},
                       {"pauli_ideal", pauli_set_to_json(out.premeasure->ideal)}};
  }
  if (out.conditioned) {
    j["conditioned"] = {{"p_even", out.conditioned->p_even},
                        {"p_odd", out.conditioned->p_odd},
                        {"fidelity_even", out.conditioned->fidelity_even},
                        {"fidelity_odd", out.conditioned->fidelity_odd},
                        {"pauli_even", pauli_set_to_json(out.conditioned->even)},
                        {"pauli_odd", pauli_set_to_json(out.conditioned->odd)}};
  }
  if (out.final_pauli) j["final_pauli"] = pauli_set_to_json(*out.final_pauli);
  return j;
}

inline std::string render_output(const ExperimentOutput& out) {
  if (out.config.format == "json") return to_json(out).dump(2) + "\n";
  return to_csv(out);
}

inline std::string dump_schedule_text(const ExperimentConfig& cfg, const ResolvedExperiment& exp) {
  return dump_schedule(compile_experiment(exp.spec, cfg.timing));
}

}  // namespace paritysim
