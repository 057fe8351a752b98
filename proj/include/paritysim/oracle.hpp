#pragma once
// Independent reference implementations used to cross-check the Lindblad
// engine: an ideal-circuit statevector walk with forced measurement outcomes,
// closed-form single-qubit decay, and a fixed-step RK4 master-equation
// integrator.  None of these share propagation code with the engine.

#include "paritysim/engine.hpp"
#include "paritysim/schedule.hpp"

#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

namespace paritysim {

enum class Provenance { Statevector, AnalyticDecay, FixedStep };

// ---------------------------------------------------------------------------
// Ideal statevector oracle
// ---------------------------------------------------------------------------

struct StatevectorRun {
  Vector state;                       // final register state (normalized)
  std::vector<double> outcome_probs;  // probability of each forced outcome given the past
  Provenance provenance = Provenance::Statevector;
};

namespace oracle_detail {

// cos(theta/2) I - i sin(theta/2) sigma
inline Matrix rotation_2x2(Axis axis, double angle) {
  const Matrix sigma = pauli(axis == Axis::X ? 'X' : 'Y');
  return std::cos(angle / 2.0) * identity(2) - kI * std::sin(angle / 2.0) * sigma;
}

inline Vector pure_initial(const Matrix& rho) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(rho);
  Eigen::Index top;
  solver.eigenvalues().maxCoeff(&top);
  if (solver.eigenvalues()(top) < 1.0 - 1e-12)
    throw std::invalid_argument("oracle: initial state is not pure");
  return solver.eigenvectors().col(top);
}

inline Vector apply_drives(const Vector& psi, const std::vector<Drive>& drives) {
  Vector out = psi;
  for (const auto& d : drives)
    out = embed_single(rotation_2x2(d.axis, d.angle_rad), d.site, kNumQubits) * out;
  return out;
}

struct Walker {
  Vector psi;
  std::span<const int> outcomes;
  std::size_t next_outcome = 0;
  int last_outcome = 0;
  std::vector<double> probs;

  void step(const Segment& s) {
    switch (s.kind) {
      case SegmentKind::Rotation:
        psi = apply_drives(psi, s.drives);
        break;
      case SegmentKind::Cz:
        // exp(-i pi |11><11|) = I - 2 |11><11|
        psi = (identity(kDim) -
               2.0 * two_excitation_projector(s.cz_a, s.cz_b, kNumQubits)) *
              psi;
        break;
      case SegmentKind::Idle:
        break;
      case SegmentKind::Unitary:
        psi = s.unitary * psi;
        break;
      case SegmentKind::Measure: {
        if (next_outcome >= outcomes.size())
          throw std::invalid_argument("oracle: fewer forced outcomes than measurements");
        const int outcome = outcomes[next_outcome++];
        if (outcome != 1 && outcome != -1)
          throw std::invalid_argument("oracle: forced outcomes must be +1 or -1");
        Matrix sel(2, 2);
        sel << (outcome == 1 ? 1 : 0), 0, 0, (outcome == 1 ? 0 : 1);
        const Vector projected = embed_single(sel, kAncilla, kNumQubits) * psi;
        const double p = projected.squaredNorm();
        if (p < 1e-12)
          throw std::domain_error("oracle: forced outcome has zero probability");
        probs.push_back(p);
        psi = projected / std::sqrt(p);
        last_outcome = outcome;
        break;
      }
      case SegmentKind::Conditional: {
        if (last_outcome == 0)
          throw std::invalid_argument("oracle: conditional slot before any measurement");
        const Matrix& pre = last_outcome == -1 ? s.pre_minus : s.pre_plus;
        if (pre.size() > 0) psi = pre * psi;
        psi = apply_drives(psi, last_outcome == -1 ? s.on_minus : s.on_plus);
        break;
      }
    }
  }
};

}  // namespace oracle_detail

// Ideal (noise-free, exact-readout) run of a compiled schedule with a forced
// outcome for every measurement.  Throws std::domain_error when a forced
// outcome has zero probability.
inline StatevectorRun statevector_run(const ExperimentSchedule& sched,
                                      std::span<const int> outcomes) {
  oracle_detail::Walker w{oracle_detail::pure_initial(sched.initial), outcomes};
  for (const auto& s : sched.prep) w.step(s);
  for (const auto& round : sched.rounds)
    for (const auto& s : round.segments) w.step(s);
  if (w.next_outcome != outcomes.size())
    throw std::invalid_argument("oracle: more forced outcomes than measurements");
  return {w.psi, w.probs};
}

// Ideal register state at the first measurement point.
inline Vector statevector_premeasure(const ExperimentSchedule& sched) {
  if (sched.rounds.empty()) throw std::invalid_argument("oracle: schedule has no rounds");
  oracle_detail::Walker w{oracle_detail::pure_initial(sched.initial), {}};
  for (const auto& s : sched.prep) w.step(s);
  for (const auto& s : sched.rounds[0].segments) {
    if (s.kind == SegmentKind::Measure) return w.psi;
    w.step(s);
  }
  throw std::runtime_error("oracle: round has no measurement segment");
}

// ---------------------------------------------------------------------------
// Closed-form single-qubit decay
// ---------------------------------------------------------------------------

struct OracleDensity {
  Matrix state;
  Provenance provenance;
};

// Free decay of one qubit: excited population decays as exp(-t/T1), coherence
// as exp(-t/T2).  Pass +infinity to disable a channel.
inline OracleDensity analytic_decay(const Matrix& rho, double t1_ns, double t2_ns, double t_ns) {
  if (rho.rows() != 2 || rho.cols() != 2)
    throw std::invalid_argument("analytic_decay: expected a single-qubit state");
  if (t_ns < 0.0) throw std::invalid_argument("analytic_decay: negative time");
  Matrix out(2, 2);
  const double pop1 = (rho(1, 1) * std::exp(-t_ns / t1_ns)).real();
  const Complex coh = rho(0, 1) * std::exp(-t_ns / t2_ns);
  out(1, 1) = pop1;
  out(0, 0) = rho(0, 0).real() + rho(1, 1).real() - pop1;
  out(0, 1) = coh;
  out(1, 0) = std::conj(coh);
  return {out, Provenance::AnalyticDecay};
}

// ---------------------------------------------------------------------------
// Fixed-step RK4 master-equation integrator
// ---------------------------------------------------------------------------

inline OracleDensity fixed_step_integrate(const Matrix& rho0, const Matrix& h,
                                          const std::vector<Matrix>& collapse, double t_ns,
                                          double dt_ns) {
  if (!(dt_ns > 0.0)) throw std::invalid_argument("fixed_step_integrate: dt must be positive");
  if (t_ns < 0.0) throw std::invalid_argument("fixed_step_integrate: negative time");
  std::vector<Matrix> cdc;
  cdc.reserve(collapse.size());
  for (const auto& c : collapse) cdc.push_back(c.adjoint() * c);

  const auto deriv = [&](const Matrix& rho) {
    Matrix d = -kI * (h * rho - rho * h);
    for (std::size_t k = 0; k < collapse.size(); ++k)
      d += collapse[k] * rho * collapse[k].adjoint() -
           0.5 * (cdc[k] * rho + rho * cdc[k]);
    return d;
  };

  Matrix rho = rho0;
  double remaining = t_ns;
  while (remaining > 1e-15) {
    const double step = remaining < dt_ns ? remaining : dt_ns;
    const Matrix k1 = deriv(rho);
    const Matrix k2 = deriv(rho + 0.5 * step * k1);
    const Matrix k3 = deriv(rho + 0.5 * step * k2);
    const Matrix k4 = deriv(rho + step * k3);
    rho += (step / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    remaining -= step;
  }
  return {rho, Provenance::FixedStep};
}

// Convenience wrapper mirroring the engine's segment propagation.
inline OracleDensity fixed_step_integrate(const Matrix& rho0, const Segment& s,
                                          const Propagator& prop, double dt_ns) {
  Matrix h = prop.control_hamiltonian(s) + prop.coupling_hamiltonian(s);
  std::vector<Matrix> collapse = prop.model().collapse;
  if (s.readout_window)
    collapse.insert(collapse.end(), prop.model().readout_collapse.begin(),
                    prop.model().readout_collapse.end());
  return fixed_step_integrate(rho0, h, collapse, s.duration_ns, dt_ns);
}

}  // namespace paritysim
