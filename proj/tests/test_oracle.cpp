// Reference-implementation tests: ideal statevector walks with forced
// outcomes, closed-form decay, and RK4 integration cross-checked against the
// exponential propagator.

#include <catch2/catch_amalgamated.hpp>

#include "paritysim/oracle.hpp"

#include "helpers.hpp"

#include <cmath>
#include <random>

using namespace paritysim;

namespace {

// Remove the arbitrary global phase so amplitude patterns can be compared.
Vector phase_aligned(const Vector& v) {
  Eigen::Index ref = 0;
  for (Eigen::Index i = 0; i < v.size(); ++i)
    if (std::abs(v(i)) > 1e-9) {
      ref = i;
      break;
    }
  return v * (std::conj(v(ref)) / std::abs(v(ref)));
}

ExperimentSchedule make_sched(const std::vector<Basis>& seq, const std::string& init,
                              Mode mode = Mode::Feedback) {
  ScheduleSpec spec;
  spec.sequence = seq;
  spec.mode = mode;
  spec.initial_state = init;
  return compile_experiment(spec, Timing{});
}

}  // namespace

TEST_CASE("parity mapping entangles the register with the expected amplitudes") {
  const ExperimentSchedule sched = make_sched({Basis::ZZ}, "plus_plus");
  const Vector psi = phase_aligned(statevector_premeasure(sched));

  // After prep + ancilla rotation + both flux pulses + inverse rotation, the
  // register holds (|000> + |101> - |011> - |110>)/2.
  Vector expected = Vector::Zero(8);
  expected(0) = 0.5;
  expected(5) = 0.5;
  expected(3) = -0.5;
  expected(6) = -0.5;
  REQUIRE((psi - expected).norm() < 1e-9);
}

TEST_CASE("forced outcomes report their conditional probabilities") {
  const ExperimentSchedule sched = make_sched({Basis::ZZ}, "plus_plus");

  const std::vector<int> plus = {1};
  const StatevectorRun run_plus = statevector_run(sched, plus);
  REQUIRE(run_plus.outcome_probs.size() == 1);
  CHECK(std::abs(run_plus.outcome_probs[0] - 0.5) < 1e-12);

  // Even outcome leaves the data in the even-parity Bell state, ancilla |0>.
  const Matrix data_plus = partial_trace(projector(run_plus.state), {kD1, kD2}, 3);
  CHECK(fidelity(data_plus, bell_phi_plus()) > 1.0 - 1e-12);
  const Matrix anc_plus = partial_trace(projector(run_plus.state), {kAncilla}, 3);
  CHECK(std::abs(anc_plus(0, 0).real() - 1.0) < 1e-12);

  // Odd outcome triggers the feedback flip on D2 plus ancilla reset, so the
  // final state is the same Bell pair with the ancilla back in |0>.
  const std::vector<int> minus = {-1};
  const StatevectorRun run_minus = statevector_run(sched, minus);
  CHECK(std::abs(run_minus.outcome_probs[0] - 0.5) < 1e-12);
  const Matrix data_minus = partial_trace(projector(run_minus.state), {kD1, kD2}, 3);
  CHECK(fidelity(data_minus, bell_phi_plus()) > 1.0 - 1e-12);
  const Matrix anc_minus = partial_trace(projector(run_minus.state), {kAncilla}, 3);
  CHECK(std::abs(anc_minus(0, 0).real() - 1.0) < 1e-12);
}

TEST_CASE("ground-state data always reports even parity") {
  const ExperimentSchedule sched = make_sched({Basis::ZZ}, "ground");
  const std::vector<int> plus = {1};
  const StatevectorRun run = statevector_run(sched, plus);
  CHECK(std::abs(run.outcome_probs[0] - 1.0) < 1e-12);

  const std::vector<int> minus = {-1};
  CHECK_THROWS_AS(statevector_run(sched, minus), std::domain_error);
}

TEST_CASE("an x-basis check after an even outcome is deterministic") {
  // Round 1 projects onto the even-parity Bell state, which is a +1
  // eigenstate of the x-basis check: outcome 2 must be +1.
  const ExperimentSchedule sched = make_sched({Basis::ZZ, Basis::XX}, "plus_plus");

  const std::vector<int> both_plus = {1, 1};
  const StatevectorRun run = statevector_run(sched, both_plus);
  REQUIRE(run.outcome_probs.size() == 2);
  CHECK(std::abs(run.outcome_probs[0] - 0.5) < 1e-12);
  CHECK(std::abs(run.outcome_probs[1] - 1.0) < 1e-12);
  const Matrix data = partial_trace(projector(run.state), {kD1, kD2}, 3);
  CHECK(fidelity(data, bell_phi_plus()) > 1.0 - 1e-12);

  const std::vector<int> contradiction = {1, -1};
  CHECK_THROWS_AS(statevector_run(sched, contradiction), std::domain_error);

  // The odd ZZ branch is corrected to the even Bell state before round 2, so
  // the second outcome is again forced to +1.
  const std::vector<int> minus_then_plus = {-1, 1};
  const StatevectorRun run2 = statevector_run(sched, minus_then_plus);
  CHECK(std::abs(run2.outcome_probs[1] - 1.0) < 1e-12);
}

TEST_CASE("frame-tracking mode leaves the odd branch uncorrected") {
  const ExperimentSchedule sched = make_sched({Basis::ZZ}, "plus_plus", Mode::Pfu);
  const std::vector<int> minus = {-1};
  const StatevectorRun run = statevector_run(sched, minus);
  // Ancilla reset still happens; data stays in the odd-parity Bell state.
  const Matrix data = partial_trace(projector(run.state), {kD1, kD2}, 3);
  CHECK(fidelity(data, bell_psi_plus()) > 1.0 - 1e-12);
  const Matrix anc = partial_trace(projector(run.state), {kAncilla}, 3);
  CHECK(std::abs(anc(0, 0).real() - 1.0) < 1e-12);
}

TEST_CASE("forced-outcome bookkeeping is strict") {
  const ExperimentSchedule sched = make_sched({Basis::ZZ, Basis::XX}, "plus_plus");
  const std::vector<int> too_few = {1};
  CHECK_THROWS_AS(statevector_run(sched, too_few), std::invalid_argument);
  const std::vector<int> too_many = {1, 1, 1};
  CHECK_THROWS_AS(statevector_run(sched, too_many), std::invalid_argument);
  const std::vector<int> bad_value = {0, 1};
  CHECK_THROWS_AS(statevector_run(sched, bad_value), std::invalid_argument);
}

TEST_CASE("the statevector walk refuses mixed initial states") {
  const ExperimentSchedule sched = make_sched({Basis::ZZ}, "mixed_data");
  const std::vector<int> plus = {1};
  CHECK_THROWS_AS(statevector_run(sched, plus), std::invalid_argument);
}

TEST_CASE("forced-outcome probabilities sum to one over all paths") {
  for (const char* init : {"plus_plus", "ground"}) {
    for (int rounds = 1; rounds <= 4; ++rounds) {
      const ExperimentSchedule sched =
          make_sched(make_sequence("alternating", rounds), init);
      double total = 0.0;
      for (int mask = 0; mask < (1 << rounds); ++mask) {
        std::vector<int> outcomes;
        for (int k = 0; k < rounds; ++k) outcomes.push_back((mask >> k & 1) ? 1 : -1);
        try {
          const StatevectorRun run = statevector_run(sched, outcomes);
          double p = 1.0;
          for (double q : run.outcome_probs) p *= q;
          total += p;
          REQUIRE(std::abs(run.state.norm() - 1.0) < 1e-9);
        } catch (const std::domain_error&) {
          // forced path has zero probability
        }
      }
      REQUIRE(std::abs(total - 1.0) < 1e-9);
    }
  }
}

TEST_CASE("closed-form decay matches its defining laws") {
  Matrix rho(2, 2);
  rho << 0.3, Complex(0.2, 0.1), Complex(0.2, -0.1), 0.7;

  const OracleDensity at_zero = analytic_decay(rho, 1000.0, 800.0, 0.0);
  CHECK(at_zero.state.isApprox(rho, 1e-12));
  CHECK(at_zero.provenance == Provenance::AnalyticDecay);

  const OracleDensity at_t1 = analytic_decay(rho, 1000.0, 800.0, 1000.0);
  CHECK(std::abs(at_t1.state(1, 1).real() - 0.7 * std::exp(-1.0)) < 1e-12);
  CHECK(std::abs(at_t1.state.trace().real() - 1.0) < 1e-12);

  const OracleDensity at_t2 = analytic_decay(rho, 1000.0, 800.0, 800.0);
  CHECK(std::abs(at_t2.state(0, 1) - Complex(0.2, 0.1) * std::exp(-1.0)) < 1e-12);

  const double inf = std::numeric_limits<double>::infinity();
  CHECK(analytic_decay(rho, inf, inf, 5000.0).state.isApprox(rho, 1e-12));

  CHECK_THROWS_AS(analytic_decay(rho, 1000.0, 800.0, -1.0), std::invalid_argument);
  CHECK_THROWS_AS(analytic_decay(identity(4), 1000.0, 800.0, 1.0), std::invalid_argument);
}

TEST_CASE("closed-form decay agrees with the Lindblad propagator") {
  const double t1 = 10000.0, t2 = 12000.0;
  Matrix sigma_minus(2, 2);
  sigma_minus << 0, 1, 0, 0;
  const double gphi = 0.5 * (1.0 / t2 - 1.0 / (2.0 * t1));
  const std::vector<Matrix> collapse = {std::sqrt(1.0 / t1) * sigma_minus,
                                        std::sqrt(gphi) * pauli('Z')};

  Matrix rho(2, 2);
  rho << 0.4, Complex(0.25, -0.15), Complex(0.25, 0.15), 0.6;
  for (double t : {100.0, 1500.0, 9000.0}) {
    const Matrix lindblad = propagate_exact(rho, Matrix::Zero(2, 2), collapse, t);
    const Matrix closed = analytic_decay(rho, t1, t2, t).state;
    REQUIRE((lindblad - closed).norm() < 1e-12);
  }
}

TEST_CASE("fixed-step integration converges at fourth order") {
  std::mt19937_64 rng(31);
  const Matrix h = testutil::random_hermitian(4, rng);
  std::vector<Matrix> collapse = {0.2 * testutil::random_hermitian(4, rng)};
  const Matrix rho0 = testutil::random_density(4, rng);
  const double t = 4.0;

  const Matrix exact = propagate_exact(rho0, h, collapse, t);
  const double err_coarse = (fixed_step_integrate(rho0, h, collapse, t, 0.5).state - exact).norm();
  const double err_fine = (fixed_step_integrate(rho0, h, collapse, t, 0.25).state - exact).norm();

  REQUIRE(err_coarse > 0.0);
  const double order = std::log2(err_coarse / err_fine);
  CHECK(order > 3.5);
  CHECK(order < 5.0);

  // Remainder handling: a horizon that is not a step multiple still lands on
  // the same final state.
  const Matrix stub = fixed_step_integrate(rho0, h, collapse, 1.05, 0.01).state;
  const Matrix stub_exact = propagate_exact(rho0, h, collapse, 1.05);
  CHECK((stub - stub_exact).norm() < 1e-6);

  CHECK_THROWS_AS(fixed_step_integrate(rho0, h, collapse, 1.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(fixed_step_integrate(rho0, h, collapse, -1.0, 0.1), std::invalid_argument);
}

TEST_CASE("the exponential engine matches RK4 across a full mapping block") {
  DeviceParams p;
  const DeviceModel m = DeviceModel::from_params(p, 0.0);
  Propagator prop(m);

  const Round round = compile_parity_round(Basis::XX, Mode::Feedback, Timing{});
  ScheduleSpec spec;
  spec.sequence = {Basis::XX};
  const ExperimentSchedule sched = compile_experiment(spec, Timing{});

  Matrix rho_engine = sched.initial;
  Matrix rho_rk4 = sched.initial;
  for (const auto& s : sched.prep) {
    rho_engine = prop.apply(rho_engine, s);
    rho_rk4 = fixed_step_integrate(rho_rk4, s, prop, 0.25).state;
  }
  for (const auto& s : round.segments) {
    if (s.kind == SegmentKind::Measure) break;
    rho_engine = prop.apply(rho_engine, s);
    rho_rk4 = fixed_step_integrate(rho_rk4, s, prop, 0.25).state;
  }
  REQUIRE((rho_engine - rho_rk4).norm() < 1e-6);
  CHECK(std::abs(rho_rk4.trace().real() - 1.0) < 1e-8);
}
