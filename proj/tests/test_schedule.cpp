// Schedule compilation tests: cycle timing, segment structure, decoupling
// pulse placement, conditional-slot wiring, and experiment assembly.

#include <catch2/catch_amalgamated.hpp>

#include "paritysim/schedule.hpp"

#include <cmath>

using namespace paritysim;

namespace {
constexpr double kTol = 1e-12;

double total_duration(const std::vector<Segment>& segs) {
  double t = 0.0;
  for (const auto& s : segs) t += s.duration_ns;
  return t;
}
}  // namespace

TEST_CASE("default timing yields a 1000 ns feedback delay") {
  Timing t;
  CHECK(std::abs(t.feedback_delay_ns() - 1000.0) < kTol);
  CHECK_NOTHROW(t.validate());
}

TEST_CASE("timing validation rejects unusable parameters") {
  Timing t;
  t.buffer_ns = -1.0;
  CHECK_THROWS_AS(t.validate(), std::invalid_argument);

  t = Timing{};
  t.cpmg_count = -1;
  CHECK_THROWS_AS(t.validate(), std::invalid_argument);

  // Too many finite-width pulses to fit in the delay window.
  t = Timing{};
  t.cpmg_count = 25;  // spacing 40 ns < 50 ns pulse width
  CHECK_THROWS_AS(t.validate(), std::invalid_argument);

  // Zero delay only works without finite-width decoupling pulses.
  t = Timing{};
  t.readout_integration_ns = 0.0;
  t.electronic_delay_ns = 0.0;
  CHECK_THROWS_AS(t.validate(), std::invalid_argument);
  t.cpmg_count = 0;
  CHECK_NOTHROW(t.validate());
  t.cpmg_count = 4;
  t.cpmg_instantaneous = true;
  CHECK_NOTHROW(t.validate());
}

TEST_CASE("both round types compile to the same 1511 ns cycle") {
  const Timing t;
  const Round zz = compile_parity_round(Basis::ZZ, Mode::Feedback, t);
  const Round xx = compile_parity_round(Basis::XX, Mode::Feedback, t);

  CHECK(std::abs(zz.duration_ns - 1511.0) < kTol);
  CHECK(std::abs(xx.duration_ns - 1511.0) < kTol);
  CHECK(std::abs(total_duration(zz.segments) - zz.duration_ns) < kTol);

  // Parity mapping block: rotation, buffer, CZ, buffer, buffer, CZ, buffer,
  // rotation = 50+40+96+40+40+105+40+50 = 461 ns.
  double mapping = 0.0;
  for (int i = 0; i < 8; ++i) mapping += zz.segments[static_cast<std::size_t>(i)].duration_ns;
  CHECK(std::abs(mapping - 461.0) < kTol);
}

TEST_CASE("even-parity round rotates only the ancilla") {
  const Round r = compile_parity_round(Basis::ZZ, Mode::Feedback, Timing{});
  const Segment& pre = r.segments[0];
  REQUIRE(pre.kind == SegmentKind::Rotation);
  REQUIRE(pre.drives.size() == 1);
  CHECK(pre.drives[0].site == kAncilla);
  CHECK(pre.drives[0].axis == Axis::Y);
  CHECK(std::abs(pre.drives[0].angle_rad - kPi / 2.0) < kTol);

  const Segment& post = r.segments[7];
  REQUIRE(post.drives.size() == 1);
  CHECK(std::abs(post.drives[0].angle_rad + kPi / 2.0) < kTol);

  CHECK(r.segments[2].kind == SegmentKind::Cz);
  CHECK(r.segments[2].cz_a == kD1);
  CHECK(r.segments[2].cz_b == kAncilla);
  CHECK(r.segments[5].kind == SegmentKind::Cz);
  CHECK(r.segments[5].cz_a == kAncilla);
  CHECK(r.segments[5].cz_b == kD2);
  CHECK(r.segments[8].kind == SegmentKind::Measure);
}

TEST_CASE("x-basis round adds data basis-change pulses in the same slots") {
  const Round r = compile_parity_round(Basis::XX, Mode::Feedback, Timing{});
  const Segment& pre = r.segments[0];
  REQUIRE(pre.drives.size() == 3);
  // Data pulses map X onto the measured axis: R_y(-pi/2) before, undone after.
  bool d1_found = false, d2_found = false;
  for (const auto& d : pre.drives) {
    if (d.site == kD1) {
      d1_found = true;
      CHECK(d.axis == Axis::Y);
      CHECK(std::abs(d.angle_rad + kPi / 2.0) < kTol);
    }
    if (d.site == kD2) {
      d2_found = true;
      CHECK(std::abs(d.angle_rad + kPi / 2.0) < kTol);
    }
  }
  CHECK(d1_found);
  CHECK(d2_found);

  const Segment& post = r.segments[7];
  REQUIRE(post.drives.size() == 3);
  for (const auto& d : post.drives)
    if (d.site == kD1 || d.site == kD2) CHECK(std::abs(d.angle_rad - kPi / 2.0) < kTol);
}

TEST_CASE("decoupling pulses sit at the standard echo positions") {
  const Timing t;
  const Round r = compile_parity_round(Basis::ZZ, Mode::Feedback, t);

  // Walk the delay portion (between Measure and Conditional).
  double clock = 0.0;
  std::vector<double> pulse_starts;
  double idle_total = 0.0;
  bool in_delay = false;
  for (const auto& s : r.segments) {
    if (s.kind == SegmentKind::Measure) {
      in_delay = true;
      clock = 0.0;
      continue;
    }
    if (s.kind == SegmentKind::Conditional) break;
    if (!in_delay) continue;
    if (s.kind == SegmentKind::Rotation) {
      pulse_starts.push_back(clock);
      REQUIRE(s.drives.size() == 2);
      for (const auto& d : s.drives) {
        CHECK((d.site == kD1 || d.site == kD2));
        CHECK(d.axis == Axis::X);
        CHECK(std::abs(d.angle_rad - kPi) < kTol);
      }
    } else {
      idle_total += s.duration_ns;
    }
    clock += s.duration_ns;
  }

  // Four pi pulses centered at t_d (2k+1)/8 = 125, 375, 625, 875 ns.
  REQUIRE(pulse_starts.size() == 4);
  const double expected[] = {100.0, 350.0, 600.0, 850.0};
  for (int k = 0; k < 4; ++k) CHECK(std::abs(pulse_starts[static_cast<std::size_t>(k)] - expected[k]) < kTol);
  CHECK(std::abs(idle_total - 800.0) < kTol);
}

TEST_CASE("readout window flag covers exactly the readout pulse interval") {
  const Timing t;  // readout pulse 200 ns, first echo at [100, 150)
  const Round r = compile_parity_round(Basis::ZZ, Mode::Feedback, t);
  double flagged = 0.0;
  bool in_delay = false;
  for (const auto& s : r.segments) {
    if (s.kind == SegmentKind::Measure) {
      in_delay = true;
      continue;
    }
    if (s.kind == SegmentKind::Conditional) break;
    if (in_delay && s.readout_window) flagged += s.duration_ns;
  }
  CHECK(std::abs(flagged - t.readout_pulse_ns) < kTol);
}

TEST_CASE("instantaneous decoupling uses global pi flips on both data qubits") {
  Timing t;
  t.cpmg_instantaneous = true;
  const Round r = compile_parity_round(Basis::ZZ, Mode::Feedback, t);
  int unitary_count = 0;
  double delay_total = 0.0;
  bool in_delay = false;
  for (const auto& s : r.segments) {
    if (s.kind == SegmentKind::Measure) {
      in_delay = true;
      continue;
    }
    if (s.kind == SegmentKind::Conditional) break;
    if (!in_delay) continue;
    delay_total += s.duration_ns;
    if (s.kind == SegmentKind::Unitary) {
      ++unitary_count;
      CHECK(s.duration_ns == 0.0);
      CHECK(s.unitary.isApprox(-pauli_string("XIX"), 1e-12));
    }
  }
  CHECK(unitary_count == 4);
  CHECK(std::abs(delay_total - 1000.0) < kTol);
  CHECK(std::abs(r.duration_ns - 1511.0) < kTol);
}

TEST_CASE("conditional slot wiring per basis, mode, and target") {
  const Timing t;

  SECTION("even-parity check with feedback corrects the odd branch") {
    const Round r = compile_parity_round(Basis::ZZ, Mode::Feedback, t, Target::PhiPlus);
    const Segment& c = r.segments.back();
    REQUIRE(c.kind == SegmentKind::Conditional);
    REQUIRE(c.on_minus.size() == 2);  // ancilla reset + data flip
    CHECK(c.on_minus[0].site == kAncilla);
    CHECK(c.on_minus[1].site == kD2);
    CHECK(c.on_plus.empty());
    CHECK(c.pre_minus.size() == 0);
  }

  SECTION("odd-parity target flips the correction condition") {
    const Round r = compile_parity_round(Basis::ZZ, Mode::Feedback, t, Target::PsiPlus);
    const Segment& c = r.segments.back();
    REQUIRE(c.on_minus.size() == 1);  // ancilla reset only
    REQUIRE(c.on_plus.size() == 1);
    CHECK(c.on_plus[0].site == kD2);
  }

  SECTION("x-basis check applies a virtual phase correction") {
    const Round r = compile_parity_round(Basis::XX, Mode::Feedback, t);
    const Segment& c = r.segments.back();
    REQUIRE(c.on_minus.size() == 1);
    CHECK(c.on_minus[0].site == kAncilla);
    REQUIRE(c.pre_minus.size() > 0);
    CHECK(c.pre_minus.isApprox(pauli_string("IIZ"), 1e-12));
    CHECK(c.pre_plus.size() == 0);
  }

  SECTION("frame-tracking mode resets the ancilla but never corrects data") {
    for (Basis b : {Basis::ZZ, Basis::XX}) {
      const Round r = compile_parity_round(b, Mode::Pfu, t);
      const Segment& c = r.segments.back();
      REQUIRE(c.on_minus.size() == 1);
      CHECK(c.on_minus[0].site == kAncilla);
      CHECK(c.on_plus.empty());
      CHECK(c.pre_minus.size() == 0);
    }
  }
}

TEST_CASE("experiment assembly prepares the requested initial state") {
  const Timing t;

  SECTION("product of superposition states") {
    ScheduleSpec spec;
    spec.sequence = {Basis::ZZ};
    const ExperimentSchedule s = compile_experiment(spec, t);
    CHECK(s.initial.isApprox(projector(basis_state(3, 0)), kTol));
    REQUIRE(s.prep.size() == 1);
    REQUIRE(s.prep[0].drives.size() == 2);
    CHECK(s.prep[0].drives[0].site == kD1);
    CHECK(s.prep[0].drives[1].site == kD2);
    CHECK(std::abs(s.prep[0].drives[0].angle_rad - kPi / 2.0) < kTol);
  }

  SECTION("ground state has no prep pulses") {
    ScheduleSpec spec;
    spec.initial_state = "ground";
    spec.sequence = {Basis::ZZ};
    const ExperimentSchedule s = compile_experiment(spec, t);
    CHECK(s.prep.empty());
  }

  SECTION("mixed data qubits with ancilla in the ground state") {
    ScheduleSpec spec;
    spec.initial_state = "mixed_data";
    spec.sequence = {Basis::ZZ};
    const ExperimentSchedule s = compile_experiment(spec, t);
    CHECK(std::abs(s.initial.trace().real() - 1.0) < kTol);
    const Matrix anc = partial_trace(s.initial, {kAncilla}, 3);
    CHECK(std::abs(anc(0, 0).real() - 1.0) < kTol);
    const Matrix data = partial_trace(s.initial, {kD1, kD2}, 3);
    CHECK(data.isApprox(0.25 * identity(4), kTol));
  }

  SECTION("unknown initial state and empty sequences are rejected") {
    ScheduleSpec spec;
    spec.initial_state = "bogus";
    spec.sequence = {Basis::ZZ};
    CHECK_THROWS_AS(compile_experiment(spec, t), std::invalid_argument);

    spec.initial_state = "ground";
    spec.sequence = {};
    CHECK_THROWS_AS(compile_experiment(spec, t), std::invalid_argument);
  }
}

TEST_CASE("sequence construction helpers") {
  const auto zz = make_sequence("zz_only", 3);
  REQUIRE(zz.size() == 3);
  for (Basis b : zz) CHECK(b == Basis::ZZ);

  const auto alt = make_sequence("alternating", 4);
  REQUIRE(alt.size() == 4);
  CHECK(alt[0] == Basis::ZZ);
  CHECK(alt[1] == Basis::XX);
  CHECK(alt[2] == Basis::ZZ);
  CHECK(alt[3] == Basis::XX);

  CHECK_THROWS_AS(make_sequence("zz_only", 0), std::invalid_argument);
  CHECK_THROWS_AS(make_sequence("sideways", 2), std::invalid_argument);
}

TEST_CASE("name parsing round-trips") {
  CHECK(parse_mode("feedback") == Mode::Feedback);
  CHECK(parse_mode("pfu") == Mode::Pfu);
  CHECK_THROWS_AS(parse_mode("manual"), std::invalid_argument);

  CHECK(parse_basis("ZZ") == Basis::ZZ);
  CHECK(parse_basis("xx") == Basis::XX);
  CHECK_THROWS_AS(parse_basis("YY"), std::invalid_argument);

  CHECK(parse_target("phi_plus") == Target::PhiPlus);
  CHECK(parse_target("psi_plus") == Target::PsiPlus);
  CHECK_THROWS_AS(parse_target("ghz"), std::invalid_argument);
}

TEST_CASE("schedule listing names every segment with absolute times") {
  ScheduleSpec spec;
  spec.sequence = {Basis::ZZ, Basis::XX};
  const ExperimentSchedule s = compile_experiment(spec, Timing{});
  const std::string text = dump_schedule(s);
  CHECK(text.find("prep:") != std::string::npos);
  CHECK(text.find("round 1 (ZZ, feedback)") != std::string::npos);
  CHECK(text.find("round 2 (XX, feedback)") != std::string::npos);
  CHECK(text.find("cz[d1,a]") != std::string::npos);
  CHECK(text.find("cz[a,d2]") != std::string::npos);
  CHECK(text.find("measure[a]") != std::string::npos);
  CHECK(text.find("echo[x180:d1,d2]") != std::string::npos);
}
