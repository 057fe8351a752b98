#pragma once
// Pulse-schedule compilation: piecewise-constant segments implementing
// repeated ancilla-based ZZ/XX parity checks on the D1 (x) A (x) D2 register.
//
// A parity round is: ancilla basis rotation (+ data basis change for XX),
// buffered CZ pulses to both data qubits, inverse rotations, ancilla
// measurement, feedback delay with CPMG decoupling on the data qubits, and a
// conditional single-qubit-gate slot (data correction and/or ancilla reset).

#include "paritysim/device.hpp"
#include "paritysim/qops.hpp"

#include <cmath>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace paritysim {

enum class Axis { X, Y };
enum class Basis { ZZ, XX };
enum class Mode { Feedback, Pfu };
enum class Target { PhiPlus, PsiPlus };

inline std::string to_string(Axis a) { return a == Axis::X ? "x" : "y"; }
inline std::string to_string(Basis b) { return b == Basis::ZZ ? "ZZ" : "XX"; }
inline std::string to_string(Mode m) { return m == Mode::Feedback ? "feedback" : "pfu"; }
inline std::string to_string(Target t) { return t == Target::PhiPlus ? "phi_plus" : "psi_plus"; }

inline Mode parse_mode(const std::string& s) {
  if (s == "feedback") return Mode::Feedback;
  if (s == "pfu") return Mode::Pfu;
  throw std::invalid_argument("mode: expected 'feedback' or 'pfu', got '" + s + "'");
}

inline Basis parse_basis(const std::string& s) {
  if (s == "ZZ" || s == "zz") return Basis::ZZ;
  if (s == "XX" || s == "xx") return Basis::XX;
  throw std::invalid_argument("basis: expected 'ZZ' or 'XX', got '" + s + "'");
}

inline Target parse_target(const std::string& s) {
  if (s == "phi_plus") return Target::PhiPlus;
  if (s == "psi_plus") return Target::PsiPlus;
  throw std::invalid_argument("target: expected 'phi_plus' or 'psi_plus', got '" + s + "'");
}

inline std::string site_name(int site) {
  switch (site) {
    case kD1: return "d1";
    case kAncilla: return "a";
    case kD2: return "d2";
    default: throw std::invalid_argument("site_name: bad site index");
  }
}

// ---------------------------------------------------------------------------
// Timing
// ---------------------------------------------------------------------------

struct Timing {
  double single_qubit_gate_ns = 50.0;
  double flux_pulse_d1a_ns = 96.0;
  double flux_pulse_ad2_ns = 105.0;
  double buffer_ns = 40.0;
  double readout_pulse_ns = 200.0;       // ancilla readout drive (cross-dephasing window)
  double readout_integration_ns = 400.0;
  double electronic_delay_ns = 600.0;
  int cpmg_count = 4;
  bool cpmg_instantaneous = false;

  // Feedback delay between the measurement point and the conditional slot.
  double feedback_delay_ns() const { return readout_integration_ns + electronic_delay_ns; }

  void validate() const {
    auto pos = [](double v, const char* name) {
      if (!(v > 0.0) || !std::isfinite(v))
        throw std::invalid_argument(std::string("timing: ") + name + " must be positive");
    };
    auto nneg = [](double v, const char* name) {
      if (!(v >= 0.0) || !std::isfinite(v))
        throw std::invalid_argument(std::string("timing: ") + name + " must be >= 0");
    };
    pos(single_qubit_gate_ns, "single_qubit_gate_ns");
    pos(flux_pulse_d1a_ns, "flux_pulse_d1a_ns");
    pos(flux_pulse_ad2_ns, "flux_pulse_ad2_ns");
    pos(buffer_ns, "buffer_ns");
    // The feedback delay may be collapsed to zero for latency studies.
    nneg(readout_pulse_ns, "readout_pulse_ns");
    nneg(readout_integration_ns, "readout_integration_ns");
    nneg(electronic_delay_ns, "electronic_delay_ns");
    if (cpmg_count < 0) throw std::invalid_argument("timing: cpmg_count must be >= 0");
    if (cpmg_count > 0 && !cpmg_instantaneous) {
      const double td = feedback_delay_ns();
      const double half = single_qubit_gate_ns / 2.0;
      double prev_end = 0.0;
      for (int k = 0; k < cpmg_count; ++k) {
        const double center = td * (2.0 * k + 1.0) / (2.0 * cpmg_count);
        if (center - half < prev_end - 1e-9 || center + half > td + 1e-9)
          throw std::invalid_argument("timing: CPMG pulses do not fit in the feedback delay");
        prev_end = center + half;
      }
    }
  }
};

// ---------------------------------------------------------------------------
// Segments
// ---------------------------------------------------------------------------

enum class SegmentKind { Rotation, Cz, Idle, Unitary, Measure, Conditional };

struct Drive {
  int site;
  Axis axis;
  double angle_rad;
};

struct Segment {
  SegmentKind kind = SegmentKind::Idle;
  double duration_ns = 0.0;
  std::vector<Drive> drives;          // Rotation
  int cz_a = -1, cz_b = -1;           // Cz
  Matrix unitary;                     // Unitary (instantaneous, noise-free)
  bool readout_window = false;        // ancilla readout pulse active
  std::string label;

  // Conditional slot: drives applied in the -1 / +1 outcome branches, with
  // optional instantaneous unitaries (virtual-Z corrections) applied first.
  std::vector<Drive> on_minus, on_plus;
  Matrix pre_minus, pre_plus;  // size 0 when absent
};

inline std::string drives_label(const std::vector<Drive>& drives) {
  std::ostringstream os;
  for (std::size_t i = 0; i < drives.size(); ++i) {
    if (i) os << ",";
    const double deg = drives[i].angle_rad * 180.0 / kPi;
    os << site_name(drives[i].site) << ":" << to_string(drives[i].axis)
       << (deg >= 0 ? "+" : "") << deg;
  }
  return os.str();
}

inline Segment make_idle(double t_ns, std::string label = "idle") {
  Segment s;
  s.kind = SegmentKind::Idle;
  s.duration_ns = t_ns;
  s.label = std::move(label);
  return s;
}

inline Segment make_rotation(std::vector<Drive> drives, double t_ns) {
  Segment s;
  s.kind = SegmentKind::Rotation;
  s.duration_ns = t_ns;
  s.drives = std::move(drives);
  s.label = "rot[" + drives_label(s.drives) + "]";
  return s;
}

inline Segment make_cz(int site_a, int site_b, double t_ns) {
  Segment s;
  s.kind = SegmentKind::Cz;
  s.duration_ns = t_ns;
  s.cz_a = site_a;
  s.cz_b = site_b;
  s.label = "cz[" + site_name(site_a) + "," + site_name(site_b) + "]";
  return s;
}

inline Segment make_unitary(Matrix u, std::string label) {
  Segment s;
  s.kind = SegmentKind::Unitary;
  s.unitary = std::move(u);
  s.label = std::move(label);
  return s;
}

inline Segment make_measure() {
  Segment s;
  s.kind = SegmentKind::Measure;
  s.label = "measure[a]";
  return s;
}

// ---------------------------------------------------------------------------
// Round compilation
// ---------------------------------------------------------------------------

struct Round {
  Basis basis = Basis::ZZ;
  Mode mode = Mode::Feedback;
  std::vector<Segment> segments;
  double duration_ns = 0.0;
};

namespace detail {

// Feedback delay decomposed into idle and CPMG pi-pulse segments, split at
// the end of the ancilla readout pulse so the extra readout-window collapse
// operators act on exactly that interval.
inline std::vector<Segment> delay_segments(const Timing& t) {
  const double td = t.feedback_delay_ns();
  struct Pulse { double start, end; };
  std::vector<Pulse> pulses;
  const double width = t.cpmg_instantaneous ? 0.0 : t.single_qubit_gate_ns;
  for (int k = 0; k < t.cpmg_count; ++k) {
    const double center = td * (2.0 * k + 1.0) / (2.0 * t.cpmg_count);
    pulses.push_back({center - width / 2.0, center + width / 2.0});
  }

  std::vector<Segment> out;
  auto push_idle = [&](double start, double end) {
    if (end - start < 1e-12) return;
    // Split idles at the readout-pulse boundary.
    if (start < t.readout_pulse_ns - 1e-12 && end > t.readout_pulse_ns + 1e-12) {
      Segment a = make_idle(t.readout_pulse_ns - start);
      a.readout_window = true;
      out.push_back(std::move(a));
      out.push_back(make_idle(end - t.readout_pulse_ns));
      return;
    }
    Segment s = make_idle(end - start);
    s.readout_window = end <= t.readout_pulse_ns + 1e-12;
    out.push_back(std::move(s));
  };

  const std::vector<Drive> echo = {{kD1, Axis::X, kPi}, {kD2, Axis::X, kPi}};
  double cursor = 0.0;
  for (const auto& p : pulses) {
    push_idle(cursor, p.start);
    if (t.cpmg_instantaneous) {
      Matrix u = embed_single((-kI) * pauli('X'), kD1, kNumQubits) *
                 embed_single((-kI) * pauli('X'), kD2, kNumQubits);
      out.push_back(make_unitary(std::move(u), "echo[x180:d1,d2]"));
    } else {
      Segment s = make_rotation(echo, width);
      s.readout_window = p.end <= t.readout_pulse_ns + 1e-12;
      s.label = "echo[x180:d1,d2]";
      out.push_back(std::move(s));
    }
    cursor = p.end;
  }
  push_idle(cursor, td);
  return out;
}

}  // namespace detail

// One parity-stabilization cycle.  The XX round changes the measurement basis
// of both data qubits with R_y(-pi/2) / R_y(+pi/2) pulses merged into the
// ancilla rotation segments (distinct qubits, same 50 ns slot), so both round
// types have identical duration.
inline Round compile_parity_round(Basis basis, Mode mode, const Timing& t,
                                  Target target = Target::PhiPlus) {
  t.validate();
  Round round;
  round.basis = basis;
  round.mode = mode;
  auto& seg = round.segments;

  std::vector<Drive> pre = {{kAncilla, Axis::Y, kPi / 2.0}};
  std::vector<Drive> post = {{kAncilla, Axis::Y, -kPi / 2.0}};
  if (basis == Basis::XX) {
    pre.push_back({kD1, Axis::Y, -kPi / 2.0});
    pre.push_back({kD2, Axis::Y, -kPi / 2.0});
    post.push_back({kD1, Axis::Y, kPi / 2.0});
    post.push_back({kD2, Axis::Y, kPi / 2.0});
  }

  seg.push_back(make_rotation(pre, t.single_qubit_gate_ns));
  seg.push_back(make_idle(t.buffer_ns, "buffer"));
  seg.push_back(make_cz(kD1, kAncilla, t.flux_pulse_d1a_ns));
  seg.push_back(make_idle(t.buffer_ns, "buffer"));
  seg.push_back(make_idle(t.buffer_ns, "buffer"));
  seg.push_back(make_cz(kAncilla, kD2, t.flux_pulse_ad2_ns));
  seg.push_back(make_idle(t.buffer_ns, "buffer"));
  seg.push_back(make_rotation(post, t.single_qubit_gate_ns));
  seg.push_back(make_measure());

  for (auto& s : detail::delay_segments(t)) seg.push_back(std::move(s));

  // Conditional slot.  The ancilla reset pulse always conditions on the
  // measured -1 outcome; the data correction conditions on the outcome that
  // signals "not in the target subspace" (for |Psi+> the ZZ condition flips).
  Segment cond;
  cond.kind = SegmentKind::Conditional;
  cond.duration_ns = t.single_qubit_gate_ns;
  cond.on_minus = {{kAncilla, Axis::X, kPi}};
  if (mode == Mode::Feedback) {
    const bool invert_zz = (basis == Basis::ZZ && target == Target::PsiPlus);
    if (basis == Basis::ZZ) {
      if (invert_zz)
        cond.on_plus.push_back({kD2, Axis::X, kPi});
      else
        cond.on_minus.push_back({kD2, Axis::X, kPi});
    } else {
      // XX correction: lab-frame Z flip of D2, realized as a virtual Z at the
      // start of the slot (zero duration).
      cond.pre_minus = embed_single(pauli('Z'), kD2, kNumQubits);
    }
  }
  cond.label = "cond[" + to_string(basis) + ":" + to_string(mode) + "]";
  seg.push_back(std::move(cond));

  for (const auto& s : round.segments) round.duration_ns += s.duration_ns;
  return round;
}

// ---------------------------------------------------------------------------
// Experiment compilation
// ---------------------------------------------------------------------------

struct ScheduleSpec {
  std::vector<Basis> sequence;                 // one entry per round
  Mode mode = Mode::Feedback;
  Target target = Target::PhiPlus;
  std::string initial_state = "plus_plus";     // plus_plus | ground | mixed_data
};

struct ExperimentSchedule {
  Matrix initial;              // 8x8 state before the prep segments
  std::vector<Segment> prep;
  std::vector<Round> rounds;
  Mode mode = Mode::Feedback;
  Target target = Target::PhiPlus;
};

inline ExperimentSchedule compile_experiment(const ScheduleSpec& spec, const Timing& t) {
  t.validate();
  ExperimentSchedule sched;
  sched.mode = spec.mode;
  sched.target = spec.target;

  const Vector ground = basis_state(kNumQubits, 0);
  if (spec.initial_state == "plus_plus") {
    sched.initial = projector(ground);
    sched.prep.push_back(make_rotation(
        {{kD1, Axis::Y, kPi / 2.0}, {kD2, Axis::Y, kPi / 2.0}}, t.single_qubit_gate_ns));
  } else if (spec.initial_state == "ground") {
    sched.initial = projector(ground);
  } else if (spec.initial_state == "mixed_data") {
    // Maximally mixed data qubits, ancilla in the ground state.
    Matrix anc = Matrix::Zero(2, 2);
    anc(0, 0) = 1.0;
    sched.initial = kron(kron(0.5 * identity(2), anc), 0.5 * identity(2));
  } else {
    throw std::invalid_argument("schedule: unknown initial_state '" + spec.initial_state + "'");
  }

  if (spec.sequence.empty())
    throw std::invalid_argument("schedule: experiment needs at least one round");
  for (Basis b : spec.sequence)
    sched.rounds.push_back(compile_parity_round(b, spec.mode, t, spec.target));
  return sched;
}

inline std::vector<Basis> make_sequence(const std::string& kind, int rounds) {
  if (rounds < 1) throw std::invalid_argument("schedule: rounds must be >= 1");
  std::vector<Basis> seq;
  seq.reserve(static_cast<std::size_t>(rounds));
  for (int k = 0; k < rounds; ++k) {
    if (kind == "zz_only")
      seq.push_back(Basis::ZZ);
    else if (kind == "alternating")
      seq.push_back(k % 2 == 0 ? Basis::ZZ : Basis::XX);
    else
      throw std::invalid_argument("schedule: unknown sequence kind '" + kind + "'");
  }
  return seq;
}

// Human-readable listing with absolute start/end times per segment.
inline std::string dump_schedule(const ExperimentSchedule& sched) {
  std::ostringstream os;
  double clock = 0.0;
  auto line = [&](const Segment& s) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "  [%9.1f, %9.1f) ns  %s\n", clock, clock + s.duration_ns,
                  s.label.c_str());
    os << buf;
    clock += s.duration_ns;
  };
  os << "prep:\n";
  if (sched.prep.empty()) os << "  (none)\n";
  for (const auto& s : sched.prep) line(s);
  for (std::size_t r = 0; r < sched.rounds.size(); ++r) {
    os << "round " << (r + 1) << " (" << to_string(sched.rounds[r].basis) << ", "
       << to_string(sched.rounds[r].mode) << "):\n";
    for (const auto& s : sched.rounds[r].segments) line(s);
  }
  return os.str();
}

}  // namespace paritysim
