#pragma once
// Device parameters and the physical noise/measurement model for the
// three-qubit register D1 (x) A (x) D2 (qubit indices 0, 1, 2).
//
// Units: times in ns at the model level (config accepts us for coherence
// times), Hamiltonian coefficients in rad/ns, couplings entered in kHz.

#include "paritysim/qops.hpp"

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace paritysim {

inline constexpr int kD1 = 0;
inline constexpr int kAncilla = 1;
inline constexpr int kD2 = 2;
inline constexpr int kNumQubits = 3;
inline constexpr Eigen::Index kDim = 8;

inline double deg_to_rad(double deg) { return deg * kPi / 180.0; }

// Angular frequency in rad/ns for a coupling quoted as j/2pi in kHz.
inline double khz_to_rad_per_ns(double j_khz) { return 2.0 * kPi * j_khz * 1e-6; }

struct QubitParams {
  double t1_us = 0.0;
  double t2_echo_us = 0.0;
  double t2_ramsey_us = 0.0;
  double assignment_prob = 1.0;  // P(correct readout assignment)
};

enum class T2Source { Echo, Ramsey };

// Ancilla single-shot readout probabilities P(outcome | prepared state); the
// raw calibration values need not sum to one per prepared state, so the POVM
// build renormalizes each column.
struct ReadoutProbs {
  double p0_given_0 = 0.994;
  double p1_given_0 = 0.0054;
  double p0_given_1 = 0.021;
  double p1_given_1 = 0.9795;
};

struct DeviceParams {
  QubitParams d1{19.7, 22.4, 12.5, 0.987};
  QubitParams a{13.7, 14.5, 11.7, 0.989};
  QubitParams d2{23.4, 15.0, 11.2, 0.991};
  T2Source t2_source = T2Source::Echo;

  double j_d1a_khz = 110.0;  // residual ZZ coupling D1-A
  double j_ad2_khz = 370.0;  // residual ZZ coupling A-D2

  ReadoutProbs readout{};

  // Deterministic phase kick on the data qubits induced by the ancilla
  // readout pulse, and its virtual-Z compensation.
  double stark_d1_deg = 33.4;
  double stark_d2_deg = 33.2;
  bool stark_compensation = true;
  double stark_overcorrection_deg = 0.0;  // residual phase left by compensation

  // Phase-flip probability on each data qubit per ancilla readout pulse
  // (measured to be small; off by default).
  double cross_dephasing_prob = 0.0;

  void validate() const;
};

namespace detail {

inline void check_positive(double v, const std::string& name) {
  if (!(v > 0.0) || !std::isfinite(v))
    throw std::invalid_argument("device: " + name + " must be positive and finite");
}

inline void check_probability(double v, const std::string& name) {
  if (!(v >= 0.0 && v <= 1.0))
    throw std::invalid_argument("device: " + name + " must lie in [0, 1]");
}

inline void check_qubit(const QubitParams& q, const std::string& name) {
  check_positive(q.t1_us, name + ".t1_us");
  check_positive(q.t2_echo_us, name + ".t2_echo_us");
  check_positive(q.t2_ramsey_us, name + ".t2_ramsey_us");
  if (q.t2_echo_us > 2.0 * q.t1_us + 1e-12)
    throw std::invalid_argument("device: " + name + ".t2_echo_us exceeds 2*t1_us");
  if (q.t2_ramsey_us > 2.0 * q.t1_us + 1e-12)
    throw std::invalid_argument("device: " + name + ".t2_ramsey_us exceeds 2*t1_us");
  check_probability(q.assignment_prob, name + ".assignment_prob");
}

}  // namespace detail

inline void DeviceParams::validate() const {
  detail::check_qubit(d1, "d1");
  detail::check_qubit(a, "a");
  detail::check_qubit(d2, "d2");
  if (!std::isfinite(j_d1a_khz) || !std::isfinite(j_ad2_khz))
    throw std::invalid_argument("device: coupling rates must be finite");
  detail::check_probability(readout.p0_given_0, "readout.p0_given_0");
  detail::check_probability(readout.p1_given_0, "readout.p1_given_0");
  detail::check_probability(readout.p0_given_1, "readout.p0_given_1");
  detail::check_probability(readout.p1_given_1, "readout.p1_given_1");
  if (readout.p0_given_0 + readout.p1_given_0 <= 0.0 ||
      readout.p0_given_1 + readout.p1_given_1 <= 0.0)
    throw std::invalid_argument("device: readout probabilities for a prepared state sum to zero");
  if (!std::isfinite(stark_d1_deg) || !std::isfinite(stark_d2_deg) ||
      !std::isfinite(stark_overcorrection_deg))
    throw std::invalid_argument("device: stark phases must be finite");
  if (!(cross_dephasing_prob >= 0.0 && cross_dephasing_prob < 0.5))
    throw std::invalid_argument("device: cross_dephasing_prob must lie in [0, 0.5)");
}

// Minimal-disturbance ancilla measurement: Kraus pair diagonal in the ancilla
// basis.  Outcome +1 <-> ancilla reported in |0> <-> even parity.
struct MeasurementModel {
  Matrix m_plus;   // outcome +1
  Matrix m_minus;  // outcome -1
};

inline MeasurementModel build_povm(const ReadoutProbs& r) {
  const double s0 = r.p0_given_0 + r.p1_given_0;
  const double s1 = r.p0_given_1 + r.p1_given_1;
  Matrix k_plus(2, 2), k_minus(2, 2);
  k_plus << std::sqrt(r.p0_given_0 / s0), 0, 0, std::sqrt(r.p0_given_1 / s1);
  k_minus << std::sqrt(r.p1_given_0 / s0), 0, 0, std::sqrt(r.p1_given_1 / s1);
  return {embed_single(k_plus, kAncilla, kNumQubits),
          embed_single(k_minus, kAncilla, kNumQubits)};
}

// Everything the propagation engine needs, in operator form.
struct DeviceModel {
  std::vector<Matrix> collapse;          // always-on collapse operators (8x8)
  std::vector<Matrix> readout_collapse;  // extra collapse during the ancilla readout pulse
  Matrix h_zz;                           // bare residual coupling, |11><11| form (8x8)
  // Residual coupling in the calibrated frame: deterministic single-qubit Z
  // rates are absorbed into the qubit frequency definitions and the drive
  // phases track them, and tune-ups fold the conditional phase accrued during
  // driven windows into the gate angles themselves.  What survives is the
  // two-qubit ZZ part, acting whenever nothing is driven.
  Matrix coupling_idle;
  MeasurementModel povm;
  Matrix post_measurement_unitary;       // net Stark kick applied right after the POVM
  std::array<Eigen::Matrix2d, 3> assignment;  // row-stochastic, row = true state

  Eigen::MatrixXd assignment3() const {
    Eigen::MatrixXd out = Eigen::MatrixXd::Ones(1, 1);
    for (const auto& a : assignment) {
      Eigen::MatrixXd next(out.rows() * 2, out.cols() * 2);
      for (Eigen::Index i = 0; i < out.rows(); ++i)
        for (Eigen::Index j = 0; j < out.cols(); ++j)
          next.block(i * 2, j * 2, 2, 2) = out(i, j) * a;
      out = next;
    }
    return out;
  }

  static DeviceModel from_params(const DeviceParams& p, double readout_window_ns);
  static DeviceModel ideal();
};

namespace detail {

// exp(-i phi Z / 2)
inline Matrix rz(double phi) {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 0) = std::exp(-kI * (phi / 2.0));
  m(1, 1) = std::exp(kI * (phi / 2.0));
  return m;
}

inline void add_qubit_collapse(std::vector<Matrix>& out, const QubitParams& q, int site,
                               T2Source source) {
  const double t1_ns = q.t1_us * 1000.0;
  const double t2_ns = (source == T2Source::Echo ? q.t2_echo_us : q.t2_ramsey_us) * 1000.0;
  Matrix sigma_minus(2, 2);
  sigma_minus << 0, 1, 0, 0;  // |0><1|
  out.push_back(std::sqrt(1.0 / t1_ns) * embed_single(sigma_minus, site, kNumQubits));
  // Pure dephasing rate: coherence decays as exp(-t/T2) overall, with the T1
  // channel contributing exp(-t/2T1).
  const double gamma_phi = 0.5 * (1.0 / t2_ns - 1.0 / (2.0 * t1_ns));
  if (gamma_phi < -1e-15)
    throw std::invalid_argument("device: negative pure-dephasing rate (T2 > 2*T1)");
  if (gamma_phi > 0.0)
    out.push_back(std::sqrt(gamma_phi) * embed_single(pauli('Z'), site, kNumQubits));
}

}  // namespace detail

inline DeviceModel DeviceModel::from_params(const DeviceParams& p, double readout_window_ns) {
  p.validate();
  DeviceModel m;

  detail::add_qubit_collapse(m.collapse, p.d1, kD1, p.t2_source);
  detail::add_qubit_collapse(m.collapse, p.a, kAncilla, p.t2_source);
  detail::add_qubit_collapse(m.collapse, p.d2, kD2, p.t2_source);

  m.h_zz = khz_to_rad_per_ns(p.j_d1a_khz) * two_excitation_projector(kD1, kAncilla, kNumQubits) +
           khz_to_rad_per_ns(p.j_ad2_khz) * two_excitation_projector(kAncilla, kD2, kNumQubits);
  m.coupling_idle = (khz_to_rad_per_ns(p.j_d1a_khz) / 4.0) * pauli_string("ZZI") +
                    (khz_to_rad_per_ns(p.j_ad2_khz) / 4.0) * pauli_string("IZZ");

  if (p.cross_dephasing_prob > 0.0) {
    if (!(readout_window_ns > 0.0))
      throw std::invalid_argument("device: cross dephasing requires a positive readout window");
    // Phase-flip probability q over the window: coherence factor 1 - 2q.
    const double gamma = -std::log(1.0 - 2.0 * p.cross_dephasing_prob) / (2.0 * readout_window_ns);
    m.readout_collapse.push_back(std::sqrt(gamma) * embed_single(pauli('Z'), kD1, kNumQubits));
    m.readout_collapse.push_back(std::sqrt(gamma) * embed_single(pauli('Z'), kD2, kNumQubits));
  }

  m.povm = build_povm(p.readout);

  const double phi1 = deg_to_rad(p.stark_d1_deg);
  const double phi2 = deg_to_rad(p.stark_d2_deg);
  const double net1 = p.stark_compensation ? -deg_to_rad(p.stark_overcorrection_deg) : phi1;
  const double net2 = p.stark_compensation ? -deg_to_rad(p.stark_overcorrection_deg) : phi2;
  m.post_measurement_unitary = embed_single(detail::rz(net1), kD1, kNumQubits) *
                               embed_single(detail::rz(net2), kD2, kNumQubits);

  const auto confusion = [](double prob) {
    Eigen::Matrix2d a;
    a << prob, 1.0 - prob, 1.0 - prob, prob;
    return a;
  };
  m.assignment = {confusion(p.d1.assignment_prob), confusion(p.a.assignment_prob),
                  confusion(p.d2.assignment_prob)};
  return m;
}

inline DeviceModel DeviceModel::ideal() {
  DeviceModel m;
  m.h_zz = Matrix::Zero(kDim, kDim);
  m.coupling_idle = Matrix::Zero(kDim, kDim);
  ReadoutProbs perfect{1.0, 0.0, 0.0, 1.0};
  m.povm = build_povm(perfect);
  m.post_measurement_unitary = identity(kDim);
  m.assignment = {Eigen::Matrix2d::Identity(), Eigen::Matrix2d::Identity(),
                  Eigen::Matrix2d::Identity()};
  return m;
}

}  // namespace paritysim
