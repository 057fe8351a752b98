#pragma once
// Lindblad propagation engine.  Each schedule segment has a constant
// Hamiltonian, so the channel is a single matrix exponential of the
// vectorized Liouvillian (column stacking), cached per distinct segment
// content.  Measurements are minimal-disturbance POVM branchings.

#include "paritysim/device.hpp"
#include "paritysim/schedule.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cstdio>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace paritysim {

// ---------------------------------------------------------------------------
// Liouvillian and uncached propagation (any dimension)
// ---------------------------------------------------------------------------

// Column-stacking convention: vec(A rho B) = (B^T (x) A) vec(rho), so
//   d/dt vec(rho) = L vec(rho),
//   L = -i (I (x) H - H^T (x) I)
//       + sum_c [ conj(c) (x) c - 1/2 I (x) c^dag c - 1/2 (c^dag c)^T (x) I ].
inline Matrix liouvillian(const Matrix& h, const std::vector<Matrix>& collapse) {
  const Eigen::Index d = h.rows();
  if (h.cols() != d) throw std::invalid_argument("liouvillian: Hamiltonian must be square");
  const Matrix id = identity(d);
  Matrix l = -kI * (kron(id, h) - kron(h.transpose(), id));
  for (const auto& c : collapse) {
    if (c.rows() != d || c.cols() != d)
      throw std::invalid_argument("liouvillian: collapse operator dimension mismatch");
    const Matrix cdc = c.adjoint() * c;
    l += kron(c.conjugate(), c) -
         0.5 * (kron(id, cdc) + kron(cdc.transpose(), id));
  }
  return l;
}

// exp(L t) applied to rho; no caching, any dimension.  Used for cross-checks
// against closed-form single-qubit decay laws.
inline Matrix propagate_exact(const Matrix& rho, const Matrix& h,
                              const std::vector<Matrix>& collapse, double t_ns) {
  if (rho.rows() != h.rows() || rho.cols() != h.rows())
    throw std::invalid_argument("propagate_exact: state/Hamiltonian dimension mismatch");
  const Matrix channel = (liouvillian(h, collapse) * t_ns).exp();
  return unvec(channel * vec(rho), rho.rows());
}

// rho -> U rho U^dag with a unitarity check.
inline Matrix apply_unitary(const Matrix& rho, const Matrix& u, double tol = 1e-9) {
  if (u.rows() != rho.rows() || u.cols() != rho.cols())
    throw std::invalid_argument("apply_unitary: dimension mismatch");
  if (!is_unitary(u, tol)) throw std::invalid_argument("apply_unitary: matrix is not unitary");
  return u * rho * u.adjoint();
}

// ---------------------------------------------------------------------------
// Measurement
// ---------------------------------------------------------------------------

struct MeasurementSplit {
  double p_plus = 0.0;
  double p_minus = 0.0;
  Matrix rho_plus;   // normalized post-measurement state, zero matrix if branch is degenerate
  Matrix rho_minus;
};

inline constexpr double kDegenerateBranch = 1e-12;

inline MeasurementSplit measure_ancilla(const Matrix& rho, const MeasurementModel& povm) {
  if (rho.rows() != povm.m_plus.rows() || rho.cols() != povm.m_plus.cols())
    throw std::invalid_argument("measure_ancilla: state/POVM dimension mismatch");
  MeasurementSplit out;
  const Matrix num_plus = povm.m_plus * rho * povm.m_plus.adjoint();
  const Matrix num_minus = povm.m_minus * rho * povm.m_minus.adjoint();
  out.p_plus = num_plus.trace().real();
  out.p_minus = num_minus.trace().real();
  if (std::abs(out.p_plus + out.p_minus - rho.trace().real()) > 1e-9)
    throw std::runtime_error("measure_ancilla: POVM branch probabilities do not sum to the trace");
  out.rho_plus = out.p_plus > kDegenerateBranch ? Matrix(num_plus / out.p_plus)
                                                : Matrix(Matrix::Zero(rho.rows(), rho.cols()));
  out.rho_minus = out.p_minus > kDegenerateBranch ? Matrix(num_minus / out.p_minus)
                                                  : Matrix(Matrix::Zero(rho.rows(), rho.cols()));
  return out;
}

// ---------------------------------------------------------------------------
// Branches and Pauli frames
// ---------------------------------------------------------------------------

// Pending software correction on D2: X component tracks the last ZZ outcome,
// Z component the last XX outcome.
struct Frame {
  bool x = false;
  bool z = false;
  bool operator==(const Frame&) const = default;
};

struct Branch {
  double weight = 1.0;
  Matrix rho;                // 8x8
  Frame frame{};
  std::vector<int> record;   // outcome history while the branch is unmerged
};

// Correction unitary on the two-qubit data register (D1, D2).
inline Matrix frame_correction(const Frame& f) {
  Matrix c = identity(4);
  if (f.x) c = embed_single(pauli('X'), 1, 2) * c;
  if (f.z) c = embed_single(pauli('Z'), 1, 2) * c;
  return c;
}

// Weighted recombination into an unconditional state.  All branches must
// carry the same frame; weights must sum to one.
inline Matrix recombine(const std::vector<Branch>& branches) {
  if (branches.empty()) throw std::invalid_argument("recombine: no branches");
  double total = 0.0;
  Matrix rho = Matrix::Zero(branches[0].rho.rows(), branches[0].rho.cols());
  for (const auto& b : branches) {
    if (!(b.frame == branches[0].frame))
      throw std::invalid_argument("recombine: branches carry different Pauli frames");
    total += b.weight;
    rho += b.weight * b.rho;
  }
  if (std::abs(total - 1.0) > 1e-9)
    throw std::invalid_argument("recombine: branch weights do not sum to 1");
  return rho;
}

// Merge branches sharing a frame (at most four classes survive).
inline std::vector<Branch> merge_by_frame(const std::vector<Branch>& branches) {
  std::vector<Branch> out;
  for (const auto& b : branches) {
    bool merged = false;
    for (auto& m : out) {
      if (m.frame == b.frame) {
        m.rho = (m.weight * m.rho + b.weight * b.rho) / (m.weight + b.weight);
        m.weight += b.weight;
        m.record.clear();  // merged branches no longer have a single history
        merged = true;
        break;
      }
    }
    if (!merged) out.push_back(b);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Cached segment propagation
// ---------------------------------------------------------------------------

class Propagator {
 public:
  explicit Propagator(DeviceModel model, bool check_positivity = false)
      : model_(std::move(model)), check_positivity_(check_positivity) {}

  const DeviceModel& model() const { return model_; }

  // Control Hamiltonian of a segment (residual ZZ coupling not included).
  Matrix control_hamiltonian(const Segment& s) const {
    Matrix h = Matrix::Zero(kDim, kDim);
    switch (s.kind) {
      case SegmentKind::Rotation:
        for (const auto& d : s.drives) {
          if (!(s.duration_ns > 0.0))
            throw std::invalid_argument("engine: driven segment needs positive duration");
          const char axis = d.axis == Axis::X ? 'X' : 'Y';
          // amplitude * sigma/2 with amplitude = angle / duration
          h += (d.angle_rad / s.duration_ns) *
               embed_single(0.5 * pauli(axis), d.site, kNumQubits);
        }
        return h;
      case SegmentKind::Cz:
        h = (kPi / s.duration_ns) * two_excitation_projector(s.cz_a, s.cz_b, kNumQubits);
        return h;
      case SegmentKind::Idle:
        return h;
      default:
        throw std::invalid_argument("engine: segment kind has no control Hamiltonian");
    }
  }

  // Residual coupling seen by a segment.  Driven windows (rotations, CZ
  // pulses) are tuned up with the coupling running, so its deterministic
  // effect there is already folded into the calibrated gate action; the
  // two-qubit ZZ term acts as an error only while nothing is driven.
  const Matrix& coupling_hamiltonian(const Segment& s) const {
    static const Matrix zero = Matrix::Zero(kDim, kDim);
    return s.kind == SegmentKind::Idle ? model_.coupling_idle : zero;
  }

  // Channel matrix exp(L t) for a timed segment, cached by content.
  const Matrix& segment_propagator(const Segment& s) {
    const std::string key = cache_key(s);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    const Matrix h = control_hamiltonian(s) + coupling_hamiltonian(s);
    std::vector<Matrix> collapse = model_.collapse;
    if (s.readout_window)
      collapse.insert(collapse.end(), model_.readout_collapse.begin(),
                      model_.readout_collapse.end());
    Matrix channel = (liouvillian(h, collapse) * s.duration_ns).exp();
    return cache_.emplace(key, std::move(channel)).first->second;
  }

  // Propagate a state through one Rotation/Cz/Idle/Unitary segment.
  Matrix apply(const Matrix& rho, const Segment& s) {
    Matrix out;
    if (s.kind == SegmentKind::Unitary) {
      out = apply_unitary(rho, s.unitary);
    } else if (s.kind == SegmentKind::Measure || s.kind == SegmentKind::Conditional) {
      throw std::invalid_argument("engine: measurement/conditional segments need branch context");
    } else if (s.duration_ns == 0.0) {
      if (s.kind == SegmentKind::Rotation && !s.drives.empty())
        throw std::invalid_argument("engine: driven segment needs positive duration");
      out = rho;
    } else {
      out = unvec(segment_propagator(s) * vec(rho), rho.rows());
    }
    check_state(rho, out, s);
    return out;
  }

  std::size_t cache_size() const { return cache_.size(); }

 private:
  std::string cache_key(const Segment& s) const {
    char buf[96];
    std::string key;
    std::snprintf(buf, sizeof(buf), "k%d|t%.17g|w%d", static_cast<int>(s.kind), s.duration_ns,
                  s.readout_window ? 1 : 0);
    key = buf;
    for (const auto& d : s.drives) {
      std::snprintf(buf, sizeof(buf), "|d%d%c%.17g", d.site, d.axis == Axis::X ? 'x' : 'y',
                    d.angle_rad);
      key += buf;
    }
    if (s.kind == SegmentKind::Cz) {
      std::snprintf(buf, sizeof(buf), "|cz%d%d", s.cz_a, s.cz_b);
      key += buf;
    }
    return key;
  }

  void check_state(const Matrix& before, const Matrix& after, const Segment& s) const {
    if (!after.allFinite())
      throw std::runtime_error("engine: non-finite state after segment '" + s.label + "'");
    if (std::abs(after.trace().real() - before.trace().real()) > 1e-9 ||
        std::abs(after.trace().imag()) > 1e-9)
      throw std::runtime_error("engine: trace not preserved across segment '" + s.label + "'");
    if (check_positivity_ && min_eigenvalue(0.5 * (after + after.adjoint())) < -1e-8)
      throw std::runtime_error("engine: negative eigenvalue after segment '" + s.label + "'");
  }

  DeviceModel model_;
  bool check_positivity_;
  std::unordered_map<std::string, Matrix> cache_;
};

}  // namespace paritysim
