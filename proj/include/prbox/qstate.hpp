// Complex linear algebra over systems of spin-1/2 particles: pure states,
// tensor products, local operators and projectors, measurement directions,
// the Bell basis and the Schmidt decomposition.
//
// Conventions, fixed project-wide:
//   * A state over n particles stores 2^n amplitudes. Bit k of the index,
//     counted with particle 1 as the most significant bit, encodes particle
//     k's outcome: bit value 0 = up, 1 = down.
//   * "up" along a direction (omega, phi) is the first column of the
//     direction unitary, "down" the second.
//   * States are rays: comparisons that should ignore a global phase go
//     through phase_aligned_distance.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace prbox {

using cxd = std::complex<double>;

inline constexpr double pi = 3.14159265358979323846;
inline constexpr double two_pi = 2.0 * pi;

// Tolerances used by constructors and invariant checks.
inline constexpr double kNormTol = 1e-9;     // acceptance when ingesting states
inline constexpr double kUnitaryTol = 1e-12;
inline constexpr double kFamilyTol = 1e-12;  // projector family completeness

inline double wrap_angle(double a) {
  double w = std::fmod(a, two_pi);
  if (w < 0) w += two_pi;
  // fmod can return two_pi when a is a tiny negative number
  if (w >= two_pi) w -= two_pi;
  return w + 0.0;  // avoid -0
}

// wrap-aware distance between phases, in [0, pi]
inline double phase_distance(double a, double b) {
  double d = wrap_angle(a - b);
  return d > pi ? two_pi - d : d;
}

// A local measurement direction, parameterized by the polar/azimuthal pair
// of the spin rotation that defines it.
struct MeasurementDirection {
  double omega = 0.0;
  double phi = 0.0;

  MeasurementDirection() = default;
  MeasurementDirection(double omega_, double phi_) {
    if (!std::isfinite(omega_) || !std::isfinite(phi_))
      throw std::invalid_argument("MeasurementDirection: angles must be finite");
    omega = wrap_angle(omega_);
    phi = wrap_angle(phi_);
  }

  static MeasurementDirection x() { return {pi / 2, 0.0}; }
  static MeasurementDirection y() { return {pi / 2, pi / 2}; }
  static MeasurementDirection z() { return {0.0, 0.0}; }

  // Same projector pair with omega folded into [0, pi]; used when reporting
  // optimizer output so equivalent optima serialize identically.
  MeasurementDirection folded() const {
    if (omega <= pi) return *this;
    return {two_pi - omega, phi + pi};
  }
};

// 2x2 unitary, validated at construction.
class Unitary2 {
 public:
  Unitary2() : m_{cxd(1), cxd(0), cxd(0), cxd(1)} {}

  Unitary2(cxd a, cxd b, cxd c, cxd d) : m_{a, b, c, d} { check(); }

  static Unitary2 identity() { return {}; }
  static Unitary2 pauli_x() { return {cxd(0), cxd(1), cxd(1), cxd(0)}; }
  static Unitary2 pauli_z() { return {cxd(1), cxd(0), cxd(0), cxd(-1)}; }

  cxd operator()(int r, int c) const { return m_[2 * r + c]; }

  std::array<cxd, 2> column(int c) const { return {m_[c], m_[2 + c]}; }

  Unitary2 adjoint() const {
    return {std::conj(m_[0]), std::conj(m_[2]), std::conj(m_[1]),
            std::conj(m_[3])};
  }

  friend Unitary2 operator*(const Unitary2& a, const Unitary2& b) {
    return {a.m_[0] * b.m_[0] + a.m_[1] * b.m_[2],
            a.m_[0] * b.m_[1] + a.m_[1] * b.m_[3],
            a.m_[2] * b.m_[0] + a.m_[3] * b.m_[2],
            a.m_[2] * b.m_[1] + a.m_[3] * b.m_[3]};
  }

  std::array<cxd, 2> apply(std::span<const cxd, 2> v) const {
    return {m_[0] * v[0] + m_[1] * v[1], m_[2] * v[0] + m_[3] * v[1]};
  }

 private:
  void check() const {
    // U U^dagger = I
    cxd g00 = m_[0] * std::conj(m_[0]) + m_[1] * std::conj(m_[1]);
    cxd g01 = m_[0] * std::conj(m_[2]) + m_[1] * std::conj(m_[3]);
    cxd g11 = m_[2] * std::conj(m_[2]) + m_[3] * std::conj(m_[3]);
    if (std::abs(g00 - 1.0) > kUnitaryTol || std::abs(g11 - 1.0) > kUnitaryTol ||
        std::abs(g01) > kUnitaryTol)
      throw std::invalid_argument("Unitary2: matrix is not unitary");
  }

  std::array<cxd, 4> m_;
};

// Spin rotation attached to a measurement direction:
//   [ cos(w/2)            -e^{-i phi} sin(w/2) ]
//   [ e^{i phi} sin(w/2)   cos(w/2)            ]
// Its first column is the "up" spinor along the direction, the second the
// "down" spinor.
inline Unitary2 direction_unitary(const MeasurementDirection& d) {
  double c = std::cos(d.omega / 2), s = std::sin(d.omega / 2);
  cxd e = std::polar(1.0, d.phi);
  return {cxd(c), -std::conj(e) * s, e * s, cxd(c)};
}

enum class Spin : int { up = 0, down = 1 };

inline std::array<cxd, 2> spin_spinor(const MeasurementDirection& d, Spin s) {
  return direction_unitary(d).column(static_cast<int>(s));
}

// Normalized pure state over num_parties spin-1/2 particles.
class PureState {
 public:
  PureState(int num_parties, std::vector<cxd> amplitudes)
      : num_parties_(num_parties), amps_(std::move(amplitudes)) {
    if (num_parties_ < 1)
      throw std::invalid_argument("PureState: need at least one particle");
    if (num_parties_ > 16)
      throw std::invalid_argument("PureState: too many particles");
    if (amps_.size() != dim())
      throw std::invalid_argument("PureState: wrong amplitude count");
    double n = raw_norm();
    if (!std::isfinite(n) || std::abs(n - 1.0) > kNormTol)
      throw std::invalid_argument("PureState: amplitudes are not normalized");
    for (auto& a : amps_) a /= n;
  }

  static PureState basis_state(int num_parties, std::size_t index) {
    std::vector<cxd> a(std::size_t{1} << num_parties, cxd(0));
    if (index >= a.size())
      throw std::out_of_range("PureState: basis index out of range");
    a[index] = cxd(1);
    return PureState(num_parties, std::move(a));
  }

  // Single particle pointing along a direction.
  static PureState spin(const MeasurementDirection& d, Spin s) {
    auto v = spin_spinor(d, s);
    return PureState(1, {v[0], v[1]});
  }

  static PureState up() { return basis_state(1, 0); }
  static PureState down() { return basis_state(1, 1); }

  int num_parties() const { return num_parties_; }
  std::size_t dim() const { return std::size_t{1} << num_parties_; }
  const std::vector<cxd>& amplitudes() const { return amps_; }
  cxd operator[](std::size_t i) const { return amps_[i]; }

  // Outcome bit of particle k (1-based) inside basis index i.
  int outcome_bit(std::size_t i, int k) const {
    return static_cast<int>((i >> (num_parties_ - k)) & 1u);
  }

 private:
  double raw_norm() const {
    double s = 0;
    for (const auto& a : amps_) s += std::norm(a);
    return std::sqrt(s);
  }

  int num_parties_;
  std::vector<cxd> amps_;
};

inline cxd inner_product(const PureState& a, const PureState& b) {
  if (a.num_parties() != b.num_parties())
    throw std::invalid_argument("inner_product: particle counts differ");
  cxd s(0);
  for (std::size_t i = 0; i < a.dim(); ++i)
    s += std::conj(a[i]) * b[i];
  return s;
}

inline PureState tensor(const PureState& a, const PureState& b) {
  std::vector<cxd> out(a.dim() * b.dim());
  for (std::size_t i = 0; i < a.dim(); ++i)
    for (std::size_t j = 0; j < b.dim(); ++j)
      out[i * b.dim() + j] = a[i] * b[j];
  return PureState(a.num_parties() + b.num_parties(), std::move(out));
}

// Distance between two states as rays: align b to a with the best global
// phase, then take the largest amplitude difference.
inline double phase_aligned_distance(const PureState& a, const PureState& b) {
  cxd ov = inner_product(b, a);
  cxd phase = std::abs(ov) > 1e-300 ? ov / std::abs(ov) : cxd(1);
  double worst = 0;
  for (std::size_t i = 0; i < a.dim(); ++i)
    worst = std::max(worst, std::abs(a[i] - phase * b[i]));
  return worst;
}

inline bool equal_up_to_global_phase(const PureState& a, const PureState& b,
                                     double tol = 1e-10) {
  if (a.num_parties() != b.num_parties()) return false;
  return phase_aligned_distance(a, b) < tol;
}

namespace detail {

// Raw (possibly unnormalized) amplitude-vector helpers used by the
// probability chains. dim must be 2^n.

inline int party_shift(int num_parties, int party) {
  return num_parties - party;
}

// (|v><v| on particle k) tensor identity, applied to amps.
inline std::vector<cxd> project_party(const std::vector<cxd>& amps,
                                      int num_parties, int party,
                                      std::span<const cxd, 2> v) {
  int sh = party_shift(num_parties, party);
  std::size_t bit = std::size_t{1} << sh;
  std::vector<cxd> out(amps.size(), cxd(0));
  for (std::size_t i = 0; i < amps.size(); ++i) {
    if (i & bit) continue;
    std::size_t j = i | bit;
    cxd contracted = std::conj(v[0]) * amps[i] + std::conj(v[1]) * amps[j];
    out[i] = v[0] * contracted;
    out[j] = v[1] * contracted;
  }
  return out;
}

// (U on particle k) tensor identity, applied in place.
inline void apply_local_unitary(std::vector<cxd>& amps, int num_parties,
                                int party, const Unitary2& u) {
  int sh = party_shift(num_parties, party);
  std::size_t bit = std::size_t{1} << sh;
  for (std::size_t i = 0; i < amps.size(); ++i) {
    if (i & bit) continue;
    std::size_t j = i | bit;
    cxd a = amps[i], b = amps[j];
    amps[i] = u(0, 0) * a + u(0, 1) * b;
    amps[j] = u(1, 0) * a + u(1, 1) * b;
  }
}

inline cxd inner_raw(const std::vector<cxd>& bra_ket,
                     const std::vector<cxd>& ket) {
  cxd s(0);
  for (std::size_t i = 0; i < ket.size(); ++i)
    s += std::conj(bra_ket[i]) * ket[i];
  return s;
}

inline double norm_raw(const std::vector<cxd>& v) {
  double s = 0;
  for (const auto& a : v) s += std::norm(a);
  return std::sqrt(s);
}

}  // namespace detail

// Dense operator on the full 2^n-dimensional space. Everything here is at
// most 16x16, so no sparsity machinery.
class Operator {
 public:
  Operator(int num_parties, std::vector<cxd> entries)
      : num_parties_(num_parties), m_(std::move(entries)) {
    if (m_.size() != dim() * dim())
      throw std::invalid_argument("Operator: wrong entry count");
  }

  static Operator identity(int num_parties) {
    std::size_t d = std::size_t{1} << num_parties;
    std::vector<cxd> m(d * d, cxd(0));
    for (std::size_t i = 0; i < d; ++i) m[i * d + i] = cxd(1);
    return Operator(num_parties, std::move(m));
  }

  // |state><state| over the full space.
  static Operator projector(const PureState& s) {
    std::size_t d = s.dim();
    std::vector<cxd> m(d * d);
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j)
        m[i * d + j] = s[i] * std::conj(s[j]);
    return Operator(s.num_parties(), std::move(m));
  }

  int num_parties() const { return num_parties_; }
  std::size_t dim() const { return std::size_t{1} << num_parties_; }
  cxd operator()(std::size_t r, std::size_t c) const { return m_[r * dim() + c]; }
  cxd& at(std::size_t r, std::size_t c) { return m_[r * dim() + c]; }

  std::vector<cxd> apply(const std::vector<cxd>& v) const {
    std::size_t d = dim();
    std::vector<cxd> out(d, cxd(0));
    for (std::size_t r = 0; r < d; ++r) {
      cxd s(0);
      for (std::size_t c = 0; c < d; ++c) s += m_[r * d + c] * v[c];
      out[r] = s;
    }
    return out;
  }

  Operator& operator+=(const Operator& o) {
    for (std::size_t i = 0; i < m_.size(); ++i) m_[i] += o.m_[i];
    return *this;
  }

  double max_abs_diff(const Operator& o) const {
    double worst = 0;
    for (std::size_t i = 0; i < m_.size(); ++i)
      worst = std::max(worst, std::abs(m_[i] - o.m_[i]));
    return worst;
  }

 private:
  int num_parties_;
  std::vector<cxd> m_;
};

// Projector onto outcome s of a measurement along d on particle k, tensored
// with identity on the other particles.
inline Operator local_projector(int num_parties, int party,
                                const MeasurementDirection& d, Spin outcome) {
  if (party < 1 || party > num_parties)
    throw std::out_of_range("local_projector: particle index out of range");
  auto v = spin_spinor(d, outcome);
  std::size_t dim = std::size_t{1} << num_parties;
  int sh = detail::party_shift(num_parties, party);
  std::vector<cxd> m(dim * dim, cxd(0));
  for (std::size_t r = 0; r < dim; ++r) {
    int rb = static_cast<int>((r >> sh) & 1u);
    for (std::size_t c = 0; c < dim; ++c) {
      if ((r & ~(std::size_t{1} << sh)) != (c & ~(std::size_t{1} << sh)))
        continue;
      int cb = static_cast<int>((c >> sh) & 1u);
      m[r * dim + c] = v[rb] * std::conj(v[cb]);
    }
  }
  return Operator(num_parties, std::move(m));
}

// The four maximally entangled two-particle states in conventional signs:
// (uu+dd)/sqrt2, (uu-dd)/sqrt2, (ud+du)/sqrt2, (ud-du)/sqrt2.
inline std::array<PureState, 4> bell_basis() {
  const double r = 1.0 / std::sqrt(2.0);
  return {PureState(2, {r, 0, 0, r}), PureState(2, {r, 0, 0, -r}),
          PureState(2, {0, r, r, 0}), PureState(2, {0, r, -r, 0})};
}

inline const std::array<std::string, 4>& bell_labels() {
  static const std::array<std::string, 4> labels{"phi+", "phi-", "psi+",
                                                 "psi-"};
  return labels;
}

// Biorthogonal expansion of a two-particle state:
//   state ~ c0 |a0 b0> + c1 e^{i relative_phase} |a1 b1>
// with coefficients sorted descending and the column-k vectors of basis_a /
// basis_b forming the local Schmidt bases. Reconstruction holds up to a
// global phase. For a degenerate (maximally entangled) spectrum the basis is
// not unique; when the state is already diagonal in the computational basis
// that choice is returned.
struct SchmidtDecomposition {
  std::array<double, 2> coefficients;
  Unitary2 basis_a;
  Unitary2 basis_b;
  double relative_phase = 0.0;
};

namespace detail {

inline std::array<cxd, 2> normalize2(std::array<cxd, 2> v) {
  double n = std::sqrt(std::norm(v[0]) + std::norm(v[1]));
  if (n < 1e-300) throw std::runtime_error("normalize2: zero vector");
  return {v[0] / n, v[1] / n};
}

inline std::array<cxd, 2> orthogonal2(const std::array<cxd, 2>& v) {
  return {-std::conj(v[1]), std::conj(v[0])};
}

}  // namespace detail

inline SchmidtDecomposition schmidt_decompose(const PureState& s) {
  if (s.num_parties() != 2)
    throw std::invalid_argument("schmidt_decompose: need a two-particle state");
  // amplitude matrix M[a][b], a = particle-1 bit
  const cxd m00 = s[0], m01 = s[1], m10 = s[2], m11 = s[3];
  // H = M^dagger M, Hermitian PSD with unit trace
  double h00 = std::norm(m00) + std::norm(m10);
  double h11 = std::norm(m01) + std::norm(m11);
  cxd h01 = std::conj(m00) * m01 + std::conj(m10) * m11;

  double tr = h00 + h11;
  double disc = std::sqrt(std::max(0.0, (h00 - h11) * (h00 - h11) +
                                            4.0 * std::norm(h01)));
  double lam0 = std::clamp((tr + disc) / 2.0, 0.5, 1.0);

  // dominant right singular vector (particle-2 side, before conjugation)
  std::array<cxd, 2> v0;
  if (std::abs(h01) > 1e-15 * std::max(1.0, tr)) {
    v0 = detail::normalize2({h01, cxd(lam0 - h00)});
  } else if (h00 >= h11) {
    v0 = {cxd(1), cxd(0)};  // already diagonal; keep the alignment
  } else {
    v0 = {cxd(0), cxd(1)};
  }
  // in two dimensions the second singular pair is the orthogonal
  // complement; taking it directly avoids the cancellation-prone small
  // eigenvalue entirely
  std::array<cxd, 2> v1 = detail::orthogonal2(v0);

  // lam0 >= 1/2, so M v0 never degenerates
  std::array<cxd, 2> u0 =
      detail::normalize2({m00 * v0[0] + m01 * v0[1], m10 * v0[0] + m11 * v0[1]});
  std::array<cxd, 2> u1 = detail::orthogonal2(u0);

  // particle-2 Schmidt vectors are the conjugated right singular vectors
  std::array<cxd, 2> w0{std::conj(v0[0]), std::conj(v0[1])};
  std::array<cxd, 2> w1{std::conj(v1[0]), std::conj(v1[1])};

  // phases from the actual projections
  auto proj = [&](const std::array<cxd, 2>& ua,
                  const std::array<cxd, 2>& wb) -> cxd {
    cxd acc(0);
    const std::array<cxd, 4> amps{m00, m01, m10, m11};
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b)
        acc += std::conj(ua[a] * wb[b]) * amps[a * 2 + b];
    return acc;
  };
  cxd c0 = proj(u0, w0), c1 = proj(u1, w1);

  // absorb c0's phase into u0 so the leading term has a real coefficient
  if (std::abs(c0) > 1e-12) {
    cxd ph = c0 / std::abs(c0);
    u0 = {ph * u0[0], ph * u0[1]};
    c0 = std::abs(c0);
  }
  double rel = 0.0;
  if (std::abs(c1) > 1e-12 && std::abs(c0) > 1e-12)
    rel = wrap_angle(std::arg(c1) - std::arg(c0));

  Unitary2 ba(u0[0], u1[0], u0[1], u1[1]);
  Unitary2 bb(w0[0], w1[0], w0[1], w1[1]);
  return {{std::abs(c0), std::abs(c1)}, ba, bb, rel};
}

// Rebuild the state a Schmidt decomposition describes (up to global phase).
inline PureState schmidt_reconstruct(const SchmidtDecomposition& sd) {
  cxd e = std::polar(1.0, sd.relative_phase);
  std::vector<cxd> amps(4, cxd(0));
  auto u0 = sd.basis_a.column(0), u1 = sd.basis_a.column(1);
  auto w0 = sd.basis_b.column(0), w1 = sd.basis_b.column(1);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      amps[a * 2 + b] = sd.coefficients[0] * u0[a] * w0[b] +
                        sd.coefficients[1] * e * u1[a] * w1[b];
  return PureState(2, std::move(amps));
}

// Direction whose "up" spinor is proportional to the given column ray.
inline MeasurementDirection direction_of_spinor(const std::array<cxd, 2>& v) {
  double a = std::abs(v[0]), b = std::abs(v[1]);
  double omega = 2.0 * std::atan2(b, a);
  double phi = b > 1e-15 && a > 1e-15 ? std::arg(v[1]) - std::arg(v[0]) : 0.0;
  return {omega, phi};
}

}  // namespace prbox
