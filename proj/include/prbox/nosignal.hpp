// The no-signaling condition for pre/post-selected ensembles: marginals,
// randomized violation scans, the algebraic condition quantities and their
// solution branches, the three-class classifier, and the demonstrations of
// signaling through local unitaries and GHZ boundary states.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "prbox/abl.hpp"
#include "prbox/parallel.hpp"
#include "prbox/presets.hpp"
#include "prbox/qstate.hpp"
#include "prbox/random.hpp"

namespace prbox {

enum class Party : int { alice = 1, bob = 2 };

inline constexpr double kClassifyTol = 1e-8;     // structural classification
inline constexpr double kViolationThreshold = 1e-2;  // scan-based violations

namespace detail {

// P(target = up) when `target` measures along `own` and at most one other
// party measures along `other`; everyone else idles.
inline double marginal_general(const PrePostEnsemble& ens, int target,
                               const MeasurementDirection& own, int other_party,
                               const std::optional<MeasurementDirection>& other) {
  int n = ens.num_parties();
  std::vector<std::optional<MeasurementDirection>> assign(n);
  assign[target - 1] = own;
  if (other) assign[other_party - 1] = *other;
  auto dist = joint_local_abl(ens, assign);
  if (!other) return dist.p("u");
  // outcome keys order measuring parties by particle index
  std::size_t pos = target < other_party ? 0 : 1;
  double p = 0;
  for (const auto& [label, prob] : dist.entries())
    if (label[pos] == 'u') p += prob;
  return p;
}

}  // namespace detail

// Bipartite marginal: probability that `party` finds up along own_dir, with
// the other party either idle (other = nullopt) or measuring along *other.
inline double marginal(const PrePostEnsemble& ens, Party party,
                       const MeasurementDirection& own_dir,
                       const std::optional<MeasurementDirection>& other =
                           std::nullopt) {
  if (ens.num_parties() != 2)
    throw std::invalid_argument("marginal: need a bipartite ensemble");
  int target = static_cast<int>(party);
  return detail::marginal_general(ens, target, own_dir, 3 - target, other);
}

// Largest discrepancy among the three marginals the other party can induce:
// not measuring, measuring along d1, measuring along d2.
inline double no_signal_deviation(
    const PrePostEnsemble& ens, Party party, const MeasurementDirection& own,
    const std::pair<MeasurementDirection, MeasurementDirection>& other_dirs) {
  double m0 = marginal(ens, party, own);
  double m1 = marginal(ens, party, own, other_dirs.first);
  double m2 = marginal(ens, party, own, other_dirs.second);
  return std::max({std::abs(m0 - m1), std::abs(m0 - m2), std::abs(m1 - m2)});
}

struct SignalReport {
  double max_deviation = 0.0;
  int party = 0;        // measuring party of the achieving sample
  int other_party = 0;  // disturbing party of the achieving sample
  MeasurementDirection own, other1, other2;
  std::uint64_t samples = 0;
  std::uint64_t seed = 0;
  std::uint64_t degenerate_samples = 0;
};

namespace detail {

inline MeasurementDirection sample_direction(SplitMix64& g) {
  double omega = std::acos(1.0 - 2.0 * g.next_double());
  double phi = two_pi * g.next_double();
  return {omega, phi};
}

}  // namespace detail

// Randomized search for no-signaling violations. Directions are drawn
// uniformly on the sphere; the result is deterministic for a fixed seed
// regardless of how samples are chunked over threads.
inline SignalReport scan_no_signaling(const PrePostEnsemble& ens,
                                      std::uint64_t samples,
                                      std::uint64_t seed) {
  if (samples == 0)
    throw std::invalid_argument("scan_no_signaling: need at least one sample");
  int n = ens.num_parties();
  if (n < 2)
    throw std::invalid_argument("scan_no_signaling: need at least two parties");

  struct Sample {
    double dev = -1.0;  // -1 marks a degenerate draw
    int target = 0, other = 0;
    MeasurementDirection own, d1, d2;
  };
  std::vector<Sample> draws(samples);

  detail::parallel_for(
      samples,
      [&](std::size_t i) {
        SplitMix64 g(derive_seed(seed, i));
        Sample s;
        s.target = 1 + static_cast<int>(g.next_below(n));
        int slot = static_cast<int>(g.next_below(n - 1));
        s.other = slot + 1 >= s.target ? slot + 2 : slot + 1;
        s.own = detail::sample_direction(g);
        s.d1 = detail::sample_direction(g);
        s.d2 = detail::sample_direction(g);
        try {
          double m0 =
              detail::marginal_general(ens, s.target, s.own, s.other, {});
          double m1 =
              detail::marginal_general(ens, s.target, s.own, s.other, s.d1);
          double m2 =
              detail::marginal_general(ens, s.target, s.own, s.other, s.d2);
          s.dev = std::max(
              {std::abs(m0 - m1), std::abs(m0 - m2), std::abs(m1 - m2)});
        } catch (const DegeneratePostSelection&) {
          s.dev = -1.0;
        }
        draws[i] = s;
      },
      256);

  SignalReport report;
  report.samples = samples;
  report.seed = seed;
  std::size_t best = samples;  // index of achieving sample
  for (std::size_t i = 0; i < samples; ++i) {
    if (draws[i].dev < 0) {
      ++report.degenerate_samples;
      continue;
    }
    if (best == samples || draws[i].dev > draws[best].dev) best = i;
  }
  if (best != samples) {
    report.max_deviation = draws[best].dev;
    report.party = draws[best].target;
    report.other_party = draws[best].other;
    report.own = draws[best].own;
    report.other1 = draws[best].d1;
    report.other2 = draws[best].d2;
  }
  return report;
}

// ---- algebraic condition quantities ----

// For a basis pair (direction i on particle 1, direction j on particle 2),
// the four outcome combinations are numbered 1 = (up,up), 2 = (up,down),
// 3 = (down,up), 4 = (down,down). p[k] is the product of the plain
// quantum-mechanical outcome probabilities of the initial and final states;
// alpha[k] is the phase difference of the two projection amplitudes.
struct ConditionQuantities {
  std::array<double, 4> p{};
  std::array<double, 4> alpha{};
  MeasurementDirection basis_i, basis_j;
};

inline ConditionQuantities condition_quantities(const PrePostEnsemble& ens,
                                                const MeasurementDirection& bi,
                                                const MeasurementDirection& bj) {
  if (ens.num_parties() != 2)
    throw std::invalid_argument("condition_quantities: need a bipartite "
                                "ensemble");
  ConditionQuantities q;
  q.basis_i = bi;
  q.basis_j = bj;
  Unitary2 va = direction_unitary(bi), vb = direction_unitary(bj);
  int k = 0;
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b, ++k) {
      auto sa = va.column(a), sb = vb.column(b);
      cxd zi(0), zf(0);
      for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c) {
          cxd basis_amp = std::conj(sa[r] * sb[c]);
          zi += basis_amp * ens.initial[r * 2 + c];
          zf += basis_amp * ens.final_state[r * 2 + c];
        }
      q.p[k] = std::norm(zi) * std::norm(zf);
      q.alpha[k] = std::arg(zi) - std::arg(zf);
    }
  }
  return q;
}

// The two polynomial residuals that vanish for every basis pair exactly when
// the ensemble cannot signal. Phase terms enter weighted by the vanishing
// amplitudes, so no special-casing of undefined phases is needed.
inline std::array<double, 2> condition_residuals(const ConditionQuantities& q) {
  const auto& p = q.p;
  const auto& a = q.alpha;
  double r1 = (p[0] + p[1]) * std::sqrt(p[2] * p[3]) * std::cos(a[2] - a[3]) -
              (p[2] + p[3]) * std::sqrt(p[0] * p[1]) * std::cos(a[0] - a[1]);
  double r2 = (p[0] + p[2]) * std::sqrt(p[1] * p[3]) * std::cos(a[1] - a[3]) -
              (p[1] + p[3]) * std::sqrt(p[0] * p[2]) * std::cos(a[0] - a[2]);
  return {std::abs(r1), std::abs(r2)};
}

// Which factors of the general solution vanish, and which phase branch
// holds. Phase comparisons involving an outcome with (near-)zero amplitude
// are vacuous and count as satisfied; `phases_defined` records whether all
// four phases were meaningful.
struct SolutionBranches {
  bool p3_equals_p2 = false;
  bool p1_plus_p4_zero = false;
  bool product_relation = false;  // p1 p4 = p2 p3
  bool degenerate_pair = false;   // p1 = p4 = 0; never used for classification
  bool phase_sum_branch = false;  // a1 + a4 = a2 + a3 (mod 2pi)
  bool phase_pair_branch = false; // a2 = a3 and a1 = a4 (mod 2pi)
  bool phases_defined = false;
};

inline SolutionBranches check_solution_branch(const ConditionQuantities& q,
                                              double tol) {
  constexpr double kPhaseWeightTol = 1e-10;
  double ptol = std::max(tol, 1e-9);
  const auto& p = q.p;
  const auto& a = q.alpha;
  SolutionBranches out;
  out.p3_equals_p2 = std::abs(p[2] - p[1]) < tol;
  out.p1_plus_p4_zero = p[0] + p[3] < tol;
  out.product_relation = std::abs(p[0] * p[3] - p[1] * p[2]) < tol;
  out.degenerate_pair = p[0] < tol && p[3] < tol;
  out.phases_defined = std::all_of(p.begin(), p.end(), [](double v) {
    return v > kPhaseWeightTol;
  });
  bool sum_ok = p[0] < kPhaseWeightTol || p[1] < kPhaseWeightTol ||
                p[2] < kPhaseWeightTol || p[3] < kPhaseWeightTol ||
                phase_distance(a[0] + a[3], a[1] + a[2]) < ptol;
  bool pair23 = p[1] < kPhaseWeightTol || p[2] < kPhaseWeightTol ||
                phase_distance(a[1], a[2]) < ptol;
  bool pair14 = p[0] < kPhaseWeightTol || p[3] < kPhaseWeightTol ||
                phase_distance(a[0], a[3]) < ptol;
  out.phase_sum_branch = sum_ok;
  out.phase_pair_branch = pair23 && pair14;
  return out;
}

// ---- classification ----

enum class EnsembleClass {
  product_product,
  max_entangled_pair,
  swapped_pair,
  uncertified,
};

inline const char* to_string(EnsembleClass c) {
  switch (c) {
    case EnsembleClass::product_product: return "product-product";
    case EnsembleClass::max_entangled_pair: return "max-entangled-pair";
    case EnsembleClass::swapped_pair: return "swapped-pair";
    case EnsembleClass::uncertified: return "uncertified";
  }
  return "?";
}

// Parameters of the swapped form, canonicalized so alpha lies in (0, 1/2]
// (alpha and 1-alpha describe the same ensemble). In the frame spanned by
// the basis columns the boundary states read, up to one global phase each,
//   initial = sqrt(alpha)|00> + e^{i theta} sqrt(1-alpha)|11>
//   final   = sqrt(1-alpha)|00> + e^{i theta} sqrt(alpha)|11>.
struct SwappedFit {
  double alpha = 0.5;
  double theta = 0.0;
  Unitary2 basis_a, basis_b;
};

inline std::optional<SwappedFit> detect_swapped_form(const PrePostEnsemble& ens,
                                                     double tol = kClassifyTol) {
  if (ens.num_parties() != 2) return std::nullopt;
  auto sd = schmidt_decompose(ens.initial);
  double s0 = sd.coefficients[0], s1 = sd.coefficients[1];

  if (s0 - s1 < std::max(tol, 1e-7)) {
    // degenerate spectrum: swapped form holds iff both states are equal
    // maximally entangled rays
    const double r = 1.0 / std::sqrt(2.0);
    if (std::abs(s0 - r) > tol || std::abs(s1 - r) > tol) return std::nullopt;
    if (phase_aligned_distance(ens.initial, ens.final_state) > std::max(tol, 1e-8))
      return std::nullopt;
    return SwappedFit{0.5, sd.relative_phase, sd.basis_a, sd.basis_b};
  }
  if (s1 < tol) return std::nullopt;  // product initial state

  auto u0 = sd.basis_a.column(0), u1 = sd.basis_a.column(1);
  auto w0 = sd.basis_b.column(0), w1 = sd.basis_b.column(1);
  auto proj = [&](const std::array<cxd, 2>& ua, const std::array<cxd, 2>& wb,
                  const PureState& st) {
    cxd acc(0);
    for (int r = 0; r < 2; ++r)
      for (int c = 0; c < 2; ++c)
        acc += std::conj(ua[r] * wb[c]) * st[r * 2 + c];
    return acc;
  };
  cxd f00 = proj(u0, w0, ens.final_state);
  cxd f01 = proj(u0, w1, ens.final_state);
  cxd f10 = proj(u1, w0, ens.final_state);
  cxd f11 = proj(u1, w1, ens.final_state);

  if (std::abs(f01) > tol || std::abs(f10) > tol) return std::nullopt;
  if (std::abs(std::abs(f00) - s1) > tol) return std::nullopt;
  if (std::abs(std::abs(f11) - s0) > tol) return std::nullopt;

  // the two states must carry the same relative phase across the slots
  double rel_i = sd.relative_phase;  // arg of initial on (u1,w1), leading real
  double rel_f = std::arg(f11) - std::arg(f00);
  if (phase_distance(rel_f, rel_i) > std::max(tol, 1e-9)) return std::nullopt;

  // canonical alpha slot is the smaller-coefficient slot (u1, w1)
  SwappedFit fit;
  fit.alpha = s1 * s1;
  fit.theta = wrap_angle(-rel_i);
  fit.basis_a = Unitary2(u1[0], u0[0], u1[1], u0[1]);
  fit.basis_b = Unitary2(w1[0], w0[0], w1[1], w0[1]);
  return fit;
}

struct ClassLabel {
  EnsembleClass kind = EnsembleClass::uncertified;
  std::optional<SwappedFit> fit;
};

inline ClassLabel classify(const PrePostEnsemble& ens,
                           double tol = kClassifyTol) {
  if (ens.num_parties() != 2)
    throw std::invalid_argument("classify: need a bipartite ensemble");
  auto si = schmidt_decompose(ens.initial);
  auto sf = schmidt_decompose(ens.final_state);
  const double r = 1.0 / std::sqrt(2.0);

  bool prod_i = si.coefficients[1] < tol;
  bool prod_f = sf.coefficients[1] < tol;
  if (prod_i && prod_f) return {EnsembleClass::product_product, std::nullopt};

  bool max_i = std::abs(si.coefficients[0] - r) < tol &&
               std::abs(si.coefficients[1] - r) < tol;
  bool max_f = std::abs(sf.coefficients[0] - r) < tol &&
               std::abs(sf.coefficients[1] - r) < tol;
  if (max_i && max_f)
    return {EnsembleClass::max_entangled_pair, detect_swapped_form(ens, tol)};

  if (auto fit = detect_swapped_form(ens, tol))
    return {EnsembleClass::swapped_pair, fit};
  return {EnsembleClass::uncertified, std::nullopt};
}

// ---- demonstrations ----

// Why parties must not apply local unitaries: with singlet boundary states,
// Alice's measure-and-conditionally-flip pins Bob's z outcome, while doing
// nothing leaves it uniform; and on a swapped-pair ensemble a bare rotation
// on Alice's side already shifts Bob's marginal.
struct UnitaryAttackReport {
  double bob_down_with_flip = 0.0;
  double bob_down_without_flip = 0.0;
  double swapped_max_shift = 0.0;
  double swapped_rotation_omega = 0.0;
  MeasurementDirection swapped_bob_direction;
};

inline UnitaryAttackReport unitary_attack_demo() {
  PrePostEnsemble ens{presets::singlet(), presets::singlet()};
  auto z = MeasurementDirection::z();

  EventSequence with_flip;
  with_flip.events.push_back(Measure{"A", local_direction_family(2, 1, z)});
  with_flip.events.push_back(
      ApplyUnitary{1, Unitary2::pauli_x(), OutcomeCondition{"A", "d"}});
  with_flip.events.push_back(Measure{"B", local_direction_family(2, 2, z)});

  EventSequence without_flip;
  without_flip.events.push_back(Measure{"A", local_direction_family(2, 1, z)});
  without_flip.events.push_back(Measure{"B", local_direction_family(2, 2, z)});

  auto bob_down = [](const OutcomeDistribution& d) {
    double p = 0;
    for (const auto& [label, prob] : d.entries())
      if (label[1] == 'd') p += prob;
    return p;
  };

  UnitaryAttackReport rep;
  rep.bob_down_with_flip = bob_down(sequential_abl(ens, with_flip));
  rep.bob_down_without_flip = bob_down(sequential_abl(ens, without_flip));

  // swapped-pair variant: Alice only rotates, Bob's marginal moves
  PrePostEnsemble sw = presets::swapped_ensemble(0.3, 0.4);
  for (int ri = 0; ri < 41; ++ri) {
    double omega_r = 0.05 + (pi - 0.1) * ri / 40.0;
    Unitary2 w = direction_unitary({omega_r, 0.3});
    std::vector<cxd> rotated = sw.initial.amplitudes();
    detail::apply_local_unitary(rotated, 2, 1, w);
    PrePostEnsemble moved{PureState(2, std::move(rotated)), sw.final_state};
    for (int oi = 0; oi < 13; ++oi) {
      for (int pj = 0; pj < 8; ++pj) {
        MeasurementDirection bob_dir{pi * oi / 12.0, two_pi * pj / 8.0};
        try {
          double shift =
              std::abs(marginal(moved, Party::bob, bob_dir) - 0.5);
          if (shift > rep.swapped_max_shift) {
            rep.swapped_max_shift = shift;
            rep.swapped_rotation_omega = omega_r;
            rep.swapped_bob_direction = bob_dir;
          }
        } catch (const DegeneratePostSelection&) {
        }
      }
    }
  }
  return rep;
}

// Tri-partite signaling with maximally entangled boundary states: Alice's z
// outcome is certain until Bob chooses to measure x.
struct GhzDemoReport {
  double alice_down_alone = 0.0;
  double alice_up_with_bob_x = 0.0;
};

inline GhzDemoReport ghz_demo() {
  PrePostEnsemble ens = presets::ghz_pair();
  GhzDemoReport rep;
  auto z = MeasurementDirection::z();
  auto x = MeasurementDirection::x();
  rep.alice_down_alone =
      joint_local_abl(ens, {z, std::nullopt, std::nullopt}).p("d");
  auto both = joint_local_abl(ens, {z, x, std::nullopt});
  rep.alice_up_with_bob_x = both.p("uu") + both.p("ud");
  return rep;
}

}  // namespace prbox
