// Ready-made ensembles: the classic signaling example, the three causal
// families, the PR-box pair, the GHZ pair, and the inputs for the swapping
// protocol.

#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "prbox/abl.hpp"
#include "prbox/qstate.hpp"

namespace prbox::presets {

namespace detail {

inline PureState superpose(const std::vector<std::pair<cxd, PureState>>& terms) {
  std::vector<cxd> amps(terms.front().second.dim(), cxd(0));
  for (const auto& [c, s] : terms)
    for (std::size_t i = 0; i < amps.size(); ++i) amps[i] += c * s[i];
  double n = 0;
  for (const auto& a : amps) n += std::norm(a);
  n = std::sqrt(n);
  for (auto& a : amps) a /= n;
  return PureState(static_cast<int>(terms.front().second.num_parties()),
                   std::move(amps));
}

inline PureState column_state(const Unitary2& u, int col) {
  auto v = u.column(col);
  return PureState(1, {v[0], v[1]});
}

}  // namespace detail

inline PureState singlet() {
  const double r = 1.0 / std::sqrt(2.0);
  return PureState(2, {0, r, -r, 0});
}

// Singlet initial state post-selected on up-x (particle 1) and up-y
// (particle 2): the textbook demonstration that pre/post-selected
// probabilities can signal.
inline PrePostEnsemble singlet_xy() {
  PureState fin = tensor(PureState::spin(MeasurementDirection::x(), Spin::up),
                         PureState::spin(MeasurementDirection::y(), Spin::up));
  return {singlet(), fin};
}

// Maximally entangled pair with arbitrary local bases and relative phases:
//   initial = (|u u'> + e^{i theta_i} |d d'>)/sqrt2
//   final   = (|u'' u'''> + e^{i theta_f} |d'' d'''>)/sqrt2   (stored as ket)
inline PrePostEnsemble max_entangled_ensemble(
    double theta_i, double theta_f, const Unitary2& basis_a_i = {},
    const Unitary2& basis_b_i = {}, const Unitary2& basis_a_f = {},
    const Unitary2& basis_b_f = {}) {
  using detail::column_state;
  const double r = 1.0 / std::sqrt(2.0);
  auto init = detail::superpose(
      {{r, tensor(column_state(basis_a_i, 0), column_state(basis_b_i, 0))},
       {r * std::polar(1.0, theta_i),
        tensor(column_state(basis_a_i, 1), column_state(basis_b_i, 1))}});
  auto fin = detail::superpose(
      {{r, tensor(column_state(basis_a_f, 0), column_state(basis_b_f, 0))},
       {r * std::polar(1.0, theta_f),
        tensor(column_state(basis_a_f, 1), column_state(basis_b_f, 1))}});
  return {init, fin};
}

// Fixed generic instance (rotated bases, distinct phases) used by tests and
// the CLI preset table.
inline PrePostEnsemble generic_max_entangled() {
  return max_entangled_ensemble(0.7, 1.3, direction_unitary({1.1, 2.2}),
                                direction_unitary({0.7, 5.1}),
                                direction_unitary({2.9, 0.4}),
                                direction_unitary({1.9, 3.3}));
}

// Equal states with the Schmidt amplitudes exchanged:
//   initial = sqrt(alpha)|u u'> + e^{i theta} sqrt(1-alpha)|d d'>
//   final   = sqrt(1-alpha)|u u'> + e^{i theta} sqrt(alpha)|d d'>
inline PrePostEnsemble swapped_ensemble(double alpha, double theta,
                                        const Unitary2& basis_a = {},
                                        const Unitary2& basis_b = {}) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument("swapped_ensemble: alpha must be in (0,1)");
  using detail::column_state;
  auto uu = tensor(column_state(basis_a, 0), column_state(basis_b, 0));
  auto dd = tensor(column_state(basis_a, 1), column_state(basis_b, 1));
  cxd ph = std::polar(1.0, theta);
  auto init = detail::superpose(
      {{std::sqrt(alpha), uu}, {ph * std::sqrt(1.0 - alpha), dd}});
  auto fin = detail::superpose(
      {{std::sqrt(1.0 - alpha), uu}, {ph * std::sqrt(alpha), dd}});
  return {init, fin};
}

// Both boundary states products of single-particle spins.
inline PrePostEnsemble product_ensemble(const MeasurementDirection& a_i,
                                        const MeasurementDirection& b_i,
                                        const MeasurementDirection& a_f,
                                        const MeasurementDirection& b_f) {
  return {tensor(PureState::spin(a_i, Spin::up), PureState::spin(b_i, Spin::up)),
          tensor(PureState::spin(a_f, Spin::up), PureState::spin(b_f, Spin::up))};
}

inline PrePostEnsemble generic_product() {
  return product_ensemble({0.3, 1.0}, {1.2, 4.0}, {2.1, 0.5}, {0.9, 2.7});
}

// Equal initial and final states, partially entangled and not swapped; the
// standard counterexample showing equal entanglement does not give
// causality.
inline PrePostEnsemble equal_partial(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument("equal_partial: alpha must be in (0,1)");
  PureState s(2, {std::sqrt(alpha), 0, 0, std::sqrt(1.0 - alpha)});
  return {s, s};
}

// The maximally entangled pair whose x/z statistics win the PR-box game:
//   initial = (|u_z u_z> + |d_z d_z>)/sqrt2
//   final   = (|u_z u_x> - |d_z d_x>)/sqrt2, with d_x = (|u>-|d>)/sqrt2
inline PrePostEnsemble pr_box_ensemble() {
  const double r = 1.0 / std::sqrt(2.0);
  PureState init(2, {r, 0, 0, r});
  PureState fin(2, {0.5, 0.5, -0.5, 0.5});
  return {init, fin};
}

// Tri-partite GHZ pair: initial along y, final along x, each built from the
// direction spinors as (|u u u> + |d d d>)/sqrt2. With these phase
// conventions Alice's z outcome is pinned when nobody else measures.
inline PrePostEnsemble ghz_pair() {
  auto ghz_along = [](const MeasurementDirection& d) {
    PureState u = PureState::spin(d, Spin::up);
    PureState dn = PureState::spin(d, Spin::down);
    const double r = 1.0 / std::sqrt(2.0);
    return detail::superpose(
        {{r, tensor(tensor(u, u), u)}, {r, tensor(tensor(dn, dn), dn)}});
  };
  return {ghz_along(MeasurementDirection::y()),
          ghz_along(MeasurementDirection::x())};
}

// Inputs for the swapping protocol. The Alice/Bob pair keeps the usual
// particle order; for the Clare/Bob pair (Clare written first) the stored
// order is (Bob's particle, Clare), so tensoring the two gives the fixed
// party order (Alice, Bob1, Bob2, Clare).
inline std::pair<PrePostEnsemble, PrePostEnsemble> swap_input_pair() {
  const double r = 1.0 / std::sqrt(2.0);
  PrePostEnsemble ab = pr_box_ensemble();
  PrePostEnsemble cb{PureState(2, {r, 0, 0, r}),
                     PureState(2, {0.5, -0.5, 0.5, 0.5})};
  return {ab, cb};
}

}  // namespace prbox::presets
