// Entanglement swapping for pre/post-selected ensembles: build the
// four-party double ensemble, run the middle party's two-particle
// measurement plus local rotation, derive the conditional ensembles per
// outcome, and probe the signaling attack with a non-maximal measurement
// basis.

#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <future>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "prbox/chsh.hpp"

namespace prbox {

// Fixed party order: (Alice, Bob1, Bob2, Clare). The AB ensemble supplies
// particles 1 and 2, the CB ensemble particles 3 and 4.
inline PrePostEnsemble build_double_ensemble(const PrePostEnsemble& ens_ab,
                                             const PrePostEnsemble& ens_cb) {
  if (ens_ab.num_parties() != 2 || ens_cb.num_parties() != 2)
    throw std::invalid_argument("build_double_ensemble: need two bipartite "
                                "ensembles");
  return {tensor(ens_ab.initial, ens_cb.initial),
          tensor(ens_ab.final_state, ens_cb.final_state)};
}

// The rotation the middle party applies to the particle shared with Clare
// after the two-particle measurement.
inline Unitary2 swap_hadamard() {
  const double r = 1.0 / std::sqrt(2.0);
  return {cxd(r), cxd(r), cxd(-r), cxd(r)};
}

// An orthonormal two-particle measurement basis with outcome labels.
struct MeasurementBasis2 {
  std::array<std::string, 4> labels;
  std::vector<PureState> states;

  MeasurementBasis2(std::array<std::string, 4> labels_,
                    std::vector<PureState> states_)
      : labels(std::move(labels_)), states(std::move(states_)) {
    if (states.size() != 4)
      throw std::invalid_argument("MeasurementBasis2: need four states");
    for (int i = 0; i < 4; ++i) {
      if (states[i].num_parties() != 2)
        throw std::invalid_argument("MeasurementBasis2: states must be "
                                    "two-particle");
      for (int j = 0; j < i; ++j)
        if (std::abs(inner_product(states[i], states[j])) > 1e-10)
          throw std::invalid_argument("MeasurementBasis2: basis is not "
                                      "orthonormal");
    }
  }
};

inline MeasurementBasis2 bell_measurement_basis() {
  auto b = bell_basis();
  return {{bell_labels()[0], bell_labels()[1], bell_labels()[2],
           bell_labels()[3]},
          {b[0], b[1], b[2], b[3]}};
}

// One-parameter family of entangled but (for eta != pi/4) non-maximally
// entangled orthonormal bases; at eta = pi/4 it reduces to the Bell basis.
inline MeasurementBasis2 partially_entangled_basis(double eta) {
  double c = std::cos(eta), s = std::sin(eta);
  return {{"b1", "b2", "b3", "b4"},
          {PureState(2, {c, 0, 0, s}), PureState(2, {s, 0, 0, -c}),
           PureState(2, {0, c, s, 0}), PureState(2, {0, s, -c, 0})}};
}

struct SwapConfig {
  std::uint64_t seed = 1;
  std::uint64_t scan_samples = 1000;
  MaximizeConfig chsh{};
  double class_tol = kClassifyTol;
  bool run_chsh = true;
  bool run_scan = true;
};

struct SwapOutcomeReport {
  std::string outcome;
  double probability = 0.0;
  std::optional<PrePostEnsemble> conditional;
  std::optional<ClassLabel> classification;
  std::optional<ChshReport> chsh;
  std::optional<SignalReport> no_signaling;
};

// Run the full protocol: measure the middle pair in the given basis, apply
// the post-measurement unitary to Bob2, and report probability, conditional
// Alice/Clare ensemble, classification, CHSH maximum and no-signaling scan
// per outcome. Zero-amplitude branches carry probability 0 and no ensemble.
inline std::vector<SwapOutcomeReport> swap_protocol(
    const PrePostEnsemble& ens_ab, const PrePostEnsemble& ens_cb,
    const MeasurementBasis2& basis, const Unitary2& post_unitary,
    const SwapConfig& cfg = {}) {
  PrePostEnsemble ens4 = build_double_ensemble(ens_ab, ens_cb);

  EventSequence seq;
  seq.events.push_back(Measure{
      "m", pair_basis_family(4, {2, 3}, basis.states,
                             {basis.labels[0], basis.labels[1], basis.labels[2],
                              basis.labels[3]})});
  seq.events.push_back(ApplyUnitary{3, post_unitary, std::nullopt});
  OutcomeDistribution probs = sequential_abl(ens4, seq);

  auto run_branch = [&](int k) {
    SwapOutcomeReport rep;
    rep.outcome = basis.labels[k];
    rep.probability = probs.p(basis.labels[k]);
    try {
      PrePostEnsemble cond = condition_on_outcome(
          ens4, {2, 3}, basis.states[k], {{3, post_unitary}});
      rep.conditional = cond;
      rep.classification = classify(cond, cfg.class_tol);
      if (cfg.run_chsh) rep.chsh = maximize_chsh(cond, cfg.chsh);
      if (cfg.run_scan)
        rep.no_signaling = scan_no_signaling(
            cond, cfg.scan_samples, derive_seed(cfg.seed, k));
    } catch (const ZeroBranch&) {
      rep.probability = 0.0;
    }
    return rep;
  };

  // branches are independent; evaluate them concurrently and merge in
  // fixed label order
  std::array<std::future<SwapOutcomeReport>, 4> futures;
  for (int k = 0; k < 4; ++k)
    futures[k] = std::async(std::launch::deferred | std::launch::async,
                            run_branch, k);
  std::vector<SwapOutcomeReport> out;
  out.reserve(4);
  for (int k = 0; k < 4; ++k) out.push_back(futures[k].get());
  return out;
}

struct AttackBranch {
  std::string outcome;
  double probability = 0.0;
  std::optional<ClassLabel> classification;
  std::optional<SignalReport> scan;
};

struct NonMaximalAttackReport {
  double eta = 0.0;
  double max_deviation = 0.0;
  SignalReport worst;
  std::vector<AttackBranch> branches;
};

// Replace the Bell basis with the partially entangled family and scan every
// conditional ensemble for no-signaling violations; the returned worst-case
// report quantifies how much the protocol then signals.
inline NonMaximalAttackReport non_maximal_attack(const PrePostEnsemble& ens_ab,
                                                 const PrePostEnsemble& ens_cb,
                                                 double eta,
                                                 const SwapConfig& cfg = {}) {
  if (!(eta > 0.0 && eta < pi / 2))
    throw std::invalid_argument("non_maximal_attack: eta must be in "
                                "(0, pi/2)");
  if (std::abs(eta - pi / 4) < 1e-9)
    throw std::invalid_argument("non_maximal_attack: eta = pi/4 is the "
                                "maximally entangled basis, not an attack");
  SwapConfig branch_cfg = cfg;
  branch_cfg.run_chsh = false;
  auto branches = swap_protocol(ens_ab, ens_cb, partially_entangled_basis(eta),
                                swap_hadamard(), branch_cfg);
  NonMaximalAttackReport rep;
  rep.eta = eta;
  for (const auto& b : branches) {
    AttackBranch ab;
    ab.outcome = b.outcome;
    ab.probability = b.probability;
    ab.classification = b.classification;
    ab.scan = b.no_signaling;
    if (b.no_signaling && b.no_signaling->max_deviation > rep.max_deviation) {
      rep.max_deviation = b.no_signaling->max_deviation;
      rep.worst = *b.no_signaling;
    }
    rep.branches.push_back(std::move(ab));
  }
  return rep;
}

}  // namespace prbox
