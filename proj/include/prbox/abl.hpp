// Pre/post-selected ensembles and the probabilities computed from them: the
// ABL rule for a single projective measurement, joint local measurements,
// ordered event sequences, and conditioning on an intermediate outcome.

#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "prbox/qstate.hpp"

namespace prbox {

// Post-selection is incompatible with every outcome of the requested
// measurement: the ABL denominator vanishes and no distribution exists.
struct DegeneratePostSelection : std::runtime_error {
  DegeneratePostSelection()
      : std::runtime_error(
            "post-selection is incompatible with every outcome") {}
};

// A conditioning branch has zero amplitude on both boundary states.
struct ZeroBranch : std::runtime_error {
  explicit ZeroBranch(const std::string& what) : std::runtime_error(what) {}
};

inline constexpr double kDegenerateTol = 1e-24;  // ABL denominator cutoff
inline constexpr double kProbClampTol = 1e-15;   // clamp sign noise to zero
inline constexpr double kZeroBranchTol = 1e-12;

// An ensemble selected by an initial state and a final state. The final
// state is stored as a ket; the bra used by the probability rule is its
// entrywise conjugate.
struct PrePostEnsemble {
  PureState initial;
  PureState final_state;

  PrePostEnsemble(PureState initial_, PureState final_)
      : initial(std::move(initial_)), final_state(std::move(final_)) {
    if (initial.num_parties() != final_state.num_parties())
      throw std::invalid_argument(
          "PrePostEnsemble: boundary states have different particle counts");
  }

  int num_parties() const { return initial.num_parties(); }
};

// Probabilities keyed by outcome label, in a deterministic enumeration
// order. Entries are clamped and normalized on construction.
class OutcomeDistribution {
 public:
  OutcomeDistribution(std::vector<std::string> labels,
                      std::vector<double> weights) {
    if (labels.size() != weights.size() || labels.empty())
      throw std::invalid_argument("OutcomeDistribution: size mismatch");
    double total = 0;
    for (auto& w : weights) {
      if (w < kProbClampTol) w = 0;  // cosine-cancellation noise
      total += w;
    }
    if (total < kDegenerateTol) throw DegeneratePostSelection();
    entries_.reserve(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i)
      entries_.emplace_back(std::move(labels[i]), weights[i] / total);
  }

  const std::vector<std::pair<std::string, double>>& entries() const {
    return entries_;
  }

  double p(const std::string& label) const {
    for (const auto& [l, v] : entries_)
      if (l == label) return v;
    throw std::out_of_range("OutcomeDistribution: unknown outcome '" + label +
                            "'");
  }

  double sum() const {
    double s = 0;
    for (const auto& [l, v] : entries_) s += v;
    return s;
  }

 private:
  std::vector<std::pair<std::string, double>> entries_;
};

// A complete family of orthogonal projectors, each tagged with an outcome
// symbol. Completeness (sum = identity) is validated at construction.
class MeasurementFamily {
 public:
  MeasurementFamily(std::vector<std::string> outcomes,
                    std::vector<Operator> projectors)
      : outcomes_(std::move(outcomes)), projectors_(std::move(projectors)) {
    if (outcomes_.empty() || outcomes_.size() != projectors_.size())
      throw std::invalid_argument("MeasurementFamily: size mismatch");
    int n = projectors_.front().num_parties();
    std::size_t d = std::size_t{1} << n;
    Operator acc(n, std::vector<cxd>(d * d, cxd(0)));
    for (const auto& p : projectors_) {
      if (p.num_parties() != n)
        throw std::invalid_argument("MeasurementFamily: mixed dimensions");
      acc += p;
    }
    if (acc.max_abs_diff(Operator::identity(n)) > kFamilyTol)
      throw std::invalid_argument(
          "MeasurementFamily: projectors do not resolve the identity");
  }

  std::size_t size() const { return projectors_.size(); }
  int num_parties() const { return projectors_.front().num_parties(); }
  const std::string& outcome(std::size_t i) const { return outcomes_[i]; }
  const Operator& projector(std::size_t i) const { return projectors_[i]; }

 private:
  std::vector<std::string> outcomes_;
  std::vector<Operator> projectors_;
};

// up/down measurement of one particle along a direction
inline MeasurementFamily local_direction_family(int num_parties, int party,
                                                const MeasurementDirection& d) {
  return MeasurementFamily(
      {"u", "d"}, {local_projector(num_parties, party, d, Spin::up),
                   local_projector(num_parties, party, d, Spin::down)});
}

// rank-2^(n-2) projectors onto an orthonormal two-particle basis attached to
// a particle pair
inline MeasurementFamily pair_basis_family(int num_parties,
                                           std::pair<int, int> parties,
                                           const std::vector<PureState>& basis,
                                           std::vector<std::string> outcomes) {
  auto [k, l] = parties;
  if (k == l || k < 1 || l < 1 || k > num_parties || l > num_parties)
    throw std::out_of_range("pair_basis_family: bad particle pair");
  if (basis.size() != 4 || outcomes.size() != 4)
    throw std::invalid_argument("pair_basis_family: need four basis states");
  std::size_t dim = std::size_t{1} << num_parties;
  int shk = detail::party_shift(num_parties, k);
  int shl = detail::party_shift(num_parties, l);
  std::size_t pair_mask = (std::size_t{1} << shk) | (std::size_t{1} << shl);
  std::vector<Operator> projs;
  projs.reserve(4);
  for (const auto& b : basis) {
    if (b.num_parties() != 2)
      throw std::invalid_argument("pair_basis_family: basis states must be "
                                  "two-particle");
    std::vector<cxd> m(dim * dim, cxd(0));
    for (std::size_t r = 0; r < dim; ++r) {
      std::size_t rb = (((r >> shk) & 1u) << 1) | ((r >> shl) & 1u);
      for (std::size_t c = 0; c < dim; ++c) {
        if ((r & ~pair_mask) != (c & ~pair_mask)) continue;
        std::size_t cb = (((c >> shk) & 1u) << 1) | ((c >> shl) & 1u);
        m[r * dim + c] = b[rb] * std::conj(b[cb]);
      }
    }
    projs.emplace_back(num_parties, std::move(m));
  }
  return MeasurementFamily(std::move(outcomes), std::move(projs));
}

inline MeasurementFamily bell_family(int num_parties,
                                     std::pair<int, int> parties) {
  auto basis = bell_basis();
  return pair_basis_family(
      num_parties, parties, {basis[0], basis[1], basis[2], basis[3]},
      {bell_labels()[0], bell_labels()[1], bell_labels()[2], bell_labels()[3]});
}

// ---- ordered intermediate-time events ----

struct OutcomeCondition {
  std::string measure_label;
  std::string outcome;
};

struct ApplyUnitary {
  int party = 1;
  Unitary2 u;
  // when set, the unitary fires only in branches where the named earlier
  // measurement produced the given outcome
  std::optional<OutcomeCondition> when;
};

struct Measure {
  std::string label;
  MeasurementFamily family;
};

using Event = std::variant<ApplyUnitary, Measure>;

struct EventSequence {
  std::vector<Event> events;
};

namespace detail {

// Outcome symbols are joined into one key. Single-character symbols
// concatenate ("ud"); anything longer joins with ':' ("phi+:u").
inline std::string join_outcome_labels(const std::vector<std::string>& parts) {
  bool all_single = true;
  for (const auto& p : parts)
    if (p.size() != 1) all_single = false;
  std::string key;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i > 0 && !all_single) key += ':';
    key += parts[i];
  }
  return key;
}

}  // namespace detail

// The probability rule for one projective measurement at an intermediate
// time:  P(c_n) = |<f| P_n |i>|^2 / sum_m |<f| P_m |i>|^2.
inline OutcomeDistribution abl_distribution(const PrePostEnsemble& ens,
                                            const MeasurementFamily& family) {
  if (family.num_parties() != ens.num_parties())
    throw std::invalid_argument("abl_distribution: dimension mismatch");
  std::vector<std::string> labels;
  std::vector<double> weights;
  labels.reserve(family.size());
  weights.reserve(family.size());
  const auto& fin = ens.final_state.amplitudes();
  for (std::size_t i = 0; i < family.size(); ++i) {
    auto projected = family.projector(i).apply(ens.initial.amplitudes());
    cxd amp = detail::inner_raw(fin, projected);
    labels.push_back(family.outcome(i));
    weights.push_back(std::norm(amp));
  }
  return OutcomeDistribution(std::move(labels), std::move(weights));
}

// Joint distribution when a subset of parties each measure along their own
// direction; parties with no assignment contribute identity. Outcome keys
// run over measuring parties in particle order ("ud" = first measuring
// particle up, second down).
inline OutcomeDistribution joint_local_abl(
    const PrePostEnsemble& ens,
    const std::vector<std::optional<MeasurementDirection>>& assignments) {
  int n = ens.num_parties();
  if (static_cast<int>(assignments.size()) != n)
    throw std::invalid_argument("joint_local_abl: need one entry per particle");
  std::vector<int> measuring;
  for (int k = 0; k < n; ++k)
    if (assignments[k]) measuring.push_back(k + 1);
  if (measuring.empty())
    throw std::invalid_argument("joint_local_abl: at least one particle must "
                                "measure");

  std::vector<std::array<std::array<cxd, 2>, 2>> spinors(measuring.size());
  for (std::size_t m = 0; m < measuring.size(); ++m) {
    const auto& d = *assignments[measuring[m] - 1];
    spinors[m][0] = spin_spinor(d, Spin::up);
    spinors[m][1] = spin_spinor(d, Spin::down);
  }

  const auto& fin = ens.final_state.amplitudes();
  std::size_t combos = std::size_t{1} << measuring.size();
  std::vector<std::string> labels;
  std::vector<double> weights;
  labels.reserve(combos);
  weights.reserve(combos);
  for (std::size_t mask = 0; mask < combos; ++mask) {
    std::vector<cxd> w = ens.initial.amplitudes();
    std::string key;
    for (std::size_t m = 0; m < measuring.size(); ++m) {
      int bit = static_cast<int>((mask >> (measuring.size() - 1 - m)) & 1u);
      key += bit == 0 ? 'u' : 'd';
      w = detail::project_party(w, n, measuring[m],
                                std::span<const cxd, 2>(spinors[m][bit]));
    }
    cxd amp = detail::inner_raw(fin, w);
    labels.push_back(std::move(key));
    weights.push_back(std::norm(amp));
  }
  return OutcomeDistribution(std::move(labels), std::move(weights));
}

// Ordered chain of unitaries and projective measurements between the two
// boundary states:  P(outcome string) ~ |<f| E_k ... E_1 |i>|^2, normalized
// over all outcome strings. Reduces to abl_distribution for a single
// Measure event.
inline OutcomeDistribution sequential_abl(const PrePostEnsemble& ens,
                                          const EventSequence& seq) {
  int n = ens.num_parties();
  std::vector<const Measure*> measures;
  for (const auto& ev : seq.events) {
    if (const auto* m = std::get_if<Measure>(&ev)) {
      if (m->family.num_parties() != n)
        throw std::invalid_argument("sequential_abl: family dimension "
                                    "mismatch");
      measures.push_back(m);
    } else {
      const auto& u = std::get<ApplyUnitary>(ev);
      if (u.party < 1 || u.party > n)
        throw std::out_of_range("sequential_abl: particle index out of range");
      if (u.when) {
        bool found = false;
        for (const auto* m : measures)
          if (m->label == u.when->measure_label) found = true;
        if (!found)
          throw std::invalid_argument(
              "sequential_abl: conditional unitary references measurement '" +
              u.when->measure_label + "' that does not precede it");
      }
    }
  }
  if (measures.empty())
    throw std::invalid_argument("sequential_abl: no measurement events");

  std::size_t combos = 1;
  for (const auto* m : measures) combos *= m->family.size();

  const auto& fin = ens.final_state.amplitudes();
  std::vector<std::string> labels;
  std::vector<double> weights;
  labels.reserve(combos);
  weights.reserve(combos);
  std::vector<std::size_t> pick(measures.size(), 0);
  for (std::size_t combo = 0; combo < combos; ++combo) {
    // decode mixed-radix outcome string, first measure most significant
    std::size_t rem = combo;
    for (std::size_t m = measures.size(); m-- > 0;) {
      pick[m] = rem % measures[m]->family.size();
      rem /= measures[m]->family.size();
    }
    std::vector<cxd> v = ens.initial.amplitudes();
    std::size_t mi = 0;
    std::map<std::string, std::string> chosen;
    for (const auto& ev : seq.events) {
      if (const auto* m = std::get_if<Measure>(&ev)) {
        v = m->family.projector(pick[mi]).apply(v);
        chosen[m->label] = m->family.outcome(pick[mi]);
        ++mi;
      } else {
        const auto& u = std::get<ApplyUnitary>(ev);
        if (u.when) {
          auto it = chosen.find(u.when->measure_label);
          if (it == chosen.end() || it->second != u.when->outcome) continue;
        }
        detail::apply_local_unitary(v, n, u.party, u.u);
      }
    }
    std::vector<std::string> parts;
    parts.reserve(measures.size());
    for (std::size_t m = 0; m < measures.size(); ++m)
      parts.push_back(measures[m]->family.outcome(pick[m]));
    labels.push_back(detail::join_outcome_labels(parts));
    weights.push_back(std::norm(detail::inner_raw(fin, v)));
  }
  return OutcomeDistribution(std::move(labels), std::move(weights));
}

// Condition a four-particle ensemble on a two-particle outcome observed on
// a particle pair, optionally followed by a local unitary on one of the
// measured particles. The outcome state's slots follow ascending particle
// order, as does the returned ensemble of the two remaining particles.
inline PrePostEnsemble condition_on_outcome(
    const PrePostEnsemble& ens4, std::pair<int, int> measured_pair,
    const PureState& outcome,
    std::optional<std::pair<int, Unitary2>> post_unitary = std::nullopt) {
  if (ens4.num_parties() != 4)
    throw std::invalid_argument("condition_on_outcome: need four particles");
  auto [k, l] = measured_pair;
  if (k == l || k < 1 || l < 1 || k > 4 || l > 4)
    throw std::out_of_range("condition_on_outcome: bad particle pair");
  if (k > l) std::swap(k, l);
  if (outcome.num_parties() != 2)
    throw std::invalid_argument("condition_on_outcome: outcome must be a "
                                "two-particle state");

  // outcome state adjusted by the post-measurement unitary; it is absorbed
  // into the final-side contraction only (it acts after the measurement)
  std::vector<cxd> adjusted = outcome.amplitudes();
  if (post_unitary) {
    auto [party, u] = *post_unitary;
    if (party != k && party != l)
      throw std::out_of_range(
          "condition_on_outcome: unitary must act on a measured particle");
    detail::apply_local_unitary(adjusted, 2, party == k ? 1 : 2, u);
  }

  int shk = detail::party_shift(4, k), shl = detail::party_shift(4, l);
  std::vector<int> rest;
  for (int p = 1; p <= 4; ++p)
    if (p != k && p != l) rest.push_back(p);
  int shr0 = detail::party_shift(4, rest[0]);
  int shr1 = detail::party_shift(4, rest[1]);

  auto contract = [&](const std::vector<cxd>& big,
                      const std::vector<cxd>& pair_state) {
    std::vector<cxd> out(4, cxd(0));
    for (std::size_t i = 0; i < 16; ++i) {
      std::size_t pb = (((i >> shk) & 1u) << 1) | ((i >> shl) & 1u);
      std::size_t rb = (((i >> shr0) & 1u) << 1) | ((i >> shr1) & 1u);
      out[rb] += std::conj(pair_state[pb]) * big[i];
    }
    return out;
  };

  auto eff_init = contract(ens4.initial.amplitudes(), outcome.amplitudes());
  auto eff_fin = contract(ens4.final_state.amplitudes(), adjusted);
  double ni = detail::norm_raw(eff_init), nf = detail::norm_raw(eff_fin);
  if (ni < kZeroBranchTol)
    throw ZeroBranch("initial state has no amplitude on this outcome");
  if (nf < kZeroBranchTol)
    throw ZeroBranch("final state has no amplitude on this outcome");
  for (auto& a : eff_init) a /= ni;
  for (auto& a : eff_fin) a /= nf;
  return PrePostEnsemble(PureState(2, std::move(eff_init)),
                         PureState(2, std::move(eff_fin)));
}

}  // namespace prbox
