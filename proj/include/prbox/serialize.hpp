// JSON serialization for states, ensembles, event sequences and reports.
// Readers validate the same invariants the constructors enforce; malformed
// documents throw.

#pragma once

#include <json.hpp>

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "prbox/abl.hpp"
#include "prbox/chsh.hpp"
#include "prbox/nosignal.hpp"
#include "prbox/qstate.hpp"
#include "prbox/swapping.hpp"

namespace prbox {

using json = nlohmann::ordered_json;

// ---- states and ensembles ----

inline json to_json(const PureState& s) {
  json amps = json::array();
  for (const auto& a : s.amplitudes())
    amps.push_back(json::array({a.real(), a.imag()}));
  return json{{"num_parties", s.num_parties()}, {"amplitudes", amps}};
}

inline PureState pure_state_from_json(const json& j) {
  if (!j.is_object() || !j.contains("num_parties") || !j.contains("amplitudes"))
    throw std::invalid_argument("state: expected num_parties and amplitudes");
  int n = j.at("num_parties").get<int>();
  std::vector<cxd> amps;
  for (const auto& e : j.at("amplitudes")) {
    if (!e.is_array() || e.size() != 2)
      throw std::invalid_argument("state: amplitudes must be [re, im] pairs");
    amps.emplace_back(e[0].get<double>(), e[1].get<double>());
  }
  return PureState(n, std::move(amps));  // validates length and norm
}

inline json to_json(const PrePostEnsemble& e) {
  return json{{"initial", to_json(e.initial)},
              {"final", to_json(e.final_state)}};
}

inline PrePostEnsemble ensemble_from_json(const json& j) {
  if (!j.is_object() || !j.contains("initial") || !j.contains("final"))
    throw std::invalid_argument("ensemble: expected initial and final");
  return {pure_state_from_json(j.at("initial")),
          pure_state_from_json(j.at("final"))};
}

inline json to_json(const MeasurementDirection& d) {
  return json{{"omega", d.omega}, {"phi", d.phi}};
}

inline MeasurementDirection direction_from_json(const json& j) {
  return {j.at("omega").get<double>(), j.at("phi").get<double>()};
}

inline json to_json(const Unitary2& u) {
  auto entry = [](cxd v) { return json::array({v.real(), v.imag()}); };
  return json::array({json::array({entry(u(0, 0)), entry(u(0, 1))}),
                      json::array({entry(u(1, 0)), entry(u(1, 1))})});
}

inline Unitary2 unitary_from_json(const json& j) {
  if (!j.is_array() || j.size() != 2 || j[0].size() != 2 || j[1].size() != 2)
    throw std::invalid_argument("unitary: expected a 2x2 matrix");
  auto entry = [](const json& e) {
    return cxd(e.at(0).get<double>(), e.at(1).get<double>());
  };
  return {entry(j[0][0]), entry(j[0][1]), entry(j[1][0]), entry(j[1][1])};
}

// ---- event sequences ----

// Measure events come in two kinds:
//   {"type":"measure","label":L,"kind":"local","party":k,
//    "direction":{"omega":..,"phi":..}}
//   {"type":"measure","label":L,"kind":"basis","parties":[k,l],
//    "states":[state,...],"outcomes":[name,...]}
// Unitary events:
//   {"type":"unitary","party":k,"matrix":[[..]],
//    "when":{"measure":L,"outcome":o}}   (when is optional)
inline EventSequence event_sequence_from_json(const json& j, int num_parties) {
  if (!j.is_array())
    throw std::invalid_argument("sequence: expected an array of events");
  EventSequence seq;
  for (const auto& ev : j) {
    std::string type = ev.at("type").get<std::string>();
    if (type == "unitary") {
      ApplyUnitary u;
      u.party = ev.at("party").get<int>();
      u.u = unitary_from_json(ev.at("matrix"));
      if (ev.contains("when"))
        u.when = OutcomeCondition{
            ev.at("when").at("measure").get<std::string>(),
            ev.at("when").at("outcome").get<std::string>()};
      seq.events.push_back(std::move(u));
    } else if (type == "measure") {
      std::string label = ev.at("label").get<std::string>();
      std::string kind = ev.value("kind", std::string("local"));
      if (kind == "local") {
        seq.events.push_back(
            Measure{label,
                    local_direction_family(num_parties, ev.at("party").get<int>(),
                                           direction_from_json(
                                               ev.at("direction")))});
      } else if (kind == "basis") {
        auto parties = ev.at("parties");
        std::vector<PureState> states;
        for (const auto& s : ev.at("states"))
          states.push_back(pure_state_from_json(s));
        std::vector<std::string> outcomes;
        for (const auto& o : ev.at("outcomes"))
          outcomes.push_back(o.get<std::string>());
        seq.events.push_back(Measure{
            label, pair_basis_family(num_parties,
                                     {parties.at(0).get<int>(),
                                      parties.at(1).get<int>()},
                                     states, std::move(outcomes))});
      } else {
        throw std::invalid_argument("sequence: unknown measure kind '" + kind +
                                    "'");
      }
    } else {
      throw std::invalid_argument("sequence: unknown event type '" + type +
                                  "'");
    }
  }
  return seq;
}

// ---- distributions and reports ----

inline json to_json(const OutcomeDistribution& d) {
  json out = json::object();
  for (const auto& [label, p] : d.entries()) out[label] = p;
  return out;
}

inline json to_json(const SignalReport& r) {
  return json{{"max_deviation", r.max_deviation},
              {"party", r.party},
              {"other_party", r.other_party},
              {"own", to_json(r.own)},
              {"other1", to_json(r.other1)},
              {"other2", to_json(r.other2)},
              {"samples", r.samples},
              {"seed", r.seed},
              {"degenerate_samples", r.degenerate_samples}};
}

inline json to_json(const SwappedFit& f) {
  return json{{"alpha", f.alpha},
              {"theta", f.theta},
              {"basis_a", to_json(f.basis_a)},
              {"basis_b", to_json(f.basis_b)}};
}

inline json to_json(const ClassLabel& c) {
  json out{{"class", to_string(c.kind)}};
  if (c.fit) out["fit"] = to_json(*c.fit);
  return out;
}

inline json to_json(const ChshSettings& s) {
  return json{{"a", to_json(s.a)},
              {"a_prime", to_json(s.a_prime)},
              {"b", to_json(s.b)},
              {"b_prime", to_json(s.b_prime)}};
}

inline json to_json(const ChshReport& r) {
  return json{{"value", r.value},
              {"directions", to_json(r.directions)},
              {"optimizer",
               json{{"grid_per_angle", r.optimizer.grid_per_angle},
                    {"per_party_points", r.optimizer.per_party_points},
                    {"refine_iters", r.optimizer.refine_iters},
                    {"starts", r.optimizer.starts},
                    {"converged", r.optimizer.converged},
                    {"swapped_reduction", r.optimizer.swapped_reduction},
                    {"seed", r.optimizer.seed}}},
              {"ensemble", r.ensemble_summary},
              {"uncertified", r.uncertified}};
}

inline json to_json(const DAlphaPoint& p) {
  return json{{"alpha", p.alpha},
              {"d", p.d},
              {"b_max", p.b_max},
              {"converged", p.converged},
              {"b_unconstrained", p.b_unconstrained}};
}

inline json to_json(const PrGameReport& r) {
  json per = json::object();
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y)
      per["xy=" + std::to_string(x) + std::to_string(y)] = r.success[x][y];
  return json{{"success", per},
              {"min_success", r.min_success},
              {"mean_success", r.mean_success}};
}

inline json to_json(const SwapOutcomeReport& r) {
  json out{{"outcome", r.outcome}, {"probability", r.probability}};
  if (r.conditional) out["conditional"] = to_json(*r.conditional);
  if (r.classification) out["classification"] = to_json(*r.classification);
  if (r.chsh) out["chsh"] = to_json(*r.chsh);
  if (r.no_signaling) out["no_signaling"] = to_json(*r.no_signaling);
  return out;
}

inline json to_json(const NonMaximalAttackReport& r) {
  json branches = json::array();
  for (const auto& b : r.branches) {
    json jb{{"outcome", b.outcome}, {"probability", b.probability}};
    if (b.classification) jb["classification"] = to_json(*b.classification);
    if (b.scan) jb["scan"] = to_json(*b.scan);
    branches.push_back(std::move(jb));
  }
  return json{{"eta", r.eta},
              {"max_deviation", r.max_deviation},
              {"worst", to_json(r.worst)},
              {"branches", branches}};
}

inline json to_json(const UnitaryAttackReport& r) {
  return json{{"bob_down_with_flip", r.bob_down_with_flip},
              {"bob_down_without_flip", r.bob_down_without_flip},
              {"swapped_max_shift", r.swapped_max_shift},
              {"swapped_rotation_omega", r.swapped_rotation_omega},
              {"swapped_bob_direction", to_json(r.swapped_bob_direction)}};
}

inline json to_json(const GhzDemoReport& r) {
  return json{{"alice_down_alone", r.alice_down_alone},
              {"alice_up_with_bob_x", r.alice_up_with_bob_x}};
}

}  // namespace prbox
