// Command-line frontend. Every subcommand reads an ensemble (preset or JSON
// file), runs one toolkit operation, and emits a single JSON or CSV document
// with the tool version, the effective configuration and the seed embedded,
// so identical invocations produce byte-identical output.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "prbox/serialize.hpp"

namespace {

constexpr const char* kVersion = "0.1.0";

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitDegenerate = 3;
constexpr int kExitInternal = 4;

using prbox::json;

struct CommonOpts {
  std::string preset;
  std::string ensemble_file;
  double alpha = 0.3;
  double theta = 0.0;
  std::uint64_t seed = 1;
  std::uint64_t samples = 10000;
  int grid = 24;
  int refine = 300;
  std::string out;
  std::string format = "json";
};

void add_common(CLI::App* cmd, CommonOpts& o, bool with_ensemble = true) {
  if (with_ensemble) {
    cmd->add_option("--preset", o.preset,
                    "named ensemble: singlet-xy, pr-box, max-entangled, "
                    "swapped, equal-partial, product, ghz");
    cmd->add_option("--ensemble", o.ensemble_file, "ensemble JSON file");
    cmd->add_option("--alpha", o.alpha,
                    "weight parameter for swapped/equal-partial presets");
    cmd->add_option("--theta", o.theta, "phase parameter for the swapped "
                                        "preset");
  }
  cmd->add_option("--seed", o.seed, "RNG seed, echoed into the output");
  cmd->add_option("--samples", o.samples, "sample count for scans");
  cmd->add_option("--grid", o.grid, "optimizer grid resolution per angle");
  cmd->add_option("--refine", o.refine, "optimizer refinement rounds");
  cmd->add_option("--out", o.out, "write the document here instead of stdout");
  cmd->add_option("--format", o.format, "json or csv (sweeps only)")
      ->check(CLI::IsMember({"json", "csv"}));
}

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open file: " + path);
  json j;
  in >> j;
  return j;
}

prbox::PrePostEnsemble resolve_ensemble(const CommonOpts& o) {
  using namespace prbox::presets;
  if (!o.ensemble_file.empty())
    return prbox::ensemble_from_json(load_json_file(o.ensemble_file));
  if (o.preset == "singlet-xy") return singlet_xy();
  if (o.preset == "pr-box") return pr_box_ensemble();
  if (o.preset == "max-entangled") return generic_max_entangled();
  if (o.preset == "swapped") return swapped_ensemble(o.alpha, o.theta);
  if (o.preset == "equal-partial") return equal_partial(o.alpha);
  if (o.preset == "product") return generic_product();
  if (o.preset == "ghz") return ghz_pair();
  if (o.preset.empty())
    throw std::invalid_argument("need --preset or --ensemble");
  throw std::invalid_argument("unknown preset: " + o.preset);
}

prbox::MeasurementDirection parse_direction(const std::string& spec) {
  if (spec == "x") return prbox::MeasurementDirection::x();
  if (spec == "y") return prbox::MeasurementDirection::y();
  if (spec == "z") return prbox::MeasurementDirection::z();
  auto slash = spec.find('/');
  if (slash == std::string::npos)
    throw std::invalid_argument("bad direction '" + spec +
                                "' (use x, y, z or omega/phi)");
  return {std::stod(spec.substr(0, slash)), std::stod(spec.substr(slash + 1))};
}

int parse_party(const std::string& p) {
  if (p.size() == 1) {
    if (p[0] >= 'A' && p[0] <= 'D') return p[0] - 'A' + 1;
    if (p[0] >= '1' && p[0] <= '9') return p[0] - '0';
  }
  throw std::invalid_argument("bad particle '" + p + "' (use A..D or 1..4)");
}

// "A:z,B:x" -> per-particle optional directions
std::vector<std::optional<prbox::MeasurementDirection>> parse_measure(
    const std::string& spec, int num_parties) {
  std::vector<std::optional<prbox::MeasurementDirection>> out(num_parties);
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto colon = item.find(':');
    if (colon == std::string::npos)
      throw std::invalid_argument("bad measurement '" + item +
                                  "' (use PARTY:DIRECTION)");
    int party = parse_party(item.substr(0, colon));
    if (party < 1 || party > num_parties)
      throw std::invalid_argument("particle out of range in '" + item + "'");
    out[party - 1] = parse_direction(item.substr(colon + 1));
  }
  return out;
}

void emit(const CommonOpts& o, const std::string& doc) {
  if (o.out.empty()) {
    std::fputs(doc.c_str(), stdout);
    return;
  }
  std::ofstream f(o.out, std::ios::binary);
  if (!f) throw std::invalid_argument("cannot write file: " + o.out);
  f << doc;
}

json make_envelope(const std::string& command, const CommonOpts& o,
                   json config) {
  config["seed"] = o.seed;
  return json{{"tool", "prbox"},
              {"version", kVersion},
              {"command", command},
              {"config", std::move(config)},
              {"seed", o.seed}};
}

std::string dump(json doc) { return doc.dump(2) + "\n"; }

std::vector<double> parse_alpha_list(const std::string& spec) {
  std::vector<double> out;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
  if (out.empty()) throw std::invalid_argument("empty alpha list");
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"simulator and optimization toolkit for pre- and "
               "post-selected spin ensembles"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  CommonOpts o;
  std::string measure_spec, sequence_file, alphas_spec = "0.5,0.4,0.3,0.2,0.1,0.05";
  std::string ensemble_cb_file;
  double eta = 0.0;

  auto* c_abl = app.add_subcommand("abl", "outcome distribution of local or "
                                          "sequential measurements");
  add_common(c_abl, o);
  c_abl->add_option("--measure", measure_spec,
                    "local measurements, e.g. A:z,B:x or B:1.57/0.0");
  c_abl->add_option("--sequence", sequence_file,
                    "JSON file with an ordered event sequence");

  auto* c_scan = app.add_subcommand("scan", "randomized no-signaling scan");
  add_common(c_scan, o);

  auto* c_classify = app.add_subcommand("classify",
                                        "no-signaling class of an ensemble");
  add_common(c_classify, o);

  auto* c_chsh = app.add_subcommand("chsh-max",
                                    "maximize the CHSH combination");
  add_common(c_chsh, o);

  auto* c_dalpha = app.add_subcommand("d-alpha",
                                      "sweep the optimal-family d curve");
  add_common(c_dalpha, o, false);
  c_dalpha->add_option("--alphas", alphas_spec,
                       "comma-separated weights in (0,1)");

  auto* c_game = app.add_subcommand("pr-game", "exact winning statistics of "
                                               "the box game");
  add_common(c_game, o);

  auto* c_swap = app.add_subcommand("swap", "run the swapping protocol on two "
                                            "ensembles");
  add_common(c_swap, o);
  c_swap->add_option("--ensemble-cb", ensemble_cb_file,
                     "JSON file for the Clare/Bob pair (stored Bob-first)");

  auto* c_ghz = app.add_subcommand("ghz", "tri-partite signaling numbers");
  add_common(c_ghz, o, false);

  auto* c_attack = app.add_subcommand("attack", "swapping with a non-maximal "
                                                "basis");
  add_common(c_attack, o);
  c_attack->add_option("--eta", eta, "basis entanglement angle in (0, pi/2), "
                                     "not pi/4")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInput;
  }

  try {
    using namespace prbox;

    if (c_abl->parsed()) {
      auto ens = resolve_ensemble(o);
      json config{{"measure", measure_spec}, {"sequence", sequence_file}};
      OutcomeDistribution dist = [&] {
        if (!sequence_file.empty()) {
          auto seq = event_sequence_from_json(load_json_file(sequence_file),
                                              ens.num_parties());
          return sequential_abl(ens, seq);
        }
        if (measure_spec.empty())
          throw std::invalid_argument("need --measure or --sequence");
        return joint_local_abl(ens,
                               parse_measure(measure_spec, ens.num_parties()));
      }();
      json doc = make_envelope("abl", o, config);
      doc["result"] = to_json(dist);
      emit(o, dump(doc));
    } else if (c_scan->parsed()) {
      auto ens = resolve_ensemble(o);
      auto rep = scan_no_signaling(ens, o.samples, o.seed);
      json doc = make_envelope("scan", o, {{"samples", o.samples}});
      doc["result"] = to_json(rep);
      emit(o, dump(doc));
    } else if (c_classify->parsed()) {
      auto ens = resolve_ensemble(o);
      json doc = make_envelope("classify", o, json::object());
      doc["result"] = to_json(classify(ens));
      emit(o, dump(doc));
    } else if (c_chsh->parsed()) {
      auto ens = resolve_ensemble(o);
      MaximizeConfig cfg;
      cfg.grid_per_angle = o.grid;
      cfg.refine_iters = o.refine;
      cfg.seed = o.seed;
      auto rep = maximize_chsh(ens, cfg);
      if (rep.uncertified)
        std::fprintf(stderr,
                     "warning: ensemble is not in a causal class; the CHSH "
                     "value need not respect the no-signaling bound\n");
      json doc = make_envelope("chsh-max", o,
                               {{"grid", o.grid}, {"refine", o.refine}});
      doc["result"] = to_json(rep);
      emit(o, dump(doc));
    } else if (c_dalpha->parsed()) {
      auto alphas = parse_alpha_list(alphas_spec);
      DAlphaConfig cfg;
      cfg.cross.grid_per_angle = o.grid;
      cfg.cross.refine_iters = o.refine;
      cfg.cross.seed = o.seed;
      std::vector<DAlphaPoint> points;
      points.reserve(alphas.size());
      for (double a : alphas) points.push_back(d_alpha(a, cfg));
      if (o.format == "csv") {
        std::string csv;
        csv += std::string("# prbox ") + kVersion + "\n";
        csv += "# command: d-alpha\n";
        csv += "# seed: " + std::to_string(o.seed) + "\n";
        csv += "# alphas: " + alphas_spec + "\n";
        csv += "alpha,d,b_max,converged\n";
        char line[128];
        for (const auto& p : points) {
          std::snprintf(line, sizeof(line), "%.9f,%.9f,%.9f,%d\n", p.alpha,
                        p.d, p.b_max, p.converged ? 1 : 0);
          csv += line;
        }
        emit(o, csv);
      } else {
        json arr = json::array();
        for (const auto& p : points) arr.push_back(to_json(p));
        json doc = make_envelope("d-alpha", o, {{"alphas", alphas_spec}});
        doc["result"] = arr;
        emit(o, dump(doc));
      }
    } else if (c_game->parsed()) {
      auto ens = resolve_ensemble(o);
      json doc = make_envelope("pr-game", o, json::object());
      doc["result"] = to_json(pr_game(ens));
      emit(o, dump(doc));
    } else if (c_swap->parsed()) {
      PrePostEnsemble ab = [&] {
        if (!o.ensemble_file.empty())
          return ensemble_from_json(load_json_file(o.ensemble_file));
        if (o.preset.empty() || o.preset == "swap-double")
          return presets::swap_input_pair().first;
        return resolve_ensemble(o);
      }();
      PrePostEnsemble cb = [&] {
        if (!ensemble_cb_file.empty())
          return ensemble_from_json(load_json_file(ensemble_cb_file));
        if (o.ensemble_file.empty() &&
            (o.preset.empty() || o.preset == "swap-double"))
          return presets::swap_input_pair().second;
        throw std::invalid_argument("need --ensemble-cb with --ensemble");
      }();
      SwapConfig cfg;
      cfg.seed = o.seed;
      cfg.scan_samples = o.samples;
      cfg.chsh.grid_per_angle = o.grid;
      cfg.chsh.refine_iters = o.refine;
      auto reports = swap_protocol(ab, cb, bell_measurement_basis(),
                                   swap_hadamard(), cfg);
      json arr = json::array();
      for (const auto& r : reports) arr.push_back(to_json(r));
      json doc = make_envelope(
          "swap", o, {{"samples", o.samples}, {"grid", o.grid}});
      doc["result"] = json{{"branches", arr}};
      emit(o, dump(doc));
    } else if (c_ghz->parsed()) {
      json doc = make_envelope("ghz", o, json::object());
      doc["result"] = to_json(ghz_demo());
      emit(o, dump(doc));
    } else if (c_attack->parsed()) {
      auto pair = presets::swap_input_pair();
      SwapConfig cfg;
      cfg.seed = o.seed;
      cfg.scan_samples = o.samples;
      auto rep = non_maximal_attack(pair.first, pair.second, eta, cfg);
      json doc = make_envelope("attack", o,
                               {{"eta", eta}, {"samples", o.samples}});
      doc["result"] = to_json(rep);
      emit(o, dump(doc));
    }
    return kExitOk;
  } catch (const prbox::DegeneratePostSelection& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitDegenerate;
  } catch (const prbox::ZeroBranch& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitDegenerate;
  } catch (const nlohmann::json::exception& e) {
    std::fprintf(stderr, "input error: %s\n", e.what());
    return kExitInput;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "input error: %s\n", e.what());
    return kExitInput;
  } catch (const std::out_of_range& e) {
    std::fprintf(stderr, "input error: %s\n", e.what());
    return kExitInput;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return kExitInternal;
  }
}
