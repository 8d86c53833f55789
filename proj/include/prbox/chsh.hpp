// Correlations of pre/post-selected ensembles, the CHSH functional and its
// numerical maximization, the closed-form swapped-pair correlation, the
// d-curve sweep along the optimal angle family, and the PR-box game check.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "prbox/nosignal.hpp"

namespace prbox {

struct ChshSettings {
  MeasurementDirection a, a_prime, b, b_prime;
};

namespace detail {

struct Spinors2 {
  std::array<cxd, 2> up, down;
};

inline Spinors2 direction_spinors(const MeasurementDirection& d) {
  Unitary2 v = direction_unitary(d);
  return {v.column(0), v.column(1)};
}

// Joint up/down weights when both parties of a bipartite ensemble measure.
// Returns NaN-filled weights when post-selection is incompatible with every
// outcome.
inline std::array<double, 4> joint2_weights(const PureState& init,
                                            const PureState& fin,
                                            const Spinors2& sa,
                                            const Spinors2& sb) {
  std::array<double, 4> w{};
  double total = 0;
  int k = 0;
  for (int a = 0; a < 2; ++a) {
    const auto& va = a == 0 ? sa.up : sa.down;
    for (int b = 0; b < 2; ++b, ++k) {
      const auto& vb = b == 0 ? sb.up : sb.down;
      cxd to_final(0), from_init(0);
      for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c) {
          cxd basis_amp = va[r] * vb[c];
          to_final += std::conj(fin[r * 2 + c]) * basis_amp;
          from_init += std::conj(basis_amp) * init[r * 2 + c];
        }
      double p = std::norm(to_final * from_init);
      if (p < kProbClampTol) p = 0;
      w[k] = p;
      total += p;
    }
  }
  if (total < kDegenerateTol) {
    w.fill(std::numeric_limits<double>::quiet_NaN());
    return w;
  }
  for (auto& v : w) v /= total;
  return w;
}

inline double correlation_or_nan(const PureState& init, const PureState& fin,
                                 const Spinors2& sa, const Spinors2& sb) {
  auto w = joint2_weights(init, fin, sa, sb);
  return w[0] + w[3] - w[1] - w[2];
}

}  // namespace detail

// C(A,B) = P(up,up) + P(down,down) - P(up,down) - P(down,up) with both
// parties measuring.
inline double correlation(const PrePostEnsemble& ens,
                          const MeasurementDirection& dir_a,
                          const MeasurementDirection& dir_b) {
  if (ens.num_parties() != 2)
    throw std::invalid_argument("correlation: need a bipartite ensemble");
  double c = detail::correlation_or_nan(ens.initial, ens.final_state,
                                        detail::direction_spinors(dir_a),
                                        detail::direction_spinors(dir_b));
  if (std::isnan(c)) throw DegeneratePostSelection();
  return c;
}

// |C(A,B) - C(A,B') + C(A',B) + C(A',B')|
inline double chsh_value(const PrePostEnsemble& ens, const ChshSettings& s) {
  return std::abs(correlation(ens, s.a, s.b) - correlation(ens, s.a, s.b_prime) +
                  correlation(ens, s.a_prime, s.b) +
                  correlation(ens, s.a_prime, s.b_prime));
}

// Closed-form correlation of a swapped-pair ensemble written in its Schmidt
// frame, with x = alpha - alpha^2 and phi = phi_a + phi_b.
inline double swapped_correlation_closed_form(double alpha, double theta,
                                              double omega_a, double phi_a,
                                              double omega_b, double phi_b) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument(
        "swapped_correlation_closed_form: alpha must be in (0,1)");
  double x = alpha - alpha * alpha;
  double phi = phi_a + phi_b;
  double sa = std::sin(omega_a), sb = std::sin(omega_b);
  double num = 16.0 * x * std::cos(omega_a) * std::cos(omega_b) +
               8.0 * std::sqrt(x) * std::cos(phi - theta) * sa * sb;
  double den =
      x * (3.0 + std::cos(2.0 * omega_a)) * (3.0 + std::cos(2.0 * omega_b)) +
      2.0 * (1.0 + 2.0 * x * std::cos(2.0 * phi - 2.0 * theta)) * sa * sa * sb *
          sb +
      2.0 * std::sqrt(x) * std::cos(phi - theta) * std::sin(2.0 * omega_a) *
          std::sin(2.0 * omega_b);
  return num / den;
}

// ---- numerical maximization ----

struct MaximizeConfig {
  int grid_per_angle = 24;  // coarse grid resolution per angle
  int refine_iters = 300;   // pattern-search poll rounds per start
  std::uint64_t seed = 0;   // echoed into the report
  int starts = 8;           // refinement starts taken from the grid
};

struct ChshOptimizerInfo {
  int grid_per_angle = 0;
  int per_party_points = 0;  // direction grid size actually used per party
  int refine_iters = 0;
  int starts = 0;
  bool converged = false;
  bool swapped_reduction = false;
  std::uint64_t seed = 0;
};

struct ChshReport {
  double value = 0.0;
  ChshSettings directions;
  ChshOptimizerInfo optimizer;
  std::string ensemble_summary;
  bool uncertified = false;
};

namespace detail {

struct GridCandidate {
  double value = -1.0;
  int a = 0, a_prime = 0, b = 0, b_prime = 0;
};

// f(x) for the pattern search: the CHSH combination over raw angle vector
// (wA, pA, wA', pA', wB, pB, wB', pB'); -1 when any correlation is
// degenerate.
class ChshObjective {
 public:
  ChshObjective(const PureState& init, const PureState& fin)
      : init_(init), fin_(fin) {}

  double operator()(const std::array<double, 8>& x) const {
    Spinors2 a = direction_spinors({x[0], x[1]});
    Spinors2 ap = direction_spinors({x[2], x[3]});
    Spinors2 b = direction_spinors({x[4], x[5]});
    Spinors2 bp = direction_spinors({x[6], x[7]});
    double c1 = correlation_or_nan(init_, fin_, a, b);
    double c2 = correlation_or_nan(init_, fin_, a, bp);
    double c3 = correlation_or_nan(init_, fin_, ap, b);
    double c4 = correlation_or_nan(init_, fin_, ap, bp);
    double v = std::abs(c1 - c2 + c3 + c4);
    return std::isnan(v) ? -1.0 : v;
  }

 private:
  const PureState& init_;
  const PureState& fin_;
};

struct RefineResult {
  double value = -1.0;
  std::array<double, 8> x{};
  bool converged = false;
};

// Derivative-free coordinate poll: move to the best improving neighbor,
// halve the step when no poll direction improves, stop below 1e-7.
inline RefineResult pattern_search(const ChshObjective& f,
                                   std::array<double, 8> x, double step,
                                   int max_rounds) {
  constexpr double kMinStep = 1e-7;
  RefineResult res;
  double fx = f(x);
  for (int round = 0; round < max_rounds && step >= kMinStep; ++round) {
    double best_f = fx;
    int best_i = -1;
    double best_v = 0;
    for (int i = 0; i < 8; ++i) {
      for (double s : {+1.0, -1.0}) {
        std::array<double, 8> y = x;
        y[i] += s * step;
        double fy = f(y);
        if (fy > best_f) {
          best_f = fy;
          best_i = i;
          best_v = s * step;
        }
      }
    }
    if (best_i < 0) {
      step *= 0.5;
    } else {
      x[best_i] += best_v;
      fx = best_f;
    }
  }
  res.value = fx;
  res.x = x;
  res.converged = step < kMinStep;
  return res;
}

}  // namespace detail

// Maximize the CHSH combination over the four measurement directions.
// A deterministic coarse grid (restricted to the optimal phase relation when
// the ensemble fits the swapped form) seeds a derivative-free refinement;
// the reported value is an evaluated point and therefore a certified lower
// bound on the maximum.
inline ChshReport maximize_chsh(const PrePostEnsemble& ens,
                                const MaximizeConfig& cfg = {}) {
  if (ens.num_parties() != 2)
    throw std::invalid_argument("maximize_chsh: need a bipartite ensemble");
  if (cfg.grid_per_angle < 2 || cfg.starts < 1 || cfg.refine_iters < 1)
    throw std::invalid_argument("maximize_chsh: bad configuration");

  ChshReport report;
  ClassLabel label = classify(ens);
  report.ensemble_summary = to_string(label.kind);
  if (label.fit) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), " (alpha=%.6f)", label.fit->alpha);
    report.ensemble_summary += buf;
  }
  report.uncertified = label.kind == EnsembleClass::uncertified;

  auto fit = detect_swapped_form(ens);
  int g = cfg.grid_per_angle;
  std::vector<MeasurementDirection> dirs_a, dirs_b;
  if (fit) {
    // phases pinned to phi_a + phi_b = theta in the fitted frame; only the
    // polar angles are gridded
    dirs_a.reserve(g);
    dirs_b.reserve(g);
    for (int i = 0; i < g; ++i) {
      double w = two_pi * i / g;
      Unitary2 va = fit->basis_a * direction_unitary({w, fit->theta / 2});
      Unitary2 vb = fit->basis_b * direction_unitary({w, fit->theta / 2});
      dirs_a.push_back(direction_of_spinor(va.column(0)));
      dirs_b.push_back(direction_of_spinor(vb.column(0)));
    }
  } else {
    dirs_a.reserve(static_cast<std::size_t>(g) * g);
    for (int i = 0; i < g; ++i)
      for (int j = 0; j < g; ++j)
        dirs_a.push_back({two_pi * i / g, two_pi * j / g});
    dirs_b = dirs_a;
  }

  const std::size_t pa = dirs_a.size(), pb = dirs_b.size();
  std::vector<detail::Spinors2> spin_a(pa), spin_b(pb);
  for (std::size_t i = 0; i < pa; ++i)
    spin_a[i] = detail::direction_spinors(dirs_a[i]);
  for (std::size_t i = 0; i < pb; ++i)
    spin_b[i] = detail::direction_spinors(dirs_b[i]);

  // correlation matrix over the per-party grids
  std::vector<double> corr(pa * pb);
  detail::parallel_for(
      pa * pb,
      [&](std::size_t idx) {
        corr[idx] = detail::correlation_or_nan(
            ens.initial, ens.final_state, spin_a[idx / pb], spin_b[idx % pb]);
      },
      2048);

  // For fixed (b, b'), the best grid combination splits:
  //   max_a [C(a,b) - C(a,b')] + max_a' [C(a',b) + C(a',b')]
  // (and the mirrored signs for the absolute value).
  std::vector<detail::GridCandidate> pair_best(pb * pb);
  detail::parallel_for(
      pb,
      [&](std::size_t b) {
        for (std::size_t bp = 0; bp < pb; ++bp) {
          detail::GridCandidate cand;
          for (int sign : {+1, -1}) {
            double best_diff = -std::numeric_limits<double>::infinity();
            double best_sum = -std::numeric_limits<double>::infinity();
            int arg_diff = -1, arg_sum = -1;
            for (std::size_t a = 0; a < pa; ++a) {
              double cb = corr[a * pb + b], cbp = corr[a * pb + bp];
              if (std::isnan(cb) || std::isnan(cbp)) continue;
              double diff = sign * (cb - cbp);
              double sum = sign * (cb + cbp);
              if (diff > best_diff) {
                best_diff = diff;
                arg_diff = static_cast<int>(a);
              }
              if (sum > best_sum) {
                best_sum = sum;
                arg_sum = static_cast<int>(a);
              }
            }
            if (arg_diff < 0 || arg_sum < 0) continue;
            double v = best_diff + best_sum;
            if (v > cand.value) {
              cand.value = v;
              cand.a = arg_diff;
              cand.a_prime = arg_sum;
              cand.b = static_cast<int>(b);
              cand.b_prime = static_cast<int>(bp);
            }
          }
          pair_best[b * pb + bp] = cand;
        }
      },
      8);

  std::vector<std::size_t> order(pair_best.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::size_t keep = std::min<std::size_t>(cfg.starts, order.size());
  std::partial_sort(order.begin(), order.begin() + keep, order.end(),
                    [&](std::size_t l, std::size_t r) {
                      if (pair_best[l].value != pair_best[r].value)
                        return pair_best[l].value > pair_best[r].value;
                      return l < r;
                    });

  detail::ChshObjective objective(ens.initial, ens.final_state);
  double grid_step = two_pi / g;
  detail::RefineResult best;
  for (std::size_t s = 0; s < keep; ++s) {
    const auto& cand = pair_best[order[s]];
    if (cand.value < 0) continue;
    std::array<double, 8> x{
        dirs_a[cand.a].omega,       dirs_a[cand.a].phi,
        dirs_a[cand.a_prime].omega, dirs_a[cand.a_prime].phi,
        dirs_b[cand.b].omega,       dirs_b[cand.b].phi,
        dirs_b[cand.b_prime].omega, dirs_b[cand.b_prime].phi};
    auto r = detail::pattern_search(objective, x, grid_step, cfg.refine_iters);
    if (r.value > best.value) best = r;
  }
  if (best.value < 0)
    throw DegeneratePostSelection();  // every sampled setting was degenerate

  report.value = best.value;
  report.directions = {MeasurementDirection{best.x[0], best.x[1]}.folded(),
                       MeasurementDirection{best.x[2], best.x[3]}.folded(),
                       MeasurementDirection{best.x[4], best.x[5]}.folded(),
                       MeasurementDirection{best.x[6], best.x[7]}.folded()};
  report.optimizer = {cfg.grid_per_angle,
                      static_cast<int>(pa),
                      cfg.refine_iters,
                      static_cast<int>(keep),
                      best.converged,
                      static_cast<bool>(fit),
                      cfg.seed};
  return report;
}

// ---- the d-curve along the optimal angle family ----

struct DAlphaConfig {
  double d_tol = 1e-6;      // bracketed scalar search tolerance
  int coarse_points = 201;  // coarse scan of d in [0,1]
  bool cross_check = true;  // also run the unconstrained maximizer
  MaximizeConfig cross{};
};

struct DAlphaPoint {
  double alpha = 0.0;
  double d = 0.0;
  double b_max = 0.0;
  bool converged = false;
  double b_unconstrained = 0.0;  // 0 when the cross-check is disabled
};

// Angle family realizing the maximum for the swapped pair with weight alpha
// (written in its Schmidt frame, relative phase theta):
//   wA = 3pi/2, wA' = pi, wB = pi + pi d/4, wB' = pi - pi d/4,
//   phi_a = phi_a', phi_b = phi_b', phi_a + phi_b = theta.
inline ChshSettings d_family_settings(double d, double theta = 0.0) {
  double half = theta / 2;
  return {{3 * pi / 2, half}, {pi, half}, {pi + pi * d / 4, half},
          {pi - pi * d / 4, half}};
}

inline DAlphaPoint d_alpha(double alpha, const DAlphaConfig& cfg = {}) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument("d_alpha: alpha must be in (0,1)");
  if (cfg.coarse_points < 3)
    throw std::invalid_argument("d_alpha: need at least three coarse points");
  PrePostEnsemble ens = presets::swapped_ensemble(alpha, 0.0);
  auto value_at = [&](double d) {
    return chsh_value(ens, d_family_settings(d));
  };

  int best = 0;
  double best_v = -1;
  for (int i = 0; i < cfg.coarse_points; ++i) {
    double d = static_cast<double>(i) / (cfg.coarse_points - 1);
    double v = value_at(d);
    if (v > best_v) {
      best_v = v;
      best = i;
    }
  }
  double lo = std::max(0.0, static_cast<double>(best - 1) /
                                (cfg.coarse_points - 1));
  double hi = std::min(1.0, static_cast<double>(best + 1) /
                                (cfg.coarse_points - 1));

  // golden-section refinement inside the coarse bracket
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = hi - gr * (hi - lo);
  double d2 = lo + gr * (hi - lo);
  double fc = value_at(c), fd = value_at(d2);
  int guard = 0;
  while (hi - lo > cfg.d_tol && guard++ < 200) {
    if (fc > fd) {
      hi = d2;
      d2 = c;
      fd = fc;
      c = hi - gr * (hi - lo);
      fc = value_at(c);
    } else {
      lo = c;
      c = d2;
      fc = fd;
      d2 = lo + gr * (hi - lo);
      fd = value_at(d2);
    }
  }
  DAlphaPoint point;
  point.alpha = alpha;
  point.d = (lo + hi) / 2;
  point.b_max = value_at(point.d);
  point.converged = hi - lo <= cfg.d_tol;
  if (cfg.cross_check)
    point.b_unconstrained = maximize_chsh(ens, cfg.cross).value;
  return point;
}

// ---- the PR-box game ----

// Inputs map to directions; outputs map spin up to 1 and down to 0; a round
// with inputs (x, y) is won when a XOR b = x AND y.
struct PrGameMapping {
  std::array<MeasurementDirection, 2> alice;  // indexed by input x
  std::array<MeasurementDirection, 2> bob;    // indexed by input y
};

// The x/z assignment under which the maximal ensemble wins every round:
// x=1 -> Alice x, x=0 -> Alice z; y=0 -> Bob x, y=1 -> Bob z.
inline PrGameMapping pr_box_mapping() {
  return {{MeasurementDirection::z(), MeasurementDirection::x()},
          {MeasurementDirection::x(), MeasurementDirection::z()}};
}

struct PrGameReport {
  std::array<std::array<double, 2>, 2> success{};  // [x][y]
  double min_success = 0.0;
  double mean_success = 0.0;
};

// Winning probability for each input pair, computed exactly from the joint
// distribution (no sampling).
inline PrGameReport pr_game(const PrePostEnsemble& ens,
                            const PrGameMapping& mapping = pr_box_mapping()) {
  if (ens.num_parties() != 2)
    throw std::invalid_argument("pr_game: need a bipartite ensemble");
  PrGameReport rep;
  rep.min_success = 1.0;
  for (int x = 0; x < 2; ++x) {
    for (int y = 0; y < 2; ++y) {
      auto w = detail::joint2_weights(
          ens.initial, ens.final_state,
          detail::direction_spinors(mapping.alice[x]),
          detail::direction_spinors(mapping.bob[y]));
      if (std::isnan(w[0])) throw DegeneratePostSelection();
      // outcome (i,j): a = 1-i, b = 1-j, so a XOR b = i XOR j
      double win = 0;
      int k = 0;
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j, ++k)
          if ((i ^ j) == (x & y)) win += w[k];
      rep.success[x][y] = win;
      rep.min_success = std::min(rep.min_success, win);
      rep.mean_success += win / 4;
    }
  }
  return rep;
}

}  // namespace prbox
