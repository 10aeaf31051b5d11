#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>

#include "loopgas/loops.hpp"
#include "loopgas/util.hpp"

namespace loopgas {

// MC acceptance ratios on large configs need the log form, oracles the linear one.
using WeightValue = LogValue;

// Critical tension of the O(N) honeycomb loop model, N in [-2, 2].
inline double t_c_honeycomb(double N) {
  if (N > 2.0 || N < -2.0) throw std::invalid_argument("t_c_honeycomb: need |N| <= 2");
  return 1.0 / std::sqrt(2.0 + std::sqrt(2.0 - N));
}

// Self-dual point of the O(1) square-lattice model (Ising HTE self-duality).
inline double t_self_dual_square() { return std::sqrt(2.0) - 1.0; }

// Effective external tension induced by incoherent X noise of rate p.
inline double external_tension(double p) {
  if (p < 0.0 || p > 0.5) throw std::invalid_argument("external_tension: need p in [0, 1/2]");
  return 2.0 * p * (1.0 - p) / (p * p + (1.0 - p) * (1.0 - p));
}

// Inverse of external_tension on [0, 1] -> [0, 1/2].
inline double error_rate_for_tension(double t) {
  if (t < 0.0 || t > 1.0) throw std::invalid_argument("error_rate_for_tension: need t in [0, 1]");
  if (t == 0.0) return 0.0;
  double r = (1.0 - std::sqrt(1.0 - t * t)) / t;
  return r / (1.0 + r);
}

inline int weight_abelian(const LoopLattice& lat, const EdgeMask& m) {
  return is_closed(lat, m) ? 1 : 0;
}

inline WeightValue weight_topological(const LoopStats& st, double t, double N) {
  if (N <= 0.0 || t < 0.0) throw std::invalid_argument("weight_topological: need N > 0, t >= 0");
  if (t == 0.0) return st.length == 0 ? WeightValue{0.0, 1} : WeightValue::zero();
  return {st.length * std::log(t) + st.cyclo * std::log(N), 1};
}

inline WeightValue weight_topological(const LoopLattice& lat, const EdgeMask& m, double t,
                                      double N) {
  if (!is_closed(lat, m)) throw std::invalid_argument("weight_topological: config not closed");
  LoopScratch sc(lat.n_vertices);
  return weight_topological(loop_stats(lat, m, sc), t, N);
}

// Purity summand for uncorrelated noise: decoherence factor per edge times the
// squared topological weight.
inline WeightValue weight_purity(const LoopStats& st, double p, double t_a, double d_a) {
  double f = external_tension(p);
  if (f == 0.0) return st.length == 0 ? WeightValue{0.0, 1} : WeightValue::zero();
  WeightValue sq = weight_topological(st, t_a * t_a, d_a * d_a);
  if (sq.sign == 0) return sq;
  return {st.length * std::log(f) + sq.log_abs, 1};
}

// One summand of the signed-eta partition sum; eta is indexed by edge (one
// decohered site sits on every edge of the loop lattice).
inline WeightValue weight_signed(const LoopLattice& lat, const EdgeMask& m,
                                 const std::vector<int8_t>& eta, double t_a, double d_a) {
  if (int(eta.size()) != lat.n_edges())
    throw std::invalid_argument("weight_signed: eta size mismatch");
  if (!is_closed(lat, m)) throw std::invalid_argument("weight_signed: config not closed");
  int sign = 1;
  m.for_each_bit([&](int e) {
    if (eta[e] < 0) sign = -sign;
  });
  LoopScratch sc(lat.n_vertices);
  WeightValue w = weight_topological(loop_stats(lat, m, sc), t_a, d_a);
  w.sign *= sign;
  return w;
}

// Uniform linear-scale evaluator so partition sums and correlators can take any
// of the weight families through one interface. Evaluators must accept open
// configs too (the string correlator needs them); families defined only on
// closed configs return 0 there.
struct WeightModel {
  std::string name;
  std::function<double(const LoopLattice&, const EdgeMask&, const LoopStats&)> eval;

  static WeightModel abelian() {
    return {"abelian", [](const LoopLattice& lat, const EdgeMask& m, const LoopStats&) {
              return double(weight_abelian(lat, m));
            }};
  }

  static WeightModel topological(double t, double N) {
    if (N <= 0.0 || t < 0.0)
      throw std::invalid_argument("WeightModel::topological: need N > 0, t >= 0");
    return {"topological", [t, N](const LoopLattice&, const EdgeMask&, const LoopStats& st) {
              return weight_topological(st, t, N).value();
            }};
  }

  static WeightModel purity(double p, double t_a, double d_a) {
    external_tension(p);  // range check
    return {"purity", [p, t_a, d_a](const LoopLattice&, const EdgeMask&, const LoopStats& st) {
              return weight_purity(st, p, t_a, d_a).value();
            }};
  }

  static WeightModel signed_eta(std::vector<int8_t> eta, double t_a, double d_a) {
    for (int8_t v : eta)
      if (v != 1 && v != -1)
        throw std::invalid_argument("WeightModel::signed_eta: entries must be +-1");
    return {"signed-eta",
            [eta = std::move(eta), t_a, d_a](const LoopLattice& lat, const EdgeMask& m,
                                             const LoopStats& st) {
              if (!is_closed(lat, m)) return 0.0;
              int sign = 1;
              m.for_each_bit([&](int e) {
                if (eta[e] < 0) sign = -sign;
              });
              return sign * weight_topological(st, t_a, d_a).value();
            }};
  }
};

// Summand of the n-fold Renyi loop sum at maximal decoherence; the configs must
// cancel pairwise under symmetric difference.
inline WeightValue renyi_summand(const LoopLattice& lat, const std::vector<EdgeMask>& configs,
                                 double t_a, double d_a) {
  if (configs.size() < 2) throw std::invalid_argument("renyi_summand: need n >= 2");
  EdgeMask x;
  for (const auto& m : configs) x ^= m;
  if (!x.empty()) throw std::invalid_argument("renyi_summand: configs do not cancel");
  LoopScratch sc(lat.n_vertices);
  WeightValue out{0.0, 1};
  for (const auto& m : configs) {
    if (!is_closed(lat, m)) throw std::invalid_argument("renyi_summand: config not closed");
    WeightValue w = weight_topological(loop_stats(lat, m, sc), t_a, d_a);
    if (w.sign == 0) return w;
    out.log_abs += w.log_abs;
  }
  return out;
}

}  // namespace loopgas
