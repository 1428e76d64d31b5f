// Copyright 2026 The InfoDesign Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Independent oracles for tests. Everything here enumerates the period
// timing literally (principal joint signal, every agent's exogenous slots,
// selection, actions) instead of going through selection channels or the
// library's linear solves.

#ifndef INFODESIGN_TESTS_SUPPORT_ORACLES_HPP_
#define INFODESIGN_TESTS_SUPPORT_ORACLES_HPP_

#include <cmath>
#include <functional>
#include <vector>

#include "infodesign/infodesign.hpp"

namespace infodesign::testing {

/// One-period expected reward r[g] for agent `focus` and state kernel P[g*G+h].
struct Stage {
  std::vector<double> r;
  std::vector<double> P;
};

/// Slot chosen by agent j at (g, own batch b).
using SlotRule = std::function<std::size_t(std::size_t j, std::size_t g, std::size_t b)>;
/// Probability agent j plays action a at (g, own batch b, selected signal s).
using ActionRule = std::function<double(std::size_t j, std::size_t g, std::size_t b,
                                        std::size_t s, std::size_t a)>;

inline Stage literal_stage(const AugmentedGame& game, const SignalingRule& alpha,
                           std::size_t jt, std::size_t focus,
                           const SlotRule& slot, const ActionRule& act) {
  const Dims& d = game.dims;
  const Layout lay(d);
  const std::size_t G = d.states, n = d.agents;
  const Radix exo(lay.nE(), n);
  Stage st;
  st.r.assign(G, 0.0);
  st.P.assign(G * G, 0.0);
  const std::size_t th = lay.joint_types.digit(jt, focus);
  std::vector<std::size_t> b(n), s(n);
  for (std::size_t g = 0; g < G; ++g) {
    const double* arow = alpha.table.data() + lay.signaling_row(g, jt);
    for (std::size_t w = 0; w < lay.nW(); ++w) {
      if (arow[w] == 0.0) continue;
      for (std::size_t ex = 0; ex < exo.size(); ++ex) {
        double p = arow[w];
        for (std::size_t j = 0; j < n; ++j) {
          const std::size_t e = exo.digit(ex, j);
          p *= game.exogenous[e];
          b[j] = lay.batch_index(lay.joint_signals.digit(w, j), e);
          s[j] = lay.batch.digit(b[j], slot(j, g, b[j]));
        }
        if (p == 0.0) continue;
        for (std::size_t a = 0; a < lay.nA(); ++a) {
          double pa = p;
          for (std::size_t j = 0; j < n && pa != 0.0; ++j)
            pa *= act(j, g, b[j], s[j], lay.joint_actions.digit(a, j));
          if (pa == 0.0) continue;
          st.r[g] += pa * game.reward(focus, a, g, s[focus], th);
          for (std::size_t h = 0; h < G; ++h)
            st.P[g * G + h] += pa * game.transition[lay.transition_row(g, a) + h];
        }
      }
    }
  }
  return st;
}

/// Stationary rules from a selection and policy profile.
inline SlotRule slots_of(const AugmentedGame& game, const SelectionProfile& beta,
                         std::size_t jt) {
  const Layout lay = game.layout();
  return [lay, &beta, jt](std::size_t j, std::size_t g, std::size_t b) {
    return static_cast<std::size_t>(
        beta.positions[j][lay.selection_index(g, lay.joint_types.digit(jt, j), b)]);
  };
}

inline ActionRule actions_of(const AugmentedGame& game, const PolicyProfile& pi,
                             std::size_t jt) {
  const Layout lay = game.layout();
  return [lay, &pi, jt](std::size_t j, std::size_t g, std::size_t, std::size_t s,
                        std::size_t a) {
    return pi.probs[j][lay.policy_row(g, s, lay.joint_types.digit(jt, j)) + a];
  };
}

/// Fixed point of J = r + gamma P J by plain iteration (to 1e-15 sup change).
inline std::vector<double> iterate_values(const Stage& st, double gamma) {
  const std::size_t G = st.r.size();
  std::vector<double> J(G, 0.0), next(G);
  for (int it = 0; it < 100000; ++it) {
    double change = 0.0;
    for (std::size_t g = 0; g < G; ++g) {
      double v = st.r[g];
      for (std::size_t h = 0; h < G; ++h) v += gamma * st.P[g * G + h] * J[h];
      next[g] = v;
      change = std::max(change, std::abs(v - J[g]));
    }
    J.swap(next);
    if (change < 1e-15) break;
  }
  return J;
}

/// J_i for every agent via literal enumeration and value iteration.
inline std::vector<std::vector<double>> literal_J(const AugmentedGame& game,
                                                  const SignalingRule& alpha,
                                                  const SelectionProfile& beta,
                                                  const PolicyProfile& pi,
                                                  std::size_t jt) {
  std::vector<std::vector<double>> out;
  for (std::size_t i = 0; i < game.dims.agents; ++i)
    out.push_back(iterate_values(
        literal_stage(game, alpha, jt, i, slots_of(game, beta, jt), actions_of(game, pi, jt)),
        game.discount));
  return out;
}

/// Agent i's value at (g, selected joint signal w) from J: sum_a pi(a|w) Q.
inline double literal_V(const AugmentedGame& game, const PolicyProfile& pi,
                        const std::vector<double>& J_i, std::size_t i,
                        std::size_t g, std::size_t w, std::size_t jt) {
  const Layout lay = game.layout();
  double v = 0.0;
  for (std::size_t a = 0; a < lay.nA(); ++a) {
    double p = 1.0;
    for (std::size_t j = 0; j < game.dims.agents; ++j)
      p *= pi.probs[j][lay.policy_row(g, lay.joint_signals.digit(w, j),
                                      lay.joint_types.digit(jt, j)) +
                       lay.joint_actions.digit(a, j)];
    if (p == 0.0) continue;
    double cont = 0.0;
    for (std::size_t h = 0; h < game.dims.states; ++h)
      cont += game.transition[lay.transition_row(g, a) + h] * J_i[h];
    v += p * (game.reward(i, a, g, lay.joint_signals.digit(w, i),
                          lay.joint_types.digit(jt, i)) +
              game.discount * cont);
  }
  return v;
}

/**
 * Best improvement over all two-period deterministic deviations of agent i,
 * max over initial states of (deviation value - equilibrium value).
 * Family kSelection: arbitrary slot rules in periods 0 and 1, policies as in
 * the profile. Family kPolicy: arbitrary deterministic actions per (state,
 * own batch) in periods 0 and 1, selection as in the profile. Every pair of
 * period rules is enumerated.
 */
enum class DeviationFamily { kSelection, kPolicy };

inline double two_period_improvement(const AugmentedGame& game,
                                     const SignalingRule& alpha,
                                     const SelectionProfile& beta,
                                     const PolicyProfile& pi, std::size_t i,
                                     std::size_t jt, DeviationFamily family) {
  const Dims& d = game.dims;
  const Layout lay(d);
  const std::size_t G = d.states;
  const std::size_t cells = G * lay.nB();
  const std::size_t base = family == DeviationFamily::kSelection ? d.batch : d.actions;
  const std::uint64_t rules = checked_pow(base, cells);
  const SlotRule eq_slot = slots_of(game, beta, jt);
  const ActionRule eq_act = actions_of(game, pi, jt);
  const std::vector<double> J =
      iterate_values(literal_stage(game, alpha, jt, i, eq_slot, eq_act), game.discount);
  std::vector<Stage> stages;
  stages.reserve(rules);
  const Radix digits(base, cells);
  for (std::uint64_t r = 0; r < rules; ++r) {
    SlotRule slot = eq_slot;
    ActionRule act = eq_act;
    if (family == DeviationFamily::kSelection) {
      slot = [&, r](std::size_t j, std::size_t g, std::size_t b) {
        return j == i ? digits.digit(r, g * lay.nB() + b) : eq_slot(j, g, b);
      };
    } else {
      act = [&, r](std::size_t j, std::size_t g, std::size_t b, std::size_t s,
                   std::size_t a) {
        if (j != i) return eq_act(j, g, b, s, a);
        return digits.digit(r, g * lay.nB() + b) == a ? 1.0 : 0.0;
      };
    }
    stages.push_back(literal_stage(game, alpha, jt, i, slot, act));
  }
  // W1[r2][g] = stage r2 then J; value[r1][r2][g0] = r1 stage + gamma P1 W1.
  const double gamma = game.discount;
  std::vector<std::vector<double>> W1(rules, std::vector<double>(G));
  for (std::uint64_t r = 0; r < rules; ++r)
    for (std::size_t g = 0; g < G; ++g) {
      double v = stages[r].r[g];
      for (std::size_t h = 0; h < G; ++h) v += gamma * stages[r].P[g * G + h] * J[h];
      W1[r][g] = v;
    }
  double best = -std::numeric_limits<double>::infinity();
  for (std::uint64_t r0 = 0; r0 < rules; ++r0)
    for (std::uint64_t r1 = 0; r1 < rules; ++r1)
      for (std::size_t g = 0; g < G; ++g) {
        double v = stages[r0].r[g];
        for (std::size_t h = 0; h < G; ++h) v += gamma * stages[r0].P[g * G + h] * W1[r1][h];
        best = std::max(best, v - J[g]);
      }
  return best;
}

}  // namespace infodesign::testing

#endif  // INFODESIGN_TESTS_SUPPORT_ORACLES_HPP_
