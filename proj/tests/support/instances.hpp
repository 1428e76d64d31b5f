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

// Instance builders shared by unit and acceptance tests.

#ifndef INFODESIGN_TESTS_SUPPORT_INSTANCES_HPP_
#define INFODESIGN_TESTS_SUPPORT_INSTANCES_HPP_

#include <utility>
#include <vector>

#include "infodesign/infodesign.hpp"

namespace infodesign::testing {

/// Coordination instance with a known aligned strategy.
struct Planted {
  AugmentedGame game;
  SignalingRule alpha;  // 1/2 on (0,0) and (1,1)
  PolicyProfile pi;     // play your signal
  Goal kappa;           // pushforward of (alpha, pi)
};

/**
 * Two agents, two actions, two signals, batch size 2, one type. Agents earn
 * c_i when actions match and h_{i,g} < c_i otherwise; transitions only depend
 * on whether actions match, so relabeling actions changes nothing.
 */
inline Planted planted_coordination(std::uint64_t seed, std::size_t states) {
  Rng rng(seed);
  Planted p;
  Dims d;
  d.agents = 2;
  d.states = states;
  d.actions = 2;
  d.signals = 2;
  d.types = 1;
  d.batch = 2;
  AugmentedGame& g = p.game;
  g.dims = d;
  g.discount = 0.9;
  g.initial = rng.simplex(states);
  g.type_prior = {1.0};
  const Layout lay(d);
  g.transition.assign(states * lay.nA() * states, 0.0);
  for (std::size_t s = 0; s < states; ++s) {
    const auto same = rng.simplex(states);
    const auto diff = rng.simplex(states);
    for (std::size_t a = 0; a < lay.nA(); ++a) {
      const bool match = lay.joint_actions.digit(a, 0) == lay.joint_actions.digit(a, 1);
      const auto& row = match ? same : diff;
      std::copy(row.begin(), row.end(), g.transition.begin() + lay.transition_row(s, a));
    }
  }
  g.rewards.assign(2, std::vector<double>(lay.nA() * states * 2, 0.0));
  for (std::size_t i = 0; i < 2; ++i) {
    const double c = rng.uniform(1.0, 2.0);
    for (std::size_t s = 0; s < states; ++s) {
      const double h = rng.uniform(0.0, 0.5);
      for (std::size_t a = 0; a < lay.nA(); ++a) {
        const bool match = lay.joint_actions.digit(a, 0) == lay.joint_actions.digit(a, 1);
        for (std::size_t w = 0; w < 2; ++w)
          g.rewards[i][lay.reward_index(a, s, w, 0)] = match ? c : h;
      }
    }
  }
  g.exogenous = rng.simplex(2);
  p.alpha.table.assign(states * lay.nW(), 0.0);
  for (std::size_t s = 0; s < states; ++s) {
    p.alpha.table[lay.signaling_row(s, 0) + 0] = 0.5;
    p.alpha.table[lay.signaling_row(s, 0) + 3] = 0.5;
  }
  p.pi.probs.assign(2, std::vector<double>(states * 2 * 2, 0.0));
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t s = 0; s < states; ++s)
      for (std::size_t w = 0; w < 2; ++w) p.pi.probs[i][lay.policy_row(s, w, 0) + w] = 1.0;
  p.kappa = pushforward_goal(g, p.alpha, SelectionProfile::obedient(d), p.pi);
  return p;
}

/// Single-agent instance with a unique aligned design.
struct Micro {
  AugmentedGame game;
  Goal kappa;                          // point mass on argmax_a r(a, g)
  std::vector<std::size_t> best_signal;  // per state
  std::vector<std::size_t> best_action;  // per state
};

/**
 * One agent, two actions, two signals, batch size 2. R(a, g, w) = r(a, g) +
 * s(g, w) with r in [0, 1] and a signal bonus that favors one signal by more
 * than the spread of r; transitions ignore the action.
 */
inline Micro micro_instance(std::uint64_t seed, std::size_t states) {
  Rng rng(seed);
  Micro m;
  Dims d;
  d.agents = 1;
  d.states = states;
  d.actions = 2;
  d.signals = 2;
  d.types = 1;
  d.batch = 2;
  AugmentedGame& g = m.game;
  g.dims = d;
  g.discount = 0.9;
  g.initial = rng.simplex(states);
  g.type_prior = {1.0};
  const Layout lay(d);
  for (std::size_t s = 0; s < states; ++s) {
    const auto row = rng.simplex(states);
    for (std::size_t a = 0; a < 2; ++a) g.transition.insert(g.transition.end(), row.begin(), row.end());
  }
  g.rewards.assign(1, std::vector<double>(2 * states * 2, 0.0));
  m.kappa.table.assign(states * 2, 0.0);
  for (std::size_t s = 0; s < states; ++s) {
    const double r0 = rng.uniform(), r1 = rng.uniform();
    const std::size_t best = rng.below(2);
    const double bonus_hi = rng.uniform(1.5, 2.0), bonus_lo = rng.uniform(0.0, 0.5);
    for (std::size_t a = 0; a < 2; ++a)
      for (std::size_t w = 0; w < 2; ++w)
        g.rewards[0][lay.reward_index(a, s, w, 0)] =
            (a == 0 ? r0 : r1) + (w == best ? bonus_hi : bonus_lo);
    m.best_signal.push_back(best);
    m.best_action.push_back(r0 >= r1 ? 0 : 1);
    m.kappa.table[lay.goal_row(s, 0) + m.best_action.back()] = 1.0;
  }
  g.exogenous = rng.simplex(2);
  return m;
}

/**
 * Two-agent game where action 1 is strictly dominated for every agent in
 * every state and signal, with the goal putting all mass on (1, 1).
 */
inline std::pair<AugmentedGame, Goal> dominated_goal_instance(std::uint64_t seed,
                                                              std::size_t states) {
  Dims d;
  d.agents = 2;
  d.states = states;
  d.actions = 2;
  d.signals = 2;
  d.types = 1;
  d.batch = 2;
  AugmentedGame g = random_game(seed, d);
  const Layout lay(d);
  Rng rng(derive_seed(seed, 99));
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t a = 0; a < lay.nA(); ++a)
      for (std::size_t s = 0; s < states; ++s)
        for (std::size_t w = 0; w < 2; ++w)
          if (lay.joint_actions.digit(a, i) == 0)
            g.rewards[i][lay.reward_index(a, s, w, 0)] += rng.uniform(1.0, 2.0);
  Goal k;
  k.table.assign(states * lay.nA(), 0.0);
  for (std::size_t s = 0; s < states; ++s) k.table[lay.goal_row(s, 0) + lay.nA() - 1] = 1.0;
  return {g, k};
}

/// Deterministic profile reached by improvement dynamics.
struct Improved {
  AugmentedGame game;
  SignalingRule alpha;
  SelectionProfile beta;
  PolicyProfile pi;
  bool converged = false;
};

/**
 * Identical-interest two-agent game (both agents share one reward table) and
 * a random signaling rule. Starting from random deterministic selections and
 * policies, agents alternately switch to a best slot per (state, batch) and a
 * best action per (state, selected signal) until nothing changes.
 */
inline Improved improvement_dynamics(std::uint64_t seed, std::size_t rounds = 100) {
  Dims d;
  d.agents = 2;
  d.states = 2;
  d.actions = 2;
  d.signals = 2;
  d.types = 1;
  d.batch = 2;
  Improved out;
  out.game = random_game(seed, d);
  AugmentedGame& game = out.game;
  game.rewards[1] = game.rewards[0];
  const Layout lay(d);
  const std::size_t S = d.signals;
  Rng rng(derive_seed(seed, 7));
  out.alpha = random_signaling(rng, game);
  out.beta = random_selection(rng, game);
  out.pi.probs.assign(2, std::vector<double>(d.states * S * d.actions, 0.0));
  for (auto& t : out.pi.probs)
    for (std::size_t r = 0; r < d.states * S; ++r) t[r * d.actions + rng.below(d.actions)] = 1.0;
  for (std::size_t round = 0; round < rounds; ++round) {
    bool changed = false;
    for (std::size_t i = 0; i < 2; ++i) {
      ValueBundle vb = evaluate_values(game, out.alpha, out.beta, out.pi, 0);
      for (std::size_t g = 0; g < d.states; ++g) {
        const auto T = detail::own_principal_others_selected(game, out.alpha, out.beta, i, g, 0);
        for (std::size_t b = 0; b < lay.nB(); ++b) {
          const std::size_t wk = lay.batch.digit(b, 0);
          auto U = [&](std::size_t p) {
            return detail::selection_value(lay, T, vb.V[i], i, g, wk, lay.batch.digit(b, p));
          };
          auto& cur = out.beta.positions[i][lay.selection_index(g, 0, b)];
          for (std::uint32_t p = 0; p < d.batch; ++p)
            if (U(p) > U(cur) + 1e-12) {
              cur = p;
              changed = true;
            }
        }
      }
      vb = evaluate_values(game, out.alpha, out.beta, out.pi, 0);
      // Aggregate interim payoff of each own action at each selected signal.
      for (std::size_t g = 0; g < d.states; ++g) {
        const auto T = detail::own_principal_others_selected(game, out.alpha, out.beta, i, g, 0);
        std::vector<double> D(S * d.actions, 0.0);
        for (std::size_t b = 0; b < lay.nB(); ++b) {
          const std::size_t wk = lay.batch.digit(b, 0);
          const double pe = game.exogenous[b % lay.nE()];
          const std::size_t ws =
              lay.batch.digit(b, out.beta.positions[i][lay.selection_index(g, 0, b)]);
          for (std::size_t r = 0; r < S; ++r) {
            const double p = pe * T[lay.joint_signals.insert(r, i, wk)];
            if (p == 0.0) continue;
            const std::size_t wj = lay.joint_signals.insert(r, i, ws);
            const std::size_t j = 1 - i;
            const double* prow =
                out.pi.probs[j].data() + lay.policy_row(g, lay.joint_signals.digit(wj, j), 0);
            for (std::size_t ai = 0; ai < d.actions; ++ai)
              for (std::size_t aj = 0; aj < d.actions; ++aj) {
                const std::size_t a = lay.joint_actions.insert(aj, i, ai);
                D[ws * d.actions + ai] += p * prow[aj] * vb.Q[i][(a * d.states + g) * S + ws];
              }
          }
        }
        for (std::size_t ws = 0; ws < S; ++ws) {
          double* row = out.pi.probs[i].data() + lay.policy_row(g, ws, 0);
          std::size_t cur = 0;
          while (row[cur] != 1.0) ++cur;
          std::size_t best = cur;
          for (std::size_t ai = 0; ai < d.actions; ++ai)
            if (D[ws * d.actions + ai] > D[ws * d.actions + best] + 1e-12) best = ai;
          if (best != cur) {
            row[cur] = 0.0;
            row[best] = 1.0;
            changed = true;
          }
        }
      }
    }
    if (!changed) {
      out.converged = true;
      break;
    }
  }
  return out;
}

}  // namespace infodesign::testing

#endif  // INFODESIGN_TESTS_SUPPORT_INSTANCES_HPP_
