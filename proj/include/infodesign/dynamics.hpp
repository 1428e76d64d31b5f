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

// Induced kernels: beliefs, batch distributions, selection channels, action
// pushforwards and the strategy-induced state transition.

#ifndef INFODESIGN_DYNAMICS_HPP_
#define INFODESIGN_DYNAMICS_HPP_

#include <vector>

#include "infodesign/core.hpp"
#include "infodesign/game.hpp"

namespace infodesign {

/// Marginal alpha_i(. | g, theta) of agent i's principal signal.
inline std::vector<double> signal_marginal(const AugmentedGame& game,
                                           const SignalingRule& alpha,
                                           std::size_t g, std::size_t jt,
                                           std::size_t i) {
  const Layout lay = game.layout();
  std::vector<double> m(game.dims.signals, 0.0);
  const double* row = alpha.table.data() + lay.signaling_row(g, jt);
  for (std::size_t w = 0; w < lay.nW(); ++w)
    m[lay.joint_signals.digit(w, i)] += row[w];
  return m;
}

/**
 * Posterior over opponents' principal signals given agent i's own signal.
 * Opponent tuples are indexed by Radix(|Omega|, n - 1) in agent order with i
 * removed. Throws kOffSupport if alpha_i(w_i | g, theta) = 0.
 */
inline std::vector<double> belief_update(const AugmentedGame& game,
                                         const SignalingRule& alpha,
                                         std::size_t g, std::size_t jt,
                                         std::size_t w_i, std::size_t i) {
  const Layout lay = game.layout();
  const Radix& js = lay.joint_signals;
  const Radix others(game.dims.signals, game.dims.agents - 1);
  std::vector<double> mu(others.size(), 0.0);
  const double* row = alpha.table.data() + lay.signaling_row(g, jt);
  double denom = 0.0;
  for (std::size_t r = 0; r < others.size(); ++r) {
    const double p = row[js.insert(r, i, w_i)];
    mu[r] = p;
    denom += p;
  }
  if (!(denom > 0.0)) {
    throw Error(ErrorCode::kOffSupport,
                "off-support signal: agent " + std::to_string(i) + ", state " +
                    std::to_string(g) + ", joint type " + std::to_string(jt) +
                    ", signal " + std::to_string(w_i));
  }
  for (double& v : mu) v /= denom;
  return mu;
}

/**
 * Distribution over joint batches (Omega^m)^n: principal signals from alpha,
 * non-principal slots iid per agent from the exogenous source. Joint batch
 * index is Radix(|Omega|^m, n) over per-agent batch indices.
 */
inline std::vector<double> batch_distribution(
    const AugmentedGame& game, const SignalingRule& alpha, std::size_t g,
    std::size_t jt, std::uint64_t cap = kDefaultCellCap) {
  const Dims& d = game.dims;
  const Layout lay(d);
  const std::uint64_t size = checked_pow(lay.nB(), d.agents);
  if (size > cap) {
    throw Error(ErrorCode::kCapExceeded,
                "joint batch space has " + std::to_string(size) +
                    " cells, cap " + std::to_string(cap));
  }
  const Radix joint(lay.nB(), d.agents);
  std::vector<double> out(joint.size(), 0.0);
  const double* row = alpha.table.data() + lay.signaling_row(g, jt);
  for (std::size_t jb = 0; jb < joint.size(); ++jb) {
    std::size_t w = 0;
    double p_exo = 1.0;
    for (std::size_t i = 0; i < d.agents; ++i) {
      const std::size_t b = joint.digit(jb, i);
      w = w * d.signals + lay.batch.digit(b, 0);
      p_exo *= game.exogenous[b % lay.nE()];
    }
    out[jb] = row[w] * p_exo;
  }
  return out;
}

/// Signal at batch slot `pos`.
inline std::size_t batch_signal(const Layout& lay, std::size_t b,
                                std::size_t pos) {
  return lay.batch.digit(b, pos);
}

/**
 * Selection channel s_i(w | g, theta_i, w^k): probability that agent i ends up
 * with signal w when the principal sent w^k, integrating the exogenous slots.
 * Returned as [w^k * |Omega| + w].
 */
inline std::vector<double> selection_channel(const AugmentedGame& game,
                                             const SelectionProfile& beta,
                                             std::size_t i, std::size_t g,
                                             std::size_t th) {
  const Layout lay = game.layout();
  const std::size_t S = game.dims.signals;
  std::vector<double> ch(S * S, 0.0);
  const auto& pos = beta.positions[i];
  for (std::size_t wk = 0; wk < S; ++wk) {
    for (std::size_t e = 0; e < lay.nE(); ++e) {
      const std::size_t b = lay.batch_index(wk, e);
      const std::size_t w = batch_signal(lay, b, pos[lay.selection_index(g, th, b)]);
      ch[wk * S + w] += game.exogenous[e];
    }
  }
  return ch;
}

/// Distribution of selected joint signals given per-agent channels.
inline std::vector<double> selected_distribution_from_channels(
    const Layout& lay, const double* alpha_row,
    const std::vector<std::vector<double>>& channels) {
  const std::size_t n = lay.dims.agents;
  const std::size_t S = lay.dims.signals;
  const std::size_t nW = lay.nW();
  // Apply the channels one agent at a time: cur[w] over mixed (selected for
  // agents < i, principal for agents >= i).
  std::vector<double> cur(alpha_row, alpha_row + nW);
  std::vector<double> next(nW);
  for (std::size_t i = 0; i < n; ++i) {
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t w = 0; w < nW; ++w) {
      if (cur[w] == 0.0) continue;
      const std::size_t wk = lay.joint_signals.digit(w, i);
      for (std::size_t s = 0; s < S; ++s) {
        const double c = channels[i][wk * S + s];
        if (c == 0.0) continue;
        next[lay.joint_signals.with_digit(w, i, s)] += cur[w] * c;
      }
    }
    cur.swap(next);
  }
  return cur;
}

/// sigma(w | g, theta): distribution of the selected joint signal.
inline std::vector<double> selected_distribution(const AugmentedGame& game,
                                                 const SignalingRule& alpha,
                                                 const SelectionProfile& beta,
                                                 std::size_t g, std::size_t jt) {
  const Layout lay = game.layout();
  std::vector<std::vector<double>> ch(game.dims.agents);
  for (std::size_t i = 0; i < game.dims.agents; ++i)
    ch[i] = selection_channel(game, beta, i, g, lay.joint_types.digit(jt, i));
  return selected_distribution_from_channels(
      lay, alpha.table.data() + lay.signaling_row(g, jt), ch);
}

/// Product policy pi(a | g, w, theta) over A^n.
inline std::vector<double> joint_action_probs(const AugmentedGame& game,
                                              const PolicyProfile& pi,
                                              std::size_t g, std::size_t w,
                                              std::size_t jt) {
  const Layout lay = game.layout();
  const Dims& d = game.dims;
  std::vector<double> out(lay.nA(), 1.0);
  for (std::size_t a = 0; a < lay.nA(); ++a) {
    double p = 1.0;
    for (std::size_t i = 0; i < d.agents && p != 0.0; ++i) {
      const std::size_t row = lay.policy_row(g, lay.joint_signals.digit(w, i),
                                             lay.joint_types.digit(jt, i));
      p *= pi.probs[i][row + lay.joint_actions.digit(a, i)];
    }
    out[a] = p;
  }
  return out;
}

/// Action distribution rho(a | g, theta) induced by (alpha, beta, pi).
inline std::vector<double> action_pushforward(const AugmentedGame& game,
                                              const SignalingRule& alpha,
                                              const SelectionProfile& beta,
                                              const PolicyProfile& pi,
                                              std::size_t g, std::size_t jt) {
  const Layout lay = game.layout();
  const auto sigma = selected_distribution(game, alpha, beta, g, jt);
  std::vector<double> rho(lay.nA(), 0.0);
  for (std::size_t w = 0; w < lay.nW(); ++w) {
    if (sigma[w] == 0.0) continue;
    const auto pa = joint_action_probs(game, pi, g, w, jt);
    for (std::size_t a = 0; a < lay.nA(); ++a) rho[a] += sigma[w] * pa[a];
  }
  return rho;
}

/// Full goal table of pushforwards for every (g, theta).
inline Goal pushforward_goal(const AugmentedGame& game,
                             const SignalingRule& alpha,
                             const SelectionProfile& beta,
                             const PolicyProfile& pi) {
  const Layout lay = game.layout();
  Goal k;
  k.table.reserve(game.dims.states * lay.nT() * lay.nA());
  for (std::size_t g = 0; g < game.dims.states; ++g)
    for (std::size_t jt = 0; jt < lay.nT(); ++jt) {
      auto rho = action_pushforward(game, alpha, beta, pi, g, jt);
      k.table.insert(k.table.end(), rho.begin(), rho.end());
    }
  return k;
}

/// K[g * |G| + g'] for joint type `jt`.
inline std::vector<double> induced_transition(const AugmentedGame& game,
                                              const SignalingRule& alpha,
                                              const SelectionProfile& beta,
                                              const PolicyProfile& pi,
                                              std::size_t jt,
                                              std::uint64_t cap = kDefaultCellCap) {
  require_within_cap(game.dims, cap);
  const Layout lay = game.layout();
  const std::size_t G = game.dims.states;
  std::vector<double> K(G * G, 0.0);
  for (std::size_t g = 0; g < G; ++g) {
    const auto rho = action_pushforward(game, alpha, beta, pi, g, jt);
    for (std::size_t a = 0; a < lay.nA(); ++a) {
      if (rho[a] == 0.0) continue;
      const double* t = game.transition.data() + lay.transition_row(g, a);
      for (std::size_t h = 0; h < G; ++h) K[g * G + h] += rho[a] * t[h];
    }
  }
  return K;
}

/// State kernel induced by a goal table played directly: K[g * |G| + g'].
inline std::vector<double> goal_transition(const AugmentedGame& game,
                                           const Goal& kappa, std::size_t jt) {
  const Layout lay = game.layout();
  const std::size_t G = game.dims.states;
  std::vector<double> K(G * G, 0.0);
  for (std::size_t g = 0; g < G; ++g) {
    const double* k = kappa.table.data() + lay.goal_row(g, jt);
    for (std::size_t a = 0; a < lay.nA(); ++a) {
      if (k[a] == 0.0) continue;
      const double* t = game.transition.data() + lay.transition_row(g, a);
      for (std::size_t h = 0; h < G; ++h) K[g * G + h] += k[a] * t[h];
    }
  }
  return K;
}

}  // namespace infodesign

#endif  // INFODESIGN_DYNAMICS_HPP_
