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

// Exact value tables (V, J, Q), canonical interim payoffs, aggregate Q/V
// constructions, and a Monte Carlo rollout simulator.

#ifndef INFODESIGN_VALUATION_HPP_
#define INFODESIGN_VALUATION_HPP_

#include <Eigen/Dense>

#include <cmath>
#include <vector>

#include "infodesign/core.hpp"
#include "infodesign/dynamics.hpp"
#include "infodesign/game.hpp"

namespace infodesign {

/**
 * Value tables for one joint type.
 *
 * V[i][g * |Omega^n| + w] is indexed by the selected joint signal w; the
 * principal-signal argument of V does not enter the recursion. Q[i][(a * |G| +
 * g) * |Omega| + w_i] likewise drops the principal-signal argument.
 */
struct ValueBundle {
  std::vector<std::vector<double>> J;
  std::vector<std::vector<double>> V;
  std::vector<std::vector<double>> Q;
};

enum class SolveMethod { kDirect, kIterative };

struct EvaluateOptions {
  SolveMethod method = SolveMethod::kDirect;
  double initial_value = 0.0;  // iterative start J == initial_value
  double tolerance = 1e-13;    // sup-norm change
  std::size_t max_iterations = 100000;
};

/// Per-state quantities of a stationary profile for one joint type.
struct StageModel {
  std::size_t G = 0;
  std::vector<double> sigma;  // [g * nW + w] selected joint signal
  std::vector<double> K;      // [g * G + g']
  std::vector<std::vector<double>> r;  // [i][g] expected stage reward
  std::vector<double> pa;     // [(g * nW + w) * nA + a] joint action probs
};

inline StageModel stage_model(const AugmentedGame& game,
                              const SignalingRule& alpha,
                              const SelectionProfile& beta,
                              const PolicyProfile& pi, std::size_t jt) {
  const Dims& d = game.dims;
  const Layout lay(d);
  const std::size_t G = d.states, nW = lay.nW(), nA = lay.nA();
  StageModel m;
  m.G = G;
  m.sigma.assign(G * nW, 0.0);
  m.K.assign(G * G, 0.0);
  m.r.assign(d.agents, std::vector<double>(G, 0.0));
  m.pa.assign(G * nW * nA, 0.0);
  for (std::size_t g = 0; g < G; ++g) {
    const auto sigma = selected_distribution(game, alpha, beta, g, jt);
    std::copy(sigma.begin(), sigma.end(), m.sigma.begin() + g * nW);
    for (std::size_t w = 0; w < nW; ++w) {
      const auto pa = joint_action_probs(game, pi, g, w, jt);
      std::copy(pa.begin(), pa.end(), m.pa.begin() + (g * nW + w) * nA);
      if (sigma[w] == 0.0) continue;
      for (std::size_t a = 0; a < nA; ++a) {
        const double p = sigma[w] * pa[a];
        if (p == 0.0) continue;
        const double* t = game.transition.data() + lay.transition_row(g, a);
        for (std::size_t h = 0; h < G; ++h) m.K[g * G + h] += p * t[h];
        for (std::size_t i = 0; i < d.agents; ++i)
          m.r[i][g] += p * game.reward(i, a, g, lay.joint_signals.digit(w, i),
                                       lay.joint_types.digit(jt, i));
      }
    }
  }
  return m;
}

/// Solves (I - gamma K) J = r for each right-hand side.
inline std::vector<std::vector<double>> solve_discounted(
    const std::vector<double>& K, const std::vector<std::vector<double>>& r,
    std::size_t G, double gamma) {
  Eigen::MatrixXd A = Eigen::MatrixXd::Identity(G, G);
  for (std::size_t g = 0; g < G; ++g)
    for (std::size_t h = 0; h < G; ++h) A(g, h) -= gamma * K[g * G + h];
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
  std::vector<std::vector<double>> out;
  out.reserve(r.size());
  for (const auto& rhs : r) {
    Eigen::VectorXd b = Eigen::Map<const Eigen::VectorXd>(rhs.data(), G);
    Eigen::VectorXd x = lu.solve(b);
    // One step of iterative refinement keeps residuals near machine precision.
    x += lu.solve(b - A * x);
    out.emplace_back(x.data(), x.data() + G);
  }
  return out;
}

inline std::vector<std::vector<double>> iterate_discounted(
    const std::vector<double>& K, const std::vector<std::vector<double>>& r,
    std::size_t G, double gamma, const EvaluateOptions& opt) {
  std::vector<std::vector<double>> out;
  for (const auto& rhs : r) {
    std::vector<double> J(G, opt.initial_value), next(G);
    double change = std::numeric_limits<double>::infinity();
    std::size_t it = 0;
    for (; it < opt.max_iterations && change > opt.tolerance; ++it) {
      change = 0.0;
      for (std::size_t g = 0; g < G; ++g) {
        double s = 0.0;
        for (std::size_t h = 0; h < G; ++h) s += K[g * G + h] * J[h];
        next[g] = rhs[g] + gamma * s;
        change = std::max(change, std::abs(next[g] - J[g]));
      }
      J.swap(next);
    }
    if (change > opt.tolerance) {
      throw Error(ErrorCode::kNonConvergence,
                  "value iteration did not converge: last change " +
                      detail::fmt_double(change));
    }
    out.push_back(std::move(J));
  }
  return out;
}

/// Q from J by the one-step lookahead; fills bundle.Q and bundle.V.
inline void back_substitute(const AugmentedGame& game, std::size_t jt,
                            const std::vector<double>& pa, ValueBundle& b) {
  const Dims& d = game.dims;
  const Layout lay(d);
  const std::size_t G = d.states, S = d.signals, nA = lay.nA(), nW = lay.nW();
  b.Q.assign(d.agents, std::vector<double>(nA * G * S));
  b.V.assign(d.agents, std::vector<double>(G * nW));
  for (std::size_t i = 0; i < d.agents; ++i) {
    const std::size_t th = lay.joint_types.digit(jt, i);
    for (std::size_t a = 0; a < nA; ++a)
      for (std::size_t g = 0; g < G; ++g) {
        const double* t = game.transition.data() + lay.transition_row(g, a);
        double cont = 0.0;
        for (std::size_t h = 0; h < G; ++h) cont += t[h] * b.J[i][h];
        for (std::size_t w = 0; w < S; ++w)
          b.Q[i][(a * G + g) * S + w] =
              game.reward(i, a, g, w, th) + game.discount * cont;
      }
    for (std::size_t g = 0; g < G; ++g)
      for (std::size_t w = 0; w < nW; ++w) {
        const std::size_t wi = lay.joint_signals.digit(w, i);
        const double* p = pa.data() + (g * nW + w) * nA;
        double v = 0.0;
        for (std::size_t a = 0; a < nA; ++a)
          v += p[a] * b.Q[i][(a * G + g) * S + wi];
        b.V[i][g * nW + w] = v;
      }
  }
}

/// Exact V, J, Q for joint type `jt` under (alpha, beta, pi).
inline ValueBundle evaluate_values(const AugmentedGame& game,
                                   const SignalingRule& alpha,
                                   const SelectionProfile& beta,
                                   const PolicyProfile& pi, std::size_t jt,
                                   const EvaluateOptions& opt = {},
                                   std::uint64_t cap = kDefaultCellCap) {
  require_within_cap(game.dims, cap);
  const StageModel m = stage_model(game, alpha, beta, pi, jt);
  ValueBundle b;
  if (opt.method == SolveMethod::kDirect) {
    b.J = solve_discounted(m.K, m.r, m.G, game.discount);
  } else {
    b.J = iterate_discounted(m.K, m.r, m.G, game.discount, opt);
  }
  back_substitute(game, jt, m.pa, b);
  return b;
}

/// Values for every joint type.
inline std::vector<ValueBundle> evaluate_all(const AugmentedGame& game,
                                             const SignalingRule& alpha,
                                             const SelectionProfile& beta,
                                             const PolicyProfile& pi,
                                             const EvaluateOptions& opt = {}) {
  std::vector<ValueBundle> out;
  for (std::size_t jt = 0; jt < game.layout().nT(); ++jt)
    out.push_back(evaluate_values(game, alpha, beta, pi, jt, opt));
  return out;
}

struct BellmanResiduals {
  double v = 0.0;  // V from the pi-average of Q
  double j = 0.0;  // J from the batch average of V at selected signals
  double q = 0.0;  // Q from reward plus discounted J
  double max() const { return std::max({v, j, q}); }
};

/**
 * Residuals of the three recursions. The J recursion is checked against a
 * literal enumeration of joint batches and the selection rules, independent of
 * the channel construction used by evaluate_values.
 */
inline BellmanResiduals bellman_residuals(const AugmentedGame& game,
                                          const SignalingRule& alpha,
                                          const SelectionProfile& beta,
                                          const PolicyProfile& pi,
                                          std::size_t jt,
                                          const ValueBundle& b) {
  const Dims& d = game.dims;
  const Layout lay(d);
  const std::size_t G = d.states, S = d.signals, nA = lay.nA(), nW = lay.nW();
  BellmanResiduals res;
  for (std::size_t i = 0; i < d.agents; ++i) {
    const std::size_t th = lay.joint_types.digit(jt, i);
    for (std::size_t a = 0; a < nA; ++a)
      for (std::size_t g = 0; g < G; ++g)
        for (std::size_t w = 0; w < S; ++w) {
          double cont = 0.0;
          for (std::size_t h = 0; h < G; ++h)
            cont += game.transition[lay.transition_row(g, a) + h] * b.J[i][h];
          const double rhs = game.reward(i, a, g, w, th) + game.discount * cont;
          res.q = std::max(res.q, std::abs(b.Q[i][(a * G + g) * S + w] - rhs));
        }
    for (std::size_t g = 0; g < G; ++g)
      for (std::size_t w = 0; w < nW; ++w) {
        const auto pa = joint_action_probs(game, pi, g, w, jt);
        double rhs = 0.0;
        for (std::size_t a = 0; a < nA; ++a)
          rhs += pa[a] *
                 b.Q[i][(a * G + g) * S + lay.joint_signals.digit(w, i)];
        res.v = std::max(res.v, std::abs(b.V[i][g * nW + w] - rhs));
      }
  }
  const Radix joint(lay.nB(), d.agents);
  for (std::size_t g = 0; g < G; ++g) {
    const auto pb = batch_distribution(game, alpha, g, jt);
    std::vector<double> rhs(d.agents, 0.0);
    for (std::size_t jb = 0; jb < joint.size(); ++jb) {
      if (pb[jb] == 0.0) continue;
      std::size_t w = 0;
      for (std::size_t k = 0; k < d.agents; ++k) {
        const std::size_t bk = joint.digit(jb, k);
        const std::size_t pos = beta.positions[k][lay.selection_index(
            g, lay.joint_types.digit(jt, k), bk)];
        w = w * S + lay.batch.digit(bk, pos);
      }
      for (std::size_t i = 0; i < d.agents; ++i)
        rhs[i] += pb[jb] * b.V[i][g * nW + w];
    }
    for (std::size_t i = 0; i < d.agents; ++i)
      res.j = std::max(res.j, std::abs(b.J[i][g] - rhs[i]));
  }
  return res;
}

// -----------------------------------------------------------------------------
// Canonical game values
// -----------------------------------------------------------------------------

/// State values J_hat[i][g] of a canonical game under a joint policy.
inline std::vector<std::vector<double>> canonical_values(
    const CanonicalGame& c, const JointPolicy& pi) {
  const std::size_t G = c.states, nA = c.joint_actions();
  std::vector<double> K(G * G, 0.0);
  std::vector<std::vector<double>> r(c.agents, std::vector<double>(G, 0.0));
  for (std::size_t g = 0; g < G; ++g)
    for (std::size_t a = 0; a < nA; ++a) {
      const double p = pi.probs[g * nA + a];
      if (p == 0.0) continue;
      for (std::size_t h = 0; h < G; ++h)
        K[g * G + h] += p * c.transition[(g * nA + a) * G + h];
      for (std::size_t i = 0; i < c.agents; ++i)
        r[i][g] += p * c.rewards[i][a * G + g];
    }
  return solve_discounted(K, r, G, c.discount);
}

/// Expr_i(g, a): reward of a now, then the stationary joint policy.
inline double interim_payoff(const CanonicalGame& c, const JointPolicy& pi,
                             std::size_t g, std::size_t a, std::size_t i) {
  const auto J = canonical_values(c, pi);
  const std::size_t G = c.states, nA = c.joint_actions();
  double cont = 0.0;
  for (std::size_t h = 0; h < G; ++h)
    cont += c.transition[(g * nA + a) * G + h] * J[i][h];
  return c.rewards[i][a * G + g] + c.discount * cont;
}

// -----------------------------------------------------------------------------
// Aggregate constructions
// -----------------------------------------------------------------------------

/// Q_i(a, g, w_i | theta; J_i) = R_i + gamma * E[J_i(g')].
inline double q_from_j(const AugmentedGame& game, std::span<const double> J_i,
                       std::size_t i, std::size_t a, std::size_t g,
                       std::size_t w_i, std::size_t th_i) {
  const Layout lay = game.layout();
  const double* t = game.transition.data() + lay.transition_row(g, a);
  double cont = 0.0;
  for (std::size_t h = 0; h < game.dims.states; ++h) cont += t[h] * J_i[h];
  return game.reward(i, a, g, w_i, th_i) + game.discount * cont;
}

/**
 * Q^{pi_-i}: expectation of q_from_j over opponents' actions drawn from their
 * policies at their own signals in the joint signal `w`.
 */
inline double q_under_opponents(const AugmentedGame& game,
                                const PolicyProfile& pi,
                                std::span<const double> J_i, std::size_t i,
                                std::size_t a_i, std::size_t g, std::size_t w_i,
                                std::size_t w, std::size_t jt) {
  const Dims& d = game.dims;
  const Layout lay(d);
  const Radix others(d.actions, d.agents - 1);
  double total = 0.0;
  for (std::size_t r = 0; r < others.size(); ++r) {
    const std::size_t a = lay.joint_actions.insert(r, i, a_i);
    double p = 1.0;
    for (std::size_t j = 0; j < d.agents && p != 0.0; ++j) {
      if (j == i) continue;
      p *= pi.probs[j][lay.policy_row(g, lay.joint_signals.digit(w, j),
                                       lay.joint_types.digit(jt, j)) +
                       lay.joint_actions.digit(a, j)];
    }
    if (p == 0.0) continue;
    total += p * q_from_j(game, J_i, i, a, g, w_i, lay.joint_types.digit(jt, i));
  }
  return total;
}

/// Continuation E_{g', w'}[V_i(g', w')] under obedience, as used by Q^alpha.
inline double alpha_continuation(const AugmentedGame& game,
                                 const SignalingRule& alpha,
                                 std::span<const double> V_i, std::size_t a,
                                 std::size_t g, std::size_t jt) {
  const Layout lay = game.layout();
  const double* t = game.transition.data() + lay.transition_row(g, a);
  double cont = 0.0;
  for (std::size_t h = 0; h < game.dims.states; ++h) {
    if (t[h] == 0.0) continue;
    const double* row = alpha.table.data() + lay.signaling_row(h, jt);
    double v = 0.0;
    for (std::size_t w = 0; w < lay.nW(); ++w) v += row[w] * V_i[h * lay.nW() + w];
    cont += t[h] * v;
  }
  return cont;
}

/// Q^alpha_i(a, g; w_i^k | theta; V_i).
inline double q_under_alpha(const AugmentedGame& game,
                            const SignalingRule& alpha,
                            std::span<const double> V_i, std::size_t i,
                            std::size_t a, std::size_t g, std::size_t wk_i,
                            std::size_t jt) {
  const Layout lay = game.layout();
  return game.reward(i, a, g, wk_i, lay.joint_types.digit(jt, i)) +
         game.discount * alpha_continuation(game, alpha, V_i, a, g, jt);
}

/**
 * V^{alpha_-i}_i(g, w_i; w_i^k | theta): V at own selected signal w_i,
 * averaged over opponents' principal signals conditioned on w_i^k.
 */
inline double v_under_alpha(const AugmentedGame& game,
                            const SignalingRule& alpha,
                            std::span<const double> V_i, std::size_t i,
                            std::size_t g, std::size_t w_i, std::size_t wk_i,
                            std::size_t jt) {
  const Layout lay = game.layout();
  const auto mu = belief_update(game, alpha, g, jt, wk_i, i);
  double v = 0.0;
  for (std::size_t r = 0; r < mu.size(); ++r) {
    if (mu[r] == 0.0) continue;
    v += mu[r] * V_i[g * lay.nW() + lay.joint_signals.insert(r, i, w_i)];
  }
  return v;
}

// -----------------------------------------------------------------------------
// Monte Carlo
// -----------------------------------------------------------------------------

struct RolloutEstimate {
  std::vector<std::vector<double>> mean;  // [i][g0]
  std::vector<std::vector<double>> se;    // [i][g0]
};

/**
 * Truncated discounted returns from each initial state, following the period
 * timing: principal signals, exogenous slots, selection, actions, rewards,
 * transition. Deterministic in `seed`.
 */
inline RolloutEstimate simulate_rollouts(const AugmentedGame& game,
                                         const SignalingRule& alpha,
                                         const SelectionProfile& beta,
                                         const PolicyProfile& pi,
                                         std::size_t jt, std::size_t horizon,
                                         std::size_t runs, std::uint64_t seed) {
  if (horizon < 1) throw Error(ErrorCode::kInvalidArgument, "horizon must be >= 1");
  if (runs < 1) throw Error(ErrorCode::kInvalidArgument, "runs must be >= 1");
  const Dims& d = game.dims;
  const Layout lay(d);
  const std::size_t G = d.states, n = d.agents;
  RolloutEstimate est;
  est.mean.assign(n, std::vector<double>(G, 0.0));
  est.se.assign(n, std::vector<double>(G, 0.0));
  std::vector<std::size_t> types(n), wk(n), sel(n), act(n);
  for (std::size_t i = 0; i < n; ++i) types[i] = lay.joint_types.digit(jt, i);
  std::vector<double> ret(n);
  for (std::size_t g0 = 0; g0 < G; ++g0) {
    Rng rng(derive_seed(seed, g0));
    // Welford accumulators; exact zero spread for identical returns.
    std::vector<double> mean(n, 0.0), m2(n, 0.0);
    for (std::size_t run = 0; run < runs; ++run) {
      std::size_t g = g0;
      double disc = 1.0;
      std::fill(ret.begin(), ret.end(), 0.0);
      for (std::size_t t = 0; t < horizon; ++t) {
        const std::size_t w = rng.categorical(std::span<const double>(
            alpha.table.data() + lay.signaling_row(g, jt), lay.nW()));
        std::size_t a = 0;
        for (std::size_t i = 0; i < n; ++i) {
          const std::size_t e = rng.categorical(game.exogenous);
          const std::size_t b =
              lay.batch_index(lay.joint_signals.digit(w, i), e);
          const std::size_t pos =
              beta.positions[i][lay.selection_index(g, types[i], b)];
          sel[i] = lay.batch.digit(b, pos);
          act[i] = rng.categorical(std::span<const double>(
              pi.probs[i].data() + lay.policy_row(g, sel[i], types[i]),
              d.actions));
          a = a * d.actions + act[i];
        }
        for (std::size_t i = 0; i < n; ++i)
          ret[i] += disc * game.reward(i, a, g, sel[i], types[i]);
        disc *= game.discount;
        g = rng.categorical(std::span<const double>(
            game.transition.data() + lay.transition_row(g, a), G));
      }
      const double count = static_cast<double>(run + 1);
      for (std::size_t i = 0; i < n; ++i) {
        const double delta = ret[i] - mean[i];
        mean[i] += delta / count;
        m2[i] += delta * (ret[i] - mean[i]);
      }
    }
    const double R = static_cast<double>(runs);
    for (std::size_t i = 0; i < n; ++i) {
      est.mean[i][g0] = mean[i];
      if (runs > 1) est.se[i][g0] = std::sqrt(m2[i] / (R - 1.0) / R);
    }
  }
  return est;
}

}  // namespace infodesign

#endif  // INFODESIGN_VALUATION_HPP_
