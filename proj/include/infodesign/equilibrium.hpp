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

// Certification of equilibrium, obedience, admissibility and goal conditions.
//
// Every check returns the largest violation found (a gain from deviating or
// an equality gap) with a named witness. Ties at zero slack pass. Among equal
// maximal violations the first one in lexicographic index order is kept.

#ifndef INFODESIGN_EQUILIBRIUM_HPP_
#define INFODESIGN_EQUILIBRIUM_HPP_

#include <limits>
#include <string>
#include <vector>

#include "infodesign/core.hpp"
#include "infodesign/dynamics.hpp"
#include "infodesign/game.hpp"
#include "infodesign/valuation.hpp"

namespace infodesign {

inline constexpr double kDefaultTol = 1e-8;

struct CertificationReport {
  std::string name;
  bool pass = true;
  double violation = 0.0;
  std::string witness;
  double tol = kDefaultTol;
  std::vector<CertificationReport> parts;

  /// Finds a part by name, recursively; nullptr when absent.
  const CertificationReport* find(const std::string& key) const {
    if (name == key) return this;
    for (const auto& p : parts)
      if (const auto* f = p.find(key)) return f;
    return nullptr;
  }
};

namespace detail {

/// Tracks the maximal violation; keeps the first witness among ties.
class Worst {
 public:
  template <typename F>
  void offer(double v, F&& describe) {
    if (!seen_ || v > value_) {
      seen_ = true;
      value_ = v;
      witness_ = describe();
    }
  }
  bool seen() const { return seen_; }
  double value() const { return seen_ ? value_ : 0.0; }
  const std::string& witness() const { return witness_; }

 private:
  bool seen_ = false;
  double value_ = 0.0;
  std::string witness_;
};

inline CertificationReport finish(std::string name, const Worst& w,
                                  double tol) {
  CertificationReport r;
  r.name = std::move(name);
  r.tol = tol;
  r.violation = w.value();
  r.pass = r.violation <= tol;
  r.witness = w.seen() ? w.witness() : "none";
  return r;
}

inline CertificationReport combine(std::string name,
                                   std::vector<CertificationReport> parts,
                                   double tol) {
  CertificationReport r;
  r.name = std::move(name);
  r.tol = tol;
  r.violation = -std::numeric_limits<double>::infinity();
  bool any = false;
  for (const auto& p : parts) {
    r.pass = r.pass && p.pass;
    if (!any || p.violation > r.violation) {
      r.violation = p.violation;
      r.witness = p.name + ": " + p.witness;
      any = true;
    }
  }
  // The overall witness points at the first failing part when there is one.
  for (const auto& p : parts) {
    if (!p.pass) {
      r.witness = p.name + ": " + p.witness;
      break;
    }
  }
  if (!any) r.violation = 0.0;
  r.parts = std::move(parts);
  return r;
}

inline std::string idx(const char* name, std::size_t v) {
  return std::string(name) + "=" + std::to_string(v);
}

/**
 * Weights T[w] over Omega^n where digit i is agent i's principal signal and
 * every other digit is that agent's selected signal under `beta`.
 */
inline std::vector<double> own_principal_others_selected(
    const AugmentedGame& game, const SignalingRule& alpha,
    const SelectionProfile& beta, std::size_t i, std::size_t g,
    std::size_t jt) {
  const Layout lay = game.layout();
  const std::size_t S = game.dims.signals;
  std::vector<std::vector<double>> ch(game.dims.agents);
  for (std::size_t j = 0; j < game.dims.agents; ++j) {
    if (j == i) {
      ch[j].assign(S * S, 0.0);
      for (std::size_t s = 0; s < S; ++s) ch[j][s * S + s] = 1.0;
    } else {
      ch[j] = selection_channel(game, beta, j, g, lay.joint_types.digit(jt, j));
    }
  }
  return selected_distribution_from_channels(
      lay, alpha.table.data() + lay.signaling_row(g, jt), ch);
}

/// Agent i's value of ending up with signal x when its principal signal is
/// wk, weighted by the joint probability (not normalized by alpha_i(wk)).
inline double selection_value(const Layout& lay, const std::vector<double>& T,
                              std::span<const double> V_i, std::size_t i,
                              std::size_t g, std::size_t wk, std::size_t x) {
  const std::size_t others = lay.nW() / lay.dims.signals;
  double v = 0.0;
  for (std::size_t r = 0; r < others; ++r) {
    const double p = T[lay.joint_signals.insert(r, i, wk)];
    if (p == 0.0) continue;
    v += p * V_i[g * lay.nW() + lay.joint_signals.insert(r, i, x)];
  }
  return v;
}

}  // namespace detail

// -----------------------------------------------------------------------------
// MCE on the canonical game
// -----------------------------------------------------------------------------

/// Expr_i(g, a) for every agent, state and joint action: [i][g * |A^n| + a].
inline std::vector<std::vector<double>> interim_payoffs(const CanonicalGame& c,
                                                        const JointPolicy& pi) {
  const auto J = canonical_values(c, pi);
  const std::size_t G = c.states, nA = c.joint_actions();
  std::vector<std::vector<double>> out(c.agents, std::vector<double>(G * nA));
  for (std::size_t i = 0; i < c.agents; ++i)
    for (std::size_t g = 0; g < G; ++g)
      for (std::size_t a = 0; a < nA; ++a) {
        double cont = 0.0;
        for (std::size_t h = 0; h < G; ++h)
          cont += c.transition[(g * nA + a) * G + h] * J[i][h];
        out[i][g * nA + a] = c.rewards[i][a * G + g] + c.discount * cont;
      }
  return out;
}

/**
 * Markov correlated equilibrium check. For every recommended a with positive
 * probability, agent i's expected interim payoff of a_i against the marginal
 * of the others' recommendations must weakly exceed that of any a'_i.
 */
inline CertificationReport check_mce(const CanonicalGame& c,
                                     const JointPolicy& pi,
                                     double tol = kDefaultTol) {
  const auto expr = interim_payoffs(c, pi);
  const Radix ja(c.actions, c.agents);
  const Radix others(c.actions, c.agents - 1);
  const std::size_t G = c.states, nA = ja.size();
  detail::Worst worst;
  for (std::size_t i = 0; i < c.agents; ++i)
    for (std::size_t g = 0; g < G; ++g) {
      std::vector<double> marg(others.size(), 0.0);
      for (std::size_t a = 0; a < nA; ++a)
        marg[ja.drop(a, i)] += pi.probs[g * nA + a];
      std::vector<double> lhs(c.actions, 0.0);
      for (std::size_t ai = 0; ai < c.actions; ++ai)
        for (std::size_t r = 0; r < others.size(); ++r)
          lhs[ai] += marg[r] * expr[i][g * nA + ja.insert(r, i, ai)];
      for (std::size_t a = 0; a < nA; ++a) {
        if (pi.probs[g * nA + a] <= 0.0) continue;
        const std::size_t ai = ja.digit(a, i);
        for (std::size_t dev = 0; dev < c.actions; ++dev) {
          worst.offer(lhs[dev] - lhs[ai], [&] {
            return detail::idx("agent", i) + " " + detail::idx("state", g) +
                   " " + detail::idx("joint_action", a) + " " +
                   detail::idx("deviation", dev);
          });
        }
      }
    }
  return detail::finish("MCE", worst, tol);
}

// -----------------------------------------------------------------------------
// One-shot deviations
// -----------------------------------------------------------------------------

/**
 * One-shot deviation check for a stationary profile. Selection part: one
 * period of an arbitrary deterministic selection rule, policies fixed, then
 * reverting (state-value level). Policy part: one period of an arbitrary
 * action at each on-support information set (state, own batch), then
 * reverting (conditional state-signal value level).
 */
inline CertificationReport check_one_shot(const AugmentedGame& game,
                                          const SignalingRule& alpha,
                                          const SelectionProfile& beta,
                                          const PolicyProfile& pi,
                                          double tol = kDefaultTol) {
  const Dims& d = game.dims;
  const Layout lay(d);
  const std::size_t G = d.states, S = d.signals;
  const Radix others_a(d.actions, d.agents - 1);
  const std::size_t n_others = lay.nW() / S;
  detail::Worst sel_worst, pol_worst;
  for (std::size_t jt = 0; jt < lay.nT(); ++jt) {
    const ValueBundle vb = evaluate_values(game, alpha, beta, pi, jt);
    for (std::size_t i = 0; i < d.agents; ++i) {
      const std::size_t th = lay.joint_types.digit(jt, i);
      for (std::size_t g = 0; g < G; ++g) {
        const auto T =
            detail::own_principal_others_selected(game, alpha, beta, i, g, jt);
        const auto marg = signal_marginal(game, alpha, g, jt, i);
        // Selection: pointwise best slot per batch.
        double gain = 0.0;
        for (std::size_t wk = 0; wk < S; ++wk) {
          if (marg[wk] <= 0.0) continue;
          std::vector<double> U(S);
          for (std::size_t x = 0; x < S; ++x)
            U[x] = detail::selection_value(lay, T, vb.V[i], i, g, wk, x);
          for (std::size_t e = 0; e < lay.nE(); ++e) {
            const double pe = game.exogenous[e];
            if (pe <= 0.0) continue;
            const std::size_t b = lay.batch_index(wk, e);
            double best = -std::numeric_limits<double>::infinity();
            for (std::size_t p = 0; p < d.batch; ++p)
              best = std::max(best, U[lay.batch.digit(b, p)]);
            const std::size_t chosen = lay.batch.digit(
                b, beta.positions[i][lay.selection_index(g, th, b)]);
            gain += pe * (best - U[chosen]);
          }
        }
        sel_worst.offer(gain, [&] {
          return detail::idx("agent", i) + " " + detail::idx("state", g) +
                 " " + detail::idx("joint_type", jt);
        });
        // Policy: one-period action deviations at each information set.
        for (std::size_t wk = 0; wk < S; ++wk) {
          if (marg[wk] <= 0.0) continue;
          for (std::size_t e = 0; e < lay.nE(); ++e) {
            if (game.exogenous[e] <= 0.0) continue;
            const std::size_t b = lay.batch_index(wk, e);
            const std::size_t ws = lay.batch.digit(
                b, beta.positions[i][lay.selection_index(g, th, b)]);
            std::vector<double> D(d.actions, 0.0);
            for (std::size_t r = 0; r < n_others; ++r) {
              const double p = T[lay.joint_signals.insert(r, i, wk)] / marg[wk];
              if (p == 0.0) continue;
              const std::size_t wjoint = lay.joint_signals.insert(r, i, ws);
              for (std::size_t ai = 0; ai < d.actions; ++ai) {
                double q = 0.0;
                for (std::size_t ro = 0; ro < others_a.size(); ++ro) {
                  const std::size_t a = lay.joint_actions.insert(ro, i, ai);
                  double pa = 1.0;
                  for (std::size_t j = 0; j < d.agents && pa != 0.0; ++j) {
                    if (j == i) continue;
                    pa *= pi.probs[j][lay.policy_row(
                                          g, lay.joint_signals.digit(wjoint, j),
                                          lay.joint_types.digit(jt, j)) +
                                      lay.joint_actions.digit(a, j)];
                  }
                  if (pa == 0.0) continue;
                  q += pa * vb.Q[i][(a * G + g) * S + ws];
                }
                D[ai] += p * q;
              }
            }
            double best = -std::numeric_limits<double>::infinity();
            double follow = 0.0;
            const double* row = pi.probs[i].data() + lay.policy_row(g, ws, th);
            for (std::size_t ai = 0; ai < d.actions; ++ai) {
              best = std::max(best, D[ai]);
              follow += row[ai] * D[ai];
            }
            pol_worst.offer(best - follow, [&] {
              return detail::idx("agent", i) + " " + detail::idx("state", g) +
                     " " + detail::idx("joint_type", jt) + " " +
                     detail::idx("batch", b);
            });
          }
        }
      }
    }
  }
  return detail::combine("one_shot",
                         {detail::finish("one_shot_selection", sel_worst, tol),
                          detail::finish("one_shot_policy", pol_worst, tol)},
                         tol);
}

// -----------------------------------------------------------------------------
// Obedience
// -----------------------------------------------------------------------------

enum class ObedienceMode { kBayesian, kDominant };

namespace detail {

/// Largest gain from selecting a non-principal slot for one opponent profile.
inline void obedience_gains(const AugmentedGame& game,
                            const SignalingRule& alpha,
                            const SelectionProfile& profile,
                            const PolicyProfile& pi, std::size_t i,
                            std::size_t jt, Worst& worst,
                            const std::string& tag) {
  const Dims& d = game.dims;
  const Layout lay(d);
  const ValueBundle vb = evaluate_values(game, alpha, profile, pi, jt);
  for (std::size_t g = 0; g < d.states; ++g) {
    const auto T = own_principal_others_selected(game, alpha, profile, i, g, jt);
    const auto marg = signal_marginal(game, alpha, g, jt, i);
    for (std::size_t wk = 0; wk < d.signals; ++wk) {
      if (marg[wk] <= 0.0) continue;
      std::vector<double> U(d.signals);
      for (std::size_t x = 0; x < d.signals; ++x)
        U[x] = selection_value(lay, T, vb.V[i], i, g, wk, x) / marg[wk];
      for (std::size_t e = 0; e < lay.nE(); ++e) {
        if (game.exogenous[e] <= 0.0) continue;
        const std::size_t b = lay.batch_index(wk, e);
        for (std::size_t p = 1; p < d.batch; ++p) {
          const std::size_t x = lay.batch.digit(b, p);
          worst.offer(U[x] - U[wk], [&] {
            return idx("agent", i) + " " + idx("state", g) + " " +
                   idx("joint_type", jt) + " " + idx("batch", b) + " " +
                   idx("slot", p) + tag;
          });
        }
      }
    }
  }
}

}  // namespace detail

/**
 * Obedience of the principal's slot. Bayesian: against obedient opponents.
 * Dominant: against every deterministic stationary opponent selection profile.
 */
inline CertificationReport check_obedience(const AugmentedGame& game,
                                           const SignalingRule& alpha,
                                           const PolicyProfile& pi,
                                           ObedienceMode mode,
                                           double tol = kDefaultTol,
                                           std::uint64_t cap = kDefaultCellCap) {
  const Dims& d = game.dims;
  const Layout lay(d);
  const SelectionProfile obedient = SelectionProfile::obedient(d);
  detail::Worst worst;
  if (mode == ObedienceMode::kBayesian) {
    for (std::size_t jt = 0; jt < lay.nT(); ++jt)
      for (std::size_t i = 0; i < d.agents; ++i)
        detail::obedience_gains(game, alpha, obedient, pi, i, jt, worst, "");
    return detail::finish("obedience_bayesian", worst, tol);
  }
  // Each opponent rule is one of m^(|G| |Theta| |Omega|^m) deterministic maps.
  const std::size_t cells = d.states * d.types * lay.nB();
  const std::uint64_t per_agent = checked_pow(d.batch, cells);
  const std::uint64_t profiles = checked_pow(per_agent, d.agents - 1);
  if (profiles > cap) {
    throw Error(ErrorCode::kCapExceeded,
                "dominant-strategy obedience needs " + std::to_string(profiles) +
                    " opponent selection profiles, cap " + std::to_string(cap));
  }
  for (std::size_t jt = 0; jt < lay.nT(); ++jt)
    for (std::size_t i = 0; i < d.agents; ++i) {
      SelectionProfile prof = obedient;
      for (std::uint64_t code = 0; code < profiles; ++code) {
        std::uint64_t rest = code;
        for (std::size_t j = 0; j < d.agents; ++j) {
          if (j == i) continue;
          for (std::size_t c = 0; c < cells; ++c) {
            prof.positions[j][c] = static_cast<std::uint32_t>(rest % d.batch);
            rest /= d.batch;
          }
        }
        detail::obedience_gains(game, alpha, prof, pi, i, jt, worst,
                                " opponent_profile=" + std::to_string(code));
      }
    }
  return detail::finish("obedience_dominant", worst, tol);
}

// -----------------------------------------------------------------------------
// Admissibility and goals
// -----------------------------------------------------------------------------

enum class AdmissibilityMode { kStrong, kWeak };

/**
 * Strong: sup |kappa - rho| over (g, theta, a), rho the action pushforward.
 * Weak: per (i, g, theta), |sum_a Rbar_i(a, g) (kappa(a) - rho(a))| where
 * Rbar_i averages agent i's reward over its selected-signal marginal.
 */
inline CertificationReport check_admissibility(const AugmentedGame& game,
                                               const SignalingRule& alpha,
                                               const SelectionProfile& beta,
                                               const PolicyProfile& pi,
                                               const Goal& kappa,
                                               AdmissibilityMode mode,
                                               double tol = kDefaultTol) {
  const Dims& d = game.dims;
  const Layout lay(d);
  detail::Worst worst;
  for (std::size_t g = 0; g < d.states; ++g)
    for (std::size_t jt = 0; jt < lay.nT(); ++jt) {
      const auto rho = action_pushforward(game, alpha, beta, pi, g, jt);
      const double* k = kappa.table.data() + lay.goal_row(g, jt);
      if (mode == AdmissibilityMode::kStrong) {
        for (std::size_t a = 0; a < lay.nA(); ++a)
          worst.offer(std::abs(k[a] - rho[a]), [&] {
            return detail::idx("state", g) + " " + detail::idx("joint_type", jt) +
                   " " + detail::idx("joint_action", a);
          });
        continue;
      }
      const auto sigma = selected_distribution(game, alpha, beta, g, jt);
      for (std::size_t i = 0; i < d.agents; ++i) {
        const std::size_t th = lay.joint_types.digit(jt, i);
        std::vector<double> marg(d.signals, 0.0);
        for (std::size_t w = 0; w < lay.nW(); ++w)
          marg[lay.joint_signals.digit(w, i)] += sigma[w];
        double gap = 0.0;
        for (std::size_t a = 0; a < lay.nA(); ++a) {
          double rbar = 0.0;
          for (std::size_t w = 0; w < d.signals; ++w)
            rbar += marg[w] * game.reward(i, a, g, w, th);
          gap += rbar * (k[a] - rho[a]);
        }
        worst.offer(std::abs(gap), [&] {
          return detail::idx("agent", i) + " " + detail::idx("state", g) + " " +
                 detail::idx("joint_type", jt);
        });
      }
    }
  return detail::finish(mode == AdmissibilityMode::kStrong
                            ? "admissibility_strong"
                            : "admissibility_weak",
                        worst, tol);
}

/**
 * Markov Nash goal: for each a with kappa(a) > 0 and each on-support own
 * principal signal, agent i's one-stage reward against the marginal of the
 * others' goal actions is not improved by any a'_i (weighted by alpha_i).
 */
inline CertificationReport check_nash_goal(const AugmentedGame& game,
                                           const SignalingRule& alpha,
                                           const Goal& kappa,
                                           double tol = kDefaultTol) {
  const Dims& d = game.dims;
  const Layout lay(d);
  const Radix others(d.actions, d.agents - 1);
  detail::Worst worst;
  for (std::size_t g = 0; g < d.states; ++g)
    for (std::size_t jt = 0; jt < lay.nT(); ++jt) {
      const double* k = kappa.table.data() + lay.goal_row(g, jt);
      for (std::size_t i = 0; i < d.agents; ++i) {
        const std::size_t th = lay.joint_types.digit(jt, i);
        const auto am = signal_marginal(game, alpha, g, jt, i);
        std::vector<double> km(others.size(), 0.0);
        for (std::size_t a = 0; a < lay.nA(); ++a)
          km[lay.joint_actions.drop(a, i)] += k[a];
        for (std::size_t a = 0; a < lay.nA(); ++a) {
          if (k[a] <= 0.0) continue;
          const std::size_t ai = lay.joint_actions.digit(a, i);
          for (std::size_t w = 0; w < d.signals; ++w) {
            if (am[w] <= 0.0) continue;
            auto payoff = [&](std::size_t act) {
              double s = 0.0;
              for (std::size_t r = 0; r < others.size(); ++r)
                s += km[r] * game.reward(i, lay.joint_actions.insert(r, i, act),
                                         g, w, th);
              return am[w] * s;
            };
            const double base = payoff(ai);
            for (std::size_t dev = 0; dev < d.actions; ++dev) {
              worst.offer(payoff(dev) - base, [&] {
                return detail::idx("agent", i) + " " + detail::idx("state", g) +
                       " " + detail::idx("joint_type", jt) + " " +
                       detail::idx("joint_action", a) + " " +
                       detail::idx("signal", w) + " " +
                       detail::idx("deviation", dev);
              });
            }
          }
        }
      }
    }
  return detail::finish("nash_goal", worst, tol);
}

/// Obedient implementability: one-shot (obedient) + obedience + admissibility.
inline CertificationReport check_oil(const AugmentedGame& game,
                                     const SignalingRule& alpha,
                                     const PolicyProfile& pi, const Goal& kappa,
                                     ObedienceMode obedience,
                                     AdmissibilityMode admissibility,
                                     double tol = kDefaultTol,
                                     std::uint64_t cap = kDefaultCellCap) {
  const SelectionProfile obedient = SelectionProfile::obedient(game.dims);
  return detail::combine(
      "OIL",
      {check_one_shot(game, alpha, obedient, pi, tol),
       check_obedience(game, alpha, pi, obedience, tol, cap),
       check_admissibility(game, alpha, obedient, pi, kappa, admissibility,
                           tol)},
      tol);
}

// -----------------------------------------------------------------------------
// Direct transformation
// -----------------------------------------------------------------------------

struct DirectDesign {
  SignalingRule alpha;
  PolicyProfile pi;
};

/**
 * Direct design from an indirect one: the principal sends what the agents
 * would have selected, so alpha_direct is the selected-signal distribution and
 * the policies are unchanged.
 */
inline DirectDesign construct_direct(const AugmentedGame& game,
                                     const SignalingRule& alpha,
                                     const SelectionProfile& beta,
                                     const PolicyProfile& pi) {
  const Layout lay = game.layout();
  DirectDesign out;
  out.pi = pi;
  out.alpha.table.reserve(alpha.table.size());
  for (std::size_t g = 0; g < game.dims.states; ++g)
    for (std::size_t jt = 0; jt < lay.nT(); ++jt) {
      const auto sigma = selected_distribution(game, alpha, beta, g, jt);
      out.alpha.table.insert(out.alpha.table.end(), sigma.begin(), sigma.end());
    }
  return out;
}

/// Largest total variation between two goal tables over (g, theta) rows.
inline double max_total_variation(const AugmentedGame& game, const Goal& a,
                                  const Goal& b) {
  const Layout lay = game.layout();
  double worst = 0.0;
  for (std::size_t r = 0; r < game.dims.states * lay.nT(); ++r) {
    double tv = 0.0;
    for (std::size_t k = 0; k < lay.nA(); ++k)
      tv += std::abs(a.table[r * lay.nA() + k] - b.table[r * lay.nA() + k]);
    worst = std::max(worst, 0.5 * tv);
  }
  return worst;
}

}  // namespace infodesign

#endif  // INFODESIGN_EQUILIBRIUM_HPP_
