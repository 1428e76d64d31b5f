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

// Fixed-point-alignment design: objectives Z and ZFPA, the constraint and
// misalignment residuals, certification of candidates, a penalty-method
// solver and a lattice brute-force oracle.
//
// Residuals are reported under the constraint labels RG, FE, BOB0, BOB1, FS,
// AD, FPM1, FPM2. All of them are evaluated under obedient selection.

#ifndef INFODESIGN_FPA_HPP_
#define INFODESIGN_FPA_HPP_

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <functional>
#include <limits>
#include <string>
#include <thread>
#include <vector>

#include "infodesign/core.hpp"
#include "infodesign/dynamics.hpp"
#include "infodesign/equilibrium.hpp"
#include "infodesign/game.hpp"
#include "infodesign/valuation.hpp"

namespace infodesign {

/// [i][...] tables for one joint type; J is [i][g], V is [i][g * nW + w].
using AgentTables = std::vector<std::vector<double>>;

struct Tolerances {
  double feasibility = 1e-7;      // constraint residuals
  double complementarity = 1e-7;  // FPM1, FPM2
  double alignment = 1e-7;        // Z, ZFPA
};

struct DesignProblem {
  AugmentedGame game;
  Goal kappa;
  AdmissibilityMode admissibility = AdmissibilityMode::kWeak;
  Tolerances tol;
};

struct Residual {
  double value = 0.0;
  std::string witness = "none";

  void offer(double v, const std::string& w) {
    if (v > value) {
      value = v;
      witness = w;
    }
  }
  void merge(const Residual& o) {
    if (o.value > value) *this = o;
  }
};

struct ConstraintResiduals {
  Residual RG, FE, BOB0, BOB1, FS, AD;
  double max() const {
    return std::max({RG.value, FE.value, BOB0.value, BOB1.value, FS.value,
                     AD.value});
  }
  void merge(const ConstraintResiduals& o) {
    RG.merge(o.RG);
    FE.merge(o.FE);
    BOB0.merge(o.BOB0);
    BOB1.merge(o.BOB1);
    FS.merge(o.FS);
    AD.merge(o.AD);
  }
};

struct FpmResiduals {
  Residual FPM1, FPM2;
  double max() const { return std::max(FPM1.value, FPM2.value); }
  void merge(const FpmResiduals& o) {
    FPM1.merge(o.FPM1);
    FPM2.merge(o.FPM2);
  }
};

struct Certificate {
  double Z = 0.0;
  double ZFPA = 0.0;
  ConstraintResiduals constraints;
  FpmResiduals fpm;
  CertificationReport nash_goal;
  CertificationReport admissibility;
  bool certified = false;

  /// Largest of the constraint, misalignment and |Z| residuals.
  double max_residual() const {
    return std::max({constraints.max(), fpm.max(), std::abs(Z)});
  }
};

struct DesignSolution {
  SignalingRule alpha;
  PolicyProfile pi;
  std::vector<AgentTables> J;  // [jt]
  std::vector<AgentTables> V;  // [jt]
  Certificate certificate;
  std::size_t restart = 0;     // index of the restart that produced it
};

namespace detail {

inline std::string where(std::initializer_list<std::pair<const char*, std::size_t>> kv) {
  std::string s;
  for (const auto& [k, v] : kv) {
    if (!s.empty()) s += ' ';
    s += k;
    s += '=';
    s += std::to_string(v);
  }
  return s;
}

inline bool on_support(double p) { return p > 0.0; }

}  // namespace detail

// -----------------------------------------------------------------------------
// Reference definitions (one joint type at a time)
// -----------------------------------------------------------------------------

/// Sum over (i, g, on-support w) of V_i(g; w) - E_{a ~ pi(.|w)} Q^alpha_i.
inline double z_objective(const AugmentedGame& game, const SignalingRule& alpha,
                          const PolicyProfile& pi, const AgentTables& V,
                          std::size_t jt) {
  const Dims& d = game.dims;
  const Layout lay(d);
  double z = 0.0;
  for (std::size_t i = 0; i < d.agents; ++i)
    for (std::size_t g = 0; g < d.states; ++g) {
      const double* row = alpha.table.data() + lay.signaling_row(g, jt);
      for (std::size_t w = 0; w < lay.nW(); ++w) {
        if (!detail::on_support(row[w])) continue;
        const auto pa = joint_action_probs(game, pi, g, w, jt);
        double e = 0.0;
        for (std::size_t a = 0; a < lay.nA(); ++a) {
          if (pa[a] == 0.0) continue;
          e += pa[a] * q_under_alpha(game, alpha, V[i], i, a, g,
                                     lay.joint_signals.digit(w, i), jt);
        }
        z += V[i][g * lay.nW() + w] - e;
      }
    }
  return z;
}

/// Sum over (i, g) of J_i(g) - sum_{w^k} alpha_i(w^k) V^{alpha_-i}_i(g; w^k).
inline double zfpa_objective(const AugmentedGame& game,
                             const SignalingRule& alpha, const AgentTables& J,
                             const AgentTables& V, std::size_t jt) {
  const Dims& d = game.dims;
  double z = 0.0;
  for (std::size_t i = 0; i < d.agents; ++i)
    for (std::size_t g = 0; g < d.states; ++g) {
      const auto marg = signal_marginal(game, alpha, g, jt, i);
      double avg = 0.0;
      for (std::size_t wk = 0; wk < d.signals; ++wk) {
        if (!detail::on_support(marg[wk])) continue;
        avg += marg[wk] * v_under_alpha(game, alpha, V[i], i, g, wk, wk, jt);
      }
      z += J[i][g] - avg;
    }
  return z;
}

/**
 * Residuals of RG, FE, BOB0, BOB1, FS and AD for one joint type. Each value is
 * the largest violation in the violating direction (0 when satisfied).
 */
inline ConstraintResiduals constraint_residuals(
    const AugmentedGame& game, const SignalingRule& alpha,
    const PolicyProfile& pi, const AgentTables& J, const AgentTables& V,
    const Goal& kappa, std::size_t jt,
    AdmissibilityMode mode = AdmissibilityMode::kWeak) {
  const Dims& d = game.dims;
  const Layout lay(d);
  const Radix others(d.actions, d.agents - 1);
  ConstraintResiduals res;
  using detail::where;
  // RG: every policy row with this joint type's own types.
  for (std::size_t i = 0; i < d.agents; ++i) {
    const std::size_t th = lay.joint_types.digit(jt, i);
    for (std::size_t g = 0; g < d.states; ++g)
      for (std::size_t s = 0; s < d.signals; ++s) {
        std::span<const double> row(pi.probs[i].data() + lay.policy_row(g, s, th),
                                    d.actions);
        res.RG.offer(simplex_violation(row),
                     where({{"agent", i}, {"state", g}, {"signal", s}, {"type", th}}));
      }
  }
  for (std::size_t g = 0; g < d.states; ++g) {
    const double* arow = alpha.table.data() + lay.signaling_row(g, jt);
    for (std::size_t i = 0; i < d.agents; ++i) {
      // FE at every on-support joint signal and deviation a'_i.
      for (std::size_t w = 0; w < lay.nW(); ++w) {
        if (!detail::on_support(arow[w])) continue;
        const std::size_t wi = lay.joint_signals.digit(w, i);
        for (std::size_t dev = 0; dev < d.actions; ++dev) {
          double e = 0.0;
          for (std::size_t r = 0; r < others.size(); ++r) {
            const std::size_t a = lay.joint_actions.insert(r, i, dev);
            double p = 1.0;
            for (std::size_t j = 0; j < d.agents && p != 0.0; ++j) {
              if (j == i) continue;
              p *= pi.probs[j][lay.policy_row(g, lay.joint_signals.digit(w, j),
                                               lay.joint_types.digit(jt, j)) +
                               lay.joint_actions.digit(a, j)];
            }
            if (p == 0.0) continue;
            e += p * q_under_alpha(game, alpha, V[i], i, a, g, wi, jt);
          }
          res.FE.offer(e - V[i][g * lay.nW() + w],
                       where({{"agent", i}, {"state", g}, {"joint_type", jt},
                              {"joint_signal", w}, {"deviation", dev}}));
        }
      }
      // BOB0, BOB1, FS over on-support own principal signals.
      const auto marg = signal_marginal(game, alpha, g, jt, i);
      double j_from_v = 0.0;
      for (std::size_t w = 0; w < lay.nW(); ++w)
        j_from_v += arow[w] * V[i][g * lay.nW() + w];
      double aligned = 0.0;
      for (std::size_t wk = 0; wk < d.signals; ++wk)
        if (detail::on_support(marg[wk]))
          aligned += marg[wk] * v_under_alpha(game, alpha, V[i], i, g, wk, wk, jt);
      for (std::size_t wk = 0; wk < d.signals; ++wk) {
        if (!detail::on_support(marg[wk])) continue;
        for (std::size_t x = 0; x < d.signals; ++x) {
          const double vx = v_under_alpha(game, alpha, V[i], i, g, x, wk, jt);
          const std::string at =
              where({{"agent", i}, {"state", g}, {"joint_type", jt},
                     {"principal_signal", wk}, {"selected", x}});
          res.BOB0.offer(vx - j_from_v, at);
          res.BOB1.offer(vx - aligned, at);
        }
        res.FS.offer(v_under_alpha(game, alpha, V[i], i, g, wk, wk, jt) - J[i][g],
                     where({{"agent", i}, {"state", g}, {"joint_type", jt},
                            {"principal_signal", wk}}));
      }
    }
  }
  // AD for this joint type only.
  {
    const SelectionProfile obedient = SelectionProfile::obedient(d);
    for (std::size_t g = 0; g < d.states; ++g) {
      const auto rho = action_pushforward(game, alpha, obedient, pi, g, jt);
      const double* k = kappa.table.data() + lay.goal_row(g, jt);
      if (mode == AdmissibilityMode::kStrong) {
        for (std::size_t a = 0; a < lay.nA(); ++a)
          res.AD.offer(std::abs(k[a] - rho[a]),
                       where({{"state", g}, {"joint_type", jt}, {"joint_action", a}}));
        continue;
      }
      for (std::size_t i = 0; i < d.agents; ++i) {
        const std::size_t th = lay.joint_types.digit(jt, i);
        const auto marg = signal_marginal(game, alpha, g, jt, i);
        double gap = 0.0;
        for (std::size_t a = 0; a < lay.nA(); ++a) {
          double rbar = 0.0;
          for (std::size_t s = 0; s < d.signals; ++s)
            rbar += marg[s] * game.reward(i, a, g, s, th);
          gap += rbar * (k[a] - rho[a]);
        }
        res.AD.offer(std::abs(gap),
                     where({{"agent", i}, {"state", g}, {"joint_type", jt}}));
      }
    }
  }
  return res;
}

/// FPM1 and FPM2 products for one joint type (on-support indices only).
inline FpmResiduals fpm_residuals(const AugmentedGame& game,
                                  const SignalingRule& alpha,
                                  const PolicyProfile& pi, const AgentTables& J,
                                  const AgentTables& V, std::size_t jt) {
  const Dims& d = game.dims;
  const Layout lay(d);
  FpmResiduals res;
  using detail::where;
  for (std::size_t g = 0; g < d.states; ++g) {
    const double* arow = alpha.table.data() + lay.signaling_row(g, jt);
    for (std::size_t i = 0; i < d.agents; ++i) {
      const std::size_t th = lay.joint_types.digit(jt, i);
      const auto marg = signal_marginal(game, alpha, g, jt, i);
      for (std::size_t wk = 0; wk < d.signals; ++wk) {
        if (!detail::on_support(marg[wk])) continue;
        const double e =
            J[i][g] - v_under_alpha(game, alpha, V[i], i, g, wk, wk, jt);
        res.FPM1.offer(std::abs(marg[wk] * e),
                       where({{"agent", i}, {"state", g}, {"joint_type", jt},
                              {"principal_signal", wk}}));
      }
      for (std::size_t w = 0; w < lay.nW(); ++w) {
        if (!detail::on_support(arow[w])) continue;
        const std::size_t wi = lay.joint_signals.digit(w, i);
        const double* prow = pi.probs[i].data() + lay.policy_row(g, wi, th);
        for (std::size_t ai = 0; ai < d.actions; ++ai) {
          if (prow[ai] == 0.0) continue;
          const double q =
              q_under_opponents(game, pi, J[i], i, ai, g, wi, w, jt);
          res.FPM2.offer(std::abs(prow[ai] * (V[i][g * lay.nW() + w] - q)),
                         where({{"agent", i}, {"state", g}, {"joint_type", jt},
                                {"joint_signal", w}, {"action", ai}}));
        }
      }
    }
  }
  return res;
}

/// Full certificate of a candidate (alpha, pi, J, V) over all joint types.
inline Certificate certify_candidate(const DesignProblem& problem,
                                     const SignalingRule& alpha,
                                     const PolicyProfile& pi,
                                     const std::vector<AgentTables>& J,
                                     const std::vector<AgentTables>& V) {
  const AugmentedGame& game = problem.game;
  const Layout lay = game.layout();
  Certificate c;
  for (std::size_t jt = 0; jt < lay.nT(); ++jt) {
    c.Z += z_objective(game, alpha, pi, V[jt], jt);
    c.ZFPA += zfpa_objective(game, alpha, J[jt], V[jt], jt);
    c.constraints.merge(constraint_residuals(game, alpha, pi, J[jt], V[jt],
                                             problem.kappa, jt,
                                             problem.admissibility));
    c.fpm.merge(fpm_residuals(game, alpha, pi, J[jt], V[jt], jt));
  }
  c.nash_goal = check_nash_goal(game, alpha, problem.kappa,
                                problem.tol.feasibility);
  c.admissibility = check_admissibility(
      game, alpha, SelectionProfile::obedient(game.dims), pi, problem.kappa,
      AdmissibilityMode::kWeak, problem.tol.feasibility);
  const Tolerances& t = problem.tol;
  c.certified = std::abs(c.Z) <= t.alignment && std::abs(c.ZFPA) <= t.alignment &&
                c.constraints.max() <= t.feasibility &&
                c.fpm.max() <= t.complementarity && c.nash_goal.pass &&
                c.admissibility.pass;
  return c;
}

/**
 * Exact obedient V for every joint type, with J set to the smallest value
 * satisfying FS: the maximum over on-support principal signals of
 * V^{alpha_-i}_i(g; w^k).
 */
inline void aligned_tables(const AugmentedGame& game, const SignalingRule& alpha,
                           const PolicyProfile& pi,
                           std::vector<AgentTables>& J,
                           std::vector<AgentTables>& V) {
  const Dims& d = game.dims;
  const Layout lay(d);
  const SelectionProfile obedient = SelectionProfile::obedient(d);
  J.assign(lay.nT(), {});
  V.assign(lay.nT(), {});
  for (std::size_t jt = 0; jt < lay.nT(); ++jt) {
    ValueBundle vb = evaluate_values(game, alpha, obedient, pi, jt);
    V[jt] = vb.V;
    J[jt].assign(d.agents, std::vector<double>(d.states, 0.0));
    for (std::size_t i = 0; i < d.agents; ++i)
      for (std::size_t g = 0; g < d.states; ++g) {
        const auto marg = signal_marginal(game, alpha, g, jt, i);
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t wk = 0; wk < d.signals; ++wk)
          if (detail::on_support(marg[wk]))
            best = std::max(best, v_under_alpha(game, alpha, vb.V[i], i, g, wk,
                                                wk, jt));
        J[jt][i][g] = best;
      }
  }
}

// -----------------------------------------------------------------------------
// Decision vector and fast evaluation
// -----------------------------------------------------------------------------

/// Flat decision vector: alpha rows, then each agent's policy rows.
struct DesignSpace {
  explicit DesignSpace(const Dims& d) : lay(d) {
    alpha_size = d.states * lay.nT() * lay.nW();
    for (std::size_t r = 0; r < d.states * lay.nT(); ++r)
      rows.push_back({r * lay.nW(), lay.nW()});
    std::size_t off = alpha_size;
    for (std::size_t i = 0; i < d.agents; ++i) {
      pi_offset.push_back(off);
      for (std::size_t r = 0; r < d.states * d.signals * d.types; ++r) {
        rows.push_back({off, d.actions});
        off += d.actions;
      }
    }
    size = off;
  }

  struct Row {
    std::size_t offset;
    std::size_t length;
  };

  Layout lay;
  std::size_t alpha_size = 0;
  std::size_t size = 0;
  std::vector<std::size_t> pi_offset;
  std::vector<Row> rows;

  std::vector<double> pack(const SignalingRule& alpha,
                           const PolicyProfile& pi) const {
    std::vector<double> x(alpha.table);
    for (const auto& p : pi.probs) x.insert(x.end(), p.begin(), p.end());
    return x;
  }

  void unpack(const std::vector<double>& x, SignalingRule& alpha,
              PolicyProfile& pi) const {
    alpha.table.assign(x.begin(), x.begin() + alpha_size);
    pi.probs.assign(lay.dims.agents, {});
    for (std::size_t i = 0; i < lay.dims.agents; ++i) {
      const std::size_t len =
          lay.dims.states * lay.dims.signals * lay.dims.types * lay.dims.actions;
      pi.probs[i].assign(x.begin() + pi_offset[i],
                         x.begin() + pi_offset[i] + len);
    }
  }

  void project(std::vector<double>& x) const {
    for (const auto& r : rows)
      project_to_simplex(std::span<double>(x.data() + r.offset, r.length));
  }
};

/**
 * Evaluates every quantity the solver and the oracle need at a decision
 * vector, with V exact under obedience and J at the FS-minimal value.
 */
class FastEvaluator {
 public:
  FastEvaluator(const AugmentedGame& game, const Goal* kappa,
                AdmissibilityMode mode)
      : game_(game), kappa_(kappa), mode_(mode), space_(game.dims) {
    const Dims& d = game.dims;
    const Layout& lay = space_.lay;
    n_ = d.agents;
    G_ = d.states;
    S_ = d.signals;
    A_ = d.actions;
    nA_ = lay.nA();
    nW_ = lay.nW();
    nT_ = lay.nT();
    adig_.resize(nA_ * n_);
    for (std::size_t a = 0; a < nA_; ++a)
      for (std::size_t i = 0; i < n_; ++i)
        adig_[a * n_ + i] = lay.joint_actions.digit(a, i);
    wdig_.resize(nW_ * n_);
    for (std::size_t w = 0; w < nW_; ++w)
      for (std::size_t i = 0; i < n_; ++i)
        wdig_[w * n_ + i] = lay.joint_signals.digit(w, i);
    wpow_.resize(n_);
    for (std::size_t i = 0; i < n_; ++i) wpow_[i] = checked_pow(S_, n_ - 1 - i);
    apow_.resize(n_);
    for (std::size_t i = 0; i < n_; ++i) apow_[i] = checked_pow(A_, n_ - 1 - i);
    blocks_.resize(nT_);
    for (auto& b : blocks_) allocate(b);
  }

  /// Per-joint-type quantities.
  struct Block {
    std::vector<double> J;     // exact [i * G + g]
    std::vector<double> Jfs;   // FS-minimal [i * G + g]
    std::vector<double> V;     // [(i * G + g) * nW + w]
    std::vector<double> Q;     // [((i * nA + a) * G + g) * S + s] (R + gamma T J)
    std::vector<double> Qa;    // Q^alpha [((i * nA + a) * G + g) * S + s]
    std::vector<double> pa;    // [(g * nW + w) * nA + a]
    std::vector<double> am;    // [(i * G + g) * S + s]
    std::vector<double> Vt;    // [((i * G + g) * S + sk) * S + x] unnormalized
    std::vector<double> fe;    // [((g * nW + w) * n + i) * A + a'] deviation - V
    std::vector<double> fpm2;  // [((g * nW + w) * n + i) * A + a] pi * |V - Qpi|
    std::vector<double> rho;   // [g * nA + a]
    std::vector<double> ad;    // weak: [i * G + g]; strong: [g * nA + a]
    std::vector<double> z;     // [i * G + g] Z contribution
  };

  const DesignSpace& space() const { return space_; }
  const Block& block(std::size_t jt) const { return blocks_[jt]; }
  std::size_t agents() const { return n_; }

  void evaluate(const std::vector<double>& x) {
    for (std::size_t jt = 0; jt < nT_; ++jt) evaluate_block(x, jt, blocks_[jt]);
  }

  /// Largest residual over every certificate family and ZFPA, at the last
  /// evaluated point. `pi_rg` adds the RG residual of the policy rows.
  void summarize(const std::vector<double>& x, double& max_residual,
                 double& zfpa) const {
    double worst = 0.0;
    double zsum = 0.0;
    zfpa = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
      const std::size_t len = G_ * S_ * space_.lay.dims.types;
      for (std::size_t r = 0; r < len; ++r)
        worst = std::max(worst, simplex_violation(std::span<const double>(
                                    x.data() + space_.pi_offset[i] + r * A_, A_)));
    }
    for (std::size_t jt = 0; jt < nT_; ++jt) {
      const Block& b = blocks_[jt];
      const double* alpha = x.data();
      for (std::size_t g = 0; g < G_; ++g) {
        const double* arow = alpha + (g * nT_ + jt) * nW_;
        for (std::size_t w = 0; w < nW_; ++w) {
          if (!(arow[w] > 0.0)) continue;
          for (std::size_t k = 0; k < n_ * A_; ++k) {
            worst = std::max(worst, b.fe[(g * nW_ + w) * n_ * A_ + k]);
            worst = std::max(worst, b.fpm2[(g * nW_ + w) * n_ * A_ + k]);
          }
        }
      }
      for (std::size_t i = 0; i < n_; ++i)
        for (std::size_t g = 0; g < G_; ++g) {
          zsum += b.z[i * G_ + g];
          const double jfs = b.Jfs[i * G_ + g];
          double avg = 0.0;
          for (std::size_t s = 0; s < S_; ++s) avg += vt(b, i, g, s, s);
          for (std::size_t sk = 0; sk < S_; ++sk) {
            const double m = b.am[(i * G_ + g) * S_ + sk];
            if (!(m > 0.0)) continue;
            const double own = vt(b, i, g, sk, sk) / m;
            zfpa += m * (jfs - own);
            worst = std::max(worst, m * (jfs - own));  // FPM1
            for (std::size_t xs = 0; xs < S_; ++xs) {
              const double vx = vt(b, i, g, sk, xs) / m;
              worst = std::max(worst, vx - b.J[i * G_ + g]);  // BOB0
              worst = std::max(worst, vx - avg);               // BOB1
            }
          }
        }
      for (double v : b.ad) worst = std::max(worst, std::abs(v));
    }
    max_residual = std::max(worst, std::abs(zsum));
  }

  double vt(const Block& b, std::size_t i, std::size_t g, std::size_t sk,
            std::size_t x) const {
    return b.Vt[((i * G_ + g) * S_ + sk) * S_ + x];
  }
  double am(const Block& b, std::size_t i, std::size_t g, std::size_t s) const {
    return b.am[(i * G_ + g) * S_ + s];
  }
  std::size_t states() const { return G_; }
  std::size_t signals() const { return S_; }
  std::size_t actions() const { return A_; }
  std::size_t joint_signals() const { return nW_; }
  std::size_t joint_types() const { return nT_; }
  bool strong() const { return mode_ == AdmissibilityMode::kStrong; }
  bool has_goal() const { return kappa_ != nullptr; }

 private:
  void allocate(Block& b) {
    b.J.assign(n_ * G_, 0.0);
    b.Jfs.assign(n_ * G_, 0.0);
    b.V.assign(n_ * G_ * nW_, 0.0);
    b.Q.assign(n_ * nA_ * G_ * S_, 0.0);
    b.Qa.assign(n_ * nA_ * G_ * S_, 0.0);
    b.pa.assign(G_ * nW_ * nA_, 0.0);
    b.am.assign(n_ * G_ * S_, 0.0);
    b.Vt.assign(n_ * G_ * S_ * S_, 0.0);
    b.fe.assign(G_ * nW_ * n_ * A_, 0.0);
    b.fpm2.assign(G_ * nW_ * n_ * A_, 0.0);
    b.rho.assign(G_ * nA_, 0.0);
    b.ad.assign(mode_ == AdmissibilityMode::kStrong ? G_ * nA_ : n_ * G_, 0.0);
    b.z.assign(n_ * G_, 0.0);
  }

  double reward(std::size_t i, std::size_t a, std::size_t g, std::size_t s,
                std::size_t th) const {
    return game_.rewards[i][((a * G_ + g) * S_ + s) * space_.lay.dims.types + th];
  }

  void evaluate_block(const std::vector<double>& x, std::size_t jt, Block& b) {
    const Layout& lay = space_.lay;
    const std::size_t T = lay.dims.types;
    const double gamma = game_.discount;
    std::vector<std::size_t> th(n_);
    for (std::size_t i = 0; i < n_; ++i) th[i] = lay.joint_types.digit(jt, i);
    auto pirow = [&](std::size_t i, std::size_t g, std::size_t s) {
      return x.data() + space_.pi_offset[i] + ((g * S_ + s) * T + th[i]) * A_;
    };
    // Joint action probabilities.
    for (std::size_t g = 0; g < G_; ++g)
      for (std::size_t w = 0; w < nW_; ++w) {
        double* pa = b.pa.data() + (g * nW_ + w) * nA_;
        for (std::size_t a = 0; a < nA_; ++a) {
          double p = 1.0;
          for (std::size_t i = 0; i < n_; ++i)
            p *= pirow(i, g, wdig_[w * n_ + i])[adig_[a * n_ + i]];
          pa[a] = p;
        }
      }
    // Stage kernel and rewards under obedience (selected = principal).
    K_.assign(G_ * G_, 0.0);
    r_.assign(n_ * G_, 0.0);
    std::fill(b.rho.begin(), b.rho.end(), 0.0);
    for (std::size_t g = 0; g < G_; ++g) {
      const double* arow = x.data() + (g * nT_ + jt) * nW_;
      for (std::size_t w = 0; w < nW_; ++w) {
        const double aw = arow[w];
        if (aw == 0.0) continue;
        const double* pa = b.pa.data() + (g * nW_ + w) * nA_;
        for (std::size_t a = 0; a < nA_; ++a) {
          const double p = aw * pa[a];
          if (p == 0.0) continue;
          b.rho[g * nA_ + a] += p;
          for (std::size_t i = 0; i < n_; ++i)
            r_[i * G_ + g] += p * reward(i, a, g, wdig_[w * n_ + i], th[i]);
        }
      }
      for (std::size_t a = 0; a < nA_; ++a) {
        const double p = b.rho[g * nA_ + a];
        if (p == 0.0) continue;
        const double* t = game_.transition.data() + (g * nA_ + a) * G_;
        for (std::size_t h = 0; h < G_; ++h) K_[g * G_ + h] += p * t[h];
      }
    }
    // Exact J.
    Eigen::MatrixXd M = Eigen::MatrixXd::Identity(G_, G_);
    for (std::size_t g = 0; g < G_; ++g)
      for (std::size_t h = 0; h < G_; ++h) M(g, h) -= gamma * K_[g * G_ + h];
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(M);
    Eigen::MatrixXd rhs(G_, n_);
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t g = 0; g < G_; ++g) rhs(g, i) = r_[i * G_ + g];
    Eigen::MatrixXd sol = lu.solve(rhs);
    sol += lu.solve(rhs - M * sol);
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t g = 0; g < G_; ++g) b.J[i * G_ + g] = sol(g, i);
    // Q from J, then V.
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t a = 0; a < nA_; ++a)
        for (std::size_t g = 0; g < G_; ++g) {
          const double* t = game_.transition.data() + (g * nA_ + a) * G_;
          double cont = 0.0;
          for (std::size_t h = 0; h < G_; ++h) cont += t[h] * b.J[i * G_ + h];
          for (std::size_t s = 0; s < S_; ++s)
            b.Q[((i * nA_ + a) * G_ + g) * S_ + s] =
                reward(i, a, g, s, th[i]) + gamma * cont;
        }
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t g = 0; g < G_; ++g)
        for (std::size_t w = 0; w < nW_; ++w) {
          const double* pa = b.pa.data() + (g * nW_ + w) * nA_;
          const std::size_t s = wdig_[w * n_ + i];
          double v = 0.0;
          for (std::size_t a = 0; a < nA_; ++a)
            v += pa[a] * b.Q[((i * nA_ + a) * G_ + g) * S_ + s];
          b.V[(i * G_ + g) * nW_ + w] = v;
        }
    // Q^alpha with the literal continuation sum_w alpha(w | g') V(g', w).
    c2_.assign(n_ * G_, 0.0);
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t h = 0; h < G_; ++h) {
        const double* arow = x.data() + (h * nT_ + jt) * nW_;
        double s = 0.0;
        for (std::size_t w = 0; w < nW_; ++w) s += arow[w] * b.V[(i * G_ + h) * nW_ + w];
        c2_[i * G_ + h] = s;
      }
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t a = 0; a < nA_; ++a)
        for (std::size_t g = 0; g < G_; ++g) {
          const double* t = game_.transition.data() + (g * nA_ + a) * G_;
          double cont = 0.0;
          for (std::size_t h = 0; h < G_; ++h) cont += t[h] * c2_[i * G_ + h];
          for (std::size_t s = 0; s < S_; ++s)
            b.Qa[((i * nA_ + a) * G_ + g) * S_ + s] =
                reward(i, a, g, s, th[i]) + gamma * cont;
        }
    // Marginals and unnormalized opponent-averaged V.
    std::fill(b.am.begin(), b.am.end(), 0.0);
    std::fill(b.Vt.begin(), b.Vt.end(), 0.0);
    for (std::size_t g = 0; g < G_; ++g) {
      const double* arow = x.data() + (g * nT_ + jt) * nW_;
      for (std::size_t w = 0; w < nW_; ++w) {
        const double aw = arow[w];
        if (aw == 0.0) continue;
        for (std::size_t i = 0; i < n_; ++i) {
          const std::size_t sk = wdig_[w * n_ + i];
          b.am[(i * G_ + g) * S_ + sk] += aw;
          const std::size_t base = w - sk * wpow_[i];
          for (std::size_t xs = 0; xs < S_; ++xs)
            b.Vt[((i * G_ + g) * S_ + sk) * S_ + xs] +=
                aw * b.V[(i * G_ + g) * nW_ + base + xs * wpow_[i]];
        }
      }
    }
    // FS-minimal J.
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t g = 0; g < G_; ++g) {
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t sk = 0; sk < S_; ++sk) {
          const double m = b.am[(i * G_ + g) * S_ + sk];
          if (m > 0.0) best = std::max(best, b.Vt[((i * G_ + g) * S_ + sk) * S_ + sk] / m);
        }
        b.Jfs[i * G_ + g] = best;
      }
    // FE deviations, FPM2 products and Z terms at every joint signal.
    std::fill(b.z.begin(), b.z.end(), 0.0);
    dev_.assign(A_, 0.0);
    qpi_.assign(A_, 0.0);
    for (std::size_t g = 0; g < G_; ++g) {
      const double* arow = x.data() + (g * nT_ + jt) * nW_;
      for (std::size_t w = 0; w < nW_; ++w) {
        const double* pa = b.pa.data() + (g * nW_ + w) * nA_;
        for (std::size_t i = 0; i < n_; ++i) {
          const std::size_t s = wdig_[w * n_ + i];
          const double* own = pirow(i, g, s);
          std::fill(dev_.begin(), dev_.end(), 0.0);
          std::fill(qpi_.begin(), qpi_.end(), 0.0);
          double zq = 0.0;
          for (std::size_t a = 0; a < nA_; ++a) {
            // Opponents' probability of a_-i.
            double p = 1.0;
            for (std::size_t j = 0; j < n_; ++j)
              if (j != i) p *= pirow(j, g, wdig_[w * n_ + j])[adig_[a * n_ + j]];
            if (p == 0.0) continue;
            const std::size_t ai = adig_[a * n_ + i];
            const double qa = b.Qa[((i * nA_ + a) * G_ + g) * S_ + s];
            dev_[ai] += p * qa;
            zq += pa[a] * qa;
            // Q^{pi_-i} with the FS-minimal J.
            const double* t = game_.transition.data() + (g * nA_ + a) * G_;
            double cont = 0.0;
            for (std::size_t h = 0; h < G_; ++h) cont += t[h] * b.Jfs[i * G_ + h];
            qpi_[ai] += p * (reward(i, a, g, s, th[i]) + gamma * cont);
          }
          const double v = b.V[(i * G_ + g) * nW_ + w];
          double* fe = b.fe.data() + ((g * nW_ + w) * n_ + i) * A_;
          double* f2 = b.fpm2.data() + ((g * nW_ + w) * n_ + i) * A_;
          for (std::size_t ai = 0; ai < A_; ++ai) {
            fe[ai] = dev_[ai] - v;
            f2[ai] = std::abs(own[ai] * (v - qpi_[ai]));
          }
          if (arow[w] > 0.0) b.z[i * G_ + g] += v - zq;
        }
      }
    }
    // Admissibility against the goal.
    if (kappa_ != nullptr) {
      for (std::size_t g = 0; g < G_; ++g) {
        const double* k = kappa_->table.data() + (g * nT_ + jt) * nA_;
        if (mode_ == AdmissibilityMode::kStrong) {
          for (std::size_t a = 0; a < nA_; ++a)
            b.ad[g * nA_ + a] = k[a] - b.rho[g * nA_ + a];
          continue;
        }
        for (std::size_t i = 0; i < n_; ++i) {
          double gap = 0.0;
          for (std::size_t a = 0; a < nA_; ++a) {
            double rbar = 0.0;
            for (std::size_t s = 0; s < S_; ++s)
              rbar += b.am[(i * G_ + g) * S_ + s] * reward(i, a, g, s, th[i]);
            gap += rbar * (k[a] - b.rho[g * nA_ + a]);
          }
          b.ad[i * G_ + g] = gap;
        }
      }
    }
  }

  const AugmentedGame& game_;
  const Goal* kappa_;
  AdmissibilityMode mode_;
  DesignSpace space_;
  std::size_t n_, G_, S_, A_, nA_, nW_, nT_;
  std::vector<std::size_t> adig_, wdig_, wpow_, apow_;
  std::vector<Block> blocks_;
  std::vector<double> K_, r_, c2_, dev_, qpi_;
};

// -----------------------------------------------------------------------------
// Penalty surrogate and Levenberg-Marquardt polish
// -----------------------------------------------------------------------------

namespace detail {

/**
 * Smooth surrogate of the alignment program. The alignment term vanishes iff
 * V^{alpha_-i}_i(g; w^k) is equal across on-support principal signals, which
 * together with FS is ZFPA = 0. Support-conditioned constraints are weighted
 * by the probability of their condition so the surrogate stays continuous
 * when an alpha entry reaches zero.
 */
inline double surrogate(const FastEvaluator& ev, const std::vector<double>& x,
                        double penalty, bool use_goal) {
  const std::size_t n = ev.agents(), G = ev.states(), S = ev.signals(),
                    A = ev.actions(), nW = ev.joint_signals(),
                    nT = ev.joint_types();
  double align = 0.0, pen = 0.0;
  for (std::size_t jt = 0; jt < nT; ++jt) {
    const auto& b = ev.block(jt);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t g = 0; g < G; ++g) {
        double avg = 0.0;
        for (std::size_t s = 0; s < S; ++s) avg += ev.vt(b, i, g, s, s);
        for (std::size_t s = 0; s < S; ++s) {
          const double ms = ev.am(b, i, g, s);
          for (std::size_t t = s + 1; t < S; ++t) {
            const double mt = ev.am(b, i, g, t);
            const double e = mt * ev.vt(b, i, g, s, s) - ms * ev.vt(b, i, g, t, t);
            align += e * e;
          }
          for (std::size_t xs = 0; xs < S; ++xs) {
            const double e = ev.vt(b, i, g, s, xs) - ms * avg;
            if (e > 0.0) pen += e * e;
          }
        }
      }
    for (std::size_t g = 0; g < G; ++g) {
      const double* arow = x.data() + (g * nT + jt) * nW;
      for (std::size_t w = 0; w < nW; ++w) {
        const double aw = std::max(arow[w], 0.0);
        if (aw == 0.0) continue;
        const double* fe = b.fe.data() + (g * nW + w) * n * A;
        for (std::size_t k = 0; k < n * A; ++k) {
          const double e = aw * fe[k];
          if (e > 0.0) pen += e * e;
        }
      }
    }
    if (use_goal)
      for (double v : b.ad) pen += v * v;
  }
  return align + penalty * pen;
}

/// Support pattern used by the polish: which alpha and pi entries are free.
struct Support {
  std::vector<char> active;  // per decision entry
};

inline Support identify_support(const DesignSpace& space,
                                std::vector<double>& x, double threshold) {
  Support sup;
  sup.active.assign(x.size(), 0);
  for (const auto& r : space.rows) {
    double s = 0.0;
    for (std::size_t k = 0; k < r.length; ++k) {
      double& v = x[r.offset + k];
      if (v < threshold) v = 0.0;
      s += v;
    }
    if (s <= 0.0) {
      // Keep the largest entry if the row collapsed.
      std::size_t best = 0;
      for (std::size_t k = 1; k < r.length; ++k)
        if (x[r.offset + k] > x[r.offset + best]) best = k;
      x[r.offset + best] = 1.0;
      s = 1.0;
    }
    for (std::size_t k = 0; k < r.length; ++k) {
      x[r.offset + k] /= s;
      sup.active[r.offset + k] = x[r.offset + k] > 0.0;
    }
  }
  return sup;
}

/**
 * Unnormalized residual vector of the certificate conditions on a fixed
 * support: alignment differences, FE+, BOB1+, AD.
 */
inline void polish_residuals(const FastEvaluator& ev, const Support& sup,
                             bool use_goal, std::vector<double>& out) {
  out.clear();
  const std::size_t n = ev.agents(), G = ev.states(), S = ev.signals(),
                    A = ev.actions(), nW = ev.joint_signals(),
                    nT = ev.joint_types();
  for (std::size_t jt = 0; jt < nT; ++jt) {
    const auto& b = ev.block(jt);
    for (std::size_t g = 0; g < G; ++g) {
      const std::size_t arow = (g * nT + jt) * nW;
      // Which principal signals each agent can receive on the support.
      for (std::size_t i = 0; i < n; ++i) {
        std::vector<char> on(S, 0);
        for (std::size_t w = 0; w < nW; ++w)
          if (sup.active[arow + w]) {
            std::size_t rest = w;
            for (std::size_t j = n; j-- > 0;) {
              if (j == i) on[rest % S] = 1;
              rest /= S;
            }
          }
        double avg = 0.0;
        for (std::size_t s = 0; s < S; ++s) avg += ev.vt(b, i, g, s, s);
        double first = 0.0;
        bool have_first = false;
        for (std::size_t s = 0; s < S; ++s) {
          if (!on[s]) continue;
          const double m = ev.am(b, i, g, s);
          const double own = m > 0.0 ? ev.vt(b, i, g, s, s) / m : 0.0;
          if (!have_first) {
            first = own;
            have_first = true;
          } else {
            out.push_back(own - first);
          }
          for (std::size_t xs = 0; xs < S; ++xs) {
            const double vx = m > 0.0 ? ev.vt(b, i, g, s, xs) / m : 0.0;
            out.push_back(std::max(0.0, vx - avg));
          }
        }
      }
      for (std::size_t w = 0; w < nW; ++w) {
        if (!sup.active[arow + w]) continue;
        const double* fe = b.fe.data() + (g * nW + w) * n * A;
        for (std::size_t k = 0; k < n * A; ++k) out.push_back(std::max(0.0, fe[k]));
      }
    }
    if (use_goal)
      for (double v : b.ad) out.push_back(v);
  }
}

inline double sq_norm(const std::vector<double>& v) {
  double s = 0.0;
  for (double e : v) s += e * e;
  return s;
}

/// Levenberg-Marquardt on the free entries of the support, rows renormalized.
inline void polish(FastEvaluator& ev, std::vector<double>& x,
                   const Support& sup, bool use_goal, std::size_t max_iters) {
  const DesignSpace& space = ev.space();
  std::vector<std::size_t> free;
  for (const auto& r : space.rows) {
    std::size_t count = 0;
    for (std::size_t k = 0; k < r.length; ++k) count += sup.active[r.offset + k];
    if (count < 2) continue;
    for (std::size_t k = 0; k < r.length; ++k)
      if (sup.active[r.offset + k]) free.push_back(r.offset + k);
  }
  auto renormalize = [&](std::vector<double>& y) {
    for (const auto& r : space.rows) {
      double s = 0.0;
      for (std::size_t k = 0; k < r.length; ++k) {
        double& v = y[r.offset + k];
        if (!sup.active[r.offset + k] || v < 0.0) v = 0.0;
        s += v;
      }
      if (s <= 0.0) continue;
      for (std::size_t k = 0; k < r.length; ++k) y[r.offset + k] /= s;
    }
  };
  std::vector<double> r0, r1;
  ev.evaluate(x);
  polish_residuals(ev, sup, use_goal, r0);
  double f0 = sq_norm(r0);
  if (free.empty() || r0.empty()) return;
  const std::size_t m = r0.size(), k = free.size();
  double lambda = 1e-3;
  Eigen::MatrixXd Jac(m, k);
  for (std::size_t it = 0; it < max_iters && f0 > 1e-30; ++it) {
    for (std::size_t c = 0; c < k; ++c) {
      std::vector<double> y = x;
      const double h = 1e-7;
      y[free[c]] += h;
      ev.evaluate(y);
      polish_residuals(ev, sup, use_goal, r1);
      for (std::size_t rr = 0; rr < m; ++rr) Jac(rr, c) = (r1[rr] - r0[rr]) / h;
    }
    Eigen::VectorXd rv = Eigen::Map<Eigen::VectorXd>(r0.data(), m);
    const Eigen::MatrixXd JtJ = Jac.transpose() * Jac;
    const Eigen::VectorXd g = Jac.transpose() * rv;
    bool improved = false;
    for (int tries = 0; tries < 12 && !improved; ++tries) {
      Eigen::MatrixXd H = JtJ;
      for (std::size_t c = 0; c < k; ++c) H(c, c) += lambda * (1.0 + JtJ(c, c));
      const Eigen::VectorXd step = H.ldlt().solve(-g);
      std::vector<double> y = x;
      for (std::size_t c = 0; c < k; ++c) y[free[c]] += step(c);
      renormalize(y);
      ev.evaluate(y);
      polish_residuals(ev, sup, use_goal, r1);
      const double f1 = r1.size() == m ? sq_norm(r1) : f0 + 1.0;
      if (f1 < f0) {
        x.swap(y);
        r0.swap(r1);
        f0 = f1;
        lambda = std::max(lambda / 4.0, 1e-12);
        improved = true;
      } else {
        lambda *= 8.0;
      }
    }
    if (!improved) break;
  }
  ev.evaluate(x);
}

}  // namespace detail

// -----------------------------------------------------------------------------
// Solver
// -----------------------------------------------------------------------------

struct SolverOptions {
  std::size_t restarts = 16;
  std::uint64_t seed = 0;
  std::size_t max_iters = 300;        // descent iterations per penalty round
  double penalty_start = 1.0;
  double penalty_growth = 10.0;
  double penalty_max = 1e6;
  double step = 1e-2;
  std::size_t polish_iters = 60;
  std::size_t threads = 0;            // 0: INFODESIGN_THREADS or 1
};

/// Threads to use: explicit option, else INFODESIGN_THREADS (0 = hardware).
inline std::size_t resolve_threads(std::size_t requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("INFODESIGN_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<std::size_t>(v);
    if (v == 0) return std::max(1u, std::thread::hardware_concurrency());
  }
  return 1;
}

namespace detail {

struct Candidate {
  std::vector<double> x;
  bool certified = false;
  double max_residual = std::numeric_limits<double>::infinity();
  double zfpa = std::numeric_limits<double>::infinity();
  std::size_t restart = 0;
};

/// Deterministic order: certified first, then residual, ZFPA, lexicographic x.
inline bool better(const Candidate& a, const Candidate& b) {
  if (a.certified != b.certified) return a.certified;
  if (a.max_residual != b.max_residual) return a.max_residual < b.max_residual;
  if (a.zfpa != b.zfpa) return a.zfpa < b.zfpa;
  return std::lexicographical_compare(a.x.begin(), a.x.end(), b.x.begin(),
                                      b.x.end());
}

/// Projected descent with step adaptation; returns the final objective.
template <typename Objective>
double projected_descent(const DesignSpace& space, std::vector<double>& x,
                         Objective&& f, double step, std::size_t iters,
                         double floor = 1e-28) {
  const std::size_t N = x.size();
  double fx = f(x);
  std::vector<double> grad(N), y(N);
  double eta = step;
  for (std::size_t it = 0; it < iters; ++it) {
    if (fx < floor) break;
    for (std::size_t k = 0; k < N; ++k) {
      const double h = 1e-7;
      const double saved = x[k];
      x[k] = saved + h;
      grad[k] = (f(x) - fx) / h;
      x[k] = saved;
    }
    bool accepted = false;
    for (int tries = 0; tries < 40; ++tries) {
      for (std::size_t k = 0; k < N; ++k) y[k] = x[k] - eta * grad[k];
      space.project(y);
      // Snap tiny entries so supports can close exactly.
      for (const auto& r : space.rows) {
        double s = 0.0;
        for (std::size_t k = 0; k < r.length; ++k) {
          double& v = y[r.offset + k];
          if (v < 1e-9) v = 0.0;
          s += v;
        }
        for (std::size_t k = 0; k < r.length; ++k) y[r.offset + k] /= s;
      }
      const double fy = f(y);
      if (fy < fx) {
        const double rel = (fx - fy) / std::max(1e-300, std::abs(fx));
        x.swap(y);
        fx = fy;
        eta = std::min(eta * 2.0, 1e3);
        accepted = true;
        if (rel < 1e-12) it = iters;  // stalled
        break;
      }
      eta *= 0.5;
      if (eta < 1e-16) break;
    }
    if (!accepted) break;
  }
  return fx;
}

}  // namespace detail

/// Penalty-method search over (alpha, pi) with exact V and FS-minimal J.
inline DesignSolution solve_fpalign(const DesignProblem& problem,
                                    const SolverOptions& options = {}) {
  const AugmentedGame& game = problem.game;
  require(validate_game(game), ErrorCode::kInvalidArgument);
  require(validate_goal(game, problem.kappa), ErrorCode::kShapeMismatch);
  require_within_cap(game.dims, kDefaultCellCap);
  const DesignSpace space(game.dims);
  const std::size_t restarts = std::max<std::size_t>(1, options.restarts);
  std::vector<detail::Candidate> results(restarts);

  auto run = [&](std::size_t r) {
    FastEvaluator ev(game, &problem.kappa, problem.admissibility);
    Rng rng(derive_seed(options.seed, r));
    std::vector<double> x(space.size);
    for (const auto& row : space.rows) {
      std::vector<double> v = r == 0 ? std::vector<double>(row.length, 1.0 / row.length)
                                     : rng.simplex(row.length);
      std::copy(v.begin(), v.end(), x.begin() + row.offset);
    }
    detail::Candidate best;
    best.restart = r;
    for (double rho = options.penalty_start; rho <= options.penalty_max * 1.0000001;
         rho *= options.penalty_growth) {
      auto f = [&](const std::vector<double>& y) {
        ev.evaluate(y);
        return detail::surrogate(ev, y, rho, true);
      };
      detail::projected_descent(space, x, f, options.step, options.max_iters);
      for (double threshold : {1e-6, 1e-4, 1e-2}) {
        std::vector<double> y = x;
        const auto sup = detail::identify_support(space, y, threshold);
        detail::polish(ev, y, sup, true, options.polish_iters);
        detail::Candidate c;
        c.restart = r;
        c.x = y;
        ev.evaluate(y);
        ev.summarize(y, c.max_residual, c.zfpa);
        const Tolerances& t = problem.tol;
        const double bound = std::min({t.feasibility, t.complementarity, t.alignment});
        if (c.max_residual <= bound && c.zfpa <= t.alignment) {
          SignalingRule a;
          PolicyProfile p;
          space.unpack(y, a, p);
          std::vector<AgentTables> J, V;
          aligned_tables(game, a, p, J, V);
          c.certified = certify_candidate(problem, a, p, J, V).certified;
        }
        if (best.x.empty() || detail::better(c, best)) best = c;
        if (best.certified) break;
      }
      if (best.certified) break;
    }
    results[r] = std::move(best);
  };

  const std::size_t threads = std::min(resolve_threads(options.threads), restarts);
  if (threads <= 1) {
    for (std::size_t r = 0; r < restarts; ++r) run(r);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t)
      pool.emplace_back([&] {
        for (std::size_t r = next++; r < restarts; r = next++) run(r);
      });
    for (auto& th : pool) th.join();
  }

  std::size_t pick = 0;
  for (std::size_t r = 1; r < restarts; ++r)
    if (detail::better(results[r], results[pick])) pick = r;
  DesignSolution sol;
  space.unpack(results[pick].x, sol.alpha, sol.pi);
  aligned_tables(game, sol.alpha, sol.pi, sol.J, sol.V);
  sol.certificate = certify_candidate(problem, sol.alpha, sol.pi, sol.J, sol.V);
  sol.restart = results[pick].restart;
  return sol;
}

// -----------------------------------------------------------------------------
// Brute-force lattice oracle
// -----------------------------------------------------------------------------

/// Points of the simplex lattice {k / resolution} in dimension `dim`,
/// lexicographic in the counts.
inline std::vector<std::vector<double>> simplex_lattice(std::size_t dim,
                                                        std::size_t resolution) {
  std::vector<std::vector<double>> out;
  std::vector<std::size_t> counts(dim, 0);
  const double res = static_cast<double>(resolution);
  std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t k,
                                                          std::size_t left) {
    if (k + 1 == dim) {
      counts[k] = left;
      std::vector<double> p(dim);
      for (std::size_t t = 0; t < dim; ++t)
        p[t] = static_cast<double>(counts[t]) / res;
      out.push_back(std::move(p));
      return;
    }
    for (std::size_t c = 0; c <= left; ++c) {
      counts[k] = c;
      rec(k + 1, left - c);
    }
  };
  if (dim == 0) return out;
  rec(0, resolution);
  return out;
}

struct OracleResult {
  DesignSolution best;
  double max_residual = 0.0;
  double zfpa = 0.0;
  std::uint64_t enumerated = 0;
};

/// Number of lattice candidates for a problem at a resolution (saturating).
inline std::uint64_t oracle_size(const Dims& d, std::size_t resolution) {
  const DesignSpace space(d);
  std::uint64_t total = 1;
  for (const auto& r : space.rows) {
    // C(resolution + len - 1, len - 1)
    std::uint64_t c = 1;
    for (std::size_t k = 1; k < r.length; ++k) {
      c = checked_mul(c, resolution + k);
      c /= k;
    }
    total = checked_mul(total, c);
  }
  return total;
}

/**
 * Exhaustive search over alpha and pi rows on the simplex lattice of the given
 * resolution. Returns the first candidate in enumeration order minimizing
 * (max residual, ZFPA); values within 1e-12 count as ties.
 */
inline OracleResult brute_force_oracle(const DesignProblem& problem,
                                       std::size_t resolution,
                                       std::uint64_t cap = 10'000'000) {
  const AugmentedGame& game = problem.game;
  if (resolution < 1)
    throw Error(ErrorCode::kInvalidArgument, "resolution must be >= 1");
  const std::uint64_t size = oracle_size(game.dims, resolution);
  if (size > cap) {
    throw Error(ErrorCode::kCapExceeded,
                "oracle enumeration size " + std::to_string(size) +
                    " exceeds cap " + std::to_string(cap));
  }
  FastEvaluator ev(game, &problem.kappa, problem.admissibility);
  const DesignSpace& space = ev.space();
  std::vector<std::vector<std::vector<double>>> points;
  for (const auto& r : space.rows) points.push_back(simplex_lattice(r.length, resolution));
  std::vector<std::size_t> odo(space.rows.size(), 0);
  std::vector<double> x(space.size);
  for (std::size_t k = 0; k < space.rows.size(); ++k)
    std::copy(points[k][0].begin(), points[k][0].end(), x.begin() + space.rows[k].offset);
  OracleResult out;
  std::vector<double> best_x;
  double best_res = std::numeric_limits<double>::infinity();
  double best_z = std::numeric_limits<double>::infinity();
  constexpr double kTie = 1e-12;
  while (true) {
    ev.evaluate(x);
    double res = 0.0, z = 0.0;
    ev.summarize(x, res, z);
    ++out.enumerated;
    if (res < best_res - kTie ||
        (std::abs(res - best_res) <= kTie && z < best_z - kTie)) {
      best_res = res;
      best_z = z;
      best_x = x;
    }
    // Advance the odometer (last row fastest).
    std::size_t k = space.rows.size();
    while (k > 0) {
      --k;
      if (++odo[k] < points[k].size()) {
        std::copy(points[k][odo[k]].begin(), points[k][odo[k]].end(),
                  x.begin() + space.rows[k].offset);
        break;
      }
      odo[k] = 0;
      std::copy(points[k][0].begin(), points[k][0].end(),
                x.begin() + space.rows[k].offset);
      if (k == 0) {
        k = std::numeric_limits<std::size_t>::max();
        break;
      }
    }
    if (k == std::numeric_limits<std::size_t>::max()) break;
  }
  out.max_residual = best_res;
  out.zfpa = best_z;
  space.unpack(best_x, out.best.alpha, out.best.pi);
  aligned_tables(game, out.best.alpha, out.best.pi, out.best.J, out.best.V);
  out.best.certificate = certify_candidate(problem, out.best.alpha, out.best.pi,
                                           out.best.J, out.best.V);
  return out;
}

}  // namespace infodesign

#endif  // INFODESIGN_FPA_HPP_
