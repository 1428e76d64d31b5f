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

#include <gtest/gtest.h>

#include <functional>

#include "infodesign/equilibrium.hpp"
#include "support/instances.hpp"
#include "support/oracles.hpp"

namespace infodesign {
namespace {

using RewardFn = std::function<double(std::size_t i, std::size_t a, std::size_t g,
                                      std::size_t w)>;

// Game with uniform initial, exogenous and transition rows (so actions do not
// move the state) and rewards from `r`.
AugmentedGame make_game(const Dims& d, const RewardFn& r) {
  const Layout lay(d);
  AugmentedGame g;
  g.dims = d;
  g.discount = 0.9;
  g.initial.assign(d.states, 1.0 / d.states);
  g.type_prior.assign(lay.nT(), 1.0 / lay.nT());
  g.transition.assign(d.states * lay.nA() * d.states, 1.0 / d.states);
  g.exogenous.assign(lay.nE(), 1.0 / lay.nE());
  g.rewards.assign(d.agents, std::vector<double>(lay.nA() * d.states * d.signals * d.types));
  for (std::size_t i = 0; i < d.agents; ++i)
    for (std::size_t a = 0; a < lay.nA(); ++a)
      for (std::size_t s = 0; s < d.states; ++s)
        for (std::size_t w = 0; w < d.signals; ++w)
          for (std::size_t th = 0; th < d.types; ++th)
            g.rewards[i][lay.reward_index(a, s, w, th)] = r(i, a, s, w);
  return g;
}

PolicyProfile deterministic_policy(const AugmentedGame& g,
                                   const std::function<std::size_t(std::size_t, std::size_t,
                                                                   std::size_t)>& choose) {
  const Dims& d = g.dims;
  const Layout lay(d);
  PolicyProfile p;
  p.probs.assign(d.agents, std::vector<double>(d.states * d.signals * d.types * d.actions, 0.0));
  for (std::size_t i = 0; i < d.agents; ++i)
    for (std::size_t s = 0; s < d.states; ++s)
      for (std::size_t w = 0; w < d.signals; ++w)
        for (std::size_t th = 0; th < d.types; ++th)
          p.probs[i][lay.policy_row(s, w, th) + choose(i, s, w)] = 1.0;
  return p;
}

// -----------------------------------------------------------------------------
// MCE
// -----------------------------------------------------------------------------

TEST(CheckMceTest, UniformPolicyFailsAtDominatedAction) {
  const AugmentedGame g = make_game(Dims{1, 2, 2, 1, 1, 2},
                                    [](auto, auto a, auto, auto) { return a == 0 ? 1.0 : 0.0; });
  const CanonicalGame c = canonical_projection(g, 0, 0);
  JointPolicy pi;
  pi.probs.assign(4, 0.5);
  const auto rep = check_mce(c, pi);
  EXPECT_FALSE(rep.pass);
  // Transitions ignore actions, so the gap is exactly the reward difference.
  EXPECT_NEAR(rep.violation, 1.0, 1e-12);
  EXPECT_NE(rep.witness.find("joint_action=1 deviation=0"), std::string::npos);
}

TEST(CheckMceTest, GreedySingleAgentAndConstantRewardsPass) {
  const AugmentedGame g = random_game(3, Dims{1, 3, 3, 1, 1, 2});
  const CanonicalGame c = canonical_projection(g, 0, 0);
  // Policy iteration to the optimal deterministic policy.
  std::vector<std::size_t> act(3, 0);
  JointPolicy pi;
  for (int round = 0; round < 50; ++round) {
    pi.probs.assign(9, 0.0);
    for (std::size_t s = 0; s < 3; ++s) pi.probs[s * 3 + act[s]] = 1.0;
    bool changed = false;
    for (std::size_t s = 0; s < 3; ++s)
      for (std::size_t a = 0; a < 3; ++a)
        if (interim_payoff(c, pi, s, a, 0) > interim_payoff(c, pi, s, act[s], 0) + 1e-12) {
          act[s] = a;
          changed = true;
        }
    if (!changed) break;
  }
  EXPECT_TRUE(check_mce(c, pi).pass);

  AugmentedGame flat = random_game(4, Dims{2, 2, 2, 1, 1, 2});
  for (auto& r : flat.rewards) std::fill(r.begin(), r.end(), 0.7);
  JointPolicy any;
  Rng rng(4);
  for (std::size_t s = 0; s < 2; ++s) {
    const auto row = rng.simplex(4);
    any.probs.insert(any.probs.end(), row.begin(), row.end());
  }
  EXPECT_TRUE(check_mce(canonical_projection(flat, 0, 0), any).pass);
}

// -----------------------------------------------------------------------------
// One-shot deviations
// -----------------------------------------------------------------------------

// Deterministic single-agent policy made greedy (sign = +1) or anti-greedy
// (sign = -1) with respect to its own Q.
PolicyProfile self_consistent(const AugmentedGame& g, double sign) {
  const Layout lay = g.layout();
  const std::size_t G = g.dims.states, A = g.dims.actions;
  std::vector<std::size_t> act(G, 0);
  PolicyProfile pi;
  for (int round = 0; round < 100; ++round) {
    pi = deterministic_policy(g, [&](auto, auto s, auto) { return act[s]; });
    const ValueBundle vb =
        evaluate_values(g, uniform_signaling(g), SelectionProfile::obedient(g.dims), pi, 0);
    bool changed = false;
    for (std::size_t s = 0; s < G; ++s)
      for (std::size_t a = 0; a < A; ++a)
        if (sign * vb.Q[0][(a * G + s)] > sign * vb.Q[0][(act[s] * G + s)] + 1e-12) {
          act[s] = a;
          changed = true;
        }
    if (!changed) break;
  }
  (void)lay;
  return pi;
}

TEST(CheckOneShotTest, AntiGreedyGapIsQSpread) {
  const AugmentedGame g = random_game(5, Dims{1, 3, 3, 1, 1, 2});
  const PolicyProfile pi = self_consistent(g, -1.0);
  const SignalingRule alpha = uniform_signaling(g);
  const auto beta = SelectionProfile::obedient(g.dims);
  const ValueBundle vb = evaluate_values(g, alpha, beta, pi, 0);
  double spread = 0.0;
  for (std::size_t s = 0; s < 3; ++s) {
    double hi = -1e300, lo = 1e300;
    for (std::size_t a = 0; a < 3; ++a) {
      hi = std::max(hi, vb.Q[0][a * 3 + s]);
      lo = std::min(lo, vb.Q[0][a * 3 + s]);
    }
    spread = std::max(spread, hi - lo);
  }
  const auto rep = check_one_shot(g, alpha, beta, pi);
  EXPECT_FALSE(rep.pass);
  EXPECT_GT(spread, 0.0);
  EXPECT_NEAR(rep.find("one_shot_policy")->violation, spread, 1e-12);
  EXPECT_NE(rep.witness.find("one_shot_policy: agent=0"), std::string::npos);
  // A single signal makes selection vacuous.
  EXPECT_EQ(rep.find("one_shot_selection")->violation, 0.0);
}

TEST(CheckOneShotTest, GreedySingleAgentPasses) {
  const AugmentedGame g = random_game(6, Dims{1, 3, 3, 1, 1, 2});
  const PolicyProfile pi = self_consistent(g, 1.0);
  EXPECT_TRUE(check_one_shot(g, uniform_signaling(g), SelectionProfile::obedient(g.dims), pi).pass);
}

TEST(CheckOneShotTest, PassingProfilesHaveNoTwoPeriodGain) {
  std::size_t checked = 0;
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    const auto im = testing::improvement_dynamics(500 + seed);
    if (!im.converged) continue;
    if (!check_one_shot(im.game, im.alpha, im.beta, im.pi).pass) continue;
    ++checked;
    for (std::size_t i = 0; i < 2; ++i)
      for (auto f : {testing::DeviationFamily::kSelection, testing::DeviationFamily::kPolicy})
        EXPECT_LE(testing::two_period_improvement(im.game, im.alpha, im.beta, im.pi, i, 0, f),
                  1e-10);
  }
  EXPECT_GE(checked, 3u);
}

TEST(CheckOneShotTest, SelectionGainIsAFloorForTheDeviationOracle) {
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const AugmentedGame g = random_game(seed, Dims{2, 2, 2, 2, 1, 2});
    Rng rng(seed);
    const auto alpha = random_signaling(rng, g);
    const auto beta = random_selection(rng, g);
    const auto pi = random_policy(rng, g);
    const auto rep = check_one_shot(g, alpha, beta, pi);
    double oracle = 0.0;
    for (std::size_t i = 0; i < 2; ++i)
      oracle = std::max(oracle, testing::two_period_improvement(
                                    g, alpha, beta, pi, i, 0,
                                    testing::DeviationFamily::kSelection));
    EXPECT_GE(oracle + 1e-12, rep.find("one_shot_selection")->violation);
    EXPECT_GT(oracle, 0.0);
  }
}

// -----------------------------------------------------------------------------
// Obedience
// -----------------------------------------------------------------------------

// Two agents coordinate (payoff 2) and earn `bonus` for holding signal 1.
AugmentedGame coordination_with_bonus(double bonus) {
  const Dims d{2, 1, 2, 2, 1, 2};
  const Layout lay(d);
  return make_game(d, [&](std::size_t, std::size_t a, std::size_t, std::size_t w) {
    const bool match = lay.joint_actions.digit(a, 0) == lay.joint_actions.digit(a, 1);
    return (match ? 2.0 : 0.0) + (w == 1 ? bonus : 0.0);
  });
}

TEST(CheckObedienceTest, RevealingSignalPassesNoiseFails) {
  const AugmentedGame g = coordination_with_bonus(0.5);
  const PolicyProfile pi = deterministic_policy(g, [](auto, auto, auto w) { return w; });
  SignalingRule revealing;
  revealing.table = {0.5, 0.0, 0.0, 0.5};
  const auto pass = check_obedience(g, revealing, pi, ObedienceMode::kBayesian);
  EXPECT_TRUE(pass.pass) << pass.witness;
  EXPECT_LE(pass.violation, 0.0);

  // The principal's signal is now as uninformative as the exogenous slot.
  SignalingRule noise;
  noise.table = {0.25, 0.25, 0.25, 0.25};
  const auto fail = check_obedience(g, noise, pi, ObedienceMode::kBayesian);
  EXPECT_FALSE(fail.pass);
  EXPECT_NEAR(fail.violation, 0.5, 1e-12);
}

TEST(CheckObedienceTest, DominantModeIsStricterAndCapped) {
  const AugmentedGame g = coordination_with_bonus(0.5);
  const PolicyProfile pi = deterministic_policy(g, [](auto, auto, auto w) { return w; });
  SignalingRule revealing;
  revealing.table = {0.5, 0.0, 0.0, 0.5};
  EXPECT_TRUE(check_obedience(g, revealing, pi, ObedienceMode::kBayesian).pass);
  const auto ds = check_obedience(g, revealing, pi, ObedienceMode::kDominant);
  EXPECT_FALSE(ds.pass);
  EXPECT_NE(ds.witness.find("opponent_profile="), std::string::npos);
  EXPECT_THROW(check_obedience(g, revealing, pi, ObedienceMode::kDominant, 1e-8, 4), Error);
}

TEST(CheckObedienceTest, SignalFreeRewardsPass) {
  const AugmentedGame g = make_game(Dims{2, 2, 2, 3, 1, 2},
                                    [](auto i, auto a, auto s, auto) { return 0.1 * (i + a + s); });
  Rng rng(9);
  const auto pi = deterministic_policy(g, [](auto, auto s, auto) { return s % 2; });
  EXPECT_TRUE(check_obedience(g, random_signaling(rng, g), pi, ObedienceMode::kBayesian).pass);
}

// -----------------------------------------------------------------------------
// Admissibility, Nash goal, OIL
// -----------------------------------------------------------------------------

TEST(CheckAdmissibilityTest, PushforwardPassesStrongAndWeak) {
  const AugmentedGame g = random_game(10, Dims{2, 2, 2, 2, 2, 2});
  Rng rng(10);
  const auto alpha = random_signaling(rng, g);
  const auto beta = random_selection(rng, g);
  const auto pi = random_policy(rng, g);
  const Goal k = pushforward_goal(g, alpha, beta, pi);
  const auto strong = check_admissibility(g, alpha, beta, pi, k, AdmissibilityMode::kStrong);
  EXPECT_TRUE(strong.pass);
  EXPECT_EQ(strong.violation, 0.0);
  EXPECT_TRUE(check_admissibility(g, alpha, beta, pi, k, AdmissibilityMode::kWeak).pass);
}

TEST(CheckAdmissibilityTest, IndifferentPairWeakPassStrongFail) {
  const AugmentedGame g =
      make_game(Dims{1, 2, 2, 2, 1, 2}, [](auto, auto, auto s, auto w) { return 0.3 * s + 0.2 * w; });
  const auto pi = deterministic_policy(g, [](auto, auto, auto) { return 1; });
  Goal k;
  k.table = {1.0, 0.0, 1.0, 0.0};
  const auto alpha = uniform_signaling(g);
  const auto beta = SelectionProfile::obedient(g.dims);
  const auto strong = check_admissibility(g, alpha, beta, pi, k, AdmissibilityMode::kStrong);
  EXPECT_FALSE(strong.pass);
  EXPECT_EQ(strong.violation, 1.0);
  EXPECT_TRUE(check_admissibility(g, alpha, beta, pi, k, AdmissibilityMode::kWeak).pass);
}

TEST(CheckNashGoalTest, DominatedGoalFailsArgmaxPasses) {
  const auto [game, dominated] = testing::dominated_goal_instance(11, 2);
  Rng rng(11);
  const auto alpha = random_signaling(rng, game);
  const auto rep = check_nash_goal(game, alpha, dominated);
  EXPECT_FALSE(rep.pass);
  EXPECT_NE(rep.witness.find("deviation=0"), std::string::npos);

  const auto micro = testing::micro_instance(12, 2);
  EXPECT_TRUE(check_nash_goal(micro.game, uniform_signaling(micro.game), micro.kappa).pass);

  AugmentedGame flat = random_game(13, Dims{2, 2, 2, 2, 1, 2});
  for (auto& r : flat.rewards) std::fill(r.begin(), r.end(), 1.0);
  EXPECT_TRUE(check_nash_goal(flat, alpha, dominated).pass);
}

TEST(CheckOilTest, PlantedPassesAndObedienceFailureIsNamed) {
  const auto p = testing::planted_coordination(14, 2);
  EXPECT_TRUE(check_oil(p.game, p.alpha, p.pi, p.kappa, ObedienceMode::kBayesian,
                        AdmissibilityMode::kWeak)
                  .pass);
  const AugmentedGame g = coordination_with_bonus(0.5);
  const PolicyProfile pi = deterministic_policy(g, [](auto, auto, auto w) { return w; });
  SignalingRule revealing;
  revealing.table = {0.5, 0.0, 0.0, 0.5};
  const Goal k = pushforward_goal(g, revealing, SelectionProfile::obedient(g.dims), pi);
  const auto rep = check_oil(g, revealing, pi, k, ObedienceMode::kDominant,
                             AdmissibilityMode::kStrong);
  EXPECT_FALSE(rep.pass);
  EXPECT_EQ(rep.witness.rfind("obedience_dominant: ", 0), 0u) << rep.witness;
  EXPECT_TRUE(rep.find("one_shot")->pass);
  EXPECT_TRUE(rep.find("admissibility_strong")->pass);
}

// -----------------------------------------------------------------------------
// Direct transformation
// -----------------------------------------------------------------------------

TEST(ConstructDirectTest, PreservesActionDistribution) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const AugmentedGame g = random_game(seed, Dims{2, 3, 2, 2, 2, 3});
    Rng rng(seed);
    const auto alpha = random_signaling(rng, g);
    const auto beta = random_selection(rng, g);
    const auto pi = random_policy(rng, g);
    const DirectDesign dd = construct_direct(g, alpha, beta, pi);
    EXPECT_TRUE(validate_signaling(g, dd.alpha).ok());
    const auto obedient = SelectionProfile::obedient(g.dims);
    EXPECT_LE(max_total_variation(g, pushforward_goal(g, alpha, beta, pi),
                                  pushforward_goal(g, dd.alpha, obedient, dd.pi)),
              1e-12);
  }
}

TEST(ConstructDirectTest, IdentityAndConstantSelection) {
  const AugmentedGame g = random_game(20, Dims{2, 2, 2, 2, 1, 2});
  Rng rng(20);
  const auto alpha = random_signaling(rng, g);
  const auto pi = random_policy(rng, g);
  auto beta = SelectionProfile::obedient(g.dims);
  EXPECT_EQ(construct_direct(g, alpha, beta, pi).alpha.table, alpha.table);
  for (auto& p : beta.positions) std::fill(p.begin(), p.end(), 1);
  const auto dd = construct_direct(g, alpha, beta, pi);
  for (std::size_t s = 0; s < 2; ++s)
    for (std::size_t w = 0; w < 4; ++w)
      EXPECT_NEAR(dd.alpha.table[s * 4 + w], g.exogenous[w / 2] * g.exogenous[w % 2], 1e-15);
}

}  // namespace
}  // namespace infodesign
