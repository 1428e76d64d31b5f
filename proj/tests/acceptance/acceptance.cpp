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

// Acceptance suite. Prints one PASS/FAIL line per criterion followed by the
// measured quantities, and exits nonzero if any criterion fails.

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "infodesign/infodesign.hpp"
#include "support/instances.hpp"
#include "support/oracles.hpp"

namespace infodesign {
namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string num(double v) {
  std::ostringstream os;
  os.precision(3);
  os << v;
  return os.str();
}

// 1. Bellman recursions on 100 random games.
Outcome bellman() {
  const Dims d{2, 3, 2, 2, 1, 2};
  double worst = 0.0;
  for (std::uint64_t s = 0; s < 100; ++s) {
    const AugmentedGame g = random_game(s, d);
    Rng rng(derive_seed(s, 1));
    const auto alpha = random_signaling(rng, g);
    const auto beta = random_selection(rng, g);
    const auto pi = random_policy(rng, g);
    const ValueBundle vb = evaluate_values(g, alpha, beta, pi, 0);
    worst = std::max(worst, bellman_residuals(g, alpha, beta, pi, 0, vb).max());
  }
  return {worst <= 1e-10, "max residual " + num(worst)};
}

// 2. Exact J against Monte Carlo rollouts.
Outcome monte_carlo() {
  const Dims d{2, 3, 2, 2, 1, 2};
  std::size_t agree = 0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    const AugmentedGame g = random_game(200 + s, d);
    Rng rng(derive_seed(s, 2));
    const auto alpha = random_signaling(rng, g);
    const auto beta = random_selection(rng, g);
    const auto pi = random_policy(rng, g);
    const double rmax = g.max_abs_reward(), gamma = g.discount;
    std::size_t H = 1;
    while (std::pow(gamma, H) * rmax / (1.0 - gamma) > 1e-3) ++H;
    const double trunc = std::pow(gamma, H) * rmax / (1.0 - gamma);
    const ValueBundle vb = evaluate_values(g, alpha, beta, pi, 0);
    const RolloutEstimate est = simulate_rollouts(g, alpha, beta, pi, 0, H, 100000, s);
    bool ok = true;
    for (std::size_t i = 0; i < d.agents; ++i)
      for (std::size_t g0 = 0; g0 < d.states; ++g0)
        ok = ok && std::abs(est.mean[i][g0] - vb.J[i][g0]) <= 3 * est.se[i][g0] + trunc;
    agree += ok;
  }
  return {agree >= 19, std::to_string(agree) + "/20 games within 3 SE + truncation"};
}

// 3. Profiles passing the one-shot check admit no two-period improvement.
Outcome one_shot() {
  std::size_t found = 0;
  double worst = -1e300;
  for (std::uint64_t s = 0; s < 400 && found < 20; ++s) {
    const auto im = testing::improvement_dynamics(1000 + s);
    if (!im.converged || !check_one_shot(im.game, im.alpha, im.beta, im.pi, 1e-8).pass)
      continue;
    ++found;
    for (std::size_t i = 0; i < 2; ++i)
      for (auto f : {testing::DeviationFamily::kSelection, testing::DeviationFamily::kPolicy})
        worst = std::max(worst, testing::two_period_improvement(im.game, im.alpha, im.beta,
                                                                im.pi, i, 0, f));
  }
  return {found == 20 && worst <= 1e-7,
          std::to_string(found) + " passing profiles, max two-period gain " + num(worst)};
}

// 4. Direct transformation keeps the action distribution; obedience logged.
Outcome direct() {
  std::ofstream csv("obedience_direct.csv");
  csv << "trial,seed,max_tv,obedience_pass,obedience_violation,witness\n";
  double worst = 0.0;
  std::size_t obedient_count = 0;
  for (std::uint64_t s = 0; s < 50; ++s) {
    const Dims d{2, 2, 2, 2, 1 + s % 2, 2};
    const AugmentedGame g = random_game(300 + s, d);
    Rng rng(derive_seed(s, 4));
    const auto alpha = random_signaling(rng, g);
    const auto beta = random_selection(rng, g);
    const auto pi = random_policy(rng, g);
    const DirectDesign dd = construct_direct(g, alpha, beta, pi);
    const double tv =
        max_total_variation(g, pushforward_goal(g, alpha, beta, pi),
                            pushforward_goal(g, dd.alpha, SelectionProfile::obedient(d), dd.pi));
    worst = std::max(worst, tv);
    const auto ob = check_obedience(g, dd.alpha, dd.pi, ObedienceMode::kBayesian);
    obedient_count += ob.pass;
    csv << s << "," << 300 + s << "," << tv << "," << (ob.pass ? "true" : "false") << ","
        << ob.violation << "," << Report::csv_field(ob.witness) << "\n";
  }
  return {worst <= 1e-12, "max TV " + num(worst) + "; direct designs obedient " +
                              std::to_string(obedient_count) +
                              "/50 (obedience_direct.csv)"};
}

struct CertifiedRun {
  AugmentedGame game;
  DesignSolution sol;
};

// 5. Solver soundness and recovery on planted instances.
Outcome soundness(std::vector<CertifiedRun>& certified) {
  std::size_t sound = 0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto p = testing::planted_coordination(500 + s, 2 + s % 2);
    DesignProblem problem{p.game, p.kappa, AdmissibilityMode::kWeak, {}};
    SolverOptions opt;
    opt.restarts = 16;
    opt.seed = s;
    DesignSolution sol = solve_fpalign(problem, opt);
    if (!sol.certificate.certified) continue;
    sound += check_oil(p.game, sol.alpha, sol.pi, p.kappa, ObedienceMode::kBayesian,
                       AdmissibilityMode::kWeak, 1e-6)
                 .pass;
    certified.push_back({p.game, std::move(sol)});
  }
  const std::size_t n = certified.size();
  return {n >= 16 && sound == n, "recovered " + std::to_string(n) + "/20, sound " +
                                     std::to_string(sound) + "/" + std::to_string(n)};
}

// 6. Solver against the resolution-10 lattice oracle on micro instances.
Outcome oracle() {
  constexpr double eps = 1e-7;
  std::size_t agree = 0;
  double worst_dist = 0.0;
  const std::array<std::size_t, 5> states{1, 1, 2, 2, 2};
  for (std::size_t k = 0; k < states.size(); ++k) {
    const auto m = testing::micro_instance(600 + k, states[k]);
    DesignProblem problem{m.game, m.kappa, AdmissibilityMode::kWeak, {}};
    const OracleResult orc = brute_force_oracle(problem, 10);
    SolverOptions opt;
    opt.seed = k;
    const DesignSolution sol = solve_fpalign(problem, opt);
    const Layout lay = m.game.layout();
    double dist = 0.0;
    for (std::size_t n = 0; n < sol.alpha.table.size(); ++n)
      dist = std::max(dist, std::abs(sol.alpha.table[n] - orc.best.alpha.table[n]));
    for (std::size_t g = 0; g < m.game.dims.states; ++g)
      for (std::size_t w = 0; w < m.game.dims.signals; ++w) {
        const std::size_t a = lay.signaling_row(g, 0) + w;
        if (sol.alpha.table[a] == 0.0 && orc.best.alpha.table[a] == 0.0) continue;
        for (std::size_t x = 0; x < m.game.dims.actions; ++x) {
          const std::size_t r = lay.policy_row(g, w, 0) + x;
          dist = std::max(dist, std::abs(sol.pi.probs[0][r] - orc.best.pi.probs[0][r]));
        }
      }
    worst_dist = std::max(worst_dist, dist);
    const bool ok = sol.certificate.certified && dist <= 0.1 &&
                    sol.certificate.max_residual() <= orc.max_residual + eps &&
                    sol.certificate.ZFPA <= orc.zfpa + eps;
    agree += ok;
  }
  return {agree == states.size(), std::to_string(agree) + "/5 instances agree, max sup distance " +
                                      num(worst_dist)};
}

// 7. Strong admissibility implies weak on exact pushforwards.
Outcome admissibility() {
  std::size_t strong = 0, weak = 0, counter = 0;
  for (std::uint64_t s = 0; s < 100; ++s) {
    const Dims d{2, 2, 2, 2, 1 + s % 2, 2};
    const AugmentedGame g = random_game(700 + s, d);
    Rng rng(derive_seed(s, 7));
    const auto alpha = random_signaling(rng, g);
    const auto beta = random_selection(rng, g);
    const auto pi = random_policy(rng, g);
    const Goal k = pushforward_goal(g, alpha, beta, pi);
    const bool st =
        check_admissibility(g, alpha, beta, pi, k, AdmissibilityMode::kStrong).pass;
    const bool wk = check_admissibility(g, alpha, beta, pi, k, AdmissibilityMode::kWeak).pass;
    strong += st;
    weak += wk;
    counter += st && !wk;
  }
  return {strong == 100 && weak == 100 && counter == 0,
          "strong " + std::to_string(strong) + "/100, weak " + std::to_string(weak) +
              "/100, counterexamples " + std::to_string(counter)};
}

// 8. Complementarity residuals vanish on certified solutions and detect
//    injected misalignment p * gap = 1e-4 at supported indices.
Outcome complementarity(const std::vector<CertifiedRun>& certified) {
  if (certified.empty()) return {false, "no certified solutions"};
  double worst = 0.0;
  for (const auto& c : certified)
    worst = std::max({worst, c.sol.certificate.fpm.FPM1.value, c.sol.certificate.fpm.FPM2.value});
  constexpr double delta = 1e-4;
  std::size_t detected = 0;
  Rng rng(8);
  for (std::size_t t = 0; t < 100; ++t) {
    const CertifiedRun& c = certified[t % certified.size()];
    const AugmentedGame& g = c.game;
    const Layout lay = g.layout();
    AgentTables J = c.sol.J[0], V = c.sol.V[0];
    const std::size_t i = rng.below(g.dims.agents), s = rng.below(g.dims.states);
    if (t % 2 == 0) {
      const auto marg = signal_marginal(g, c.sol.alpha, s, 0, i);
      std::vector<std::size_t> sup;
      for (std::size_t w = 0; w < marg.size(); ++w)
        if (marg[w] > 0.0) sup.push_back(w);
      J[i][s] += delta / marg[sup[rng.below(sup.size())]];
    } else {
      std::vector<std::pair<std::size_t, std::size_t>> sup;
      for (std::size_t w = 0; w < lay.nW(); ++w) {
        if (c.sol.alpha.table[lay.signaling_row(s, 0) + w] <= 0.0) continue;
        const std::size_t wi = lay.joint_signals.digit(w, i);
        for (std::size_t a = 0; a < g.dims.actions; ++a)
          if (c.sol.pi.probs[i][lay.policy_row(s, wi, 0) + a] > 0.0) sup.emplace_back(w, a);
      }
      const auto [w, a] = sup[rng.below(sup.size())];
      const double p = c.sol.pi.probs[i][lay.policy_row(s, lay.joint_signals.digit(w, i), 0) + a];
      V[i][s * lay.nW() + w] += delta / p;
    }
    const FpmResiduals r = fpm_residuals(g, c.sol.alpha, c.sol.pi, J, V, 0);
    detected += std::max(r.FPM1.value, r.FPM2.value) >= 5e-5;
  }
  return {worst <= 1e-6 && detected == 100,
          "max certified FPM " + num(worst) + ", injected detected " +
              std::to_string(detected) + "/100"};
}

// 9. Goals on strictly dominated actions are never certified.
Outcome nash_goal() {
  std::size_t certified = 0;
  for (std::uint64_t s = 0; s < 10; ++s) {
    const auto [g, k] = testing::dominated_goal_instance(900 + s, 2 + s % 2);
    SolverOptions opt;
    opt.seed = s;
    certified += solve_fpalign(DesignProblem{g, k, AdmissibilityMode::kWeak, {}}, opt)
                     .certificate.certified;
  }
  return {certified == 0, std::to_string(certified) + "/10 certified"};
}

// 10. Repeated CLI design runs give byte-identical reports.
Outcome determinism() {
  const std::string inst = std::string(INFODESIGN_SOURCE_DIR) + "/instances/";
  const std::string cmd = std::string("\"") + INFODESIGN_CLI_PATH + "\" design \"" + inst +
                          "coordination.toml\" --goal \"" + inst +
                          "coordination_goal.toml\" --seed 7";
  std::vector<std::string> outs;
  for (int r = 0; r < 10; ++r) {
    FILE* f = popen(cmd.c_str(), "r");
    if (f == nullptr) return {false, "cannot run " + cmd};
    std::string out;
    std::array<char, 4096> buf;
    std::size_t n;
    while ((n = std::fread(buf.data(), 1, buf.size(), f)) > 0) out.append(buf.data(), n);
    pclose(f);
    outs.push_back(out);
  }
  std::size_t same = 0;
  for (const auto& o : outs) same += !o.empty() && o == outs[0];
  return {same == 10, std::to_string(same) + "/10 identical"};
}

}  // namespace
}  // namespace infodesign

int main() {
  using namespace infodesign;
  std::vector<CertifiedRun> certified;
  int failures = 0;
  auto report = [&](int id, const char* name, const std::function<Outcome()>& f) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = f();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failures += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << id << " " << name << ": "
              << o.detail << " (" << num(secs) << " s)" << std::endl;
  };
  report(1, "bellman_residuals", bellman);
  report(2, "monte_carlo", monte_carlo);
  report(3, "one_shot_deviation", one_shot);
  report(4, "direct_transformation", direct);
  report(5, "solver_soundness", [&] { return soundness(certified); });
  report(6, "oracle_agreement", oracle);
  report(7, "strong_implies_weak", admissibility);
  report(8, "complementarity", [&] { return complementarity(certified); });
  report(9, "nash_goal_necessity", nash_goal);
  report(10, "determinism", determinism);
  return failures == 0 ? 0 : 1;
}
