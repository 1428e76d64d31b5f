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

// Principal objective and optimal goal design under alignment constraints.

#ifndef INFODESIGN_GOAL_DESIGN_HPP_
#define INFODESIGN_GOAL_DESIGN_HPP_

#include <Eigen/Dense>

#include <vector>

#include "infodesign/dynamics.hpp"
#include "infodesign/fpa.hpp"
#include "infodesign/game.hpp"

namespace infodesign {

namespace detail {

/// Discounted principal value from an action distribution rho[g * nA + a].
inline double principal_value_from_rho(const AugmentedGame& game,
                                       const std::vector<double>& rho,
                                       const PrincipalPayoff& u,
                                       std::size_t jt) {
  const Layout lay = game.layout();
  const std::size_t G = game.dims.states;
  Eigen::MatrixXd M = Eigen::MatrixXd::Identity(G, G);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(G);
  for (std::size_t g = 0; g < G; ++g)
    for (std::size_t a = 0; a < lay.nA(); ++a) {
      const double p = rho[g * lay.nA() + a];
      if (p == 0.0) continue;
      rhs(g) += p * u.table[lay.goal_row(g, jt) + a];
      const double* t = game.transition.data() + lay.transition_row(g, a);
      for (std::size_t h = 0; h < G; ++h) M(g, h) -= game.discount * p * t[h];
    }
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(M);
  Eigen::VectorXd v = lu.solve(rhs);
  v += lu.solve(rhs - M * v);
  double total = 0.0;
  for (std::size_t g = 0; g < G; ++g) total += game.initial[g] * v(g);
  return total;
}

}  // namespace detail

/// C^O(alpha, beta, pi): expected discounted principal payoff of a strategy.
inline double principal_value_direct(const AugmentedGame& game,
                              const SignalingRule& alpha,
                              const SelectionProfile& beta,
                              const PolicyProfile& pi,
                              const PrincipalPayoff& u) {
  require(validate_principal(game, u), ErrorCode::kShapeMismatch);
  const Layout lay = game.layout();
  double total = 0.0;
  for (std::size_t jt = 0; jt < lay.nT(); ++jt) {
    if (game.type_prior[jt] == 0.0) continue;
    std::vector<double> rho;
    for (std::size_t g = 0; g < game.dims.states; ++g) {
      const auto r = action_pushforward(game, alpha, beta, pi, g, jt);
      rho.insert(rho.end(), r.begin(), r.end());
    }
    total += game.type_prior[jt] *
             detail::principal_value_from_rho(game, rho, u, jt);
  }
  return total;
}

/// C(kappa): expected discounted principal payoff when the goal table is
/// played as the action distribution.
inline double principal_value(const AugmentedGame& game,
                                     const Goal& kappa,
                                     const PrincipalPayoff& u) {
  require(validate_principal(game, u), ErrorCode::kShapeMismatch);
  const Layout lay = game.layout();
  double total = 0.0;
  for (std::size_t jt = 0; jt < lay.nT(); ++jt) {
    if (game.type_prior[jt] == 0.0) continue;
    std::vector<double> rho;
    for (std::size_t g = 0; g < game.dims.states; ++g) {
      const double* k = kappa.table.data() + lay.goal_row(g, jt);
      rho.insert(rho.end(), k, k + lay.nA());
    }
    total += game.type_prior[jt] *
             detail::principal_value_from_rho(game, rho, u, jt);
  }
  return total;
}

struct OptimalDesign {
  DesignSolution solution;
  Goal kappa;    // pushforward of the returned (alpha, pi)
  double value = 0.0;
};

/**
 * Maximizes C^O over (alpha, pi) subject to the alignment constraints without
 * a fixed goal. The certificate uses the solution's own pushforward as goal.
 */
inline OptimalDesign solve_optimal_design(const AugmentedGame& game,
                                          const PrincipalPayoff& u,
                                          const SolverOptions& options = {},
                                          const Tolerances& tol = {}) {
  require(validate_game(game), ErrorCode::kInvalidArgument);
  require(validate_principal(game, u), ErrorCode::kShapeMismatch);
  require_within_cap(game.dims, kDefaultCellCap);
  const DesignSpace space(game.dims);
  const Layout& lay = space.lay;
  const std::size_t restarts = std::max<std::size_t>(1, options.restarts);
  const SelectionProfile obedient = SelectionProfile::obedient(game.dims);

  struct Result {
    std::vector<double> x;
    bool certified = false;
    double value = -std::numeric_limits<double>::infinity();
  };
  std::vector<Result> results(restarts);

  auto value_of = [&](const FastEvaluator& ev) {
    double total = 0.0;
    for (std::size_t jt = 0; jt < lay.nT(); ++jt)
      if (game.type_prior[jt] != 0.0)
        total += game.type_prior[jt] * detail::principal_value_from_rho(
                                           game, ev.block(jt).rho, u, jt);
    return total;
  };
  auto certify = [&](const std::vector<double>& x, Result& out) {
    SignalingRule a;
    PolicyProfile p;
    space.unpack(x, a, p);
    DesignProblem problem{game, pushforward_goal(game, a, obedient, p),
                          AdmissibilityMode::kWeak, tol};
    std::vector<AgentTables> J, V;
    aligned_tables(game, a, p, J, V);
    out.certified = certify_candidate(problem, a, p, J, V).certified;
  };

  auto run = [&](std::size_t r) {
    FastEvaluator ev(game, nullptr, AdmissibilityMode::kWeak);
    Rng rng(derive_seed(options.seed, r));
    std::vector<double> x(space.size);
    for (const auto& row : space.rows) {
      std::vector<double> v = r == 0 ? std::vector<double>(row.length, 1.0 / row.length)
                                     : rng.simplex(row.length);
      std::copy(v.begin(), v.end(), x.begin() + row.offset);
    }
    Result best;
    for (double rho = options.penalty_start; rho <= options.penalty_max * 1.0000001;
         rho *= options.penalty_growth) {
      auto f = [&](const std::vector<double>& y) {
        ev.evaluate(y);
        return -value_of(ev) + rho * detail::surrogate(ev, y, 1.0, false);
      };
      detail::projected_descent(space, x, f, options.step, options.max_iters,
                                -std::numeric_limits<double>::infinity());
      for (double threshold : {1e-6, 1e-4, 1e-2}) {
        std::vector<double> y = x;
        const auto sup = detail::identify_support(space, y, threshold);
        detail::polish(ev, y, sup, false, options.polish_iters);
        Result c;
        c.x = y;
        ev.evaluate(y);
        c.value = value_of(ev);
        certify(y, c);
        const bool take =
            best.x.empty() || (c.certified && !best.certified) ||
            (c.certified == best.certified && c.value > best.value + 1e-12);
        if (take) best = c;
      }
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
  for (std::size_t r = 1; r < restarts; ++r) {
    const Result& a = results[r];
    const Result& b = results[pick];
    if (a.certified != b.certified) {
      if (a.certified) pick = r;
      continue;
    }
    if (a.value > b.value + 1e-12 ||
        (std::abs(a.value - b.value) <= 1e-12 &&
         std::lexicographical_compare(a.x.begin(), a.x.end(), b.x.begin(),
                                      b.x.end())))
      pick = r;
  }
  OptimalDesign out;
  DesignSolution& sol = out.solution;
  space.unpack(results[pick].x, sol.alpha, sol.pi);
  out.kappa = pushforward_goal(game, sol.alpha, obedient, sol.pi);
  aligned_tables(game, sol.alpha, sol.pi, sol.J, sol.V);
  DesignProblem problem{game, out.kappa, AdmissibilityMode::kWeak, tol};
  sol.certificate = certify_candidate(problem, sol.alpha, sol.pi, sol.J, sol.V);
  sol.restart = pick;
  out.value = principal_value_direct(game, sol.alpha, obedient, sol.pi, u);
  return out;
}

}  // namespace infodesign

#endif  // INFODESIGN_GOAL_DESIGN_HPP_
