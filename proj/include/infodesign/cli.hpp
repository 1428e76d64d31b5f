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

// Command-line driver: validate, evaluate, certify, design, simulate.
//
// Exit codes: 0 success or pass, 2 semantic failure, 3 input or usage error.

#ifndef INFODESIGN_CLI_HPP_
#define INFODESIGN_CLI_HPP_

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "infodesign/core.hpp"
#include "infodesign/equilibrium.hpp"
#include "infodesign/fpa.hpp"
#include "infodesign/game.hpp"
#include "infodesign/goal_design.hpp"
#include "infodesign/io.hpp"
#include "infodesign/report.hpp"
#include "infodesign/valuation.hpp"

namespace infodesign {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFail = 2;
inline constexpr int kExitInput = 3;

namespace cli_detail {

struct Options {
  std::string command;
  // Global.
  std::uint64_t seed = 0;
  std::optional<double> tol;
  std::string out;
  std::uint64_t cap = kDefaultCellCap;
  bool timing = false;
  // Inputs.
  std::string game;
  std::string strategy;
  std::string signaling;
  std::string goal;
  std::string principal;
  bool obedient = false;
  // certify
  bool mce = false, one_shot = false, obedience = false, admissibility = false,
       nash_goal = false;
  std::string obedience_mode = "bayesian";
  std::string admissibility_mode = "weak";
  // design
  bool optimal = false;
  std::size_t restarts = 16;
  std::size_t max_iters = 300;
  // simulate
  std::size_t horizon = 0;
  std::size_t runs = 1000;
};

inline int exit_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kOffSupport:
    case ErrorCode::kNonConvergence:
      return kExitFail;
    default:
      return kExitInput;
  }
}

inline void manifest(Report& rep, const Options& o,
                     const std::vector<std::pair<std::string, std::string>>& extra) {
  rep.section("manifest");
  rep.kv("tool", "infodesign");
  rep.kv("version", kVersion);
  rep.kv("command", o.command);
  const auto input = [&](const char* name, const std::string& path) {
    if (!path.empty()) rep.kv(std::string("input.") + name, path);
  };
  input("game", o.game);
  input("strategy", o.strategy);
  input("signaling", o.signaling);
  input("goal", o.goal);
  input("principal", o.principal);
  rep.kv("option.seed", o.seed);
  rep.kv("option.cap", o.cap);
  for (const auto& [k, v] : extra) rep.kv("option." + k, v);
}

inline ObedienceMode obedience_mode(const std::string& s) {
  if (s == "bayesian") return ObedienceMode::kBayesian;
  if (s == "dominant") return ObedienceMode::kDominant;
  throw Error(ErrorCode::kInvalidArgument, "unknown obedience mode '" + s + "'");
}

inline AdmissibilityMode admissibility_mode(const std::string& s) {
  if (s == "weak") return AdmissibilityMode::kWeak;
  if (s == "strong") return AdmissibilityMode::kStrong;
  throw Error(ErrorCode::kInvalidArgument, "unknown admissibility mode '" + s + "'");
}

/// Game plus strategy pieces shared by evaluate/certify/simulate.
struct Loaded {
  AugmentedGame game;
  SignalingRule alpha;
  SelectionProfile beta;
  PolicyProfile pi;
};

inline AugmentedGame load_valid_game(const Options& o, Report& rep, bool& ok) {
  AugmentedGame g = load_game(o.game);
  require_within_cap(g.dims, o.cap);
  const ValidationReport v = validate_game(g);
  ok = v.ok();
  if (!ok) {
    rep.section("validation");
    rep.kv("valid", false);
    rep.kv("violations", v.violations.size());
    Report::Table t{"violations", {"location", "message"}, {}};
    for (const auto& x : v.violations) t.rows.push_back({x.location, x.message});
    rep.table(std::move(t));
  }
  return g;
}

inline Loaded load_strategy_inputs(const Options& o, Report& rep, bool& ok) {
  Loaded l;
  l.game = load_valid_game(o, rep, ok);
  if (!ok) return l;
  const Dims& d = l.game.dims;
  if (o.strategy.empty())
    throw Error(ErrorCode::kInvalidArgument, "--strategy is required");
  StrategyFile s = load_strategy(o.strategy, d);
  l.pi = std::move(s.pi);
  l.beta = (s.beta && !o.obedient) ? *s.beta : SelectionProfile::obedient(d);
  if (!o.signaling.empty()) {
    l.alpha = load_signaling(o.signaling, d);
  } else if (s.alpha) {
    l.alpha = *s.alpha;
  } else {
    throw Error(ErrorCode::kInvalidArgument,
                "no signaling rule: pass --signaling or add [signaling] to the strategy file");
  }
  ValidationReport v = validate_signaling(l.game, l.alpha);
  v.merge(validate_policy(l.game, l.pi));
  v.merge(validate_selection(l.game, l.beta));
  if (!v.ok()) {
    ok = false;
    rep.section("validation");
    rep.kv("valid", false);
    rep.kv("violations", v.violations.size());
    Report::Table t{"violations", {"location", "message"}, {}};
    for (const auto& x : v.violations) t.rows.push_back({x.location, x.message});
    rep.table(std::move(t));
  }
  return l;
}

inline Report::Table alpha_table(const AugmentedGame& g, const SignalingRule& a) {
  const Layout lay = g.layout();
  Report::Table t{"alpha", {"state", "joint_type", "joint_signal", "probability"}, {}};
  for (std::size_t s = 0; s < g.dims.states; ++s)
    for (std::size_t jt = 0; jt < lay.nT(); ++jt)
      for (std::size_t w = 0; w < lay.nW(); ++w)
        t.rows.push_back({cell(s), cell(jt), cell(w),
                          cell(a.table[lay.signaling_row(s, jt) + w])});
  return t;
}

inline Report::Table pi_table(const AugmentedGame& g, const PolicyProfile& p) {
  const Dims& d = g.dims;
  const Layout lay(d);
  Report::Table t{"pi", {"agent", "state", "signal", "type", "action", "probability"}, {}};
  for (std::size_t i = 0; i < d.agents; ++i)
    for (std::size_t s = 0; s < d.states; ++s)
      for (std::size_t w = 0; w < d.signals; ++w)
        for (std::size_t th = 0; th < d.types; ++th)
          for (std::size_t a = 0; a < d.actions; ++a)
            t.rows.push_back({cell(i), cell(s), cell(w), cell(th), cell(a),
                              cell(p.probs[i][lay.policy_row(s, w, th) + a])});
  return t;
}

inline void value_tables(Report& rep, const AugmentedGame& g,
                         const std::vector<AgentTables>& J,
                         const std::vector<AgentTables>& V) {
  const Layout lay = g.layout();
  Report::Table tj{"J", {"joint_type", "agent", "state", "value"}, {}};
  Report::Table tv{"V", {"joint_type", "agent", "state", "joint_signal", "value"}, {}};
  for (std::size_t jt = 0; jt < J.size(); ++jt)
    for (std::size_t i = 0; i < g.dims.agents; ++i)
      for (std::size_t s = 0; s < g.dims.states; ++s) {
        tj.rows.push_back({cell(jt), cell(i), cell(s), cell(J[jt][i][s])});
        for (std::size_t w = 0; w < lay.nW(); ++w)
          tv.rows.push_back({cell(jt), cell(i), cell(s), cell(w),
                             cell(V[jt][i][s * lay.nW() + w])});
      }
  rep.table(std::move(tj));
  rep.table(std::move(tv));
}

inline void residual_lines(Report& rep, const std::string& name, const Residual& r) {
  rep.kv("residual." + name, r.value);
  rep.kv("residual." + name + ".witness", r.witness);
}

inline void certificate_lines(Report& rep, const Certificate& c) {
  rep.kv("certified", c.certified);
  rep.kv("Z", c.Z);
  rep.kv("ZFPA", c.ZFPA);
  residual_lines(rep, "RG", c.constraints.RG);
  residual_lines(rep, "FE", c.constraints.FE);
  residual_lines(rep, "BOB0", c.constraints.BOB0);
  residual_lines(rep, "BOB1", c.constraints.BOB1);
  residual_lines(rep, "FS", c.constraints.FS);
  residual_lines(rep, "AD", c.constraints.AD);
  residual_lines(rep, "FPM1", c.fpm.FPM1);
  residual_lines(rep, "FPM2", c.fpm.FPM2);
  rep.certification(c.nash_goal);
  rep.certification(c.admissibility);
}

// -----------------------------------------------------------------------------
// Commands
// -----------------------------------------------------------------------------

inline int cmd_validate(const Options& o, Report& rep) {
  manifest(rep, o, {});
  const AugmentedGame g = load_game(o.game);
  const ValidationReport v = validate_game(g);
  rep.section("validation");
  rep.kv("valid", v.ok());
  rep.kv("violations", v.violations.size());
  rep.kv("enumeration_size", enumeration_size(g.dims));
  Report::Table t{"violations", {"location", "message"}, {}};
  for (const auto& x : v.violations) t.rows.push_back({x.location, x.message});
  rep.table(std::move(t));
  if (!v.ok()) return kExitFail;
  require_within_cap(g.dims, o.cap);
  return kExitOk;
}

inline int cmd_evaluate(const Options& o, Report& rep) {
  manifest(rep, o, {{"obedient", o.obedient ? "true" : "false"}});
  bool ok = true;
  const Loaded l = load_strategy_inputs(o, rep, ok);
  if (!ok) return kExitFail;
  const Layout lay = l.game.layout();
  std::vector<AgentTables> J, V;
  for (std::size_t jt = 0; jt < lay.nT(); ++jt) {
    const ValueBundle vb = evaluate_values(l.game, l.alpha, l.beta, l.pi, jt, {}, o.cap);
    J.push_back(vb.J);
    V.push_back(vb.V);
  }
  rep.section("evaluation");
  rep.kv("joint_types", lay.nT());
  value_tables(rep, l.game, J, V);
  return kExitOk;
}

inline int cmd_certify(const Options& o, Report& rep) {
  const double tol = o.tol.value_or(kDefaultTol);
  manifest(rep, o,
           {{"tol", detail::fmt_double(tol)},
            {"obedience_mode", o.obedience_mode},
            {"admissibility_mode", o.admissibility_mode},
            {"obedient", o.obedient ? "true" : "false"}});
  const ObedienceMode om = obedience_mode(o.obedience_mode);
  const AdmissibilityMode am = admissibility_mode(o.admissibility_mode);
  bool ok = true;
  const Loaded l = load_strategy_inputs(o, rep, ok);
  if (!ok) return kExitFail;
  if (o.goal.empty()) throw Error(ErrorCode::kInvalidArgument, "--goal is required");
  const Goal kappa = load_goal(o.goal, l.game.dims);
  if (const auto v = validate_goal(l.game, kappa); !v.ok()) {
    rep.section("validation");
    rep.kv("valid", false);
    rep.kv("violations", v.violations.size());
    Report::Table t{"violations", {"location", "message"}, {}};
    for (const auto& x : v.violations) t.rows.push_back({x.location, x.message});
    rep.table(std::move(t));
    return kExitFail;
  }
  const bool individual = o.mce || o.one_shot || o.obedience || o.admissibility || o.nash_goal;
  CertificationReport result;
  if (!individual) {
    result = check_oil(l.game, l.alpha, l.pi, kappa, om, am, tol, o.cap);
  } else {
    std::vector<CertificationReport> parts;
    if (o.mce) {
      const Layout lay = l.game.layout();
      std::vector<CertificationReport> per_type;
      for (std::size_t jt = 0; jt < lay.nT(); ++jt) {
        const CanonicalGame c = canonical_projection(l.game, jt, 0);
        JointPolicy jp;
        for (std::size_t s = 0; s < l.game.dims.states; ++s) {
          const double* k = kappa.table.data() + lay.goal_row(s, jt);
          jp.probs.insert(jp.probs.end(), k, k + lay.nA());
        }
        CertificationReport r = check_mce(c, jp, tol);
        r.name = "MCE.joint_type_" + std::to_string(jt);
        per_type.push_back(std::move(r));
      }
      parts.push_back(detail::combine("MCE", std::move(per_type), tol));
    }
    if (o.one_shot) parts.push_back(check_one_shot(l.game, l.alpha, l.beta, l.pi, tol));
    if (o.obedience) parts.push_back(check_obedience(l.game, l.alpha, l.pi, om, tol, o.cap));
    if (o.admissibility)
      parts.push_back(check_admissibility(l.game, l.alpha, l.beta, l.pi, kappa, am, tol));
    if (o.nash_goal) parts.push_back(check_nash_goal(l.game, l.alpha, kappa, tol));
    result = detail::combine("checks", std::move(parts), tol);
  }
  rep.section("certification");
  rep.kv("verdict", result.pass ? "pass" : "fail");
  rep.kv("witness", result.pass || result.witness.empty() ? std::string("none")
                                                          : result.witness);
  rep.certification(result);
  return result.pass ? kExitOk : kExitFail;
}

inline int cmd_design(const Options& o, Report& rep) {
  const double tol = o.tol.value_or(1e-7);
  manifest(rep, o,
           {{"tol", detail::fmt_double(tol)},
            {"restarts", std::to_string(o.restarts)},
            {"max_iters", std::to_string(o.max_iters)},
            {"admissibility_mode", o.admissibility_mode},
            {"optimal", o.optimal ? "true" : "false"}});
  const AdmissibilityMode am = admissibility_mode(o.admissibility_mode);
  bool ok = true;
  const AugmentedGame game = load_valid_game(o, rep, ok);
  if (!ok) return kExitFail;
  SolverOptions so;
  so.restarts = o.restarts;
  so.seed = o.seed;
  so.max_iters = o.max_iters;
  Tolerances t{tol, tol, tol};
  DesignSolution sol;
  std::optional<double> value;
  if (o.optimal) {
    if (o.principal.empty())
      throw Error(ErrorCode::kInvalidArgument, "--optimal requires --principal");
    const PrincipalPayoff u = load_principal(o.principal, game.dims);
    OptimalDesign od = solve_optimal_design(game, u, so, t);
    sol = std::move(od.solution);
    value = od.value;
  } else {
    if (o.goal.empty())
      throw Error(ErrorCode::kInvalidArgument, "--goal (or --optimal) is required");
    const Goal kappa = load_goal(o.goal, game.dims);
    if (const auto v = validate_goal(game, kappa); !v.ok()) {
      rep.section("validation");
      rep.kv("valid", false);
      rep.kv("violations", v.violations.size());
      Report::Table tv{"violations", {"location", "message"}, {}};
      for (const auto& x : v.violations) tv.rows.push_back({x.location, x.message});
      rep.table(std::move(tv));
      return kExitFail;
    }
    sol = solve_fpalign(DesignProblem{game, kappa, am, t}, so);
  }
  rep.section("design");
  rep.kv("verdict", sol.certificate.certified ? "certified" : "uncertified");
  rep.kv("restart", sol.restart);
  if (value) rep.kv("principal_value", *value);
  certificate_lines(rep, sol.certificate);
  rep.table(alpha_table(game, sol.alpha));
  rep.table(pi_table(game, sol.pi));
  value_tables(rep, game, sol.J, sol.V);
  return sol.certificate.certified ? kExitOk : kExitFail;
}

inline int cmd_simulate(const Options& o, Report& rep) {
  bool ok = true;
  manifest(rep, o, {{"horizon", std::to_string(o.horizon)},
                    {"runs", std::to_string(o.runs)},
                    {"obedient", o.obedient ? "true" : "false"}});
  const Loaded l = load_strategy_inputs(o, rep, ok);
  if (!ok) return kExitFail;
  std::size_t horizon = o.horizon;
  if (horizon == 0) {
    // Smallest H with gamma^H * Rmax / (1 - gamma) <= 1e-3.
    const double rmax = l.game.max_abs_reward();
    const double g = l.game.discount;
    horizon = 1;
    while (std::pow(g, static_cast<double>(horizon)) * rmax / (1.0 - g) > 1e-3 &&
           horizon < 100000)
      ++horizon;
  }
  const Layout lay = l.game.layout();
  Report::Table t{"returns", {"joint_type", "agent", "initial_state", "mean", "standard_error"}, {}};
  for (std::size_t jt = 0; jt < lay.nT(); ++jt) {
    const RolloutEstimate est = simulate_rollouts(l.game, l.alpha, l.beta, l.pi, jt,
                                                  horizon, o.runs,
                                                  derive_seed(o.seed, jt));
    for (std::size_t i = 0; i < l.game.dims.agents; ++i)
      for (std::size_t s = 0; s < l.game.dims.states; ++s)
        t.rows.push_back({cell(jt), cell(i), cell(s), cell(est.mean[i][s]),
                          cell(est.se[i][s])});
  }
  rep.section("simulation");
  rep.kv("horizon", horizon);
  rep.kv("runs", o.runs);
  rep.table(std::move(t));
  return kExitOk;
}

inline void write_outputs(const Options& o, const Report& rep) {
  namespace fs = std::filesystem;
  fs::create_directories(o.out);
  std::ofstream(fs::path(o.out) / "report.txt", std::ios::binary) << rep.str();
  for (const auto& t : rep.tables())
    std::ofstream(fs::path(o.out) / (t.name + ".csv"), std::ios::binary)
        << Report::csv_text(t);
}

}  // namespace cli_detail

/// Runs the command line; the report goes to `out`, diagnostics to `err`.
inline int run_cli(int argc, const char* const* argv, std::ostream& out,
                   std::ostream& err) {
  using cli_detail::Options;
  Options o;
  CLI::App app{"Information design for augmented Markov games", "infodesign"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));

  auto globals = [&](CLI::App* sub) {
    sub->add_option("--seed", o.seed, "Random seed");
    sub->add_option("--tol", o.tol, "Tolerance");
    sub->add_option("--out", o.out, "Directory for report.txt and CSV tables");
    sub->add_option("--cap", o.cap, "Enumeration cap in table cells");
    sub->add_flag("--timing", o.timing, "Add wall-clock time to the manifest");
  };
  auto strategy_inputs = [&](CLI::App* sub) {
    sub->add_option("--strategy", o.strategy, "Strategy file (policy, selection)");
    sub->add_option("--signaling", o.signaling, "Signaling rule file");
    sub->add_flag("--obedient", o.obedient, "Use obedient selection");
  };

  CLI::App* validate = app.add_subcommand("validate", "Parse and validate a game");
  validate->add_option("game", o.game, "Game file")->required();
  globals(validate);

  CLI::App* evaluate = app.add_subcommand("evaluate", "Exact values J and V");
  evaluate->add_option("game", o.game, "Game file")->required();
  strategy_inputs(evaluate);
  globals(evaluate);

  CLI::App* certify = app.add_subcommand("certify", "Check equilibrium conditions");
  certify->add_option("game", o.game, "Game file")->required();
  strategy_inputs(certify);
  certify->add_option("--goal", o.goal, "Goal file");
  certify->add_flag("--mce", o.mce, "Markov correlated equilibrium of the goal");
  certify->add_flag("--one-shot", o.one_shot, "One-shot deviation check");
  certify->add_flag("--obedience", o.obedience, "Obedience check");
  certify->add_flag("--admissibility", o.admissibility, "Admissibility check");
  certify->add_flag("--nash-goal", o.nash_goal, "Nash-goal check");
  certify->add_option("--obedience-mode", o.obedience_mode, "bayesian or dominant")
      ->check(CLI::IsMember({"bayesian", "dominant"}));
  certify->add_option("--admissibility-mode", o.admissibility_mode, "weak or strong")
      ->check(CLI::IsMember({"weak", "strong"}));
  globals(certify);

  CLI::App* design = app.add_subcommand("design", "Solve for an aligned design");
  design->add_option("game", o.game, "Game file")->required();
  design->add_option("--goal", o.goal, "Goal file");
  design->add_flag("--optimal", o.optimal, "Maximize the principal payoff");
  design->add_option("--principal", o.principal, "Principal payoff file");
  design->add_option("--restarts", o.restarts, "Solver restarts");
  design->add_option("--max-iters", o.max_iters, "Descent iterations per round");
  design->add_option("--admissibility-mode", o.admissibility_mode, "weak or strong")
      ->check(CLI::IsMember({"weak", "strong"}));
  globals(design);

  CLI::App* simulate = app.add_subcommand("simulate", "Monte Carlo returns");
  simulate->add_option("game", o.game, "Game file")->required();
  strategy_inputs(simulate);
  simulate->add_option("--horizon", o.horizon, "Rollout horizon (0: automatic)");
  simulate->add_option("--runs", o.runs, "Rollouts per initial state");
  globals(simulate);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << "\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitInput;
  }
  o.command = app.get_subcommands().front()->get_name();

  Report rep;
  int code = kExitOk;
  const auto start = std::chrono::steady_clock::now();
  try {
    if (o.command == "validate") code = cli_detail::cmd_validate(o, rep);
    else if (o.command == "evaluate") code = cli_detail::cmd_evaluate(o, rep);
    else if (o.command == "certify") code = cli_detail::cmd_certify(o, rep);
    else if (o.command == "design") code = cli_detail::cmd_design(o, rep);
    else code = cli_detail::cmd_simulate(o, rep);
  } catch (const Error& e) {
    out << rep.str();
    err << "error: " << e.what() << "\n";
    return cli_detail::exit_for(e.code());
  } catch (const std::exception& e) {
    out << rep.str();
    err << "error: " << e.what() << "\n";
    return kExitInput;
  }
  if (o.timing) {
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    rep.section("timing");
    rep.kv("wall_clock_seconds", secs);
  }
  out << rep.str();
  if (!o.out.empty()) {
    try {
      cli_detail::write_outputs(o, rep);
    } catch (const std::exception& e) {
      err << "error: cannot write outputs: " << e.what() << "\n";
      return kExitInput;
    }
  }
  return code;
}

}  // namespace infodesign

#endif  // INFODESIGN_CLI_HPP_
