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

// Finite augmented Markov games, strategy tables, and their validation.
//
// All tables are flat row-major vectors. Joint tuples (actions, signals,
// types, batches) are encoded with Radix, agent 0 / batch position 0 first.
// Batch position 0 always carries the principal's signal.

#ifndef INFODESIGN_GAME_HPP_
#define INFODESIGN_GAME_HPP_

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <sstream>
#include <string>
#include <vector>

#include "infodesign/core.hpp"

namespace infodesign {

struct Dims {
  std::size_t agents = 1;
  std::size_t states = 1;
  std::size_t actions = 1;
  std::size_t signals = 1;
  std::size_t types = 1;
  std::size_t batch = 2;

  bool operator==(const Dims&) const = default;
};

/// Radices and table sizes derived from Dims.
struct Layout {
  explicit Layout(const Dims& d)
      : dims(d),
        joint_actions(d.actions, d.agents),
        joint_signals(d.signals, d.agents),
        joint_types(d.types, d.agents),
        exogenous(d.signals, d.batch - 1),
        batch(d.signals, d.batch) {}

  Dims dims;
  Radix joint_actions;
  Radix joint_signals;
  Radix joint_types;
  Radix exogenous;  // the m - 1 non-principal slots
  Radix batch;      // all m slots, slot 0 is the principal's signal

  std::size_t nA() const { return joint_actions.size(); }
  std::size_t nW() const { return joint_signals.size(); }
  std::size_t nT() const { return joint_types.size(); }
  std::size_t nE() const { return exogenous.size(); }
  std::size_t nB() const { return batch.size(); }

  /// Batch index for principal signal `w0` and exogenous tuple `e`.
  std::size_t batch_index(std::size_t w0, std::size_t e) const {
    return w0 * nE() + e;
  }

  // Row offsets into the flat tables.
  std::size_t transition_row(std::size_t g, std::size_t a) const {
    return (g * nA() + a) * dims.states;
  }
  std::size_t reward_index(std::size_t a, std::size_t g, std::size_t w,
                           std::size_t th) const {
    return ((a * dims.states + g) * dims.signals + w) * dims.types + th;
  }
  std::size_t signaling_row(std::size_t g, std::size_t jt) const {
    return (g * nT() + jt) * nW();
  }
  std::size_t goal_row(std::size_t g, std::size_t jt) const {
    return (g * nT() + jt) * nA();
  }
  std::size_t policy_row(std::size_t g, std::size_t w, std::size_t th) const {
    return ((g * dims.signals + w) * dims.types + th) * dims.actions;
  }
  std::size_t selection_index(std::size_t g, std::size_t th,
                              std::size_t b) const {
    return (g * dims.types + th) * nB() + b;
  }
};

/**
 * Finite description of an augmented Markov game.
 *
 * transition[(g * |A^n| + a) * |G| + g']; rewards[i][((a * |G| + g) * |Omega|
 * + w) * |Theta| + theta_i]; exogenous is the per-agent distribution of the
 * m - 1 non-principal signals of a batch.
 */
struct AugmentedGame {
  Dims dims;
  double discount = 0.9;
  std::vector<double> initial;     // d_g over G
  std::vector<double> type_prior;  // d_theta over Theta^n
  std::vector<double> transition;
  std::vector<std::vector<double>> rewards;
  std::vector<double> exogenous;   // over Omega^(m-1)

  Layout layout() const { return Layout(dims); }

  double reward(std::size_t i, std::size_t a, std::size_t g, std::size_t w,
                std::size_t th) const {
    return rewards[i][((a * dims.states + g) * dims.signals + w) * dims.types +
                      th];
  }

  double max_abs_reward() const {
    double m = 0.0;
    for (const auto& r : rewards)
      for (double v : r) m = std::max(m, std::abs(v));
    return m;
  }
};

/// alpha[(g * |Theta^n| + theta) * |Omega^n| + w].
struct SignalingRule {
  std::vector<double> table;
};

/// Per-agent deterministic selection: positions[(g * |Theta| + theta_i) *
/// |Omega|^m + batch] is the chosen batch slot.
struct SelectionProfile {
  std::vector<std::vector<std::uint32_t>> positions;

  static SelectionProfile obedient(const Dims& d) {
    Layout lay(d);
    SelectionProfile s;
    s.positions.assign(d.agents, std::vector<std::uint32_t>(
                                     d.states * d.types * lay.nB(), 0));
    return s;
  }

  bool is_obedient() const {
    for (const auto& p : positions)
      for (auto v : p)
        if (v != 0) return false;
    return true;
  }
};

/// Independent policy profile: probs[i][((g * |Omega| + w) * |Theta| +
/// theta_i) * |A| + a].
struct PolicyProfile {
  std::vector<std::vector<double>> probs;
};

/// kappa[(g * |Theta^n| + theta) * |A^n| + a].
struct Goal {
  std::vector<double> table;
};

/// u[(g * |Theta^n| + theta) * |A^n| + a].
struct PrincipalPayoff {
  std::vector<double> table;
};

/// Canonical (signal-free, complete information) game for one joint type.
struct CanonicalGame {
  std::size_t agents = 1;
  std::size_t states = 1;
  std::size_t actions = 1;
  double discount = 0.9;
  std::vector<double> transition;            // same layout as AugmentedGame
  std::vector<std::vector<double>> rewards;  // [i][a * |G| + g]

  std::size_t joint_actions() const {
    return Radix(actions, agents).size();
  }
};

/// Correlated stationary policy of a canonical game: [g * |A^n| + a].
struct JointPolicy {
  std::vector<double> probs;
};

// -----------------------------------------------------------------------------
// Validation
// -----------------------------------------------------------------------------

struct Violation {
  std::string location;
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
  void add(std::string location, std::string message) {
    violations.push_back({std::move(location), std::move(message)});
  }
  void merge(const ValidationReport& other) {
    violations.insert(violations.end(), other.violations.begin(),
                      other.violations.end());
  }
  std::string summary() const {
    std::ostringstream os;
    for (const auto& v : violations)
      os << v.location << ": " << v.message << "\n";
    return os.str();
  }
};

namespace detail {

inline std::string fmt_double(double v) {
  // Shortest of %.15g..%.17g that reads back to the same double.
  char buf[40];
  for (int digits = 15; digits <= 17; ++digits) {
    std::snprintf(buf, sizeof(buf), "%.*g", digits, v);
    if (std::strtod(buf, nullptr) == v || !std::isfinite(v)) break;
  }
  return buf;
}

inline void check_rows(ValidationReport& rep, const std::vector<double>& table,
                       std::size_t rows, std::size_t width,
                       const std::string& name,
                       const std::function<std::string(std::size_t)>& where) {
  if (table.size() != rows * width) {
    rep.add(name, "expected " + std::to_string(rows * width) +
                      " entries, found " + std::to_string(table.size()));
    return;
  }
  for (std::size_t r = 0; r < rows; ++r) {
    std::span<const double> row(table.data() + r * width, width);
    double neg = 0.0;
    bool finite = true;
    for (double v : row) {
      if (!std::isfinite(v)) finite = false;
      neg = std::min(neg, v);
    }
    const double s = ordered_sum(row);
    std::string loc = name + " row " + std::to_string(r);
    std::string extra = where ? where(r) : std::string();
    if (!extra.empty()) loc += " (" + extra + ")";
    if (!finite) {
      rep.add(loc, "non-finite entry");
    } else if (neg < 0.0) {
      rep.add(loc, "negative entry " + fmt_double(neg));
    } else if (std::abs(s - 1.0) > kSimplexTol) {
      rep.add(loc, "sums to " + fmt_double(s));
    }
  }
}

}  // namespace detail

inline ValidationReport validate_dims(const Dims& d) {
  ValidationReport rep;
  if (d.agents < 1) rep.add("spaces.agents", "must be at least 1");
  if (d.states < 1) rep.add("spaces.states", "must be at least 1");
  if (d.actions < 1) rep.add("spaces.actions", "must be at least 1");
  if (d.signals < 1) rep.add("spaces.signals", "must be at least 1");
  if (d.types < 1) rep.add("spaces.types", "must be at least 1");
  if (d.batch < 2) rep.add("spaces.batch", "batch size must be at least 2");
  return rep;
}

/// Number of cells in the largest table an exact algorithm touches.
inline std::uint64_t enumeration_size(const Dims& d) {
  const std::uint64_t na = checked_pow(d.actions, d.agents);
  const std::uint64_t nw = checked_pow(d.signals, d.agents);
  const std::uint64_t nt = checked_pow(d.types, d.agents);
  std::uint64_t worst = 0;
  auto take = [&](std::uint64_t v) { worst = std::max(worst, v); };
  take(checked_mul(checked_mul(d.states, d.states), na));
  take(checked_mul(checked_mul(checked_mul(d.agents, na), d.states),
                   checked_mul(d.signals, d.types)));
  take(checked_mul(checked_mul(d.states, nt), nw));
  take(checked_mul(checked_mul(d.states, nt), na));
  take(checked_pow(d.signals, checked_mul(d.batch, d.agents)));
  return worst;
}

inline void require_within_cap(const Dims& d, std::uint64_t cap) {
  const std::uint64_t size = enumeration_size(d);
  if (size > cap) {
    throw Error(ErrorCode::kCapExceeded,
                "enumeration size " + std::to_string(size) +
                    " cells exceeds cap " + std::to_string(cap));
  }
}

inline ValidationReport validate_game(const AugmentedGame& game) {
  ValidationReport rep = validate_dims(game.dims);
  if (!rep.ok()) return rep;
  const Dims& d = game.dims;
  if (enumeration_size(d) == std::numeric_limits<std::uint64_t>::max()) {
    rep.add("spaces", "joint space size overflows");
    return rep;
  }
  const Layout lay(d);
  if (!(game.discount > 0.0 && game.discount < 1.0))
    rep.add("discount", "discount out of range: gamma = " +
                            detail::fmt_double(game.discount));
  detail::check_rows(rep, game.initial, 1, d.states, "initial", nullptr);
  detail::check_rows(rep, game.type_prior, 1, lay.nT(), "type_prior", nullptr);
  detail::check_rows(rep, game.exogenous, 1, lay.nE(), "exogenous", nullptr);
  detail::check_rows(rep, game.transition, d.states * lay.nA(), d.states,
                     "transition", [&](std::size_t r) {
                       return "state " + std::to_string(r / lay.nA()) +
                              ", joint action " + std::to_string(r % lay.nA());
                     });
  if (game.rewards.size() != d.agents) {
    rep.add("rewards", "expected tables for " + std::to_string(d.agents) +
                           " agents, found " +
                           std::to_string(game.rewards.size()));
  } else {
    const std::size_t expect = lay.nA() * d.states * d.signals * d.types;
    for (std::size_t i = 0; i < d.agents; ++i) {
      const auto& r = game.rewards[i];
      const std::string name = "rewards.agent_" + std::to_string(i);
      if (r.size() != expect) {
        rep.add(name, "expected " + std::to_string(expect) +
                          " entries, found " + std::to_string(r.size()));
        continue;
      }
      for (std::size_t k = 0; k < r.size(); ++k) {
        if (!std::isfinite(r[k])) {
          rep.add(name + " entry " + std::to_string(k), "non-finite reward");
          break;
        }
      }
    }
  }
  return rep;
}

inline ValidationReport validate_signaling(const AugmentedGame& game,
                                           const SignalingRule& alpha) {
  ValidationReport rep;
  const Layout lay = game.layout();
  detail::check_rows(rep, alpha.table, game.dims.states * lay.nT(), lay.nW(),
                     "signaling", [&](std::size_t r) {
                       return "state " + std::to_string(r / lay.nT()) +
                              ", joint type " + std::to_string(r % lay.nT());
                     });
  return rep;
}

inline ValidationReport validate_policy(const AugmentedGame& game,
                                        const PolicyProfile& pi) {
  ValidationReport rep;
  const Dims& d = game.dims;
  if (pi.probs.size() != d.agents) {
    rep.add("policy", "expected " + std::to_string(d.agents) +
                          " agents, found " + std::to_string(pi.probs.size()));
    return rep;
  }
  for (std::size_t i = 0; i < d.agents; ++i) {
    detail::check_rows(rep, pi.probs[i], d.states * d.signals * d.types,
                       d.actions, "policy.agent_" + std::to_string(i),
                       [&](std::size_t r) {
                         const std::size_t th = r % d.types;
                         const std::size_t w = (r / d.types) % d.signals;
                         const std::size_t g = r / (d.types * d.signals);
                         return "state " + std::to_string(g) + ", signal " +
                                std::to_string(w) + ", type " +
                                std::to_string(th);
                       });
  }
  return rep;
}

inline ValidationReport validate_selection(const AugmentedGame& game,
                                           const SelectionProfile& beta) {
  ValidationReport rep;
  const Dims& d = game.dims;
  const Layout lay(d);
  if (beta.positions.size() != d.agents) {
    rep.add("selection", "expected " + std::to_string(d.agents) +
                             " agents, found " +
                             std::to_string(beta.positions.size()));
    return rep;
  }
  for (std::size_t i = 0; i < d.agents; ++i) {
    const auto& p = beta.positions[i];
    const std::string name = "selection.agent_" + std::to_string(i);
    if (p.size() != d.states * d.types * lay.nB()) {
      rep.add(name, "expected " + std::to_string(d.states * d.types * lay.nB()) +
                        " entries, found " + std::to_string(p.size()));
      continue;
    }
    for (std::size_t k = 0; k < p.size(); ++k) {
      if (p[k] >= d.batch) {
        rep.add(name + " entry " + std::to_string(k),
                "position " + std::to_string(p[k]) + " outside batch");
        break;
      }
    }
  }
  return rep;
}

inline ValidationReport validate_goal(const AugmentedGame& game,
                                      const Goal& kappa) {
  ValidationReport rep;
  const Layout lay = game.layout();
  detail::check_rows(rep, kappa.table, game.dims.states * lay.nT(), lay.nA(),
                     "goal", [&](std::size_t r) {
                       return "state " + std::to_string(r / lay.nT()) +
                              ", joint type " + std::to_string(r % lay.nT());
                     });
  return rep;
}

inline ValidationReport validate_principal(const AugmentedGame& game,
                                           const PrincipalPayoff& u) {
  ValidationReport rep;
  const Layout lay = game.layout();
  const std::size_t expect = game.dims.states * lay.nT() * lay.nA();
  if (u.table.size() != expect) {
    rep.add("principal", "expected " + std::to_string(expect) +
                             " entries, found " + std::to_string(u.table.size()));
    return rep;
  }
  for (std::size_t k = 0; k < expect; ++k) {
    if (!std::isfinite(u.table[k])) {
      rep.add("principal entry " + std::to_string(k), "non-finite payoff");
      break;
    }
  }
  return rep;
}

/// Throws kShapeMismatch / kInvalidArgument with the report text when invalid.
inline void require(const ValidationReport& rep, ErrorCode code) {
  if (!rep.ok()) throw Error(code, rep.summary());
}

// -----------------------------------------------------------------------------
// Canonical projection
// -----------------------------------------------------------------------------

inline CanonicalGame canonical_projection(const AugmentedGame& game,
                                          std::size_t joint_type,
                                          std::size_t fixed_signal) {
  const Dims& d = game.dims;
  const Layout lay(d);
  if (fixed_signal >= d.signals)
    throw Error(ErrorCode::kInvalidArgument, "fixed signal outside Omega");
  if (joint_type >= lay.nT())
    throw Error(ErrorCode::kInvalidArgument, "joint type out of range");
  CanonicalGame c;
  c.agents = d.agents;
  c.states = d.states;
  c.actions = d.actions;
  c.discount = game.discount;
  c.transition = game.transition;
  c.rewards.assign(d.agents, std::vector<double>(lay.nA() * d.states));
  for (std::size_t i = 0; i < d.agents; ++i) {
    const std::size_t th = lay.joint_types.digit(joint_type, i);
    for (std::size_t a = 0; a < lay.nA(); ++a)
      for (std::size_t g = 0; g < d.states; ++g)
        c.rewards[i][a * d.states + g] = game.reward(i, a, g, fixed_signal, th);
  }
  return c;
}

// -----------------------------------------------------------------------------
// Random instances
// -----------------------------------------------------------------------------

inline AugmentedGame random_game(std::uint64_t seed, const Dims& dims,
                                 double reward_lo = 0.0, double reward_hi = 1.0,
                                 double discount = 0.9,
                                 std::uint64_t cap = kDefaultCellCap) {
  require(validate_dims(dims), ErrorCode::kInvalidArgument);
  require_within_cap(dims, cap);
  const Layout lay(dims);
  Rng rng(seed);
  AugmentedGame g;
  g.dims = dims;
  g.discount = discount;
  g.initial = rng.simplex(dims.states);
  g.type_prior = rng.simplex(lay.nT());
  g.transition.reserve(dims.states * lay.nA() * dims.states);
  for (std::size_t r = 0; r < dims.states * lay.nA(); ++r) {
    auto row = rng.simplex(dims.states);
    g.transition.insert(g.transition.end(), row.begin(), row.end());
  }
  g.rewards.assign(dims.agents, {});
  for (auto& r : g.rewards) {
    r.resize(lay.nA() * dims.states * dims.signals * dims.types);
    for (double& v : r) v = rng.uniform(reward_lo, reward_hi);
  }
  g.exogenous = rng.simplex(lay.nE());
  return g;
}

inline SignalingRule random_signaling(Rng& rng, const AugmentedGame& game) {
  const Layout lay = game.layout();
  SignalingRule a;
  for (std::size_t r = 0; r < game.dims.states * lay.nT(); ++r) {
    auto row = rng.simplex(lay.nW());
    a.table.insert(a.table.end(), row.begin(), row.end());
  }
  return a;
}

inline PolicyProfile random_policy(Rng& rng, const AugmentedGame& game) {
  const Dims& d = game.dims;
  PolicyProfile p;
  p.probs.assign(d.agents, {});
  for (auto& t : p.probs) {
    for (std::size_t r = 0; r < d.states * d.signals * d.types; ++r) {
      auto row = rng.simplex(d.actions);
      t.insert(t.end(), row.begin(), row.end());
    }
  }
  return p;
}

inline SelectionProfile random_selection(Rng& rng, const AugmentedGame& game) {
  const Dims& d = game.dims;
  const Layout lay(d);
  SelectionProfile s;
  s.positions.assign(d.agents, {});
  for (auto& t : s.positions) {
    t.resize(d.states * d.types * lay.nB());
    for (auto& v : t) v = static_cast<std::uint32_t>(rng.below(d.batch));
  }
  return s;
}

inline SignalingRule uniform_signaling(const AugmentedGame& game) {
  const Layout lay = game.layout();
  SignalingRule a;
  a.table.assign(game.dims.states * lay.nT() * lay.nW(),
                 1.0 / static_cast<double>(lay.nW()));
  return a;
}

inline PolicyProfile uniform_policy(const AugmentedGame& game) {
  const Dims& d = game.dims;
  PolicyProfile p;
  p.probs.assign(d.agents,
                 std::vector<double>(d.states * d.signals * d.types * d.actions,
                                     1.0 / static_cast<double>(d.actions)));
  return p;
}

}  // namespace infodesign

#endif  // INFODESIGN_GAME_HPP_
