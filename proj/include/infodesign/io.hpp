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

// TOML readers and writers for games, strategies, signaling rules, goals and
// principal payoffs.
//
// Every file carries `schema-version = 1`. Tables are row arrays in the same
// order as the in-memory layouts (see README.md). Shape problems raise
// kShapeMismatch, syntax and missing keys raise kParse; probability rows are
// not checked here (use the validate_* functions).

#ifndef INFODESIGN_IO_HPP_
#define INFODESIGN_IO_HPP_

#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <toml.hpp>

#include "infodesign/core.hpp"
#include "infodesign/game.hpp"

namespace infodesign {

inline constexpr std::int64_t kSchemaVersion = 1;

/// Policy, optional selection and optional signaling rule read from one file.
struct StrategyFile {
  PolicyProfile pi;
  std::optional<SelectionProfile> beta;  // absent: obedient
  std::optional<SignalingRule> alpha;
};

namespace io_detail {

inline std::string at(const std::string& source, const toml::source_region& r) {
  std::string s = source;
  if (r.begin.line > 0) {
    s += ":" + std::to_string(r.begin.line) + ":" + std::to_string(r.begin.column);
  }
  return s;
}

[[noreturn]] inline void fail(ErrorCode code, const std::string& where,
                              const std::string& what) {
  throw Error(code, where + ": " + what);
}

inline toml::table parse_text(const std::string& text, const std::string& source) {
  try {
    return toml::parse(text, source);
  } catch (const toml::parse_error& e) {
    fail(ErrorCode::kParse, at(source, e.source()), std::string(e.description()));
  }
}

inline void check_schema(const toml::table& root, const std::string& source) {
  const toml::node* v = root.get("schema-version");
  if (v == nullptr) fail(ErrorCode::kParse, source, "missing key 'schema-version'");
  const auto n = v->value<std::int64_t>();
  if (!n || *n != kSchemaVersion) {
    fail(ErrorCode::kParse, at(source, v->source()),
         "unsupported schema-version (expected 1)");
  }
}

inline const toml::table& section(const toml::table& root, const std::string& name,
                                  const std::string& source) {
  // Dotted names such as rewards.agent_0.
  const toml::table* cur = &root;
  std::string rest = name;
  while (true) {
    const auto dot = rest.find('.');
    const std::string head = rest.substr(0, dot);
    const toml::node* n = cur->get(head);
    if (n == nullptr || !n->is_table())
      fail(ErrorCode::kParse, source, "missing section [" + name + "]");
    cur = n->as_table();
    if (dot == std::string::npos) break;
    rest = rest.substr(dot + 1);
  }
  return *cur;
}

inline bool has_section(const toml::table& root, const std::string& name) {
  const toml::table* cur = &root;
  std::string rest = name;
  while (true) {
    const auto dot = rest.find('.');
    const toml::node* n = cur->get(rest.substr(0, dot));
    if (n == nullptr || !n->is_table()) return false;
    cur = n->as_table();
    if (dot == std::string::npos) return true;
    rest = rest.substr(dot + 1);
  }
}

inline const toml::node& key(const toml::table& sec, const std::string& name,
                             const std::string& sec_name, const std::string& source) {
  const toml::node* n = sec.get(name);
  if (n == nullptr)
    fail(ErrorCode::kParse, at(source, sec.source()),
         "section [" + sec_name + "]: missing key '" + name + "'");
  return *n;
}

inline double number(const toml::node& n, const std::string& where) {
  if (auto v = n.value<double>(); v && (n.is_floating_point() || n.is_integer()))
    return *v;
  fail(ErrorCode::kParse, where, "expected a number");
}

inline std::size_t count(const toml::table& sec, const std::string& name,
                         const std::string& sec_name, const std::string& source) {
  const toml::node& n = key(sec, name, sec_name, source);
  const auto v = n.value<std::int64_t>();
  if (!v || !n.is_integer() || *v < 0)
    fail(ErrorCode::kParse, at(source, n.source()),
         "section [" + sec_name + "]: '" + name + "' must be a non-negative integer");
  return static_cast<std::size_t>(*v);
}

inline std::vector<double> vector(const toml::node& n, std::size_t expect,
                                  const std::string& label, const std::string& source) {
  const toml::array* arr = n.as_array();
  if (arr == nullptr) fail(ErrorCode::kParse, at(source, n.source()), label + ": expected an array");
  if (arr->size() != expect)
    fail(ErrorCode::kShapeMismatch, at(source, n.source()),
         label + ": expected " + std::to_string(expect) + " entries, found " +
             std::to_string(arr->size()));
  std::vector<double> out;
  out.reserve(expect);
  for (const auto& e : *arr) out.push_back(number(e, at(source, e.source())));
  return out;
}

/// Array of `rows` arrays of `width` numbers, flattened.
inline std::vector<double> rows(const toml::node& n, std::size_t rows,
                                std::size_t width, const std::string& label,
                                const std::string& source) {
  const toml::array* arr = n.as_array();
  if (arr == nullptr) fail(ErrorCode::kParse, at(source, n.source()), label + ": expected an array of rows");
  if (arr->size() != rows)
    fail(ErrorCode::kShapeMismatch, at(source, n.source()),
         label + ": expected " + std::to_string(rows) + " rows, found " +
             std::to_string(arr->size()));
  std::vector<double> out;
  out.reserve(rows * width);
  for (std::size_t r = 0; r < rows; ++r) {
    const auto row = vector((*arr)[r], width, label + " row " + std::to_string(r), source);
    out.insert(out.end(), row.begin(), row.end());
  }
  return out;
}

inline Dims read_dims(const toml::table& root, const std::string& source) {
  const toml::table& sp = section(root, "spaces", source);
  Dims d;
  d.agents = count(sp, "agents", "spaces", source);
  d.states = count(sp, "states", "spaces", source);
  d.actions = count(sp, "actions", "spaces", source);
  d.signals = count(sp, "signals", "spaces", source);
  d.types = count(sp, "types", "spaces", source);
  d.batch = count(sp, "batch", "spaces", source);
  return d;
}

inline void match_dims(const Dims& file, const Dims& game, const std::string& source) {
  const auto check = [&](const char* name, std::size_t a, std::size_t b) {
    if (a != b)
      fail(ErrorCode::kShapeMismatch, source,
           std::string("spaces.") + name + " is " + std::to_string(a) +
               " but the game has " + std::to_string(b));
  };
  check("agents", file.agents, game.agents);
  check("states", file.states, game.states);
  check("actions", file.actions, game.actions);
  check("signals", file.signals, game.signals);
  check("types", file.types, game.types);
  check("batch", file.batch, game.batch);
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kParse, path + ": cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Shortest of %.15g / %.17g that reads back to the same double.
inline std::string number_text(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.15g", v);
  if (std::strtod(buf, nullptr) != v) std::snprintf(buf, sizeof(buf), "%.17g", v);
  std::string s(buf);
  if (s == "inf") return "inf";
  if (s == "-inf") return "-inf";
  if (s == "nan" || s == "-nan") return "nan";
  if (s.find_first_of(".eE") == std::string::npos) s += ".0";
  return s;
}

inline void write_row(std::ostream& os, const double* v, std::size_t width) {
  os << '[';
  for (std::size_t k = 0; k < width; ++k) {
    if (k) os << ", ";
    os << number_text(v[k]);
  }
  os << ']';
}

inline void write_rows(std::ostream& os, const std::string& name,
                       const std::vector<double>& table, std::size_t width) {
  os << name << " = [\n";
  for (std::size_t r = 0; width > 0 && r < table.size() / width; ++r) {
    os << "  ";
    write_row(os, table.data() + r * width, width);
    os << ",\n";
  }
  os << "]\n";
}

inline void write_spaces(std::ostream& os, const Dims& d) {
  os << "schema-version = 1\n\n[spaces]\n"
     << "agents = " << d.agents << "\nstates = " << d.states
     << "\nactions = " << d.actions << "\nsignals = " << d.signals
     << "\ntypes = " << d.types << "\nbatch = " << d.batch << "\n";
}

}  // namespace io_detail

// -----------------------------------------------------------------------------
// Games
// -----------------------------------------------------------------------------

inline AugmentedGame parse_game(const std::string& text,
                                const std::string& source = "<game>") {
  using namespace io_detail;
  const toml::table root = parse_text(text, source);
  check_schema(root, source);
  AugmentedGame g;
  g.dims = read_dims(root, source);
  require(validate_dims(g.dims), ErrorCode::kShapeMismatch);
  const Layout lay(g.dims);
  const toml::table& disc = section(root, "discount", source);
  g.discount = number(key(disc, "gamma", "discount", source), at(source, disc.source()));
  g.initial = vector(key(section(root, "initial", source), "probabilities", "initial", source),
                     g.dims.states, "initial.probabilities", source);
  g.type_prior = vector(
      key(section(root, "type_prior", source), "probabilities", "type_prior", source),
      lay.nT(), "type_prior.probabilities", source);
  g.transition = rows(key(section(root, "transition", source), "rows", "transition", source),
                      g.dims.states * lay.nA(), g.dims.states, "transition.rows", source);
  g.rewards.resize(g.dims.agents);
  for (std::size_t i = 0; i < g.dims.agents; ++i) {
    const std::string name = "rewards.agent_" + std::to_string(i);
    g.rewards[i] = rows(key(section(root, name, source), "rows", name, source),
                        lay.nA() * g.dims.states * g.dims.signals, g.dims.types,
                        name + ".rows", source);
  }
  g.exogenous = vector(
      key(section(root, "exogenous", source), "probabilities", "exogenous", source),
      lay.nE(), "exogenous.probabilities", source);
  return g;
}

inline AugmentedGame load_game(const std::string& path) {
  return parse_game(io_detail::read_file(path), path);
}

inline std::string write_game(const AugmentedGame& g) {
  using namespace io_detail;
  std::ostringstream os;
  write_spaces(os, g.dims);
  os << "\n[discount]\ngamma = " << number_text(g.discount) << "\n";
  os << "\n[initial]\nprobabilities = ";
  write_row(os, g.initial.data(), g.initial.size());
  os << "\n\n[type_prior]\nprobabilities = ";
  write_row(os, g.type_prior.data(), g.type_prior.size());
  os << "\n\n[transition]\n";
  write_rows(os, "rows", g.transition, g.dims.states);
  for (std::size_t i = 0; i < g.rewards.size(); ++i) {
    os << "\n[rewards.agent_" << i << "]\n";
    write_rows(os, "rows", g.rewards[i], g.dims.types);
  }
  os << "\n[exogenous]\nprobabilities = ";
  write_row(os, g.exogenous.data(), g.exogenous.size());
  os << "\n";
  return os.str();
}

// -----------------------------------------------------------------------------
// Strategies, signaling rules, goals, principal payoffs
// -----------------------------------------------------------------------------

namespace io_detail {

inline SignalingRule read_signaling(const toml::table& root, const Layout& lay,
                                    const std::string& source) {
  SignalingRule a;
  a.table = rows(key(section(root, "signaling", source), "rows", "signaling", source),
                 lay.dims.states * lay.nT(), lay.nW(), "signaling.rows", source);
  return a;
}

inline toml::table parse_with_dims(const std::string& text, const std::string& source,
                                   const Dims& game_dims) {
  toml::table root = parse_text(text, source);
  check_schema(root, source);
  match_dims(read_dims(root, source), game_dims, source);
  return root;
}

}  // namespace io_detail

inline StrategyFile parse_strategy(const std::string& text, const Dims& dims,
                                   const std::string& source = "<strategy>") {
  using namespace io_detail;
  const toml::table root = parse_with_dims(text, source, dims);
  const Layout lay(dims);
  StrategyFile s;
  s.pi.probs.resize(dims.agents);
  for (std::size_t i = 0; i < dims.agents; ++i) {
    const std::string name = "policy.agent_" + std::to_string(i);
    s.pi.probs[i] = rows(key(section(root, name, source), "rows", name, source),
                         dims.states * dims.signals * dims.types, dims.actions,
                         name + ".rows", source);
  }
  if (has_section(root, "selection")) {
    SelectionProfile b;
    b.positions.resize(dims.agents);
    for (std::size_t i = 0; i < dims.agents; ++i) {
      const std::string name = "selection.agent_" + std::to_string(i);
      const auto v = vector(key(section(root, name, source), "positions", name, source),
                            dims.states * dims.types * lay.nB(), name + ".positions",
                            source);
      for (double p : v) {
        if (p < 0 || p != static_cast<double>(static_cast<std::uint32_t>(p)))
          fail(ErrorCode::kParse, source, name + ".positions: entries must be integers");
        b.positions[i].push_back(static_cast<std::uint32_t>(p));
      }
    }
    s.beta = std::move(b);
  }
  if (has_section(root, "signaling")) s.alpha = read_signaling(root, lay, source);
  return s;
}

inline SignalingRule parse_signaling(const std::string& text, const Dims& dims,
                                     const std::string& source = "<signaling>") {
  using namespace io_detail;
  const toml::table root = parse_with_dims(text, source, dims);
  return read_signaling(root, Layout(dims), source);
}

inline Goal parse_goal(const std::string& text, const Dims& dims,
                       const std::string& source = "<goal>") {
  using namespace io_detail;
  const toml::table root = parse_with_dims(text, source, dims);
  const Layout lay(dims);
  Goal k;
  k.table = rows(key(section(root, "goal", source), "rows", "goal", source),
                 dims.states * lay.nT(), lay.nA(), "goal.rows", source);
  return k;
}

inline PrincipalPayoff parse_principal(const std::string& text, const Dims& dims,
                                       const std::string& source = "<principal>") {
  using namespace io_detail;
  const toml::table root = parse_with_dims(text, source, dims);
  const Layout lay(dims);
  PrincipalPayoff u;
  u.table = rows(key(section(root, "principal", source), "rows", "principal", source),
                 dims.states * lay.nT(), lay.nA(), "principal.rows", source);
  return u;
}

inline StrategyFile load_strategy(const std::string& path, const Dims& d) {
  return parse_strategy(io_detail::read_file(path), d, path);
}
inline SignalingRule load_signaling(const std::string& path, const Dims& d) {
  return parse_signaling(io_detail::read_file(path), d, path);
}
inline Goal load_goal(const std::string& path, const Dims& d) {
  return parse_goal(io_detail::read_file(path), d, path);
}
inline PrincipalPayoff load_principal(const std::string& path, const Dims& d) {
  return parse_principal(io_detail::read_file(path), d, path);
}

inline std::string write_strategy(const Dims& d, const PolicyProfile& pi,
                                  const SelectionProfile* beta = nullptr,
                                  const SignalingRule* alpha = nullptr) {
  using namespace io_detail;
  const Layout lay(d);
  std::ostringstream os;
  write_spaces(os, d);
  if (alpha != nullptr) {
    os << "\n[signaling]\n";
    write_rows(os, "rows", alpha->table, lay.nW());
  }
  for (std::size_t i = 0; i < pi.probs.size(); ++i) {
    os << "\n[policy.agent_" << i << "]\n";
    write_rows(os, "rows", pi.probs[i], d.actions);
  }
  if (beta != nullptr && !beta->is_obedient()) {
    for (std::size_t i = 0; i < beta->positions.size(); ++i) {
      os << "\n[selection.agent_" << i << "]\npositions = [";
      for (std::size_t k = 0; k < beta->positions[i].size(); ++k)
        os << (k ? ", " : "") << beta->positions[i][k];
      os << "]\n";
    }
  }
  return os.str();
}

inline std::string write_signaling(const Dims& d, const SignalingRule& alpha) {
  std::ostringstream os;
  io_detail::write_spaces(os, d);
  os << "\n[signaling]\n";
  io_detail::write_rows(os, "rows", alpha.table, Layout(d).nW());
  return os.str();
}

inline std::string write_goal(const Dims& d, const Goal& kappa) {
  std::ostringstream os;
  io_detail::write_spaces(os, d);
  os << "\n[goal]\n";
  io_detail::write_rows(os, "rows", kappa.table, Layout(d).nA());
  return os.str();
}

inline std::string write_principal(const Dims& d, const PrincipalPayoff& u) {
  std::ostringstream os;
  io_detail::write_spaces(os, d);
  os << "\n[principal]\n";
  io_detail::write_rows(os, "rows", u.table, Layout(d).nA());
  return os.str();
}

}  // namespace infodesign

#endif  // INFODESIGN_IO_HPP_
