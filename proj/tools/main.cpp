#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "polgame/analytic.hpp"
#include "polgame/char_functions.hpp"
#include "polgame/coop.hpp"
#include "polgame/game.hpp"
#include "polgame/oracle.hpp"

namespace {

using namespace polgame;

constexpr int kCoverPlayerCap = 15;   // the cover DP walks all 3^n partitions
constexpr int kOraclePlayerCap = 10;  // matches validate_against_closed_forms

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

[[noreturn]] void fail(const std::string& message) { throw ConfigError(message); }

// All numeric output goes through this one formatter so that JSON and CSV
// renderings of a report carry byte-identical values.
std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  if (std::strcmp(buf, "-0") == 0) return "0";
  return buf;
}

std::string join_members(const std::vector<int>& members) {
  std::string out;
  for (std::size_t i = 0; i < members.size(); ++i) {
    if (i > 0) out += ' ';
    out += std::to_string(members[i]);
  }
  return out;
}

// Deterministic JSON emitter: keys appear in call order, floats go through
// fmt, indentation is fixed at two spaces.
class JsonOut {
 public:
  void begin_object() { open('{'); }
  void end_object() { close('}'); }
  void begin_array() { open('['); }
  void end_array() { close(']'); }

  void key(std::string_view name) {
    if (counts_.back() > 0) out_ += ',';
    ++counts_.back();
    newline_indent();
    quote(name);
    out_ += ": ";
    after_key_ = true;
  }

  void number(double v) { scalar(fmt(v)); }
  void integer(long long v) { scalar(std::to_string(v)); }
  void unsigned_integer(unsigned long long v) { scalar(std::to_string(v)); }
  void boolean(bool v) { scalar(v ? "true" : "false"); }
  void text(std::string_view v) {
    separate_value();
    quote(v);
  }

  void field(std::string_view k, double v) { key(k), number(v); }
  void field(std::string_view k, int v) { key(k), integer(v); }
  void field(std::string_view k, bool v) { key(k), boolean(v); }
  void field(std::string_view k, std::string_view v) { key(k), text(v); }
  void field(std::string_view k, const char* v) { key(k), text(v); }

  void number_array(std::string_view k, const std::vector<double>& values) {
    key(k);
    begin_array();
    for (double v : values) number(v);
    end_array();
  }
  void integer_array(std::string_view k, const std::vector<int>& values) {
    key(k);
    begin_array();
    for (int v : values) integer(v);
    end_array();
  }

  std::string take() {
    out_ += '\n';
    return std::move(out_);
  }

 private:
  void newline_indent() {
    out_ += '\n';
    out_.append(2 * counts_.size(), ' ');
  }

  void separate_value() {
    if (after_key_) {
      after_key_ = false;
      return;
    }
    if (counts_.empty()) return;
    if (counts_.back() > 0) out_ += ',';
    ++counts_.back();
    newline_indent();
  }

  void scalar(const std::string& text) {
    separate_value();
    out_ += text;
  }

  void open(char bracket) {
    separate_value();
    out_ += bracket;
    counts_.push_back(0);
  }

  void close(char bracket) {
    const int items = counts_.back();
    counts_.pop_back();
    if (items > 0) newline_indent();
    out_ += bracket;
  }

  void quote(std::string_view s) {
    out_ += '"';
    for (char ch : s) {
      switch (ch) {
        case '"': out_ += "\\\""; break;
        case '\\': out_ += "\\\\"; break;
        case '\n': out_ += "\\n"; break;
        default:
          if (static_cast<unsigned char>(ch) < 0x20) {
            char buf[8];
            std::snprintf(buf, sizeof(buf), "\\u%04x", ch);
            out_ += buf;
          } else {
            out_ += ch;
          }
      }
    }
    out_ += '"';
  }

  std::string out_;
  std::vector<int> counts_;
  bool after_key_ = false;
};

// Block-structured CSV: each block is a "# title" line, a header row and
// data rows. Cells never contain commas, so no quoting is needed.
class CsvOut {
 public:
  void title(std::string_view name) {
    if (!out_.empty()) out_ += '\n';
    out_ += "# ";
    out_ += name;
    out_ += '\n';
  }

  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i > 0) out_ += ',';
      out_ += cells[i];
    }
    out_ += '\n';
  }

  std::string take() { return std::move(out_); }

 private:
  std::string out_;
};

struct Perturbation {
  CFKind kind = CFKind::Alpha;
  std::uint32_t mask = 0;
  double delta = 0.0;
};

struct Run {
  GameSpec spec;
  double eval_time = 0.0;
  double eval_state = 0.0;
  std::vector<CFKind> kinds{kAllKinds.begin(), kAllKinds.end()};
  int oracle_M = 2000;
  double tol = 1e-9;
  double oracle_rel = 1e-3;
  std::string format = "json";

  bool with_distances = false;
  bool with_oracle = false;
  int sweep = 0;
  unsigned long long seed = 1;
  std::optional<Perturbation> perturb;
  std::optional<std::string> out_path;
};

// ---------------------------------------------------------------------------
// Config file parsing. The schema is strict: every key must be known, every
// field must have the right type, and error messages name the field.

const nlohmann::json& need(const nlohmann::json& obj, const std::string& key,
                           const std::string& scope) {
  const std::string path = scope.empty() ? key : scope + "." + key;
  if (!obj.contains(key)) fail("missing required field \"" + path + "\"");
  return obj.at(key);
}

double need_number(const nlohmann::json& obj, const std::string& key, const std::string& scope) {
  const nlohmann::json& v = need(obj, key, scope);
  const std::string path = scope.empty() ? key : scope + "." + key;
  if (!v.is_number()) fail("field \"" + path + "\" must be a number");
  return v.get<double>();
}

void reject_unknown(const nlohmann::json& obj, const std::vector<std::string>& allowed,
                    const std::string& scope) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end()) {
      const std::string path = scope.empty() ? it.key() : scope + "." + it.key();
      fail("unknown key \"" + path + "\"");
    }
  }
}

std::vector<CFKind> parse_kind_list(const std::vector<std::string>& names) {
  std::array<bool, kAllKinds.size()> selected{};
  for (const std::string& name : names) {
    if (name == "all") {
      selected.fill(true);
      continue;
    }
    const auto kind = cf_kind_from_string(name);
    if (!kind) fail("unknown characteristic function kind \"" + name + "\"");
    selected[static_cast<std::size_t>(*kind)] = true;
  }
  std::vector<CFKind> kinds;
  for (CFKind kind : kAllKinds)
    if (selected[static_cast<std::size_t>(kind)]) kinds.push_back(kind);
  if (kinds.empty()) fail("the kind list is empty");
  return kinds;
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t stop = text.find(sep, start);
    parts.push_back(text.substr(start, stop - start));
    if (stop == std::string::npos) break;
    start = stop + 1;
  }
  return parts;
}

Run parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot read config file \"" + path + "\"");
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    fail(std::string("config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) fail("config root must be an object");
  reject_unknown(doc,
                 {"t0", "T", "x0", "players", "eval_time", "eval_state", "cf_kinds", "oracle_M",
                  "tolerances", "format"},
                 "");

  const double t0 = need_number(doc, "t0", "");
  const double T = need_number(doc, "T", "");
  const double x0 = need_number(doc, "x0", "");

  const nlohmann::json& players = need(doc, "players", "");
  if (!players.is_array() || players.empty()) fail("field \"players\" must be a non-empty array");
  std::vector<std::pair<double, double>> bd;
  for (std::size_t i = 0; i < players.size(); ++i) {
    const std::string scope = "players[" + std::to_string(i) + "]";
    const nlohmann::json& p = players[i];
    if (!p.is_object()) fail("field \"" + scope + "\" must be an object");
    reject_unknown(p, {"b", "d"}, scope);
    bd.emplace_back(need_number(p, "b", scope), need_number(p, "d", scope));
  }

  Run run;
  run.spec = GameSpec::make(t0, T, x0, bd);
  run.eval_time = t0;
  run.eval_state = x0;

  if (doc.contains("eval_time")) {
    if (!doc["eval_time"].is_number()) fail("field \"eval_time\" must be a number");
    run.eval_time = doc["eval_time"].get<double>();
  }
  if (doc.contains("eval_state")) {
    if (!doc["eval_state"].is_number()) fail("field \"eval_state\" must be a number");
    run.eval_state = doc["eval_state"].get<double>();
  }
  if (doc.contains("cf_kinds")) {
    const nlohmann::json& kinds = doc["cf_kinds"];
    if (!kinds.is_array()) fail("field \"cf_kinds\" must be an array of kind names");
    std::vector<std::string> names;
    for (const auto& k : kinds) {
      if (!k.is_string()) fail("field \"cf_kinds\" must contain only strings");
      names.push_back(k.get<std::string>());
    }
    run.kinds = parse_kind_list(names);
  }
  if (doc.contains("oracle_M")) {
    if (!doc["oracle_M"].is_number_integer()) fail("field \"oracle_M\" must be an integer");
    run.oracle_M = doc["oracle_M"].get<int>();
  }
  if (doc.contains("tolerances")) {
    const nlohmann::json& tols = doc["tolerances"];
    if (!tols.is_object()) fail("field \"tolerances\" must be an object");
    reject_unknown(tols, {"identity", "oracle_rel"}, "tolerances");
    if (tols.contains("identity")) run.tol = need_number(tols, "identity", "tolerances");
    if (tols.contains("oracle_rel")) run.oracle_rel = need_number(tols, "oracle_rel", "tolerances");
  }
  if (doc.contains("format")) {
    if (!doc["format"].is_string()) fail("field \"format\" must be a string");
    run.format = doc["format"].get<std::string>();
  }
  return run;
}

Perturbation parse_perturbation(const std::string& text) {
  const std::vector<std::string> parts = split(text, ':');
  if (parts.size() != 3) fail("--perturb expects kind:mask:delta");
  Perturbation p;
  const auto kind = cf_kind_from_string(parts[0]);
  if (!kind) fail("--perturb names unknown kind \"" + parts[0] + "\"");
  p.kind = *kind;
  try {
    std::size_t used = 0;
    p.mask = static_cast<std::uint32_t>(std::stoul(parts[1], &used));
    if (used != parts[1].size()) throw std::invalid_argument("trailing junk");
  } catch (const std::exception&) {
    fail("--perturb mask \"" + parts[1] + "\" is not an unsigned integer");
  }
  try {
    std::size_t used = 0;
    p.delta = std::stod(parts[2], &used);
    if (used != parts[2].size()) throw std::invalid_argument("trailing junk");
  } catch (const std::exception&) {
    fail("--perturb delta \"" + parts[2] + "\" is not a number");
  }
  return p;
}

void finalize(Run& run) {
  const ValidationReport report = validate_spec(run.spec);
  if (!report.valid())
    fail("invalid game: " + report.issues[0].field + ": " + report.issues[0].message);
  if (!(run.eval_time >= run.spec.t0 && run.eval_time <= run.spec.T))
    fail("\"eval_time\" must lie in [t0, T]");
  if (!std::isfinite(run.eval_state)) fail("\"eval_state\" must be finite");
  if (run.format != "json" && run.format != "csv") fail("format must be \"json\" or \"csv\"");
  if (run.oracle_M < 2) fail("\"oracle_M\" must be at least 2");
  if (!(run.tol > 0.0)) fail("tolerance \"identity\" must be positive");
  if (!(run.oracle_rel > 0.0)) fail("tolerance \"oracle_rel\" must be positive");
  if (run.sweep < 0) fail("--sweep must be nonnegative");
  if (run.perturb) {
    const std::uint32_t size = std::uint32_t{1} << run.spec.player_count();
    if (run.perturb->mask >= size) fail("--perturb mask is outside the coalition range");
  }
}

// ---------------------------------------------------------------------------
// Shared report fragments.

void game_json(JsonOut& j, const GameSpec& spec) {
  j.key("game");
  j.begin_object();
  j.field("players", spec.player_count());
  j.field("t0", spec.t0);
  j.field("T", spec.T);
  j.field("x0", spec.x0);
  std::vector<double> b, d;
  for (const auto& p : spec.players) {
    b.push_back(p.b);
    d.push_back(p.d);
  }
  j.number_array("b", b);
  j.number_array("d", d);
  j.end_object();
}

void game_csv(CsvOut& c, const GameSpec& spec) {
  c.title("game");
  c.row({"t0", "T", "x0", "players"});
  c.row({fmt(spec.t0), fmt(spec.T), fmt(spec.x0), std::to_string(spec.player_count())});
  c.title("players");
  c.row({"player", "b", "d"});
  for (const auto& p : spec.players)
    c.row({std::to_string(p.id), fmt(p.b), fmt(p.d)});
}

void eval_json(JsonOut& j, const Run& run) {
  j.key("eval");
  j.begin_object();
  j.field("state", run.eval_state);
  j.field("time", run.eval_time);
  j.end_object();
}

// ---------------------------------------------------------------------------
// solve

std::string run_solve(const Run& run) {
  const GameSpec& spec = run.spec;
  const int n = spec.player_count();

  const ControlProfile nash = nash_equilibrium(spec);
  const ControlProfile coop = cooperative_agreement(spec);
  const Trajectory nash_path = state_trajectory(spec, nash);
  const Trajectory coop_path = state_trajectory(spec, coop);

  std::vector<double> nash_pay(static_cast<std::size_t>(n)), coop_pay(static_cast<std::size_t>(n));
  double nash_total = 0.0, coop_total = 0.0;
  for (int i = 0; i < n; ++i) {
    nash_pay[static_cast<std::size_t>(i)] = player_payoff(spec, nash, i);
    coop_pay[static_cast<std::size_t>(i)] = player_payoff(spec, coop, i);
    nash_total += nash_pay[static_cast<std::size_t>(i)];
    coop_total += coop_pay[static_cast<std::size_t>(i)];
  }
  const double gap_at_end = pollution_gap(spec, spec.T);

  if (run.format == "json") {
    JsonOut j;
    j.begin_object();
    j.field("command", "solve");
    game_json(j, spec);
    const auto profile = [&](const char* name, const ControlProfile& prof, const Trajectory& path,
                             const std::vector<double>& pay, double total) {
      j.key(name);
      j.begin_object();
      j.key("controls");
      j.begin_array();
      for (int i = 0; i < n; ++i) {
        const AffineControl& u = prof.controls[static_cast<std::size_t>(i)];
        j.begin_object();
        j.field("player", i);
        j.field("cap", u.cap);
        j.field("c0", u.c0);
        j.field("c1", u.c1);
        j.end_object();
      }
      j.end_array();
      j.key("trajectory");
      j.begin_object();
      j.field("x0", path.x0);
      j.field("t0", path.t0);
      j.field("a1", path.a1);
      j.field("a2", path.a2);
      j.end_object();
      j.number_array("payoffs", pay);
      j.field("total", total);
      j.end_object();
    };
    profile("nash", nash, nash_path, nash_pay, nash_total);
    profile("cooperative", coop, coop_path, coop_pay, coop_total);
    j.field("pollution_gap_at_T", gap_at_end);
    j.end_object();
    return j.take();
  }

  CsvOut c;
  game_csv(c, spec);
  const auto profile = [&](const std::string& name, const ControlProfile& prof,
                           const Trajectory& path, const std::vector<double>& pay) {
    c.title(name + " controls");
    c.row({"player", "cap", "c0", "c1"});
    for (int i = 0; i < n; ++i) {
      const AffineControl& u = prof.controls[static_cast<std::size_t>(i)];
      c.row({std::to_string(i), fmt(u.cap), fmt(u.c0), fmt(u.c1)});
    }
    c.title(name + " trajectory");
    c.row({"x0", "t0", "a1", "a2"});
    c.row({fmt(path.x0), fmt(path.t0), fmt(path.a1), fmt(path.a2)});
    c.title(name + " payoffs");
    c.row({"player", "payoff"});
    for (int i = 0; i < n; ++i) c.row({std::to_string(i), fmt(pay[static_cast<std::size_t>(i)])});
  };
  profile("nash", nash, nash_path, nash_pay);
  profile("cooperative", coop, coop_path, coop_pay);
  c.title("totals");
  c.row({"nash_total", "cooperative_total", "pollution_gap_at_T"});
  c.row({fmt(nash_total), fmt(coop_total), fmt(gap_at_end)});
  return c.take();
}

// ---------------------------------------------------------------------------
// cf

std::string run_cf(const Run& run) {
  const GameSpec& spec = run.spec;
  const int n = spec.player_count();
  const std::uint32_t size = std::uint32_t{1} << n;

  const bool wants_cover =
      std::find(run.kinds.begin(), run.kinds.end(), CFKind::EtaCover) != run.kinds.end();
  if (wants_cover && n > kCoverPlayerCap)
    fail("eta_cover supports at most " + std::to_string(kCoverPlayerCap) + " players");

  std::vector<CFTable> tables;
  for (CFKind kind : run.kinds)
    tables.push_back(cf_table(spec, kind, run.eval_state, run.eval_time));

  if (run.format == "json") {
    JsonOut j;
    j.begin_object();
    j.field("command", "cf");
    game_json(j, spec);
    eval_json(j, run);
    j.key("tables");
    j.begin_array();
    for (const CFTable& table : tables) {
      const bool base = table.kind != CFKind::EtaCover;
      j.begin_object();
      j.field("kind", to_string(table.kind));
      j.key("rows");
      j.begin_array();
      for (std::uint32_t mask = 0; mask < size; ++mask) {
        const Coalition coalition{mask};
        j.begin_object();
        j.field("mask", static_cast<int>(mask));
        j.integer_array("members", coalition.members());
        j.field("value", table.values[mask]);
        if (run.with_distances && base) {
          const BoundsGap gap = distances(spec, table.kind, coalition, run.eval_time);
          j.field("upper_gap", gap.upper_gap);
          j.field("lower_gap", gap.lower_gap);
          if (mask != 0) {
            const Alignment al = alignment_coefficient(spec, coalition);
            j.field("k_eta", al.k_eta);
            j.field("k_alpha", al.k_alpha);
          }
        }
        j.end_object();
      }
      j.end_array();
      j.end_object();
    }
    j.end_array();
    j.end_object();
    return j.take();
  }

  CsvOut c;
  game_csv(c, spec);
  c.title("eval");
  c.row({"state", "time"});
  c.row({fmt(run.eval_state), fmt(run.eval_time)});
  for (const CFTable& table : tables) {
    const bool base = table.kind != CFKind::EtaCover;
    const bool extras = run.with_distances && base;
    c.title("table " + std::string(to_string(table.kind)));
    if (extras)
      c.row({"mask", "members", "value", "upper_gap", "lower_gap", "k_eta", "k_alpha"});
    else
      c.row({"mask", "members", "value"});
    for (std::uint32_t mask = 0; mask < size; ++mask) {
      const Coalition coalition{mask};
      std::vector<std::string> cells = {std::to_string(mask), join_members(coalition.members()),
                                        fmt(table.values[mask])};
      if (extras) {
        const BoundsGap gap = distances(spec, table.kind, coalition, run.eval_time);
        cells.push_back(fmt(gap.upper_gap));
        cells.push_back(fmt(gap.lower_gap));
        if (mask != 0) {
          const Alignment al = alignment_coefficient(spec, coalition);
          cells.push_back(fmt(al.k_eta));
          cells.push_back(fmt(al.k_alpha));
        } else {
          cells.push_back("");
          cells.push_back("");
        }
      }
      c.row(cells);
    }
  }
  return c.take();
}

// ---------------------------------------------------------------------------
// shapley

std::string run_shapley(const Run& run) {
  const GameSpec& spec = run.spec;
  const int n = spec.player_count();

  std::array<CFTable, kBaseKinds.size()> tables;
  std::array<Imputation, kBaseKinds.size()> values;
  for (std::size_t k = 0; k < kBaseKinds.size(); ++k) {
    tables[k] = cf_table(spec, kBaseKinds[k], run.eval_state, run.eval_time);
    values[k] = shapley(tables[k]);
  }

  const auto max_deviation = [n](const Imputation& a, const Imputation& b) {
    double dev = 0.0;
    for (int i = 0; i < n; ++i)
      dev = std::max(dev, std::abs(a.payoffs[static_cast<std::size_t>(i)] -
                                   b.payoffs[static_cast<std::size_t>(i)]));
    return dev;
  };
  const auto& sh_alpha = values[static_cast<std::size_t>(CFKind::Alpha)];
  const auto& sh_delta = values[static_cast<std::size_t>(CFKind::Delta)];
  const auto& sh_zeta = values[static_cast<std::size_t>(CFKind::Zeta)];
  const auto& sh_eta = values[static_cast<std::size_t>(CFKind::Eta)];

  const double dev_alpha_delta = max_deviation(sh_alpha, sh_delta);
  const double dev_zeta_eta = max_deviation(sh_zeta, sh_eta);
  const Imputation closed =
      shapley_closed_form(spec, ShapleyFamily::ZetaEta, run.eval_state, run.eval_time);
  const double dev_closed_zeta = max_deviation(closed, sh_zeta);
  const double dev_closed_eta = max_deviation(closed, sh_eta);

  std::vector<double> difference(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    difference[static_cast<std::size_t>(i)] = sh_alpha.payoffs[static_cast<std::size_t>(i)] -
                                              sh_zeta.payoffs[static_cast<std::size_t>(i)];

  struct SymmetricPair {
    int a = 0;
    int b = 0;
    double deviation = 0.0;
  };
  std::vector<SymmetricPair> pairs;
  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) {
      if (spec.players[static_cast<std::size_t>(a)].b != spec.players[static_cast<std::size_t>(b)].b ||
          spec.players[static_cast<std::size_t>(a)].d != spec.players[static_cast<std::size_t>(b)].d)
        continue;
      double dev = 0.0;
      for (const Imputation& sh : values)
        dev = std::max(dev, std::abs(sh.payoffs[static_cast<std::size_t>(a)] -
                                     sh.payoffs[static_cast<std::size_t>(b)]));
      pairs.push_back({a, b, dev});
    }
  }

  if (run.format == "json") {
    JsonOut j;
    j.begin_object();
    j.field("command", "shapley");
    game_json(j, spec);
    eval_json(j, run);
    j.field("tolerance", run.tol);
    j.key("kinds");
    j.begin_array();
    for (std::size_t k = 0; k < kBaseKinds.size(); ++k) {
      const RationalityReport rat = check_imputation(tables[k], values[k], run.tol);
      const VertexSet verts = imputation_vertices(tables[k]);
      j.begin_object();
      j.field("kind", to_string(kBaseKinds[k]));
      j.number_array("shapley", values[k].payoffs);
      j.key("rationality");
      j.begin_object();
      j.number_array("individual_slack", rat.individual_slack);
      j.field("group_residual", rat.group_residual);
      j.field("ok", rat.ok());
      j.end_object();
      j.key("vertices");
      j.begin_object();
      j.field("degenerate", verts.degenerate);
      j.field("surplus", verts.surplus);
      j.key("points");
      j.begin_array();
      for (const Imputation& vertex : verts.vertices) {
        j.begin_array();
        for (double v : vertex.payoffs) j.number(v);
        j.end_array();
      }
      j.end_array();
      j.end_object();
      j.end_object();
    }
    j.end_array();
    j.key("coincidence");
    j.begin_object();
    j.field("alpha_delta_deviation", dev_alpha_delta);
    j.field("zeta_eta_deviation", dev_zeta_eta);
    j.field("coincident", dev_alpha_delta <= run.tol && dev_zeta_eta <= run.tol);
    j.end_object();
    j.key("closed_form");
    j.begin_object();
    j.field("family", "zeta_eta");
    j.number_array("shapley", closed.payoffs);
    j.field("deviation_from_zeta", dev_closed_zeta);
    j.field("deviation_from_eta", dev_closed_eta);
    j.end_object();
    j.number_array("difference_alpha_minus_zeta", difference);
    j.key("symmetric_pairs");
    j.begin_array();
    for (const SymmetricPair& p : pairs) {
      j.begin_object();
      j.key("players");
      j.begin_array();
      j.integer(p.a);
      j.integer(p.b);
      j.end_array();
      j.field("max_deviation", p.deviation);
      j.end_object();
    }
    j.end_array();
    j.end_object();
    return j.take();
  }

  CsvOut c;
  game_csv(c, spec);
  c.title("eval");
  c.row({"state", "time"});
  c.row({fmt(run.eval_state), fmt(run.eval_time)});
  c.title("shapley");
  c.row({"kind", "player", "value"});
  for (std::size_t k = 0; k < kBaseKinds.size(); ++k)
    for (int i = 0; i < n; ++i)
      c.row({std::string(to_string(kBaseKinds[k])), std::to_string(i),
             fmt(values[k].payoffs[static_cast<std::size_t>(i)])});
  c.title("rationality");
  c.row({"kind", "player", "slack"});
  std::vector<std::string> group_rows;
  for (std::size_t k = 0; k < kBaseKinds.size(); ++k) {
    const RationalityReport rat = check_imputation(tables[k], values[k], run.tol);
    for (int i = 0; i < n; ++i)
      c.row({std::string(to_string(kBaseKinds[k])), std::to_string(i),
             fmt(rat.individual_slack[static_cast<std::size_t>(i)])});
    group_rows.push_back(std::string(to_string(kBaseKinds[k])) + "," + fmt(rat.group_residual) +
                         "," + (rat.ok() ? "true" : "false"));
  }
  c.title("group residuals");
  c.row({"kind", "residual", "ok"});
  for (const std::string& row : group_rows) {
    const std::vector<std::string> cells = split(row, ',');
    c.row(cells);
  }
  c.title("vertices");
  c.row({"kind", "vertex", "player", "value"});
  for (std::size_t k = 0; k < kBaseKinds.size(); ++k) {
    const VertexSet verts = imputation_vertices(tables[k]);
    for (std::size_t v = 0; v < verts.vertices.size(); ++v)
      for (int i = 0; i < n; ++i)
        c.row({std::string(to_string(kBaseKinds[k])), std::to_string(v), std::to_string(i),
               fmt(verts.vertices[v].payoffs[static_cast<std::size_t>(i)])});
  }
  c.title("coincidence");
  c.row({"pair", "max_deviation"});
  c.row({"alpha/delta", fmt(dev_alpha_delta)});
  c.row({"zeta/eta", fmt(dev_zeta_eta)});
  c.title("closed form");
  c.row({"player", "value"});
  for (int i = 0; i < n; ++i)
    c.row({std::to_string(i), fmt(closed.payoffs[static_cast<std::size_t>(i)])});
  c.title("closed form deviations");
  c.row({"table", "max_deviation"});
  c.row({"zeta", fmt(dev_closed_zeta)});
  c.row({"eta", fmt(dev_closed_eta)});
  c.title("difference alpha minus zeta");
  c.row({"player", "value"});
  for (int i = 0; i < n; ++i)
    c.row({std::to_string(i), fmt(difference[static_cast<std::size_t>(i)])});
  c.title("symmetric pairs");
  c.row({"player_a", "player_b", "max_deviation"});
  for (const SymmetricPair& p : pairs)
    c.row({std::to_string(p.a), std::to_string(p.b), fmt(p.deviation)});
  return c.take();
}

// ---------------------------------------------------------------------------
// check

struct Violation {
  std::string source;
  std::string check;
  std::string kind;
  std::optional<std::uint32_t> mask;
  std::string members;
  std::string detail;
};

void add_violation(std::vector<Violation>& out, std::string source, std::string check,
                   std::string kind, std::optional<std::uint32_t> mask, std::string detail) {
  Violation v;
  v.source = std::move(source);
  v.check = std::move(check);
  v.kind = std::move(kind);
  v.mask = mask;
  if (mask) v.members = join_members(Coalition(*mask).members());
  v.detail = std::move(detail);
  out.push_back(std::move(v));
}

// Runs every identity and order check on one game at one evaluation point.
// The perturbation, when present, is added to the named table entry first,
// so a corrupted table must surface as named violations.
void core_checks(const GameSpec& spec, double x, double t, double tol,
                 const std::optional<Perturbation>& perturb, const std::string& source,
                 std::vector<Violation>& out) {
  const int n = spec.player_count();
  const std::uint32_t size = std::uint32_t{1} << n;
  const std::uint32_t full = size - 1;

  std::array<CFTable, kBaseKinds.size()> tab;
  for (std::size_t k = 0; k < kBaseKinds.size(); ++k)
    tab[k] = cf_table(spec, kBaseKinds[k], x, t);
  if (perturb && perturb->kind != CFKind::EtaCover)
    tab[static_cast<std::size_t>(perturb->kind)].values[perturb->mask] += perturb->delta;

  const auto& alpha = tab[static_cast<std::size_t>(CFKind::Alpha)].values;
  const auto& beta = tab[static_cast<std::size_t>(CFKind::Beta)].values;
  const auto& delta = tab[static_cast<std::size_t>(CFKind::Delta)].values;
  const auto& zeta = tab[static_cast<std::size_t>(CFKind::Zeta)].values;
  const auto& eta = tab[static_cast<std::size_t>(CFKind::Eta)].values;

  struct ChainLink {
    const std::vector<double>* upper;
    const std::vector<double>* lower;
    const char* label;
  };
  const std::array<ChainLink, 6> chains = {{{&delta, &alpha, "delta/alpha"},
                                            {&alpha, &zeta, "alpha/zeta"},
                                            {&delta, &beta, "delta/beta"},
                                            {&beta, &zeta, "beta/zeta"},
                                            {&delta, &eta, "delta/eta"},
                                            {&eta, &zeta, "eta/zeta"}}};
  for (const ChainLink& chain : chains) {
    for (std::uint32_t mask = 0; mask < size; ++mask) {
      const double gap = (*chain.upper)[mask] - (*chain.lower)[mask];
      if (gap < -tol)
        add_violation(out, source, "partial_order", chain.label, mask,
                      "upper minus lower = " + fmt(gap));
    }
  }

  for (std::size_t k = 0; k < kBaseKinds.size(); ++k) {
    const SuperadditivityReport rep = verify_superadditivity(tab[k], tol);
    for (const SuperadditivityViolation& v : rep.violations)
      add_violation(out, source, "superadditivity", std::string(to_string(kBaseKinds[k])),
                    v.first.unite(v.second).mask(),
                    "V(S) + V(Q) - V(S union Q) = " + fmt(v.deficit) + " with S = [" +
                        join_members(v.first.members()) + "] Q = [" +
                        join_members(v.second.members()) + "]");
  }

  if (n <= kCoverPlayerCap) {
    CFTable cover = superadditive_cover(tab[static_cast<std::size_t>(CFKind::Eta)]);
    if (perturb && perturb->kind == CFKind::EtaCover)
      cover.values[perturb->mask] += perturb->delta;
    for (std::uint32_t mask = 0; mask < size; ++mask)
      if (cover.values[mask] < eta[mask])
        add_violation(out, source, "cover", "eta_cover", mask,
                      "cover below eta by " + fmt(eta[mask] - cover.values[mask]));
    const SuperadditivityReport rep = verify_superadditivity(cover, tol);
    for (const SuperadditivityViolation& v : rep.violations)
      add_violation(out, source, "cover", "eta_cover", v.first.unite(v.second).mask(),
                    "cover not superadditive: deficit = " + fmt(v.deficit) + " with S = [" +
                        join_members(v.first.members()) + "] Q = [" +
                        join_members(v.second.members()) + "]");
    const CFTable again = superadditive_cover(cover);
    for (std::uint32_t mask = 0; mask < size; ++mask)
      if (again.values[mask] != cover.values[mask])
        add_violation(out, source, "cover", "eta_cover", mask,
                      "cover not idempotent: second pass moved the value by " +
                          fmt(again.values[mask] - cover.values[mask]));
  }

  for (std::uint32_t mask = 0; mask < size; ++mask) {
    const double residual = (delta[mask] - alpha[mask]) - (eta[mask] - zeta[mask]);
    if (std::abs(residual) > tol)
      add_violation(out, source, "reflection", "-", mask,
                    "(V_delta - V_alpha) - (V_eta - V_zeta) = " + fmt(residual));
  }

  for (std::uint32_t mask = 1; mask < size; ++mask) {
    const Alignment al = alignment_coefficient(spec, Coalition(mask));
    const double residual = eta[mask] - (al.k_eta * delta[mask] + al.k_alpha * zeta[mask]);
    if (std::abs(residual) > tol)
      add_violation(out, source, "alignment", "-", mask,
                    "V_eta - (k_eta V_delta + k_alpha V_zeta) = " + fmt(residual));
  }

  // Empirical alignment weight at three evaluation points. The weight is a
  // parameter-only quantity, so the spread across points must be noise-level.
  {
    const double H = spec.horizon();
    const std::array<std::pair<double, double>, 3> points = {
        {{x, t}, {spec.x0 + 1.0, spec.t0 + 0.3 * H}, {spec.x0 + 2.0, spec.t0 + 0.7 * H}}};
    std::vector<double> low(size, 0.0), high(size, 0.0);
    std::vector<int> seen(size, 0);
    for (const auto& [px, pt] : points) {
      const CFTable d2 = cf_table(spec, CFKind::Delta, px, pt);
      const CFTable z2 = cf_table(spec, CFKind::Zeta, px, pt);
      const CFTable e2 = cf_table(spec, CFKind::Eta, px, pt);
      for (std::uint32_t mask = 1; mask < size; ++mask) {
        const double den = d2.values[mask] - z2.values[mask];
        if (std::abs(den) <= 1e-9) continue;
        const double k = (e2.values[mask] - z2.values[mask]) / den;
        if (seen[mask] == 0) {
          low[mask] = high[mask] = k;
        } else {
          low[mask] = std::min(low[mask], k);
          high[mask] = std::max(high[mask], k);
        }
        ++seen[mask];
      }
    }
    for (std::uint32_t mask = 1; mask < size; ++mask)
      if (seen[mask] >= 2 && high[mask] - low[mask] > 1e-12)
        add_violation(out, source, "alignment", "-", mask,
                      "empirical weight spread across evaluation points = " +
                          fmt(high[mask] - low[mask]));
  }

  std::array<Imputation, kBaseKinds.size()> sh;
  for (std::size_t k = 0; k < kBaseKinds.size(); ++k) sh[k] = shapley(tab[k]);
  const auto max_deviation = [n](const Imputation& a, const Imputation& b) {
    double dev = 0.0;
    for (int i = 0; i < n; ++i)
      dev = std::max(dev, std::abs(a.payoffs[static_cast<std::size_t>(i)] -
                                   b.payoffs[static_cast<std::size_t>(i)]));
    return dev;
  };
  const auto& sh_alpha = sh[static_cast<std::size_t>(CFKind::Alpha)];
  const auto& sh_delta = sh[static_cast<std::size_t>(CFKind::Delta)];
  const auto& sh_zeta = sh[static_cast<std::size_t>(CFKind::Zeta)];
  const auto& sh_eta = sh[static_cast<std::size_t>(CFKind::Eta)];
  if (max_deviation(sh_alpha, sh_delta) > tol)
    add_violation(out, source, "shapley", "alpha/delta", std::nullopt,
                  "coincidence deviation = " + fmt(max_deviation(sh_alpha, sh_delta)));
  if (max_deviation(sh_zeta, sh_eta) > tol)
    add_violation(out, source, "shapley", "zeta/eta", std::nullopt,
                  "coincidence deviation = " + fmt(max_deviation(sh_zeta, sh_eta)));
  const Imputation closed = shapley_closed_form(spec, ShapleyFamily::ZetaEta, x, t);
  if (max_deviation(closed, sh_zeta) > tol)
    add_violation(out, source, "shapley", "zeta", std::nullopt,
                  "closed form deviation = " + fmt(max_deviation(closed, sh_zeta)));
  if (max_deviation(closed, sh_eta) > tol)
    add_violation(out, source, "shapley", "eta", std::nullopt,
                  "closed form deviation = " + fmt(max_deviation(closed, sh_eta)));
  for (std::size_t k = 0; k < kBaseKinds.size(); ++k) {
    double total = 0.0;
    for (double v : sh[k].payoffs) total += v;
    const double residual = total - tab[k].values[full];
    if (std::abs(residual) > tol)
      add_violation(out, source, "shapley", std::string(to_string(kBaseKinds[k])), std::nullopt,
                    "efficiency residual = " + fmt(residual));
  }

  {
    const ControlProfile nash = nash_equilibrium(spec);
    const ControlProfile coop = cooperative_agreement(spec);
    const Trajectory nash_path = state_trajectory(spec, nash);
    const Trajectory coop_path = state_trajectory(spec, coop);
    const double H = spec.horizon();
    for (int g = 0; g <= 100; ++g) {
      // t0 + H can round past T for arbitrary endpoints; pin the last point.
      const double tg = g == 100 ? spec.T : spec.t0 + H * static_cast<double>(g) / 100.0;
      const double diff = nash_path.value(tg) - coop_path.value(tg);
      const double reference = pollution_gap(spec, tg);
      if (std::abs(diff - reference) > tol)
        add_violation(out, source, "pollution_gap", "-", std::nullopt,
                      "trajectory gap minus formula = " + fmt(diff - reference) +
                          " at t = " + fmt(tg));
      if (diff < -tol)
        add_violation(out, source, "pollution_gap", "-", std::nullopt,
                      "negative gap " + fmt(diff) + " at t = " + fmt(tg));
    }
  }
}

std::pair<std::string, int> run_check(const Run& run) {
  const GameSpec& spec = run.spec;
  const int n = spec.player_count();

  if (run.with_oracle && n > kOraclePlayerCap)
    fail("--oracle supports at most " + std::to_string(kOraclePlayerCap) + " players");
  if (run.perturb && run.perturb->kind == CFKind::EtaCover && n > kCoverPlayerCap)
    fail("--perturb on eta_cover needs at most " + std::to_string(kCoverPlayerCap) + " players");

  std::vector<Violation> violations;
  core_checks(spec, run.eval_state, run.eval_time, run.tol, run.perturb, "config", violations);

  std::optional<ValidationMatrix> matrix;
  if (run.with_oracle) {
    matrix = validate_against_closed_forms(spec, run.oracle_M, run.oracle_rel);
    for (const ValidationEntry& entry : matrix->entries)
      if (entry.rel_error > run.oracle_rel)
        add_violation(violations, "config", "oracle", std::string(to_string(entry.kind)),
                      entry.coalition.mask(),
                      "relative error = " + fmt(entry.rel_error) + " oracle = " +
                          fmt(entry.oracle_value) + " closed form = " + fmt(entry.closed_form));
  }

  if (run.sweep > 0) {
    std::mt19937_64 rng(run.seed);
    for (int j = 0; j < run.sweep; ++j) {
      const GameSpec sample = random_regular_spec(rng, 2 + j % 5);
      core_checks(sample, sample.x0, sample.t0, run.tol, std::nullopt,
                  "sweep:" + std::to_string(j), violations);
    }
  }

  std::vector<std::string> names = {"partial_order", "superadditivity", "cover",
                                    "reflection",    "alignment",       "shapley",
                                    "pollution_gap"};
  if (run.with_oracle) names.push_back("oracle");
  const auto count_check = [&](const std::string& name) {
    int count = 0;
    for (const Violation& v : violations)
      if (v.check == name) ++count;
    return count;
  };
  int sweep_count = 0;
  for (const Violation& v : violations)
    if (v.source.rfind("sweep:", 0) == 0) ++sweep_count;

  const bool pass = violations.empty();
  const bool cover_skipped = n > kCoverPlayerCap;

  std::string payload;
  if (run.format == "json") {
    JsonOut j;
    j.begin_object();
    j.field("command", "check");
    game_json(j, spec);
    eval_json(j, run);
    j.field("tolerance", run.tol);
    j.key("checks");
    j.begin_array();
    for (const std::string& name : names) {
      const int count = count_check(name);
      j.begin_object();
      j.field("name", name);
      j.field("pass", count == 0);
      j.field("violations", count);
      if (name == "cover" && cover_skipped) j.field("skipped", true);
      if (name == "oracle" && matrix) {
        j.field("grid", run.oracle_M);
        j.field("max_rel_error", matrix->max_rel_error);
        j.field("worst_kind", to_string(matrix->worst_kind));
        j.field("worst_mask", static_cast<int>(matrix->worst_coalition.mask()));
      }
      j.end_object();
    }
    if (run.sweep > 0) {
      j.begin_object();
      j.field("name", "sweep");
      j.field("pass", sweep_count == 0);
      j.field("violations", sweep_count);
      j.field("specs", run.sweep);
      j.key("seed");
      j.unsigned_integer(run.seed);
      j.end_object();
    }
    j.end_array();
    j.key("violations");
    j.begin_array();
    for (const Violation& v : violations) {
      j.begin_object();
      j.field("source", v.source);
      j.field("check", v.check);
      j.field("kind", v.kind);
      if (v.mask) {
        j.field("mask", static_cast<int>(*v.mask));
        j.field("members", v.members);
      }
      j.field("detail", v.detail);
      j.end_object();
    }
    j.end_array();
    j.field("pass", pass);
    j.end_object();
    payload = j.take();
  } else {
    CsvOut c;
    game_csv(c, spec);
    c.title("eval");
    c.row({"state", "time", "tolerance"});
    c.row({fmt(run.eval_state), fmt(run.eval_time), fmt(run.tol)});
    c.title("checks");
    c.row({"name", "pass", "violations"});
    for (const std::string& name : names) {
      const int count = count_check(name);
      c.row({name, count == 0 ? "true" : "false", std::to_string(count)});
    }
    if (run.sweep > 0)
      c.row({"sweep", sweep_count == 0 ? "true" : "false", std::to_string(sweep_count)});
    if (matrix) {
      c.title("oracle");
      c.row({"grid", "max_rel_error", "worst_kind", "worst_mask"});
      c.row({std::to_string(run.oracle_M), fmt(matrix->max_rel_error),
             std::string(to_string(matrix->worst_kind)),
             std::to_string(matrix->worst_coalition.mask())});
    }
    if (run.sweep > 0) {
      c.title("sweep");
      c.row({"specs", "seed", "violations"});
      c.row({std::to_string(run.sweep), std::to_string(run.seed), std::to_string(sweep_count)});
    }
    c.title("violations");
    c.row({"source", "check", "kind", "mask", "members", "detail"});
    for (const Violation& v : violations)
      c.row({v.source, v.check, v.kind, v.mask ? std::to_string(*v.mask) : "", v.members,
             v.detail});
    c.title("result");
    c.row({"pass"});
    c.row({pass ? "true" : "false"});
    payload = c.take();
  }
  return {std::move(payload), pass ? 0 : 1};
}

void emit(const Run& run, const std::string& payload) {
  if (!run.out_path) {
    std::fwrite(payload.data(), 1, payload.size(), stdout);
    return;
  }
  std::ofstream out(*run.out_path, std::ios::binary);
  if (!out) fail("cannot open output file \"" + *run.out_path + "\"");
  out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
  if (!out) fail("cannot write output file \"" + *run.out_path + "\"");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"characteristic functions of the pollution control game"};
  app.require_subcommand(1);

  std::string config_path;
  std::string kinds_arg;
  std::string format_arg;
  std::string out_arg;
  std::string perturb_arg;
  double at_time = 0.0, at_state = 0.0, tol_arg = 0.0;
  int grid_arg = 0, sweep_arg = 0;
  unsigned long long seed_arg = 0;
  bool distances_flag = false, oracle_flag = false;

  const auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("config", config_path, "JSON config file")->required();
    cmd->add_option("--format", format_arg, "output format: json or csv")
        ->check(CLI::IsMember({"json", "csv"}));
    cmd->add_option("--out", out_arg, "write the report to a file instead of stdout");
  };
  const auto add_eval = [&](CLI::App* cmd) {
    cmd->add_option("--at-time", at_time, "evaluation time (default t0)");
    cmd->add_option("--at-state", at_state, "evaluation stock level (default x0)");
  };

  CLI::App* solve = app.add_subcommand("solve", "equilibrium and cooperative solution");
  add_common(solve);

  CLI::App* cf = app.add_subcommand("cf", "characteristic function tables");
  add_common(cf);
  add_eval(cf);
  cf->add_option("--kinds", kinds_arg, "comma-separated kinds or \"all\"");
  cf->add_flag("--distances", distances_flag, "add bracket distances and alignment per row");

  CLI::App* shap = app.add_subcommand("shapley", "Shapley values and imputation geometry");
  add_common(shap);
  add_eval(shap);
  shap->add_option("--tol", tol_arg, "identity tolerance");

  CLI::App* check = app.add_subcommand("check", "verify the identities the game satisfies");
  add_common(check);
  add_eval(check);
  check->add_option("--tol", tol_arg, "identity tolerance");
  check->add_flag("--oracle", oracle_flag, "run the discretized-control validation matrix");
  check->add_option("--grid", grid_arg, "oracle grid steps (default 2000)");
  check->add_option("--seed", seed_arg, "seed for the random sweep");
  check->add_option("--sweep", sweep_arg, "number of random games to check");
  check->add_option("--perturb", perturb_arg, "")->group("");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  CLI::App* active = app.get_subcommands().front();
  const auto given = [active](const std::string& name) {
    const CLI::Option* opt = active->get_option_no_throw(name);
    return opt != nullptr && opt->count() > 0;
  };

  try {
    Run run = parse_config(config_path);
    if (given("--at-time")) run.eval_time = at_time;
    if (given("--at-state")) run.eval_state = at_state;
    if (given("--tol")) run.tol = tol_arg;
    if (given("--grid")) run.oracle_M = grid_arg;
    if (given("--seed")) run.seed = seed_arg;
    if (given("--sweep")) run.sweep = sweep_arg;
    if (given("--kinds")) run.kinds = parse_kind_list(split(kinds_arg, ','));
    if (given("--format")) run.format = format_arg;
    if (given("--out")) run.out_path = out_arg;
    if (given("--perturb")) run.perturb = parse_perturbation(perturb_arg);
    run.with_distances = distances_flag;
    run.with_oracle = oracle_flag;
    finalize(run);

    std::string payload;
    int code = 0;
    if (solve->parsed()) {
      payload = run_solve(run);
    } else if (cf->parsed()) {
      payload = run_cf(run);
    } else if (shap->parsed()) {
      payload = run_shapley(run);
    } else {
      auto result = run_check(run);
      payload = std::move(result.first);
      code = result.second;
    }
    emit(run, payload);
    return code;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
