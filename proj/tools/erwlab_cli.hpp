#pragma once

// Command-line front end: option parsing, JSON config files, seed
// resolution and structured output for every subcommand.

#include <charconv>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "erwlab/erwlab.hpp"

namespace erwlab::cli {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

enum class OutputFormat { Json, Csv };

struct RunConfig {
  std::string command;
  std::string env;
  Count x = 1000;
  std::vector<Count> xs;
  std::uint64_t steps = 10000;
  std::uint64_t trials = 1000;
  std::vector<Count> horizons{10000};
  double tail_eps = 1e-10;
  std::uint64_t master_seed = kDefaultSeed;
  std::optional<OutputFormat> format;  // each command has its own default
  unsigned threads = 1;
  std::string out;
  // criterion
  std::string ladder;
  std::optional<double> mu;
  double mu_se = 0.0;
  std::string alpha = "ln";
  // lyapunov
  std::string kind = "loglog";
  // bpm
  std::string offspring = "geometric:1.0";
  std::string migration = "const:0";
  // zsim
  std::string direction = "right";
  // walk
  std::uint64_t emit_positions = 0;
  std::string positions_out;
};

inline const std::vector<std::string>& commands() {
  static const std::vector<std::string> names{"classify", "analyze", "oracle",  "ladder", "criterion",
                                              "lyapunov", "bpm",     "walk",    "zsim"};
  return names;
}

inline std::string describe(const std::string& command) {
  if (command == "classify") return "closed-form diagnostics and recurrence/transience of an environment";
  if (command == "analyze") return "failure chain P, stationary law pi and block means E of a periodic stack";
  if (command == "oracle") return "exact law of U(x) by dynamic programming";
  if (command == "ladder") return "Monte Carlo rho(x), nu(x), theta(x) at several x";
  if (command == "criterion") return "verdict for a chain from mu and a ladder CSV";
  if (command == "lyapunov") return "Monte Carlo drift E[V(U(x))] - V(x)";
  if (command == "bpm") return "branching process with migration: fate and survival frequencies";
  if (command == "walk") return "direct simulation of the walk";
  if (command == "zsim") return "survival frequencies of the branching chain Z";
  return "";
}

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Help requests and argv errors, with the text CLI11 would print.
class ParseFailure : public std::runtime_error {
 public:
  ParseFailure(int code, std::string text) : std::runtime_error(text), code_(code) {}
  int code() const { return code_; }

 private:
  int code_;
};

inline std::string fmt_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

inline Json json_number(double v) {
  if (std::isfinite(v)) return v;
  return fmt_double(v);
}

inline Json json_optional(const std::optional<double>& v) { return v ? json_number(*v) : Json(nullptr); }

inline std::vector<Count> parse_count_list(const std::string& s) {
  std::vector<Count> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto comma = s.find(',', start);
    const auto piece = s.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    Count v = 0;
    auto [ptr, ec] = std::from_chars(piece.data(), piece.data() + piece.size(), v);
    if (ec != std::errc() || ptr != piece.data() + piece.size() || piece.empty())
      throw UsageError("malformed integer list '" + s + "'");
    out.push_back(v);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

inline std::uint64_t parse_seed(const std::string& s) {
  std::uint64_t v = 0;
  const bool hex = s.size() > 2 && s[0] == '0' && (s[1] == 'x' || s[1] == 'X');
  const char* b = s.data() + (hex ? 2 : 0);
  auto [ptr, ec] = std::from_chars(b, s.data() + s.size(), v, hex ? 16 : 10);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw UsageError("malformed seed '" + s + "'");
  return v;
}

inline OutputFormat parse_format(const std::string& s) {
  if (s == "json") return OutputFormat::Json;
  if (s == "csv") return OutputFormat::Csv;
  throw UsageError("unknown format '" + s + "' (json, csv)");
}

/// Applies the keys of a JSON config object. Unknown keys are rejected.
inline void apply_config(RunConfig& c, const Json& j) {
  if (!j.is_object()) throw UsageError("config file must hold a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& k = it.key();
    const Json& v = it.value();
    auto as_list = [&](const Json& val) {
      if (val.is_array()) return val.get<std::vector<Count>>();
      if (val.is_number_integer()) return std::vector<Count>{val.get<Count>()};
      return parse_count_list(val.get<std::string>());
    };
    if (k == "env") c.env = v.get<std::string>();
    else if (k == "x") c.x = v.get<Count>();
    else if (k == "xs") c.xs = as_list(v);
    else if (k == "steps") c.steps = v.get<std::uint64_t>();
    else if (k == "trials") c.trials = v.get<std::uint64_t>();
    else if (k == "horizon") c.horizons = as_list(v);
    else if (k == "tail_eps") c.tail_eps = v.get<double>();
    else if (k == "seed") c.master_seed = v.is_string() ? parse_seed(v.get<std::string>()) : v.get<std::uint64_t>();
    else if (k == "format") c.format = parse_format(v.get<std::string>());
    else if (k == "threads") c.threads = v.get<unsigned>();
    else if (k == "out") c.out = v.get<std::string>();
    else if (k == "ladder") c.ladder = v.get<std::string>();
    else if (k == "mu") c.mu = v.get<double>();
    else if (k == "mu_se") c.mu_se = v.get<double>();
    else if (k == "alpha") c.alpha = v.get<std::string>();
    else if (k == "kind") c.kind = v.get<std::string>();
    else if (k == "offspring") c.offspring = v.get<std::string>();
    else if (k == "migration") c.migration = v.get<std::string>();
    else if (k == "direction") c.direction = v.get<std::string>();
    else if (k == "emit_positions") c.emit_positions = v.get<std::uint64_t>();
    else if (k == "positions_out") c.positions_out = v.get<std::string>();
    else throw UsageError("unknown config key '" + k + "'");
  }
}

inline Json config_json(const RunConfig& c) {
  Json j;
  j["command"] = c.command;
  j["env"] = c.env;
  j["x"] = c.x;
  j["xs"] = c.xs;
  j["steps"] = c.steps;
  j["trials"] = c.trials;
  j["horizon"] = c.horizons;
  j["tail_eps"] = c.tail_eps;
  j["seed"] = c.master_seed;
  j["threads"] = c.threads;
  j["format"] = !c.format ? "default" : *c.format == OutputFormat::Json ? "json" : "csv";
  j["ladder"] = c.ladder;
  j["mu"] = c.mu ? Json(*c.mu) : Json(nullptr);
  j["mu_se"] = c.mu_se;
  j["alpha"] = c.alpha;
  j["kind"] = c.kind;
  j["offspring"] = c.offspring;
  j["migration"] = c.migration;
  j["direction"] = c.direction;
  j["emit_positions"] = c.emit_positions;
  return j;
}

/// Parses argv into a RunConfig. Precedence, lowest first: built-in
/// defaults, ERWLAB_SEED, --config file, explicit flags.
inline RunConfig parse_args(const std::vector<std::string>& args, const char* seed_env = std::getenv("ERWLAB_SEED")) {
  CLI::App app{"Excited random walk laboratory", "erwlab"};
  app.require_subcommand(1);
  RunConfig flags;
  std::string config_path, seed, format, xs, horizon;

  for (const auto& name : commands()) {
    auto* sub = app.add_subcommand(name, describe(name));
    sub->add_option("--config", config_path, "JSON file with option values; flags win");
    sub->add_option("--seed", seed, "master seed (decimal or 0x hex)");
    sub->add_option("--format", format, "json or csv");
    sub->add_option("--threads", flags.threads, "worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--out", flags.out, "output file instead of stdout");
    if (name != "criterion" && name != "bpm") sub->add_option("--env", flags.env, "environment literal");
    if (name == "oracle" || name == "lyapunov") sub->add_option("--x", flags.x);
    if (name == "oracle") sub->add_option("--tail-eps", flags.tail_eps);
    if (name == "ladder") sub->add_option("--xs", xs, "comma-separated increasing x values");
    if (name == "ladder" || name == "lyapunov" || name == "bpm" || name == "walk" || name == "zsim")
      sub->add_option("--trials", flags.trials);
    if (name == "bpm" || name == "zsim") sub->add_option("--horizon", horizon, "one or more comma-separated horizons");
    if (name == "walk") {
      sub->add_option("--steps", flags.steps);
      sub->add_option("--emit-positions", flags.emit_positions, "record the position every m steps");
      sub->add_option("--positions-out", flags.positions_out, "CSV file for emitted positions");
    }
    if (name == "criterion") {
      sub->add_option("--ladder", flags.ladder, "ladder CSV as written by the ladder command");
      sub->add_option("--mu", flags.mu);
      sub->add_option("--mu-se", flags.mu_se);
      sub->add_option("--alpha", flags.alpha, "ln, lnln or sqrtln");
    }
    if (name == "lyapunov") sub->add_option("--kind", flags.kind, "identity, reciprocal, loglog or invlog");
    if (name == "bpm") {
      sub->add_option("--offspring", flags.offspring, "geometric:m, poisson:m or tabular:w0,w1,...");
      sub->add_option("--migration", flags.migration, "const:k or tabular:offset:w0,w1,...");
    }
    if (name == "zsim") sub->add_option("--direction", flags.direction, "right or left");
  }

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    std::ostringstream o, er;
    const int code = app.exit(e, o, er);
    throw ParseFailure(code, o.str() + er.str());
  }

  CLI::App* sub = app.get_subcommands().front();
  RunConfig c;
  c.command = sub->get_name();
  if (seed_env && *seed_env) c.master_seed = parse_seed(seed_env);
  if (!config_path.empty()) {
    std::ifstream in(config_path);
    if (!in) throw UsageError("cannot read config file '" + config_path + "'");
    Json j;
    try {
      j = Json::parse(in);
    } catch (const Json::exception& e) {
      throw UsageError("config file is not valid JSON: " + std::string(e.what()));
    }
    apply_config(c, j);
  }
  auto given = [&](const char* opt) { return sub->get_option_no_throw(opt) && sub->count(opt) > 0; };
  if (given("--env")) c.env = flags.env;
  if (given("--x")) c.x = flags.x;
  if (given("--xs")) c.xs = parse_count_list(xs);
  if (given("--steps")) c.steps = flags.steps;
  if (given("--trials")) c.trials = flags.trials;
  if (given("--horizon")) c.horizons = parse_count_list(horizon);
  if (given("--tail-eps")) c.tail_eps = flags.tail_eps;
  if (given("--seed")) c.master_seed = parse_seed(seed);
  if (given("--format")) c.format = parse_format(format);
  if (given("--threads")) c.threads = flags.threads;
  if (given("--out")) c.out = flags.out;
  if (given("--ladder")) c.ladder = flags.ladder;
  if (given("--mu")) c.mu = flags.mu;
  if (given("--mu-se")) c.mu_se = flags.mu_se;
  if (given("--alpha")) c.alpha = flags.alpha;
  if (given("--kind")) c.kind = flags.kind;
  if (given("--offspring")) c.offspring = flags.offspring;
  if (given("--migration")) c.migration = flags.migration;
  if (given("--direction")) c.direction = flags.direction;
  if (given("--emit-positions")) c.emit_positions = flags.emit_positions;
  if (given("--positions-out")) c.positions_out = flags.positions_out;
  return c;
}

namespace detail {

inline CookieEnvironment require_env(const RunConfig& c) {
  if (c.env.empty()) throw UsageError(c.command + " needs --env");
  return parse_environment(c.env);
}

inline OutputFormat format_or(const RunConfig& c, OutputFormat fallback, bool csv_allowed = true) {
  const auto f = c.format.value_or(fallback);
  if (f == OutputFormat::Csv && !csv_allowed) throw UsageError(c.command + " only writes JSON");
  return f;
}

inline Json envelope(const RunConfig& c) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["command"] = c.command;
  j["config"] = config_json(c);
  return j;
}

inline void emit_json(std::ostream& out, const Json& j) { out << j.dump(2) << "\n"; }

inline EnsembleOptions ensemble(const RunConfig& c) { return {c.master_seed, c.threads}; }

inline void cmd_classify(const RunConfig& c, std::ostream& out) {
  format_or(c, OutputFormat::Json, false);
  const auto env = require_env(c);
  auto j = envelope(c);
  Json r;
  r["kind"] = to_string(env.kind());
  if (env.kind() == EnvKind::Periodic) {
    const auto d = periodic_diagnostics(env);
    r["p_bar"] = d.p_bar;
    r["mu"] = json_number(d.mu);
    r["rho"] = json_optional(d.rho);
    r["nu"] = json_optional(d.nu);
    r["theta_right"] = json_optional(d.theta_right);
    r["theta_left"] = json_optional(d.theta_left);
    r["delta"] = d.delta;
  } else {
    r["tail"] = env.tail_value();
    r["mu"] = json_number(asymptotic_mean(env));
    r["total_drift"] = env.declared_total_drift().value_or(env.prefix_drift());
  }
  r["classification"] = to_string(classify(env));
  j["result"] = r;
  emit_json(out, j);
}

inline void cmd_analyze(const RunConfig& c, std::ostream& out) {
  const auto f = format_or(c, OutputFormat::Csv);
  const auto env = require_env(c);
  const auto fc = failure_chain(env);
  if (f == OutputFormat::Csv) {
    out << "state,pi,E";
    for (std::size_t k = 1; k <= fc.M; ++k) out << ",P_" << k;
    out << "\n";
    for (std::size_t j = 0; j < fc.M; ++j) {
      out << (j + 1) << "," << fmt_double(fc.pi[j]) << "," << fmt_double(fc.E[j]);
      for (std::size_t k = 0; k < fc.M; ++k) out << "," << fmt_double(fc.P[j][k]);
      out << "\n";
    }
    return;
  }
  auto j = envelope(c);
  j["result"] = {{"M", fc.M}, {"pi", fc.pi}, {"E", fc.E}, {"P", fc.P}};
  emit_json(out, j);
}

inline void cmd_oracle(const RunConfig& c, std::ostream& out) {
  const auto f = format_or(c, OutputFormat::Csv);
  const auto env = require_env(c);
  const auto d = exact_U_distribution(env, c.x, c.tail_eps);
  if (f == OutputFormat::Csv) {
    out << "success_count,probability\n";
    for (std::size_t i = 0; i < d.mass.size(); ++i)
      out << d.support_offset + static_cast<Count>(i) << "," << fmt_double(d.mass[i]) << "\n";
    return;
  }
  auto j = envelope(c);
  j["result"] = {{"x", d.x},
                 {"support_offset", d.support_offset},
                 {"tail_bound", d.tail_bound},
                 {"horizon", d.horizon},
                 {"mass", d.mass}};
  emit_json(out, j);
}

inline void write_ladder_csv(std::ostream& out, const LadderStats& l) {
  out << "x,trials,rho_hat,nu_hat,theta_hat,se_rho,se_nu,se_theta\n";
  for (const auto& e : l.entries)
    out << e.x << "," << e.trials << "," << fmt_double(e.rho_hat) << "," << fmt_double(e.nu_hat) << ","
        << fmt_double(e.theta_hat) << "," << fmt_double(e.se_rho) << "," << fmt_double(e.se_nu) << ","
        << fmt_double(e.se_theta) << "\n";
}

inline LadderStats read_ladder_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw UsageError("ladder file is empty");
  auto split = [](const std::string& s) {
    std::vector<std::string> parts;
    std::stringstream ss(s);
    std::string p;
    while (std::getline(ss, p, ',')) parts.push_back(p);
    return parts;
  };
  const auto header = split(line);
  auto col = [&](const std::string& name) -> std::optional<std::size_t> {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return i;
    return std::nullopt;
  };
  const auto cx = col("x"), ct = col("theta_hat");
  if (!cx || !ct) throw UsageError("ladder file needs x and theta_hat columns");
  const auto ctr = col("trials"), crho = col("rho_hat"), cnu = col("nu_hat"), cserho = col("se_rho"),
             csenu = col("se_nu"), cse = col("se_theta");
  LadderStats l;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    const auto v = split(line);
    if (v.size() != header.size()) throw UsageError("ladder file row " + std::to_string(row) + " has the wrong width");
    auto num = [&](std::optional<std::size_t> c) { return c ? std::stod(v[*c]) : 0.0; };
    LadderEntry e;
    e.x = std::stoll(v[*cx]);
    e.trials = ctr ? std::stoull(v[*ctr]) : 1;
    e.theta_hat = num(ct);
    e.rho_hat = num(crho);
    e.nu_hat = num(cnu);
    e.se_rho = num(cserho);
    e.se_nu = num(csenu);
    e.se_theta = num(cse);
    l.entries.push_back(e);
  }
  return l;
}

inline void cmd_ladder(const RunConfig& c, std::ostream& out) {
  const auto f = format_or(c, OutputFormat::Csv);
  const auto env = require_env(c);
  if (c.xs.empty()) throw UsageError("ladder needs --xs");
  const auto l = empirical_ladder(env, c.xs, c.trials, ensemble(c));
  if (f == OutputFormat::Csv) {
    write_ladder_csv(out, l);
    return;
  }
  auto j = envelope(c);
  Json rows = Json::array();
  for (const auto& e : l.entries)
    rows.push_back({{"x", e.x},
                    {"trials", e.trials},
                    {"rho_hat", e.rho_hat},
                    {"nu_hat", e.nu_hat},
                    {"theta_hat", e.theta_hat},
                    {"se_rho", e.se_rho},
                    {"se_nu", e.se_nu},
                    {"se_theta", e.se_theta}});
  j["result"] = {{"mu", asymptotic_mean(env)}, {"entries", rows}};
  emit_json(out, j);
}

inline void cmd_criterion(const RunConfig& c, std::ostream& out) {
  format_or(c, OutputFormat::Json, false);
  if (c.ladder.empty()) throw UsageError("criterion needs --ladder");
  if (!c.mu) throw UsageError("criterion needs --mu");
  std::ifstream in(c.ladder);
  if (!in) throw UsageError("cannot read ladder file '" + c.ladder + "'");
  CriterionInput input;
  input.mu = *c.mu;
  input.mu_se = c.mu_se;
  input.ladder = read_ladder_csv(in);
  input.alpha = parse_alpha_schedule(c.alpha);
  const auto v = classify_chain(input);
  auto j = envelope(c);
  Json margins = Json::array();
  for (const auto& m : v.margins)
    margins.push_back({{"x", m.x},
                       {"theta", m.theta},
                       {"se_theta", m.se_theta},
                       {"lower_band", m.lower},
                       {"upper_band", m.upper},
                       {"above_upper", m.above_upper},
                       {"below_lower", m.below_lower}});
  j["result"] = {{"verdict", to_string(v.value)}, {"branch", v.branch}, {"rationale", v.rationale}, {"margins", margins}};
  emit_json(out, j);
}

inline void cmd_lyapunov(const RunConfig& c, std::ostream& out) {
  format_or(c, OutputFormat::Json, false);
  const auto env = require_env(c);
  const auto kind = parse_lyapunov_kind(c.kind);
  const auto d = lyapunov_drift(StepSampler(env), kind, c.x, c.trials, ensemble(c));
  auto j = envelope(c);
  j["result"] = {{"kind", to_string(kind)}, {"x", c.x}, {"V_x", d.v_at_x}, {"drift", d.drift}, {"se", d.se},
                 {"trials", d.trials}};
  emit_json(out, j);
}

inline void cmd_bpm(const RunConfig& c, std::ostream& out) {
  format_or(c, OutputFormat::Json, false);
  const BpmModel model{parse_offspring(c.offspring), parse_migration(c.migration)};
  const auto points = simulate_bpm(model, c.horizons, c.trials, ensemble(c));
  auto j = envelope(c);
  Json survival = Json::array();
  for (const auto& p : points) survival.push_back({{"horizon", p.horizon}, {"frequency", p.frequency}, {"se", p.se}});
  j["result"] = {{"mu", model.mu()},
                 {"nu", model.nu()},
                 {"rho", model.rho()},
                 {"theta", json_optional(model.theta())},
                 {"classification", to_string(classify_bpm(model))},
                 {"survival", survival}};
  emit_json(out, j);
}

inline void cmd_walk(const RunConfig& c, std::ostream& out) {
  const auto f = format_or(c, OutputFormat::Csv);
  const auto env = require_env(c);
  if (c.emit_positions && f == OutputFormat::Csv && c.positions_out.empty())
    throw UsageError("--emit-positions with CSV output needs --positions-out");
  if (!c.positions_out.empty() && !c.emit_positions) throw UsageError("--positions-out needs --emit-positions");
  WalkOptions wo;
  wo.emit_every = c.emit_positions;
  const auto traces = run_walks(env, c.steps, c.trials, ensemble(c), wo);
  if (!c.positions_out.empty()) {
    std::ofstream pos(c.positions_out);
    if (!pos) throw UsageError("cannot write '" + c.positions_out + "'");
    pos << "trial,step,position\n";
    for (std::size_t t = 0; t < traces.size(); ++t)
      for (std::size_t i = 0; i < traces[t].positions.size(); ++i)
        pos << t << "," << i * c.emit_positions << "," << traces[t].positions[i] << "\n";
  }
  if (f == OutputFormat::Csv) {
    out << "trial,steps,final_position,max_abs_position,returns_to_origin,first_hit_minus1,distinct_sites\n";
    for (std::size_t t = 0; t < traces.size(); ++t) {
      const auto& w = traces[t];
      out << t << "," << w.steps << "," << w.final_position << "," << w.max_abs_position << ","
          << w.returns_to_origin << "," << (w.first_hit_minus1 ? std::to_string(*w.first_hit_minus1) : "") << ","
          << w.distinct_sites << "\n";
    }
    return;
  }
  const auto s = summarize_walks(traces);
  auto j = envelope(c);
  Json per = Json::array();
  for (const auto& w : traces) {
    Json row{{"final_position", w.final_position},
             {"max_abs_position", w.max_abs_position},
             {"returns_to_origin", w.returns_to_origin},
             {"first_hit_minus1", w.first_hit_minus1 ? Json(*w.first_hit_minus1) : Json(nullptr)},
             {"distinct_sites", w.distinct_sites}};
    if (c.emit_positions) row["positions"] = w.positions;
    per.push_back(row);
  }
  j["result"] = {{"summary",
                  {{"trials", s.trials},
                   {"final_mean", s.final_position.mean},
                   {"final_se", s.final_position.se},
                   {"final_q10", s.final_q10},
                   {"final_median", s.final_median},
                   {"final_q90", s.final_q90},
                   {"fraction_positive", s.fraction_positive},
                   {"returns_mean", s.returns_to_origin.mean},
                   {"returns_median", s.returns_median},
                   {"hit_minus1_frequency", s.hit_minus1_frequency}}},
                 {"trials", per}};
  emit_json(out, j);
}

inline void cmd_zsim(const RunConfig& c, std::ostream& out) {
  format_or(c, OutputFormat::Json, false);
  const auto env = require_env(c);
  Direction dir;
  if (c.direction == "right") dir = Direction::Right;
  else if (c.direction == "left") dir = Direction::Left;
  else throw UsageError("direction must be right or left");
  const auto points = z_survival(env, dir, c.horizons, c.trials, ensemble(c));
  auto j = envelope(c);
  Json survival = Json::array();
  for (const auto& p : points) survival.push_back({{"horizon", p.horizon}, {"frequency", p.frequency}, {"se", p.se}});
  j["result"] = {{"direction", to_string(dir)}, {"survival", survival}};
  emit_json(out, j);
}

}  // namespace detail

/// Runs exactly one subcommand and writes its artifact to `out`.
inline void dispatch(const RunConfig& c, std::ostream& out) {
  if (c.threads < 1) throw UsageError("threads must be >= 1");
  if (c.command == "classify") return detail::cmd_classify(c, out);
  if (c.command == "analyze") return detail::cmd_analyze(c, out);
  if (c.command == "oracle") return detail::cmd_oracle(c, out);
  if (c.command == "ladder") return detail::cmd_ladder(c, out);
  if (c.command == "criterion") return detail::cmd_criterion(c, out);
  if (c.command == "lyapunov") return detail::cmd_lyapunov(c, out);
  if (c.command == "bpm") return detail::cmd_bpm(c, out);
  if (c.command == "walk") return detail::cmd_walk(c, out);
  if (c.command == "zsim") return detail::cmd_zsim(c, out);
  throw UsageError("unknown command '" + c.command + "'");
}

/// Whole program: parse, dispatch, route output. Returns the exit status.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
               const char* seed_env = std::getenv("ERWLAB_SEED")) {
  RunConfig c;
  try {
    c = parse_args(args, seed_env);
  } catch (const ParseFailure& e) {
    (e.code() == 0 ? out : err) << e.what();
    return e.code() == 0 ? 0 : 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  try {
    if (c.out.empty()) {
      dispatch(c, out);
    } else {
      std::ostringstream buf;
      dispatch(c, buf);
      std::ofstream f(c.out);
      if (!f) throw UsageError("cannot write '" + c.out + "'");
      f << buf.str();
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace erwlab::cli
