#pragma once

// Environment literals, the single text entry point for environments:
//
//   literal  := "periodic:" values
//             | "bounded:"  values
//             | "tail:"     values "@" value [ ";drift=" real ]
//   values   := value ("," value)*
//   value    := decimal | integer "/" integer | real-with-exponent
//
// Decimals and fractions are kept exactly as well, so the critical case
// (average cookie exactly 1/2) is decided without rounding.

#include <charconv>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "erwlab/environment.hpp"

namespace erwlab {

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

inline std::optional<std::int64_t> parse_int(std::string_view s) {
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

struct ParsedValue {
  double value;
  std::optional<Ratio> exact;
};

inline ParsedValue parse_value(std::string_view raw) {
  const auto s = trim(raw);
  if (s.empty()) throw std::invalid_argument("empty value in environment literal");
  if (auto slash = s.find('/'); slash != std::string_view::npos) {
    auto n = parse_int(s.substr(0, slash));
    auto d = parse_int(s.substr(slash + 1));
    if (!n || !d || *d == 0) throw std::invalid_argument("malformed fraction '" + std::string(s) + "'");
    Ratio r(*n, *d);
    return {r.value(), r};
  }
  // Plain decimal: digits with at most one point.
  const bool plain = s.find_first_not_of("0123456789.") == std::string_view::npos &&
                     s.find('.') == s.rfind('.');
  if (plain) {
    const auto dot = s.find('.');
    std::string digits(s.substr(0, dot));
    std::string frac = dot == std::string_view::npos ? "" : std::string(s.substr(dot + 1));
    while (!frac.empty() && frac.back() == '0') frac.pop_back();
    if (digits.empty()) digits = "0";
    if (digits.size() + frac.size() <= 18) {
      std::int64_t den = 1;
      for (std::size_t i = 0; i < frac.size(); ++i) den *= 10;
      auto n = parse_int(digits + frac);
      if (!n) throw std::invalid_argument("malformed number '" + std::string(s) + "'");
      Ratio r(*n, den);
      return {r.value(), r};
    }
  }
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw std::invalid_argument("malformed number '" + std::string(s) + "'");
  return {v, std::nullopt};
}

inline std::vector<ParsedValue> parse_values(std::string_view s) {
  std::vector<ParsedValue> out;
  while (true) {
    const auto comma = s.find(',');
    out.push_back(parse_value(s.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    s.remove_prefix(comma + 1);
  }
  return out;
}

}  // namespace detail

inline CookieEnvironment parse_environment(std::string_view literal) {
  const auto colon = literal.find(':');
  if (colon == std::string_view::npos)
    throw std::invalid_argument("environment literal needs a kind prefix, e.g. periodic:0.9,0.1");
  const auto kind = detail::trim(literal.substr(0, colon));
  auto body = literal.substr(colon + 1);

  std::optional<double> drift;
  std::optional<detail::ParsedValue> tail;
  if (kind == "tail") {
    if (auto semi = body.find(';'); semi != std::string_view::npos) {
      auto opt = detail::trim(body.substr(semi + 1));
      if (opt.substr(0, 6) != "drift=") throw std::invalid_argument("unknown tail option '" + std::string(opt) + "'");
      drift = detail::parse_value(opt.substr(6)).value;
      body = body.substr(0, semi);
    }
    const auto at = body.find('@');
    if (at == std::string_view::npos) throw std::invalid_argument("tail literal needs '@tail_value'");
    tail = detail::parse_value(body.substr(at + 1));
    body = body.substr(0, at);
  } else if (kind != "periodic" && kind != "bounded") {
    throw std::invalid_argument("unknown environment kind '" + std::string(kind) + "'");
  }

  const auto values = detail::parse_values(body);
  std::vector<double> p;
  std::vector<Ratio> exact;
  bool all_exact = true;
  for (const auto& v : values) {
    p.push_back(v.value);
    if (v.exact) exact.push_back(*v.exact);
    else all_exact = false;
  }

  CookieEnvironment env = kind == "periodic" ? make_periodic(p)
                          : kind == "bounded" ? make_bounded(p)
                                              : CookieEnvironment::custom_tail(p, tail->value, drift);
  if (all_exact && (!tail || tail->exact)) {
    env = env.with_exact(std::move(exact), tail ? tail->exact : std::nullopt);
  }
  return env;
}

/// Inverse of parse_environment up to number formatting.
inline std::string format_environment(const CookieEnvironment& env) {
  std::string out = std::string(to_string(env.kind())) + ":";
  auto fmt = [](double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
  };
  const auto p = env.params();
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (i) out += ",";
    out += fmt(p[i]);
  }
  if (env.kind() == EnvKind::CustomTail) {
    out += "@" + fmt(env.tail_value());
    if (env.declared_total_drift()) out += ";drift=" + fmt(*env.declared_total_drift());
  }
  return out;
}

}  // namespace erwlab
