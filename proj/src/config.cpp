#include "ncps/config.hpp"

#include "json.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>

namespace ncps {

namespace {

std::string join(const std::vector<std::string>& parts, const std::string& sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::optional<double> to_double(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

template <typename Int>
std::optional<Int> to_int(std::string_view s) {
  s = trim(s);
  Int v{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

std::optional<std::vector<double>> to_list(std::string_view s) {
  s = trim(s);
  if (s.size() >= 2 && s.front() == '(' && s.back() == ')') s = s.substr(1, s.size() - 2);
  std::vector<double> out;
  if (trim(s).empty()) return out;
  std::size_t start = 0;
  while (true) {
    const auto comma = s.find(',', start);
    const auto item = to_double(s.substr(start, comma == std::string_view::npos ? s.npos : comma - start));
    if (!item) return std::nullopt;
    out.push_back(*item);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

const std::set<std::string> kGlobalKeys = {
    "system", "p",       "x0",        "T",            "dt",                   "scheme", "gap_floor",
    "hybrid_switch_gap", "adaptive",  "n_paths",      "seed",                 "sample_every",
    "max_refinement_depth", "output", "format"};

const std::map<std::string, std::set<std::string>> kSystemKeys = {
    {"dyson", {"gamma"}},
    {"nearest_neighbor", {"gamma"}},
    {"hyperbolic", {"gamma"}},
    {"beta_wishart", {"alpha", "beta"}},
    {"beta_wishart_abs", {"alpha", "beta"}},
    {"jacobi", {"q", "r", "beta"}},
    {"general_psi", {"psi", "gamma"}},
    {"custom", {"sigma", "b", "H", "domain"}},
};

std::set<std::string> all_system_keys() {
  std::set<std::string> out;
  for (const auto& [name, keys] : kSystemKeys) out.insert(keys.begin(), keys.end());
  return out;
}

Domain system_domain(const RunConfig& cfg) {
  if (cfg.system == "custom") return cfg.domain;
  if (cfg.system == "beta_wishart") return Domain::HalfLine;
  if (cfg.system == "jacobi") return Domain::UnitInterval;
  return Domain::Real;
}

std::string domain_keyword(Domain d) {
  switch (d) {
    case Domain::Real: return "real";
    case Domain::HalfLine: return "half_line";
    case Domain::UnitInterval: return "unit_interval";
  }
  return "real";
}

std::string scheme_keyword(Scheme s) {
  switch (s) {
    case Scheme::Direct: return "direct";
    case Scheme::PolySpace: return "poly";
    case Scheme::Hybrid: return "hybrid";
  }
  return "hybrid";
}

std::vector<double> resolve_x0(const InitialState& s, int p) {
  std::vector<double> x(static_cast<std::size_t>(p), 0.0);
  switch (s.kind) {
    case InitialState::Kind::Zero: break;
    case InitialState::Kind::Equispaced:
      for (int i = 0; i < p; ++i) x[static_cast<std::size_t>(i)] = p == 1 ? s.a : s.a + (s.b - s.a) * i / (p - 1);
      break;
    case InitialState::Kind::List: x = s.values; break;
  }
  return x;
}

std::string shortest(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> errors)
    : std::runtime_error("invalid configuration: " + join(errors, "; ")), errors_(std::move(errors)) {}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

RunConfig parse_config(std::string_view text) {
  std::vector<std::string> errors;
  std::map<std::string, std::string> kv;

  std::istringstream in{std::string(text)};
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      errors.push_back("line " + std::to_string(line_no) + ": expected 'key = value'");
      continue;
    }
    const std::string key(trim(line.substr(0, eq)));
    const std::string value(trim(line.substr(eq + 1)));
    if (key.empty()) {
      errors.push_back("line " + std::to_string(line_no) + ": empty key");
      continue;
    }
    if (!kv.emplace(key, value).second) errors.push_back(key + ": duplicate key");
  }

  RunConfig cfg;
  const auto get = [&](const std::string& key) -> const std::string* {
    const auto it = kv.find(key);
    return it == kv.end() ? nullptr : &it->second;
  };
  const auto number = [&](const std::string& key, std::optional<double> fallback) -> std::optional<double> {
    const std::string* v = get(key);
    if (!v) {
      if (!fallback) errors.push_back(key + ": required");
      return fallback;
    }
    const auto d = to_double(*v);
    if (!d || !std::isfinite(*d)) {
      errors.push_back(key + ": expected a finite number, got '" + *v + "'");
      return std::nullopt;
    }
    return d;
  };
  const auto required_string = [&](const std::string& key) -> std::string {
    const std::string* v = get(key);
    if (!v || v->empty()) {
      errors.push_back(key + ": required");
      return {};
    }
    return *v;
  };

  // Keys valid for the chosen system.
  const auto* sys = get("system");
  std::set<std::string> allowed = kGlobalKeys;
  if (!sys) {
    errors.push_back("system: required");
  } else if (const auto it = kSystemKeys.find(*sys); it == kSystemKeys.end()) {
    errors.push_back("system: unknown system '" + *sys + "'");
  } else {
    cfg.system = *sys;
    allowed.insert(it->second.begin(), it->second.end());
  }
  const auto known_elsewhere = all_system_keys();
  for (const auto& [key, value] : kv) {
    if (allowed.count(key)) continue;
    if (known_elsewhere.count(key) && !cfg.system.empty())
      errors.push_back(key + ": not a parameter of system '" + cfg.system + "'");
    else if (!known_elsewhere.count(key))
      errors.push_back(key + ": unknown key");
  }

  // Particle count.
  if (const std::string* v = get("p")) {
    const auto p = to_int<int>(*v);
    if (!p || *p < 1) errors.push_back("p: expected an integer >= 1, got '" + *v + "'");
    else cfg.p = *p;
  } else {
    errors.push_back("p: required");
  }

  // System parameters.
  if (!cfg.system.empty()) {
    if (cfg.system == "dyson" || cfg.system == "nearest_neighbor" || cfg.system == "hyperbolic") {
      const auto g = number("gamma", std::nullopt);
      if (g) {
        if (cfg.system == "dyson") cfg.preset = DysonCepa{*g};
        else if (cfg.system == "nearest_neighbor") cfg.preset = NearestNeighbor{*g};
        else cfg.preset = Hyperbolic{*g};
      }
    } else if (cfg.system == "beta_wishart" || cfg.system == "beta_wishart_abs") {
      const auto a = number("alpha", std::nullopt);
      const auto b = number("beta", std::nullopt);
      if (a && b) {
        if (cfg.system == "beta_wishart") cfg.preset = BetaWishart{*a, *b};
        else cfg.preset = BetaWishartAbs{*a, *b};
      }
    } else if (cfg.system == "jacobi") {
      const auto q = number("q", std::nullopt);
      const auto r = number("r", std::nullopt);
      const auto b = number("beta", std::nullopt);
      if (q && r && b) cfg.preset = Jacobi{*q, *r, *b};
    } else if (cfg.system == "general_psi") {
      const auto g = number("gamma", std::nullopt);
      const std::string psi = required_string("psi");
      if (g && !psi.empty()) {
        try {
          (void)Expression::parse(psi, {"u"});
          cfg.preset = GeneralPsi{psi, *g};
        } catch (const ExpressionError& e) {
          errors.push_back(std::string("psi: ") + e.what());
        }
      }
    } else if (cfg.system == "custom") {
      cfg.sigma_expr = required_string("sigma");
      cfg.b_expr = required_string("b");
      cfg.H_expr = required_string("H");
      const auto check_expr = [&](const std::string& key, const std::string& src, std::vector<std::string> vars) {
        if (src.empty()) return;
        try {
          (void)Expression::parse(src, std::move(vars));
        } catch (const ExpressionError& e) {
          errors.push_back(key + ": " + e.what());
        }
      };
      check_expr("sigma", cfg.sigma_expr, {"x"});
      check_expr("b", cfg.b_expr, {"x"});
      check_expr("H", cfg.H_expr, {"x", "y"});
      if (const std::string* d = get("domain")) {
        if (*d == "real") cfg.domain = Domain::Real;
        else if (*d == "half_line") cfg.domain = Domain::HalfLine;
        else if (*d == "unit_interval") cfg.domain = Domain::UnitInterval;
        else errors.push_back("domain: expected real, half_line or unit_interval, got '" + *d + "'");
      }
    }
  }

  // Horizon and step control.
  if (const auto T = number("T", std::nullopt)) {
    if (*T <= 0.0) errors.push_back("T: must be > 0");
    else cfg.T = *T;
  }
  if (const auto dt = number("dt", cfg.ctl.dt_base)) {
    if (*dt <= 0.0) errors.push_back("dt: must be > 0");
    else cfg.ctl.dt_base = *dt;
  }
  if (const std::string* v = get("scheme")) {
    if (*v == "direct") cfg.ctl.scheme = Scheme::Direct;
    else if (*v == "poly") cfg.ctl.scheme = Scheme::PolySpace;
    else if (*v == "hybrid") cfg.ctl.scheme = Scheme::Hybrid;
    else errors.push_back("scheme: expected direct, poly or hybrid, got '" + *v + "'");
  }
  if (const auto g = number("gap_floor", cfg.ctl.gap_floor)) {
    if (*g <= 0.0) errors.push_back("gap_floor: must be > 0");
    else cfg.ctl.gap_floor = *g;
  }
  if (const std::string* v = get("hybrid_switch_gap"); v && *v != "auto") {
    const auto g = to_double(*v);
    if (!g || !std::isfinite(*g) || *g <= 0.0) errors.push_back("hybrid_switch_gap: expected 'auto' or a number > 0");
    else cfg.ctl.hybrid_switch_gap = *g;
  }
  if (const std::string* v = get("adaptive")) {
    if (*v == "true") cfg.ctl.adaptive = true;
    else if (*v == "false") cfg.ctl.adaptive = false;
    else errors.push_back("adaptive: expected true or false, got '" + *v + "'");
  }
  if (const std::string* v = get("n_paths")) {
    const auto n = to_int<long long>(*v);
    if (!n || *n < 1) errors.push_back("n_paths: expected an integer >= 1, got '" + *v + "'");
    else cfg.n_paths = static_cast<std::size_t>(*n);
  }
  if (const std::string* v = get("seed")) {
    const auto s = to_int<std::uint64_t>(*v);
    if (!s) errors.push_back("seed: expected a non-negative 64-bit integer, got '" + *v + "'");
    else {
      cfg.seed = *s;
      cfg.seed_defaulted = false;
    }
  }
  if (const std::string* v = get("sample_every")) {
    const auto k = to_int<int>(*v);
    if (!k || *k < 1) errors.push_back("sample_every: expected an integer >= 1, got '" + *v + "'");
    else cfg.ctl.sample_every = *k;
  }
  if (const std::string* v = get("max_refinement_depth")) {
    const auto k = to_int<int>(*v);
    if (!k || *k < 0 || *k > 19) errors.push_back("max_refinement_depth: expected an integer in [0, 19]");
    else cfg.ctl.max_refinement_depth = *k;
  }
  if (const std::string* v = get("output")) cfg.output = *v;
  if (const std::string* v = get("format")) {
    if (*v == "csv" || *v == "json") cfg.format = *v;
    else errors.push_back("format: expected csv or json, got '" + *v + "'");
  }
  if (cfg.ctl.scheme == Scheme::Hybrid && std::isfinite(cfg.ctl.hybrid_switch_gap) &&
      cfg.ctl.hybrid_switch_gap <= cfg.ctl.gap_floor)
    errors.push_back("hybrid_switch_gap: must exceed gap_floor");

  // Initial state.
  if (const std::string* v = get("x0")) {
    const std::string_view s = *v;
    if (s == "zero") {
      cfg.x0.kind = InitialState::Kind::Zero;
    } else if (s.rfind("equispaced", 0) == 0) {
      const auto list = to_list(s.substr(std::string_view("equispaced").size()));
      if (!list || list->size() != 2 || !std::isfinite((*list)[0]) || !std::isfinite((*list)[1]) ||
          (*list)[1] < (*list)[0]) {
        errors.push_back("x0: expected equispaced(a, b) with finite a <= b");
      } else {
        cfg.x0.kind = InitialState::Kind::Equispaced;
        cfg.x0.a = (*list)[0];
        cfg.x0.b = (*list)[1];
      }
    } else {
      const auto list = to_list(s);
      if (!list) {
        errors.push_back("x0: expected 'zero', 'equispaced(a, b)' or a list of numbers");
      } else {
        cfg.x0.kind = InitialState::Kind::List;
        cfg.x0.values = *list;
      }
    }
  } else {
    errors.push_back("x0: required");
  }
  if (cfg.p >= 1 && get("x0")) {
    const auto x = resolve_x0(cfg.x0, cfg.p);
    if (cfg.x0.kind == InitialState::Kind::List && static_cast<int>(x.size()) != cfg.p) {
      errors.push_back("x0: has " + std::to_string(x.size()) + " entries, expected p = " + std::to_string(cfg.p));
    } else if (!x.empty()) {
      if (!std::all_of(x.begin(), x.end(), [](double v) { return std::isfinite(v); }))
        errors.push_back("x0: entries must be finite");
      else if (!std::is_sorted(x.begin(), x.end()))
        errors.push_back("x0: entries must be ascending");
      const Domain d = system_domain(cfg);
      const Interval box = domain_interval(d);
      if (!std::all_of(x.begin(), x.end(), [&](double v) { return box.contains(v); }))
        errors.push_back("x0: outside the " + to_string(d) + " state space of system '" + cfg.system + "'");
    }
  }

  if (!errors.empty()) throw ConfigError(std::move(errors));
  return cfg;
}

CoefficientSet build_system(const RunConfig& cfg) {
  if (cfg.system == "custom") return build_custom(cfg.p, cfg.sigma_expr, cfg.b_expr, cfg.H_expr, cfg.domain);
  if (!cfg.preset) throw std::invalid_argument("build_system: configuration has no system");
  return build_preset(*cfg.preset, cfg.p);
}

ChamberPoint initial_state(const RunConfig& cfg) {
  const auto x = resolve_x0(cfg.x0, cfg.p);
  return ChamberPoint(Eigen::Map<const VectorXd>(x.data(), static_cast<Index>(x.size())));
}

std::string echo(const RunConfig& cfg) {
  std::ostringstream out;
  const auto line = [&](const std::string& k, const std::string& v) { out << k << " = " << v << '\n'; };
  line("system", cfg.system);
  if (cfg.preset) {
    std::visit(
        [&](const auto& pr) {
          using P = std::decay_t<decltype(pr)>;
          if constexpr (std::is_same_v<P, DysonCepa> || std::is_same_v<P, NearestNeighbor> ||
                        std::is_same_v<P, Hyperbolic>) {
            line("gamma", shortest(pr.gamma));
          } else if constexpr (std::is_same_v<P, BetaWishart> || std::is_same_v<P, BetaWishartAbs>) {
            line("alpha", shortest(pr.alpha));
            line("beta", shortest(pr.beta));
          } else if constexpr (std::is_same_v<P, Jacobi>) {
            line("q", shortest(pr.q));
            line("r", shortest(pr.r));
            line("beta", shortest(pr.beta));
          } else {
            line("psi", pr.psi);
            line("gamma", shortest(pr.gamma));
          }
        },
        *cfg.preset);
  } else if (cfg.system == "custom") {
    line("sigma", cfg.sigma_expr);
    line("b", cfg.b_expr);
    line("H", cfg.H_expr);
    line("domain", domain_keyword(cfg.domain));
  }
  line("p", std::to_string(cfg.p));
  switch (cfg.x0.kind) {
    case InitialState::Kind::Zero: line("x0", "zero"); break;
    case InitialState::Kind::Equispaced:
      line("x0", "equispaced(" + shortest(cfg.x0.a) + ", " + shortest(cfg.x0.b) + ")");
      break;
    case InitialState::Kind::List: {
      std::vector<std::string> parts;
      for (double v : cfg.x0.values) parts.push_back(shortest(v));
      line("x0", "(" + join(parts, ", ") + ")");
      break;
    }
  }
  line("T", shortest(cfg.T));
  line("dt", shortest(cfg.ctl.dt_base));
  line("scheme", scheme_keyword(cfg.ctl.scheme));
  line("gap_floor", shortest(cfg.ctl.gap_floor));
  line("hybrid_switch_gap", std::isfinite(cfg.ctl.hybrid_switch_gap) ? shortest(cfg.ctl.hybrid_switch_gap) : "auto");
  line("adaptive", cfg.ctl.adaptive ? "true" : "false");
  line("n_paths", std::to_string(cfg.n_paths));
  line("seed", std::to_string(cfg.seed));
  line("sample_every", std::to_string(cfg.ctl.sample_every));
  line("max_refinement_depth", std::to_string(cfg.ctl.max_refinement_depth));
  if (!cfg.format.empty()) line("format", cfg.format);
  return out.str();
}

std::string extract_echo(std::string_view contents) {
  const auto first = contents.find_first_not_of(" \t\r\n");
  if (first != std::string_view::npos && contents[first] == '{') {
    const auto j = nlohmann::json::parse(contents);
    if (!j.contains("config_echo")) throw std::invalid_argument("extract_echo: JSON has no config_echo field");
    return j.at("config_echo").get<std::string>();
  }
  std::string out;
  std::istringstream in{std::string(contents)};
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("# ", 0) != 0) break;
    out += line.substr(2);
    out += '\n';
  }
  return out;
}

}  // namespace ncps
