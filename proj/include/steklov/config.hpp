#pragma once

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "asymptotics.hpp"
#include "dn_map.hpp"
#include "errors.hpp"
#include "geometry.hpp"
#include "localization.hpp"
#include "profile.hpp"

namespace steklov {

// Experiment file grammar:
//
//   file    := { line }
//   line    := blank | comment | header | entry
//   comment := '#' any
//   header  := '[' ( profile | transversal | run | output ) ']'
//   entry   := key '=' value          (value runs to end of line; '#' starts a comment)
//
// [profile]      kind = symbolic | tabulated
//                term = const c | affine a b | poly c0 c1 ... | exp amp rate
//                     | gauss amp x0 sigma | bump amp a w | edge amp p r   (repeatable)
//                x = list, f = list, interpolation = cubic | linear  (tabulated)
//                n = int >= 2, omega = real, label = text
// [transversal]  source = circle | sphere | custom, radius = real > 0,
//                dimension = int >= 1, values = list, count = int >= 1
// [run]          modes = all | i | i:j, grid = int in [129, 1000001],
//                branches = plus | minus | both, normalization = boundary | bulk | both,
//                deltas = list, perturbation = term, fit_window = lo, hi,
//                rtol, atol, checkpoints, epsilon, variant = oracle-corrected | paper-stated,
//                workers = int >= 1
// [output]       directory = path, formats = csv, json, plotdata
//
// Lists are comma- or whitespace-separated. Keys other than `term` may appear once.

struct ProfileSection {
  std::string kind = "symbolic";
  std::vector<ProfileTerm> terms;
  std::vector<std::string> term_text;
  std::vector<double> x, f;
  bool cubic = true;
  int n = 2;
  double omega = 0.0;
  std::string label;
};

struct TransversalSection {
  SpectrumSpec spec = SpectrumSpec::circle(1.0);
  int count = 10;
};

struct RunSection {
  std::optional<std::pair<std::size_t, std::size_t>> modes;  // inclusive range; all when empty
  std::size_t grid = kDefaultTracePoints;
  std::vector<Branch> branches = {Branch::Plus, Branch::Minus};
  std::vector<Normalization> normalizations = {Normalization::BoundaryL2};
  std::vector<double> deltas;
  std::optional<ProfileTerm> perturbation;
  FitWindow fit_window{};
  SturmOptions sturm{};
  double epsilon = kDefaultEpsilon;
  RecursionVariant variant = RecursionVariant::OracleCorrected;
  int workers = 1;
};

struct OutputSection {
  std::string directory = "out";
  bool csv = true, json = false, plotdata = false;
};

struct ExperimentConfig {
  ProfileSection profile;
  TransversalSection transversal;
  RunSection run;
  OutputSection output;

  WarpingProfile warping_profile() const;
  TransversalSpectrum spectrum() const { return transversal_spectrum(transversal.spec, transversal.count); }
  // Mode indices selected by run.modes, clipped to the spectrum.
  std::vector<std::size_t> selected_modes(std::size_t available) const;
};

namespace config_detail {

inline std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : s) {
    if (ch == ',' || std::isspace(static_cast<unsigned char>(ch))) {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

struct Where {
  int line;
  std::string key;
  std::string at() const { return "line " + std::to_string(line) + " (" + key + "): "; }
};

inline double to_real(const std::string& s, const Where& w) {
  errno = 0;
  char* end = nullptr;
  double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size() || errno == ERANGE || !std::isfinite(v))
    throw ConfigError(w.at() + "'" + s + "' is not a finite real");
  return v;
}

inline long to_int(const std::string& s, const Where& w) {
  errno = 0;
  char* end = nullptr;
  long v = std::strtol(s.c_str(), &end, 10);
  if (s.empty() || end != s.c_str() + s.size() || errno == ERANGE)
    throw ConfigError(w.at() + "'" + s + "' is not an integer");
  return v;
}

inline long int_in(const std::string& s, long lo, long hi, const Where& w) {
  long v = to_int(trim(s), w);
  if (v < lo || v > hi)
    throw ConfigError(w.at() + std::to_string(v) + " outside [" + std::to_string(lo) + ", " +
                      std::to_string(hi) + "]");
  return v;
}

inline std::vector<double> reals(const std::string& s, const Where& w) {
  std::vector<double> out;
  for (const auto& t : split_list(s)) out.push_back(to_real(t, w));
  return out;
}

inline ProfileTerm parse_term(const std::string& s, const Where& w) {
  auto tok = split_list(s);
  if (tok.empty()) throw ConfigError(w.at() + "empty term");
  std::string kind = tok[0];
  std::vector<double> a;
  for (std::size_t i = 1; i < tok.size(); ++i) a.push_back(to_real(tok[i], w));
  auto need = [&](std::size_t n) {
    if (a.size() != n)
      throw ConfigError(w.at() + "term '" + kind + "' takes " + std::to_string(n) + " parameters");
  };
  if (kind == "const") {
    need(1);
    return constant_term(a[0]);
  }
  if (kind == "affine") {
    need(2);
    return affine_term(a[0], a[1]);
  }
  if (kind == "poly") {
    if (a.empty()) throw ConfigError(w.at() + "term 'poly' needs coefficients");
    return PolyTerm{a};
  }
  if (kind == "exp") {
    need(2);
    return ExpTerm{a[0], a[1]};
  }
  if (kind == "gauss") {
    need(3);
    if (!(a[2] > 0)) throw ConfigError(w.at() + "gauss sigma must be positive");
    return GaussTerm{a[0], a[1], a[2]};
  }
  if (kind == "bump") {
    need(3);
    if (!(a[2] > 0) || a[1] < 0 || a[1] + a[2] > 1)
      throw ConfigError(w.at() + "bump support [a, a+w] must lie in [0, 1] with w > 0");
    return BumpTerm{a[0], a[1], a[2]};
  }
  if (kind == "edge") {
    need(3);
    if (a[1] != std::floor(a[1]) || a[2] != std::floor(a[2]) || a[1] < 0 || a[2] < 0 || a[1] > 30 ||
        a[2] > 30)
      throw ConfigError(w.at() + "edge exponents must be integers in [0, 30]");
    return edge_term(a[0], static_cast<int>(a[1]), static_cast<int>(a[2]));
  }
  throw ConfigError(w.at() + "unknown term kind '" + kind + "'");
}

template <class T>
std::vector<T> choice_list(const std::string& s, const std::map<std::string, std::vector<T>>& m, const Where& w) {
  auto it = m.find(trim(s));
  if (it == m.end()) throw ConfigError(w.at() + "invalid value '" + trim(s) + "'");
  return it->second;
}

}  // namespace config_detail

inline ExperimentConfig parse_config(const std::string& text) {
  using namespace config_detail;
  static const std::map<std::string, std::set<std::string>> known = {
      {"profile", {"kind", "term", "x", "f", "interpolation", "n", "omega", "label"}},
      {"transversal", {"source", "radius", "dimension", "values", "count"}},
      {"run",
       {"modes", "grid", "branches", "normalization", "deltas", "perturbation", "fit_window", "rtol", "atol",
        "checkpoints", "epsilon", "variant", "workers"}},
      {"output", {"directory", "formats"}}};
  ExperimentConfig c;
  std::string section;
  std::set<std::string> seen;
  bool have_source = false;
  std::istringstream in(text);
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string line = raw;
    if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("line " + std::to_string(lineno) + ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      if (!known.count(section))
        throw ConfigError("line " + std::to_string(lineno) + ": unknown section [" + section + "]");
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));
    Where w{lineno, section + "." + key};
    if (section.empty()) throw ConfigError(w.at() + "entry outside any section");
    if (!known.at(section).count(key)) throw ConfigError(w.at() + "unknown key");
    if (key != "term" && !seen.insert(w.key).second) throw ConfigError(w.at() + "duplicate key");
    if (val.empty()) throw ConfigError(w.at() + "empty value");

    if (section == "profile") {
      auto& p = c.profile;
      if (key == "kind") {
        if (val != "symbolic" && val != "tabulated") throw ConfigError(w.at() + "kind is symbolic or tabulated");
        p.kind = val;
      } else if (key == "term") {
        p.terms.push_back(parse_term(val, w));
        p.term_text.push_back(val);
      } else if (key == "x") {
        p.x = reals(val, w);
      } else if (key == "f") {
        p.f = reals(val, w);
      } else if (key == "interpolation") {
        if (val != "cubic" && val != "linear") throw ConfigError(w.at() + "interpolation is cubic or linear");
        p.cubic = val == "cubic";
      } else if (key == "n") {
        p.n = static_cast<int>(int_in(val, 2, 64, w));
      } else if (key == "omega") {
        p.omega = to_real(val, w);
      } else if (key == "label") {
        p.label = val;
      }
    } else if (section == "transversal") {
      auto& t = c.transversal;
      if (key == "source") {
        if (val == "circle") t.spec.source = SpectrumSource::Circle;
        else if (val == "sphere") t.spec.source = SpectrumSource::Sphere;
        else if (val == "custom") t.spec.source = SpectrumSource::Custom;
        else throw ConfigError(w.at() + "source is circle, sphere or custom");
        have_source = true;
      } else if (key == "radius") {
        t.spec.radius = to_real(val, w);
        if (!(t.spec.radius > 0)) throw ConfigError(w.at() + "radius must be positive");
      } else if (key == "dimension") {
        t.spec.dimension = static_cast<int>(int_in(val, 1, 64, w));
      } else if (key == "values") {
        t.spec.values = reals(val, w);
      } else if (key == "count") {
        t.count = static_cast<int>(int_in(val, 1, 100000, w));
      }
    } else if (section == "run") {
      auto& r = c.run;
      if (key == "modes") {
        if (val == "all") {
          r.modes.reset();
        } else if (auto colon = val.find(':'); colon != std::string::npos) {
          long a = int_in(val.substr(0, colon), 0, 1000000, w);
          long b = int_in(val.substr(colon + 1), 0, 1000000, w);
          if (b < a) throw ConfigError(w.at() + "empty mode range");
          r.modes = {static_cast<std::size_t>(a), static_cast<std::size_t>(b)};
        } else {
          auto a = static_cast<std::size_t>(int_in(val, 0, 1000000, w));
          r.modes = {a, a};
        }
      } else if (key == "grid") {
        r.grid = static_cast<std::size_t>(int_in(val, 129, 1000001, w));
      } else if (key == "branches") {
        r.branches = choice_list<Branch>(
            val, {{"plus", {Branch::Plus}}, {"minus", {Branch::Minus}}, {"both", {Branch::Plus, Branch::Minus}}}, w);
      } else if (key == "normalization") {
        r.normalizations = choice_list<Normalization>(
            val,
            {{"boundary", {Normalization::BoundaryL2}},
             {"bulk", {Normalization::BulkL2}},
             {"both", {Normalization::BoundaryL2, Normalization::BulkL2}}},
            w);
      } else if (key == "deltas") {
        r.deltas = reals(val, w);
      } else if (key == "perturbation") {
        r.perturbation = parse_term(val, w);
      } else if (key == "fit_window") {
        auto v = reals(val, w);
        if (v.size() != 2 || !(v[0] >= 0) || !(v[1] > v[0]))
          throw ConfigError(w.at() + "fit_window is lo, hi with 0 <= lo < hi");
        r.fit_window = {v[0], v[1]};
      } else if (key == "rtol") {
        r.sturm.tol.rtol = to_real(val, w);
        if (!(r.sturm.tol.rtol >= 1e-15 && r.sturm.tol.rtol <= 1e-3))
          throw ConfigError(w.at() + "rtol outside [1e-15, 1e-3]");
      } else if (key == "atol") {
        r.sturm.tol.atol = to_real(val, w);
        if (!(r.sturm.tol.atol > 0 && r.sturm.tol.atol <= 1e-3)) throw ConfigError(w.at() + "atol outside (0, 1e-3]");
      } else if (key == "checkpoints") {
        r.sturm.grid_size = static_cast<int>(int_in(val, 16, 1 << 16, w));
      } else if (key == "epsilon") {
        r.epsilon = to_real(val, w);
        if (!(r.epsilon > 0 && r.epsilon < 0.5)) throw ConfigError(w.at() + "epsilon outside (0, 0.5)");
      } else if (key == "variant") {
        if (val == "oracle-corrected") r.variant = RecursionVariant::OracleCorrected;
        else if (val == "paper-stated") r.variant = RecursionVariant::PaperStated;
        else throw ConfigError(w.at() + "variant is oracle-corrected or paper-stated");
      } else if (key == "workers") {
        r.workers = static_cast<int>(int_in(val, 1, 1024, w));
      }
    } else if (section == "output") {
      auto& o = c.output;
      if (key == "directory") {
        o.directory = val;
      } else if (key == "formats") {
        o.csv = o.json = o.plotdata = false;
        for (const auto& f : split_list(val)) {
          if (f == "csv") o.csv = true;
          else if (f == "json") o.json = true;
          else if (f == "plotdata") o.plotdata = true;
          else throw ConfigError(w.at() + "unknown format '" + f + "'");
        }
      }
    }
  }
  if (c.profile.kind == "symbolic") {
    if (c.profile.terms.empty()) throw ConfigError("[profile]: symbolic profile needs at least one term");
    if (!c.profile.x.empty() || !c.profile.f.empty())
      throw ConfigError("[profile]: x/f samples only apply to tabulated profiles");
  } else {
    if (!c.profile.terms.empty()) throw ConfigError("[profile]: terms only apply to symbolic profiles");
    if (c.profile.x.size() != c.profile.f.size() || c.profile.x.size() < 3)
      throw ConfigError("[profile]: tabulated profile needs matching x and f lists of length >= 3");
  }
  if (!have_source) throw ConfigError("[transversal]: source is required");
  if (c.transversal.spec.source == SpectrumSource::Custom) {
    if (c.transversal.spec.values.empty()) throw ConfigError("[transversal]: custom source needs values");
    if (!seen.count("transversal.count")) c.transversal.count = static_cast<int>(c.transversal.spec.values.size());
  }
  try {
    (void)c.warping_profile();
    (void)c.spectrum();
  } catch (const ConfigError&) {
    throw;
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("invalid configuration: ") + e.what());
  }
  return c;
}

inline WarpingProfile ExperimentConfig::warping_profile() const {
  const auto& p = profile;
  if (p.kind == "tabulated")
    return WarpingProfile(TabulatedSpline(p.x, p.f, p.cubic), p.n, p.omega, p.label.empty() ? "tabulated" : p.label);
  std::string label = p.label;
  if (label.empty())
    for (const auto& t : p.term_text) label += (label.empty() ? "" : " + ") + t;
  return WarpingProfile(p.terms, p.n, p.omega, label);
}

inline std::vector<std::size_t> ExperimentConfig::selected_modes(std::size_t available) const {
  std::vector<std::size_t> out;
  std::size_t lo = run.modes ? run.modes->first : 0;
  std::size_t hi = run.modes ? std::min(run.modes->second, available - 1) : available - 1;
  for (std::size_t i = lo; i <= hi && i < available; ++i) out.push_back(i);
  return out;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str());
}

}  // namespace steklov
