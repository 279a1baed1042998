// SPDX-License-Identifier: Apache-2.0
#include "gridsure/lp/problem.hpp"

#include <cctype>
#include <cmath>
#include <sstream>
#include <vector>

namespace gridsure::lp {

void validate(const LpProblem& p) {
  const int nv = p.num_variables();
  for (int v = 0; v < nv; ++v) {
    const Variable& var = p.variables[v];
    if (std::isnan(var.lower) || std::isnan(var.upper) || var.lower > var.upper)
      throw ValidationError("variable " + var.name + ": inconsistent bounds");
  }
  for (const auto& row : p.constraints) {
    if (row.lower > row.upper)
      throw ValidationError("constraint " + row.name + ": lower > upper");
    for (const auto& [v, a] : row.terms) {
      if (v < 0 || v >= nv)
        throw ValidationError("constraint " + row.name +
                              " references undeclared variable index " +
                              std::to_string(v));
      if (!std::isfinite(a))
        throw ValidationError("constraint " + row.name + ": non-finite coefficient");
    }
  }
  for (const auto& [v, c] : p.objective) {
    if (v < 0 || v >= nv)
      throw ValidationError("objective references undeclared variable index " +
                            std::to_string(v));
    if (!std::isfinite(c)) throw ValidationError("objective: non-finite coefficient");
  }
  std::vector<bool> seen(nv, false);
  for (const auto& t : p.piecewise_terms) {
    if (t.variable < 0 || t.variable >= nv)
      throw ValidationError("piecewise term references undeclared variable index " +
                            std::to_string(t.variable));
    const Variable& var = p.variables[t.variable];
    if (seen[t.variable])
      throw ValidationError("variable " + var.name + ": duplicate piecewise term");
    seen[t.variable] = true;
    if (var.integral)
      throw ValidationError("variable " + var.name +
                            ": piecewise cost on an integral variable");
    if (t.breakpoints.size() < 2 || t.slopes.size() + 1 != t.breakpoints.size())
      throw ValidationError("variable " + var.name +
                            ": piecewise term needs K+1 breakpoints and K slopes");
    if (t.breakpoints.front() != var.lower || t.breakpoints.back() != var.upper)
      throw ValidationError("variable " + var.name +
                            ": piecewise breakpoints must span the variable bounds");
    for (std::size_t k = 0; k + 1 < t.breakpoints.size(); ++k) {
      if (!(t.breakpoints[k + 1] > t.breakpoints[k]))
        throw ValidationError("variable " + var.name +
                              ": piecewise breakpoints not strictly increasing");
    }
    for (std::size_t k = 0; k + 1 < t.slopes.size(); ++k) {
      if (t.slopes[k + 1] < t.slopes[k] - 1e-12 * std::abs(t.slopes[k]))
        throw ValidationError("variable " + var.name +
                              ": piecewise slopes must be non-decreasing (convex)");
    }
  }
}

namespace {

// LP-format identifiers cannot contain brackets or commas; map them.
std::string lp_name(const std::string& raw) {
  std::string out;
  out.reserve(raw.size());
  for (char c : raw) {
    if (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.') {
      out.push_back(c);
    } else if (c == '[' || c == ',') {
      out.push_back('_');
    }  // ']' dropped
  }
  if (out.empty() || std::isdigit(static_cast<unsigned char>(out[0]))) out.insert(out.begin(), 'x');
  return out;
}

void append_term(std::ostringstream& os, Real coef, const std::string& name, bool& first) {
  if (coef == 0) return;
  if (first) {
    if (coef < 0) os << "- ";
    first = false;
  } else {
    os << (coef < 0 ? " - " : " + ");
  }
  const Real mag = std::abs(coef);
  os << mag << ' ' << name;
}

}  // namespace

std::string to_lp_format(const LpProblem& p) {
  validate(p);
  const int nv = p.num_variables();
  std::vector<const PiecewiseCost*> pw(nv, nullptr);
  for (const auto& t : p.piecewise_terms) pw[t.variable] = &t;
  std::vector<Real> lin(nv, 0);
  for (const auto& [v, c] : p.objective) lin[v] += c;

  // expanded column names: plain variable or variable segment k
  auto seg_name = [&](int v, int k) {
    return lp_name(p.variables[v].name) + "__s" + std::to_string(k);
  };

  std::ostringstream os;
  os.precision(17);
  os << "\\ gridsure LP dump (piecewise terms expanded into segment columns)\n";
  os << "Minimize\n obj:";
  {
    bool first = true;
    std::ostringstream body;
    body.precision(17);
    for (int v = 0; v < nv; ++v) {
      if (pw[v] == nullptr) {
        append_term(body, lin[v], lp_name(p.variables[v].name), first);
      } else {
        for (std::size_t k = 0; k < pw[v]->slopes.size(); ++k)
          append_term(body, pw[v]->slopes[k] + lin[v], seg_name(v, int(k)), first);
      }
    }
    std::string s = body.str();
    os << ' ' << (s.empty() ? "0 ZERO_" : s) << '\n';
  }

  os << "Subject To\n";
  int anon = 0;
  for (const auto& row : p.constraints) {
    // range rows split into two inequalities for portability
    auto emit = [&](char sense, Real rhs) {
      std::ostringstream body;
      body.precision(17);
      bool first = true;
      Real shift = 0;
      for (const auto& [v, a] : row.terms) {
        if (pw[v] == nullptr) {
          append_term(body, a, lp_name(p.variables[v].name), first);
        } else {
          shift += a * pw[v]->breakpoints.front();
          for (std::size_t k = 0; k < pw[v]->slopes.size(); ++k)
            append_term(body, a, seg_name(v, int(k)), first);
        }
      }
      std::string nm = row.name.empty() ? "c" + std::to_string(anon++) : lp_name(row.name);
      if (sense != '=') nm += sense == '<' ? "_ub" : "_lb";
      os << ' ' << nm << ": " << (first ? "0 ZERO_" : body.str()) << ' '
         << (sense == '=' ? "=" : (sense == '<' ? "<=" : ">=")) << ' '
         << rhs - shift << '\n';
    };
    if (row.lower == row.upper) {
      emit('=', row.lower);
    } else {
      if (row.upper < kInf) emit('<', row.upper);
      if (row.lower > -kInf) emit('>', row.lower);
    }
  }

  os << "Bounds\n";
  for (int v = 0; v < nv; ++v) {
    const Variable& var = p.variables[v];
    if (pw[v] != nullptr) {
      for (std::size_t k = 0; k < pw[v]->slopes.size(); ++k)
        os << " 0 <= " << seg_name(v, int(k)) << " <= "
           << pw[v]->breakpoints[k + 1] - pw[v]->breakpoints[k] << '\n';
      continue;
    }
    const std::string nm = lp_name(var.name);
    if (var.lower == -kInf && var.upper == kInf) {
      os << ' ' << nm << " free\n";
    } else if (var.lower == -kInf) {
      os << " -inf <= " << nm << " <= " << var.upper << '\n';
    } else if (var.upper == kInf) {
      os << ' ' << var.lower << " <= " << nm << '\n';
    } else {
      os << ' ' << var.lower << " <= " << nm << " <= " << var.upper << '\n';
    }
  }
  os << " ZERO_ = 0\n";

  bool any_int = false;
  for (const auto& var : p.variables) any_int |= var.integral;
  if (any_int) {
    os << "Generals\n";
    for (const auto& var : p.variables)
      if (var.integral) os << ' ' << lp_name(var.name) << '\n';
  }
  os << "End\n";
  return os.str();
}

}  // namespace gridsure::lp
