#include "pathopt/lp_format.h"

#include <cmath>
#include <cstdio>

namespace pathopt {
namespace lp {

namespace {

constexpr size_t kWrapAt = 200;

std::string Num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Appends "c name" terms, wrapping long rows onto continuation lines.
void AppendTerms(std::string& out, const std::vector<Term>& terms,
                 const ProgramModel& model) {
  size_t line_start = out.rfind('\n') + 1;
  bool first = true;
  for (const Term& t : terms) {
    std::string piece;
    if (first) {
      piece = (t.coeff < 0 ? "-" : "") + Num(std::abs(t.coeff));
    } else {
      piece = (t.coeff < 0 ? " - " : " + ") + Num(std::abs(t.coeff));
    }
    piece += " " + model.variables()[t.var].name;
    if (first) {
      out += " ";
    } else if (out.size() - line_start + piece.size() > kWrapAt) {
      out += "\n ";
      line_start = out.size() - 1;
    }
    out += piece;
    first = false;
  }
  if (first) {
    if (model.num_variables() > 0) {
      out += " 0 " + model.variables()[0].name;
    } else {
      out += " 0";
    }
  }
}

}  // namespace

std::string ExportLpText(const ProgramModel& model) {
  std::string out;
  out += model.objective().sense == Sense::kMaximize ? "Maximize\n" : "Minimize\n";
  out += " obj:";
  if (model.objective().terms.empty()) {
    out += "\n";
  } else {
    AppendTerms(out, model.objective().terms, model);
    out += "\n";
  }

  out += "Subject To\n";
  for (const Constraint& c : model.constraints()) {
    out += " " + c.name + ":";
    AppendTerms(out, c.terms, model);
    switch (c.relation) {
      case Relation::kLessEqual:
        out += " <= ";
        break;
      case Relation::kGreaterEqual:
        out += " >= ";
        break;
      case Relation::kEqual:
        out += " = ";
        break;
    }
    out += Num(c.rhs) + "\n";
  }

  out += "Bounds\n";
  std::string binaries;
  for (const Variable& v : model.variables()) {
    if (v.type == VarType::kBinary) {
      binaries += " " + v.name + "\n";
      if (v.lb == 0 && v.ub == 1) continue;
    }
    const bool lo = std::isfinite(v.lb), hi = std::isfinite(v.ub);
    if (lo && hi && v.lb == v.ub) {
      out += " " + v.name + " = " + Num(v.lb) + "\n";
    } else if (!lo && !hi) {
      out += " " + v.name + " free\n";
    } else if (lo && !hi) {
      out += " " + v.name + " >= " + Num(v.lb) + "\n";
    } else if (!lo) {
      out += " -inf <= " + v.name + " <= " + Num(v.ub) + "\n";
    } else {
      out += " " + Num(v.lb) + " <= " + v.name + " <= " + Num(v.ub) + "\n";
    }
  }
  if (!binaries.empty()) out += "Binary\n" + binaries;
  out += "End\n";
  return out;
}

}  // namespace lp
}  // namespace pathopt
