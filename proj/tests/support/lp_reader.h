#ifndef PATHOPT_TESTS_LP_READER_H
#define PATHOPT_TESTS_LP_READER_H

#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace testing_support {

// Reads the LP text subset the exporter writes. Everything is keyed by name.
struct ParsedLp {
  bool maximize = false;
  std::map<std::string, double> objective;
  struct Row {
    std::map<std::string, double> coeffs;
    std::string relation;
    double rhs = 0;
  };
  std::vector<std::string> row_order;
  std::map<std::string, Row> rows;
  std::map<std::string, std::pair<double, double>> bounds;
  std::set<std::string> binaries;
};

namespace lp_reader_detail {

inline double ParseNum(const std::string& t) {
  if (t == "inf" || t == "+inf") return std::numeric_limits<double>::infinity();
  if (t == "-inf") return -std::numeric_limits<double>::infinity();
  size_t used = 0;
  double v = std::stod(t, &used);
  if (used != t.size()) throw std::runtime_error("bad number " + t);
  return v;
}

inline std::vector<std::string> Tokens(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  std::string t;
  while (in >> t) out.push_back(t);
  return out;
}

// "c x + c y - c z" possibly followed by a relation and rhs.
inline void Terms(const std::vector<std::string>& tok, size_t& i,
                  std::map<std::string, double>& into) {
  double sign = 1;
  while (i < tok.size()) {
    const std::string& t = tok[i];
    if (t == "<=" || t == ">=" || t == "=") return;
    if (t == "+") { sign = 1; ++i; continue; }
    if (t == "-") { sign = -1; ++i; continue; }
    double c = ParseNum(t);
    if (i + 1 >= tok.size()) throw std::runtime_error("dangling coefficient");
    into[tok[i + 1]] += sign * c;
    sign = 1;
    i += 2;
  }
}

}  // namespace lp_reader_detail

inline ParsedLp ReadLp(const std::string& text) {
  using namespace lp_reader_detail;
  ParsedLp lp;
  std::istringstream in(text);
  std::string line;
  enum { kNone, kObj, kRows, kBounds, kBinary, kEnd } section = kNone;
  std::string objective_text, current;
  std::vector<std::pair<std::string, std::string>> row_text;
  while (std::getline(in, line)) {
    if (line == "Minimize" || line == "Maximize") {
      lp.maximize = line == "Maximize";
      section = kObj;
      continue;
    }
    if (line == "Subject To") { section = kRows; continue; }
    if (line == "Bounds") { section = kBounds; continue; }
    if (line == "Binary") { section = kBinary; continue; }
    if (line == "End") { section = kEnd; continue; }
    if (line.empty() || line[0] != ' ') throw std::runtime_error("unexpected line: " + line);
    switch (section) {
      case kObj: {
        auto colon = line.find(':');
        objective_text += " " + (colon == std::string::npos ? line : line.substr(colon + 1));
        break;
      }
      case kRows: {
        auto colon = line.find(':');
        if (colon != std::string::npos) {
          row_text.push_back({line.substr(1, colon - 1), line.substr(colon + 1)});
        } else {
          row_text.back().second += " " + line;
        }
        break;
      }
      case kBounds: {
        auto tok = Tokens(line);
        const double inf = std::numeric_limits<double>::infinity();
        if (tok.size() == 3 && tok[1] == "=") {
          double v = ParseNum(tok[2]);
          lp.bounds[tok[0]] = {v, v};
        } else if (tok.size() == 2 && tok[1] == "free") {
          lp.bounds[tok[0]] = {-inf, inf};
        } else if (tok.size() == 3 && tok[1] == ">=") {
          lp.bounds[tok[0]] = {ParseNum(tok[2]), inf};
        } else if (tok.size() == 5 && tok[1] == "<=" && tok[3] == "<=") {
          lp.bounds[tok[2]] = {ParseNum(tok[0]), ParseNum(tok[4])};
        } else {
          throw std::runtime_error("bad bound: " + line);
        }
        break;
      }
      case kBinary:
        lp.binaries.insert(Tokens(line).at(0));
        break;
      default:
        throw std::runtime_error("text outside a section: " + line);
    }
  }
  if (section != kEnd) throw std::runtime_error("missing End");
  {
    auto tok = Tokens(objective_text);
    size_t i = 0;
    Terms(tok, i, lp.objective);
  }
  for (const auto& [name, body] : row_text) {
    auto tok = Tokens(body);
    size_t i = 0;
    ParsedLp::Row row;
    Terms(tok, i, row.coeffs);
    if (i + 2 != tok.size()) throw std::runtime_error("bad row " + name);
    row.relation = tok[i];
    row.rhs = ParseNum(tok[i + 1]);
    lp.row_order.push_back(name);
    lp.rows[name] = row;
  }
  for (const std::string& b : lp.binaries) {
    if (!lp.bounds.count(b)) lp.bounds[b] = {0, 1};
  }
  return lp;
}

}  // namespace testing_support

#endif
