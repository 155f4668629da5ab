#include <gtest/gtest.h>

#include <random>

#include "pathopt/lp_format.h"
#include "support/fixtures.h"
#include "support/lp_reader.h"
#include "support/random_models.h"

using namespace pathopt::lp;

TEST(LpText, OneVariableGolden) {
  ProgramModel m;
  int x = m.AddVariable("x", 0, kInfinity);
  m.AddConstraint("cap", {{x, 1}}, Relation::kLessEqual, 3);
  m.SetObjective({{x, 1}}, Sense::kMaximize);
  EXPECT_EQ(ExportLpText(m), testing_support::ReadData("golden/one_var.lp"));
}

TEST(LpText, BoundShapesAndBinaries) {
  ProgramModel m;
  m.AddVariable("fixed", 2, 2);
  m.AddVariable("free", -kInfinity, kInfinity);
  m.AddVariable("upper", -kInfinity, 4);
  m.AddVariable("box", -1, 0.5);
  m.AddVariable("b1", 0, 1, VarType::kBinary);
  int b2 = m.AddVariable("b2", 0, 1, VarType::kBinary);
  m.SetBounds(b2, 1, 1);
  m.AddConstraint("empty", {}, Relation::kGreaterEqual, -1);
  m.SetObjective({{0, -2.5}, {3, 1e-7}}, Sense::kMinimize);
  const std::string text = ExportLpText(m);
  EXPECT_EQ(text,
            "Minimize\n"
            " obj: -2.5 fixed + 9.9999999999999995e-08 box\n"
            "Subject To\n"
            " empty: 0 fixed >= -1\n"
            "Bounds\n"
            " fixed = 2\n"
            " free free\n"
            " -inf <= upper <= 4\n"
            " -1 <= box <= 0.5\n"
            " b2 = 1\n"
            "Binary\n"
            " b1\n"
            " b2\n"
            "End\n");
  auto parsed = testing_support::ReadLp(text);
  EXPECT_EQ(parsed.binaries, (std::set<std::string>{"b1", "b2"}));
  EXPECT_EQ(parsed.bounds.at("b1"), (std::pair<double, double>{0, 1}));
}

TEST(LpText, Deterministic) {
  std::mt19937_64 rng(4);
  ProgramModel m = testing_support::RandomMilp(rng, 6, 6, 8);
  EXPECT_EQ(ExportLpText(m), ExportLpText(m));
}

TEST(LpText, LongRowsWrap) {
  ProgramModel m;
  std::vector<Term> terms;
  for (int i = 0; i < 60; ++i) terms.push_back({m.AddVariable("v" + std::to_string(i), 0, 1), 1.0 / (i + 3)});
  m.AddConstraint("long", terms, Relation::kEqual, 1);
  const std::string text = ExportLpText(m);
  size_t start = 0;
  while (start < text.size()) {
    size_t end = text.find('\n', start);
    EXPECT_LE(end - start, 230u);
    start = end + 1;
  }
  auto parsed = testing_support::ReadLp(text);
  ASSERT_EQ(parsed.rows.at("long").coeffs.size(), 60u);
  for (int i = 0; i < 60; ++i) {
    EXPECT_EQ(parsed.rows.at("long").coeffs.at("v" + std::to_string(i)), 1.0 / (i + 3));
  }
}

TEST(LpText, IndependentReaderReproducesMatrix) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 100; ++trial) {
    ProgramModel m = trial % 2 ? testing_support::RandomLp(rng, 12, 10)
                               : testing_support::RandomMilp(rng, 5, 6, 8);
    auto p = testing_support::ReadLp(ExportLpText(m));
    EXPECT_EQ(p.maximize, m.objective().sense == Sense::kMaximize);
    ASSERT_EQ(p.bounds.size(), m.num_variables());
    for (const Variable& v : m.variables()) {
      EXPECT_EQ(p.bounds.at(v.name), (std::pair<double, double>{v.lb, v.ub})) << v.name;
      EXPECT_EQ(p.binaries.count(v.name) > 0, v.type == VarType::kBinary);
    }
    std::map<std::string, double> obj;
    for (const Term& t : m.objective().terms) obj[m.variables()[t.var].name] = t.coeff;
    EXPECT_EQ(p.objective, obj);
    ASSERT_EQ(p.rows.size(), m.num_constraints());
    for (size_t r = 0; r < m.num_constraints(); ++r) {
      const Constraint& c = m.constraints()[r];
      EXPECT_EQ(p.row_order[r], c.name);
      const auto& row = p.rows.at(c.name);
      std::map<std::string, double> coeffs;
      for (const Term& t : c.terms) coeffs[m.variables()[t.var].name] = t.coeff;
      if (coeffs.empty()) coeffs[m.variables()[0].name] = 0;
      EXPECT_EQ(row.coeffs, coeffs);
      EXPECT_EQ(row.rhs, c.rhs);
      const char* rel = c.relation == Relation::kLessEqual ? "<="
                        : c.relation == Relation::kEqual   ? "="
                                                           : ">=";
      EXPECT_EQ(row.relation, rel);
    }
  }
}
