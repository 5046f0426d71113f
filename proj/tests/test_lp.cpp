#include "psps/lp.hpp"
#include "psps/mip.hpp"
#include "psps/simplex.hpp"

#include <gtest/gtest.h>

#include <numeric>
#include <random>
#include <sstream>

using namespace psps::lp;

TEST(Simplex, SmallMaximisation) {
    // max 3x + 5y s.t. x <= 4, 2y <= 12, 3x + 2y <= 18 -> x=2, y=6, obj 36
    Model m;
    auto x = m.add_variable("x", 0, kInf, -3);
    auto y = m.add_variable("y", 0, kInf, -5);
    m.add_constraint("c1", {{x, 1}}, -kInf, 4);
    m.add_constraint("c2", {{y, 2}}, -kInf, 12);
    m.add_constraint("c3", {{x, 3}, {y, 2}}, -kInf, 18);
    auto r = solve_lp(m);
    ASSERT_EQ(r.status, Status::Optimal);
    EXPECT_NEAR(r.objective, -36, 1e-9);
    EXPECT_NEAR(r.x[x], 2, 1e-9);
    EXPECT_NEAR(r.x[y], 6, 1e-9);
}

TEST(Simplex, EqualityAndFreeVariables) {
    // min x - y, x + y = 4, x - y >= -2, x free, y <= 10 -> x=1, y=3
    Model m;
    auto x = m.add_variable("x", -kInf, kInf, 1);
    auto y = m.add_variable("y", -kInf, 10, -1);
    m.add_constraint("sum", {{x, 1}, {y, 1}}, 4, 4);
    m.add_constraint("diff", {{x, 1}, {y, -1}}, -2, kInf);
    auto r = solve_lp(m);
    ASSERT_EQ(r.status, Status::Optimal);
    EXPECT_NEAR(r.objective, -2, 1e-9);
    EXPECT_NEAR(r.x[x], 1, 1e-9);
    EXPECT_NEAR(r.x[y], 3, 1e-9);
}

TEST(Simplex, DetectsInfeasibility) {
    Model m;
    auto x = m.add_variable("x", 0, 1, 1);
    m.add_constraint("c", {{x, 1}}, 2, kInf);
    EXPECT_EQ(solve_lp(m).status, Status::Infeasible);
}

TEST(Simplex, DetectsUnboundedness) {
    Model m;
    auto x = m.add_variable("x", 0, kInf, -1);
    auto y = m.add_variable("y", 0, kInf, 0);
    m.add_constraint("c", {{x, 1}, {y, -1}}, -kInf, 1);
    EXPECT_EQ(solve_lp(m).status, Status::Unbounded);
}

TEST(Simplex, ObjectiveOffsetIsReported) {
    Model m;
    auto x = m.add_variable("x", 1, 3, 2);
    m.set_objective_offset(5);
    auto r = solve_lp(m);
    ASSERT_EQ(r.status, Status::Optimal);
    EXPECT_NEAR(r.objective, 7, 1e-12);
    EXPECT_NEAR(r.x[x], 1, 1e-12);
}

TEST(Simplex, DegenerateVertexAtBound) {
    // unique solution x0 = -0.46 sits exactly on its lower bound
    Model m;
    auto a = m.add_variable("a", -0.46, -0.43, -1.0);
    auto b = m.add_variable("b", -2.24, kInf, -0.22);
    m.add_constraint("e1", {{a, 0.078}, {b, 0.582}}, 0.3536375602454099, 0.3536375602454099);
    m.add_constraint("e2", {{a, -0.402}, {b, 2.188}}, 1.6492918587920222, 1.6492918587920222);
    auto r = solve_lp(m);
    ASSERT_EQ(r.status, Status::Optimal);
    EXPECT_NEAR(r.x[a], -0.46, 1e-7);
    EXPECT_LE(m.max_violation(r.x), 1e-7);
}

// Knapsack-style checks against exhaustive enumeration of the binaries.
TEST(BranchAndBound, MatchesEnumerationOnRandomKnapsacks) {
    std::mt19937_64 eng(7);
    auto uniform = [&] { return double(eng() >> 11) * 0x1.0p-53; };
    for (int trial = 0; trial < 40; ++trial) {
        const int n = 3 + trial % 8;
        std::vector<double> value(n), weight(n);
        for (int i = 0; i < n; ++i) value[i] = 1 + 9 * uniform(), weight[i] = 1 + 9 * uniform();
        double cap = 0.4 * std::accumulate(weight.begin(), weight.end(), 0.0);
        Model m;
        std::vector<Term> row;
        for (int i = 0; i < n; ++i) row.push_back({m.add_variable("x" + std::to_string(i), 0, 1, -value[i], true), weight[i]});
        m.add_constraint("cap", row, -kInf, cap);
        MipOptions opt;
        opt.mip_gap = 0;
        auto r = solve_mip(m, opt);
        ASSERT_EQ(r.status, Status::Optimal);
        double best = 0;
        for (int mask = 0; mask < (1 << n); ++mask) {
            double v = 0, w = 0;
            for (int i = 0; i < n; ++i)
                if (mask >> i & 1) v += value[i], w += weight[i];
            if (w <= cap) best = std::max(best, v);
        }
        EXPECT_NEAR(r.objective, -best, 1e-9) << "trial " << trial;
        EXPECT_NEAR(r.gap, 0.0, 1e-12);
    }
}

TEST(BranchAndBound, HintIsAcceptedAndNeverRestricts) {
    Model m;
    auto x = m.add_variable("x", 0, 1, -1, true);
    auto y = m.add_variable("y", 0, 1, -2, true);
    m.add_constraint("c", {{x, 1}, {y, 1}}, -kInf, 1);
    m.set_hint(x, 1.0);
    m.set_hint(y, 0.0);
    MipOptions opt;
    opt.mip_gap = 0;
    auto r = solve_mip(m, opt);
    EXPECT_TRUE(r.hint_accepted);
    EXPECT_NEAR(r.objective, -2, 1e-12);
    EXPECT_NEAR(r.x[y], 1, 1e-12);
}

TEST(BranchAndBound, InfeasibleIntegerProgram) {
    Model m;
    auto x = m.add_variable("x", 0, 3, 1, true);
    m.add_constraint("c", {{x, 2}}, 3, 3); // 2x = 3 has no integer solution
    EXPECT_EQ(solve_mip(m).status, Status::Infeasible);
}

TEST(ModelText, WritesLpFormat) {
    Model m;
    auto x = m.add_variable("x", 0, 1, 1, true);
    m.add_constraint("c", {{x, 2}}, -kInf, 1);
    std::ostringstream out;
    m.write_lp(out);
    auto text = out.str();
    EXPECT_NE(text.find("Minimize"), std::string::npos);
    EXPECT_NE(text.find("c_hi: 2 x <= 1"), std::string::npos) << text;
    EXPECT_NE(text.find("General"), std::string::npos) << text;
}
