#include "doctest.h"

#include "dcnc/simplex.hpp"

#include <Eigen/Dense>

#include <random>

using namespace dcnc;

namespace {

// Minimum over every basic point: choose n tight constraints among rows and x >= 0.
// Returns +inf if no vertex is feasible. Only valid for bounded problems.
double vertex_enumeration(const LpProblem<double>& lp) {
    const int n = lp.variables;
    const int m = static_cast<int>(lp.rows.size());
    // Constraint list a'x (sense) b, with sign bounds appended as rows.
    std::vector<Eigen::VectorXd> A;
    std::vector<double> b;
    for (const auto& r : lp.rows) {
        Eigen::VectorXd a = Eigen::VectorXd::Zero(n);
        for (auto [j, v] : r.terms)
            a(j) += v;
        A.push_back(a);
        b.push_back(r.rhs);
    }
    for (int j = 0; j < n; ++j) {
        A.push_back(Eigen::VectorXd::Unit(n, j));
        b.push_back(0.0);
    }
    const int total = m + n;
    double best = std::numeric_limits<double>::infinity();
    std::vector<int> pick(static_cast<std::size_t>(n));
    std::function<void(int, int)> rec = [&](int start, int depth) {
        if (depth == n) {
            Eigen::MatrixXd M(n, n);
            Eigen::VectorXd rhs(n);
            for (int k = 0; k < n; ++k) {
                M.row(k) = A[static_cast<std::size_t>(pick[static_cast<std::size_t>(k)])].transpose();
                rhs(k) = b[static_cast<std::size_t>(pick[static_cast<std::size_t>(k)])];
            }
            Eigen::FullPivLU<Eigen::MatrixXd> lu(M);
            if (lu.rank() < n)
                return;
            const Eigen::VectorXd x = lu.solve(rhs);
            if (lp.max_violation(x) > 1e-7)
                return;
            best = std::min(best, lp.objective.dot(x));
            return;
        }
        for (int k = start; k < total; ++k) {
            pick[static_cast<std::size_t>(depth)] = k;
            rec(k + 1, depth + 1);
        }
    };
    rec(0, 0);
    return best;
}

} // namespace

TEST_CASE("textbook problem") {
    // max 3x + 5y s.t. x <= 4, 2y <= 12, 3x + 2y <= 18  -> 36 at (2, 6)
    LpProblem<double> lp;
    const int x = lp.add_variable(-3), y = lp.add_variable(-5);
    lp.add_row({{{x, 1.0}}, RowSense::less_equal, 4});
    lp.add_row({{{y, 2.0}}, RowSense::less_equal, 12});
    lp.add_row({{{x, 3.0}, {y, 2.0}}, RowSense::less_equal, 18});
    const auto s = solve_dense_simplex(lp);
    REQUIRE(s.status == LpStatus::optimal);
    CHECK(s.objective == doctest::Approx(-36));
    CHECK(s.x(0) == doctest::Approx(2));
    CHECK(s.x(1) == doctest::Approx(6));
}

TEST_CASE("equality and >= rows, negative right-hand sides") {
    LpProblem<double> lp;
    const int x = lp.add_variable(1), y = lp.add_variable(2);
    lp.add_row({{{x, 1.0}, {y, 1.0}}, RowSense::equal, 3});
    lp.add_row({{{x, -1.0}}, RowSense::greater_equal, -2}); // x <= 2
    const auto s = solve_dense_simplex(lp);
    REQUIRE(s.status == LpStatus::optimal);
    CHECK(s.x(0) == doctest::Approx(2));
    CHECK(s.x(1) == doctest::Approx(1));
    CHECK(s.objective == doctest::Approx(4));
}

TEST_CASE("infeasible and unbounded") {
    LpProblem<double> inf;
    const int x = inf.add_variable(1);
    inf.add_row({{{x, 1.0}}, RowSense::less_equal, 1});
    inf.add_row({{{x, 1.0}}, RowSense::greater_equal, 2});
    CHECK(solve_dense_simplex(inf).status == LpStatus::infeasible);

    LpProblem<double> unb;
    const int u = unb.add_variable(-1), v = unb.add_variable(0);
    unb.add_row({{{u, 1.0}, {v, -1.0}}, RowSense::less_equal, 1});
    CHECK(solve_dense_simplex(unb).status == LpStatus::unbounded);
}

TEST_CASE("empty problem") {
    LpProblem<double> lp;
    lp.add_variable(1);
    const auto s = solve_dense_simplex(lp);
    CHECK(s.status == LpStatus::optimal);
    CHECK(s.objective == 0.0);
}

TEST_CASE("degenerate cycling example terminates") {
    // Beale's example, which cycles under pure Dantzig pricing without anti-cycling.
    LpProblem<double> lp;
    const int x1 = lp.add_variable(-0.75), x2 = lp.add_variable(150), x3 = lp.add_variable(-0.02),
              x4 = lp.add_variable(6);
    lp.add_row({{{x1, 0.25}, {x2, -60}, {x3, -0.04}, {x4, 9}}, RowSense::less_equal, 0});
    lp.add_row({{{x1, 0.5}, {x2, -90}, {x3, -0.02}, {x4, 3}}, RowSense::less_equal, 0});
    lp.add_row({{{x3, 1.0}}, RowSense::less_equal, 1});
    SimplexOptions opt;
    opt.degenerate_switch = 2;
    const auto s = solve_dense_simplex(lp, opt);
    REQUIRE(s.status == LpStatus::optimal);
    CHECK(s.objective == doctest::Approx(-0.05));
}

TEST_CASE("random bounded LPs match vertex enumeration") {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> coef(-3.0, 3.0), pos(0.1, 3.0), rhs(0.5, 10.0);
    std::uniform_int_distribution<int> nd(1, 4), md(1, 5), sd(0, 5);
    int solved = 0;
    for (int trial = 0; trial < 400; ++trial) {
        LpProblem<double> lp;
        const int n = nd(rng);
        for (int j = 0; j < n; ++j)
            lp.add_variable(coef(rng));
        // A box row keeps every instance bounded.
        LpRow<double> box;
        for (int j = 0; j < n; ++j)
            box.terms.emplace_back(j, pos(rng));
        box.rhs = rhs(rng) * 3;
        lp.add_row(box);
        const int m = md(rng);
        for (int r = 0; r < m; ++r) {
            LpRow<double> row;
            for (int j = 0; j < n; ++j)
                row.terms.emplace_back(j, coef(rng));
            const int s = sd(rng);
            row.sense = s < 3 ? RowSense::less_equal : (s < 5 ? RowSense::greater_equal : RowSense::equal);
            row.rhs = coef(rng) * 2;
            lp.add_row(row);
        }
        const double ref = vertex_enumeration(lp);
        const auto sol = solve_dense_simplex(lp);
        if (std::isinf(ref)) {
            CHECK(sol.status == LpStatus::infeasible);
        } else {
            REQUIRE(sol.status == LpStatus::optimal);
            CHECK(sol.objective == doctest::Approx(ref).epsilon(1e-7));
            CHECK(lp.max_violation(sol.x) <= 1e-7);
            ++solved;
        }
    }
    CHECK(solved > 100);
}

TEST_CASE("float scalar instantiation") {
    LpProblem<float> lp;
    const int x = lp.add_variable(-1.0f);
    lp.add_row({{{x, 2.0f}}, RowSense::less_equal, 3.0f});
    const auto s = DenseSimplex<float>().solve(lp);
    REQUIRE(s.status == LpStatus::optimal);
    CHECK(s.x(0) == doctest::Approx(1.5f));
}
