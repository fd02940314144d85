// simplex.hpp - Small linear-programming interface and a dense two-phase tableau simplex.
//
// Problems are stated as  minimize c'x  subject to  a_r'x {<=, >=, =} b_r,  x >= 0.
// Any solver with the LpSolver signature can stand in for the dense default.
#pragma once

#include <Eigen/Core>

#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace dcnc {

enum class RowSense { less_equal, greater_equal, equal };

template <typename Scalar>
struct LpRow {
    std::vector<std::pair<int, Scalar>> terms;
    RowSense sense = RowSense::less_equal;
    Scalar rhs = 0;
};

template <typename Scalar>
struct LpProblem {
    int variables = 0;
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> objective; // minimized
    std::vector<LpRow<Scalar>> rows;

    int add_variable(Scalar cost = 0) {
        objective.conservativeResize(variables + 1);
        objective(variables) = cost;
        return variables++;
    }
    int add_row(LpRow<Scalar> row) {
        rows.push_back(std::move(row));
        return static_cast<int>(rows.size()) - 1;
    }

    /// Largest violation of any row or sign constraint at x.
    Scalar max_violation(const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& x) const {
        Scalar worst = 0;
        for (int j = 0; j < variables; ++j)
            worst = std::max(worst, -x(j));
        for (const auto& r : rows) {
            Scalar lhs = 0;
            for (auto [j, a] : r.terms)
                lhs += a * x(j);
            const Scalar d = lhs - r.rhs;
            if (r.sense == RowSense::less_equal)
                worst = std::max(worst, d);
            else if (r.sense == RowSense::greater_equal)
                worst = std::max(worst, -d);
            else
                worst = std::max(worst, std::abs(d));
        }
        return worst;
    }
};

enum class LpStatus { optimal, infeasible, unbounded, iteration_limit };

inline std::string to_string(LpStatus s) {
    switch (s) {
    case LpStatus::optimal: return "optimal";
    case LpStatus::infeasible: return "infeasible";
    case LpStatus::unbounded: return "unbounded";
    case LpStatus::iteration_limit: return "iteration-limit";
    }
    return "unknown";
}

template <typename Scalar>
struct LpSolution {
    LpStatus status = LpStatus::infeasible;
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> x;
    Scalar objective = 0;
    long iterations = 0;
};

using LpSolver = std::function<LpSolution<double>(const LpProblem<double>&)>;

struct SimplexOptions {
    double pivot_tolerance = 1e-9;
    double cost_tolerance = 1e-9;
    double feasibility_tolerance = 1e-7;
    long max_iterations = 0; // 0: automatic
    int degenerate_switch = 50; // consecutive degenerate pivots before Bland's rule
};

template <typename Scalar>
class DenseSimplex {
public:
    using Tableau = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

    explicit DenseSimplex(SimplexOptions opt = {}) : opt_(opt) {}

    LpSolution<Scalar> solve(const LpProblem<Scalar>& lp) {
        build(lp);
        LpSolution<Scalar> sol;
        const long limit = opt_.max_iterations > 0 ? opt_.max_iterations : 50L * (m_ + cols_) + 1000;

        // Phase 1: minimize the sum of artificials.
        if (first_art_ < cols_) {
            phase_one_costs();
            const LpStatus s = iterate(limit, /*allow_artificial=*/true);
            sol.iterations = iterations_;
            if (s == LpStatus::iteration_limit) {
                sol.status = s;
                return sol;
            }
            if (-T_(m_, cols_) > Scalar(opt_.feasibility_tolerance) * std::max<Scalar>(1, rhs_scale_)) {
                sol.status = LpStatus::infeasible;
                return sol;
            }
            drive_out_artificials();
        }

        phase_two_costs(lp.objective);
        const LpStatus s = iterate(limit, /*allow_artificial=*/false);
        sol.iterations = iterations_;
        sol.status = s;
        if (s != LpStatus::optimal)
            return sol;
        sol.x = Vec::Zero(lp.variables);
        for (int r = 0; r < m_; ++r)
            if (basis_[r] < lp.variables)
                sol.x(basis_[r]) = std::max<Scalar>(0, T_(r, cols_));
        sol.objective = lp.objective.dot(sol.x);
        return sol;
    }

private:
    void build(const LpProblem<Scalar>& lp) {
        m_ = static_cast<int>(lp.rows.size());
        n_ = lp.variables;
        int extra = 0, arts = 0;
        std::vector<RowSense> sense(static_cast<std::size_t>(m_));
        std::vector<Scalar> sign(static_cast<std::size_t>(m_), Scalar(1));
        rhs_scale_ = 0;
        for (int r = 0; r < m_; ++r) {
            const auto& row = lp.rows[static_cast<std::size_t>(r)];
            RowSense s = row.sense;
            if (row.rhs < 0) {
                sign[static_cast<std::size_t>(r)] = Scalar(-1);
                if (s == RowSense::less_equal)
                    s = RowSense::greater_equal;
                else if (s == RowSense::greater_equal)
                    s = RowSense::less_equal;
            }
            sense[static_cast<std::size_t>(r)] = s;
            if (s != RowSense::equal)
                ++extra;
            if (s != RowSense::less_equal)
                ++arts;
            rhs_scale_ = std::max(rhs_scale_, std::abs(row.rhs));
        }
        first_art_ = n_ + extra;
        cols_ = first_art_ + arts;
        T_ = Tableau::Zero(m_ + 1, cols_ + 1);
        basis_.assign(static_cast<std::size_t>(m_), -1);
        int slack = n_, art = first_art_;
        for (int r = 0; r < m_; ++r) {
            const auto& row = lp.rows[static_cast<std::size_t>(r)];
            const Scalar sg = sign[static_cast<std::size_t>(r)];
            for (auto [j, a] : row.terms)
                T_(r, j) += sg * a;
            T_(r, cols_) = sg * row.rhs;
            switch (sense[static_cast<std::size_t>(r)]) {
            case RowSense::less_equal:
                T_(r, slack) = 1;
                basis_[static_cast<std::size_t>(r)] = slack++;
                break;
            case RowSense::greater_equal:
                T_(r, slack++) = -1;
                T_(r, art) = 1;
                basis_[static_cast<std::size_t>(r)] = art++;
                break;
            case RowSense::equal:
                T_(r, art) = 1;
                basis_[static_cast<std::size_t>(r)] = art++;
                break;
            }
        }
        iterations_ = 0;
    }

    void phase_one_costs() {
        T_.row(m_).setZero();
        for (int r = 0; r < m_; ++r)
            if (basis_[static_cast<std::size_t>(r)] >= first_art_)
                T_.row(m_) -= T_.row(r);
        for (int j = first_art_; j < cols_; ++j)
            T_(m_, j) = 0;
        for (int r = 0; r < m_; ++r)
            if (basis_[static_cast<std::size_t>(r)] >= first_art_)
                T_(m_, basis_[static_cast<std::size_t>(r)]) = 0;
    }

    void phase_two_costs(const Vec& c) {
        T_.row(m_).setZero();
        T_.row(m_).head(n_) = c.transpose();
        for (int r = 0; r < m_; ++r) {
            const int b = basis_[static_cast<std::size_t>(r)];
            if (b < n_ && c(b) != Scalar(0))
                T_.row(m_) -= c(b) * T_.row(r);
        }
    }

    void drive_out_artificials() {
        for (int r = 0; r < m_; ++r) {
            if (basis_[static_cast<std::size_t>(r)] < first_art_)
                continue;
            int best = -1;
            Scalar best_abs = Scalar(opt_.pivot_tolerance);
            for (int j = 0; j < first_art_; ++j)
                if (std::abs(T_(r, j)) > best_abs) {
                    best_abs = std::abs(T_(r, j));
                    best = j;
                }
            if (best >= 0)
                pivot(r, best);
        }
    }

    LpStatus iterate(long limit, bool allow_artificial) {
        const int last = allow_artificial ? cols_ : first_art_;
        int degenerate = 0;
        const Scalar ctol = Scalar(opt_.cost_tolerance);
        const Scalar ptol = Scalar(opt_.pivot_tolerance);
        while (iterations_ < limit) {
            const bool bland = degenerate >= opt_.degenerate_switch;
            int enter = -1;
            Scalar best = -ctol;
            for (int j = 0; j < last; ++j) {
                const Scalar d = T_(m_, j);
                if (d < best) {
                    enter = j;
                    if (bland)
                        break;
                    best = d;
                }
            }
            if (enter < 0)
                return LpStatus::optimal;

            int leave = -1;
            Scalar ratio = std::numeric_limits<Scalar>::infinity();
            for (int r = 0; r < m_; ++r) {
                const Scalar a = T_(r, enter);
                if (a > ptol) {
                    const Scalar q = T_(r, cols_) / a;
                    if (q < ratio - Scalar(1e-12) ||
                        (q <= ratio + Scalar(1e-12) && leave >= 0 &&
                         (bland ? basis_[static_cast<std::size_t>(r)] < basis_[static_cast<std::size_t>(leave)]
                                : a > T_(leave, enter)))) {
                        ratio = std::min(ratio, q);
                        leave = r;
                    }
                }
            }
            if (leave < 0)
                return LpStatus::unbounded;
            degenerate = T_(leave, cols_) <= ptol ? degenerate + 1 : 0;
            pivot(leave, enter);
            ++iterations_;
        }
        return LpStatus::iteration_limit;
    }

    void pivot(int r, int j) {
        pivot_row_ = T_.row(r) / T_(r, j);
        pivot_row_(j) = 1;
        T_.row(r) = pivot_row_;
        for (int i = 0; i <= m_; ++i) {
            if (i == r)
                continue;
            const Scalar f = T_(i, j);
            if (f != Scalar(0)) {
                T_.row(i) -= f * pivot_row_;
                T_(i, j) = 0;
            }
        }
        basis_[static_cast<std::size_t>(r)] = j;
    }

    SimplexOptions opt_;
    Tableau T_;
    Eigen::Matrix<Scalar, 1, Eigen::Dynamic> pivot_row_;
    std::vector<int> basis_;
    int m_ = 0, n_ = 0, cols_ = 0, first_art_ = 0;
    long iterations_ = 0;
    Scalar rhs_scale_ = 0;
};

template <typename Scalar>
LpSolution<Scalar> solve_dense_simplex(const LpProblem<Scalar>& lp, SimplexOptions opt = {}) {
    return DenseSimplex<Scalar>(opt).solve(lp);
}

inline LpSolver default_lp_solver() {
    return [](const LpProblem<double>& lp) { return solve_dense_simplex(lp); };
}

} // namespace dcnc
