#pragma once

// Dense two-phase primal simplex over bounded variables.
//
//   maximize    c^T x
//   subject to  a_r^T x  (<=, =, >=)  b_r      for every constraint r
//               lo <= x <= hi                  (hi may be +infinity)
//
// Upper bounds are handled implicitly (nonbasic variables sit at either
// bound), so box constraints never add tableau rows. Entering variables are
// priced by largest reduced cost (lowest index on ties); after a run of
// degenerate pivots pricing switches to Bland's rule until a step makes
// progress. Leaving ties go to the smallest basic index. The solve is a
// deterministic function of its input.

#include "qcopt/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace qcopt::lp {

enum class Relation { LessEqual, Equal, GreaterEqual };

enum class Status { Optimal, Infeasible, Unbounded };

inline const char* to_string(Status status) {
    switch (status) {
        case Status::Optimal: return "optimal";
        case Status::Infeasible: return "infeasible";
        case Status::Unbounded: return "unbounded";
    }
    return "unknown";
}

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
struct Constraint {
    Vector<Scalar> coefficients;
    Relation relation = Relation::LessEqual;
    Scalar rhs = Scalar(0);
};

template <typename Scalar>
struct LinearProgram {
    Vector<Scalar> objective;  // maximized
    std::vector<Constraint<Scalar>> constraints;
    Vector<Scalar> lower;
    Vector<Scalar> upper;

    LinearProgram() = default;

    /// n variables in [0, +inf), zero objective, no constraints.
    explicit LinearProgram(Eigen::Index num_variables)
        : objective(Vector<Scalar>::Zero(num_variables)),
          lower(Vector<Scalar>::Zero(num_variables)),
          upper(Vector<Scalar>::Constant(num_variables, std::numeric_limits<Scalar>::infinity())) {}

    Eigen::Index num_variables() const { return objective.size(); }

    void add_constraint(Vector<Scalar> coefficients, Relation relation, Scalar rhs) {
        constraints.push_back({std::move(coefficients), relation, rhs});
    }

    /// Throws StructuralError on dimension mismatches, non-finite data,
    /// lo > hi, or an infinite lower bound.
    void validate() const {
        const auto n = num_variables();
        if (lower.size() != n || upper.size() != n) {
            throw StructuralError("bounds do not match the objective dimension");
        }
        if (!objective.allFinite()) {
            throw StructuralError("objective has non-finite coefficients");
        }
        for (Eigen::Index j = 0; j < n; ++j) {
            if (!std::isfinite(lower(j)) || std::isnan(upper(j)) || lower(j) > upper(j)) {
                throw StructuralError("invalid bounds on variable " + std::to_string(j));
            }
        }
        for (std::size_t r = 0; r < constraints.size(); ++r) {
            const auto& con = constraints[r];
            if (con.coefficients.size() != n) {
                throw StructuralError("constraint " + std::to_string(r) +
                                      " does not match the objective dimension");
            }
            if (!con.coefficients.allFinite() || !std::isfinite(con.rhs)) {
                throw StructuralError("constraint " + std::to_string(r) + " has non-finite data");
            }
        }
    }
};

template <typename Scalar>
struct LpSolution {
    Status status = Status::Infeasible;
    Vector<Scalar> values;
    Scalar objective_value = Scalar(0);
    /// One multiplier per constraint, sign-feasible for the maximization dual
    /// (>= 0 on <= rows, <= 0 on >= rows). Only set when optimal.
    Vector<Scalar> duals;
    /// Dual bound b^T y + sum_j max(d_j lo_j, d_j hi_j), d = c - A^T y.
    Scalar dual_objective = Scalar(0);
    int iterations = 0;
};

struct Tolerances {
    double feasibility = 1e-7;
    double pivot = 1e-12;
    double optimality = 1e-9;  // relative to max |c|
};

namespace detail {

template <typename Scalar>
class BoundedSimplex {
public:
    using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    using Vec = Vector<Scalar>;

    BoundedSimplex(const LinearProgram<Scalar>& lp, const Tolerances& tol) : lp_(lp), tol_(tol) {}

    LpSolution<Scalar> run() {
        setup();
        LpSolution<Scalar> result;

        if (num_artificial_ > 0) {
            Vec phase_one = Vec::Zero(num_cols_);
            for (Eigen::Index c = first_artificial_; c < num_cols_; ++c) phase_one(c) = Scalar(-1);
            price(phase_one);
            const Status s = iterate(phase_one, /*phase_one=*/true);
            if (s == Status::Unbounded) {
                throw NumericalError("phase one reported an unbounded ray");
            }
            Scalar infeasibility = 0;
            for (Eigen::Index r = 0; r < rows_; ++r) {
                if (basis_[r] >= first_artificial_) infeasibility += beta_(r);
            }
            const Scalar scale = std::max<Scalar>(Scalar(1), rhs_.cwiseAbs().maxCoeff());
            if (infeasibility > Scalar(tol_.feasibility) * scale) {
                result.status = Status::Infeasible;
                result.iterations = iterations_;
                return result;
            }
            // Artificials are pinned at zero from here on.
            for (Eigen::Index c = first_artificial_; c < num_cols_; ++c) upper_(c) = Scalar(0);
        }

        Vec cost = Vec::Zero(num_cols_);
        cost.head(num_structural_) = lp_.objective;
        price(cost);
        const Status s = iterate(cost, /*phase_one=*/false);
        result.iterations = iterations_;
        result.status = s;
        if (s != Status::Optimal) return result;

        extract(result);
        return result;
    }

private:
    void setup() {
        lp_.validate();
        num_structural_ = lp_.num_variables();
        rows_ = static_cast<Eigen::Index>(lp_.constraints.size());

        // Shift x = lo + x' so every structural variable lives in [0, u].
        row_sign_.assign(rows_, Scalar(1));
        relation_.resize(rows_);
        rhs_.resize(rows_);
        Eigen::Index slacks = 0, artificials = 0;
        for (Eigen::Index r = 0; r < rows_; ++r) {
            const auto& con = lp_.constraints[r];
            Scalar b = con.rhs - con.coefficients.dot(lp_.lower);
            Relation rel = con.relation;
            if (b < Scalar(0)) {
                row_sign_[r] = Scalar(-1);
                b = -b;
                if (rel == Relation::LessEqual) rel = Relation::GreaterEqual;
                else if (rel == Relation::GreaterEqual) rel = Relation::LessEqual;
            }
            relation_[r] = rel;
            rhs_(r) = b;
            if (rel != Relation::Equal) ++slacks;
            if (rel != Relation::LessEqual) ++artificials;
        }
        num_slack_ = slacks;
        num_artificial_ = artificials;
        first_slack_ = num_structural_;
        first_artificial_ = num_structural_ + num_slack_;
        num_cols_ = first_artificial_ + num_artificial_;

        tableau_ = Mat::Zero(rows_, num_cols_);
        upper_ = Vec::Constant(num_cols_, std::numeric_limits<Scalar>::infinity());
        upper_.head(num_structural_) = lp_.upper - lp_.lower;
        at_upper_.assign(num_cols_, false);
        is_basic_.assign(num_cols_, false);
        basis_.assign(rows_, -1);
        slack_of_row_.assign(rows_, -1);
        artificial_of_row_.assign(rows_, -1);

        Eigen::Index next_slack = first_slack_, next_art = first_artificial_;
        for (Eigen::Index r = 0; r < rows_; ++r) {
            tableau_.row(r).head(num_structural_) =
                row_sign_[r] * lp_.constraints[r].coefficients.transpose();
            if (relation_[r] == Relation::LessEqual) {
                tableau_(r, next_slack) = Scalar(1);
                slack_of_row_[r] = next_slack;
                basis_[r] = next_slack++;
            } else {
                if (relation_[r] == Relation::GreaterEqual) {
                    tableau_(r, next_slack) = Scalar(-1);
                    slack_of_row_[r] = next_slack++;
                }
                tableau_(r, next_art) = Scalar(1);
                artificial_of_row_[r] = next_art;
                basis_[r] = next_art++;
            }
            is_basic_[basis_[r]] = true;
        }
        beta_ = rhs_;
    }

    // reduced_ = cost - cost_B^T T
    void price(const Vec& cost) {
        reduced_ = cost;
        for (Eigen::Index r = 0; r < rows_; ++r) {
            const Scalar cb = cost(basis_[r]);
            if (cb != Scalar(0)) reduced_ -= cb * tableau_.row(r).transpose();
        }
        const Scalar scale = cost.cwiseAbs().maxCoeff();
        optimality_tol_ = scale > Scalar(0) ? Scalar(tol_.optimality) * scale
                                            : std::numeric_limits<Scalar>::min();
    }

    bool eligible(Eigen::Index c, bool phase_one) const {
        if (is_basic_[c]) return false;
        if (!phase_one && c >= first_artificial_) return false;
        if (upper_(c) <= Scalar(0)) return false;
        const Scalar d = reduced_(c);
        return at_upper_[c] ? d < -optimality_tol_ : d > optimality_tol_;
    }

    Status iterate(const Vec& cost, bool phase_one) {
        const long limit = 50L * static_cast<long>(rows_ + num_cols_) + 1000L;
        for (;;) {
            if (iterations_ > limit) {
                throw NumericalError("simplex iteration limit exceeded");
            }
            Eigen::Index entering = -1;
            if (degenerate_run_ >= kDegenerateRunLimit) {
                for (Eigen::Index c = 0; c < num_cols_; ++c) {
                    if (eligible(c, phase_one)) {
                        entering = c;
                        break;
                    }
                }
            } else {
                Scalar best_score = Scalar(0);
                for (Eigen::Index c = 0; c < num_cols_; ++c) {
                    if (eligible(c, phase_one) && std::abs(reduced_(c)) > best_score) {
                        best_score = std::abs(reduced_(c));
                        entering = c;
                    }
                }
            }
            if (entering < 0) return Status::Optimal;
            ++iterations_;

            const Scalar dir = at_upper_[entering] ? Scalar(-1) : Scalar(1);
            Eigen::Index leave_row = -1;
            bool leave_to_upper = false;
            Scalar best = std::numeric_limits<Scalar>::infinity();
            bool tiny_blocker = false;
            for (Eigen::Index r = 0; r < rows_; ++r) {
                const Scalar a = tableau_(r, entering);
                const Scalar mag = std::abs(a);
                if (mag <= Scalar(tol_.pivot)) {
                    if (mag > Scalar(0)) tiny_blocker = true;
                    continue;
                }
                const Scalar rate = -dir * a;  // d(beta_r)/dt
                const Eigen::Index var = basis_[r];
                Scalar limit_t;
                bool to_upper;
                if (rate < Scalar(0)) {
                    limit_t = beta_(r) / -rate;
                    to_upper = false;
                } else {
                    if (!std::isfinite(upper_(var))) continue;
                    limit_t = (upper_(var) - beta_(r)) / rate;
                    to_upper = true;
                }
                limit_t = std::max(limit_t, Scalar(0));
                if (limit_t < best ||
                    (limit_t == best && leave_row >= 0 && var < basis_[leave_row])) {
                    best = limit_t;
                    leave_row = r;
                    leave_to_upper = to_upper;
                }
            }

            const Scalar flip = upper_(entering);
            if (leave_row < 0 && !std::isfinite(flip)) {
                if (tiny_blocker) {
                    throw NumericalError("no pivot above threshold in entering column " +
                                         std::to_string(entering));
                }
                return Status::Unbounded;
            }

            if (flip < best) {
                // Bound flip: the entering variable crosses its box without a basis change.
                beta_ -= dir * flip * tableau_.col(entering);
                at_upper_[entering] = !at_upper_[entering];
                degenerate_run_ = 0;
                continue;
            }

            const Scalar t = best;
            degenerate_run_ = t > Scalar(0) ? 0 : degenerate_run_ + 1;
            beta_ -= dir * t * tableau_.col(entering);
            const Scalar entering_value = at_upper_[entering] ? flip - t : t;
            const Eigen::Index leaving = basis_[leave_row];
            at_upper_[leaving] = leave_to_upper;
            is_basic_[leaving] = false;
            at_upper_[entering] = false;
            is_basic_[entering] = true;
            basis_[leave_row] = entering;
            pivot(leave_row, entering);
            beta_(leave_row) = entering_value;
            (void)cost;
        }
    }

    void pivot(Eigen::Index p, Eigen::Index q) {
        tableau_.row(p) /= tableau_(p, q);
        nonzero_.clear();
        for (Eigen::Index c = 0; c < num_cols_; ++c) {
            if (tableau_(p, c) != Scalar(0)) nonzero_.push_back(c);
        }
        const Scalar* pivot_row = tableau_.row(p).data();
        for (Eigen::Index r = 0; r < rows_; ++r) {
            if (r == p) continue;
            const Scalar f = tableau_(r, q);
            if (f == Scalar(0)) continue;
            Scalar* row = tableau_.row(r).data();
            for (Eigen::Index c : nonzero_) row[c] -= f * pivot_row[c];
            row[q] = Scalar(0);
        }
        const Scalar f = reduced_(q);
        if (f != Scalar(0)) {
            for (Eigen::Index c : nonzero_) reduced_(c) -= f * pivot_row[c];
            reduced_(q) = Scalar(0);
        }
    }

    void extract(LpSolution<Scalar>& result) const {
        const Eigen::Index n = num_structural_;
        Vec shifted = Vec::Zero(num_cols_);
        for (Eigen::Index c = 0; c < num_cols_; ++c) {
            if (!is_basic_[c] && at_upper_[c]) shifted(c) = upper_(c);
        }
        for (Eigen::Index r = 0; r < rows_; ++r) shifted(basis_[r]) = beta_(r);

        result.values.resize(n);
        for (Eigen::Index j = 0; j < n; ++j) {
            result.values(j) = std::clamp(lp_.lower(j) + shifted(j), lp_.lower(j), lp_.upper(j));
        }
        result.objective_value = lp_.objective.dot(result.values);

        // Simplex multipliers from the reduced costs of each row's unit column.
        result.duals.resize(rows_);
        for (Eigen::Index r = 0; r < rows_; ++r) {
            Scalar y;
            if (artificial_of_row_[r] >= 0) {
                y = -reduced_(artificial_of_row_[r]);
            } else {
                y = -reduced_(slack_of_row_[r]);
            }
            y *= row_sign_[r];
            switch (lp_.constraints[r].relation) {
                case Relation::LessEqual: y = std::max(y, Scalar(0)); break;
                case Relation::GreaterEqual: y = std::min(y, Scalar(0)); break;
                case Relation::Equal: break;
            }
            result.duals(r) = y;
        }

        Vec d = lp_.objective;
        Scalar dual = 0;
        for (Eigen::Index r = 0; r < rows_; ++r) {
            const auto& con = lp_.constraints[r];
            d -= result.duals(r) * con.coefficients;
            dual += result.duals(r) * con.rhs;
        }
        for (Eigen::Index j = 0; j < n; ++j) {
            const Scalar dj = d(j);
            if (std::isfinite(lp_.upper(j))) {
                dual += std::max(dj * lp_.lower(j), dj * lp_.upper(j));
            } else if (dj > optimality_tol_) {
                dual = std::numeric_limits<Scalar>::infinity();
            } else {
                dual += std::min(dj, Scalar(0)) * lp_.lower(j);
            }
        }
        result.dual_objective = dual;
    }

    const LinearProgram<Scalar>& lp_;
    Tolerances tol_;

    Eigen::Index num_structural_ = 0, rows_ = 0, num_slack_ = 0, num_artificial_ = 0;
    Eigen::Index first_slack_ = 0, first_artificial_ = 0, num_cols_ = 0;
    std::vector<Scalar> row_sign_;
    std::vector<Relation> relation_;
    Vec rhs_;

    Mat tableau_;
    Vec beta_;      // values of basic variables, by row
    Vec reduced_;   // c_j - c_B^T B^{-1} a_j
    Vec upper_;     // shifted upper bounds per column
    std::vector<bool> at_upper_, is_basic_;
    std::vector<Eigen::Index> basis_, slack_of_row_, artificial_of_row_;
    std::vector<Eigen::Index> nonzero_;
    Scalar optimality_tol_ = Scalar(0);
    int iterations_ = 0;
    // Consecutive zero-step pivots; past the limit pricing falls back to
    // Bland's rule, which cannot cycle.
    static constexpr int kDegenerateRunLimit = 32;
    int degenerate_run_ = 0;
};

}  // namespace detail

/// Solves `lp` to optimality or reports infeasibility / unboundedness.
///
/// Throws StructuralError for malformed programs and NumericalError when no
/// pivot above `tol.pivot` is available.
template <typename Scalar>
LpSolution<Scalar> solve(const LinearProgram<Scalar>& lp, const Tolerances& tol = {}) {
    detail::BoundedSimplex<Scalar> simplex(lp, tol);
    return simplex.run();
}

}  // namespace qcopt::lp
