#pragma once

#include "qcopt/core.hpp"
#include "qcopt/lp.hpp"

#include <cstdint>

namespace qcopt {

/// Largest search space the exhaustive oracles accept.
inline constexpr std::uint64_t kOracleGuard = 10'000'000;

/// Relaxed solution of the budget-constrained quality maximization.
struct FractionalAllocation {
    Eigen::MatrixXd x;  // (section, model), entries in [0,1], rows sum to 1
    double lp_objective = 0.0;
};

/// Column of x_{i,j} in the relaxation: section-major.
inline Eigen::Index relaxation_variable(int section, int model, int num_models) {
    return static_cast<Eigen::Index>(section) * num_models + model;
}

/// maximize sum S x  s.t.  budget row, one latency row per model (only when
/// an SLA is set), one assignment equality per section, 0 <= x <= 1.
/// Rows are ordered budget, latency (model order), sections.
lp::LinearProgram<double> build_relaxation(const RoutingInstance& instance);

/// Solves the relaxation. Throws InfeasibleBudgetError when the budget is
/// below the cheapest assignment and InfeasibleError when the SLA makes the
/// relaxation infeasible.
FractionalAllocation solve_relaxation(const RoutingInstance& instance);

/// Per section, picks the model with the largest fractional value; ties go
/// to the cheaper model, then to the lower model index.
RoutingPlan round_allocation(const FractionalAllocation& frac, const RoutingInstance& instance);

struct BudgetOptOptions {
    /// After rounding, demote sections (smallest score loss per unit of cost
    /// saved first) until the plan fits the budget. Off by default.
    bool repair_budget = false;
};

/// relax -> solve -> round. The returned plan carries lp_objective, an upper
/// bound on every integral plan's objective.
RoutingPlan solve_budget_opt(const RoutingInstance& instance, const BudgetOptOptions& options = {});

/// Greedy repair pass used by `repair_budget`; exposed for testing.
RoutingPlan repair_to_budget(const RoutingInstance& instance, RoutingPlan plan);

/// Exact solution by enumerating all K^n assignments. Ties on objective go to
/// the cheaper plan, then to the lexicographically smallest assignment.
/// Throws InstanceTooLargeError when K^n exceeds kOracleGuard and
/// InfeasibleError when no assignment fits.
RoutingPlan budget_opt_oracle(const RoutingInstance& instance);

/// K^n, saturating at UINT64_MAX.
std::uint64_t assignment_space_size(int num_sections, int num_models);

}  // namespace qcopt
