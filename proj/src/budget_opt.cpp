#include "qcopt/budget_opt.hpp"

#include "qcopt/error.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace qcopt {

namespace {

constexpr double kFractionTieTolerance = 1e-9;

double require_budget(const RoutingInstance& instance) {
    if (!instance.budget()) {
        throw ValidationError("budget-opt requires a budget");
    }
    return *instance.budget();
}

void check_budget_floor(const RoutingInstance& instance, double budget) {
    const double floor = cheapest_assignment_cost(instance);
    if (budget < floor - kCurrencyTolerance) {
        std::ostringstream msg;
        msg.precision(12);
        msg << "budget " << budget << " is below the cheapest assignment cost " << floor;
        throw InfeasibleBudgetError(msg.str(), floor);
    }
}

}  // namespace

std::uint64_t assignment_space_size(int num_sections, int num_models) {
    std::uint64_t size = 1;
    for (int j = 0; j < num_sections; ++j) {
        if (size > std::numeric_limits<std::uint64_t>::max() / static_cast<std::uint64_t>(num_models)) {
            return std::numeric_limits<std::uint64_t>::max();
        }
        size *= static_cast<std::uint64_t>(num_models);
    }
    return size;
}

lp::LinearProgram<double> build_relaxation(const RoutingInstance& instance) {
    const double budget = require_budget(instance);
    const int n = instance.num_sections();
    const int k = instance.num_models();
    const Eigen::Index vars = static_cast<Eigen::Index>(n) * k;

    lp::LinearProgram<double> prog(vars);
    prog.upper.setOnes();
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < k; ++i) {
            prog.objective(relaxation_variable(j, i, k)) = instance.scores()(j, i);
        }
    }

    Eigen::VectorXd budget_row(vars);
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < k; ++i) {
            budget_row(relaxation_variable(j, i, k)) = instance.costs()(j, i);
        }
    }
    prog.add_constraint(std::move(budget_row), lp::Relation::LessEqual, budget);

    if (auto sla = instance.latency_sla()) {
        for (int i = 0; i < k; ++i) {
            Eigen::VectorXd row = Eigen::VectorXd::Zero(vars);
            for (int j = 0; j < n; ++j) {
                row(relaxation_variable(j, i, k)) = instance.latencies()(j, i);
            }
            prog.add_constraint(std::move(row), lp::Relation::LessEqual, *sla);
        }
    }

    for (int j = 0; j < n; ++j) {
        Eigen::VectorXd row = Eigen::VectorXd::Zero(vars);
        row.segment(relaxation_variable(j, 0, k), k).setOnes();
        prog.add_constraint(std::move(row), lp::Relation::Equal, 1.0);
    }
    return prog;
}

FractionalAllocation solve_relaxation(const RoutingInstance& instance) {
    const double budget = require_budget(instance);
    check_budget_floor(instance, budget);

    const int n = instance.num_sections();
    const int k = instance.num_models();
    FractionalAllocation frac;
    frac.x = Eigen::MatrixXd::Zero(n, k);
    if (n == 0) return frac;

    const auto solution = lp::solve(build_relaxation(instance));
    if (solution.status == lp::Status::Infeasible) {
        throw InfeasibleError("budget-opt relaxation is infeasible under the latency SLA");
    }
    if (solution.status != lp::Status::Optimal) {
        throw NumericalError(std::string("budget-opt relaxation ended with status ") +
                             lp::to_string(solution.status));
    }
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < k; ++i) {
            frac.x(j, i) = solution.values(relaxation_variable(j, i, k));
        }
    }
    frac.lp_objective = solution.objective_value;
    return frac;
}

RoutingPlan round_allocation(const FractionalAllocation& frac, const RoutingInstance& instance) {
    const int n = instance.num_sections();
    const int k = instance.num_models();
    if (frac.x.rows() != n || frac.x.cols() != k) {
        throw StructuralError("fractional allocation does not match the instance");
    }
    std::vector<int> assignment(n);
    for (int j = 0; j < n; ++j) {
        int best = 0;
        for (int i = 1; i < k; ++i) {
            const double diff = frac.x(j, i) - frac.x(j, best);
            if (diff > kFractionTieTolerance) {
                best = i;
            } else if (diff >= -kFractionTieTolerance &&
                       instance.costs()(j, i) < instance.costs()(j, best) - kCurrencyTolerance) {
                best = i;
            }
        }
        assignment[j] = best;
    }
    RoutingPlan plan = evaluate_assignment(instance, std::move(assignment));
    plan.lp_objective = frac.lp_objective;
    return plan;
}

RoutingPlan repair_to_budget(const RoutingInstance& instance, RoutingPlan plan) {
    const double budget = require_budget(instance);
    const int n = instance.num_sections();
    const int k = instance.num_models();
    const auto lp_objective = plan.lp_objective;
    auto assignment = plan.assignment;
    double total = plan.total_cost;

    while (total > budget + kCurrencyTolerance) {
        int best_section = -1, best_model = -1;
        double best_ratio = std::numeric_limits<double>::infinity();
        for (int j = 0; j < n; ++j) {
            const int cur = assignment[j];
            for (int i = 0; i < k; ++i) {
                const double saved = instance.costs()(j, cur) - instance.costs()(j, i);
                if (saved <= kCurrencyTolerance) continue;
                const double ratio = (instance.scores()(j, cur) - instance.scores()(j, i)) / saved;
                if (ratio < best_ratio) {
                    best_ratio = ratio;
                    best_section = j;
                    best_model = i;
                }
            }
        }
        if (best_section < 0) break;  // already at the cheapest assignment
        total -= instance.costs()(best_section, assignment[best_section]) -
                 instance.costs()(best_section, best_model);
        assignment[best_section] = best_model;
    }
    RoutingPlan repaired = evaluate_assignment(instance, std::move(assignment));
    repaired.lp_objective = lp_objective;
    return repaired;
}

RoutingPlan solve_budget_opt(const RoutingInstance& instance, const BudgetOptOptions& options) {
    RoutingPlan plan = round_allocation(solve_relaxation(instance), instance);
    if (options.repair_budget) plan = repair_to_budget(instance, std::move(plan));
    return plan;
}

namespace {

struct OracleSearch {
    const RoutingInstance& instance;
    double budget;
    std::optional<double> sla;
    int n, k;
    std::vector<int> current;
    Eigen::VectorXd latency;
    std::vector<int> best;
    double best_objective = -std::numeric_limits<double>::infinity();
    double best_cost = std::numeric_limits<double>::infinity();

    void run(int j, double cost, double objective) {
        if (cost > budget + kCurrencyTolerance) return;
        if (j == n) {
            const bool better =
                objective > best_objective + 1e-12 ||
                (objective >= best_objective - 1e-12 && cost < best_cost - kCurrencyTolerance);
            if (better) {
                best_objective = objective;
                best_cost = cost;
                best = current;
            }
            return;
        }
        for (int i = 0; i < k; ++i) {
            const double lat = latency(i) + instance.latencies()(j, i);
            if (sla && lat > *sla + 1e-9 * std::max(1.0, *sla)) continue;
            const double saved = latency(i);
            latency(i) = lat;
            current[j] = i;
            run(j + 1, cost + instance.costs()(j, i), objective + instance.scores()(j, i));
            latency(i) = saved;
        }
    }
};

}  // namespace

RoutingPlan budget_opt_oracle(const RoutingInstance& instance) {
    const double budget = require_budget(instance);
    const int n = instance.num_sections();
    const int k = instance.num_models();
    if (assignment_space_size(n, k) > kOracleGuard) {
        throw InstanceTooLargeError("budget-opt oracle refuses K^n above " +
                                    std::to_string(kOracleGuard));
    }
    OracleSearch search{instance, budget, instance.latency_sla(), n, k,
                        std::vector<int>(n, 0), Eigen::VectorXd::Zero(k), {}};
    search.run(0, 0.0, 0.0);
    if (search.best.size() != static_cast<std::size_t>(n)) {
        throw InfeasibleError("no assignment satisfies the budget and latency constraints");
    }
    return evaluate_assignment(instance, std::move(search.best));
}

}  // namespace qcopt
