#pragma once

#include <stdexcept>
#include <string>

namespace qcopt {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent input: bad JSON, unknown keys, out-of-range
/// scores, missing token counts. The CLI maps these to exit code 2.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// The requested problem has no feasible solution. The CLI maps these to
/// exit code 1.
class InfeasibleError : public Error {
public:
    using Error::Error;
};

/// Budget below the cost of the cheapest full assignment.
class InfeasibleBudgetError : public InfeasibleError {
public:
    InfeasibleBudgetError(const std::string& what, double minimum_budget)
        : InfeasibleError(what), minimum_budget_(minimum_budget) {}

    double minimum_budget() const noexcept { return minimum_budget_; }

private:
    double minimum_budget_;
};

/// A section whose quality floor no model can meet.
class InfeasibleSectionError : public InfeasibleError {
public:
    InfeasibleSectionError(const std::string& what, std::string section_id, double best_score)
        : InfeasibleError(what), section_id_(std::move(section_id)), best_score_(best_score) {}

    const std::string& section_id() const noexcept { return section_id_; }
    double best_score() const noexcept { return best_score_; }

private:
    std::string section_id_;
    double best_score_;
};

/// Exhaustive search refused because the search space exceeds its guard.
class InstanceTooLargeError : public Error {
public:
    using Error::Error;
};

/// Caller violated an operation precondition (e.g. non-uniform sections for
/// the flow construction).
class PreconditionError : public Error {
public:
    using Error::Error;
};

/// Dimension mismatches and malformed internal structures.
class StructuralError : public Error {
public:
    using Error::Error;
};

/// The simplex could not find a numerically safe pivot.
class NumericalError : public Error {
public:
    using Error::Error;
};

/// A loss estimator threw while scoring an edit.
class EstimatorError : public Error {
public:
    EstimatorError(const std::string& what, std::string heuristic)
        : Error(what), heuristic_(std::move(heuristic)) {}

    const std::string& heuristic() const noexcept { return heuristic_; }

private:
    std::string heuristic_;
};

}  // namespace qcopt
