#include <doctest.h>

#include <random>

#include "qcopt/lp.hpp"

using namespace qcopt;
using LP = lp::LinearProgram<double>;
using Vec = Eigen::VectorXd;

namespace {

// Every vertex of the feasible box-and-constraint polytope in n <= 3
// dimensions: solve each n-subset of active hyperplanes directly.
struct VertexOracle {
    bool feasible = false;
    bool bounded = true;
    double best = -std::numeric_limits<double>::infinity();
};

bool satisfies(const LP& p, const Vec& x, double tol) {
    for (Eigen::Index j = 0; j < x.size(); ++j)
        if (x(j) < p.lower(j) - tol || x(j) > p.upper(j) + tol) return false;
    for (const auto& c : p.constraints) {
        const double lhs = c.coefficients.dot(x);
        if (c.relation == lp::Relation::LessEqual && lhs > c.rhs + tol) return false;
        if (c.relation == lp::Relation::GreaterEqual && lhs < c.rhs - tol) return false;
        if (c.relation == lp::Relation::Equal && std::abs(lhs - c.rhs) > tol) return false;
    }
    return true;
}

VertexOracle enumerate_vertices(const LP& p) {
    const auto n = p.num_variables();
    std::vector<std::pair<Vec, double>> planes;
    for (const auto& c : p.constraints) planes.emplace_back(c.coefficients, c.rhs);
    for (Eigen::Index j = 0; j < n; ++j) {
        planes.emplace_back(Vec::Unit(n, j), p.lower(j));
        if (std::isfinite(p.upper(j))) planes.emplace_back(Vec::Unit(n, j), p.upper(j));
    }
    VertexOracle out;
    const int m = static_cast<int>(planes.size());
    std::vector<int> pick(n);
    auto rec = [&](auto&& self, int depth, int start) -> void {
        if (depth == n) {
            Eigen::MatrixXd a(n, n);
            Vec b(n);
            for (Eigen::Index r = 0; r < n; ++r) {
                a.row(r) = planes[pick[r]].first.transpose();
                b(r) = planes[pick[r]].second;
            }
            Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
            if (lu.rank() < n) return;
            const Vec x = lu.solve(b);
            if (!satisfies(p, x, 1e-9)) return;
            out.feasible = true;
            out.best = std::max(out.best, p.objective.dot(x));
            return;
        }
        for (int i = start; i < m; ++i) {
            pick[depth] = i;
            self(self, depth + 1, i + 1);
        }
    };
    rec(rec, 0, 0);
    return out;
}

LP random_lp(std::mt19937_64& rng, int n) {
    std::uniform_int_distribution<int> coef(-5, 5), rhs(0, 10), rel(0, 2), rows(1, 4);
    LP p(n);
    for (int j = 0; j < n; ++j) {
        p.objective(j) = coef(rng);
        p.upper(j) = std::uniform_int_distribution<int>(1, 6)(rng);
    }
    const int r = rows(rng);
    for (int k = 0; k < r; ++k) {
        Vec a(n);
        for (int j = 0; j < n; ++j) a(j) = coef(rng);
        p.add_constraint(a, static_cast<lp::Relation>(rel(rng)), rhs(rng) - 3);
    }
    return p;
}

}  // namespace

TEST_CASE("single variable bound") {
    LP p(1);
    p.objective << 1;
    p.upper << 10;
    p.add_constraint(Vec::Ones(1), lp::Relation::LessEqual, 1);
    const auto s = lp::solve(p);
    REQUIRE(s.status == lp::Status::Optimal);
    CHECK(s.values(0) == doctest::Approx(1));
    CHECK(s.objective_value == doctest::Approx(1));
}

TEST_CASE("tight simplex face") {
    LP p(2);
    p.objective << 1, 1;
    p.upper << 1, 1;
    p.add_constraint(Vec::Ones(2), lp::Relation::LessEqual, 1);
    const auto s = lp::solve(p);
    REQUIRE(s.status == lp::Status::Optimal);
    CHECK(s.objective_value == doctest::Approx(1));
}

TEST_CASE("two-variable textbook problem") {
    LP p(2);
    p.objective << 3, 2;
    Vec a(2), b(2);
    a << 1, 1;
    b << 1, 3;
    p.add_constraint(a, lp::Relation::LessEqual, 4);
    p.add_constraint(b, lp::Relation::LessEqual, 6);
    const auto s = lp::solve(p);
    REQUIRE(s.status == lp::Status::Optimal);
    CHECK(s.values(0) == doctest::Approx(4));
    CHECK(s.values(1) == doctest::Approx(0));
    CHECK(s.objective_value == doctest::Approx(12));
    CHECK(enumerate_vertices(p).best == doctest::Approx(12));
}

TEST_CASE("infeasible and unbounded") {
    LP p(1);
    p.objective << 1;
    p.add_constraint(Vec::Ones(1), lp::Relation::GreaterEqual, 5);
    p.upper << 2;
    CHECK(lp::solve(p).status == lp::Status::Infeasible);

    LP q(2);
    q.objective << 1, 0;
    Vec a(2);
    a << 0, 1;
    q.add_constraint(a, lp::Relation::LessEqual, 1);
    CHECK(lp::solve(q).status == lp::Status::Unbounded);
}

TEST_CASE("equality and lower bounds") {
    LP p(2);
    p.objective << 1, 2;
    p.lower << 1, -2;
    p.upper << 5, 5;
    p.add_constraint(Vec::Ones(2), lp::Relation::Equal, 3);
    const auto s = lp::solve(p);
    REQUIRE(s.status == lp::Status::Optimal);
    CHECK(s.values(0) == doctest::Approx(1));
    CHECK(s.values(1) == doctest::Approx(2));
}

TEST_CASE("dimension mismatch is structural") {
    LP p(2);
    p.add_constraint(Vec::Ones(3), lp::Relation::LessEqual, 1);
    CHECK_THROWS_AS(lp::solve(p), StructuralError);
    LP q(1);
    q.lower << 2;
    q.upper << 1;
    CHECK_THROWS_AS(lp::solve(q), StructuralError);
}

TEST_CASE("random small LPs match vertex enumeration") {
    std::mt19937_64 rng(42);
    int optimal = 0;
    for (int t = 0; t < 600; ++t) {
        const int n = 1 + t % 3;
        const LP p = random_lp(rng, n);
        const auto s = lp::solve(p);
        const auto v = enumerate_vertices(p);
        // Boxes are bounded, so the LP is either optimal or infeasible.
        REQUIRE(s.status != lp::Status::Unbounded);
        CHECK((s.status == lp::Status::Optimal) == v.feasible);
        if (s.status != lp::Status::Optimal) continue;
        ++optimal;
        CHECK(std::abs(s.objective_value - v.best) <= 1e-7);
        CHECK(satisfies(p, s.values, 1e-7));
        // Weak duality with the certified dual bound.
        CHECK(s.objective_value <= s.dual_objective + 1e-6);
        CHECK(std::abs(s.objective_value - s.dual_objective) <= 1e-6);

        LP scaled = p;
        scaled.objective *= 3.5;
        const auto s2 = lp::solve(scaled);
        REQUIRE(s2.status == lp::Status::Optimal);
        CHECK((s2.values - s.values).cwiseAbs().maxCoeff() == 0.0);
        CHECK(s2.objective_value == doctest::Approx(3.5 * s.objective_value));
    }
    CHECK(optimal > 100);
}

TEST_CASE("deterministic") {
    std::mt19937_64 rng(5);
    const LP p = random_lp(rng, 3);
    const auto a = lp::solve(p), b = lp::solve(p);
    CHECK(a.status == b.status);
    if (a.status == lp::Status::Optimal) CHECK(a.values == b.values);
}

TEST_CASE("float scalar") {
    lp::LinearProgram<float> p(2);
    p.objective << 3, 2;
    Eigen::VectorXf a(2), b(2);
    a << 1, 1;
    b << 1, 3;
    p.add_constraint(a, lp::Relation::LessEqual, 4);
    p.add_constraint(b, lp::Relation::LessEqual, 6);
    const auto s = lp::solve(p, lp::Tolerances{1e-5, 1e-7, 1e-6});
    REQUIRE(s.status == lp::Status::Optimal);
    CHECK(s.objective_value == doctest::Approx(12.0f));
}
