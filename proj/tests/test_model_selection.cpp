#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "msgwr/errors.h"
#include "msgwr/model_selection.h"

using namespace msgwr;

TEST_CASE("corrected AIC arithmetic")
{
    // Independently computed: 100 ln(1) + 100 ln(2 pi) + 100*105/93.
    const CriterionValue c = aicc(100, 1.0, 5.0);
    REQUIRE(c.feasible);
    CHECK(c.value == Catch::Approx(296.6909324473862).epsilon(1e-12));

    // sigma2 scales the first term only.
    const CriterionValue c2 = aicc(100, 2.0, 5.0);
    CHECK(c2.value == Catch::Approx(c.value + 100.0 * std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("corrected AIC flags infeasible configurations")
{
    CHECK_FALSE(aicc(100, 1.0, 98.0).feasible);   // denominator zero
    CHECK_FALSE(aicc(100, 1.0, 99.5).feasible);   // denominator negative
    CHECK_FALSE(aicc(100, 0.0, 5.0).feasible);    // perfect fit
    CHECK(aicc(100, 1e-300, 5.0).feasible);       // tiny but positive is fine
    CHECK_THROWS_AS(aicc(100, -1.0, 5.0), numeric_error);
}

TEST_CASE("cv score equals literal leave-one-out on a global fit")
{
    std::mt19937 rng(2024);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int rep = 0; rep < 20; ++rep) {
        const arma::uword n = 12 + rep;
        const arma::uword m = 3;
        arma::mat X(n, m);
        X.col(0).ones();
        for (arma::uword j = 1; j < m; ++j)
            for (arma::uword i = 0; i < n; ++i) X(i, j) = normal(rng);
        arma::vec y(n);
        for (auto& v : y) v = normal(rng);

        const arma::mat Minv = arma::inv(X.t() * X);
        const arma::mat H = X * Minv * X.t();
        const arma::vec fitted = H * y;
        const CriterionValue cv = cv_score(y - fitted, H.diag());
        REQUIRE(cv.feasible);

        // Literal oracle: refit n times without row i and predict y_i.
        double press = 0.0;
        for (arma::uword i = 0; i < n; ++i) {
            arma::mat Xi = X;
            arma::vec yi = y;
            Xi.shed_row(i);
            yi.shed_row(i);
            const arma::vec b = arma::solve(Xi, yi);
            const double e = y(i) - arma::dot(X.row(i), b);
            press += e * e;
        }
        CHECK(cv.value == Catch::Approx(press / static_cast<double>(n)).epsilon(1e-10));
    }
}

TEST_CASE("cv score is infeasible at leverage one")
{
    const arma::vec resid = {0.5, -0.5, 0.1};
    CHECK(cv_score(resid, arma::vec{0.2, 0.3, 0.1}).feasible);
    CHECK_FALSE(cv_score(resid, arma::vec{0.2, 1.0, 0.1}).feasible);
}

namespace {

std::function<CriterionValue(int)> convex_about(int target, int* evals = nullptr)
{
    return [target, evals](int k) {
        if (evals) ++(*evals);
        const double d = static_cast<double>(k - target);
        CriterionValue c;
        c.value = d * d;
        c.feasible = true;
        return c;
    };
}

} // namespace

TEST_CASE("golden section finds the exact argmin of convex integer criteria")
{
    std::mt19937 rng(31);
    std::uniform_int_distribution<int> pick(5, 200);
    for (int rep = 0; rep < 50; ++rep) {
        const int target = pick(rng);
        const BandwidthSearchResult res =
            golden_section_bandwidth_search(convex_about(target), 5, 200);
        CHECK(res.bandwidth == target);
        CHECK(res.criterion == 0.0);
    }
}

TEST_CASE("golden section memoizes and ties break to the larger bandwidth")
{
    int evals = 0;
    const BandwidthSearchResult res =
        golden_section_bandwidth_search(convex_about(40, &evals), 5, 200);
    CHECK(res.bandwidth == 40);
    CHECK(evals == static_cast<int>(res.evaluated.size()));  // one call per k

    // f(k) = |2k - 21| has equal minima at 10 and 11.
    const auto vshape = [](int k) {
        CriterionValue c;
        c.value = std::abs(2.0 * k - 21.0);
        c.feasible = true;
        return c;
    };
    CHECK(golden_section_bandwidth_search(vshape, 5, 200).bandwidth == 11);

    // A constant criterion degenerates to the smoothest model.
    const auto flat = [](int) {
        CriterionValue c;
        c.value = 7.0;
        c.feasible = true;
        return c;
    };
    CHECK(golden_section_bandwidth_search(flat, 5, 200).bandwidth == 200);
}

TEST_CASE("golden section skips infeasible candidates and can fail")
{
    // Feasible only above 150; minimum at the boundary.
    const auto partial = [](int k) {
        CriterionValue c;
        if (k < 150) return CriterionValue::infeasible();
        c.value = static_cast<double>(k);
        c.feasible = true;
        return c;
    };
    const BandwidthSearchResult res =
        golden_section_bandwidth_search(partial, 5, 200);
    CHECK(res.bandwidth >= 150);

    const auto never = [](int) { return CriterionValue::infeasible(); };
    CHECK_THROWS_AS(golden_section_bandwidth_search(never, 5, 200),
                    calibration_error);
    CHECK_THROWS_AS(golden_section_bandwidth_search(partial, 10, 5),
                    parameter_error);
}

namespace {

std::function<CriterionValue(double)> parabola(double target)
{
    return [target](double a) {
        CriterionValue c;
        c.value = (a - target) * (a - target);
        c.feasible = true;
        return c;
    };
}

} // namespace

TEST_CASE("divide and conquer alpha search lands within epsilon")
{
    std::mt19937 rng(12);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int rep = 0; rep < 20; ++rep) {
        const double target = unif(rng);
        const AlphaSearchResult res = alpha_search_dnc(parabola(target), 0.005);
        CHECK(std::abs(res.alpha - target) <= 0.005 + 1e-12);
    }
}

TEST_CASE("alpha searches always evaluate the endpoints exactly")
{
    // Strictly decreasing: optimum at 1, must be the exact double 1.0.
    const auto decreasing = [](double a) {
        CriterionValue c;
        c.value = 1.0 - a;
        c.feasible = true;
        return c;
    };
    CHECK(alpha_search_dnc(decreasing).alpha == 1.0);
    CHECK(alpha_search_greedy(decreasing).alpha == 1.0);

    const auto increasing = [](double a) {
        CriterionValue c;
        c.value = a;
        c.feasible = true;
        return c;
    };
    CHECK(alpha_search_dnc(increasing).alpha == 0.0);
    CHECK(alpha_search_greedy(increasing).alpha == 0.0);

    // Ties break toward the geographic end.
    const auto flat = [](double) {
        CriterionValue c;
        c.value = 3.0;
        c.feasible = true;
        return c;
    };
    CHECK(alpha_search_dnc(flat).alpha == 1.0);
    CHECK(alpha_search_greedy(flat).alpha == 1.0);
}

TEST_CASE("greedy alpha search escapes the worse of two basins")
{
    // Local basin near 0.1 (value 0.05), global basin at 0.8 (value 0).
    const auto two_basin = [](double a) {
        CriterionValue c;
        const double left = (a - 0.1) * (a - 0.1) + 0.05;
        const double right = (a - 0.8) * (a - 0.8);
        c.value = std::min(left, right);
        c.feasible = true;
        return c;
    };
    const AlphaSearchResult res = alpha_search_greedy(two_basin);
    CHECK(std::abs(res.alpha - 0.8) <= 0.01 + 1e-12);
}

TEST_CASE("alpha search parameter validation")
{
    CHECK_THROWS_AS(alpha_search_dnc(parabola(0.5), 0.0), parameter_error);
    CHECK_THROWS_AS(alpha_search_dnc(parabola(0.5), 1.0), parameter_error);
    CHECK_THROWS_AS(alpha_search_greedy(parabola(0.5), {}), parameter_error);
    CHECK_THROWS_AS(alpha_search_greedy(parabola(0.5), {1.5}), parameter_error);
    CHECK_THROWS_AS(alpha_search_greedy(parabola(0.5), {0.5}, 0.0),
                    parameter_error);
}

TEST_CASE("alpha searches surface infeasibility as calibration errors")
{
    const auto never = [](double) { return CriterionValue::infeasible(); };
    CHECK_THROWS_AS(alpha_search_dnc(never), calibration_error);
    CHECK_THROWS_AS(alpha_search_greedy(never), calibration_error);
}
