#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "catch_amalgamated.hpp"
#include "sdist/calibrate.hpp"

using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;
using namespace sdist::calibrate;

namespace {

ModelCell cell(std::string zcta, double employment, double density, double chi, std::string industry = "11") {
    return {std::move(zcta), industry + "1111", industry, employment, density, chi};
}

// Weighted least squares slope computed with plain sums.
double slope(const std::vector<double>& x, const std::vector<double>& y, const std::vector<double>& w) {
    double sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sw += w[i];
        sx += w[i] * x[i];
        sy += w[i] * y[i];
        sxx += w[i] * x[i] * x[i];
        sxy += w[i] * x[i] * y[i];
    }
    return (sw * sxy - sx * sy) / (sw * sxx - sx * sx);
}

std::vector<ContactCell> random_grid(std::mt19937_64& rng, int n) {
    std::uniform_real_distribution<double> u(0.2, 5.0);
    std::vector<ContactCell> g;
    for (int i = 0; i < n; ++i) g.push_back({std::to_string(i), "11", u(rng), u(rng)});
    return g;
}

}  // namespace

TEST_CASE("eps from a constant communication share") {
    const std::vector<ModelCell> cells = {cell("a", 3, 0.5, 0.4), cell("b", 1, 2.0, 0.4), cell("c", 6, 7.0, 0.4)};
    const auto fit = calibrate_epsilon(cells, 0.04);
    CHECK_THAT(fit.k, WithinAbs(0.4, 1e-12));
    CHECK_THAT(fit.eps, WithinAbs(0.1, 1e-9));

    std::vector<double> x, y, w;
    for (const auto& c : cells) {
        x.push_back(std::log(c.density));
        y.push_back(fit.eps * c.chi * std::log(c.density));
        w.push_back(c.employment);
    }
    CHECK_THAT(slope(x, y, w), WithinAbs(0.04, 1e-9));

    std::vector<ModelCell> ones = cells;
    for (auto& c : ones) c.chi = 1.0;
    CHECK_THAT(calibrate_epsilon(ones, 0.04).eps, WithinAbs(0.04, 1e-12));
}

TEST_CASE("eps with varying shares matches an explicit regression") {
    const std::vector<ModelCell> cells = {cell("a", 3, 0.2, 0.1), cell("b", 5, 1.0, 0.3), cell("c", 2, 4.0, 0.6),
                                          cell("d", 1, 9.0, 0.5)};
    std::vector<double> x, y, w;
    for (const auto& c : cells) {
        x.push_back(std::log(c.density));
        y.push_back(c.chi * std::log(c.density));
        w.push_back(c.employment);
    }
    const double k = slope(x, y, w);
    const auto fit = calibrate_epsilon(cells, 0.04);
    CHECK_THAT(fit.k, WithinRel(k, 1e-12));
    CHECK_THAT(fit.eps, WithinRel(0.04 / k, 1e-12));
    CHECK_THAT(fit.achieved_slope, WithinAbs(0.04, 1e-12));
}

TEST_CASE("eps calibration failures") {
    const std::vector<ModelCell> flat = {cell("a", 1, 2.0, 0.3), cell("b", 1, 2.0, 0.5)};
    CHECK_THROWS_AS(calibrate_epsilon(flat, 0.04), sdist::CalibrationError);
    // Above average density a share that falls with density gives k < 0.
    const std::vector<ModelCell> negative = {cell("a", 1, std::exp(1.0), 1.0), cell("b", 1, std::exp(2.0), 0.0)};
    CHECK_THROWS_AS(calibrate_epsilon(negative, 0.04), sdist::CalibrationError);
    const std::vector<ModelCell> ok = {cell("a", 1, 0.5, 0.3), cell("b", 1, 2.0, 0.3)};
    CHECK_THROWS_AS(calibrate_epsilon(ok, 0.0), sdist::ConfigError);
}

TEST_CASE("contacts grid") {
    const std::vector<ModelCell> ones = {cell("a", 1, 1.0, 0.3), cell("b", 2, 1.0, 0.7)};
    for (const auto& c : optimal_contacts_grid(ones, 0.05)) CHECK(c.nstar == 1.0);

    const double eps = 0.04;
    const double chi = 0.25;
    const std::vector<ModelCell> e = {cell("a", 1, std::exp(1.0 / (eps * (1.0 - chi))), chi)};
    CHECK_THAT(optimal_contacts_grid(e, eps)[0].nstar, WithinRel(std::exp(1.0), 1e-12));

    const std::vector<ModelCell> mixed = {cell("a", 1, 0.3, 0.2), cell("b", 0, 3.0, 0.5), cell("c", 4, 3.0, 0.5)};
    const auto grid = optimal_contacts_grid(mixed, 0.07);
    REQUIRE(grid.size() == 2);
    CHECK(grid[1].nstar == sdist::model::contacts_at_density(3.0, 0.07, sdist::model::FirmParams::from_chi(0.5)));
}

TEST_CASE("contact cap") {
    const std::vector<ContactCell> two = {{"a", "1", 1, 2}, {"b", "1", 1, 4}};
    CHECK_THAT(calibrate_cap(two, 0.5), WithinAbs(1.5, 1e-9));
    CHECK(calibrate_cap_exact(two, 0.5) == 1.5);
    CHECK(calibrate_cap(two, 1.0) == 4.0);

    const std::vector<ContactCell> same = {{"a", "1", 2, 3}, {"b", "1", 7, 3}, {"c", "1", 1, 3}};
    CHECK_THAT(calibrate_cap(same, 0.3), WithinAbs(0.9, 1e-9));

    CHECK_THROWS_AS(calibrate_cap(two, 0.0), sdist::ConfigError);
    CHECK_THROWS_AS(calibrate_cap(two, 1.5), sdist::ConfigError);
}

TEST_CASE("bisection agrees with the exact piecewise-linear solution") {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> share(0.01, 0.99);
    for (int trial = 0; trial < 50; ++trial) {
        const auto grid = random_grid(rng, 1 + trial * 3);
        const double s = share(rng);
        const double n = calibrate_cap(grid, s);
        CHECK_THAT(n, WithinAbs(calibrate_cap_exact(grid, s), 1e-9));
        CHECK_THAT(contact_share(grid, n), WithinAbs(s, 1e-9));
    }
}

TEST_CASE("contact share is monotone in the cap") {
    std::mt19937_64 rng(17);
    const auto grid = random_grid(rng, 40);
    double prev = 0.0;
    for (int i = 1; i <= 60; ++i) {
        const double s = contact_share(grid, i * 0.1);
        CHECK(s >= prev);
        prev = s;
    }
    CHECK(prev == 1.0);
}

TEST_CASE("calibrate_model") {
    const std::vector<ModelCell> cells = {cell("a", 3, 0.2, 0.1, "11"), cell("b", 5, 1.0, 0.3, "21"),
                                          cell("c", 2, 4.0, 0.6, "22"), cell("c", 1, 4.0, 0.3, "21")};
    const auto r = calibrate_model(cells, {});
    CHECK_THAT(r.achieved_slope, WithinAbs(0.04, 1e-12));
    CHECK_THAT(r.achieved_share, WithinAbs(0.5, 1e-9));
    CHECK(r.industries == 3);
    CHECK(r.regions == 3);
    CHECK(r.cells == 4);
    CHECK_FALSE(r.eps_fixed);

    const auto fixed = calibrate_model(cells, {0.5, 0.04, 0.02});
    CHECK(fixed.eps_fixed);
    CHECK(fixed.model.eps == 0.02);
    CHECK_THAT(fixed.achieved_slope, WithinRel(0.02 * r.k, 1e-12));

    std::vector<ModelCell> bad = cells;
    bad[0].chi = 1.0;
    CHECK_THROWS_AS(calibrate_model(bad, {}), sdist::CalibrationError);
    CHECK_THROWS_AS(calibrate_model(std::vector<ModelCell>{}, {}), sdist::CalibrationError);
}
