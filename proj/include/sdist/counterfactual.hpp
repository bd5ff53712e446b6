#pragma once

// Compensating wage subsidies under a calibrated contact cap, their sector
// and location aggregates, and cost-ratio curves against density.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "sdist/calibrate.hpp"
#include "sdist/error.hpp"
#include "sdist/model.hpp"
#include "sdist/numeric.hpp"

namespace sdist::counterfactual {

struct SubsidyResult {
    std::string zcta;
    std::string naics;
    std::string industry_code;
    double nstar = 0.0;
    double cap_ratio = 1.0;  // min(1, N / n*)
    double lambda = 0.0;
    double employment = 0.0;
    /// Only set when a telecom cost is supplied.
    std::optional<model::Regime> regime;
};

struct SubsidyOptions {
    unsigned threads = 1;
    std::optional<double> telecom_cost;
};

inline std::vector<SubsidyResult> compute_subsidies(const calibrate::CalibratedModel& calibrated,
                                                    std::span<const calibrate::ModelCell> cells,
                                                    const SubsidyOptions& options = {}) {
    const model::Intervention intervention(calibrated.contact_cap, options.telecom_cost);
    std::vector<SubsidyResult> out(cells.size());
    parallel_for(cells.size(), options.threads, [&](std::size_t i) {
        const auto& c = cells[i];
        auto it = calibrated.industry_params.find(c.industry_code);
        const auto params = it != calibrated.industry_params.end() ? it->second : model::FirmParams::from_chi(c.chi);
        SubsidyResult r;
        r.zcta = c.zcta;
        r.naics = c.naics;
        r.industry_code = c.industry_code;
        r.employment = c.employment;
        r.nstar = model::contacts_at_density(c.density, calibrated.eps, params);
        r.cap_ratio = std::min(1.0, calibrated.contact_cap / r.nstar);
        r.lambda = params.chi() == 0.0 ? 0.0 : model::compensating_subsidy(r.cap_ratio, params);
        if (options.telecom_cost) {
            r.regime = model::preferred_regime(intervention, c.density, calibrated.eps, params).regime;
        }
        out[i] = std::move(r);
    });
    return out;
}

struct SubsidyRow {
    std::string key;
    double lambda = 0.0;  // employment-weighted mean
    double employment = 0.0;
};

struct SubsidyTable {
    std::vector<SubsidyRow> rows;
    SubsidyRow overall;
    std::vector<std::string> warnings;
};

namespace detail {

inline SubsidyRow weighted(std::string key, const std::vector<const SubsidyResult*>& members) {
    CompensatedSum emp, weighted;
    for (const auto* r : members) {
        emp += r->employment;
        weighted += r->employment * r->lambda;
    }
    SubsidyRow row{std::move(key), 0.0, emp.value()};
    if (row.employment > 0.0) row.lambda = weighted.value() / row.employment;
    return row;
}

/// Results in (zcta, naics) order, the reduction order for every table.
inline std::vector<const SubsidyResult*> ordered(std::span<const SubsidyResult> results) {
    std::vector<const SubsidyResult*> out;
    out.reserve(results.size());
    for (const auto& r : results) out.push_back(&r);
    std::sort(out.begin(), out.end(), [](const SubsidyResult* a, const SubsidyResult* b) {
        return std::tie(a->zcta, a->naics) < std::tie(b->zcta, b->naics);
    });
    return out;
}

}  // namespace detail

/// Employment-weighted subsidy per industry, most affected first (ties by
/// code), plus the overall weighted mean.
inline SubsidyTable sector_table(std::span<const SubsidyResult> results) {
    const auto all = detail::ordered(results);
    std::map<std::string, std::vector<const SubsidyResult*>> groups;
    for (const auto* r : all) groups[r->industry_code].push_back(r);
    SubsidyTable table;
    for (const auto& [code, members] : groups) table.rows.push_back(detail::weighted(code, members));
    std::sort(table.rows.begin(), table.rows.end(), [](const SubsidyRow& a, const SubsidyRow& b) {
        if (a.lambda != b.lambda) return a.lambda > b.lambda;
        return a.key < b.key;
    });
    table.overall = detail::weighted("Average", all);
    return table;
}

/// Named sets of ZCTAs (region name -> member ZCTAs).
using RegionGrouping = std::map<std::string, std::set<std::string>>;

/// Employment-weighted subsidy per ZCTA, or per named region when a grouping
/// is given. Rows are ordered by key.
inline SubsidyTable location_table(std::span<const SubsidyResult> results,
                                   const RegionGrouping* grouping = nullptr) {
    const auto all = detail::ordered(results);
    SubsidyTable table;
    std::map<std::string, std::vector<const SubsidyResult*>> groups;
    if (grouping == nullptr) {
        for (const auto* r : all) groups[r->zcta].push_back(r);
    } else {
        std::set<std::string> present;
        for (const auto* r : all) present.insert(r->zcta);
        std::map<std::string, std::vector<std::string>> regions_of;
        for (const auto& [region, zctas] : *grouping) {
            groups[region];
            for (const auto& z : zctas) {
                if (!present.contains(z)) {
                    table.warnings.push_back("region " + region + ": ZCTA " + z + " has no results");
                }
                regions_of[z].push_back(region);
            }
        }
        for (const auto* r : all) {
            auto it = regions_of.find(r->zcta);
            if (it == regions_of.end()) continue;
            for (const auto& region : it->second) groups[region].push_back(r);
        }
    }
    for (const auto& [key, members] : groups) table.rows.push_back(detail::weighted(key, members));
    table.overall = detail::weighted("Average", all);
    return table;
}

struct Fig2Point {
    double density = 0.0;
    double distancing_ratio = 1.0;
    /// Absent where telecom would undercut face-to-face contacts.
    std::optional<double> telecom_ratio;
    model::Regime regime = model::Regime::unconstrained;
};

struct Fig2Curves {
    std::vector<Fig2Point> points;
    /// Density above which the cap binds (n* = N).
    double constraint_density = 0.0;
    /// Density above which telecom is no cheaper per contact than
    /// face-to-face (T = d^-eps); only with a telecom cost.
    std::optional<double> telecom_valid_density;
    /// Density where the distancing and telecom ratios cross inside the
    /// region where both apply.
    std::optional<double> crossing_density;
};

/// Density where the telecom and distancing ratios are equal.
///
/// With x = N / n*, the telecom ratio equals K x^-gamma with K = T^chi N^gamma,
/// so the ratios cross where chi x^(1+gamma) + (1 - chi) = K.
inline std::optional<double> regime_crossing(const model::FirmParams& params, double eps,
                                             const model::Intervention& iv) {
    if (!iv.telecom_cost || params.chi() <= 0.0) return std::nullopt;
    const double chi = params.chi();
    const double gamma = params.gamma();
    const double K = std::pow(*iv.telecom_cost, chi) * std::pow(iv.contact_cap, gamma);
    if (!(K > 1.0 - chi && K < 1.0)) return std::nullopt;
    const double x = std::pow((K - (1.0 - chi)) / chi, 1.0 / (1.0 + gamma));
    const double nstar = iv.contact_cap / x;
    const double d = std::pow(nstar, 1.0 / (eps * (1.0 - chi)));
    if (d < std::pow(*iv.telecom_cost, -1.0 / eps)) return std::nullopt;
    return d;
}

inline Fig2Curves fig2_curves(const model::FirmParams& params, double eps, const model::Intervention& intervention,
                              std::span<const double> densities) {
    model::detail::require_positive(eps, "eps");
    Fig2Curves out;
    out.constraint_density = std::pow(intervention.contact_cap, 1.0 / (eps * (1.0 - params.chi())));
    if (intervention.telecom_cost) out.telecom_valid_density = std::pow(*intervention.telecom_cost, -1.0 / eps);
    out.crossing_density = regime_crossing(params, eps, intervention);
    for (double d : densities) {
        Fig2Point p;
        p.density = d;
        const double nstar = model::contacts_at_density(d, eps, params);
        p.distancing_ratio = model::distancing_cost_ratio(intervention.contact_cap / nstar, params);
        if (intervention.telecom_cost && *intervention.telecom_cost >= std::pow(d, -eps)) {
            p.telecom_ratio = model::telecom_cost_ratio(*intervention.telecom_cost, d, eps, params);
        }
        p.regime = model::preferred_regime(intervention, d, eps, params).regime;
        out.points.push_back(p);
    }
    return out;
}

/// `count` log-spaced densities on [lo, hi].
inline std::vector<double> log_grid(double lo, double hi, std::size_t count) {
    model::detail::require_positive(lo, "grid start");
    model::detail::require_positive(hi, "grid end");
    if (count < 2 || !(hi > lo)) throw DomainError(Errc::non_positive_argument, "density grid needs hi > lo, >= 2 points");
    std::vector<double> out(count);
    const double a = std::log(lo);
    const double b = std::log(hi);
    for (std::size_t i = 0; i < count; ++i) {
        out[i] = i + 1 == count ? hi : std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(count - 1));
    }
    out.front() = lo;
    return out;
}

}  // namespace sdist::counterfactual
