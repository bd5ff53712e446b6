#pragma once

// Calibration of the density elasticity of contact costs (eps) and the
// contact cap N.

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

#include "sdist/error.hpp"
#include "sdist/geo.hpp"
#include "sdist/industry_mix.hpp"
#include "sdist/model.hpp"
#include "sdist/numeric.hpp"

namespace sdist::calibrate {

/// One ZIP x industry cell with everything the model needs.
struct ModelCell {
    std::string zcta;
    std::string naics;          // published cell code
    std::string industry_code;  // resolved matrix industry
    double employment = 0.0;
    double density = 0.0;  // normalised
    double chi = 0.0;      // communication share of the industry
};

struct JoinResult {
    std::vector<ModelCell> cells;  // sorted by (zcta, naics)
    std::vector<std::string> warnings;
    /// Cells removed because their NAICS code or an ancestor is excluded.
    std::size_t excluded_cells = 0;
};

/// Attaches density and communication share to every cell with positive
/// employment. Cells in excluded sectors, without a density or without an
/// industry mix are skipped.
inline JoinResult join_cells(std::span<const geo::RegionCell> cells, std::span<const geo::RegionDensity> densities,
                             const industry::IndustryResolver& resolver,
                             std::span<const std::string> exclusions = {}) {
    JoinResult out;
    std::map<std::string, double> density;
    for (const auto& d : densities) density.emplace(d.zcta, d.normalized_density);
    std::set<std::string> missing_density, unresolved, fallback;
    for (const auto& c : cells) {
        if (!(c.employment > 0.0)) continue;
        if (industry::is_excluded(c.industry_code, exclusions)) {
            ++out.excluded_cells;
            continue;
        }
        auto d = density.find(c.zcta);
        if (d == density.end()) {
            missing_density.insert(c.zcta);
            continue;
        }
        const auto match = resolver.resolve(c.industry_code);
        if (!match.mix) {
            unresolved.insert(c.industry_code);
            continue;
        }
        if (industry::is_excluded(match.mix->industry_code, exclusions)) {
            ++out.excluded_cells;
            continue;
        }
        if (match.fallback) fallback.insert(c.industry_code + "->" + match.mix->industry_code);
        out.cells.push_back({c.zcta, c.industry_code, match.mix->industry_code, c.employment, d->second,
                             match.mix->chi_of(industry::Group::communication)});
    }
    std::sort(out.cells.begin(), out.cells.end(), [](const ModelCell& a, const ModelCell& b) {
        return std::tie(a.zcta, a.naics) < std::tie(b.zcta, b.naics);
    });
    for (const auto& z : missing_density) out.warnings.push_back("skipped cells in " + z + ": no density");
    for (const auto& n : unresolved) out.warnings.push_back("skipped cells with NAICS " + n + ": no industry mix");
    for (const auto& f : fallback) out.warnings.push_back("industry resolved via ancestor: " + f);
    return out;
}

struct EpsilonFit {
    double eps = 0.0;
    /// Slope of chi * ln d on ln d; the model-implied elasticity is eps * k.
    double k = 0.0;
    /// Slope of a fresh regression with the returned eps.
    double achieved_slope = 0.0;
};

/// Employment-weighted slope of eps * chi_i * ln d_r on ln d_r.
inline double productivity_slope(std::span<const ModelCell> cells, double eps) {
    std::vector<double> x, y, w;
    for (const auto& c : cells) {
        const double lnd = std::log(c.density);
        x.push_back(lnd);
        y.push_back(eps * c.chi * lnd);
        w.push_back(c.employment);
    }
    return weighted_fit(x, y, w).slope();
}

/// Solves eps so the employment-weighted regression of eps * chi * ln d on
/// ln d has slope `target_elasticity`. The regressand is linear in eps, so
/// eps = target / k with k = Cov_w(chi ln d, ln d) / Var_w(ln d).
inline EpsilonFit calibrate_epsilon(std::span<const ModelCell> cells, double target_elasticity) {
    if (!(target_elasticity > 0.0) || !std::isfinite(target_elasticity)) {
        throw ConfigError(Errc::bad_target, "target elasticity must be positive");
    }
    std::set<double> distinct;
    for (const auto& c : cells) {
        if (!(c.employment > 0.0)) throw CalibrationError(Errc::degenerate_calibration, "non-positive cell weight");
        distinct.insert(c.density);
    }
    if (distinct.size() < 2) {
        throw CalibrationError(Errc::degenerate_calibration, "need at least two distinct densities to calibrate eps");
    }
    const double k = productivity_slope(cells, 1.0);
    if (!(k > 0.0)) {
        throw CalibrationError(Errc::degenerate_calibration,
                               "communication share does not co-move with log density (k = " + std::to_string(k) + ")");
    }
    EpsilonFit fit;
    fit.k = k;
    fit.eps = target_elasticity / k;
    fit.achieved_slope = productivity_slope(cells, fit.eps);
    if (std::abs(fit.achieved_slope - target_elasticity) > 1e-9 * std::max(1.0, target_elasticity)) {
        throw CalibrationError(Errc::degenerate_calibration, "verification regression missed the target slope");
    }
    return fit;
}

struct ContactCell {
    std::string zcta;
    std::string naics;
    double employment = 0.0;
    double nstar = 0.0;
};

/// n*_ir = d_r^(eps (1 - chi_i)) for every cell with positive employment.
inline std::vector<ContactCell> optimal_contacts_grid(std::span<const ModelCell> cells, double eps) {
    std::vector<ContactCell> out;
    out.reserve(cells.size());
    for (const auto& c : cells) {
        if (!(c.employment > 0.0)) continue;
        const auto params = model::FirmParams::from_chi(c.chi);
        out.push_back({c.zcta, c.naics, c.employment, model::contacts_at_density(c.density, eps, params)});
    }
    return out;
}

/// Share of total contacts that survive a cap N: sum l min(N, n*) / sum l n*.
inline double contact_share(std::span<const ContactCell> grid, double cap) {
    CompensatedSum capped, total;
    for (const auto& c : grid) {
        capped += c.employment * std::min(cap, c.nstar);
        total += c.employment * c.nstar;
    }
    return capped.value() / total.value();
}

namespace detail {

inline double validated_total(std::span<const ContactCell> grid, double target_share) {
    if (!(target_share > 0.0 && target_share <= 1.0)) {
        throw ConfigError(Errc::bad_target, "target contact share must lie in (0, 1], got " +
                                                std::to_string(target_share));
    }
    CompensatedSum total;
    for (const auto& c : grid) total += c.employment * c.nstar;
    if (!(total.value() > 0.0)) {
        throw CalibrationError(Errc::degenerate_calibration, "total contacts must be positive");
    }
    return total.value();
}

inline double max_nstar(std::span<const ContactCell> grid) {
    double m = 0.0;
    for (const auto& c : grid) m = std::max(m, c.nstar);
    return m;
}

}  // namespace detail

/// Cap N with sum l min(N, n*) = target * sum l n*, by bisection on
/// [0, max n*]. A target of 1 returns max n*.
inline double calibrate_cap(std::span<const ContactCell> grid, double target_share) {
    const double total = detail::validated_total(grid, target_share);
    const double hi_bound = detail::max_nstar(grid);
    if (target_share == 1.0) return hi_bound;
    const double goal = target_share * total;
    double lo = 0.0;
    double hi = hi_bound;
    for (int iter = 0; iter < 200 && hi - lo > 1e-10; ++iter) {
        const double mid = 0.5 * (lo + hi);
        CompensatedSum capped;
        for (const auto& c : grid) capped += c.employment * std::min(mid, c.nstar);
        if (capped.value() < goal) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

/// Exact solution of the same equation by walking the sorted n* values: the
/// capped total is piecewise linear in N with slope equal to the employment
/// of cells whose n* exceeds N.
inline double calibrate_cap_exact(std::span<const ContactCell> grid, double target_share) {
    const double total = detail::validated_total(grid, target_share);
    if (target_share == 1.0) return detail::max_nstar(grid);
    const double goal = target_share * total;
    std::vector<std::pair<double, double>> sorted;  // (n*, l)
    for (const auto& c : grid) sorted.emplace_back(c.nstar, c.employment);
    std::sort(sorted.begin(), sorted.end());
    double below = 0.0;  // sum l n* for n* <= current breakpoint
    double above_weight = 0.0;
    for (const auto& [n, l] : sorted) above_weight += l;
    double prev = 0.0;
    for (std::size_t i = 0; i < sorted.size();) {
        const double next = sorted[i].first;
        // On [prev, next] the capped total is below + above_weight * N.
        if (below + above_weight * next >= goal) return (goal - below) / above_weight;
        while (i < sorted.size() && sorted[i].first == next) {
            below += sorted[i].first * sorted[i].second;
            above_weight -= sorted[i].second;
            ++i;
        }
        prev = next;
    }
    return prev;
}

struct Targets {
    double contact_share = 0.5;
    double elasticity = 0.04;
    /// Skips the elasticity target and uses this eps.
    std::optional<double> fixed_eps;
};

struct CalibratedModel {
    double eps = 0.0;
    double contact_cap = 0.0;
    std::map<std::string, model::FirmParams> industry_params;
    double target_contact_share = 0.5;
    double target_elasticity = 0.04;
};

struct CalibrationReport {
    CalibratedModel model;
    bool eps_fixed = false;
    double k = 0.0;
    double achieved_slope = 0.0;
    double achieved_share = 0.0;
    std::size_t cells = 0;
    std::size_t industries = 0;
    std::size_t regions = 0;
};

inline CalibrationReport calibrate_model(std::span<const ModelCell> cells, const Targets& targets) {
    if (cells.empty()) throw CalibrationError(Errc::degenerate_calibration, "no cells to calibrate on");
    for (const auto& c : cells) {
        if (!(c.chi >= 0.0 && c.chi < 1.0)) {
            throw CalibrationError(Errc::degenerate_calibration,
                                   "industry " + c.industry_code + " has communication share outside [0, 1)");
        }
    }
    CalibrationReport report;
    report.model.target_contact_share = targets.contact_share;
    report.model.target_elasticity = targets.elasticity;
    if (targets.fixed_eps) {
        if (!(*targets.fixed_eps > 0.0)) throw ConfigError(Errc::bad_target, "fixed eps must be positive");
        report.eps_fixed = true;
        report.model.eps = *targets.fixed_eps;
        report.k = productivity_slope(cells, 1.0);
        report.achieved_slope = productivity_slope(cells, report.model.eps);
    } else {
        const auto fit = calibrate_epsilon(cells, targets.elasticity);
        report.model.eps = fit.eps;
        report.k = fit.k;
        report.achieved_slope = fit.achieved_slope;
    }
    const auto grid = optimal_contacts_grid(cells, report.model.eps);
    report.model.contact_cap = calibrate_cap(grid, targets.contact_share);
    report.achieved_share = contact_share(grid, report.model.contact_cap);

    std::set<std::string> regions;
    for (const auto& c : cells) {
        report.model.industry_params.insert_or_assign(c.industry_code, model::FirmParams::from_chi(c.chi));
        regions.insert(c.zcta);
    }
    report.cells = cells.size();
    report.industries = report.model.industry_params.size();
    report.regions = regions.size();
    return report;
}

}  // namespace sdist::calibrate
