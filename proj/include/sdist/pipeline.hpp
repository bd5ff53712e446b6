#pragma once

// End-to-end stages behind the command-line subcommands. Every stage returns
// file contents in memory; writing them is left to the caller.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sdist/calibrate.hpp"
#include "sdist/config.hpp"
#include "sdist/counterfactual.hpp"
#include "sdist/csv.hpp"
#include "sdist/geo.hpp"
#include "sdist/industry_mix.hpp"
#include "sdist/io.hpp"
#include "sdist/lowess.hpp"
#include "sdist/occupation_index.hpp"

namespace sdist::pipeline {

struct Artifacts {
    std::map<std::string, std::string> files;  // file name -> contents
    std::vector<std::string> warnings;
    std::vector<std::string> log;
};

inline void append(std::vector<std::string>& dst, const std::vector<std::string>& src) {
    dst.insert(dst.end(), src.begin(), src.end());
}

struct IndexStage {
    std::vector<occupation::OccupationProfile> profiles;
    occupation::Classification classification;
    std::vector<industry::MatrixRecord> matrix;
    industry::MixBuild mix;
    std::map<std::string, std::string> names;
    std::map<std::string, std::string> concordance;
};

inline IndexStage run_index_stage(const config::RunConfig& cfg) {
    IndexStage s;
    s.profiles = io::load_occupations(csv::read(cfg.require_path("occupations")));
    s.classification = occupation::classify_all(s.profiles, cfg.index_definition(), cfg.threads());
    s.matrix = io::load_matrix(csv::read(cfg.require_path("matrix")));
    s.mix = industry::build_mix(s.matrix, s.classification.flags);
    if (auto p = cfg.path("industry_names")) s.names = io::load_pairs(csv::read(*p), "industry_code", "name");
    if (auto p = cfg.path("concordance")) s.concordance = io::load_pairs(csv::read(*p), "naics_prefix", "industry_code");
    return s;
}

inline bool has_geo_inputs(const config::RunConfig& cfg) {
    return cfg.has("cbp") && cfg.has("density") && cfg.has("national_sizes");
}

struct GeoStage {
    geo::CellBuild cells;
    geo::DensityBuild density;
    geo::ExposureBuild exposure;
};

inline GeoStage run_geo_stage(const config::RunConfig& cfg, const IndexStage& index) {
    GeoStage s;
    const auto cbp = io::load_cbp(csv::read(cfg.require_path("cbp")));
    const auto national_rows = io::load_national_sizes(csv::read(cfg.require_path("national_sizes")));
    const geo::NationalSizeDistribution national(national_rows);
    s.cells = geo::build_cells(cbp, national, cfg.size_bins());
    const auto density_rows = io::load_density(csv::read(cfg.require_path("density")));
    s.density = geo::normalize_density(density_rows, geo::employment_by_region(s.cells.cells), cfg.density_source());
    const industry::IndustryResolver resolver(index.mix.mixes, index.concordance);
    s.exposure = geo::regional_exposure(s.cells.cells, resolver, cfg.threads());
    return s;
}

struct CalibrationStage {
    industry::ExclusionResult exclusion;
    calibrate::JoinResult join;
    calibrate::CalibrationReport report;
};

inline calibrate::Targets targets(const config::RunConfig& cfg) {
    return {cfg.number("contact_share"), cfg.number("elasticity"), cfg.optional_number("fixed_eps")};
}

inline CalibrationStage run_calibration_stage(const config::RunConfig& cfg, const IndexStage& index,
                                              const GeoStage& geo_stage) {
    CalibrationStage s;
    const auto exclusions = cfg.list("exclusions");
    s.exclusion = industry::exclude_sectors(index.mix.mixes, exclusions);
    const industry::IndustryResolver resolver(s.exclusion.kept, index.concordance);
    s.join = calibrate::join_cells(geo_stage.cells.cells, geo_stage.density.regions, resolver, exclusions);
    s.report = calibrate::calibrate_model(s.join.cells, targets(cfg));
    return s;
}

namespace detail {

inline void index_log(const IndexStage& s, Artifacts& a) {
    const auto& c = s.classification.counts;
    a.log.push_back("occupations: " + std::to_string(c.occupations) + " (teamwork " + std::to_string(c.teamwork) +
                    ", customer " + std::to_string(c.customer) + ", communication " +
                    std::to_string(c.communication) + ", presence " + std::to_string(c.presence) + ")");
    a.log.push_back("industries: " + std::to_string(s.mix.mixes.size()));
    a.log.push_back("workers in communication-intensive occupations: " +
                    csv::number(industry::at(s.mix.report.flagged_employment, industry::Group::communication)));
    CompensatedSum either;
    for (const auto& r : s.matrix) {
        auto f = s.classification.flags.find(r.soc_code);
        if (f != s.classification.flags.end() && (f->second.communication || f->second.presence)) either += r.employment;
    }
    a.log.push_back("workers in communication- or presence-intensive occupations: " + csv::number(either.value()));
    for (const auto& code : s.mix.report.unknown_soc_codes) {
        a.warnings.push_back("matrix occupation " + code + " has no exposure flags; left out of industry shares");
    }
    for (const auto& code : s.mix.report.skipped_industries) {
        a.warnings.push_back("industry " + code + " has zero classified employment; skipped");
    }
}

inline void geo_log(const GeoStage& g, Artifacts& a) {
    append(a.warnings, g.cells.warnings);
    append(a.warnings, g.density.warnings);
    append(a.warnings, g.exposure.warnings);
    a.log.push_back("cells: " + std::to_string(g.cells.cells.size()) + ", regions: " +
                    std::to_string(g.exposure.regions.size()));
}

inline void calibration_log(const CalibrationStage& c, Artifacts& a) {
    append(a.warnings, c.join.warnings);
    for (const auto& code : c.exclusion.absent) a.warnings.push_back("exclusion " + code + " matches no industry");
    for (const auto& code : c.exclusion.removed) a.log.push_back("excluded industry " + code);
}

inline std::string calibration_text(const config::RunConfig& cfg, const CalibrationStage& c) {
    const auto& r = c.report;
    std::string out = "# " + cfg.provenance() + "\n";
    out += "eps = " + csv::number(r.model.eps) + (r.eps_fixed ? " (fixed)" : " (from target elasticity)") + "\n";
    out += "target_elasticity = " + csv::number(r.model.target_elasticity) + "\n";
    out += "k = " + csv::number(r.k) + "\n";
    out += "achieved_slope = " + csv::number(r.achieved_slope) + "\n";
    out += "contact_cap = " + csv::number(r.model.contact_cap) + "\n";
    out += "target_contact_share = " + csv::number(r.model.target_contact_share) + "\n";
    out += "achieved_contact_share = " + csv::number(r.achieved_share) + "\n";
    out += "cells = " + std::to_string(r.cells) + "\n";
    out += "industries = " + std::to_string(r.industries) + "\n";
    out += "regions = " + std::to_string(r.regions) + "\n";
    out += "excluded_cells = " + std::to_string(c.join.excluded_cells) + "\n";
    return out;
}

inline std::string calibration_csv(const config::RunConfig& cfg, const CalibrationStage& c) {
    const auto& r = c.report;
    csv::Writer w(cfg.provenance());
    w.row({"parameter", "value"});
    w.row({"eps", csv::number(r.model.eps)});
    w.row({"eps_fixed", r.eps_fixed ? "1" : "0"});
    w.row({"target_elasticity", csv::number(r.model.target_elasticity)});
    w.row({"k", csv::number(r.k)});
    w.row({"achieved_slope", csv::number(r.achieved_slope)});
    w.row({"contact_cap", csv::number(r.model.contact_cap)});
    w.row({"target_contact_share", csv::number(r.model.target_contact_share)});
    w.row({"achieved_contact_share", csv::number(r.achieved_share)});
    w.row({"cells", std::to_string(r.cells)});
    w.row({"industries", std::to_string(r.industries)});
    w.row({"regions", std::to_string(r.regions)});
    w.row({"excluded_cells", std::to_string(c.join.excluded_cells)});
    return w.str();
}

}  // namespace detail

/// Occupation flags and the industry index; the location index too when the
/// establishment and density inputs are configured.
inline Artifacts cmd_index(const config::RunConfig& cfg) {
    Artifacts a;
    const auto index = run_index_stage(cfg);
    detail::index_log(index, a);
    const auto prov = cfg.provenance();
    a.files["occupation-flags.csv"] = io::occupation_flags_csv(index.profiles, index.classification, prov);
    a.files["industry-index.csv"] = io::industry_index_csv(index.mix.mixes, index.names, prov);
    if (has_geo_inputs(cfg)) {
        const auto g = run_geo_stage(cfg, index);
        detail::geo_log(g, a);
        a.files["location-index.csv"] = io::location_index_csv(g.exposure.regions, g.density.regions, prov);
    }
    return a;
}

inline Artifacts cmd_calibrate(const config::RunConfig& cfg) {
    Artifacts a;
    const auto index = run_index_stage(cfg);
    detail::index_log(index, a);
    const auto g = run_geo_stage(cfg, index);
    detail::geo_log(g, a);
    const auto c = run_calibration_stage(cfg, index, g);
    detail::calibration_log(c, a);
    a.files["calibration-report.txt"] = detail::calibration_text(cfg, c);
    a.files["calibration.csv"] = detail::calibration_csv(cfg, c);
    return a;
}

/// Ratio curves for one firm type over `points` log-spaced densities.
inline std::string fig2_file(const model::FirmParams& params, double eps, const model::Intervention& iv, double dmin,
                             double dmax, std::size_t points, const std::string& provenance) {
    const auto grid = counterfactual::log_grid(dmin, dmax, points);
    return io::fig2_csv(counterfactual::fig2_curves(params, eps, iv, grid), provenance);
}

inline Artifacts cmd_subsidy(const config::RunConfig& cfg) {
    Artifacts a;
    const auto index = run_index_stage(cfg);
    detail::index_log(index, a);
    const auto g = run_geo_stage(cfg, index);
    detail::geo_log(g, a);
    const auto c = run_calibration_stage(cfg, index, g);
    detail::calibration_log(c, a);

    const auto results =
        counterfactual::compute_subsidies(c.report.model, c.join.cells, {cfg.threads(), std::nullopt});
    const auto prov = cfg.provenance();
    const auto sectors = counterfactual::sector_table(results);
    a.files["sector-subsidy.csv"] = io::sector_subsidy_csv(sectors, prov);
    const auto locations = counterfactual::location_table(results);
    a.files["location-subsidy.csv"] = io::location_subsidy_csv(locations, "zcta", prov);
    if (auto p = cfg.path("region_groups")) {
        const auto groups = io::load_region_groups(csv::read(*p));
        const auto regions = counterfactual::location_table(results, &groups);
        append(a.warnings, regions.warnings);
        a.files["region-subsidy.csv"] = io::location_subsidy_csv(regions, "region", prov);
    }
    a.files["calibration-report.txt"] = detail::calibration_text(cfg, c);
    a.log.push_back("overall wage subsidy: " + io::pct(sectors.overall.lambda) + "%");

    if (auto telecom = cfg.optional_number("telecom_cost")) {
        // Economy-wide average firm over the observed density range.
        CompensatedSum emp, chi;
        double dmin = c.join.cells.front().density;
        double dmax = dmin;
        for (const auto& cell : c.join.cells) {
            emp += cell.employment;
            chi += cell.employment * cell.chi;
            dmin = std::min(dmin, cell.density);
            dmax = std::max(dmax, cell.density);
        }
        if (dmax > dmin) {
            const auto params = model::FirmParams::from_chi(chi.value() / emp.value());
            const model::Intervention iv(c.report.model.contact_cap, *telecom);
            a.files["fig2.csv"] = fig2_file(params, c.report.model.eps, iv, dmin, dmax, 200, prov);
        } else {
            a.warnings.push_back("fig2.csv not written: all cells share one density");
        }
    }
    return a;
}

/// Smoothed regional shares against log density, one column per group.
inline Artifacts cmd_lowess(const config::RunConfig& cfg, const std::string& location_index_path,
                            std::size_t grid_points = 100) {
    Artifacts a;
    const auto series = io::load_location_series(csv::read(location_index_path));
    if (series.empty()) throw IngestionError(Errc::bad_csv, location_index_path + ": no rows");
    std::map<industry::Group, std::vector<geo::CurvePoint>> curves;
    const double bandwidth = cfg.number("lowess_bandwidth");
    for (const auto& [group, points] : series) curves[group] = geo::lowess_curve(points, bandwidth, grid_points);
    a.files["fig4.csv"] = io::lowess_csv(curves, cfg.provenance());
    return a;
}

inline void write_artifacts(const Artifacts& a, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    for (const auto& [name, contents] : a.files) {
        std::ofstream out(dir / name, std::ios::binary);
        if (!out) throw ConfigError(Errc::missing_file, "cannot write output file: " + (dir / name).string());
        out << contents;
    }
}

}  // namespace sdist::pipeline
