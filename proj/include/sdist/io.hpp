#pragma once

// Typed loaders for the pipeline's CSV inputs and formatters for its outputs.

#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sdist/calibrate.hpp"
#include "sdist/counterfactual.hpp"
#include "sdist/csv.hpp"
#include "sdist/geo.hpp"
#include "sdist/industry_mix.hpp"
#include "sdist/lowess.hpp"
#include "sdist/occupation_index.hpp"

namespace sdist::io {

// ---------------------------------------------------------------- inputs

/// Occupation profiles. Every column other than soc_code, title and the
/// ctx_* columns is a task score; empty cells are missing values.
inline std::vector<occupation::OccupationProfile> load_occupations(const csv::Table& t) {
    using occupation::ContextItem;
    const auto soc = t.require("soc_code");
    const auto title = t.column("title");
    std::map<std::size_t, ContextItem> ctx_cols;
    for (ContextItem item : occupation::kContextItems) {
        if (auto c = t.column(occupation::context_column(item))) ctx_cols.emplace(*c, item);
    }
    std::vector<occupation::OccupationProfile> out;
    for (const auto& row : t.rows()) {
        occupation::OccupationProfile p;
        p.soc_code = row.fields[soc];
        if (title) p.title = row.fields[*title];
        for (std::size_t c = 0; c < t.header().size(); ++c) {
            if (c == soc || (title && c == *title) || row.fields[c].empty()) continue;
            if (auto it = ctx_cols.find(c); it != ctx_cols.end()) {
                p.context_levels.emplace(it->second, static_cast<int>(csv::to_int(t, row, c)));
            } else {
                p.task_scores.emplace(t.header()[c], csv::to_double(t, row, c));
            }
        }
        try {
            p.validate();
        } catch (const IngestionError& e) {
            throw IngestionError(e.code(), t.where(row) + ": " + e.what());
        }
        out.push_back(std::move(p));
    }
    return out;
}

inline std::vector<industry::MatrixRecord> load_matrix(const csv::Table& t) {
    const auto ind = t.require("industry_code");
    const auto soc = t.require("soc_code");
    const auto emp = t.require("employment");
    std::vector<industry::MatrixRecord> out;
    for (const auto& row : t.rows()) {
        const double e = csv::to_double(t, row, emp);
        if (e < 0.0) throw IngestionError(Errc::bad_csv, t.where(row) + ": negative employment");
        out.push_back({row.fields[ind], row.fields[soc], e});
    }
    return out;
}

inline bool parse_flag(std::string_view s) {
    return s == "1" || s == "true" || s == "TRUE" || s == "yes" || s == "S" || s == "D";
}

inline std::vector<geo::CbpRecord> load_cbp(const csv::Table& t) {
    const auto zcta = t.require("zcta");
    const auto naics = t.require("naics");
    const auto bin = t.require("size_bin");
    const auto est = t.require("establishments");
    const auto supp = t.column("suppressed");
    std::vector<geo::CbpRecord> out;
    for (const auto& row : t.rows()) {
        geo::CbpRecord r;
        r.zcta = row.fields[zcta];
        r.naics = row.fields[naics];
        r.size_bin = row.fields[bin];
        r.establishments = csv::to_int(t, row, est);
        if (r.establishments < 0) throw IngestionError(Errc::bad_csv, t.where(row) + ": negative establishments");
        r.suppressed = supp && parse_flag(row.fields[*supp]);
        out.push_back(std::move(r));
    }
    return out;
}

inline std::vector<geo::DensityRecord> load_density(const csv::Table& t) {
    const auto zcta = t.require("zcta");
    const auto pop = t.require("population");
    const auto area = t.require("land_area_km2");
    std::vector<geo::DensityRecord> out;
    for (const auto& row : t.rows()) {
        out.push_back({row.fields[zcta], csv::to_double(t, row, pop), csv::to_double(t, row, area)});
    }
    return out;
}

inline std::vector<geo::NationalSizeRecord> load_national_sizes(const csv::Table& t) {
    const auto naics = t.require("naics");
    const auto bin = t.require("size_bin");
    const auto est = t.require("establishments");
    const auto emp = t.require("employment");
    std::vector<geo::NationalSizeRecord> out;
    for (const auto& row : t.rows()) {
        out.push_back({row.fields[naics], geo::normalize_bin_label(row.fields[bin]), csv::to_double(t, row, est),
                       csv::to_double(t, row, emp)});
    }
    return out;
}

/// Two-column key/value file, e.g. industry names or a NAICS concordance.
inline std::map<std::string, std::string> load_pairs(const csv::Table& t, std::string_view key_col,
                                                     std::string_view value_col) {
    const auto k = t.require(key_col);
    const auto v = t.require(value_col);
    std::map<std::string, std::string> out;
    for (const auto& row : t.rows()) {
        if (!out.emplace(row.fields[k], row.fields[v]).second) {
            throw IngestionError(Errc::duplicate_code, t.where(row) + ": duplicate key " + row.fields[k]);
        }
    }
    return out;
}

inline counterfactual::RegionGrouping load_region_groups(const csv::Table& t) {
    const auto region = t.require("region");
    const auto zcta = t.require("zcta");
    counterfactual::RegionGrouping out;
    for (const auto& row : t.rows()) out[row.fields[region]].insert(row.fields[zcta]);
    return out;
}

inline std::map<std::string, double> load_official_employment(const csv::Table& t) {
    const auto ind = t.require("industry_code");
    const auto emp = t.require("employment");
    std::map<std::string, double> out;
    for (const auto& row : t.rows()) out[row.fields[ind]] += csv::to_double(t, row, emp);
    return out;
}

/// Reads a location index back for smoothing: x = ln(density), one series per
/// group, weighted by employment.
inline std::map<industry::Group, std::vector<geo::WeightedPoint>> load_location_series(const csv::Table& t) {
    const auto density = t.require("density");
    const auto emp = t.require("employment");
    std::map<industry::Group, std::vector<geo::WeightedPoint>> out;
    for (const auto& row : t.rows()) {
        const double d = csv::to_double(t, row, density);
        if (!(d > 0.0)) throw IngestionError(Errc::bad_csv, t.where(row) + ": non-positive density");
        const double w = csv::to_double(t, row, emp);
        for (industry::Group g : industry::kGroups) {
            const auto col = t.require("share_" + std::string(industry::to_string(g)));
            out[g].push_back({std::log(d), csv::to_double(t, row, col), w});
        }
    }
    return out;
}

// ---------------------------------------------------------------- outputs

inline std::string flag(bool b) { return b ? "1" : "0"; }

inline std::string occupation_flags_csv(std::span<const occupation::OccupationProfile> profiles,
                                        const occupation::Classification& cls, const std::string& provenance) {
    std::map<std::string, std::string> titles;
    for (const auto& p : profiles) titles.emplace(p.soc_code, p.title);
    csv::Writer w(provenance);
    w.row({"soc_code", "title", "teamwork", "customer", "communication", "presence"});
    for (const auto& [soc, f] : cls.flags) {
        w.row({soc, titles[soc], flag(f.teamwork), flag(f.customer), flag(f.communication), flag(f.presence)});
    }
    return w.str();
}

inline std::string industry_index_csv(std::span<const industry::IndustryMix> mixes,
                                      const std::map<std::string, std::string>& names,
                                      const std::string& provenance) {
    csv::Writer w(provenance);
    w.row({"industry_code", "name", "chi_teamwork", "chi_customer", "chi_communication", "chi_presence"});
    for (const auto& m : mixes) {
        auto n = names.find(m.industry_code);
        w.row({m.industry_code, n == names.end() ? std::string() : n->second, csv::number(m.chi[0]),
               csv::number(m.chi[1]), csv::number(m.chi[2]), csv::number(m.chi[3])});
    }
    return w.str();
}

inline std::string location_index_csv(std::span<const geo::RegionShares> regions,
                                      std::span<const geo::RegionDensity> densities, const std::string& provenance) {
    std::map<std::string, double> density;
    for (const auto& d : densities) density.emplace(d.zcta, d.normalized_density);
    csv::Writer w(provenance);
    w.row({"zcta", "density", "share_teamwork", "share_customer", "share_communication", "share_presence",
           "employment"});
    for (const auto& r : regions) {
        auto d = density.find(r.zcta);
        if (d == density.end()) continue;
        w.row({r.zcta, csv::number(d->second), csv::number(r.share[0]), csv::number(r.share[1]),
               csv::number(r.share[2]), csv::number(r.share[3]), csv::number(r.employment)});
    }
    return w.str();
}

/// Percentages are rounded to one decimal here and nowhere else.
inline std::string pct(double lambda) { return csv::fixed(100.0 * lambda, 1); }

inline std::string sector_subsidy_csv(const counterfactual::SubsidyTable& table, const std::string& provenance) {
    csv::Writer w(provenance);
    w.row({"industry", "wage_subsidy_pct", "employment_thousands"});
    for (const auto& r : table.rows) w.row({r.key, pct(r.lambda), csv::fixed(r.employment / 1000.0, 3)});
    w.row({table.overall.key, pct(table.overall.lambda), csv::fixed(table.overall.employment / 1000.0, 3)});
    return w.str();
}

inline std::string location_subsidy_csv(const counterfactual::SubsidyTable& table, std::string_view key_column,
                                        const std::string& provenance) {
    csv::Writer w(provenance);
    w.row({std::string(key_column), "wage_subsidy_pct", "employment"});
    for (const auto& r : table.rows) w.row({r.key, pct(r.lambda), csv::number(r.employment)});
    return w.str();
}

inline std::string fig2_csv(const counterfactual::Fig2Curves& curves, const std::string& provenance) {
    csv::Writer w(provenance);
    w.comment("constraint_density=" + csv::number(curves.constraint_density));
    if (curves.telecom_valid_density) w.comment("telecom_valid_density=" + csv::number(*curves.telecom_valid_density));
    if (curves.crossing_density) w.comment("crossing_density=" + csv::number(*curves.crossing_density));
    w.row({"density", "distancing_ratio", "telecom_ratio", "regime"});
    for (const auto& p : curves.points) {
        w.row({csv::number(p.density), csv::number(p.distancing_ratio),
               p.telecom_ratio ? csv::number(*p.telecom_ratio) : std::string(), std::string(model::to_string(p.regime))});
    }
    return w.str();
}

inline std::string lowess_csv(const std::map<industry::Group, std::vector<geo::CurvePoint>>& curves,
                              const std::string& provenance) {
    csv::Writer w(provenance);
    w.row({"log_density", "share_teamwork", "share_customer", "share_communication", "share_presence"});
    const auto& base = curves.begin()->second;
    for (std::size_t i = 0; i < base.size(); ++i) {
        std::vector<std::string> fields{csv::number(base[i].x)};
        for (industry::Group g : industry::kGroups) fields.push_back(csv::number(curves.at(g)[i].y));
        w.row(fields);
    }
    return w.str();
}

}  // namespace sdist::io
