#pragma once

// ZIP-level employment from establishment size bins, density normalisation
// and employment-weighted regional exposure shares.

#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "sdist/error.hpp"
#include "sdist/industry_mix.hpp"
#include "sdist/numeric.hpp"

namespace sdist::geo {

/// Label used on a suppressed row whose size category is unknown.
inline constexpr std::string_view kAnyBin = "*";

/// Establishment size bins with their employment midpoints. The open-ended
/// top bin has no midpoint; its size comes from the national distribution of
/// the industry, or `open_bin_default` when that is unavailable.
struct SizeBins {
    std::map<std::string, double> midpoints = {
        {"1-4", 2.5},       {"5-9", 7.0},         {"10-19", 14.5},      {"20-49", 34.5},  {"50-99", 74.5},
        {"100-249", 174.5}, {"250-499", 374.5},   {"500-999", 749.5},
    };
    std::string open_bin = "1000+";
    double open_bin_default = 1500.0;

    [[nodiscard]] bool known(std::string_view label) const {
        return label == open_bin || midpoints.contains(std::string(label));
    }

    [[nodiscard]] std::vector<std::string> labels() const {
        std::vector<std::string> out;
        for (const auto& [label, mid] : midpoints) out.push_back(label);
        out.push_back(open_bin);
        return out;
    }
};

/// Accepts en-dash separated labels ("1–4") as well as "1-4".
inline std::string normalize_bin_label(std::string_view label) {
    std::string out;
    for (std::size_t i = 0; i < label.size(); ++i) {
        if (label.substr(i, 3) == "\xE2\x80\x93") {
            out.push_back('-');
            i += 2;
        } else if (label[i] != ' ') {
            out.push_back(label[i]);
        }
    }
    return out;
}

/// Sum of count * midpoint over bins.
inline double estimate_cell_employment(const std::map<std::string, std::int64_t>& counts,
                                       const std::map<std::string, double>& midpoints) {
    CompensatedSum total;
    for (const auto& [bin, count] : counts) {
        if (count < 0) throw IngestionError(Errc::bad_csv, "negative establishment count in bin " + bin);
        auto it = midpoints.find(bin);
        if (it == midpoints.end()) throw IngestionError(Errc::unknown_size_bin, "unknown size bin '" + bin + "'");
        total += static_cast<double>(count) * it->second;
    }
    return total.value();
}

struct NationalSizeRecord {
    std::string naics;
    std::string size_bin;
    double establishments = 0.0;
    double employment = 0.0;
};

/// National establishment and employment counts by NAICS code and size bin.
class NationalSizeDistribution {
public:
    NationalSizeDistribution() = default;

    explicit NationalSizeDistribution(std::span<const NationalSizeRecord> records) {
        for (const auto& r : records) add(r);
    }

    void add(const NationalSizeRecord& r) {
        if (r.establishments < 0.0 || r.employment < 0.0) {
            throw IngestionError(Errc::bad_csv, "negative national size counts for " + r.naics);
        }
        auto& slot = data_[r.naics][r.size_bin];
        slot.first += r.establishments;
        slot.second += r.employment;
    }

    /// Mean establishment size over `bins` (kAnyBin = every bin) for the
    /// deepest ancestor of `naics` with establishments in those bins.
    [[nodiscard]] std::optional<double> mean_size(std::string_view naics, const std::set<std::string>& bins) const {
        for (std::size_t len = naics.size(); len >= 2; --len) {
            auto it = data_.find(std::string(naics.substr(0, len)));
            if (it == data_.end()) continue;
            CompensatedSum est, emp;
            const bool any = bins.contains(std::string(kAnyBin));
            for (const auto& [bin, counts] : it->second) {
                if (any || bins.contains(bin)) {
                    est += counts.first;
                    emp += counts.second;
                }
            }
            if (est.value() > 0.0) return emp.value() / est.value();
        }
        return std::nullopt;
    }

private:
    std::map<std::string, std::map<std::string, std::pair<double, double>>> data_;
};

/// Establishment counts of one ZIP x NAICS cell. Suppressed counts are known
/// establishments whose size category was withheld; their key is the withheld
/// bin, or kAnyBin when even that is unknown.
struct CellCounts {
    std::map<std::string, std::int64_t> reported;
    std::map<std::string, std::int64_t> suppressed;
};

/// Employment of suppressed establishments: their count times the national
/// mean size of the suppressed categories. Returns 0 when nothing is
/// suppressed and nullopt when no ancestor has a usable distribution.
inline std::optional<double> impute_suppressed(std::string_view naics, const CellCounts& cell,
                                               const NationalSizeDistribution& national) {
    std::int64_t count = 0;
    std::set<std::string> bins;
    for (const auto& [bin, n] : cell.suppressed) {
        if (n < 0) throw IngestionError(Errc::bad_csv, "negative suppressed count in bin " + bin);
        if (n == 0) continue;
        count += n;
        bins.insert(bin);
    }
    if (count == 0) return 0.0;
    const auto mean = national.mean_size(naics, bins);
    if (!mean) return std::nullopt;
    return static_cast<double>(count) * *mean;
}

struct RegionCell {
    std::string zcta;
    std::string industry_code;  // NAICS code as published
    double employment = 0.0;
    double imputed_fraction = 0.0;
};

struct CellEstimate {
    double employment = 0.0;
    double imputed_fraction = 0.0;
};

/// Employment of one cell: midpoints for reported bins (national mean size for
/// the open bin) plus imputed suppressed establishments. nullopt when the
/// suppressed part cannot be imputed.
inline std::optional<CellEstimate> estimate_cell(std::string_view naics, const CellCounts& cell,
                                                 const NationalSizeDistribution& national, const SizeBins& bins) {
    std::map<std::string, double> midpoints = bins.midpoints;
    if (cell.reported.contains(bins.open_bin)) {
        midpoints[bins.open_bin] =
            national.mean_size(naics, {bins.open_bin}).value_or(bins.open_bin_default);
    }
    const double reported = estimate_cell_employment(cell.reported, midpoints);
    const auto imputed = impute_suppressed(naics, cell, national);
    if (!imputed) return std::nullopt;
    const double total = reported + *imputed;
    return CellEstimate{total, total > 0.0 ? *imputed / total : 0.0};
}

struct CbpRecord {
    std::string zcta;
    std::string naics;
    std::string size_bin;
    std::int64_t establishments = 0;
    bool suppressed = false;
};

struct CellBuild {
    std::vector<RegionCell> cells;  // sorted by (zcta, industry_code)
    std::vector<std::string> warnings;
};

/// Groups CBP rows into ZIP x NAICS cells and estimates their employment.
/// Cells whose suppressed establishments cannot be imputed are dropped.
inline CellBuild build_cells(std::span<const CbpRecord> rows, const NationalSizeDistribution& national,
                             const SizeBins& bins = {}) {
    std::map<std::pair<std::string, std::string>, CellCounts> grouped;
    for (const auto& r : rows) {
        const std::string bin = normalize_bin_label(r.size_bin);
        if (r.establishments < 0) {
            throw IngestionError(Errc::bad_csv, "negative establishments for " + r.zcta + "/" + r.naics);
        }
        auto& cell = grouped[{r.zcta, r.naics}];
        if (r.suppressed) {
            if (bin != kAnyBin && !bins.known(bin)) {
                throw IngestionError(Errc::unknown_size_bin, "unknown size bin '" + r.size_bin + "'");
            }
            cell.suppressed[bin] += r.establishments;
        } else {
            if (!bins.known(bin)) throw IngestionError(Errc::unknown_size_bin, "unknown size bin '" + r.size_bin + "'");
            cell.reported[bin] += r.establishments;
        }
    }
    CellBuild out;
    for (const auto& [key, counts] : grouped) {
        const auto est = estimate_cell(key.second, counts, national, bins);
        if (!est) {
            out.warnings.push_back("dropped cell " + key.first + "/" + key.second +
                                   ": no national size distribution to impute suppressed establishments");
            continue;
        }
        out.cells.push_back({key.first, key.second, est->employment, est->imputed_fraction});
    }
    return out;
}

struct DensityRecord {
    std::string zcta;
    double population = 0.0;
    double land_area = 0.0;  // km^2
};

struct RegionDensity {
    std::string zcta;
    double population = 0.0;
    double land_area = 0.0;
    double raw_density = 0.0;
    double normalized_density = 0.0;
};

enum class DensitySource { population, employment };

struct DensityBuild {
    std::vector<RegionDensity> regions;  // sorted by zcta
    std::vector<std::string> warnings;
};

/// Total employment per ZCTA, summed in cell order.
inline std::map<std::string, double> employment_by_region(std::span<const RegionCell> cells) {
    std::map<std::string, CompensatedSum> acc;
    for (const auto& c : cells) acc[c.zcta] += c.employment;
    std::map<std::string, double> out;
    for (const auto& [z, s] : acc) out.emplace(z, s.value());
    return out;
}

/// Divides raw densities by their employment-weighted mean, so an average
/// worker sits at density 1. Regions with non-positive land area are dropped;
/// regions without employment keep a normalised density but carry no weight.
inline DensityBuild normalize_density(std::span<const DensityRecord> records,
                                      const std::map<std::string, double>& employment,
                                      DensitySource source = DensitySource::population) {
    DensityBuild out;
    std::map<std::string, RegionDensity> regions;
    for (const auto& r : records) {
        if (!(r.land_area > 0.0)) {
            out.warnings.push_back("dropped region " + r.zcta + ": non-positive land area");
            continue;
        }
        if (regions.contains(r.zcta)) throw IngestionError(Errc::duplicate_code, "duplicate ZCTA " + r.zcta);
        RegionDensity d;
        d.zcta = r.zcta;
        d.population = r.population;
        d.land_area = r.land_area;
        double mass = r.population;
        if (source == DensitySource::employment) {
            auto e = employment.find(r.zcta);
            mass = e == employment.end() ? 0.0 : e->second;
        }
        d.raw_density = mass / r.land_area;
        if (!(d.raw_density > 0.0)) {
            out.warnings.push_back("dropped region " + r.zcta + ": zero density");
            continue;
        }
        regions.emplace(r.zcta, d);
    }
    CompensatedSum weighted, weight;
    for (const auto& [z, d] : regions) {
        auto e = employment.find(z);
        if (e == employment.end() || !(e->second > 0.0)) continue;
        weighted += e->second * d.raw_density;
        weight += e->second;
    }
    if (!(weight.value() > 0.0)) {
        throw IngestionError(Errc::bad_csv, "no region has both a density and positive employment");
    }
    const double mean = weighted.value() / weight.value();
    for (auto& [z, d] : regions) {
        d.normalized_density = d.raw_density / mean;
        out.regions.push_back(d);
    }
    return out;
}

struct RegionShares {
    std::string zcta;
    industry::GroupValues share{};
    double employment = 0.0;
};

struct ExposureBuild {
    std::vector<RegionShares> regions;  // sorted by zcta
    std::vector<std::string> warnings;
};

/// Employment-weighted average of industry chi per group within each ZCTA.
/// Cells that do not resolve to an industry are left out with a warning.
inline ExposureBuild regional_exposure(std::span<const RegionCell> cells, const industry::IndustryResolver& resolver,
                                       unsigned threads = 1) {
    ExposureBuild out;
    // Partition by region in (zcta, industry) order; each partition is reduced
    // independently and in a fixed order.
    std::map<std::string, std::vector<std::pair<const RegionCell*, const industry::IndustryMix*>>> parts;
    std::set<std::string> unresolved;
    std::vector<const RegionCell*> sorted;
    sorted.reserve(cells.size());
    for (const auto& c : cells) sorted.push_back(&c);
    std::sort(sorted.begin(), sorted.end(), [](const RegionCell* a, const RegionCell* b) {
        return std::tie(a->zcta, a->industry_code) < std::tie(b->zcta, b->industry_code);
    });
    for (const RegionCell* c : sorted) {
        const auto match = resolver.resolve(c->industry_code);
        if (!match.mix) {
            unresolved.insert(c->industry_code);
            continue;
        }
        parts[c->zcta].emplace_back(c, match.mix);
    }
    for (const auto& code : unresolved) out.warnings.push_back("no industry mix for NAICS " + code);

    std::vector<const std::pair<const std::string, decltype(parts)::mapped_type>*> order;
    for (const auto& p : parts) order.push_back(&p);
    std::vector<std::optional<RegionShares>> results(order.size());
    parallel_for(order.size(), threads, [&](std::size_t i) {
        const auto& [zcta, members] = *order[i];
        CompensatedSum emp;
        std::array<CompensatedSum, 4> weighted;
        for (const auto& [cell, mix] : members) {
            emp += cell->employment;
            for (std::size_t g = 0; g < 4; ++g) weighted[g] += cell->employment * mix->chi[g];
        }
        if (!(emp.value() > 0.0)) return;
        RegionShares r;
        r.zcta = zcta;
        r.employment = emp.value();
        for (std::size_t g = 0; g < 4; ++g) r.share[g] = weighted[g].value() / r.employment;
        results[i] = std::move(r);
    });
    for (std::size_t i = 0; i < results.size(); ++i) {
        if (results[i]) {
            out.regions.push_back(std::move(*results[i]));
        } else {
            out.warnings.push_back("omitted region " + order[i]->first + ": zero employment");
        }
    }
    return out;
}

}  // namespace sdist::geo
