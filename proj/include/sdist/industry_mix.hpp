#pragma once

// Industry-level exposure shares: chi_g = sum_o s_io * flag_og, where s_io is
// occupation o's share of industry i employment.

#include <algorithm>
#include <array>
#include <cstddef>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sdist/error.hpp"
#include "sdist/numeric.hpp"
#include "sdist/occupation_index.hpp"

namespace sdist::industry {

enum class Group { teamwork = 0, customer = 1, communication = 2, presence = 3 };

inline constexpr std::array<Group, 4> kGroups = {Group::teamwork, Group::customer, Group::communication,
                                                 Group::presence};

inline std::string_view to_string(Group g) noexcept {
    switch (g) {
        case Group::teamwork: return "teamwork";
        case Group::customer: return "customer";
        case Group::communication: return "communication";
        case Group::presence: return "presence";
    }
    return "unknown";
}

inline bool flag_of(const occupation::ExposureFlags& f, Group g) noexcept {
    switch (g) {
        case Group::teamwork: return f.teamwork;
        case Group::customer: return f.customer;
        case Group::communication: return f.communication;
        case Group::presence: return f.presence;
    }
    return false;
}

/// Per-group values indexed by Group.
using GroupValues = std::array<double, 4>;

inline double& at(GroupValues& v, Group g) noexcept { return v[static_cast<std::size_t>(g)]; }
inline double at(const GroupValues& v, Group g) noexcept { return v[static_cast<std::size_t>(g)]; }

struct MatrixRecord {
    std::string industry_code;
    std::string soc_code;
    double employment = 0.0;
};

struct IndustryMix {
    std::string industry_code;
    /// s_io over classified occupations, summing to 1.
    std::map<std::string, double> shares;
    GroupValues chi{};
    /// Matrix employment of the classified occupations.
    double employment = 0.0;

    [[nodiscard]] double chi_of(Group g) const noexcept { return at(chi, g); }
};

struct MixReport {
    /// Matrix occupations with no exposure flags; left out of the shares.
    std::vector<std::string> unknown_soc_codes;
    /// Industries whose classified employment is zero.
    std::vector<std::string> skipped_industries;
    /// Matrix employment by flag, summed over industries.
    GroupValues flagged_employment{};
    double classified_employment = 0.0;
    double unknown_employment = 0.0;
};

struct MixBuild {
    std::vector<IndustryMix> mixes;  // sorted by industry_code
    MixReport report;
};

/// Builds one IndustryMix per industry in the matrix. Rows for the same
/// (industry, occupation) pair are summed. Result is independent of row order.
inline MixBuild build_mix(std::span<const MatrixRecord> rows,
                          const std::map<std::string, occupation::ExposureFlags>& flags) {
    std::map<std::string, std::map<std::string, double>> by_industry;
    std::set<std::string> unknown;
    MixBuild out;
    {
        std::map<std::string, std::map<std::string, std::vector<double>>> raw;
        for (const auto& r : rows) {
            if (!(r.employment >= 0.0)) {
                throw IngestionError(Errc::bad_csv, "negative employment for " + r.industry_code + "/" + r.soc_code);
            }
            raw[r.industry_code][r.soc_code].push_back(r.employment);
        }
        // Sorting the duplicates keeps the sum independent of input order.
        for (auto& [ind, occs] : raw) {
            auto& dst = by_industry[ind];
            for (auto& [soc, values] : occs) {
                std::sort(values.begin(), values.end());
                dst[soc] = compensated_sum(values);
            }
        }
    }

    CompensatedSum classified_total, unknown_total;
    std::array<CompensatedSum, 4> flagged;
    for (const auto& [ind, occs] : by_industry) {
        CompensatedSum total;
        for (const auto& [soc, emp] : occs) {
            if (flags.contains(soc)) {
                total += emp;
            } else {
                unknown.insert(soc);
                unknown_total += emp;
            }
        }
        const double industry_total = total.value();
        if (!(industry_total > 0.0)) {
            out.report.skipped_industries.push_back(ind);
            continue;
        }
        IndustryMix mix;
        mix.industry_code = ind;
        mix.employment = industry_total;
        std::array<CompensatedSum, 4> chi;
        for (const auto& [soc, emp] : occs) {
            auto f = flags.find(soc);
            if (f == flags.end()) continue;
            const double share = emp / industry_total;
            mix.shares.emplace(soc, share);
            for (Group g : kGroups) {
                if (flag_of(f->second, g)) {
                    chi[static_cast<std::size_t>(g)] += share;
                    flagged[static_cast<std::size_t>(g)] += emp;
                }
            }
        }
        for (Group g : kGroups) {
            at(mix.chi, g) = std::clamp(chi[static_cast<std::size_t>(g)].value(), 0.0, 1.0);
        }
        classified_total += industry_total;
        out.mixes.push_back(std::move(mix));
    }
    out.report.unknown_soc_codes.assign(unknown.begin(), unknown.end());
    out.report.classified_employment = classified_total.value();
    out.report.unknown_employment = unknown_total.value();
    for (Group g : kGroups) at(out.report.flagged_employment, g) = flagged[static_cast<std::size_t>(g)].value();
    return out;
}

struct Ranking {
    std::vector<IndustryMix> top;
    std::vector<IndustryMix> bottom;
};

/// Orders industries by the group's chi, highest first, ties by code.
/// `bottom` holds the last k of that order, still highest first.
inline Ranking rank_industries(std::span<const IndustryMix> mixes, Group group, std::size_t k) {
    if (k < 1) throw DomainError(Errc::non_positive_argument, "ranking size k must be at least 1");
    std::vector<IndustryMix> sorted(mixes.begin(), mixes.end());
    std::sort(sorted.begin(), sorted.end(), [group](const IndustryMix& a, const IndustryMix& b) {
        if (a.chi_of(group) != b.chi_of(group)) return a.chi_of(group) > b.chi_of(group);
        return a.industry_code < b.industry_code;
    });
    const std::size_t n = std::min(k, sorted.size());
    Ranking r;
    r.top.assign(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(n));
    r.bottom.assign(sorted.end() - static_cast<std::ptrdiff_t>(n), sorted.end());
    return r;
}

struct ExclusionResult {
    std::vector<IndustryMix> kept;
    std::vector<std::string> removed;
    /// Requested exclusions with no matching industry (warnings).
    std::vector<std::string> absent;
};

inline ExclusionResult exclude_sectors(std::span<const IndustryMix> mixes, std::span<const std::string> exclusions) {
    const std::set<std::string> excluded(exclusions.begin(), exclusions.end());
    ExclusionResult out;
    std::set<std::string> matched;
    for (const auto& m : mixes) {
        if (excluded.contains(m.industry_code)) {
            out.removed.push_back(m.industry_code);
            matched.insert(m.industry_code);
        } else {
            out.kept.push_back(m);
        }
    }
    for (const auto& code : excluded) {
        if (!matched.contains(code)) out.absent.push_back(code);
    }
    return out;
}

/// True when `code` or one of its NAICS ancestors (prefixes) is listed.
inline bool is_excluded(std::string_view code, std::span<const std::string> exclusions) {
    for (std::size_t len = code.size(); len >= 2; --len) {
        const auto prefix = code.substr(0, len);
        if (std::find(exclusions.begin(), exclusions.end(), prefix) != exclusions.end()) return true;
    }
    return false;
}

/// Maps detailed NAICS codes onto the industries of the occupation matrix.
/// Lookup walks from the full code toward its 2-digit ancestor, at each level
/// trying a concordance entry (NAICS prefix -> industry code) and then an
/// industry with that exact code.
class IndustryResolver {
public:
    struct Match {
        const IndustryMix* mix = nullptr;
        /// The match came from an ancestor, not the code itself.
        bool fallback = false;
    };

    explicit IndustryResolver(std::span<const IndustryMix> mixes,
                              std::map<std::string, std::string> concordance = {})
        : concordance_(std::move(concordance)) {
        for (const auto& m : mixes) by_code_.emplace(m.industry_code, m);
    }

    [[nodiscard]] Match resolve(std::string_view naics) const {
        for (std::size_t len = naics.size(); len >= 2; --len) {
            const std::string prefix(naics.substr(0, len));
            if (auto c = concordance_.find(prefix); c != concordance_.end()) {
                if (auto m = by_code_.find(c->second); m != by_code_.end()) {
                    return {&m->second, len != naics.size()};
                }
            }
            if (auto m = by_code_.find(prefix); m != by_code_.end()) {
                return {&m->second, len != naics.size()};
            }
        }
        return {};
    }

    [[nodiscard]] const std::map<std::string, IndustryMix>& mixes() const noexcept { return by_code_; }

private:
    std::map<std::string, std::string> concordance_;
    std::map<std::string, IndustryMix> by_code_;
};

}  // namespace sdist::industry
