#pragma once

// Occupation-level exposure flags built from task-activity importance scores
// (0-100) and ordinal work-context frequencies (1-5).

#include <algorithm>
#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <regex>
#include <span>
#include <string>
#include <vector>

#include "sdist/error.hpp"
#include "sdist/numeric.hpp"

namespace sdist::occupation {

enum class ContextItem { face_to_face, email, letters, proximity };

inline constexpr std::array<ContextItem, 4> kContextItems = {ContextItem::face_to_face, ContextItem::email,
                                                             ContextItem::letters, ContextItem::proximity};

inline std::string context_column(ContextItem item) {
    switch (item) {
        case ContextItem::face_to_face: return "ctx_face_to_face";
        case ContextItem::email: return "ctx_email";
        case ContextItem::letters: return "ctx_letters";
        case ContextItem::proximity: return "ctx_proximity";
    }
    return {};
}

struct OccupationProfile {
    std::string soc_code;
    std::string title;
    std::map<std::string, double> task_scores;
    std::map<ContextItem, int> context_levels;

    /// Throws IngestionError on a malformed SOC code, a score outside
    /// [0, 100] or a context level outside 1..5.
    void validate() const {
        static const std::regex soc_pattern(R"(\d{2}-\d{4})");
        if (!std::regex_match(soc_code, soc_pattern)) {
            throw IngestionError(Errc::invalid_profile, "malformed SOC code '" + soc_code + "'");
        }
        for (const auto& [task, score] : task_scores) {
            if (!(score >= 0.0 && score <= 100.0)) {
                throw IngestionError(Errc::invalid_profile,
                                     soc_code + ": score for " + task + " outside [0, 100]");
            }
        }
        for (const auto& [item, level] : context_levels) {
            if (level < 1 || level > 5) {
                throw IngestionError(Errc::invalid_profile,
                                     soc_code + ": " + context_column(item) + " level outside 1..5");
            }
        }
    }
};

struct ExposureFlags {
    bool teamwork = false;
    bool customer = false;
    bool presence = false;
    bool communication = false;

    static ExposureFlags make(bool teamwork, bool customer, bool presence) {
        return {teamwork, customer, presence, teamwork || customer};
    }

    friend bool operator==(const ExposureFlags&, const ExposureFlags&) = default;
};

using TaskList = std::array<std::string, 5>;

/// Component tasks of each composite index.
struct TaskLists {
    TaskList teamwork = {
        "work_with_work_group_or_team",
        "provide_consultation_and_advice_to_others",
        "coordinating_the_work_and_activities_of_others",
        "guiding_directing_and_motivating_subordinates",
        "developing_and_building_teams",
    };
    TaskList customer = {
        "deal_with_external_customers",
        "performing_for_or_working_directly_with_the_public",
        "assisting_and_caring_for_others",
        "provide_consultation_and_advice_to_others",
        "establishing_and_maintaining_interpersonal_relationships",
    };
    TaskList presence = {
        "handling_and_moving_objects",
        "operating_vehicles_mechanized_devices_or_equipment",
        "repairing_and_maintaining_electronic_equipment",
        "repairing_and_maintaining_mechanical_equipment",
        "inspecting_equipment_structures_or_material",
    };

    /// Distinct task names in first-seen order (teamwork, customer, presence).
    [[nodiscard]] std::vector<std::string> all() const {
        std::vector<std::string> out;
        for (const TaskList* list : {&teamwork, &customer, &presence}) {
            for (const auto& t : *list) {
                if (std::find(out.begin(), out.end(), t) == out.end()) out.push_back(t);
            }
        }
        return out;
    }
};

/// Classification thresholds. The composite cutoff is strict; context levels
/// are inclusive lower bounds on the 1-5 scale (4 = several times a week,
/// 3 = shared-office proximity).
struct Thresholds {
    double cutoff = 62.5;
    int face_to_face_level = 4;
    int proximity_level = 3;
    /// Treat a missing context item as failing its gate instead of throwing.
    bool lenient = false;
};

struct IndexDefinition {
    TaskLists tasks;
    Thresholds thresholds;
};

inline double composite_index(const OccupationProfile& profile, std::span<const std::string> component_tasks) {
    CompensatedSum sum;
    for (const auto& task : component_tasks) {
        auto it = profile.task_scores.find(task);
        if (it == profile.task_scores.end()) {
            throw ClassificationError(Errc::missing_task, profile.soc_code + ": missing task score '" + task + "'");
        }
        sum += it->second;
    }
    return sum.value() / static_cast<double>(component_tasks.size());
}

namespace detail {

inline std::optional<int> context(const OccupationProfile& profile, ContextItem item, const Thresholds& th) {
    auto it = profile.context_levels.find(item);
    if (it != profile.context_levels.end()) return it->second;
    if (th.lenient) return std::nullopt;
    throw ClassificationError(Errc::missing_context,
                              profile.soc_code + ": missing work context '" + context_column(item) + "'");
}

}  // namespace detail

inline bool classify_teamwork(const OccupationProfile& profile, const IndexDefinition& def = {}) {
    const auto& th = def.thresholds;
    const double score = composite_index(profile, def.tasks.teamwork);
    const auto f2f = detail::context(profile, ContextItem::face_to_face, th);
    const auto email = detail::context(profile, ContextItem::email, th);
    const auto letters = detail::context(profile, ContextItem::letters, th);
    if (!f2f || !email || !letters) return false;
    return score > th.cutoff && *f2f >= th.face_to_face_level && *f2f > *email && *f2f > *letters;
}

inline bool classify_customer(const OccupationProfile& profile, const IndexDefinition& def = {}) {
    const auto& th = def.thresholds;
    const double score = composite_index(profile, def.tasks.customer);
    const auto f2f = detail::context(profile, ContextItem::face_to_face, th);
    if (!f2f) return false;
    return score > th.cutoff && *f2f >= th.face_to_face_level;
}

inline bool classify_presence(const OccupationProfile& profile, const IndexDefinition& def = {}) {
    const auto& th = def.thresholds;
    const double score = composite_index(profile, def.tasks.presence);
    const auto proximity = detail::context(profile, ContextItem::proximity, th);
    if (!proximity) return false;
    return score > th.cutoff && *proximity >= th.proximity_level;
}

inline ExposureFlags classify(const OccupationProfile& profile, const IndexDefinition& def = {}) {
    return ExposureFlags::make(classify_teamwork(profile, def), classify_customer(profile, def),
                               classify_presence(profile, def));
}

struct FlagCounts {
    std::size_t occupations = 0;
    std::size_t teamwork = 0;
    std::size_t customer = 0;
    std::size_t communication = 0;
    std::size_t presence = 0;
};

struct Classification {
    std::map<std::string, ExposureFlags> flags;
    FlagCounts counts;
};

/// Classifies every profile. Duplicate SOC codes are an ingestion error.
inline Classification classify_all(std::span<const OccupationProfile> profiles, const IndexDefinition& def = {},
                                   unsigned threads = 1) {
    Classification out;
    {
        std::map<std::string, std::size_t> seen;
        for (std::size_t i = 0; i < profiles.size(); ++i) {
            if (!seen.emplace(profiles[i].soc_code, i).second) {
                throw IngestionError(Errc::duplicate_code, "duplicate SOC code " + profiles[i].soc_code);
            }
        }
    }
    std::vector<ExposureFlags> flags(profiles.size());
    parallel_for(profiles.size(), threads, [&](std::size_t i) { flags[i] = classify(profiles[i], def); });

    for (std::size_t i = 0; i < profiles.size(); ++i) {
        out.flags.emplace(profiles[i].soc_code, flags[i]);
        out.counts.teamwork += flags[i].teamwork;
        out.counts.customer += flags[i].customer;
        out.counts.communication += flags[i].communication;
        out.counts.presence += flags[i].presence;
    }
    out.counts.occupations = profiles.size();
    return out;
}

}  // namespace sdist::occupation
