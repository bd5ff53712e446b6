#pragma once

// Declarative run configuration: one `key = value` file plus overrides.

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "sdist/csv.hpp"
#include "sdist/error.hpp"
#include "sdist/geo.hpp"
#include "sdist/occupation_index.hpp"

namespace sdist::config {

inline constexpr std::string_view kVersion = "0.1.0";

namespace detail {

inline std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split_list(std::string_view s) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in{std::string(s)};
    while (std::getline(in, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

inline double to_double(std::string_view key, const std::string& v) {
    double out = 0.0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size() || v.empty()) {
        throw ConfigError(Errc::bad_config, "config key '" + std::string(key) + "': '" + v + "' is not a number");
    }
    return out;
}

inline int to_int(std::string_view key, const std::string& v) {
    int out = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size() || v.empty()) {
        throw ConfigError(Errc::bad_config, "config key '" + std::string(key) + "': '" + v + "' is not an integer");
    }
    return out;
}

inline bool to_bool(std::string_view key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError(Errc::bad_config, "config key '" + std::string(key) + "': '" + v + "' is not a boolean");
}

}  // namespace detail

/// FNV-1a 64 as 16 hex digits.
inline std::string fnv1a_hex(std::string_view text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

inline std::string provenance_line(std::string_view hash) {
    return "sdist " + std::string(kVersion) + " config=" + std::string(hash);
}

/// Keys that never influence output content; left out of the config hash.
inline bool is_runtime_key(std::string_view key) {
    return key == "output_dir" || key == "threads";
}

class RunConfig {
public:
    /// Every recognised key with its default ("" = unset).
    static const std::map<std::string, std::string>& defaults() {
        static const std::map<std::string, std::string> d = {
            {"occupations", ""},
            {"matrix", ""},
            {"matrix_date", "2020-02"},
            {"cbp", ""},
            {"density", ""},
            {"national_sizes", ""},
            {"industry_names", ""},
            {"concordance", ""},
            {"region_groups", ""},
            {"official_employment", ""},
            {"exclusions", "622,6214"},
            {"cutoff", "62.5"},
            {"face_to_face_level", "4"},
            {"proximity_level", "3"},
            {"lenient", "false"},
            {"teamwork_tasks", ""},
            {"customer_tasks", ""},
            {"presence_tasks", ""},
            {"contact_share", "0.5"},
            {"elasticity", "0.04"},
            {"fixed_eps", ""},
            {"telecom_cost", ""},
            {"density_source", "population"},
            {"open_bin_default", "1500"},
            {"lowess_bandwidth", "0.5"},
            {"output_dir", "out"},
            {"seed", "0"},
            {"threads", "1"},
        };
        return d;
    }

    static bool is_path_key(std::string_view key) {
        return key == "occupations" || key == "matrix" || key == "cbp" || key == "density" ||
               key == "national_sizes" || key == "industry_names" || key == "concordance" ||
               key == "region_groups" || key == "official_employment";
    }

    RunConfig() : values_(defaults()) {}

    /// Parses `key = value` lines; '#' starts a comment line. Relative paths
    /// are resolved against `base_dir`.
    static RunConfig parse(std::string_view text, const std::filesystem::path& base_dir = {}) {
        RunConfig cfg;
        cfg.base_dir_ = base_dir;
        std::istringstream in{std::string(text)};
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            const std::string t = detail::trim(line);
            if (t.empty() || t[0] == '#') continue;
            const auto eq = t.find('=');
            if (eq == std::string::npos) {
                throw ConfigError(Errc::bad_config, "config line " + std::to_string(lineno) + ": expected key = value");
            }
            cfg.set(detail::trim(t.substr(0, eq)), detail::trim(t.substr(eq + 1)));
        }
        return cfg;
    }

    static RunConfig load(const std::filesystem::path& path) {
        return parse(csv::read_file(path.string()), path.parent_path());
    }

    void set(const std::string& key, const std::string& value) {
        if (!defaults().contains(key)) throw ConfigError(Errc::bad_config, "unknown config key '" + key + "'");
        values_[key] = value;
    }

    /// Applies "key=value" overrides (command-line flags win over the file).
    void apply_override(std::string_view assignment) {
        const auto eq = assignment.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError(Errc::bad_config, "override '" + std::string(assignment) + "' is not key=value");
        }
        set(detail::trim(assignment.substr(0, eq)), detail::trim(assignment.substr(eq + 1)));
    }

    [[nodiscard]] const std::string& raw(const std::string& key) const { return values_.at(key); }
    [[nodiscard]] bool has(const std::string& key) const { return !values_.at(key).empty(); }

    /// Input path with relative paths taken from the config file's directory.
    [[nodiscard]] std::optional<std::string> path(const std::string& key) const {
        if (!has(key)) return std::nullopt;
        std::filesystem::path p(raw(key));
        if (p.is_relative() && !base_dir_.empty()) p = base_dir_ / p;
        return p.string();
    }

    [[nodiscard]] std::string require_path(const std::string& key) const {
        auto p = path(key);
        if (!p) throw ConfigError(Errc::bad_config, "config key '" + key + "' is required for this command");
        return *p;
    }

    [[nodiscard]] double number(const std::string& key) const { return detail::to_double(key, raw(key)); }
    [[nodiscard]] int integer(const std::string& key) const { return detail::to_int(key, raw(key)); }
    [[nodiscard]] bool boolean(const std::string& key) const { return detail::to_bool(key, raw(key)); }

    [[nodiscard]] std::optional<double> optional_number(const std::string& key) const {
        if (!has(key)) return std::nullopt;
        return number(key);
    }

    [[nodiscard]] std::vector<std::string> list(const std::string& key) const { return detail::split_list(raw(key)); }

    [[nodiscard]] std::string output_dir() const {
        std::filesystem::path p(raw("output_dir"));
        return p.string();
    }

    [[nodiscard]] unsigned threads() const {
        const int t = integer("threads");
        return t < 1 ? 1u : static_cast<unsigned>(t);
    }

    [[nodiscard]] occupation::IndexDefinition index_definition() const {
        occupation::IndexDefinition def;
        def.thresholds.cutoff = number("cutoff");
        def.thresholds.face_to_face_level = integer("face_to_face_level");
        def.thresholds.proximity_level = integer("proximity_level");
        def.thresholds.lenient = boolean("lenient");
        const auto tasks = [this](const std::string& key, occupation::TaskList& dst) {
            if (!has(key)) return;
            const auto items = list(key);
            if (items.size() != dst.size()) {
                throw ConfigError(Errc::bad_config, "config key '" + key + "' needs exactly five task names");
            }
            std::copy(items.begin(), items.end(), dst.begin());
        };
        tasks("teamwork_tasks", def.tasks.teamwork);
        tasks("customer_tasks", def.tasks.customer);
        tasks("presence_tasks", def.tasks.presence);
        return def;
    }

    [[nodiscard]] geo::SizeBins size_bins() const {
        geo::SizeBins bins;
        bins.open_bin_default = number("open_bin_default");
        return bins;
    }

    [[nodiscard]] geo::DensitySource density_source() const {
        const auto& v = raw("density_source");
        if (v == "population") return geo::DensitySource::population;
        if (v == "employment") return geo::DensitySource::employment;
        throw ConfigError(Errc::bad_config, "density_source must be 'population' or 'employment'");
    }

    /// Throws ConfigError when a set input file is missing or a threshold or
    /// target lies outside its valid range.
    void validate() const {
        for (const auto& [key, value] : values_) {
            if (is_path_key(key) && !value.empty() && !std::filesystem::exists(*path(key))) {
                throw ConfigError(Errc::missing_file, "input file for '" + key + "' not found: " + *path(key));
            }
        }
        const double cutoff = number("cutoff");
        if (!(cutoff >= 0.0 && cutoff <= 100.0)) throw ConfigError(Errc::bad_config, "cutoff must lie in [0, 100]");
        for (const char* key : {"face_to_face_level", "proximity_level"}) {
            const int v = integer(key);
            if (v < 1 || v > 5) throw ConfigError(Errc::bad_config, std::string(key) + " must lie in 1..5");
        }
        (void)boolean("lenient");
        const double share = number("contact_share");
        if (!(share > 0.0 && share <= 1.0)) {
            throw ConfigError(Errc::bad_target, "contact_share must lie in (0, 1], got " + raw("contact_share"));
        }
        if (!(number("elasticity") > 0.0)) throw ConfigError(Errc::bad_target, "elasticity must be positive");
        if (auto e = optional_number("fixed_eps"); e && !(*e > 0.0)) {
            throw ConfigError(Errc::bad_target, "fixed_eps must be positive");
        }
        if (auto t = optional_number("telecom_cost"); t && !(*t > 0.0)) {
            throw ConfigError(Errc::bad_config, "telecom_cost must be positive");
        }
        const double bw = number("lowess_bandwidth");
        if (!(bw > 0.0 && bw <= 1.0)) throw ConfigError(Errc::bad_config, "lowess_bandwidth must lie in (0, 1]");
        if (!(number("open_bin_default") > 0.0)) throw ConfigError(Errc::bad_config, "open_bin_default must be positive");
        (void)density_source();
        (void)integer("seed");
        (void)integer("threads");
        (void)index_definition();
    }

    /// Sorted key=value lines of every content-relevant key.
    [[nodiscard]] std::string canonical() const {
        std::string out;
        for (const auto& [key, value] : values_) {
            if (is_runtime_key(key)) continue;
            out += key + "=" + value + "\n";
        }
        return out;
    }

    [[nodiscard]] std::string hash() const { return fnv1a_hex(canonical()); }

    /// First line of every output file.
    [[nodiscard]] std::string provenance() const { return provenance_line(hash()); }

private:
    std::map<std::string, std::string> values_;
    std::filesystem::path base_dir_;
};

}  // namespace sdist::config
