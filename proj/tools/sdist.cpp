// sdist: command-line driver for the social-distancing exposure pipeline.
//
// Exit codes: 0 success, 1 internal or data error, 2 usage or config error.

#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "sdist/config.hpp"
#include "sdist/error.hpp"
#include "sdist/pipeline.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInternal = 1;
constexpr int kExitUsage = 2;

struct CommonOptions {
    std::string config_path;
    std::vector<std::string> overrides;
    std::optional<std::string> output_dir;
    std::optional<unsigned> threads;
    std::optional<double> fixed_eps;
    std::optional<double> contact_share;
    std::optional<double> elasticity;
    std::optional<double> telecom_cost;
    bool lenient = false;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
    cmd->add_option("-c,--config", o.config_path, "Run configuration file (key = value lines)");
    cmd->add_option("--set", o.overrides, "Override a config key, e.g. --set cutoff=60 (repeatable)");
    cmd->add_option("-o,--output-dir", o.output_dir, "Directory for output files");
    cmd->add_option("--threads", o.threads, "Maximum worker threads");
    cmd->add_option("--fixed-eps", o.fixed_eps, "Use this eps instead of calibrating it");
    cmd->add_option("--contact-share", o.contact_share, "Share of contacts kept by the cap");
    cmd->add_option("--elasticity", o.elasticity, "Target density elasticity of productivity");
    cmd->add_option("--telecom-cost", o.telecom_cost, "Telecom cost per contact (enables fig2.csv in subsidy)");
    cmd->add_flag("--lenient", o.lenient, "Missing work-context data fails the flag instead of aborting");
}

sdist::config::RunConfig build_config(const CommonOptions& o) {
    auto cfg = o.config_path.empty() ? sdist::config::RunConfig{} : sdist::config::RunConfig::load(o.config_path);
    for (const auto& kv : o.overrides) cfg.apply_override(kv);
    if (o.output_dir) cfg.set("output_dir", *o.output_dir);
    if (o.threads) cfg.set("threads", std::to_string(*o.threads));
    if (o.fixed_eps) cfg.set("fixed_eps", sdist::csv::number(*o.fixed_eps, 17));
    if (o.contact_share) cfg.set("contact_share", sdist::csv::number(*o.contact_share, 17));
    if (o.elasticity) cfg.set("elasticity", sdist::csv::number(*o.elasticity, 17));
    if (o.telecom_cost) cfg.set("telecom_cost", sdist::csv::number(*o.telecom_cost, 17));
    if (o.lenient) cfg.set("lenient", "true");
    cfg.validate();
    return cfg;
}

void emit(const sdist::pipeline::Artifacts& a, const std::filesystem::path& dir) {
    sdist::pipeline::write_artifacts(a, dir);
    for (const auto& w : a.warnings) std::cerr << "warning: " << w << '\n';
    for (const auto& line : a.log) std::cout << line << '\n';
    for (const auto& [name, contents] : a.files) std::cout << "wrote " << (dir / name).string() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Business disruption from contact limits: exposure indexes, calibration and wage subsidies"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(sdist::config::kVersion));

    CommonOptions index_opts, calibrate_opts, subsidy_opts, lowess_opts;
    auto* index = app.add_subcommand("index", "Classify occupations; write industry and location indexes");
    add_common(index, index_opts);
    auto* calib = app.add_subcommand("calibrate", "Calibrate eps and the contact cap; write a report");
    add_common(calib, calibrate_opts);
    auto* subsidy = app.add_subcommand("subsidy", "Compensating wage subsidies by sector and location");
    add_common(subsidy, subsidy_opts);

    auto* lowess = app.add_subcommand("lowess", "Smooth regional shares against log density");
    add_common(lowess, lowess_opts);
    std::string lowess_input;
    std::size_t lowess_points = 100;
    lowess->add_option("-i,--input", lowess_input, "Location index CSV (default: <output-dir>/location-index.csv)");
    lowess->add_option("--points", lowess_points, "Evaluation grid size")->check(CLI::Range(2, 100000));

    auto* fig2 = app.add_subcommand("fig2", "Cost ratios under a contact cap or telecom, against density");
    double chi = 0.35, eps = 0.02, cap = 1.0, dmin = 0.01, dmax = 100.0;
    std::optional<double> telecom;
    std::size_t points = 200;
    std::string fig2_out = "out";
    fig2->add_option("--chi", chi, "Communication cost share")->capture_default_str();
    fig2->add_option("--eps", eps, "Density elasticity of contact cost")->capture_default_str();
    fig2->add_option("--cap", cap, "Contact cap N")->capture_default_str();
    fig2->add_option("--telecom-cost", telecom, "Telecom cost per contact");
    fig2->add_option("--dmin", dmin, "Lowest normalised density")->capture_default_str();
    fig2->add_option("--dmax", dmax, "Highest normalised density")->capture_default_str();
    fig2->add_option("--points", points, "Grid size")->check(CLI::Range(2, 1000000))->capture_default_str();
    fig2->add_option("-o,--output-dir", fig2_out, "Directory for fig2.csv")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (index->parsed()) {
            const auto cfg = build_config(index_opts);
            emit(sdist::pipeline::cmd_index(cfg), cfg.output_dir());
        } else if (calib->parsed()) {
            const auto cfg = build_config(calibrate_opts);
            emit(sdist::pipeline::cmd_calibrate(cfg), cfg.output_dir());
        } else if (subsidy->parsed()) {
            const auto cfg = build_config(subsidy_opts);
            emit(sdist::pipeline::cmd_subsidy(cfg), cfg.output_dir());
        } else if (lowess->parsed()) {
            const auto cfg = build_config(lowess_opts);
            const std::string input =
                lowess_input.empty() ? (std::filesystem::path(cfg.output_dir()) / "location-index.csv").string()
                                     : lowess_input;
            emit(sdist::pipeline::cmd_lowess(cfg, input, lowess_points), cfg.output_dir());
        } else if (fig2->parsed()) {
            const auto params = sdist::model::FirmParams::from_chi(chi);
            const sdist::model::Intervention iv(cap, telecom);
            const std::string canonical = "chi=" + sdist::csv::number(chi, 17) + "\ncap=" +
                                          sdist::csv::number(cap, 17) + "\neps=" + sdist::csv::number(eps, 17) +
                                          "\ntelecom=" + (telecom ? sdist::csv::number(*telecom, 17) : "") +
                                          "\ndmin=" + sdist::csv::number(dmin, 17) + "\ndmax=" +
                                          sdist::csv::number(dmax, 17) + "\npoints=" + std::to_string(points) + "\n";
            sdist::pipeline::Artifacts a;
            a.files["fig2.csv"] = sdist::pipeline::fig2_file(
                params, eps, iv, dmin, dmax, points,
                sdist::config::provenance_line(sdist::config::fnv1a_hex(canonical)));
            emit(a, fig2_out);
        }
    } catch (const sdist::ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const sdist::DomainError& e) {
        // Only user-supplied scalars reach the model directly (fig2 flags).
        std::cerr << "error: " << e.what() << '\n';
        return fig2->parsed() ? kExitUsage : kExitInternal;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInternal;
    }
    return kExitOk;
}
