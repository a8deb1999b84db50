#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hyperlab/scenario.hpp"

namespace fs = std::filesystem;
using namespace hyperlab;

namespace {

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << content;
}

std::vector<int> parse_resolutions(const std::string& csv) {
    std::vector<int> out;
    std::stringstream ss(csv);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok.empty()) continue;
        out.push_back(std::stoi(tok));
    }
    return out;
}

std::string sanitize(const std::string& name) {
    std::string s = name;
    for (char& c : s)
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_')) c = '_';
    return s.empty() ? std::string("unnamed") : s;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"weighted curvature functionals of star-shaped hypersurfaces in hyperbolic space"};
    app.require_subcommand(1);

    std::string config_path, out_dir = ".";
    std::string resolutions_csv;
    bool quiet = false;
    long long seed_override = -1;
    int resolution_override = 0;

    auto add_common = [&](CLI::App* cmd, bool needs_config) {
        auto* opt = cmd->add_option("--config", config_path, "configuration file (JSON)");
        if (needs_config) opt->required();
        cmd->add_option("--out", out_dir, "output directory");
        cmd->add_flag("--quiet", quiet, "suppress per-check output");
        cmd->add_option("--seed", seed_override, "override the configured seed");
        cmd->add_option("--resolution", resolution_override, "override the grid resolution");
    };

    CLI::App* verify = app.add_subcommand("verify", "run the requested identity/inequality checks");
    add_common(verify, true);
    CLI::App* convergence = app.add_subcommand("convergence", "rerun checks across a resolution sweep");
    add_common(convergence, true);
    convergence->add_option("--resolutions", resolutions_csv, "comma-separated resolutions");
    CLI::App* probe = app.add_subcommand("probe", "run a rigidity shape-optimization probe");
    add_common(probe, true);
    CLI::App* make_shape = app.add_subcommand("make-shape", "write a shape file from a shape description");
    add_common(make_shape, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        fs::create_directories(out_dir);

        if (verify->parsed() || convergence->parsed()) {
            scenario::Scenario sc = scenario::load_scenario(config_path);
            if (seed_override >= 0) sc.seed = static_cast<std::uint64_t>(seed_override);
            if (resolution_override > 0) sc.resolution = resolution_override;
            const std::string stem = sanitize(sc.name);

            if (verify->parsed()) {
                const scenario::VerifyRun run = scenario::run_verify(sc);
                write_file(fs::path(out_dir) / (stem + "_report.json"), scenario::report_to_json(run));
                write_file(fs::path(out_dir) / (stem + "_report.csv"),
                           scenario::report_to_csv(run.report));
                if (!quiet) {
                    for (const auto& e : run.report.entries)
                        std::cout << "[" << e.verdict << "] " << e.name << " (" << e.anchor
                                  << ") residual=" << scenario::format_double(e.residual) << "\n";
                }
                return run.exit_code;
            }

            std::vector<int> res =
                resolutions_csv.empty() ? sc.resolutions : parse_resolutions(resolutions_csv);
            if (res.empty()) throw std::invalid_argument("convergence: no resolutions given");
            const auto rows = scenario::run_convergence(sc, res);
            write_file(fs::path(out_dir) / (stem + "_convergence.csv"), scenario::convergence_to_csv(rows));
            if (!quiet)
                std::cout << "wrote " << rows.size() << " rows for " << res.size() << " resolutions\n";
            return 0;
        }

        if (probe->parsed()) {
            scenario::ProbeJob job = scenario::load_probe_job(config_path);
            if (seed_override >= 0) job.config.seed = static_cast<std::uint64_t>(seed_override);
            if (resolution_override > 0) job.config.resolution = resolution_override;
            const rigidity::ProbeResult result = rigidity::run_probe(job.config);
            const std::string stem = sanitize(job.name);
            write_file(fs::path(out_dir) / (stem + "_probe.json"),
                       scenario::probe_result_to_json(job, result));
            write_file(fs::path(out_dir) / (stem + "_history.csv"),
                       scenario::probe_history_to_csv(result));
            if (!quiet) {
                std::cout << (result.sphere_reached ? "sphere-reached" : "inconclusive")
                          << " J=" << scenario::format_double(result.final_objective)
                          << " spread=" << scenario::format_double(result.radius_spread_rel)
                          << " evals=" << result.evaluations << " wall=" << result.wall_seconds << "s\n";
            }
            return result.sphere_reached ? 0 : 3;
        }

        if (make_shape->parsed()) {
            std::ifstream in(config_path);
            if (!in) throw std::runtime_error("cannot open " + config_path);
            std::ostringstream ss;
            ss << in.rdbuf();
            const auto j = nlohmann::json::parse(ss.str());
            const int dim = j.at("dimension").get<int>();
            const std::string name = sanitize(j.value("name", std::string("shape")));
            scenario::Scenario tmp;
            scenario::ShapeSource src;
            {
                // reuse the scenario shape grammar
                nlohmann::json wrapper = {{"schema", 1}, {"dimension", dim}, {"shape", j.at("shape")}};
                tmp = scenario::scenario_from_json_text(wrapper.dump());
                src = tmp.shape;
            }
            std::uint64_t seed = j.value("seed", 0ULL);
            if (seed_override >= 0) seed = static_cast<std::uint64_t>(seed_override);
            const surface::RadialShape shape = scenario::realize_shape(src, dim, seed);
            const fs::path out_path = fs::path(out_dir) / (name + "_shape.json");
            surface::save_shape(shape, out_path.string());
            if (!quiet) std::cout << "wrote " << out_path.string() << "\n";
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
