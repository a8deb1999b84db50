#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hyperlab/functionals.hpp"
#include "hyperlab/rigidity.hpp"
#include "hyperlab/surface.hpp"

namespace hyperlab::scenario {

/// Shape source of a scenario: a named constructor for a RadialShape.
struct ShapeSource {
    std::string type;  // sphere | offcenter_sphere | perturbed_sphere | coefficients | file
    double radius = 1.0;
    double center_distance = 0.0;
    std::vector<double> center_direction;  // optional; axis default per dimension
    double amplitude = 0.1;
    bool has_seed = false;
    std::uint64_t seed = 0;
    int band_limit = -1;  // -1: per-type default
    std::vector<double> coefficients;
    std::string path;
};

surface::RadialShape realize_shape(const ShapeSource& src, int dim, std::uint64_t fallback_seed);

struct Scenario {
    int schema = 1;
    std::string name = "scenario";
    int dim = 3;
    ShapeSource shape;
    int resolution = 0;  // 0: max(2L+2, 24)
    int k = 1;
    int j = 0;
    std::vector<std::string> checks;  // empty: all checks
    std::uint64_t seed = 0;
    std::vector<int> resolutions;  // convergence sweeps
};

Scenario scenario_from_json_text(const std::string& text);
Scenario load_scenario(const std::string& path);

struct VerifyRun {
    Scenario scenario;
    surface::RadialShape shape;
    int resolution = 0;
    functionals::FunctionalTable table;
    functionals::ResidualReport report;
    int exit_code = 0;  // 0: no failures, 2: at least one failure
};

VerifyRun run_verify(const Scenario& sc);

/// Deterministic serialization: fixed field order, doubles at 17 significant
/// digits (round-trip exact), fixed summation order upstream.
std::string report_to_json(const VerifyRun& run);
std::string report_to_csv(const functionals::ResidualReport& report);

struct ConvergenceRow {
    int resolution = 0;
    std::string check;
    double residual = 0;
    double rel_residual = 0;
};

std::vector<ConvergenceRow> run_convergence(const Scenario& sc, const std::vector<int>& resolutions);
std::string convergence_to_csv(const std::vector<ConvergenceRow>& rows);

struct ProbeJob {
    std::string name = "probe";
    rigidity::ProbeConfig config;
};

ProbeJob probe_job_from_json_text(const std::string& text);
ProbeJob load_probe_job(const std::string& path);
/// wall_seconds is intentionally not serialized: probe reports are
/// byte-reproducible for a fixed config.
std::string probe_result_to_json(const ProbeJob& job, const rigidity::ProbeResult& result);
std::string probe_history_to_csv(const rigidity::ProbeResult& result);

std::string format_double(double v);  // %.17g

}  // namespace hyperlab::scenario
