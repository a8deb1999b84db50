#include "hyperlab/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace hyperlab::scenario {

using nlohmann::json;

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace {

const std::vector<std::string> kAllChecks = {
    "identity_2_4",   "identity_2_5",    "identity_2_6",        "inequality_2_7",
    "heintze_karcher", "theorem_chains", "newton_maclaurin_scan"};

ShapeSource shape_source_from_json(const json& j) {
    ShapeSource s;
    s.type = j.at("type").get<std::string>();
    if (j.contains("radius")) s.radius = j.at("radius").get<double>();
    if (j.contains("center_distance")) s.center_distance = j.at("center_distance").get<double>();
    if (j.contains("center_direction")) s.center_direction = j.at("center_direction").get<std::vector<double>>();
    if (j.contains("amplitude")) s.amplitude = j.at("amplitude").get<double>();
    if (j.contains("seed")) {
        s.seed = j.at("seed").get<std::uint64_t>();
        s.has_seed = true;
    }
    if (j.contains("band_limit")) s.band_limit = j.at("band_limit").get<int>();
    if (j.contains("coefficients")) s.coefficients = j.at("coefficients").get<std::vector<double>>();
    if (j.contains("path")) s.path = j.at("path").get<std::string>();
    return s;
}

json shape_source_to_json(const ShapeSource& s) {
    json j;
    j["type"] = s.type;
    if (s.type == "sphere" || s.type == "offcenter_sphere" || s.type == "perturbed_sphere") j["radius"] = s.radius;
    if (s.type == "offcenter_sphere") j["center_distance"] = s.center_distance;
    if (s.type == "perturbed_sphere") {
        j["amplitude"] = s.amplitude;
        if (s.has_seed) j["seed"] = s.seed;
    }
    if (s.band_limit >= 0) j["band_limit"] = s.band_limit;
    if (s.type == "coefficients") j["coefficients"] = s.coefficients;
    if (s.type == "file") j["path"] = s.path;
    return j;
}

}  // namespace

surface::RadialShape realize_shape(const ShapeSource& src, int dim, std::uint64_t fallback_seed) {
    if (src.type == "sphere") {
        const int L = std::max(src.band_limit, 0);
        return surface::RadialShape::sphere(dim, src.radius, L);
    }
    if (src.type == "offcenter_sphere") {
        ambient::SphereSpec spec;
        spec.radius = src.radius;
        spec.center_distance = src.center_distance;
        if (!src.center_direction.empty()) {
            spec.center_direction = Eigen::Map<const Eigen::VectorXd>(src.center_direction.data(),
                                                                      static_cast<Eigen::Index>(src.center_direction.size()));
            if (spec.center_direction.size() != dim)
                throw std::invalid_argument("shape: center_direction size must match dimension");
            spec.center_direction.normalize();
        } else {
            spec.center_direction = Eigen::VectorXd::Zero(dim);
            spec.center_direction[dim - 1] = 1.0;  // n=2: +y axis; n=3: polar axis
        }
        const int L = (src.band_limit >= 0) ? src.band_limit : ((dim == 2) ? 24 : 16);
        return surface::project_sphere(spec, dim, L);
    }
    if (src.type == "perturbed_sphere") {
        const int L = (src.band_limit >= 0) ? src.band_limit : 4;
        const std::uint64_t seed = src.has_seed ? src.seed : fallback_seed;
        return surface::perturb_sphere(dim, src.radius, src.amplitude, seed, L);
    }
    if (src.type == "coefficients") {
        surface::RadialShape s;
        s.dim = dim;
        s.band_limit = std::max(src.band_limit, 0);
        s.coeffs = src.coefficients;
        s.description = "inline coefficients";
        s.validate();
        return s;
    }
    if (src.type == "file") return surface::load_shape(src.path);
    throw std::invalid_argument("shape: unknown type '" + src.type + "'");
}

Scenario scenario_from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("scenario: invalid JSON: ") + e.what());
    }
    Scenario sc;
    sc.schema = j.value("schema", 1);
    if (sc.schema != 1) throw std::invalid_argument("scenario: unsupported schema version");
    sc.name = j.value("name", std::string("scenario"));
    sc.dim = j.at("dimension").get<int>();
    if (sc.dim != 2 && sc.dim != 3) throw std::invalid_argument("scenario: dimension must be 2 or 3");
    sc.shape = shape_source_from_json(j.at("shape"));
    sc.resolution = j.value("resolution", 0);
    sc.k = j.value("k", 1);
    sc.j = j.value("j", 0);
    const int m = sc.dim - 1;
    if (sc.k < 1 || sc.k > m) throw std::invalid_argument("scenario: k out of range [1, n-1]");
    if (sc.j < 0 || sc.j >= sc.k) throw std::invalid_argument("scenario: need 0 <= j < k");
    sc.seed = j.value("seed", 0ULL);
    if (j.contains("checks")) {
        sc.checks = j.at("checks").get<std::vector<std::string>>();
        for (const auto& c : sc.checks)
            if (std::find(kAllChecks.begin(), kAllChecks.end(), c) == kAllChecks.end())
                throw std::invalid_argument("scenario: unknown check '" + c + "'");
    }
    if (j.contains("resolutions")) sc.resolutions = j.at("resolutions").get<std::vector<int>>();
    return sc;
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("scenario: cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return scenario_from_json_text(ss.str());
}

VerifyRun run_verify(const Scenario& sc) {
    VerifyRun run;
    run.scenario = sc;
    run.shape = realize_shape(sc.shape, sc.dim, sc.seed);
    const int L = run.shape.band_limit;
    run.resolution = (sc.resolution > 0) ? sc.resolution : std::max(2 * L + 2, 24);
    const surface::QuadratureGrid grid(sc.dim, run.resolution);
    const surface::SurfaceGeometry geo = surface::build_geometry(run.shape, grid);
    run.table = functionals::evaluate_functionals(geo, sc.k);

    const std::vector<std::string>& checks = sc.checks.empty() ? kAllChecks : sc.checks;
    auto& entries = run.report.entries;
    for (const auto& name : checks) {
        if (name == "identity_2_4") {
            const auto rs = functionals::check_identity_2_4(geo, run.table, sc.k);
            entries.insert(entries.end(), rs.begin(), rs.end());
        } else if (name == "identity_2_5") {
            entries.push_back(functionals::check_identity_2_5(run.table, sc.k));
        } else if (name == "identity_2_6") {
            entries.push_back(functionals::check_identity_2_6(run.table, sc.k));
        } else if (name == "inequality_2_7") {
            entries.push_back(functionals::check_inequality_2_7(run.table, sc.k));
        } else if (name == "heintze_karcher") {
            entries.push_back(functionals::check_heintze_karcher(run.table));
        } else if (name == "theorem_chains") {
            const auto rs = functionals::check_theorem_chains(run.table, geo, sc.k, sc.j);
            entries.insert(entries.end(), rs.begin(), rs.end());
        } else if (name == "newton_maclaurin_scan") {
            bool any = false;
            for (int kk = 2; kk <= run.table.m; ++kk) {
                for (int jj = 1; jj < kk; ++jj) {
                    entries.push_back(functionals::newton_maclaurin_scan(geo, jj, kk));
                    any = true;
                }
            }
            if (!any) {
                functionals::CheckResult c;
                c.name = "newton_maclaurin_scan";
                c.anchor = "Lemma 2.1";
                c.verdict = "pass";
                c.note = "no index pairs with 1 <= j < k <= m for m = 1";
                entries.push_back(c);
            }
        }
    }
    run.exit_code = run.report.any_fail() ? 2 : 0;
    return run;
}

namespace {

void append_check_json(std::ostringstream& os, const functionals::CheckResult& c, const char* indent) {
    os << indent << "{\"name\": " << json(c.name).dump() << ", \"anchor\": " << json(c.anchor).dump()
       << ", \"lhs\": " << format_double(c.lhs) << ", \"rhs\": " << format_double(c.rhs)
       << ", \"residual\": " << format_double(c.residual)
       << ", \"rel_residual\": " << format_double(c.rel_residual)
       << ", \"tolerance\": " << format_double(c.tolerance) << ", \"verdict\": " << json(c.verdict).dump()
       << ", \"note\": " << json(c.note).dump() << "}";
}

}  // namespace

std::string report_to_json(const VerifyRun& run) {
    std::ostringstream os;
    os << "{\n";
    os << "  \"schema\": 1,\n";
    os << "  \"name\": " << json(run.scenario.name).dump() << ",\n";
    os << "  \"dimension\": " << run.scenario.dim << ",\n";
    os << "  \"k\": " << run.scenario.k << ",\n";
    os << "  \"j\": " << run.scenario.j << ",\n";
    os << "  \"resolution\": " << run.resolution << ",\n";
    os << "  \"seed\": " << run.scenario.seed << ",\n";
    os << "  \"shape\": " << shape_source_to_json(run.scenario.shape).dump() << ",\n";
    os << "  \"shape_description\": " << json(run.shape.description).dump() << ",\n";
    os << "  \"statistics\": {\"area\": " << format_double(run.table.area)
       << ", \"radius_spread\": " << format_double(run.table.radius_spread)
       << ", \"umbilicity_spread\": " << format_double(run.table.umbilicity_spread)
       << ", \"min_H1\": " << format_double(run.table.min_H1) << "},\n";
    os << "  \"tolerances\": {\"equality_rel\": " << format_double(functionals::kEqualityTolRel)
       << ", \"strict\": " << format_double(functionals::kStrictTol) << "},\n";
    os << "  \"checks\": [\n";
    for (size_t i = 0; i < run.report.entries.size(); ++i) {
        append_check_json(os, run.report.entries[i], "    ");
        os << (i + 1 < run.report.entries.size() ? ",\n" : "\n");
    }
    os << "  ],\n";
    int pass = 0, fail = 0, eq = 0, hyp = 0;
    for (const auto& e : run.report.entries) {
        if (e.verdict == "pass") ++pass;
        else if (e.verdict == "fail") ++fail;
        else if (e.verdict == "equality-detected") ++eq;
        else ++hyp;
    }
    os << "  \"summary\": {\"pass\": " << pass << ", \"fail\": " << fail << ", \"equality_detected\": " << eq
       << ", \"hypothesis_not_met\": " << hyp << "}\n";
    os << "}\n";
    return os.str();
}

std::string report_to_csv(const functionals::ResidualReport& report) {
    std::ostringstream os;
    os << "name,anchor,lhs,rhs,residual,rel_residual,tolerance,verdict\n";
    for (const auto& e : report.entries) {
        os << e.name << "," << e.anchor << "," << format_double(e.lhs) << "," << format_double(e.rhs) << ","
           << format_double(e.residual) << "," << format_double(e.rel_residual) << ","
           << format_double(e.tolerance) << "," << e.verdict << "\n";
    }
    return os.str();
}

std::vector<ConvergenceRow> run_convergence(const Scenario& sc, const std::vector<int>& resolutions) {
    if (resolutions.empty()) throw std::invalid_argument("convergence: at least one resolution required");
    std::vector<ConvergenceRow> rows;
    for (int res : resolutions) {
        Scenario s = sc;
        s.resolution = res;
        const VerifyRun run = run_verify(s);
        for (const auto& e : run.report.entries) {
            if (e.verdict == "hypothesis-not-met") continue;
            rows.push_back(ConvergenceRow{run.resolution, e.name, e.residual, e.rel_residual});
        }
    }
    return rows;
}

std::string convergence_to_csv(const std::vector<ConvergenceRow>& rows) {
    std::ostringstream os;
    os << "resolution,check,residual,rel_residual\n";
    for (const auto& r : rows)
        os << r.resolution << "," << r.check << "," << format_double(r.residual) << ","
           << format_double(r.rel_residual) << "\n";
    return os.str();
}

ProbeJob probe_job_from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("probe config: invalid JSON: ") + e.what());
    }
    if (j.value("schema", 1) != 1) throw std::invalid_argument("probe config: unsupported schema version");
    ProbeJob job;
    job.name = j.value("name", std::string("probe"));
    rigidity::ProbeConfig& c = job.config;
    c.dim = j.at("dimension").get<int>();
    c.k = j.value("k", 1);
    c.j = j.value("j", 0);
    c.band_limit = j.value("band_limit", 4);
    c.resolution = j.value("resolution", 0);
    c.seed = j.value("seed", 0ULL);
    if (j.contains("optimizer")) {
        const json& o = j.at("optimizer");
        c.optimizer = o.value("method", std::string("nelder_mead"));
        c.max_evaluations = o.value("max_evaluations", 10000);
        c.objective_tolerance = o.value("objective_tolerance", 1e-9);
        c.initial_step = o.value("initial_step", 0.05);
    }
    if (j.contains("penalties")) {
        const json& p = j.at("penalties");
        c.positivity_weight = p.value("positivity_weight", 1e4);
        c.cone_weight = p.value("cone_weight", 1e4);
        c.min_radius = p.value("min_radius", 0.05);
    }
    if (j.contains("constraint")) {
        const std::string type = j.at("constraint").value("type", std::string("fixed_area"));
        if (type != "fixed_area")
            throw std::invalid_argument("probe config: unknown constraint type '" + type + "'");
    }
    const ShapeSource src = shape_source_from_json(j.at("initial_shape"));
    ShapeSource with_band = src;
    if (with_band.band_limit < 0) with_band.band_limit = c.band_limit;
    c.initial_shape = realize_shape(with_band, c.dim, c.seed);
    if (c.initial_shape.band_limit != c.band_limit)
        throw std::invalid_argument("probe config: initial shape band limit must match the probe band limit");
    c.validate();
    return job;
}

ProbeJob load_probe_job(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("probe config: cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return probe_job_from_json_text(ss.str());
}

std::string probe_result_to_json(const ProbeJob& job, const rigidity::ProbeResult& result) {
    std::ostringstream os;
    os << "{\n";
    os << "  \"schema\": 1,\n";
    os << "  \"name\": " << json(job.name).dump() << ",\n";
    os << "  \"dimension\": " << job.config.dim << ",\n";
    os << "  \"k\": " << job.config.k << ",\n";
    os << "  \"j\": " << job.config.j << ",\n";
    os << "  \"band_limit\": " << job.config.band_limit << ",\n";
    os << "  \"optimizer\": " << json(job.config.optimizer).dump() << ",\n";
    os << "  \"target_area\": " << format_double(result.target_area) << ",\n";
    os << "  \"final_area\": " << format_double(result.area) << ",\n";
    os << "  \"final_objective\": " << format_double(result.final_objective) << ",\n";
    os << "  \"mean_radius\": " << format_double(result.mean_radius) << ",\n";
    os << "  \"radius_spread_rel\": " << format_double(result.radius_spread_rel) << ",\n";
    os << "  \"constancy_defect\": " << format_double(result.constancy_defect) << ",\n";
    os << "  \"Q_mean\": " << format_double(result.Q_mean) << ",\n";
    os << "  \"evaluations\": " << result.evaluations << ",\n";
    os << "  \"feasible\": " << (result.feasible ? "true" : "false") << ",\n";
    os << "  \"sphere_reached\": " << (result.sphere_reached ? "true" : "false") << ",\n";
    std::string shape_json = surface::shape_to_json_text(result.final_shape);
    while (!shape_json.empty() && shape_json.back() == '\n') shape_json.pop_back();
    os << "  \"final_shape\": " << shape_json << "\n}\n";
    return os.str();
}

std::string probe_history_to_csv(const rigidity::ProbeResult& result) {
    std::ostringstream os;
    os << "evaluation,objective,radius_spread_rel,constancy_defect\n";
    for (const auto& h : result.history)
        os << h.evaluation << "," << format_double(h.objective) << "," << format_double(h.radius_spread_rel)
           << "," << format_double(h.constancy_defect) << "\n";
    return os.str();
}

}  // namespace hyperlab::scenario
