#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hyperlab/surface.hpp"

namespace hyperlab::rigidity {

/// Shape-optimization probe: drive the area-weighted variance of
/// Q = V H_k / H_j (H_0 = 1 when j = 0) to zero under a fixed total-area
/// constraint. The constraint is enforced by projection: the constant radial
/// mode is solved per candidate so the area matches the initial shape's.
struct ProbeConfig {
    int dim = 3;
    int k = 1;
    int j = 0;  // 0 selects the V H_k probe; 1 <= j < k the ratio probe
    int band_limit = 4;
    int resolution = 0;  // 0: defaults to 2*band_limit + 4
    surface::RadialShape initial_shape;
    std::string optimizer = "nelder_mead";  // "nelder_mead" | "fd_gradient"
    int max_evaluations = 10000;
    double objective_tolerance = 1e-9;
    double initial_step = 0.05;
    double positivity_weight = 1e4;
    double cone_weight = 1e4;
    double min_radius = 0.05;
    std::uint64_t seed = 0;

    void validate() const;
};

struct HistoryRow {
    int evaluation = 0;
    double objective = 0;
    double radius_spread_rel = 0;  // std(r)/mean(r), area-weighted
    double constancy_defect = 0;   // (max-min)/mean of Q
};

struct ProbeResult {
    surface::RadialShape final_shape;
    std::vector<HistoryRow> history;  // best-so-far, non-increasing objective
    double final_objective = 0;
    double mean_radius = 0;
    double radius_spread_rel = 0;
    double constancy_defect = 0;
    double Q_mean = 0;
    double area = 0, target_area = 0;
    bool sphere_reached = false;
    bool feasible = false;
    int evaluations = 0;
    double wall_seconds = 0;
};

struct ConstancyScan {
    double mean = 0, min = 0, max = 0, defect = 0;
    bool Hk_positive = false;
    bool Hj_positive = false;  // true when j = 0
    int undefined_nodes = 0;   // nodes where H_j vanishes (ratio mode)
};

/// Extremal statistics of Q = V H_k / H_j over the nodes, plus the positivity
/// scan of H_k and H_j.
ConstancyScan constancy_scan(const surface::SurfaceGeometry& geo, int k, int j);

/// The probe objective for one shape: area-weighted variance of Q after the
/// fixed-area projection, plus the configured feasibility penalties.
double probe_objective(const surface::RadialShape& shape, const ProbeConfig& config);

ProbeResult run_probe(const ProbeConfig& config);

}  // namespace hyperlab::rigidity
