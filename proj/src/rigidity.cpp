#include "hyperlab/rigidity.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Dense>

#include "hyperlab/symm.hpp"

namespace hyperlab::rigidity {

using surface::QuadratureGrid;
using surface::RadialShape;
using surface::ShapeJet;
using surface::ShapeSynthesis;
using surface::SurfaceGeometry;

namespace {
constexpr double kSqrt4Pi = 3.5449077018110318;
constexpr double kInfeasible = 1e8;
}  // namespace

void ProbeConfig::validate() const {
    if (dim != 2 && dim != 3) throw std::invalid_argument("ProbeConfig: dimension must be 2 or 3");
    const int m = dim - 1;
    if (!(1 <= k && k <= m)) throw std::invalid_argument("ProbeConfig: k out of range [1, n-1]");
    if (!(0 <= j && j < k)) throw std::invalid_argument("ProbeConfig: need 0 <= j < k");
    if (band_limit < 1) throw std::invalid_argument("ProbeConfig: band limit >= 1 required");
    if (max_evaluations < 1) throw std::invalid_argument("ProbeConfig: evaluation budget >= 1 required");
    if (!(initial_step > 0.0)) throw std::invalid_argument("ProbeConfig: initial step must be positive");
    if (optimizer != "nelder_mead" && optimizer != "fd_gradient")
        throw std::invalid_argument("ProbeConfig: unknown optimizer '" + optimizer + "'");
    initial_shape.validate();
    if (initial_shape.dim != dim) throw std::invalid_argument("ProbeConfig: initial shape dimension mismatch");
}

ConstancyScan constancy_scan(const SurfaceGeometry& geo, int k, int j) {
    const int m = geo.m;
    if (!(1 <= k && k <= m) || j < 0 || j >= k) throw std::domain_error("constancy_scan: bad indices");
    ConstancyScan out;
    out.min = std::numeric_limits<double>::infinity();
    out.max = -out.min;
    double acc = 0, area = 0;
    double minHk = std::numeric_limits<double>::infinity();
    for (const auto& s : geo.samples) {
        const std::span<const double> lam(s.principal, static_cast<size_t>(m));
        const auto sig = symm::elementary_symmetric_all(lam);
        const double Hk = sig[static_cast<size_t>(k)] / symm::binomial(m, k);
        minHk = std::min(minHk, Hk);
        double q = s.V * Hk;
        if (j > 0) {
            const double Hj = sig[static_cast<size_t>(j)] / symm::binomial(m, j);
            if (std::abs(Hj) < 1e-14) {
                ++out.undefined_nodes;
                continue;
            }
            q /= Hj;
        }
        out.min = std::min(out.min, q);
        out.max = std::max(out.max, q);
        acc += q * s.area_weight;
        area += s.area_weight;
    }
    out.mean = acc / area;
    out.defect = (out.max - out.min) / std::abs(out.mean);
    out.Hk_positive = minHk > 0.0;
    if (j == 0) {
        out.Hj_positive = true;
    } else {
        double minHj = std::numeric_limits<double>::infinity();
        for (const auto& s : geo.samples) {
            const std::span<const double> lam(s.principal, static_cast<size_t>(m));
            const auto sig = symm::elementary_symmetric_all(lam);
            minHj = std::min(minHj, sig[static_cast<size_t>(j)] / symm::binomial(m, j));
        }
        out.Hj_positive = minHj > 0.0;
    }
    return out;
}

namespace {

/// Shared evaluation state for one probe: grid, synthesis tables, target
/// area, and the fixed-area projection. Objective evaluations are pure
/// functions of the free (non-constant) coefficient vector.
class ProbeEngine {
  public:
    ProbeEngine(const ProbeConfig& cfg)
        : cfg_(cfg),
          grid_(cfg.dim, cfg.resolution > 0 ? cfg.resolution : 2 * cfg.band_limit + 4),
          synth_(grid_, cfg.dim, cfg.band_limit),
          m_(cfg.dim - 1) {
        const SurfaceGeometry geo = surface::build_geometry(cfg.initial_shape, grid_, synth_);
        target_area_ = geo.total_area;
        base_constant_ = cfg.initial_shape.coeffs[0];
        n_free_ = static_cast<int>(cfg.initial_shape.coeffs.size()) - 1;
        // Mode-l sensitivity of the objective grows like l(l+1); equilibrate
        // the optimizer coordinates so the quadratic bowl is well conditioned.
        scale_.resize(static_cast<size_t>(n_free_));
        for (int i = 0; i < n_free_; ++i) {
            int l = 0;
            if (cfg.dim == 2) {
                l = (i + 2) / 2;  // free index i maps to coefficient i+1
            } else {
                l = static_cast<int>(std::sqrt(static_cast<double>(i + 1)));
            }
            scale_[static_cast<size_t>(i)] = 1.0 / (1.0 + 0.5 * l * (l + 1.0));
        }
    }

    double target_area() const { return target_area_; }

    Eigen::VectorXd initial_free() const {
        Eigen::VectorXd x(n_free_);
        for (int i = 0; i < n_free_; ++i)
            x[i] = cfg_.initial_shape.coeffs[static_cast<size_t>(i + 1)] / scale_[static_cast<size_t>(i)];
        return x;
    }

    RadialShape shape_from_free(const Eigen::VectorXd& x, double delta) const {
        RadialShape s;
        s.dim = cfg_.dim;
        s.band_limit = cfg_.band_limit;
        s.coeffs.resize(static_cast<size_t>(n_free_) + 1);
        s.coeffs[0] = base_constant_ + delta * ((cfg_.dim == 2) ? 1.0 : kSqrt4Pi);
        for (int i = 0; i < n_free_; ++i)
            s.coeffs[static_cast<size_t>(i + 1)] = scale_[static_cast<size_t>(i)] * x[i];
        s.description = "probe candidate";
        return s;
    }

    struct Evaluation {
        double objective = std::numeric_limits<double>::quiet_NaN();
        double delta = 0;
        bool feasible = false;
    };

    Evaluation evaluate(const Eigen::VectorXd& x) const {
        Evaluation ev;
        RadialShape s = shape_from_free(x, 0.0);
        synth_.jets(s.coeffs, jets_);
        // chart-invariant |grad r|^2 per node feeds the area solve
        grad2_.resize(jets_.size());
        for (size_t q = 0; q < jets_.size(); ++q) {
            if (m_ == 1) {
                grad2_[q] = jets_[q].r_ph * jets_[q].r_ph;
            } else {
                const double sth = std::sin(grid_.polar_angle[q]);
                grad2_[q] = jets_[q].r_th * jets_[q].r_th + jets_[q].r_ph * jets_[q].r_ph / (sth * sth);
            }
        }
        double delta = 0.0;
        if (!solve_area_shift_with_grad2(delta)) {
            ev.objective = kInfeasible * (1.0 + x.squaredNorm());
            return ev;
        }
        ev.delta = delta;

        // geometry of the projected shape
        double rmin = std::numeric_limits<double>::infinity(), rmax = -rmin;
        double area = 0.0, Qint = 0.0;
        Qs_.resize(jets_.size());
        dmu_.resize(jets_.size());
        std::vector<double> min_sig(static_cast<size_t>(cfg_.k) + 1, std::numeric_limits<double>::infinity());
        for (size_t q = 0; q < jets_.size(); ++q) {
            ShapeJet jet = jets_[q];
            jet.r += delta;
            if (!(jet.r > 0.0) || jet.r > ambient::kMaxRadius) {
                ev.objective = kInfeasible;
                return ev;
            }
            const double th = (cfg_.dim == 3) ? grid_.polar_angle[q] : 0.0;
            const surface::SurfaceSample smp =
                surface::sample_from_jet(cfg_.dim, th, grid_.azimuth[q], grid_.weight[q], jet);
            rmin = std::min(rmin, smp.r);
            rmax = std::max(rmax, smp.r);
            const std::span<const double> lam(smp.principal, static_cast<size_t>(m_));
            const auto sig = symm::elementary_symmetric_all(lam);
            for (int jj = 1; jj <= cfg_.k; ++jj)
                min_sig[static_cast<size_t>(jj)] = std::min(min_sig[static_cast<size_t>(jj)], sig[static_cast<size_t>(jj)]);
            double Q = smp.V * sig[static_cast<size_t>(cfg_.k)] / symm::binomial(m_, cfg_.k);
            if (cfg_.j > 0) {
                const double Hj = sig[static_cast<size_t>(cfg_.j)] / symm::binomial(m_, cfg_.j);
                if (std::abs(Hj) < 1e-9) {
                    ev.objective = 1e6 + cone_penalty(min_sig);
                    return ev;
                }
                Q /= Hj;
            }
            Qs_[q] = Q;
            dmu_[q] = smp.area_weight;
            area += smp.area_weight;
            Qint += Q * smp.area_weight;
        }
        const double Qbar = Qint / area;
        double var = 0.0;
        for (size_t q = 0; q < jets_.size(); ++q) {
            const double d = Qs_[q] - Qbar;
            var += d * d * dmu_[q];
        }
        double J = var / area;
        J += cone_penalty(min_sig);
        const double under = std::max(0.0, cfg_.min_radius - rmin);
        const double over = std::max(0.0, rmax - ambient::kMaxRadius);
        J += cfg_.positivity_weight * (under * under + over * over);
        ev.objective = J;
        ev.feasible = true;
        return ev;
    }

    /// Statistics of the projected shape behind one free vector.
    void statistics(const Eigen::VectorXd& x, double& delta, double& mean_r, double& spread_rel,
                    double& defect, double& Qbar, double& area_out) const {
        Evaluation ev = evaluate(x);
        delta = ev.delta;
        const RadialShape s = shape_from_free(x, ev.delta);
        const SurfaceGeometry geo = surface::build_geometry(s, grid_, synth_);
        area_out = geo.total_area;
        mean_r = geo.r_mean;
        double varr = 0.0;
        for (const auto& smp : geo.samples) varr += (smp.r - geo.r_mean) * (smp.r - geo.r_mean) * smp.area_weight;
        spread_rel = std::sqrt(varr / geo.total_area) / geo.r_mean;
        const ConstancyScan scan = constancy_scan(geo, cfg_.k, cfg_.j);
        defect = scan.defect;
        Qbar = scan.mean;
    }

  private:
    bool solve_area_shift_with_grad2(double& delta) const {
        double rmin = std::numeric_limits<double>::infinity();
        for (const auto& jet : jets_) rmin = std::min(rmin, jet.r);
        const double floor = 0.02 - rmin;
        delta = std::max(0.0, floor);
        for (int it = 0; it < 80; ++it) {
            double A = 0.0, dA = 0.0;
            for (size_t q = 0; q < jets_.size(); ++q) {
                const double r = jets_[q].r + delta;
                if (!(r > 0.0) || r > ambient::kMaxRadius + 1.0) return false;
                const double sh = std::sinh(r), ch = std::cosh(r);
                const double root = std::sqrt(sh * sh + grad2_[q]);
                const double w = grid_.weight[q];
                if (m_ == 1) {
                    A += root * w;
                    dA += sh * ch / root * w;
                } else {
                    A += sh * root * w;
                    dA += ch * (root + sh * sh / root) * w;
                }
            }
            const double err = A - target_area_;
            if (std::abs(err) <= 1e-13 * target_area_) return true;
            if (!(dA > 0.0)) return false;
            double step = err / dA;
            if (delta - step < floor) step = (delta - floor) * 0.5 + 1e-18;
            delta -= step;
            if (!std::isfinite(delta) || std::abs(delta) > 8.0) return false;
        }
        return false;
    }

    double cone_penalty(const std::vector<double>& min_sig) const {
        double pen = 0.0;
        for (int jj = 1; jj <= cfg_.k; ++jj) {
            const double h = std::max(0.0, -min_sig[static_cast<size_t>(jj)]);
            pen += cfg_.cone_weight * h * h;
        }
        return pen;
    }

    const ProbeConfig& cfg_;
    QuadratureGrid grid_;
    ShapeSynthesis synth_;
    int m_;
    int n_free_ = 0;
    double target_area_ = 0;
    double base_constant_ = 0;
    std::vector<double> scale_;
    mutable std::vector<ShapeJet> jets_;
    mutable std::vector<double> grad2_, Qs_, dmu_;
};

}  // namespace

double probe_objective(const RadialShape& shape, const ProbeConfig& config) {
    ProbeConfig cfg = config;
    cfg.initial_shape = shape;
    cfg.validate();
    const ProbeEngine engine(cfg);
    return engine.evaluate(engine.initial_free()).objective;
}

namespace {

struct Tracker {
    const ProbeEngine* engine = nullptr;
    int evals = 0;
    int budget = 0;
    double best_f = std::numeric_limits<double>::infinity();
    Eigen::VectorXd best_x;
    std::vector<HistoryRow>* history = nullptr;

    double operator()(const Eigen::VectorXd& x) {
        ++evals;
        const double f = engine->evaluate(x).objective;
        if (f < best_f) {
            best_f = f;
            best_x = x;
            if (history) {
                double delta, mean_r, spread, defect, qbar, area;
                engine->statistics(x, delta, mean_r, spread, defect, qbar, area);
                history->push_back(HistoryRow{evals, f, spread, defect});
            }
        }
        return f;
    }
    bool exhausted() const { return evals >= budget; }
};

void nelder_mead(Tracker& track, const Eigen::VectorXd& x0, double step, double target) {
    const int n = static_cast<int>(x0.size());
    // dimension-adaptive expansion/contraction/shrink coefficients
    const double chi = 1.0 + 2.0 / n;
    const double gam = 0.75 - 0.5 / n;
    const double sig = 1.0 - 1.0 / n;
    std::vector<Eigen::VectorXd> xs(static_cast<size_t>(n) + 1, x0);
    std::vector<double> fs(static_cast<size_t>(n) + 1);
    fs[0] = track(x0);
    for (int i = 0; i < n; ++i) {
        xs[static_cast<size_t>(i + 1)][i] += step;
        fs[static_cast<size_t>(i + 1)] = track(xs[static_cast<size_t>(i + 1)]);
        if (track.exhausted()) return;
    }
    std::vector<int> order(static_cast<size_t>(n) + 1);
    while (!track.exhausted() && track.best_f > target) {
        for (int i = 0; i <= n; ++i) order[static_cast<size_t>(i)] = i;
        std::sort(order.begin(), order.end(), [&](int a, int b) { return fs[static_cast<size_t>(a)] < fs[static_cast<size_t>(b)]; });
        const int lo = order[0], hi = order[static_cast<size_t>(n)], second = order[static_cast<size_t>(n - 1)];
        // converged simplex: hand control back for a restart
        if (fs[static_cast<size_t>(hi)] - fs[static_cast<size_t>(lo)] <=
            1e-14 * (1.0 + std::abs(fs[static_cast<size_t>(lo)])))
            return;

        Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
        for (int i = 0; i <= n; ++i)
            if (i != hi) centroid += xs[static_cast<size_t>(i)];
        centroid /= n;

        const Eigen::VectorXd xr = centroid + (centroid - xs[static_cast<size_t>(hi)]);
        const double fr = track(xr);
        if (track.exhausted()) return;
        if (fr < fs[static_cast<size_t>(lo)]) {
            const Eigen::VectorXd xe = centroid + chi * (centroid - xs[static_cast<size_t>(hi)]);
            const double fe = track(xe);
            if (fe < fr) {
                xs[static_cast<size_t>(hi)] = xe;
                fs[static_cast<size_t>(hi)] = fe;
            } else {
                xs[static_cast<size_t>(hi)] = xr;
                fs[static_cast<size_t>(hi)] = fr;
            }
        } else if (fr < fs[static_cast<size_t>(second)]) {
            xs[static_cast<size_t>(hi)] = xr;
            fs[static_cast<size_t>(hi)] = fr;
        } else {
            const bool outside = fr < fs[static_cast<size_t>(hi)];
            const Eigen::VectorXd xc =
                outside ? centroid + gam * (xr - centroid) : centroid + gam * (xs[static_cast<size_t>(hi)] - centroid);
            const double fc = track(xc);
            if (track.exhausted()) return;
            if (fc < std::min(fr, fs[static_cast<size_t>(hi)])) {
                xs[static_cast<size_t>(hi)] = xc;
                fs[static_cast<size_t>(hi)] = fc;
            } else {
                for (int i = 0; i <= n; ++i) {
                    if (i == lo) continue;
                    xs[static_cast<size_t>(i)] = xs[static_cast<size_t>(lo)] + sig * (xs[static_cast<size_t>(i)] - xs[static_cast<size_t>(lo)]);
                    fs[static_cast<size_t>(i)] = track(xs[static_cast<size_t>(i)]);
                    if (track.exhausted()) return;
                }
            }
        }
    }
}

void fd_gradient_descent(Tracker& track, const Eigen::VectorXd& x0, double step, double target) {
    const int n = static_cast<int>(x0.size());
    Eigen::VectorXd x = x0;
    double f = track(x);
    double alpha = step;
    Eigen::VectorXd g(n), g_prev(n), x_prev(n);
    bool have_prev = false;
    const double h = 1e-6;
    while (!track.exhausted() && track.best_f > target) {
        for (int i = 0; i < n; ++i) {
            Eigen::VectorXd xp = x, xm = x;
            xp[i] += h;
            xm[i] -= h;
            g[i] = (track(xp) - track(xm)) / (2.0 * h);
            if (track.exhausted()) return;
        }
        if (have_prev) {
            // Barzilai-Borwein step
            const Eigen::VectorXd dx = x - x_prev;
            const Eigen::VectorXd dg = g - g_prev;
            const double denom = dg.squaredNorm();
            if (denom > 0) alpha = std::abs(dx.dot(dg)) / denom;
            alpha = std::clamp(alpha, 1e-9, 10.0);
        }
        x_prev = x;
        g_prev = g;
        have_prev = true;
        double trial_alpha = alpha;
        for (int bt = 0; bt < 30; ++bt) {
            const Eigen::VectorXd xt = x - trial_alpha * g;
            const double ft = track(xt);
            if (track.exhausted()) return;
            if (ft < f) {
                x = xt;
                f = ft;
                break;
            }
            trial_alpha *= 0.5;
        }
        if (g.norm() * alpha < 1e-16) return;
    }
}

}  // namespace

ProbeResult run_probe(const ProbeConfig& config) {
    config.validate();
    const auto t0 = std::chrono::steady_clock::now();
    const ProbeEngine engine(config);

    {
        // feasibility of the initial shape
        const QuadratureGrid grid(config.dim, config.resolution > 0 ? config.resolution : 2 * config.band_limit + 4);
        const SurfaceGeometry geo = surface::build_geometry(config.initial_shape, grid);
        if (!geo.garding_everywhere(config.k))
            throw std::invalid_argument("run_probe: initial shape is not Gamma_k at all nodes");
        if (config.j >= 1 && !(geo.min_Hk(config.j) > 0.0))
            throw std::invalid_argument("run_probe: initial shape has H_j <= 0 at a node");
    }

    ProbeResult result;
    result.target_area = engine.target_area();

    Tracker track;
    track.engine = &engine;
    track.budget = config.max_evaluations;
    track.history = &result.history;
    track.best_x = engine.initial_free();

    const double target = std::min(config.objective_tolerance, 1e-9);
    track(engine.initial_free());

    double step = config.initial_step;
    while (!track.exhausted() && track.best_f > target) {
        if (config.optimizer == "fd_gradient") {
            fd_gradient_descent(track, track.best_x, step, target);
        } else {
            nelder_mead(track, track.best_x, step, target);
        }
        // restart the simplex at the scale of the remaining distance to the
        // optimum (the objective is quadratic in the coefficients near it)
        const double scale = 10.0 * std::sqrt(std::max(track.best_f, 0.0));
        step = std::clamp(std::min(step * 0.25, scale), 1e-8, config.initial_step);
    }

    result.evaluations = track.evals;
    result.final_objective = track.best_f;
    double delta, mean_r, spread, defect, qbar, area;
    engine.statistics(track.best_x, delta, mean_r, spread, defect, qbar, area);
    result.final_shape = engine.shape_from_free(track.best_x, delta);
    result.final_shape.description = "probe optimum";
    result.mean_radius = mean_r;
    result.radius_spread_rel = spread;
    result.constancy_defect = defect;
    result.Q_mean = qbar;
    result.area = area;
    result.feasible = std::abs(area - result.target_area) <= 1e-6 * result.target_area;
    result.sphere_reached = (result.final_objective < 1e-8) && (spread < 1e-3);
    result.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return result;
}

}  // namespace hyperlab::rigidity
