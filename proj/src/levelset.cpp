#include "lstrack/levelset.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "lstrack/parallel.hpp"

namespace lstrack {

namespace {

constexpr double kGradFloor = 1e-12;
constexpr int kMaxDim = 6;

std::int8_t sign_of(double v) { return v >= 0.0 ? 1 : -1; }

// Grid-aware finite differences with linear-extrapolation ghosts on the faces.
class Stencil {
public:
    explicit Stencil(const StochasticGrid& g) : g_(g), d_(g.dim()) {}

    int dim() const { return d_; }
    double h(int k) const { return g_.spacing(k); }

    // Neighbor value in direction k, off = +-1.
    double at(std::span<const double> v, const int* mi, std::size_t i, int k, int off) const {
        const int c = mi[k] + off;
        const std::size_t s = g_.stride(k);
        if (c >= 0 && c < g_.points(k)) return off > 0 ? v[i + s] : v[i - s];
        return off > 0 ? 2.0 * v[i] - v[i - s] : 2.0 * v[i] - v[i + s];
    }

    double central(std::span<const double> v, const int* mi, std::size_t i, int k) const {
        return (at(v, mi, i, k, 1) - at(v, mi, i, k, -1)) / (2.0 * h(k));
    }

    // Numerator and squared gradient of kappa |grad phi| = (|g|^2 tr H - g^T H g) / |g|^2.
    void curvature_terms(std::span<const double> v, const int* mi, std::size_t i, double& num,
                         double& grad2) const {
        double g[kMaxDim];
        double H[kMaxDim][kMaxDim];
        grad2 = 0.0;
        for (int k = 0; k < d_; ++k) {
            g[k] = central(v, mi, i, k);
            grad2 += g[k] * g[k];
            H[k][k] = (at(v, mi, i, k, 1) - 2.0 * v[i] + at(v, mi, i, k, -1)) / (h(k) * h(k));
        }
        int mj[kMaxDim];
        std::copy(mi, mi + d_, mj);
        for (int l = 0; l < d_; ++l) {
            const std::size_t s = g_.stride(l);
            const bool lo = mi[l] == 0;
            const bool hi = mi[l] == g_.points(l) - 1;
            for (int k = 0; k < l; ++k) {
                double gp, gm, span;
                if (!hi) {
                    mj[l] = mi[l] + 1;
                    gp = central(v, mj, i + s, k);
                } else {
                    gp = g[k];
                }
                if (!lo) {
                    mj[l] = mi[l] - 1;
                    gm = central(v, mj, i - s, k);
                } else {
                    gm = g[k];
                }
                mj[l] = mi[l];
                span = (lo || hi ? 1.0 : 2.0) * h(l);
                H[k][l] = H[l][k] = (gp - gm) / span;
            }
        }
        double tr = 0.0;
        double gHg = 0.0;
        for (int k = 0; k < d_; ++k) {
            tr += H[k][k];
            for (int l = 0; l < d_; ++l) gHg += g[k] * H[k][l] * g[l];
        }
        num = grad2 * tr - gHg;
    }

    // Godunov upwind |grad phi| for a front moving with speed of sign `speed_sign`.
    double godunov_norm(std::span<const double> v, const int* mi, std::size_t i, double speed_sign) const {
        double s = 0.0;
        for (int k = 0; k < d_; ++k) {
            const double dm = (v[i] - at(v, mi, i, k, -1)) / h(k);
            const double dp = (at(v, mi, i, k, 1) - v[i]) / h(k);
            if (speed_sign >= 0.0) {
                const double a = std::max(dm, 0.0);
                const double b = std::min(dp, 0.0);
                s += std::max(a * a, b * b);
            } else {
                const double a = std::min(dm, 0.0);
                const double b = std::max(dp, 0.0);
                s += std::max(a * a, b * b);
            }
        }
        return std::sqrt(s);
    }

private:
    const StochasticGrid& g_;
    int d_;
};

struct Evolver {
    const SpeedField& speed;
    const EvolveOptions& opts;
    Stencil stencil;
    double min_h;
    double base_max;
    std::vector<double> rate;
    std::vector<double> stage;

    Evolver(const LevelSetField& f, const SpeedField& s, const EvolveOptions& o)
        : speed(s), opts(o), stencil(f.grid), rate(f.phi.size()), stage(f.phi.size()) {
        min_h = std::numeric_limits<double>::infinity();
        for (int k = 0; k < f.grid.dim(); ++k) min_h = std::min(min_h, f.grid.spacing(k));
        base_max = 0.0;
        for (double b : s.base) base_max = std::max(base_max, std::abs(b));
    }

    // Outer step from the hyperbolic CFL condition.
    double outer_step() const { return opts.cfl * min_h / base_max; }

    // Number of sub-steps keeping the explicit curvature (diffusive) term stable.
    int substeps(double dt) const {
        if (!opts.use_curvature || speed.epsilon <= 0.0) return 1;
        const double diffusive = 0.5 * min_h * min_h / (2.0 * stencil.dim() * speed.epsilon * base_max);
        return std::max(1, static_cast<int>(std::ceil(dt / diffusive - 1e-12)));
    }

    void compute_rate(std::span<const double> phi, const StochasticGrid& grid) {
        const std::size_t n = phi.size();
        const std::size_t chunk = 4096;
        parallel_for((n + chunk - 1) / chunk, opts.workers, [&](std::size_t c) {
            int mi[kMaxDim];
            const std::size_t end = std::min(n, (c + 1) * chunk);
            for (std::size_t i = c * chunk; i < end; ++i) {
                const double b = speed.base[i];
                if (b == 0.0) {
                    rate[i] = 0.0;
                    continue;
                }
                grid.multi_index(i, std::span<int>(mi, static_cast<std::size_t>(grid.dim())));
                double r = -b * stencil.godunov_norm(phi, mi, i, b);
                if (opts.use_curvature && speed.epsilon > 0.0) {
                    double num, grad2;
                    stencil.curvature_terms(phi, mi, i, num, grad2);
                    r += speed.epsilon * b * num / std::max(grad2, kGradFloor * kGradFloor);
                }
                rate[i] = r;
            }
        });
    }

    void euler(std::vector<double>& phi, const StochasticGrid& grid, double dt) {
        compute_rate(phi, grid);
        for (std::size_t i = 0; i < phi.size(); ++i) phi[i] += dt * rate[i];
    }

    void step(LevelSetField& f, double dt) {
        if (!opts.tvd_rk2) {
            euler(f.phi, f.grid, dt);
            return;
        }
        stage = f.phi;
        euler(stage, f.grid, dt);
        euler(stage, f.grid, dt);
        for (std::size_t i = 0; i < stage.size(); ++i) f.phi[i] = 0.5 * (f.phi[i] + stage[i]);
    }

    void outer(LevelSetField& f, double dt) {
        const int n = substeps(dt);
        const double sub = dt / n;
        for (int s = 0; s < n; ++s) step(f, sub);
        f.tau += dt;
    }
};

void check_compatible(const LevelSetField& f, const SpeedField& s, const EvolveOptions& opts) {
    require(f.grid == s.grid && f.phi.size() == s.base.size(), ErrorKind::InvalidArgument,
            "level-set field and speed field live on different grids");
    require(opts.cfl > 0.0 && opts.cfl <= 0.5, ErrorKind::InvalidArgument, "CFL number must lie in (0, 0.5]");
    require(opts.lock_window >= 1, ErrorKind::InvalidArgument, "lock_window must be positive");
}

void snapshot(LevelSetField& f) {
    f.signs.resize(f.phi.size());
    std::transform(f.phi.begin(), f.phi.end(), f.signs.begin(), sign_of);
}

}  // namespace

LevelSetField init_levelset(const StochasticGrid& grid, std::span<const double> center, double radius) {
    require(radius > 0.0 && radius < 1.0, ErrorKind::InvalidArgument, "seed radius must lie in (0, 1)");
    require(static_cast<int>(center.size()) == grid.dim(), ErrorKind::InvalidArgument,
            "seed center dimension mismatch");
    LevelSetField f;
    f.grid = grid;
    f.phi.resize(grid.size());
    std::vector<double> p(static_cast<std::size_t>(grid.dim()));
    for (std::size_t i = 0; i < grid.size(); ++i) {
        grid.point(i, p);
        double r2 = 0.0;
        for (int k = 0; k < grid.dim(); ++k) r2 += (p[k] - center[k]) * (p[k] - center[k]);
        f.phi[i] = std::sqrt(r2) - radius;
    }
    snapshot(f);
    return f;
}

SpeedField build_speed_field(const ModelEvaluationCache& cache, double gamma, double epsilon_factor) {
    require(cache.complete(), ErrorKind::MissingData, "speed field needs a complete evaluation cache");
    require(gamma >= 0.0, ErrorKind::InvalidArgument, "gamma must be non-negative");
    const auto& g = cache.grid();
    const auto u = cache.values();
    SpeedField s;
    s.grid = g;
    s.base.resize(g.size());
    s.epsilon = epsilon_factor * g.spacing();
    int mi[kMaxDim];
    for (std::size_t i = 0; i < g.size(); ++i) {
        g.multi_index(i, std::span<int>(mi, static_cast<std::size_t>(g.dim())));
        double grad2 = 0.0;
        for (int k = 0; k < g.dim(); ++k) {
            const std::size_t st = g.stride(k);
            double d;
            if (mi[k] == 0) {
                d = (u[i + st] - u[i]) / g.spacing(k);
            } else if (mi[k] == g.points(k) - 1) {
                d = (u[i] - u[i - st]) / g.spacing(k);
            } else {
                d = (u[i + st] - u[i - st]) / (2.0 * g.spacing(k));
            }
            grad2 += d * d;
        }
        s.base[i] = std::exp(-gamma * grad2);
    }
    return s;
}

SpeedField constant_speed_field(const StochasticGrid& grid, double value, double epsilon) {
    require(value >= 0.0, ErrorKind::InvalidArgument, "speed must be non-negative");
    return SpeedField{grid, std::vector<double>(grid.size(), value), epsilon};
}

double curvature(const LevelSetField& field, std::size_t flat) {
    const Stencil st(field.grid);
    int mi[kMaxDim];
    field.grid.multi_index(flat, std::span<int>(mi, static_cast<std::size_t>(field.grid.dim())));
    double num, grad2;
    st.curvature_terms(field.phi, mi, flat, num, grad2);
    const double g = std::max(std::sqrt(grad2), kGradFloor);
    return num / (g * g * g);
}

LevelSetField evolve_to_lock(LevelSetField field, const SpeedField& speed, const EvolveOptions& opts) {
    check_compatible(field, speed, opts);
    snapshot(field);
    field.steps = 0;
    Evolver ev(field, speed, opts);
    if (ev.base_max == 0.0) {
        field.steps = opts.lock_window;
        return field;
    }
    const double dt = ev.outer_step();
    int unchanged = 0;
    std::vector<std::int8_t> current(field.phi.size());
    while (unchanged < opts.lock_window) {
        if (field.steps >= opts.max_steps) {
            throw LevelSetNonConvergence(
                "level set did not lock within " + std::to_string(opts.max_steps) + " steps", field);
        }
        ev.outer(field, dt);
        ++field.steps;
        for (double v : field.phi) {
            if (!std::isfinite(v)) {
                throw LevelSetNonConvergence("level-set field became non-finite", field);
            }
        }
        std::transform(field.phi.begin(), field.phi.end(), current.begin(), sign_of);
        if (current == field.signs) {
            ++unchanged;
        } else {
            unchanged = 0;
            field.signs.swap(current);
        }
    }
    return field;
}

LevelSetField evolve_for(LevelSetField field, const SpeedField& speed, double duration, const EvolveOptions& opts) {
    check_compatible(field, speed, opts);
    require(duration >= 0.0, ErrorKind::InvalidArgument, "duration must be non-negative");
    field.steps = 0;
    Evolver ev(field, speed, opts);
    if (ev.base_max > 0.0) {
        const long n = std::max(1L, static_cast<long>(std::ceil(duration / ev.outer_step() - 1e-12)));
        const double dt = duration / static_cast<double>(n);
        for (long s = 0; s < n; ++s) ev.outer(field, dt);
        field.steps = n;
    }
    snapshot(field);
    return field;
}

std::vector<std::vector<double>> zero_crossing_points(const LevelSetField& field) {
    const auto& g = field.grid;
    const int d = g.dim();
    std::vector<std::vector<double>> out;
    int mi[kMaxDim];
    std::vector<double> p(static_cast<std::size_t>(d));
    for (std::size_t i = 0; i < g.size(); ++i) {
        g.multi_index(i, std::span<int>(mi, static_cast<std::size_t>(d)));
        const double a = field.phi[i];
        for (int k = 0; k < d; ++k) {
            if (mi[k] + 1 >= g.points(k)) continue;
            const double b = field.phi[i + g.stride(k)];
            if (sign_of(a) == sign_of(b)) continue;
            const double t = a / (a - b);
            g.point(i, p);
            p[k] += t * g.spacing(k);
            out.push_back(p);
        }
    }
    return out;
}

void redistance(LevelSetField& field) {
    const auto pts = zero_crossing_points(field);
    if (pts.empty()) return;
    const auto& g = field.grid;
    const int d = g.dim();
    std::vector<double> flat(pts.size() * static_cast<std::size_t>(d));
    for (std::size_t j = 0; j < pts.size(); ++j) std::copy(pts[j].begin(), pts[j].end(), flat.begin() + j * d);
    std::vector<double> p(static_cast<std::size_t>(d));
    for (std::size_t i = 0; i < g.size(); ++i) {
        g.point(i, p);
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < pts.size(); ++j) {
            double r2 = 0.0;
            const double* q = &flat[j * d];
            for (int k = 0; k < d && r2 < best; ++k) r2 += (p[k] - q[k]) * (p[k] - q[k]);
            best = std::min(best, r2);
        }
        field.phi[i] = sign_of(field.phi[i]) * std::sqrt(best);
    }
}

LevelSetField interpolate_field(const LevelSetField& field, const StochasticGrid& target) {
    require(field.grid.dim() == target.dim(), ErrorKind::InvalidArgument, "grid dimension mismatch");
    LevelSetField out;
    out.grid = target;
    out.tau = field.tau;
    out.phi.resize(target.size());
    std::vector<double> p(static_cast<std::size_t>(target.dim()));
    for (std::size_t i = 0; i < target.size(); ++i) {
        target.point(i, p);
        out.phi[i] = interpolate_multilinear(field.grid, field.phi, p);
    }
    snapshot(out);
    return out;
}

void write_field_csv(std::ostream& os, const LevelSetField& field) {
    const auto& g = field.grid;
    for (int k = 0; k < g.dim(); ++k) os << "xi" << (k + 1) << ',';
    os << "phi\n";
    os.precision(17);
    std::vector<double> p(static_cast<std::size_t>(g.dim()));
    for (std::size_t i = 0; i < g.size(); ++i) {
        g.point(i, p);
        for (double v : p) os << v << ',';
        os << field.phi[i] << '\n';
    }
}

void write_crossings_csv(std::ostream& os, const std::vector<std::vector<double>>& points) {
    if (points.empty()) {
        os << "xi1\n";
        return;
    }
    for (std::size_t k = 0; k < points.front().size(); ++k) os << (k ? "," : "") << "xi" << (k + 1);
    os << '\n';
    os.precision(17);
    for (const auto& p : points) {
        for (std::size_t k = 0; k < p.size(); ++k) os << (k ? "," : "") << p[k];
        os << '\n';
    }
}

}  // namespace lstrack
