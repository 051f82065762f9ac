#include "lstrack/forward_models.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include <boost/math/distributions/normal.hpp>

#include "lstrack/error.hpp"

namespace lstrack {

// ---------------------------------------------------------------------------
// Burgers

double burgers_left_state(const BurgersRiemannConfig& cfg, double xi1) {
    return cfg.a + cfg.sigma_left * std::cos(cfg.c * xi1);
}

double burgers_right_state(const BurgersRiemannConfig& cfg, double xi2) {
    return cfg.b + cfg.sigma_right * std::cos(cfg.c * xi2);
}

namespace {

void check_burgers_input(std::span<const double> xi) {
    require(xi.size() == 2, ErrorKind::InvalidArgument, "Burgers model expects a 2D stochastic point");
    require(std::abs(xi[0]) <= 1.0 && std::abs(xi[1]) <= 1.0, ErrorKind::OutOfDomain,
            "stochastic point outside [-1, 1]^2");
}

void check_burgers_states(double ul, double ur) {
    require(ul > ur, ErrorKind::UnsupportedConfiguration,
            "rarefaction regime (u_L <= u_R) is not supported by the exact shock solver");
}

}  // namespace

double burgers_discontinuity_indicator(const BurgersRiemannConfig& cfg, std::span<const double> xi) {
    check_burgers_input(xi);
    const double ul = burgers_left_state(cfg, xi[0]);
    const double ur = burgers_right_state(cfg, xi[1]);
    check_burgers_states(ul, ur);
    return cfg.x0 + cfg.t_query * 0.5 * (ul + ur) - cfg.x_query;
}

double burgers_exact(const BurgersRiemannConfig& cfg, std::span<const double> xi) {
    check_burgers_input(xi);
    const double ul = burgers_left_state(cfg, xi[0]);
    const double ur = burgers_right_state(cfg, xi[1]);
    check_burgers_states(ul, ur);
    const double shock = cfg.x0 + 0.5 * (ul + ur) * cfg.t_query;
    return cfg.x_query <= shock ? ul : ur;
}

double BurgersFvModel::evaluate(std::span<const double> xi) const {
    check_burgers_input(xi);
    const double ul = burgers_left_state(cfg_, xi[0]);
    const double ur = burgers_right_state(cfg_, xi[1]);
    const Mesh1D mesh{-1.0, 1.0, cells_};
    std::vector<double> u0(static_cast<std::size_t>(cells_));
    for (int i = 0; i < cells_; ++i) u0[i] = mesh.center(i) <= cfg_.x0 ? ul : ur;
    ScalarConservationLaw law{[](double u) { return 0.5 * u * u; }, [](double u) { return u; }, {}};
    const auto u = fv_solve_scalar(law, u0, mesh, cfg_.t_query, opts_);
    return sample_profile(mesh, u, cfg_.x_query);
}

// ---------------------------------------------------------------------------
// Finite volumes

namespace {

double minmod(double a, double b) {
    if (a * b <= 0.0) return 0.0;
    return std::abs(a) < std::abs(b) ? a : b;
}

struct FvWorkspace {
    std::vector<double> ext;    // n + 4 values with two ghost cells per side
    std::vector<double> slope;  // n + 2 (cells -1..n)
    std::vector<double> flux;   // n + 1 interfaces
};

// Computes interface fluxes for the state v; returns the largest local wave speed.
double compute_fluxes(const ScalarConservationLaw& law, std::span<const double> v, bool second_order,
                      FvWorkspace& ws) {
    const std::size_t n = v.size();
    ws.ext.resize(n + 4);
    ws.ext[0] = ws.ext[1] = v.front();
    std::copy(v.begin(), v.end(), ws.ext.begin() + 2);
    ws.ext[n + 2] = ws.ext[n + 3] = v.back();
    ws.slope.assign(n + 2, 0.0);
    if (second_order) {
        for (std::size_t j = 0; j < n + 2; ++j) {
            const std::size_t e = j + 1;  // ext index of cell j-1
            ws.slope[j] = minmod(ws.ext[e] - ws.ext[e - 1], ws.ext[e + 1] - ws.ext[e]);
        }
    }
    ws.flux.resize(n + 1);
    double speed_max = 0.0;
    for (std::size_t k = 0; k <= n; ++k) {
        // interface between cells k-1 and k; slope index of cell c is c+1
        const double ul = ws.ext[k + 1] + 0.5 * ws.slope[k];
        const double ur = ws.ext[k + 2] - 0.5 * ws.slope[k + 1];
        const double a = std::max({std::abs(law.flux_derivative(ul)), std::abs(law.flux_derivative(ur)),
                                   std::abs(law.flux_derivative(0.5 * (ul + ur)))});
        speed_max = std::max(speed_max, a);
        ws.flux[k] = 0.5 * (law.flux(ul) + law.flux(ur)) - 0.5 * a * (ur - ul);
    }
    return speed_max;
}

void apply_update(const ScalarConservationLaw& law, std::span<const double> base, std::span<const double> flux,
                  double dt_over_dx, std::span<double> out) {
    for (std::size_t i = 0; i < base.size(); ++i) {
        const double delta = -dt_over_dx * (flux[i + 1] - flux[i]);
        const double acc = law.accumulation ? law.accumulation(delta) : 1.0;
        out[i] = base[i] + delta / acc;
    }
}

}  // namespace

std::vector<double> fv_solve_scalar(const ScalarConservationLaw& law, std::span<const double> u0,
                                    const Mesh1D& mesh, double t_final, const FvOptions& opts) {
    require(static_cast<int>(u0.size()) == mesh.cells && mesh.cells >= 2, ErrorKind::InvalidArgument,
            "initial profile size does not match the mesh");
    require(opts.cfl > 0.0 && opts.cfl <= 0.5, ErrorKind::InvalidArgument, "CFL number must lie in (0, 0.5]");
    require(law.flux && law.flux_derivative, ErrorKind::InvalidArgument, "flux and its derivative are required");

    const double acc_min = law.accumulation ? std::min(law.accumulation(-1.0), law.accumulation(1.0)) : 1.0;
    require(acc_min > 0.0, ErrorKind::InvalidArgument, "accumulation coefficient must be positive");

    const double dx = mesh.dx();
    std::vector<double> u(u0.begin(), u0.end());
    std::vector<double> stage(u.size());
    FvWorkspace ws;
    double t = 0.0;
    long steps = 0;
    while (t < t_final) {
        if (++steps > opts.max_steps) {
            fail(ErrorKind::NumericalFailure, "finite-volume solver exceeded " + std::to_string(opts.max_steps) +
                                                  " steps at t=" + std::to_string(t));
        }
        const double speed = compute_fluxes(law, u, opts.second_order, ws);
        double dt = speed > 0.0 ? opts.cfl * dx * acc_min / speed : t_final - t;
        if (t + dt >= t_final) dt = t_final - t;
        apply_update(law, u, ws.flux, dt / dx, stage);
        if (opts.second_order) {
            compute_fluxes(law, stage, true, ws);
            apply_update(law, stage, ws.flux, dt / dx, stage);
            for (std::size_t i = 0; i < u.size(); ++i) u[i] = 0.5 * (u[i] + stage[i]);
        } else {
            u.swap(stage);
        }
        t += dt;
        for (double v : u) {
            if (!std::isfinite(v)) {
                fail(ErrorKind::NumericalFailure, "finite-volume solution blew up at t=" + std::to_string(t) +
                                                      " (step " + std::to_string(steps) + ", dt=" +
                                                      std::to_string(dt) + ")");
            }
        }
    }
    return u;
}

double sample_profile(const Mesh1D& mesh, std::span<const double> u, double x) {
    const double s = (x - mesh.x_min) / mesh.dx() - 0.5;
    if (s <= 0.0) return u.front();
    if (s >= mesh.cells - 1) return u.back();
    const auto i = static_cast<std::size_t>(std::floor(s));
    const double w = s - static_cast<double>(i);
    return (1.0 - w) * u[i] + w * u[i + 1];
}

// ---------------------------------------------------------------------------
// Distributions

double UniformRatioDistribution::cdf(double r) const {
    if (r <= min()) return 0.0;
    if (r >= max()) return 1.0;
    // P(X <= r Y) = mean over Y of clamp((r y - x_lo) / (x_hi - x_lo), 0, 1),
    // integrated exactly: the integrand is linear between breakpoints.
    const double dx = x_hi - x_lo;
    auto h = [&](double y) { return std::clamp((r * y - x_lo) / dx, 0.0, 1.0); };
    std::vector<double> pts{y_lo, y_hi};
    for (double y : {x_lo / r, x_hi / r}) {
        if (y > y_lo && y < y_hi) pts.push_back(y);
    }
    std::sort(pts.begin(), pts.end());
    double integral = 0.0;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        integral += 0.5 * (h(pts[i]) + h(pts[i + 1])) * (pts[i + 1] - pts[i]);
    }
    return integral / (y_hi - y_lo);
}

double UniformRatioDistribution::quantile(double p) const {
    require(p >= 0.0 && p <= 1.0, ErrorKind::InvalidArgument, "probability outside [0, 1]");
    double lo = min();
    double hi = max();
    for (int it = 0; it < 200 && hi - lo > 1e-16 * std::abs(hi); ++it) {
        const double mid = 0.5 * (lo + hi);
        (cdf(mid) < p ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

double LognormalDistribution::sigma() const {
    const double cv = stddev / mean;
    return std::sqrt(std::log1p(cv * cv));
}

double LognormalDistribution::mu() const {
    const double s = sigma();
    return std::log(mean) - 0.5 * s * s;
}

double LognormalDistribution::cdf(double x) const {
    if (x <= 0.0) return 0.0;
    return boost::math::cdf(boost::math::normal(mu(), sigma()), std::log(x));
}

double LognormalDistribution::quantile(double p) const {
    require(p > 0.0 && p < 1.0, ErrorKind::InvalidArgument, "lognormal quantile needs p in (0, 1)");
    return std::exp(boost::math::quantile(boost::math::normal(mu(), sigma()), p));
}

double ExponentialDistribution::cdf(double x) const { return x <= 0.0 ? 0.0 : -std::expm1(-x / mean); }

double ExponentialDistribution::quantile(double p) const {
    require(p >= 0.0 && p < 1.0, ErrorKind::InvalidArgument, "exponential quantile needs p in [0, 1)");
    return -mean * std::log1p(-p);
}

double xi_to_probability(double xi, double clip) { return std::clamp(0.5 * (xi + 1.0), clip, 1.0 - clip); }

// ---------------------------------------------------------------------------
// CO2

CO2Parameters co2_parameters(const CO2ModelConfig& cfg, std::span<const double> xi) {
    require(xi.size() == 3, ErrorKind::InvalidArgument, "CO2 model expects a 3D stochastic point");
    const UniformRatioDistribution mobility{cfg.lambda_c_lo, cfg.lambda_c_hi, cfg.lambda_b_lo, cfg.lambda_b_hi};
    const LognormalDistribution perm{cfg.perm_mean, cfg.perm_std};
    const ExponentialDistribution background{cfg.q_mean};
    CO2Parameters p{};
    p.mobility_ratio = mobility.quantile(xi_to_probability(xi[0], cfg.cdf_clip));
    p.buoyancy = cfg.k_scale * std::sin(cfg.slope) * perm.quantile(xi_to_probability(xi[1], cfg.cdf_clip));
    p.background = cfg.q_scale * background.quantile(xi_to_probability(xi[2], cfg.cdf_clip));
    return p;
}

double co2_flux(double u, const CO2Parameters& p) {
    const double m = p.mobility_ratio;
    return (p.background + p.buoyancy * (1.0 - u)) * m * u / (1.0 + (m - 1.0) * u);
}

double co2_flux_derivative(double u, const CO2Parameters& p) {
    const double m = p.mobility_ratio;
    const double g = p.background + p.buoyancy * (1.0 - u);
    const double den = 1.0 + (m - 1.0) * u;
    // d/du [g m u / den] = m [(g - K u) den - g u (m - 1)] / den^2
    return m * ((g - p.buoyancy * u) * den - g * u * (m - 1.0)) / (den * den);
}

std::vector<double> co2_initial_profile(const CO2ModelConfig& cfg, const Mesh1D& mesh) {
    std::vector<double> u(static_cast<std::size_t>(mesh.cells));
    for (int i = 0; i < mesh.cells; ++i) {
        const double r = std::abs(mesh.center(i) - cfg.x_inject);
        double v = 0.0;
        if (r <= cfg.plume_half_width) {
            v = cfg.plume_height;
        } else if (r < cfg.plume_half_width + cfg.plume_ramp) {
            v = cfg.plume_height * (1.0 - (r - cfg.plume_half_width) / cfg.plume_ramp);
        }
        u[i] = v;
    }
    return u;
}

std::vector<double> co2_solve(const CO2ModelConfig& cfg, std::span<const double> xi) {
    const CO2Parameters p = co2_parameters(cfg, xi);
    const double imbibition = cfg.porosity * (1.0 - cfg.s_br);
    const double drainage = cfg.porosity * (1.0 - cfg.s_br - cfg.s_cr);
    require(drainage > 0.0, ErrorKind::InvalidArgument, "residual saturations leave no mobile pore space");
    ScalarConservationLaw law{
        [p](double u) { return co2_flux(u, p); },
        [p](double u) { return co2_flux_derivative(u, p); },
        [=](double delta) { return delta < 0.0 ? drainage : imbibition; },
    };
    const Mesh1D mesh{0.0, cfg.domain_length, cfg.cells};
    FvOptions opts;
    opts.cfl = cfg.cfl;
    return fv_solve_scalar(law, co2_initial_profile(cfg, mesh), mesh, cfg.t_final, opts);
}

double co2_evaluate(const CO2ModelConfig& cfg, std::span<const double> xi) {
    const auto u = co2_solve(cfg, xi);
    return sample_profile(Mesh1D{0.0, cfg.domain_length, cfg.cells}, u, cfg.x_query);
}

// ---------------------------------------------------------------------------
// Black box

BlackBoxModel::BlackBoxModel(std::string command, int dim, std::string work_dir)
    : command_(std::move(command)), dim_(dim), work_dir_(std::move(work_dir)) {
    require(!command_.empty(), ErrorKind::InvalidArgument, "black-box model needs a command");
    require(dim_ >= 1, ErrorKind::InvalidArgument, "black-box model needs a positive dimension");
}

double BlackBoxModel::evaluate(std::span<const double> xi) const {
    namespace fs = std::filesystem;
    static std::atomic<unsigned long> counter{0};
    const fs::path dir = work_dir_.empty() ? fs::temp_directory_path() : fs::path(work_dir_);
    const std::string stem =
        "lstrack_bb_" + std::to_string(::getpid()) + "_" + std::to_string(counter.fetch_add(1));
    const fs::path param_file = dir / (stem + ".in");
    const fs::path out_file = dir / (stem + ".out");
    {
        std::ofstream os(param_file);
        os.precision(17);
        for (std::size_t k = 0; k < xi.size(); ++k) os << (k ? " " : "") << xi[k];
        os << '\n';
    }
    const std::string cmd = command_ + " '" + param_file.string() + "' '" + out_file.string() + "'";
    const int status = std::system(cmd.c_str());
    double value = 0.0;
    bool ok = false;
    if (status == 0) {
        std::ifstream is(out_file);
        ok = static_cast<bool>(is >> value);
    }
    std::error_code ec;
    fs::remove(param_file, ec);
    fs::remove(out_file, ec);
    if (!ok || !std::isfinite(value)) {
        fail(ErrorKind::NumericalFailure, "black-box command failed or produced no value: " + cmd);
    }
    return value;
}

}  // namespace lstrack
