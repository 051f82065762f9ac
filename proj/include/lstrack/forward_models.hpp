#pragma once

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace lstrack {

// A quantity of interest u(xi) = u(xi, x*, T) of a parameterized scalar
// conservation law, evaluated at a fixed query location and time.
// Implementations must be deterministic and safe for concurrent calls.
class ForwardModel {
public:
    virtual ~ForwardModel() = default;
    virtual std::string name() const = 0;
    virtual int dim() const = 0;
    virtual bool known_exact() const = 0;
    virtual double evaluate(std::span<const double> xi) const = 0;
};

// ---------------------------------------------------------------------------
// Burgers' equation with a stochastic Riemann initial condition:
//   u_L = a + sigma_L cos(c xi_1),  u_R = b + sigma_R cos(c xi_2).

struct BurgersRiemannConfig {
    double a = 0.5;
    double b = -0.5;
    double sigma_left = 0.4;
    double sigma_right = 0.3;
    double c = 3.0;
    double x0 = 0.0;
    double x_query = -0.1;
    double t_query = 1.0;
};

double burgers_left_state(const BurgersRiemannConfig& cfg, double xi1);
double burgers_right_state(const BurgersRiemannConfig& cfg, double xi2);

// Exact entropy solution in the shock regime u_L > u_R. Returns u_L when the
// query point lies on or left of the shock x0 + s T, s = (u_L + u_R) / 2.
double burgers_exact(const BurgersRiemannConfig& cfg, std::span<const double> xi);

// g(xi) = x0 + T (u_L + u_R) / 2 - x*; zero exactly on the stochastic
// discontinuity, g >= 0 where burgers_exact returns u_L.
double burgers_discontinuity_indicator(const BurgersRiemannConfig& cfg, std::span<const double> xi);

// ---------------------------------------------------------------------------
// Finite-volume solver for u_t * R + f(u)_x = 0 on a 1D mesh.

struct ScalarConservationLaw {
    std::function<double(double)> flux;
    std::function<double(double)> flux_derivative;
    // Accumulation coefficient given the provisional update direction
    // (negative: u decreasing). Defaults to 1.
    std::function<double(double)> accumulation;
};

struct Mesh1D {
    double x_min = 0.0;
    double x_max = 1.0;
    int cells = 100;

    double dx() const { return (x_max - x_min) / cells; }
    double center(int i) const { return x_min + (i + 0.5) * dx(); }
};

struct FvOptions {
    double cfl = 0.45;
    bool second_order = true;  // minmod MUSCL + SSP-RK2; otherwise first order Euler
    long max_steps = 10'000'000;
};

// Local Lax-Friedrichs (Rusanov) flux, transmissive boundaries. Throws
// NumericalFailure on non-finite values or step exhaustion.
std::vector<double> fv_solve_scalar(const ScalarConservationLaw& law, std::span<const double> u0,
                                    const Mesh1D& mesh, double t_final, const FvOptions& opts = {});

// Linear interpolation between cell centers (constant beyond the outer centers).
double sample_profile(const Mesh1D& mesh, std::span<const double> u, double x);

// ---------------------------------------------------------------------------
// Parameter transforms: xi in [-1,1] -> p = (xi + 1) / 2 -> F^{-1}(p).

// Ratio X / Y of independent uniforms X ~ U[x_lo, x_hi], Y ~ U[y_lo, y_hi] (Y > 0).
struct UniformRatioDistribution {
    double x_lo, x_hi, y_lo, y_hi;
    double cdf(double r) const;
    double quantile(double p) const;
    double min() const { return x_lo / y_hi; }
    double max() const { return x_hi / y_lo; }
};

struct LognormalDistribution {
    double mean, stddev;
    double mu() const;
    double sigma() const;
    double cdf(double x) const;
    double quantile(double p) const;
};

struct ExponentialDistribution {
    double mean;
    double cdf(double x) const;
    double quantile(double p) const;
};

// Maps xi to the probability level (xi + 1) / 2 clipped to [clip, 1 - clip],
// keeping unbounded quantiles finite at the grid endpoints.
double xi_to_probability(double xi, double clip);

// ---------------------------------------------------------------------------
// CO2 migration in a sloping aquifer (vertical-equilibrium model):
//   porosity * R * u_t + f(u)_x = 0,  f(u) = (Q + K (1 - u)) M u / (1 + (M - 1) u)
// with hysteretic R = 1 - S_br - S_cr when u decreases and 1 - S_br otherwise.
// Units: metres and years.

struct CO2ModelConfig {
    double domain_length = 2000.0;
    int cells = 200;
    double cfl = 0.45;
    double porosity = 0.2;
    double s_br = 0.1;
    double s_cr = 0.1;
    double slope = 0.15;           // radians
    double injection_years = 20.0;  // end of injection is t = 0
    double t_final = 600.0;
    double x_query = 600.0;

    // Injection-end plume: trapezoid centred at x_inject.
    double x_inject = 500.0;
    double plume_height = 0.5;
    double plume_half_width = 100.0;
    double plume_ramp = 50.0;

    // Mobility ratio M = lambda_c / lambda_b, both uniform.
    double lambda_c_lo = 0.7 * 6.25e-5;
    double lambda_c_hi = 1.3 * 6.25e-5;
    double lambda_b_lo = 0.8 * 5e-4;
    double lambda_b_hi = 1.2 * 5e-4;
    // Permeability k [mD], lognormal; K = k_scale * k * sin(slope) [m/yr].
    double perm_mean = 200.0;
    double perm_std = 50.0;
    double k_scale = 0.0134;
    // Background flow Q, exponential; model flux uses q_scale * Q [m/yr].
    double q_mean = 1e-9;
    double q_scale = 1e8;

    double cdf_clip = 1e-3;
};

struct CO2Parameters {
    double mobility_ratio;  // M
    double buoyancy;        // K in model units
    double background;      // Q in model units
};

CO2Parameters co2_parameters(const CO2ModelConfig& cfg, std::span<const double> xi);
double co2_flux(double u, const CO2Parameters& p);
double co2_flux_derivative(double u, const CO2Parameters& p);
std::vector<double> co2_initial_profile(const CO2ModelConfig& cfg, const Mesh1D& mesh);
// Full plume profile at t_final for the given stochastic point.
std::vector<double> co2_solve(const CO2ModelConfig& cfg, std::span<const double> xi);
double co2_evaluate(const CO2ModelConfig& cfg, std::span<const double> xi);

// ---------------------------------------------------------------------------
// Concrete models.

class BurgersExactModel final : public ForwardModel {
public:
    explicit BurgersExactModel(BurgersRiemannConfig cfg = {}) : cfg_(cfg) {}
    std::string name() const override { return "burgers"; }
    int dim() const override { return 2; }
    bool known_exact() const override { return true; }
    double evaluate(std::span<const double> xi) const override { return burgers_exact(cfg_, xi); }
    const BurgersRiemannConfig& config() const { return cfg_; }

private:
    BurgersRiemannConfig cfg_;
};

// Burgers' Riemann problem solved numerically on (-1, 1).
class BurgersFvModel final : public ForwardModel {
public:
    explicit BurgersFvModel(BurgersRiemannConfig cfg = {}, int cells = 400, FvOptions opts = {})
        : cfg_(cfg), cells_(cells), opts_(opts) {}
    std::string name() const override { return "burgers_fv"; }
    int dim() const override { return 2; }
    bool known_exact() const override { return false; }
    double evaluate(std::span<const double> xi) const override;

private:
    BurgersRiemannConfig cfg_;
    int cells_;
    FvOptions opts_;
};

class CO2Model final : public ForwardModel {
public:
    explicit CO2Model(CO2ModelConfig cfg = {}) : cfg_(cfg) {}
    std::string name() const override { return "co2"; }
    int dim() const override { return 3; }
    bool known_exact() const override { return false; }
    double evaluate(std::span<const double> xi) const override { return co2_evaluate(cfg_, xi); }
    const CO2ModelConfig& config() const { return cfg_; }

private:
    CO2ModelConfig cfg_;
};

// External executable invoked once per point as `command <param-file> <output-file>`.
// The parameter file holds one line with the d coordinates; the executable
// writes a single number to the output file.
class BlackBoxModel final : public ForwardModel {
public:
    BlackBoxModel(std::string command, int dim, std::string work_dir = {});
    std::string name() const override { return "blackbox"; }
    int dim() const override { return dim_; }
    bool known_exact() const override { return false; }
    double evaluate(std::span<const double> xi) const override;

private:
    std::string command_;
    int dim_;
    std::string work_dir_;
};

// Wraps an arbitrary callable; used for synthetic test problems.
class FunctionModel final : public ForwardModel {
public:
    FunctionModel(std::string name, int dim, std::function<double(std::span<const double>)> fn,
                  bool exact = true)
        : name_(std::move(name)), dim_(dim), fn_(std::move(fn)), exact_(exact) {}
    std::string name() const override { return name_; }
    int dim() const override { return dim_; }
    bool known_exact() const override { return exact_; }
    double evaluate(std::span<const double> xi) const override { return fn_(xi); }

private:
    std::string name_;
    int dim_;
    std::function<double(std::span<const double>)> fn_;
    bool exact_;
};

}  // namespace lstrack
