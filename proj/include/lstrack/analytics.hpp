#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <utility>

#include "lstrack/forward_models.hpp"
#include "lstrack/stochastic_space.hpp"

namespace lstrack {

// Discrete weighted l1 norm dxi_1...dxi_d sum rho |u| over the grid points.
double weighted_l1_norm(std::span<const double> u, const StochasticGrid& grid);

// ||surrogate - reference|| / ||reference|| in the weighted l1 norm.
// Throws UndefinedMetric when the reference norm vanishes.
double rel_l1_error(std::span<const double> surrogate, std::span<const double> reference, const StochasticGrid& grid);

struct MomentErrors {
    double mean = 0.0;
    double stddev = 0.0;
};

MomentErrors rel_moment_errors(double mean, double stddev, double mean_ref, double stddev_ref);

struct MonteCarloStats {
    std::size_t samples = 0;
    double mean = 0.0;
    double stddev = 0.0;
    double se_mean = 0.0;    // stddev / sqrt(n)
    double se_stddev = 0.0;  // normal approximation stddev / sqrt(2 (n - 1))
};

// Uniform samples on E drawn in fixed-size chunks; chunk c uses its own
// generator seeded from (seed, c), and chunk statistics are merged in chunk
// order, so results do not depend on the worker count.
MonteCarloStats monte_carlo_reference(const std::function<double(std::span<const double>)>& f, int dim,
                                      std::size_t samples, std::uint64_t seed, int workers = 1);
MonteCarloStats monte_carlo_reference(const ForwardModel& model, std::size_t samples, std::uint64_t seed,
                                      int workers = 1);

}  // namespace lstrack
