#include "lstrack/analytics.hpp"

#include <cmath>
#include <random>
#include <vector>

#include "lstrack/error.hpp"
#include "lstrack/parallel.hpp"

namespace lstrack {

double weighted_l1_norm(std::span<const double> u, const StochasticGrid& grid) {
    require(u.size() == grid.size(), ErrorKind::InvalidArgument, "values do not cover the metric grid");
    double cell = grid.domain().density();
    for (int k = 0; k < grid.dim(); ++k) cell *= grid.spacing(k);
    double s = 0.0;
    for (double v : u) s += std::abs(v);
    return cell * s;
}

double rel_l1_error(std::span<const double> surrogate, std::span<const double> reference,
                    const StochasticGrid& grid) {
    require(surrogate.size() == reference.size(), ErrorKind::InvalidArgument, "surrogate/reference size mismatch");
    const double ref = weighted_l1_norm(reference, grid);
    require(ref > 0.0, ErrorKind::UndefinedMetric, "reference l1 norm is zero");
    std::vector<double> diff(surrogate.size());
    for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = surrogate[i] - reference[i];
    return weighted_l1_norm(diff, grid) / ref;
}

MomentErrors rel_moment_errors(double mean, double stddev, double mean_ref, double stddev_ref) {
    require(mean_ref != 0.0, ErrorKind::UndefinedMetric, "reference mean is zero");
    require(stddev_ref != 0.0, ErrorKind::UndefinedMetric, "reference standard deviation is zero");
    return {std::abs((mean - mean_ref) / mean_ref), std::abs((stddev - stddev_ref) / stddev_ref)};
}

namespace {

struct Partial {
    double n = 0.0;
    double mean = 0.0;
    double m2 = 0.0;
};

// Chan et al. pairwise merge of running mean / second central moment.
Partial merge(const Partial& a, const Partial& b) {
    if (a.n == 0.0) return b;
    if (b.n == 0.0) return a;
    Partial r;
    r.n = a.n + b.n;
    const double delta = b.mean - a.mean;
    r.mean = a.mean + delta * b.n / r.n;
    r.m2 = a.m2 + b.m2 + delta * delta * a.n * b.n / r.n;
    return r;
}

constexpr std::size_t kChunk = 1 << 16;

}  // namespace

MonteCarloStats monte_carlo_reference(const std::function<double(std::span<const double>)>& f, int dim,
                                      std::size_t samples, std::uint64_t seed, int workers) {
    require(samples >= 1, ErrorKind::InvalidArgument, "Monte Carlo needs at least one sample");
    require(dim >= 1 && dim <= 6, ErrorKind::InvalidArgument, "dimension must lie in [1, 6]");
    const std::size_t chunks = (samples + kChunk - 1) / kChunk;
    std::vector<Partial> parts(chunks);
    parallel_for(chunks, workers, [&](std::size_t c) {
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(c), static_cast<std::uint32_t>(c >> 32)};
        std::mt19937_64 rng(seq);
        std::uniform_real_distribution<double> dist(-1.0, 1.0);
        const std::size_t n = std::min(kChunk, samples - c * kChunk);
        std::vector<double> xi(static_cast<std::size_t>(dim));
        Partial p;
        for (std::size_t i = 0; i < n; ++i) {
            for (auto& x : xi) x = dist(rng);
            const double v = f(xi);
            p.n += 1.0;
            const double delta = v - p.mean;
            p.mean += delta / p.n;
            p.m2 += delta * (v - p.mean);
        }
        parts[c] = p;
    });
    Partial total;
    for (const auto& p : parts) total = merge(total, p);
    MonteCarloStats s;
    s.samples = samples;
    s.mean = total.mean;
    s.stddev = samples > 1 ? std::sqrt(total.m2 / (total.n - 1.0)) : 0.0;
    s.se_mean = s.stddev / std::sqrt(total.n);
    s.se_stddev = samples > 1 ? s.stddev / std::sqrt(2.0 * (total.n - 1.0)) : 0.0;
    return s;
}

MonteCarloStats monte_carlo_reference(const ForwardModel& model, std::size_t samples, std::uint64_t seed,
                                      int workers) {
    return monte_carlo_reference([&](std::span<const double> xi) { return model.evaluate(xi); }, model.dim(),
                                 samples, seed, workers);
}

}  // namespace lstrack
