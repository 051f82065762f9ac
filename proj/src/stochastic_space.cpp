#include "lstrack/stochastic_space.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "lstrack/error.hpp"

namespace lstrack {

StochasticDomain StochasticDomain::uniform(int dim) {
    require(dim >= 1 && dim <= 6, ErrorKind::InvalidArgument,
            "stochastic dimension must lie in [1, 6], got " + std::to_string(dim));
    StochasticDomain d;
    d.dim = dim;
    return d;
}

double StochasticDomain::density() const { return std::pow(0.5, dim); }

bool StochasticDomain::contains(std::span<const double> xi, double slack) const {
    if (static_cast<int>(xi.size()) != dim) return false;
    return std::all_of(xi.begin(), xi.end(), [&](double v) { return std::abs(v) <= 1.0 + slack; });
}

StochasticGrid::StochasticGrid(StochasticDomain domain, std::vector<int> points_per_dim, int level)
    : domain_(std::move(domain)), m_(std::move(points_per_dim)), level_(level) {
    require(static_cast<int>(m_.size()) == domain_.dim, ErrorKind::InvalidArgument,
            "points-per-dimension vector does not match the domain dimension");
    strides_.assign(m_.size(), 1);
    size_ = 1;
    for (int k = domain_.dim - 1; k >= 0; --k) {
        require(m_[k] >= 2, ErrorKind::InvalidArgument, "grid needs at least 2 points per dimension");
        strides_[k] = size_;
        size_ *= static_cast<std::size_t>(m_[k]);
    }
}

double StochasticGrid::spacing() const {
    double h = 0.0;
    for (int k = 0; k < dim(); ++k) h = std::max(h, spacing(k));
    return h;
}

void StochasticGrid::multi_index(std::size_t flat, std::span<int> out) const {
    for (int k = 0; k < dim(); ++k) {
        out[k] = static_cast<int>(flat / strides_[k]);
        flat %= strides_[k];
    }
}

std::size_t StochasticGrid::flat_index(std::span<const int> multi) const {
    std::size_t flat = 0;
    for (int k = 0; k < dim(); ++k) flat += static_cast<std::size_t>(multi[k]) * strides_[k];
    return flat;
}

void StochasticGrid::point(std::size_t flat, std::span<double> out) const {
    for (int k = 0; k < dim(); ++k) {
        const auto i = static_cast<int>(flat / strides_[k]);
        flat %= strides_[k];
        out[k] = coordinate(k, i);
    }
}

std::vector<double> StochasticGrid::point(std::size_t flat) const {
    std::vector<double> p(static_cast<std::size_t>(dim()));
    point(flat, p);
    return p;
}

std::size_t StochasticGrid::refined_index(std::size_t flat) const {
    std::size_t fine_flat = 0;
    std::size_t fine_stride = 1;
    for (int k = dim() - 1; k >= 0; --k) {
        const std::size_t i = (flat / strides_[k]) % static_cast<std::size_t>(m_[k]);
        fine_flat += 2 * i * fine_stride;
        fine_stride *= static_cast<std::size_t>(2 * m_[k] - 1);
    }
    return fine_flat;
}

ModelEvaluationCache::ModelEvaluationCache(StochasticGrid grid)
    : grid_(std::move(grid)), values_(grid_.size(), 0.0), fidelity_(grid_.size(), Fidelity::Missing) {}

void ModelEvaluationCache::set(std::size_t flat, double value, Fidelity fidelity) {
    values_.at(flat) = value;
    fidelity_.at(flat) = fidelity;
}

bool ModelEvaluationCache::complete() const {
    return std::none_of(fidelity_.begin(), fidelity_.end(), [](Fidelity f) { return f == Fidelity::Missing; });
}

std::size_t ModelEvaluationCache::count(Fidelity f) const {
    return static_cast<std::size_t>(std::count(fidelity_.begin(), fidelity_.end(), f));
}

double ModelEvaluationCache::high_fraction() const {
    const std::size_t total = size() - count(Fidelity::Missing);
    if (total == 0) return 0.0;
    return static_cast<double>(count(Fidelity::High)) / static_cast<double>(total);
}

StochasticGrid build_grid(const StochasticDomain& domain, int m) {
    require(m >= 2, ErrorKind::InvalidArgument, "build_grid: m must be >= 2, got " + std::to_string(m));
    return StochasticGrid(domain, std::vector<int>(static_cast<std::size_t>(domain.dim), m), 0);
}

StochasticGrid refine_grid(const StochasticGrid& g) {
    std::vector<int> m = g.points_per_dim();
    for (auto& mk : m) mk = 2 * mk - 1;
    return StochasticGrid(g.domain(), std::move(m), g.level() + 1);
}

double interpolate_multilinear(const StochasticGrid& grid, std::span<const double> values,
                               std::span<const double> xi) {
    const int d = grid.dim();
    require(values.size() == grid.size(), ErrorKind::MissingData, "value array does not cover the grid");
    require(grid.domain().contains(xi), ErrorKind::OutOfDomain, "interpolation point outside E");

    double frac[8];
    std::size_t origin = 0;
    for (int k = 0; k < d; ++k) {
        const double t = (std::clamp(xi[k], -1.0, 1.0) + 1.0) / grid.spacing(k);
        int i = static_cast<int>(std::floor(t));
        i = std::clamp(i, 0, grid.points(k) - 2);
        frac[k] = t - i;
        origin += static_cast<std::size_t>(i) * grid.stride(k);
    }
    double result = 0.0;
    const unsigned corners = 1u << d;
    for (unsigned c = 0; c < corners; ++c) {
        double w = 1.0;
        std::size_t idx = origin;
        for (int k = 0; k < d; ++k) {
            if (c & (1u << k)) {
                w *= frac[k];
                idx += grid.stride(k);
            } else {
                w *= 1.0 - frac[k];
            }
        }
        if (w != 0.0) result += w * values[idx];
    }
    return result;
}

double interpolate_multilinear(const ModelEvaluationCache& cache, std::span<const double> xi) {
    return interpolate_multilinear(cache.grid(), cache.values(), xi);
}

void write_grid_csv(std::ostream& os, const ModelEvaluationCache& cache) {
    const auto& g = cache.grid();
    for (int k = 0; k < g.dim(); ++k) os << "xi" << (k + 1) << ',';
    os << "value,fidelity\n";
    std::vector<double> p(static_cast<std::size_t>(g.dim()));
    os.precision(17);
    for (std::size_t i = 0; i < g.size(); ++i) {
        g.point(i, p);
        for (double v : p) os << v << ',';
        const char flag = cache.fidelity(i) == Fidelity::High ? 'H'
                          : cache.fidelity(i) == Fidelity::Surrogate ? 'S'
                                                                     : '-';
        os << cache.value(i) << ',' << flag << '\n';
    }
}

}  // namespace lstrack
