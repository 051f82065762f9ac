#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace lstrack {

// Independent uniform marginals on E = [-1,1]^d. Non-uniform physical
// parameters enter through CDF transforms inside the forward models.
struct StochasticDomain {
    int dim = 2;
    std::vector<std::string> labels;  // optional, one per dimension

    static StochasticDomain uniform(int dim);

    // Joint density of the uniform measure on E.
    double density() const;
    bool contains(std::span<const double> xi, double slack = 1e-14) const;
};

// Tensor-product equidistant grid over E, endpoints included. Points are
// stored in row-major multi-index order (last dimension varies fastest).
class StochasticGrid {
public:
    StochasticGrid() = default;
    StochasticGrid(StochasticDomain domain, std::vector<int> points_per_dim, int level = 0);

    const StochasticDomain& domain() const { return domain_; }
    int dim() const { return domain_.dim; }
    int level() const { return level_; }
    int points(int k) const { return m_[static_cast<std::size_t>(k)]; }
    const std::vector<int>& points_per_dim() const { return m_; }
    std::size_t size() const { return size_; }
    std::size_t stride(int k) const { return strides_[static_cast<std::size_t>(k)]; }

    double spacing(int k) const { return 2.0 / (m_[static_cast<std::size_t>(k)] - 1); }
    // Largest spacing over dimensions (all equal for the grids built here).
    double spacing() const;
    double coordinate(int k, int i) const { return -1.0 + i * spacing(k); }

    void multi_index(std::size_t flat, std::span<int> out) const;
    std::size_t flat_index(std::span<const int> multi) const;
    void point(std::size_t flat, std::span<double> out) const;
    std::vector<double> point(std::size_t flat) const;

    // Flat index on the refined grid (2m-1 per dimension) of a point of this grid.
    std::size_t refined_index(std::size_t flat) const;

    bool operator==(const StochasticGrid& other) const {
        return domain_.dim == other.domain_.dim && m_ == other.m_;
    }

private:
    StochasticDomain domain_;
    std::vector<int> m_;
    std::vector<std::size_t> strides_;
    std::size_t size_ = 0;
    int level_ = 0;
};

enum class Fidelity : std::uint8_t { Missing = 0, High, Surrogate };

class ModelEvaluationCache {
public:
    ModelEvaluationCache() = default;
    explicit ModelEvaluationCache(StochasticGrid grid);

    const StochasticGrid& grid() const { return grid_; }
    std::size_t size() const { return values_.size(); }

    void set(std::size_t flat, double value, Fidelity fidelity);
    double value(std::size_t flat) const { return values_[flat]; }
    Fidelity fidelity(std::size_t flat) const { return fidelity_[flat]; }
    std::span<const double> values() const { return values_; }
    std::span<const Fidelity> fidelities() const { return fidelity_; }

    bool complete() const;
    std::size_t count(Fidelity f) const;
    // Proportion p of high-fidelity entries among all filled entries.
    double high_fraction() const;

private:
    StochasticGrid grid_;
    std::vector<double> values_;
    std::vector<Fidelity> fidelity_;
};

StochasticGrid build_grid(const StochasticDomain& domain, int m);
StochasticGrid refine_grid(const StochasticGrid& g);

// d-linear interpolation of grid-aligned values over the cell enclosing xi.
double interpolate_multilinear(const StochasticGrid& grid, std::span<const double> values,
                               std::span<const double> xi);
double interpolate_multilinear(const ModelEvaluationCache& cache, std::span<const double> xi);

// CSV rows: xi_1,...,xi_d,value,fidelity (H, S or -).
void write_grid_csv(std::ostream& os, const ModelEvaluationCache& cache);

}  // namespace lstrack
