#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "lstrack/error.hpp"
#include "lstrack/stochastic_space.hpp"

namespace lstrack {

std::size_t count_basis(int order, int dim);

// Total-order multi-indices |k| <= N in graded lexicographic order; within a
// degree, (n, 0, ..., 0) comes first.
class MultiIndexSet {
public:
    MultiIndexSet() = default;
    MultiIndexSet(int dim, int order);

    int dim() const { return dim_; }
    int order() const { return order_; }
    std::size_t size() const { return idx_.size(); }
    const std::vector<int>& operator[](std::size_t j) const { return idx_[j]; }
    // Position of k in the set; throws InvalidArgument when absent.
    std::size_t find(std::span<const int> k) const;

private:
    int dim_ = 0;
    int order_ = 0;
    std::vector<std::vector<int>> idx_;
};

// sqrt(2n+1) P_n(x): orthonormal w.r.t. the uniform density 1/2 on [-1,1].
double legendre_orthonormal(int n, double x);
// Fills out[0..order] with the orthonormal Legendre values at x.
void legendre_orthonormal_all(int order, double x, std::span<double> out);

// Jacobi P_n^{(a,b)} in the standard normalization.
double jacobi(int n, double a, double b, double x);

// Gauss-Legendre nodes and weights on [-1,1] (weights sum to 2).
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights);

class GpcBasis {
public:
    GpcBasis() = default;
    GpcBasis(int dim, int order) : set_(dim, order) {
        require(dim <= 6 && order <= 30, ErrorKind::InvalidArgument, "gPC basis limited to d <= 6, N <= 30");
    }

    const MultiIndexSet& indices() const { return set_; }
    int dim() const { return set_.dim(); }
    int order() const { return set_.order(); }
    std::size_t size() const { return set_.size(); }

    double eval(std::size_t j, std::span<const double> xi) const;
    double eval(std::span<const int> k, std::span<const double> xi) const { return eval(set_.find(k), xi); }
    void eval_all(std::span<const double> xi, std::span<double> out) const;

private:
    MultiIndexSet set_;
};

// Hyper-rectangular element with the affinely mapped Legendre basis,
// orthonormal w.r.t. the conditional uniform density on the element.
struct MeElement {
    std::vector<double> lo;
    std::vector<double> hi;

    int dim() const { return static_cast<int>(lo.size()); }
    double probability() const;  // P(xi in element) under the uniform measure on E
    bool contains(std::span<const double> xi, double slack = 1e-14) const;
    void to_reference(std::span<const double> xi, std::span<double> x) const;
    double width(int k) const { return hi[k] - lo[k]; }
};

void me_eval_all(const MeElement& e, const GpcBasis& basis, std::span<const double> xi, std::span<double> out);

// Orthonormal polynomials on a d-simplex w.r.t. the uniform probability
// measure of the simplex, built from Jacobi products in barycentric
// coordinates lambda = T^{-1}(xi - xi^{d+1}).
class SimplexBasis {
public:
    SimplexBasis() = default;
    // vertices: d+1 points of dimension d.
    SimplexBasis(const std::vector<std::vector<double>>& vertices, int order);

    int dim() const { return set_.dim(); }
    int order() const { return set_.order(); }
    std::size_t size() const { return set_.size(); }
    const MultiIndexSet& indices() const { return set_; }
    const Eigen::MatrixXd& vertex_matrix() const { return T_; }
    double probability() const { return probability_; }

    void to_lambda(std::span<const double> xi, std::span<double> lambda) const;
    void from_lambda(std::span<const double> lambda, std::span<double> xi) const;

    // Unnormalized Jacobi product at barycentric coordinates.
    double raw(std::size_t j, std::span<const double> lambda) const;
    double eval(std::size_t j, std::span<const double> xi) const;
    void eval_all(std::span<const double> xi, std::span<double> out) const;

    // ||raw_alpha||^-1 computed by exact quadrature on the simplex.
    double inverse_norm(std::size_t j) const { return inv_norm_[j]; }

private:
    MultiIndexSet set_;
    Eigen::MatrixXd T_;
    Eigen::MatrixXd Tinv_;
    Eigen::VectorXd apex_;
    double probability_ = 0.0;
    std::vector<double> inv_norm_;
};

// Closed-form inverse norm sqrt(prod_j (2|alpha^j| + d - j + 1) / d!), where
// |alpha^j| = alpha_j + ... + alpha_d.
double simplex_inverse_norm_closed_form(std::span<const int> alpha);

// Collapsed (Duffy) Gauss-Legendre rule on the reference simplex
// {lambda_i >= 0, sum lambda <= 1}; weights sum to 1 (uniform probability).
void simplex_quadrature(int dim, int points_per_dim, std::vector<std::vector<double>>& nodes,
                        std::vector<double>& weights);

// Trapezoid weights of a tensor grid w.r.t. the uniform probability on E.
std::vector<double> trapezoid_weights(const StochasticGrid& grid);

// Discontinuity-conforming frames psi_k^+ = 1_{E+} psi_k, psi_k^- = 1_{E-} psi_k.
// Frame order: all '+' frames, then all '-' frames.
struct FrameSet {
    GpcBasis gpc;
    std::vector<std::int8_t> labels;  // per cache point, +1 or -1
    Eigen::MatrixXd gram;
    Eigen::VectorXd expectation;

    std::size_t size() const { return 2 * gpc.size(); }
    void eval_all(std::span<const double> xi, int label, std::span<double> out) const;
};

// labels: classifier values (+1 / -1) at the grid points.
FrameSet build_frames(std::span<const std::int8_t> labels, const GpcBasis& gpc, const StochasticGrid& grid);

std::pair<double, double> frame_statistics(const Eigen::VectorXd& coeffs, const FrameSet& frames);

// Extreme eigenvalues (A, B) of the frame Gram matrix.
std::pair<double, double> frame_bounds(const FrameSet& frames);

void write_coefficients_csv(std::ostream& os, const MultiIndexSet& set, const Eigen::VectorXd& coeffs);

}  // namespace lstrack
