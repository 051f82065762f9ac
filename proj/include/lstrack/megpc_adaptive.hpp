#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lstrack/basis.hpp"
#include "lstrack/forward_models.hpp"

namespace lstrack {

// eta_e = sum_{|k|=N} c_k^2 / sum_{0<|k|<=N} c_k^2 (orthonormal basis);
// 0 when the element solution is constant.
double local_decay(const Eigen::VectorXd& coeffs, const GpcBasis& basis);

// eta^alpha * prob >= theta1
bool should_split(double eta, double prob, double alpha, double theta1);

// r_i = c_{N e_i}^2 / sum_{|k|=N} c_k^2 for each dimension.
std::vector<double> dimension_sensitivity(const Eigen::VectorXd& coeffs, const GpcBasis& basis);

// Dimensions with r_i >= theta2 * max_j r_j. When every r_i is zero the
// single widest dimension of `element` is returned.
std::vector<int> split_dimensions(const Eigen::VectorXd& coeffs, const GpcBasis& basis, double theta2,
                                  const MeElement& element);

enum class MegpcRule {
    Gauss,    // (N+2)^d Gauss-Legendre points per element
    Uniform,  // (N+1)^d equispaced points including element faces, shared between neighbours
};

struct MegpcConfig {
    MegpcRule rule = MegpcRule::Gauss;
    int order = 2;
    double theta1 = 1e-3;
    double theta2 = 0.2;
    double alpha = 0.5;
    std::size_t max_elements = 200000;
    int workers = 1;
};

struct MegpcNode {
    MeElement element;
    std::vector<int> children;  // empty for leaves
    Eigen::VectorXd coeffs;     // leaf coefficients in the element basis
    double eta = 0.0;
};

struct MegpcResult {
    GpcBasis basis;
    std::vector<MegpcNode> nodes;  // nodes[0] is E
    std::vector<int> leaves;
    std::size_t n_ev = 0;
    int rounds = 0;
    double mean = 0.0;
    double variance = 0.0;
    std::vector<std::string> warnings;

    // Evaluates the leaf expansion containing xi (first matching child on ties).
    double evaluate(std::span<const double> xi) const;
};

// Each new element is sampled by `rule` and fitted by truncated-SVD least squares; flagged leaves are bisected along their
// sensitive dimensions and the children sampled afresh, until no leaf splits.
MegpcResult run_adaptive_megpc(const ForwardModel& model, const MegpcConfig& cfg);

}  // namespace lstrack
