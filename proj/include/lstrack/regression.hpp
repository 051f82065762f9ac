#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "lstrack/error.hpp"
#include "lstrack/stochastic_space.hpp"

namespace lstrack {

struct RegressionReport {
    Eigen::VectorXd coeffs;
    Eigen::VectorXd residual;  // u - Psi c
    int rank = 0;
    int truncated = 0;  // singular values dropped (OLS)
    // LAD only
    Eigen::VectorXd g;               // l1-minimal null-space component
    double projection_residual = 0;  // ||Psi c - (u - g)||_2
    int iterations = 0;
    bool certified = false;  // optimality verified by a dual certificate
    std::vector<std::size_t> reassigned;
};

// Thrown when basis pursuit exhausts its iterations; carries the best iterate.
class RegressionFailure : public Error {
public:
    RegressionFailure(const std::string& what, RegressionReport best)
        : Error(ErrorKind::NumericalFailure, what), best_(std::move(best)) {}
    const RegressionReport& best() const { return best_; }

private:
    RegressionReport best_;
};

// Least squares via the truncated SVD of Psi / sqrt(N_ev): singular values with
// s^2 <= eps_svd are dropped, so the threshold acts on the empirical Gram matrix.
RegressionReport solve_ols_tsvd(const Eigen::MatrixXd& psi, const Eigen::VectorXd& u, double eps_svd = 1e-8);

struct LadOptions {
    double eps_qr = 1e-8;
    double abs_tol = 1e-9;
    double rel_tol = 1e-9;
    int max_iter = 5000;
    double relaxation = 1.6;
    int polish_every = 25;
};

// Least absolute deviations: pivoted QR Psi P = [Q_hat Q_tilde] R, then
// min ||g||_1 s.t. Q_tilde^T g = Q_tilde^T u by ADMM, then least squares for
// Psi c = u - g. ADMM iterates are polished to an exact vertex whenever a dual
// certificate proves optimality.
RegressionReport solve_lad(const Eigen::MatrixXd& psi, const Eigen::VectorXd& u, const LadOptions& opts = {});

// Indices whose absolute residual exceeds jump_floor.
std::vector<std::size_t> repair_misclassified(const RegressionReport& report, double jump_floor);

// Half the smallest |u_i - u_j| over grid-adjacent pairs with different labels.
// Returns 0 when no pair straddles the labels.
double estimate_jump_floor(const StochasticGrid& grid, std::span<const double> values,
                           std::span<const std::int8_t> labels);

}  // namespace lstrack
