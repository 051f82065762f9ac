#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lstrack/basis.hpp"
#include "lstrack/config.hpp"
#include "lstrack/regression.hpp"
#include "lstrack/stochastic_space.hpp"
#include "lstrack/tessellation.hpp"

namespace lstrack {

enum class Solver { Ols, Lad };
Solver parse_solver(const std::string& s);

// OLS or LAD; a LAD run that exhausts its iterations returns the best iterate
// and sets *warning.
RegressionReport regress(const Eigen::MatrixXd& psi, const Eigen::VectorXd& u, Solver solver,
                         const RegressionConfig& rc, std::string* warning = nullptr);

// Piecewise expansion on simplex elements.
struct SopSurrogate {
    SimplexMesh mesh;
    StochasticGrid grid;             // grid of the fitted cache
    std::vector<double> cache_values;
    std::vector<SimplexBasis> bases;  // one per simplex; empty simplices keep a default basis
    std::vector<Eigen::VectorXd> coeffs;
    std::vector<char> active;
    std::vector<std::string> warnings;

    // Fitted values at the cache points.
    std::vector<double> fitted;

    double mean() const;
    double variance() const;
    // Values at arbitrary grid points. Points inside basis-free simplices take
    // the nearest cached value.
    std::vector<double> evaluate(const StochasticGrid& target) const;
};

// Per-simplex regression over all cached points the simplex contains; the
// order drops until P < n_e, and simplices without points get no basis.
SopSurrogate fit_sop(SimplexMesh mesh, const ModelEvaluationCache& cache, int order, Solver solver,
                     const RegressionConfig& rc, int workers = 1);

// Discontinuity-conforming frame expansion on two regions.
struct FrameSurrogate {
    FrameSet frames;
    Eigen::VectorXd coeffs;
    RegressionReport report;
    std::size_t repaired = 0;  // labels flipped by the repair step
    std::vector<double> fitted;

    double evaluate(std::span<const double> xi, int label) const;
    std::pair<double, double> statistics() const { return frame_statistics(coeffs, frames); }
};

// labels: +1 / -1 per cache point.
FrameSurrogate fit_frames(const ModelEvaluationCache& cache, std::vector<std::int8_t> labels, int order,
                          Solver solver, const RegressionConfig& rc);

struct MetricsRow {
    std::string experiment_id;
    std::string method;  // ME-gPC | SOP | F-gPC
    int order = 0;
    std::size_t basis_size = 0;
    std::size_t n_ev = 0;
    double eps_l1 = 0.0;
    double eps_mu = 0.0;  // NaN when not computed
    double eps_sigma = 0.0;
    int levels = 0;
    std::size_t n_elements = 0;
    double p = 0.0;
    std::string solver;
    std::string classifier;
    double theta1 = 0.0;
};

std::string metrics_header();
std::string format_row(const MetricsRow& row);
std::vector<MetricsRow> read_metrics_csv(std::istream& in);
void write_metrics_csv(std::ostream& os, const std::vector<MetricsRow>& rows);

struct ExperimentResult {
    std::string run_dir;
    std::vector<MetricsRow> rows;
    std::vector<std::string> warnings;
};

// Runs every sweep combination and writes a fresh run directory below
// out_root (never reusing an existing one): config.json, metrics.csv,
// events.jsonl, optional dumps and finally manifest.json.
ExperimentResult run_experiment(const ExperimentConfig& cfg, const std::string& out_root,
                                std::ostream* log = nullptr);

// Plot-ready tables keyed by file name:
//   fgpc_series.csv  series,solver,classifier,N,N_ev,eps_l1
//   sop_table.csv    levels,elements,N_ev,p,N<n>_LAD,N<n>_OLS,...
//   megpc_table.csv  theta1,elements,N_ev,eps_l1,eps_mu,eps_sigma
std::map<std::string, std::string> emit_plot_data(const std::vector<MetricsRow>& rows);

}  // namespace lstrack
