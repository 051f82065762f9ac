#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "lstrack/forward_models.hpp"
#include "lstrack/levelset.hpp"
#include "lstrack/stochastic_space.hpp"

namespace lstrack {

struct TrackerConfig {
    int levels = 2;
    int m0 = 31;
    // High-fidelity band half-width, in coarse grid spacings.
    double band_tol = 2.0;
    std::vector<double> seed_center;  // empty: origin
    double seed_radius = 0.25;
    double gamma = 1.0;
    double epsilon_factor = 2.0;
    EvolveOptions evolve;
    int workers = 1;
};

struct LevelRecord {
    int level = 0;
    int m = 0;
    std::size_t n_ev_high = 0;   // cumulative high-fidelity evaluations
    std::size_t n_ev_total = 0;  // points in the level's cache
    double p = 1.0;
    long steps_to_lock = 0;
    double tau_lock = 0.0;
};

struct TrackerResult {
    // Locked field after redistancing on the finest grid.
    LevelSetField field;
    ModelEvaluationCache cache;
    std::vector<LevelRecord> records;
    std::vector<std::string> warnings;
};

// HIGH iff |phi| < band_tol * dxi_coarse.
std::vector<Fidelity> classify_new_points(std::span<const double> phi, double band_tol, double dxi_coarse);

// Evaluates the model at every grid point on `workers` threads.
ModelEvaluationCache evaluate_full(const ForwardModel& model, const StochasticGrid& grid, int workers);

// Coarse evaluation, level-set locking, then refinement with high-fidelity
// evaluations only inside the band around the iso-zero. When `log` is set one
// JSON line per level is written: {level, m, N_ev_high_cum, p, steps_to_lock}.
TrackerResult run_tracker(const ForwardModel& model, const TrackerConfig& cfg, std::ostream* log = nullptr);

}  // namespace lstrack
