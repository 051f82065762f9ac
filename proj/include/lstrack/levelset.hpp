#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "lstrack/error.hpp"
#include "lstrack/stochastic_space.hpp"

namespace lstrack {

// Level-set function phi on a stochastic grid. Negative inside the tracked
// region, the classifier treats phi >= 0 as the '+' side.
struct LevelSetField {
    StochasticGrid grid;
    std::vector<double> phi;
    double tau = 0.0;                 // accumulated pseudo-time
    std::vector<std::int8_t> signs;   // snapshot taken at the last lock check
    long steps = 0;                   // outer steps taken by the last evolution call
};

// Base speed exp(-gamma |grad u|^2) per grid point. The curvature factor
// (1 - epsilon kappa) is applied during evolution from the current phi.
struct SpeedField {
    StochasticGrid grid;
    std::vector<double> base;
    double epsilon = 0.0;
};

struct EvolveOptions {
    double cfl = 0.5;
    int lock_window = 20;
    long max_steps = 20000;
    bool use_curvature = true;
    bool tvd_rk2 = false;
    int workers = 1;
};

class LevelSetNonConvergence : public Error {
public:
    LevelSetNonConvergence(const std::string& what, LevelSetField last)
        : Error(ErrorKind::NonConvergence, what), field_(std::move(last)) {}
    const LevelSetField& field() const { return field_; }

private:
    LevelSetField field_;
};

// phi0 = |xi - center| - radius.
LevelSetField init_levelset(const StochasticGrid& grid, std::span<const double> center, double radius);

// Gradient by central differences (first-order one-sided on the faces).
// epsilon_factor scales the curvature weight: epsilon = epsilon_factor * dxi.
SpeedField build_speed_field(const ModelEvaluationCache& cache, double gamma = 1.0, double epsilon_factor = 2.0);
SpeedField constant_speed_field(const StochasticGrid& grid, double value, double epsilon = 0.0);

// div(grad phi / |grad phi|) at a grid point, |grad phi| floored at 1e-12.
double curvature(const LevelSetField& field, std::size_t flat);

// Evolves phi_tau + F |grad phi| = 0 until the sign pattern is frozen for
// lock_window consecutive steps. Throws LevelSetNonConvergence on max_steps.
LevelSetField evolve_to_lock(LevelSetField field, const SpeedField& speed, const EvolveOptions& opts = {});

// Evolves for a fixed pseudo-time interval (no lock detection).
LevelSetField evolve_for(LevelSetField field, const SpeedField& speed, double duration,
                         const EvolveOptions& opts = {});

// Linear roots along every grid edge whose endpoint signs differ. Row-major
// point list, dim() coordinates each.
std::vector<std::vector<double>> zero_crossing_points(const LevelSetField& field);

// Replaces |phi| by the Euclidean distance to the zero-crossing point set,
// keeping signs. One-signed fields are left unchanged.
void redistance(LevelSetField& field);

// Multilinear transfer of a field onto another grid covering E.
LevelSetField interpolate_field(const LevelSetField& field, const StochasticGrid& target);

void write_field_csv(std::ostream& os, const LevelSetField& field);
void write_crossings_csv(std::ostream& os, const std::vector<std::vector<double>>& points);

}  // namespace lstrack
