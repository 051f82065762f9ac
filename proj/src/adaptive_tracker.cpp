#include "lstrack/adaptive_tracker.hpp"

#include <cmath>
#include <ostream>

#include "lstrack/parallel.hpp"

namespace lstrack {

std::vector<Fidelity> classify_new_points(std::span<const double> phi, double band_tol, double dxi_coarse) {
    require(band_tol > 0.0, ErrorKind::InvalidArgument, "band_tol must be positive");
    const double width = band_tol * dxi_coarse;
    std::vector<Fidelity> out(phi.size());
    for (std::size_t i = 0; i < phi.size(); ++i) {
        out[i] = std::abs(phi[i]) < width ? Fidelity::High : Fidelity::Surrogate;
    }
    return out;
}

namespace {

void evaluate_points(const ForwardModel& model, ModelEvaluationCache& cache, const std::vector<std::size_t>& idx,
                     int workers) {
    const auto& g = cache.grid();
    std::vector<double> values(idx.size());
    parallel_for(idx.size(), workers, [&](std::size_t j) {
        const auto p = g.point(idx[j]);
        values[j] = model.evaluate(p);
    });
    for (std::size_t j = 0; j < idx.size(); ++j) cache.set(idx[j], values[j], Fidelity::High);
}

void write_record(std::ostream& os, const LevelRecord& r) {
    os << "{\"level\":" << r.level << ",\"m\":" << r.m << ",\"N_ev_high_cum\":" << r.n_ev_high << ",\"p\":" << r.p
       << ",\"steps_to_lock\":" << r.steps_to_lock << "}\n";
}

LevelSetField lock(LevelSetField field, const SpeedField& speed, const EvolveOptions& opts, int level) {
    try {
        return evolve_to_lock(std::move(field), speed, opts);
    } catch (const LevelSetNonConvergence& e) {
        throw LevelSetNonConvergence("level " + std::to_string(level) + ": " + e.what(), e.field());
    }
}

}  // namespace

ModelEvaluationCache evaluate_full(const ForwardModel& model, const StochasticGrid& grid, int workers) {
    require(model.dim() == grid.dim(), ErrorKind::InvalidArgument, "model dimension does not match the grid");
    ModelEvaluationCache cache(grid);
    std::vector<std::size_t> idx(grid.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    evaluate_points(model, cache, idx, workers);
    return cache;
}

TrackerResult run_tracker(const ForwardModel& model, const TrackerConfig& cfg, std::ostream* log) {
    require(cfg.levels >= 1, ErrorKind::InvalidArgument, "levels must be >= 1");
    require(cfg.band_tol > 0.0, ErrorKind::InvalidArgument, "band_tol must be positive");
    const int d = model.dim();
    const auto domain = StochasticDomain::uniform(d);
    std::vector<double> center = cfg.seed_center;
    if (center.empty()) center.assign(static_cast<std::size_t>(d), 0.0);
    require(static_cast<int>(center.size()) == d, ErrorKind::InvalidArgument, "seed center dimension mismatch");
    EvolveOptions evolve = cfg.evolve;
    evolve.workers = cfg.workers;

    TrackerResult res;
    res.cache = evaluate_full(model, build_grid(domain, cfg.m0), cfg.workers);
    auto speed = build_speed_field(res.cache, cfg.gamma, cfg.epsilon_factor);
    res.field = lock(init_levelset(res.cache.grid(), center, cfg.seed_radius), speed, evolve, 0);

    auto record = [&](int level) {
        LevelRecord r;
        r.level = level;
        r.m = res.cache.grid().points(0);
        r.n_ev_high = res.cache.count(Fidelity::High);
        r.n_ev_total = res.cache.size();
        r.p = res.cache.high_fraction();
        r.steps_to_lock = res.field.steps;
        r.tau_lock = res.field.tau;
        if (!res.records.empty() && r.p > res.records.back().p) {
            res.warnings.push_back("high-fidelity proportion increased at level " + std::to_string(level));
        }
        res.records.push_back(r);
        if (log) write_record(*log, r);
    };
    redistance(res.field);
    record(0);

    for (int level = 1; level < cfg.levels; ++level) {
        const auto& coarse = res.cache.grid();
        const double dxi_coarse = coarse.spacing();
        ModelEvaluationCache fine(refine_grid(coarse));
        std::vector<char> is_coarse(fine.size(), 0);
        for (std::size_t i = 0; i < coarse.size(); ++i) {
            const std::size_t j = coarse.refined_index(i);
            fine.set(j, res.cache.value(i), res.cache.fidelity(i));
            is_coarse[j] = 1;
        }
        auto warm = interpolate_field(res.field, fine.grid());

        std::vector<std::size_t> fresh;
        std::vector<double> fresh_phi;
        for (std::size_t j = 0; j < fine.size(); ++j) {
            if (is_coarse[j]) continue;
            fresh.push_back(j);
            fresh_phi.push_back(warm.phi[j]);
        }
        const auto flags = classify_new_points(fresh_phi, cfg.band_tol, dxi_coarse);
        std::vector<std::size_t> high;
        for (std::size_t k = 0; k < fresh.size(); ++k) {
            if (flags[k] == Fidelity::High) {
                high.push_back(fresh[k]);
            } else {
                const auto p = fine.grid().point(fresh[k]);
                fine.set(fresh[k], interpolate_multilinear(res.cache, p), Fidelity::Surrogate);
            }
        }
        evaluate_points(model, fine, high, cfg.workers);

        res.cache = std::move(fine);
        speed = build_speed_field(res.cache, cfg.gamma, cfg.epsilon_factor);
        const long previous_steps = res.field.steps;
        res.field = lock(std::move(warm), speed, evolve, level);
        if (res.field.steps > 2 * previous_steps) {
            res.warnings.push_back("warm start took " + std::to_string(res.field.steps) + " steps at level " +
                                   std::to_string(level) + " versus " + std::to_string(previous_steps) +
                                   " on the coarser level");
        }
        redistance(res.field);
        record(level);
    }
    return res;
}

}  // namespace lstrack
