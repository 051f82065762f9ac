#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "lstrack/forward_models.hpp"

namespace testing {

// Dense samples of {burgers_discontinuity_indicator = 0} inside E, obtained by
// solving for one coordinate along lines of the other.
inline std::vector<std::vector<double>> burgers_exact_curve(const lstrack::BurgersRiemannConfig& cfg, int n = 4001) {
    std::vector<std::vector<double>> out;
    // sigma_L cos(c x1) + sigma_R cos(c x2) = target
    const double target = 2.0 * (cfg.x_query - cfg.x0) / cfg.t_query - cfg.a - cfg.b;
    auto solve = [&](double other, double sigma_other, double sigma_self, int self_index) {
        const double r = (target - sigma_other * std::cos(cfg.c * other)) / sigma_self;
        if (r < -1.0 || r > 1.0) return;
        const double base = std::acos(r) / cfg.c;
        for (double s : {base, -base}) {
            if (s < -1.0 || s > 1.0) continue;
            std::vector<double> p(2);
            p[self_index] = s;
            p[1 - self_index] = other;
            out.push_back(p);
        }
    };
    for (int i = 0; i < n; ++i) {
        const double t = -1.0 + 2.0 * i / (n - 1);
        solve(t, cfg.sigma_left, cfg.sigma_right, 1);
        solve(t, cfg.sigma_right, cfg.sigma_left, 0);
    }
    return out;
}

inline double point_distance(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
    return std::sqrt(s);
}

// Symmetric Hausdorff distance between two point sets; infinity when one is empty.
inline double hausdorff(const std::vector<std::vector<double>>& a, const std::vector<std::vector<double>>& b) {
    if (a.empty() || b.empty()) return std::numeric_limits<double>::infinity();
    auto directed = [](const auto& from, const auto& to) {
        double worst = 0.0;
        for (const auto& p : from) {
            double best = std::numeric_limits<double>::infinity();
            for (const auto& q : to) best = std::min(best, point_distance(p, q));
            worst = std::max(worst, best);
        }
        return worst;
    };
    return std::max(directed(a, b), directed(b, a));
}

}  // namespace testing
