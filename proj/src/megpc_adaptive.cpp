#include "lstrack/megpc_adaptive.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "lstrack/error.hpp"
#include "lstrack/parallel.hpp"
#include "lstrack/regression.hpp"

namespace lstrack {

namespace {

int degree(const std::vector<int>& k) {
    int s = 0;
    for (int v : k) s += v;
    return s;
}

double top_energy(const Eigen::VectorXd& c, const GpcBasis& basis) {
    double s = 0.0;
    for (std::size_t j = 0; j < basis.size(); ++j) {
        if (degree(basis.indices()[j]) == basis.order()) s += c[j] * c[j];
    }
    return s;
}

}  // namespace

double local_decay(const Eigen::VectorXd& coeffs, const GpcBasis& basis) {
    require(static_cast<std::size_t>(coeffs.size()) == basis.size(), ErrorKind::InvalidArgument,
            "coefficient count does not match the basis");
    double total = 0.0;
    for (std::size_t j = 1; j < basis.size(); ++j) total += coeffs[j] * coeffs[j];
    if (total == 0.0) return 0.0;
    return top_energy(coeffs, basis) / total;
}

bool should_split(double eta, double prob, double alpha, double theta1) {
    return std::pow(eta, alpha) * prob >= theta1;
}

std::vector<double> dimension_sensitivity(const Eigen::VectorXd& coeffs, const GpcBasis& basis) {
    require(basis.order() >= 1, ErrorKind::InvalidArgument, "sensitivity needs N >= 1");
    const double top = top_energy(coeffs, basis);
    std::vector<double> r(static_cast<std::size_t>(basis.dim()), 0.0);
    if (top == 0.0) return r;
    std::vector<int> k(static_cast<std::size_t>(basis.dim()), 0);
    for (int i = 0; i < basis.dim(); ++i) {
        k.assign(k.size(), 0);
        k[i] = basis.order();
        const double c = coeffs[basis.indices().find(k)];
        r[i] = c * c / top;
    }
    return r;
}

std::vector<int> split_dimensions(const Eigen::VectorXd& coeffs, const GpcBasis& basis, double theta2,
                                  const MeElement& element) {
    const auto r = dimension_sensitivity(coeffs, basis);
    const double mx = *std::max_element(r.begin(), r.end());
    std::vector<int> dims;
    if (mx > 0.0) {
        for (int i = 0; i < basis.dim(); ++i) {
            if (r[i] >= theta2 * mx) dims.push_back(i);
        }
        return dims;
    }
    int widest = 0;
    for (int i = 1; i < element.dim(); ++i) {
        if (element.width(i) > element.width(widest)) widest = i;
    }
    return {widest};
}

double MegpcResult::evaluate(std::span<const double> xi) const {
    require(!nodes.empty(), ErrorKind::MissingData, "empty ME-gPC tree");
    int n = 0;
    while (!nodes[n].children.empty()) {
        int next = -1;
        for (int c : nodes[n].children) {
            if (nodes[c].element.contains(xi)) {
                next = c;
                break;
            }
        }
        require(next >= 0, ErrorKind::OutOfDomain, "point outside the ME-gPC tree");
        n = next;
    }
    std::vector<double> psi(basis.size());
    me_eval_all(nodes[n].element, basis, xi, psi);
    double v = 0.0;
    for (std::size_t j = 0; j < psi.size(); ++j) v += nodes[n].coeffs[j] * psi[j];
    return v;
}

MegpcResult run_adaptive_megpc(const ForwardModel& model, const MegpcConfig& cfg) {
    require(cfg.order >= 1, ErrorKind::InvalidArgument, "ME-gPC needs N >= 1");
    require(cfg.alpha > 0.0 && cfg.alpha < 1.0, ErrorKind::InvalidArgument, "alpha must lie in (0, 1)");
    require(cfg.theta2 > 0.0 && cfg.theta2 < 1.0, ErrorKind::InvalidArgument, "theta2 must lie in (0, 1)");
    require(cfg.theta1 > 0.0, ErrorKind::InvalidArgument, "theta1 must be positive");
    const int d = model.dim();

    MegpcResult res;
    res.basis = GpcBasis(d, cfg.order);
    const std::size_t P = res.basis.size();

    // Tensor Gauss rule on the reference element and the design matrix, which
    // is the same for every element since the basis is mapped affinely.
    std::vector<double> gx, gw;
    if (cfg.rule == MegpcRule::Gauss) {
        gauss_legendre(cfg.order + 2, gx, gw);
    } else {
        for (int j = 0; j <= cfg.order; ++j) gx.push_back(-1.0 + 2.0 * j / cfg.order);
    }
    std::size_t q = 1;
    for (int k = 0; k < d; ++k) q *= gx.size();
    std::vector<std::vector<double>> ref(q, std::vector<double>(static_cast<std::size_t>(d)));
    Eigen::MatrixXd psi(static_cast<Eigen::Index>(q), static_cast<Eigen::Index>(P));
    std::vector<double> row(P);
    for (std::size_t i = 0; i < q; ++i) {
        std::size_t rest = i;
        for (int k = d - 1; k >= 0; --k) {
            ref[i][k] = gx[rest % gx.size()];
            rest /= gx.size();
        }
        res.basis.eval_all(ref[i], row);
        for (std::size_t j = 0; j < P; ++j) psi(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = row[j];
    }

    MegpcNode root;
    root.element.lo.assign(static_cast<std::size_t>(d), -1.0);
    root.element.hi.assign(static_cast<std::size_t>(d), 1.0);
    res.nodes.push_back(root);
    std::vector<int> pending{0};
    std::map<std::vector<double>, std::size_t> index;
    std::vector<double> samples;
    bool budget_hit = false;

    while (!pending.empty()) {
        ++res.rounds;
        // Unique new sample points of this round; shared element faces are
        // evaluated once under the uniform rule.
        std::vector<std::vector<std::size_t>> slot(pending.size(), std::vector<std::size_t>(q));
        std::vector<std::vector<double>> fresh;
        std::vector<double> xi(static_cast<std::size_t>(d));
        for (std::size_t t = 0; t < pending.size(); ++t) {
            const MeElement& e = res.nodes[pending[t]].element;
            for (std::size_t i = 0; i < q; ++i) {
                for (int k = 0; k < d; ++k) xi[k] = e.lo[k] + 0.5 * (ref[i][k] + 1.0) * e.width(k);
                const auto [it, inserted] = index.try_emplace(xi, samples.size() + fresh.size());
                if (inserted) fresh.push_back(xi);
                slot[t][i] = it->second;
            }
        }
        const std::size_t base = samples.size();
        samples.resize(base + fresh.size());
        parallel_for(fresh.size(), cfg.workers, [&](std::size_t i) { samples[base + i] = model.evaluate(fresh[i]); });
        res.n_ev += fresh.size();
        parallel_for(pending.size(), cfg.workers, [&](std::size_t t) {
            MegpcNode& node = res.nodes[pending[t]];
            Eigen::VectorXd u(static_cast<Eigen::Index>(q));
            for (std::size_t i = 0; i < q; ++i) u[static_cast<Eigen::Index>(i)] = samples[slot[t][i]];
            node.coeffs = solve_ols_tsvd(psi, u).coeffs;
            node.eta = local_decay(node.coeffs, res.basis);
        });

        std::vector<int> next;
        std::size_t leaves = 0;
        for (const auto& n : res.nodes) leaves += n.children.empty() ? 1 : 0;
        for (int id : pending) {
            const MeElement e = res.nodes[id].element;
            if (!should_split(res.nodes[id].eta, e.probability(), cfg.alpha, cfg.theta1)) continue;
            const auto dims = split_dimensions(res.nodes[id].coeffs, res.basis, cfg.theta2, e);
            const std::size_t nchild = std::size_t{1} << dims.size();
            if (leaves - 1 + nchild > cfg.max_elements) {
                budget_hit = true;
                continue;
            }
            leaves += nchild - 1;
            for (std::size_t c = 0; c < nchild; ++c) {
                MegpcNode child;
                child.element = e;
                for (std::size_t b = 0; b < dims.size(); ++b) {
                    const int k = dims[b];
                    const double mid = 0.5 * (e.lo[k] + e.hi[k]);
                    if ((c >> b) & 1U) {
                        child.element.lo[k] = mid;
                    } else {
                        child.element.hi[k] = mid;
                    }
                }
                res.nodes[id].children.push_back(static_cast<int>(res.nodes.size()));
                next.push_back(static_cast<int>(res.nodes.size()));
                res.nodes.push_back(std::move(child));
            }
            res.nodes[id].coeffs.resize(0);
        }
        pending = std::move(next);
    }
    if (budget_hit) {
        res.warnings.push_back("element budget of " + std::to_string(cfg.max_elements) +
                               " reached; some flagged elements were not split");
    }

    double second = 0.0;
    for (std::size_t i = 0; i < res.nodes.size(); ++i) {
        const auto& n = res.nodes[i];
        if (!n.children.empty()) continue;
        res.leaves.push_back(static_cast<int>(i));
        const double p = n.element.probability();
        res.mean += p * n.coeffs[0];
        second += p * n.coeffs.squaredNorm();
    }
    res.variance = std::max(0.0, second - res.mean * res.mean);
    return res;
}

}  // namespace lstrack
