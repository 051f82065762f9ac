#include "lstrack/regression.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace lstrack {

RegressionReport solve_ols_tsvd(const Eigen::MatrixXd& psi, const Eigen::VectorXd& u, double eps_svd) {
    require(psi.rows() == u.size() && psi.rows() >= 1 && psi.cols() >= 1, ErrorKind::InvalidArgument,
            "design matrix and data vector sizes do not match");
    require(psi.allFinite() && u.allFinite(), ErrorKind::InvalidArgument, "non-finite regression input");
    const double scale = 1.0 / std::sqrt(static_cast<double>(psi.rows()));
    Eigen::BDCSVD<Eigen::MatrixXd> svd(psi * scale, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& s = svd.singularValues();
    RegressionReport rep;
    Eigen::VectorXd inv = Eigen::VectorXd::Zero(s.size());
    for (Eigen::Index i = 0; i < s.size(); ++i) {
        if (s[i] * s[i] > eps_svd) {
            inv[i] = 1.0 / s[i];
            ++rep.rank;
        } else {
            ++rep.truncated;
        }
    }
    require(rep.rank > 0, ErrorKind::RankZero, "all singular values fall below the truncation tolerance");
    rep.coeffs = svd.matrixV() * (inv.asDiagonal() * (svd.matrixU().transpose() * (u * scale)));
    rep.residual = u - psi * rep.coeffs;
    return rep;
}

namespace {

// Vertex solution of min ||u - Q y||_1 interpolating r rows chosen by smallest
// |x_i|, plus a dual certificate test.
struct Polish {
    Eigen::VectorXd g;
    bool certified = false;
};

Polish polish(const Eigen::MatrixXd& Q, const Eigen::VectorXd& u, const Eigen::VectorXd& x) {
    const Eigen::Index n = Q.rows();
    const Eigen::Index r = Q.cols();
    Polish out;
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index a, Eigen::Index b) { return std::abs(x[a]) < std::abs(x[b]); });

    std::vector<Eigen::Index> rows;
    Eigen::MatrixXd ortho(r, r);
    for (Eigen::Index i : order) {
        if (static_cast<Eigen::Index>(rows.size()) == r) break;
        Eigen::VectorXd q = Q.row(i).transpose();
        const double norm0 = q.norm();
        if (norm0 == 0.0) continue;
        for (std::size_t k = 0; k < rows.size(); ++k) {
            const auto col = ortho.col(static_cast<Eigen::Index>(k));
            q -= col.dot(q) * col;
        }
        const double norm = q.norm();
        if (norm <= 1e-8 * norm0) continue;
        ortho.col(static_cast<Eigen::Index>(rows.size())) = q / norm;
        rows.push_back(i);
    }
    if (static_cast<Eigen::Index>(rows.size()) < r) return out;

    Eigen::MatrixXd qs(r, r);
    Eigen::VectorXd us(r);
    for (Eigen::Index k = 0; k < r; ++k) {
        qs.row(k) = Q.row(rows[static_cast<std::size_t>(k)]);
        us[k] = u[rows[static_cast<std::size_t>(k)]];
    }
    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(qs);
    const Eigen::VectorXd y = lu.solve(us);
    out.g = u - Q * y;
    std::vector<char> in_s(static_cast<std::size_t>(n), 0);
    for (Eigen::Index i : rows) {
        out.g[i] = 0.0;
        in_s[static_cast<std::size_t>(i)] = 1;
    }
    const double tiny = 1e-12 * std::max(1.0, u.cwiseAbs().maxCoeff());
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(r);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (in_s[static_cast<std::size_t>(i)] || std::abs(out.g[i]) <= tiny) continue;
        rhs -= (out.g[i] > 0.0 ? 1.0 : -1.0) * Q.row(i).transpose();
    }
    const Eigen::VectorXd v = lu.transpose().solve(rhs);
    out.certified = v.allFinite() && v.cwiseAbs().maxCoeff() <= 1.0 + 1e-9;
    return out;
}

double soft(double v, double t) { return v > t ? v - t : (v < -t ? v + t : 0.0); }

}  // namespace

RegressionReport solve_lad(const Eigen::MatrixXd& psi, const Eigen::VectorXd& u, const LadOptions& opts) {
    require(psi.rows() == u.size() && psi.rows() >= 1 && psi.cols() >= 1, ErrorKind::InvalidArgument,
            "design matrix and data vector sizes do not match");
    require(psi.allFinite() && u.allFinite(), ErrorKind::InvalidArgument, "non-finite regression input");
    const Eigen::Index n = psi.rows();

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(psi);
    qr.setThreshold(opts.eps_qr);
    const Eigen::Index r = qr.rank();
    require(r > 0, ErrorKind::RankZero, "design matrix has numerical rank zero");
    require(n > r, ErrorKind::NoNullSpace, "LAD needs more evaluations than the design rank");
    const Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(n, r);

    auto project = [&](const Eigen::VectorXd& v) -> Eigen::VectorXd {
        return u + Q * (Q.transpose() * (v - u));
    };

    RegressionReport rep;
    rep.rank = static_cast<int>(r);
    Eigen::VectorXd x = project(Eigen::VectorXd::Zero(n));  // OLS residual
    const double mean_abs = x.cwiseAbs().mean();
    const double data_scale = std::max(u.cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());

    Eigen::VectorXd best = x;
    double best_obj = x.lpNorm<1>();
    bool done = mean_abs <= 1e-14 * data_scale;
    bool converged = done;
    rep.certified = done;

    if (!done) {
        double rho = 1.0 / mean_abs;
        const double alpha = opts.relaxation;
        Eigen::VectorXd g = x;
        Eigen::VectorXd w = Eigen::VectorXd::Zero(n);
        Eigen::VectorXd g_old(n);
        Eigen::VectorXd xh(n);
        const double sqrt_n = std::sqrt(static_cast<double>(n));
        for (int it = 1; it <= opts.max_iter; ++it) {
            rep.iterations = it;
            x = project(g - w);
            xh = alpha * x + (1.0 - alpha) * g;
            g_old = g;
            const double t = 1.0 / rho;
            for (Eigen::Index i = 0; i < n; ++i) g[i] = soft(xh[i] + w[i], t);
            w += xh - g;

            const double obj = x.lpNorm<1>();
            if (obj < best_obj) {
                best_obj = obj;
                best = x;
            }
            const double r_pri = (x - g).norm();
            const double r_dual = rho * (g - g_old).norm();
            const double eps_pri = opts.abs_tol * sqrt_n * data_scale + opts.rel_tol * std::max(x.norm(), g.norm());
            const double eps_dual = opts.abs_tol * sqrt_n * data_scale + opts.rel_tol * rho * w.norm();
            if (r_pri <= eps_pri && r_dual <= eps_dual) {
                converged = true;
                break;
            }
            if (it % opts.polish_every == 0) {
                const auto p = polish(Q, u, x);
                if (p.certified) {
                    best = p.g;
                    best_obj = p.g.lpNorm<1>();
                    rep.certified = true;
                    converged = true;
                    break;
                }
            }
            if (it % 10 == 0) {
                if (r_pri > 10.0 * r_dual) {
                    rho *= 2.0;
                    w *= 0.5;
                } else if (r_dual > 10.0 * r_pri) {
                    rho *= 0.5;
                    w *= 2.0;
                }
            }
        }
        if (!rep.certified) {
            const auto p = polish(Q, u, converged ? x : best);
            if (p.certified || (p.g.size() == n && p.g.lpNorm<1>() <= best_obj)) {
                best = p.g;
                best_obj = p.g.lpNorm<1>();
                rep.certified = p.certified;
            } else if (converged && x.lpNorm<1>() <= best_obj) {
                best = x;
            }
            converged = converged || rep.certified;
        }
    }

    rep.g = best;
    const Eigen::VectorXd target = u - rep.g;
    rep.coeffs = psi.completeOrthogonalDecomposition().solve(target);
    const Eigen::VectorXd fit = psi * rep.coeffs;
    rep.projection_residual = (fit - target).norm();
    rep.residual = u - fit;
    if (!converged) {
        throw RegressionFailure("basis pursuit did not converge in " + std::to_string(opts.max_iter) + " iterations",
                                rep);
    }
    return rep;
}

std::vector<std::size_t> repair_misclassified(const RegressionReport& report, double jump_floor) {
    std::vector<std::size_t> out;
    for (Eigen::Index i = 0; i < report.residual.size(); ++i) {
        if (std::abs(report.residual[i]) > jump_floor) out.push_back(static_cast<std::size_t>(i));
    }
    return out;
}

double estimate_jump_floor(const StochasticGrid& grid, std::span<const double> values,
                           std::span<const std::int8_t> labels) {
    require(values.size() == grid.size() && labels.size() == grid.size(), ErrorKind::InvalidArgument,
            "values and labels must cover the grid");
    double best = std::numeric_limits<double>::infinity();
    std::vector<int> mi(static_cast<std::size_t>(grid.dim()));
    for (std::size_t i = 0; i < grid.size(); ++i) {
        grid.multi_index(i, mi);
        for (int k = 0; k < grid.dim(); ++k) {
            if (mi[k] + 1 >= grid.points(k)) continue;
            const std::size_t j = i + grid.stride(k);
            if ((labels[i] >= 0) == (labels[j] >= 0)) continue;
            best = std::min(best, std::abs(values[i] - values[j]));
        }
    }
    return std::isfinite(best) ? 0.5 * best : 0.0;
}

}  // namespace lstrack
