#include "lstrack/basis.hpp"

#include <cmath>
#include <numbers>
#include <ostream>

#include "lstrack/error.hpp"

namespace lstrack {

std::size_t count_basis(int order, int dim) {
    require(order >= 0 && dim >= 1, ErrorKind::InvalidArgument, "count_basis needs N >= 0 and d >= 1");
    // C(N+d, d) built incrementally; each partial product is itself a binomial.
    std::size_t c = 1;
    for (int i = 1; i <= dim; ++i) c = c * static_cast<std::size_t>(order + i) / static_cast<std::size_t>(i);
    return c;
}

namespace {

void degree_block(int dim, int remaining, std::vector<int>& cur, int pos, std::vector<std::vector<int>>& out) {
    if (pos == dim - 1) {
        cur[pos] = remaining;
        out.push_back(cur);
        return;
    }
    for (int v = remaining; v >= 0; --v) {
        cur[pos] = v;
        degree_block(dim, remaining - v, cur, pos + 1, out);
    }
}

}  // namespace

MultiIndexSet::MultiIndexSet(int dim, int order) : dim_(dim), order_(order) {
    require(dim >= 1 && order >= 0, ErrorKind::InvalidArgument, "multi-index set needs d >= 1 and N >= 0");
    std::vector<int> cur(static_cast<std::size_t>(dim), 0);
    for (int n = 0; n <= order; ++n) degree_block(dim, n, cur, 0, idx_);
}

std::size_t MultiIndexSet::find(std::span<const int> k) const {
    require(static_cast<int>(k.size()) == dim_, ErrorKind::InvalidArgument, "multi-index has wrong dimension");
    for (std::size_t j = 0; j < idx_.size(); ++j) {
        if (std::equal(k.begin(), k.end(), idx_[j].begin())) return j;
    }
    fail(ErrorKind::InvalidArgument, "multi-index not in the basis set");
}

void legendre_orthonormal_all(int order, double x, std::span<double> out) {
    double p_prev = 1.0;
    double p = x;
    out[0] = 1.0;
    if (order >= 1) out[1] = std::sqrt(3.0) * x;
    for (int n = 1; n < order; ++n) {
        const double next = ((2.0 * n + 1.0) * x * p - n * p_prev) / (n + 1.0);
        p_prev = p;
        p = next;
        out[n + 1] = std::sqrt(2.0 * n + 3.0) * p;
    }
}

double legendre_orthonormal(int n, double x) {
    require(n >= 0, ErrorKind::InvalidArgument, "Legendre degree must be non-negative");
    std::vector<double> v(static_cast<std::size_t>(n) + 1);
    legendre_orthonormal_all(n, x, v);
    return v[static_cast<std::size_t>(n)];
}

namespace {

// Coefficients of P_{n+1} = (A t + B) P_n - C P_{n-1} for Jacobi (a, b).
void jacobi_recurrence(int n, double a, double b, double& A, double& B, double& C) {
    if (n == 0) {
        A = 0.5 * (a + b + 2.0);
        B = 0.5 * (a - b);
        C = 0.0;
        return;
    }
    const double s = 2.0 * n + a + b;
    const double den = 2.0 * (n + 1) * (n + a + b + 1.0) * s;
    A = (s + 1.0) * (s + 2.0) * s / den;
    B = (s + 1.0) * (a * a - b * b) / den;
    C = 2.0 * (n + a) * (n + b) * (s + 2.0) / den;
}

// w^n P_n^{(a,0)}(2x/w - 1) without dividing by w.
double jacobi_homogeneous(int n, double a, double x, double w) {
    double q_prev = 1.0;
    if (n == 0) return q_prev;
    double A, B, C;
    jacobi_recurrence(0, a, 0.0, A, B, C);
    double q = A * (2.0 * x - w) + B * w;
    for (int k = 1; k < n; ++k) {
        jacobi_recurrence(k, a, 0.0, A, B, C);
        const double next = (A * (2.0 * x - w) + B * w) * q - C * w * w * q_prev;
        q_prev = q;
        q = next;
    }
    return q;
}

}  // namespace

double jacobi(int n, double a, double b, double x) {
    require(n >= 0, ErrorKind::InvalidArgument, "Jacobi degree must be non-negative");
    double p_prev = 1.0;
    if (n == 0) return p_prev;
    double A, B, C;
    jacobi_recurrence(0, a, b, A, B, C);
    double p = A * x + B;
    for (int k = 1; k < n; ++k) {
        jacobi_recurrence(k, a, b, A, B, C);
        const double next = (A * x + B) * p - C * p_prev;
        p_prev = p;
        p = next;
    }
    return p;
}

void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
    require(n >= 1, ErrorKind::InvalidArgument, "Gauss-Legendre rule needs n >= 1");
    nodes.assign(static_cast<std::size_t>(n), 0.0);
    weights.assign(static_cast<std::size_t>(n), 0.0);
    for (int i = 0; i < n; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0;
            double p1 = x;
            for (int k = 1; k < n; ++k) {
                const double p2 = ((2.0 * k + 1.0) * x * p1 - k * p0) / (k + 1.0);
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        nodes[i] = -x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
}

double GpcBasis::eval(std::size_t j, std::span<const double> xi) const {
    require(j < size(), ErrorKind::InvalidArgument, "basis index out of range");
    const auto& k = set_[j];
    double v = 1.0;
    for (int i = 0; i < dim(); ++i) v *= legendre_orthonormal(k[i], xi[i]);
    return v;
}

void GpcBasis::eval_all(std::span<const double> xi, std::span<double> out) const {
    const int d = dim();
    const int n = order();
    double table[6][32];
    for (int i = 0; i < d; ++i) legendre_orthonormal_all(n, xi[i], std::span<double>(table[i], n + 1));
    for (std::size_t j = 0; j < size(); ++j) {
        const auto& k = set_[j];
        double v = 1.0;
        for (int i = 0; i < d; ++i) v *= table[i][k[i]];
        out[j] = v;
    }
}

double MeElement::probability() const {
    double p = 1.0;
    for (int k = 0; k < dim(); ++k) p *= 0.5 * width(k);
    return p;
}

bool MeElement::contains(std::span<const double> xi, double slack) const {
    for (int k = 0; k < dim(); ++k) {
        if (xi[k] < lo[k] - slack || xi[k] > hi[k] + slack) return false;
    }
    return true;
}

void MeElement::to_reference(std::span<const double> xi, std::span<double> x) const {
    for (int k = 0; k < dim(); ++k) x[k] = (2.0 * xi[k] - lo[k] - hi[k]) / width(k);
}

void me_eval_all(const MeElement& e, const GpcBasis& basis, std::span<const double> xi, std::span<double> out) {
    double x[6];
    e.to_reference(xi, std::span<double>(x, static_cast<std::size_t>(e.dim())));
    basis.eval_all(std::span<const double>(x, static_cast<std::size_t>(e.dim())), out);
}

// ---------------------------------------------------------------------------
// Simplex polynomials

void simplex_quadrature(int dim, int points_per_dim, std::vector<std::vector<double>>& nodes,
                        std::vector<double>& weights) {
    std::vector<double> gx, gw;
    gauss_legendre(points_per_dim, gx, gw);
    for (auto& x : gx) x = 0.5 * (x + 1.0);
    for (auto& w : gw) w *= 0.5;
    double factorial = 1.0;
    for (int i = 2; i <= dim; ++i) factorial *= i;

    nodes.clear();
    weights.clear();
    std::vector<int> idx(static_cast<std::size_t>(dim), 0);
    std::vector<double> lambda(static_cast<std::size_t>(dim));
    for (;;) {
        double rest = 1.0;
        double w = factorial;
        for (int j = 0; j < dim; ++j) {
            const double u = gx[idx[j]];
            lambda[j] = rest * u;
            w *= gw[idx[j]] * rest;  // collapse Jacobian d lambda_j / d u_j
            rest *= 1.0 - u;
        }
        nodes.push_back(lambda);
        weights.push_back(w);
        int j = dim - 1;
        while (j >= 0 && ++idx[j] == points_per_dim) idx[j--] = 0;
        if (j < 0) break;
    }
}

double simplex_inverse_norm_closed_form(std::span<const int> alpha) {
    const int d = static_cast<int>(alpha.size());
    double prod = 1.0;
    double factorial = 1.0;
    int tail = 0;
    for (int j = d; j >= 1; --j) {
        tail += alpha[j - 1];
        prod *= 2.0 * tail + d - j + 1;
        factorial *= j;
    }
    return std::sqrt(prod / factorial);
}

SimplexBasis::SimplexBasis(const std::vector<std::vector<double>>& vertices, int order) {
    require(!vertices.empty(), ErrorKind::InvalidArgument, "simplex needs vertices");
    const int d = static_cast<int>(vertices.size()) - 1;
    require(d >= 1 && d <= 6, ErrorKind::InvalidArgument, "simplex dimension must lie in [1, 6]");
    for (const auto& v : vertices) {
        require(static_cast<int>(v.size()) == d, ErrorKind::InvalidArgument, "simplex needs d+1 vertices in R^d");
    }
    set_ = MultiIndexSet(d, order);
    apex_ = Eigen::Map<const Eigen::VectorXd>(vertices[d].data(), d);
    T_.resize(d, d);
    double scale = 0.0;
    for (int j = 0; j < d; ++j) {
        for (int i = 0; i < d; ++i) {
            T_(i, j) = vertices[j][i] - vertices[d][i];
            scale = std::max(scale, std::abs(T_(i, j)));
        }
    }
    const double det = T_.determinant();
    require(std::abs(det) > 1e-12 * std::pow(scale, d), ErrorKind::DegenerateGeometry,
            "simplex vertices are affinely dependent");
    Tinv_ = T_.inverse();
    double factorial = 1.0;
    for (int i = 2; i <= d; ++i) factorial *= i;
    probability_ = std::abs(det) / (std::pow(2.0, d) * factorial);

    std::vector<std::vector<double>> qn;
    std::vector<double> qw;
    simplex_quadrature(d, order + d + 1, qn, qw);
    inv_norm_.assign(size(), 0.0);
    for (std::size_t j = 0; j < size(); ++j) {
        double s = 0.0;
        for (std::size_t q = 0; q < qn.size(); ++q) {
            const double v = raw(j, qn[q]);
            s += qw[q] * v * v;
        }
        inv_norm_[j] = 1.0 / std::sqrt(s);
    }
}

void SimplexBasis::to_lambda(std::span<const double> xi, std::span<double> lambda) const {
    const int d = dim();
    for (int i = 0; i < d; ++i) {
        double s = 0.0;
        for (int k = 0; k < d; ++k) s += Tinv_(i, k) * (xi[k] - apex_[k]);
        lambda[i] = s;
    }
}

void SimplexBasis::from_lambda(std::span<const double> lambda, std::span<double> xi) const {
    const int d = dim();
    for (int i = 0; i < d; ++i) {
        double s = apex_[i];
        for (int k = 0; k < d; ++k) s += T_(i, k) * lambda[k];
        xi[i] = s;
    }
}

double SimplexBasis::raw(std::size_t j, std::span<const double> lambda) const {
    const auto& alpha = set_[j];
    const int d = dim();
    double v = 1.0;
    double partial = 0.0;  // lambda_1 + ... + lambda_{j-1}
    for (int i = 0; i < d; ++i) {
        int tail = 0;
        for (int k = i + 1; k < d; ++k) tail += alpha[k];
        const double a = 2.0 * tail + d - (i + 1);
        v *= jacobi_homogeneous(alpha[i], a, lambda[i], 1.0 - partial);
        partial += lambda[i];
    }
    return v;
}

double SimplexBasis::eval(std::size_t j, std::span<const double> xi) const {
    double lambda[6];
    const std::span<double> l(lambda, static_cast<std::size_t>(dim()));
    to_lambda(xi, l);
    return inv_norm_[j] * raw(j, l);
}

void SimplexBasis::eval_all(std::span<const double> xi, std::span<double> out) const {
    double lambda[6];
    const std::span<double> l(lambda, static_cast<std::size_t>(dim()));
    to_lambda(xi, l);
    for (std::size_t j = 0; j < size(); ++j) out[j] = inv_norm_[j] * raw(j, l);
}

// ---------------------------------------------------------------------------
// Frames

std::vector<double> trapezoid_weights(const StochasticGrid& grid) {
    const int d = grid.dim();
    std::vector<double> w(grid.size());
    std::vector<int> mi(static_cast<std::size_t>(d));
    const double rho = grid.domain().density();
    for (std::size_t i = 0; i < grid.size(); ++i) {
        grid.multi_index(i, mi);
        double v = rho;
        for (int k = 0; k < d; ++k) {
            const bool end = mi[k] == 0 || mi[k] == grid.points(k) - 1;
            v *= end ? 0.5 * grid.spacing(k) : grid.spacing(k);
        }
        w[i] = v;
    }
    return w;
}

void FrameSet::eval_all(std::span<const double> xi, int label, std::span<double> out) const {
    const std::size_t p = gpc.size();
    std::fill(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(2 * p), 0.0);
    gpc.eval_all(xi, out.subspan(label >= 0 ? 0 : p, p));
}

FrameSet build_frames(std::span<const std::int8_t> labels, const GpcBasis& gpc, const StochasticGrid& grid) {
    require(labels.size() == grid.size(), ErrorKind::InvalidArgument, "classifier labels do not cover the grid");
    require(gpc.dim() == grid.dim(), ErrorKind::InvalidArgument, "basis dimension does not match the grid");
    FrameSet f;
    f.gpc = gpc;
    f.labels.assign(labels.begin(), labels.end());
    const std::size_t p = gpc.size();
    std::size_t plus = 0;
    for (auto l : labels) plus += l >= 0 ? 1 : 0;
    require(plus > 0 && plus < labels.size(), ErrorKind::EmptyRegion,
            "classifier leaves one region without grid points");

    const auto w = trapezoid_weights(grid);
    f.gram = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(2 * p), static_cast<Eigen::Index>(2 * p));
    f.expectation = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(2 * p));
    Eigen::VectorXd psi(static_cast<Eigen::Index>(p));
    std::vector<double> xi(static_cast<std::size_t>(grid.dim()));
    for (std::size_t i = 0; i < grid.size(); ++i) {
        grid.point(i, xi);
        gpc.eval_all(xi, std::span<double>(psi.data(), p));
        const auto off = static_cast<Eigen::Index>(labels[i] >= 0 ? 0 : p);
        const auto np = static_cast<Eigen::Index>(p);
        f.gram.block(off, off, np, np).selfadjointView<Eigen::Lower>().rankUpdate(psi, w[i]);
        f.expectation.segment(off, np) += w[i] * psi;
    }
    f.gram = f.gram.selfadjointView<Eigen::Lower>();
    return f;
}

std::pair<double, double> frame_statistics(const Eigen::VectorXd& coeffs, const FrameSet& frames) {
    require(static_cast<std::size_t>(coeffs.size()) == frames.size(), ErrorKind::InvalidArgument,
            "coefficient vector does not match the frame count");
    const double mean = coeffs.dot(frames.expectation);
    const double second = coeffs.dot(frames.gram * coeffs);
    return {mean, second - mean * mean};
}

std::pair<double, double> frame_bounds(const FrameSet& frames) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(frames.gram, Eigen::EigenvaluesOnly);
    return {es.eigenvalues().minCoeff(), es.eigenvalues().maxCoeff()};
}

void write_coefficients_csv(std::ostream& os, const MultiIndexSet& set, const Eigen::VectorXd& coeffs) {
    for (int k = 0; k < set.dim(); ++k) os << 'k' << (k + 1) << ',';
    os << "coefficient\n";
    os.precision(17);
    for (std::size_t j = 0; j < static_cast<std::size_t>(coeffs.size()); ++j) {
        const auto& k = set[j % set.size()];
        for (int v : k) os << v << ',';
        os << coeffs[static_cast<Eigen::Index>(j)] << '\n';
    }
}

}  // namespace lstrack
