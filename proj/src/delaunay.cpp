#include "lstrack/delaunay.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <Eigen/Dense>

#include "lstrack/error.hpp"

namespace lstrack {

namespace {

using Facet = std::array<int, 3>;

Facet facet_key(const std::array<int, 4>& v, int dim, int skip) {
    Facet f{-1, -1, -1};
    int k = 0;
    for (int i = 0; i <= dim; ++i) {
        if (i != skip) f[k++] = v[i];
    }
    std::sort(f.begin(), f.begin() + dim);
    return f;
}

}  // namespace

double Delaunay::orientation(int dim, const std::array<double, 3>* const* pts) {
    if (dim == 2) {
        const auto& a = *pts[0];
        const auto& b = *pts[1];
        const auto& c = *pts[2];
        return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
    }
    Eigen::Matrix3d m;
    for (int j = 0; j < 3; ++j) {
        for (int i = 0; i < 3; ++i) m(i, j) = (*pts[j + 1])[i] - (*pts[0])[i];
    }
    return m.determinant();
}

Delaunay::Delaunay(int dim, std::vector<std::array<double, 3>> vertices,
                   const std::vector<std::array<int, 4>>& simplices)
    : dim_(dim), vertices_(std::move(vertices)) {
    require(dim == 2 || dim == 3, ErrorKind::UnsupportedConfiguration, "Delaunay supports d = 2 or 3 only");
    scale_ = 0.0;
    for (const auto& v : vertices_) {
        for (int i = 0; i < dim_; ++i) scale_ = std::max(scale_, std::abs(v[i]));
    }
    scale_ = std::max(scale_, 1e-300);
    for (const auto& s : simplices) add_cell(s);
}

void Delaunay::add_cell(std::array<int, 4> v) {
    const std::array<double, 3>* pts[4];
    for (int i = 0; i <= dim_; ++i) pts[i] = &vertices_[v[i]];
    double vol = orientation(dim_, pts);
    if (vol < 0.0) {
        std::swap(v[0], v[1]);
        std::swap(pts[0], pts[1]);
        vol = -vol;
    }
    require(vol > 1e-14 * std::pow(scale_, dim_), ErrorKind::DegenerateGeometry, "degenerate simplex in mesh");
    Eigen::Matrix3d A = Eigen::Matrix3d::Identity();
    Eigen::Vector3d b = Eigen::Vector3d::Zero();
    for (int r = 0; r < dim_; ++r) {
        double rhs = 0.0;
        for (int c = 0; c < dim_; ++c) {
            const double d = (*pts[r + 1])[c] - (*pts[0])[c];
            A(r, c) = 2.0 * d;
            rhs += d * d;
        }
        b[r] = rhs;
    }
    const Eigen::VectorXd rel = A.topLeftCorner(dim_, dim_).partialPivLu().solve(b.head(dim_));
    Cell cell{v, {0, 0, 0}, 0.0, true};
    double r2 = 0.0;
    for (int c = 0; c < dim_; ++c) {
        cell.center[c] = (*pts[0])[c] + rel[c];
        r2 += rel[c] * rel[c];
    }
    cell.radius2 = r2;
    cells_.push_back(cell);
}

bool Delaunay::strictly_inside_sphere(const Cell& c, const std::array<double, 3>& p) const {
    double d2 = 0.0;
    for (int i = 0; i < dim_; ++i) d2 += (p[i] - c.center[i]) * (p[i] - c.center[i]);
    return d2 < c.radius2 * (1.0 - 1e-10);
}

bool Delaunay::try_insert(const std::array<double, 3>& p, int index) {
    std::vector<int> cand;
    for (int c = 0; c < static_cast<int>(cells_.size()); ++c) {
        if (cells_[c].alive && strictly_inside_sphere(cells_[c], p)) cand.push_back(c);
    }
    // Seed: a candidate containing p.
    int seed = -1;
    const double tol = 1e-12 * std::pow(scale_, dim_);
    for (int c : cand) {
        bool inside = true;
        for (int f = 0; f <= dim_ && inside; ++f) {
            const std::array<double, 3>* pts[4];
            for (int i = 0; i <= dim_; ++i) pts[i] = i == f ? &p : &vertices_[cells_[c].v[i]];
            inside = orientation(dim_, pts) >= -tol;
        }
        if (inside) {
            seed = c;
            break;
        }
    }
    if (seed < 0) return false;

    std::map<Facet, std::vector<int>> facets;
    for (int c : cand) {
        for (int f = 0; f <= dim_; ++f) facets[facet_key(cells_[c].v, dim_, f)].push_back(c);
    }
    std::vector<char> in_cavity(cells_.size(), 0);
    std::vector<int> stack{seed};
    std::vector<int> cavity;
    in_cavity[seed] = 1;
    while (!stack.empty()) {
        const int c = stack.back();
        stack.pop_back();
        cavity.push_back(c);
        for (int f = 0; f <= dim_; ++f) {
            for (int o : facets[facet_key(cells_[c].v, dim_, f)]) {
                if (!in_cavity[o]) {
                    in_cavity[o] = 1;
                    stack.push_back(o);
                }
            }
        }
    }

    double removed = 0.0;
    double added = 0.0;
    std::vector<std::array<int, 4>> fresh;
    for (int c : cavity) {
        const std::array<double, 3>* pts[4];
        for (int i = 0; i <= dim_; ++i) pts[i] = &vertices_[cells_[c].v[i]];
        removed += orientation(dim_, pts);
        for (int f = 0; f <= dim_; ++f) {
            int shared = 0;
            for (int o : facets[facet_key(cells_[c].v, dim_, f)]) shared += in_cavity[o] ? 1 : 0;
            if (shared > 1) continue;
            std::array<int, 4> v = cells_[c].v;
            v[f] = index;
            pts[f] = &p;
            const double vol = orientation(dim_, pts);
            pts[f] = &vertices_[cells_[c].v[f]];
            if (vol < -tol) return false;  // cavity not star-shaped
            if (vol <= tol) continue;      // p lies on this facet (region boundary)
            added += vol;
            fresh.push_back(v);
        }
    }
    if (std::abs(added - removed) > 1e-9 * std::max(removed, tol)) return false;
    for (int c : cavity) cells_[c].alive = false;
    for (const auto& v : fresh) add_cell(v);
    return true;
}

int Delaunay::insert(std::span<const double> p) {
    std::array<double, 3> q{0, 0, 0};
    for (int i = 0; i < dim_; ++i) q[i] = p[i];
    const int index = static_cast<int>(vertices_.size());
    vertices_.push_back(q);
    for (int attempt = 0; attempt < 4; ++attempt) {
        if (try_insert(vertices_[index], index)) return index;
        // Small deterministic perturbation, then retry.
        const double eps = 1e-9 * scale_ * (attempt + 1);
        for (int i = 0; i < dim_; ++i) {
            const double dir = (((index * 7 + i * 13 + attempt * 5) % 3) - 1.0);
            vertices_[index][i] = q[i] + eps * (dir == 0.0 ? -std::copysign(1.0, q[i]) : dir);
        }
    }
    vertices_.pop_back();
    fail(ErrorKind::DegenerateGeometry, "could not insert a Delaunay vertex (degenerate configuration)");
}

std::vector<std::array<int, 4>> Delaunay::simplices() const {
    std::vector<std::array<int, 4>> out;
    for (const auto& c : cells_) {
        if (c.alive) out.push_back(c.v);
    }
    return out;
}

}  // namespace lstrack
