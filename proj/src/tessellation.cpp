#include "lstrack/tessellation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <set>
#include <unordered_map>

#include <Eigen/Dense>

#include "lstrack/delaunay.hpp"
#include "lstrack/error.hpp"

namespace lstrack {

namespace {

constexpr double kBaryTol = 1e-12;

double factorial(int n) {
    double f = 1.0;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
}

Eigen::MatrixXd vertex_matrix(const SimplexMesh& mesh, std::size_t s) {
    const int d = mesh.dim;
    const auto& idx = mesh.simplices[s];
    const auto& apex = mesh.vertices[idx[d]];
    Eigen::MatrixXd T(d, d);
    for (int j = 0; j < d; ++j) {
        for (int i = 0; i < d; ++i) T(i, j) = mesh.vertices[idx[j]][i] - apex[i];
    }
    return T;
}

// Hash grid for minimum-separation queries.
class PointHash {
public:
    PointHash(int dim, double cell) : dim_(dim), cell_(cell) {}

    void add(std::span<const double> p) {
        const std::size_t id = pts_.size() / dim_;
        pts_.insert(pts_.end(), p.begin(), p.end());
        map_[key(coords(p))].push_back(id);
    }

    // True when some stored point lies within distance r (r <= cell).
    bool any_within(std::span<const double> p, double r) const {
        const auto c = coords(p);
        std::array<long, 3> n{};
        const int total = dim_ == 2 ? 9 : 27;
        for (int code = 0; code < total; ++code) {
            int rest = code;
            for (int k = 0; k < dim_; ++k) {
                n[k] = c[k] + (rest % 3) - 1;
                rest /= 3;
            }
            const auto it = map_.find(key(n));
            if (it == map_.end()) continue;
            for (std::size_t id : it->second) {
                double d2 = 0.0;
                for (int k = 0; k < dim_; ++k) {
                    const double t = pts_[id * dim_ + k] - p[k];
                    d2 += t * t;
                }
                if (d2 <= r * r) return true;
            }
        }
        return false;
    }

private:
    std::array<long, 3> coords(std::span<const double> p) const {
        std::array<long, 3> c{};
        for (int k = 0; k < dim_; ++k) c[k] = static_cast<long>(std::floor(p[k] / cell_));
        return c;
    }
    static long long key(const std::array<long, 3>& c) {
        return ((c[0] + (1L << 20)) << 42) ^ ((c[1] + (1L << 20)) << 21) ^ (c[2] + (1L << 20));
    }

    int dim_;
    double cell_;
    std::vector<double> pts_;
    std::unordered_map<long long, std::vector<std::size_t>> map_;
};

double phi_at(const LevelSetField& field, std::span<const double> xi) {
    double p[6];
    for (std::size_t k = 0; k < xi.size(); ++k) p[k] = std::clamp(xi[k], -1.0, 1.0);
    return interpolate_multilinear(field.grid, field.phi, std::span<const double>(p, xi.size()));
}

}  // namespace

double SimplexMesh::volume(std::size_t s) const {
    return std::abs(vertex_matrix(*this, s).determinant()) / factorial(dim);
}

std::vector<std::vector<double>> SimplexMesh::simplex_vertices(std::size_t s) const {
    std::vector<std::vector<double>> out;
    for (int v : simplices[s]) out.push_back(vertices[v]);
    return out;
}

void SimplexMesh::barycentric(std::size_t s, std::span<const double> xi, std::span<double> out) const {
    const Eigen::MatrixXd T = vertex_matrix(*this, s);
    const auto& apex = vertices[simplices[s][dim]];
    Eigen::VectorXd rhs(dim);
    for (int i = 0; i < dim; ++i) rhs[i] = xi[i] - apex[i];
    const Eigen::VectorXd lam = T.partialPivLu().solve(rhs);
    double sum = 0.0;
    for (int i = 0; i < dim; ++i) {
        out[i] = lam[i];
        sum += lam[i];
    }
    out[dim] = 1.0 - sum;
}

SimplexMesh initial_mesh(int dim, int coarse_n) {
    require(coarse_n >= 1, ErrorKind::InvalidArgument, "coarse_n must be >= 1");
    require(dim >= 1 && dim <= 6, ErrorKind::InvalidArgument, "dimension must lie in [1, 6]");
    SimplexMesh mesh;
    mesh.dim = dim;
    const int m = coarse_n + 1;
    const double h = 2.0 / coarse_n;
    std::size_t total = 1;
    for (int k = 0; k < dim; ++k) total *= static_cast<std::size_t>(m);
    std::vector<int> mi(static_cast<std::size_t>(dim));
    for (std::size_t i = 0; i < total; ++i) {
        std::size_t rest = i;
        std::vector<double> p(static_cast<std::size_t>(dim));
        for (int k = dim - 1; k >= 0; --k) {
            p[k] = -1.0 + static_cast<double>(rest % m) * h;
            rest /= m;
        }
        mesh.vertices.push_back(p);
    }
    auto vertex_id = [&](const std::vector<int>& c) {
        std::size_t id = 0;
        for (int k = 0; k < dim; ++k) id = id * m + static_cast<std::size_t>(c[k]);
        return static_cast<int>(id);
    };
    std::size_t boxes = 1;
    for (int k = 0; k < dim; ++k) boxes *= static_cast<std::size_t>(coarse_n);
    for (std::size_t b = 0; b < boxes; ++b) {
        std::size_t rest = b;
        std::vector<int> corner(static_cast<std::size_t>(dim));
        for (int k = dim - 1; k >= 0; --k) {
            corner[k] = static_cast<int>(rest % coarse_n);
            rest /= coarse_n;
        }
        std::vector<int> perm(static_cast<std::size_t>(dim));
        std::iota(perm.begin(), perm.end(), 0);
        do {
            std::vector<int> c = corner;
            std::vector<int> simplex{vertex_id(c)};
            for (int k : perm) {
                ++c[k];
                simplex.push_back(vertex_id(c));
            }
            mesh.simplices.push_back(simplex);
        } while (std::next_permutation(perm.begin(), perm.end()));
    }
    return mesh;
}

SimplexMesh refine_by_levelset(const SimplexMesh& mesh, const LevelSetField& field, double min_sep, int max_sweeps,
                               RefineStats* stats, bool split_mixed) {
    const int d = mesh.dim;
    require(d == 2 || d == 3, ErrorKind::UnsupportedConfiguration, "tessellation refinement supports d = 2 or 3");
    require(field.grid.dim() == d, ErrorKind::InvalidArgument, "level-set field dimension mismatch");
    require(min_sep > 0.0, ErrorKind::InvalidArgument, "min_sep must be positive");

    std::vector<std::array<double, 3>> verts;
    for (const auto& v : mesh.vertices) {
        std::array<double, 3> a{0, 0, 0};
        std::copy(v.begin(), v.end(), a.begin());
        verts.push_back(a);
    }
    std::vector<std::array<int, 4>> cells;
    for (const auto& s : mesh.simplices) {
        std::array<int, 4> a{0, 0, 0, 0};
        std::copy(s.begin(), s.end(), a.begin());
        cells.push_back(a);
    }
    Delaunay dt(d, verts, cells);
    PointHash hash(d, min_sep);
    std::vector<double> phi;
    for (const auto& v : dt.vertices()) {
        hash.add(std::span<const double>(v.data(), static_cast<std::size_t>(d)));
        phi.push_back(phi_at(field, std::span<const double>(v.data(), static_cast<std::size_t>(d))));
    }

    auto current_mesh = [&] {
        SimplexMesh out;
        out.dim = d;
        for (const auto& v : dt.vertices()) out.vertices.emplace_back(v.begin(), v.begin() + d);
        for (const auto& c : dt.simplices()) out.simplices.emplace_back(c.begin(), c.begin() + d + 1);
        return out;
    };
    auto insert_all = [&](const std::vector<std::array<double, 3>>& fresh) {
        for (const auto& p : fresh) {
            const int id = dt.insert(std::span<const double>(p.data(), static_cast<std::size_t>(d)));
            const auto& v = dt.vertices()[id];
            phi.push_back(phi_at(field, std::span<const double>(v.data(), static_cast<std::size_t>(d))));
        }
    };
    const auto& g = field.grid;

    RefineStats st;
    while (st.sweeps < max_sweeps) {
        std::set<std::pair<int, int>> edges;
        for (const auto& c : dt.simplices()) {
            for (int a = 0; a <= d; ++a) {
                for (int b = a + 1; b <= d; ++b) edges.emplace(std::min(c[a], c[b]), std::max(c[a], c[b]));
            }
        }
        std::vector<std::array<double, 3>> fresh;
        for (const auto& [a, b] : edges) {
            const double fa = phi[a];
            const double fb = phi[b];
            if ((fa >= 0.0) == (fb >= 0.0)) continue;
            const double t = fa / (fa - fb);
            std::array<double, 3> p{0, 0, 0};
            for (int k = 0; k < d; ++k) p[k] = dt.vertices()[a][k] + t * (dt.vertices()[b][k] - dt.vertices()[a][k]);
            const std::span<const double> ps(p.data(), static_cast<std::size_t>(d));
            if (hash.any_within(ps, min_sep)) continue;
            hash.add(ps);
            fresh.push_back(p);
        }
        ++st.sweeps;
        if (!fresh.empty()) {
            insert_all(fresh);
            st.inserted += fresh.size();
            continue;
        }
        if (!split_mixed) break;

        // Edge roots are exhausted, but an edge with both endpoints near the
        // iso-zero can still be crossed twice. Split simplices whose grid
        // points carry both signs at the root between the deepest minority
        // point and its nearest majority neighbour.
        SimplexMesh cur = current_mesh();
        assign_points(cur, field);
        std::vector<double> q(static_cast<std::size_t>(d));
        std::vector<double> r(static_cast<std::size_t>(d));
        for (std::size_t s = 0; s < cur.size(); ++s) {
            const int label = cur.labels[s];
            bool mixed = false;
            std::size_t deep = 0;
            double deep_phi = 0.0;
            for (std::size_t i : cur.points[s]) {
                const double f = field.phi[i];
                if ((f >= 0.0 ? 1 : -1) != label && (!mixed || std::abs(f) > std::abs(deep_phi))) {
                    mixed = true;
                    deep = i;
                    deep_phi = f;
                }
            }
            if (!mixed) continue;
            g.point(deep, q);
            std::size_t near = deep;
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t i : cur.points[s]) {
                if ((field.phi[i] >= 0.0 ? 1 : -1) != label) continue;
                g.point(i, r);
                double d2 = 0.0;
                for (int k = 0; k < d; ++k) d2 += (r[k] - q[k]) * (r[k] - q[k]);
                if (d2 < best) {
                    best = d2;
                    near = i;
                }
            }
            if (near == deep) continue;
            g.point(near, r);
            const double fr = field.phi[near];
            const double t = deep_phi / (deep_phi - fr);
            std::array<double, 3> p{0, 0, 0};
            for (int k = 0; k < d; ++k) p[k] = q[k] + t * (r[k] - q[k]);
            const std::span<const double> ps(p.data(), static_cast<std::size_t>(d));
            if (hash.any_within(ps, min_sep)) continue;
            hash.add(ps);
            fresh.push_back(p);
        }
        if (fresh.empty()) break;
        insert_all(fresh);
        st.inserted += fresh.size();
        ++st.mixed_splits;
    }
    if (stats) *stats = st;

    SimplexMesh out = current_mesh();
    assign_points(out, field);
    return out;
}

SimplexLocator::SimplexLocator(const SimplexMesh& mesh) : mesh_(mesh) {
    const int d = mesh.dim;
    bins_ = std::max(1, static_cast<int>(std::ceil(std::pow(static_cast<double>(mesh.size()), 1.0 / d))));
    std::size_t total = 1;
    for (int k = 0; k < d; ++k) total *= static_cast<std::size_t>(bins_);
    cells_.assign(total, {});
    const double w = 2.0 / bins_;
    for (std::size_t s = 0; s < mesh.size(); ++s) {
        std::vector<int> lo(static_cast<std::size_t>(d), bins_ - 1);
        std::vector<int> hi(static_cast<std::size_t>(d), 0);
        for (int v : mesh.simplices[s]) {
            for (int k = 0; k < d; ++k) {
                const double x = mesh.vertices[v][k];
                lo[k] = std::min(lo[k], std::clamp(static_cast<int>(std::floor((x + 1.0 - 1e-9) / w)), 0, bins_ - 1));
                hi[k] = std::max(hi[k], std::clamp(static_cast<int>(std::floor((x + 1.0 + 1e-9) / w)), 0, bins_ - 1));
            }
        }
        std::vector<int> c = lo;
        for (;;) {
            std::size_t id = 0;
            for (int k = 0; k < d; ++k) id = id * bins_ + static_cast<std::size_t>(c[k]);
            cells_[id].push_back(s);
            int k = d - 1;
            while (k >= 0 && ++c[k] > hi[k]) {
                c[k] = lo[k];
                --k;
            }
            if (k < 0) break;
        }
    }
}

std::size_t SimplexLocator::locate(std::span<const double> xi) const {
    const int d = mesh_.dim;
    const double w = 2.0 / bins_;
    std::size_t id = 0;
    for (int k = 0; k < d; ++k) {
        id = id * bins_ + static_cast<std::size_t>(std::clamp(static_cast<int>(std::floor((xi[k] + 1.0) / w)), 0,
                                                              bins_ - 1));
    }
    double lam[7];
    const std::span<double> l(lam, static_cast<std::size_t>(d + 1));
    std::size_t best = std::numeric_limits<std::size_t>::max();
    double best_min = -std::numeric_limits<double>::infinity();
    for (std::size_t s : cells_[id]) {
        mesh_.barycentric(s, xi, l);
        const double mn = *std::min_element(l.begin(), l.end());
        if (mn >= -kBaryTol) return s;
        if (mn > best_min) {
            best_min = mn;
            best = s;
        }
    }
    // Round-off fallback: the simplex with the least negative coordinate.
    for (std::size_t s = 0; s < mesh_.size(); ++s) {
        mesh_.barycentric(s, xi, l);
        const double mn = *std::min_element(l.begin(), l.end());
        if (mn > best_min) {
            best_min = mn;
            best = s;
        }
    }
    require(best_min > -1e-6, ErrorKind::OutOfDomain, "point lies outside the simplex mesh");
    return best;
}

void assign_points(SimplexMesh& mesh, const LevelSetField& field) {
    const auto& g = field.grid;
    require(g.dim() == mesh.dim, ErrorKind::InvalidArgument, "grid and mesh dimensions differ");
    const SimplexLocator locator(mesh);
    mesh.points.assign(mesh.size(), {});
    std::vector<double> p(static_cast<std::size_t>(g.dim()));
    for (std::size_t i = 0; i < g.size(); ++i) {
        g.point(i, p);
        mesh.points[locator.locate(p)].push_back(i);
    }
    mesh.labels.assign(mesh.size(), 1);
    for (std::size_t s = 0; s < mesh.size(); ++s) {
        long balance = 0;
        for (std::size_t i : mesh.points[s]) balance += field.phi[i] >= 0.0 ? 1 : -1;
        if (balance == 0) {
            std::vector<double> c(static_cast<std::size_t>(mesh.dim), 0.0);
            for (int v : mesh.simplices[s]) {
                for (int k = 0; k < mesh.dim; ++k) c[k] += mesh.vertices[v][k] / (mesh.dim + 1);
            }
            balance = phi_at(field, c) >= 0.0 ? 1 : -1;
        }
        mesh.labels[s] = balance > 0 ? 1 : -1;
    }
}

void write_mesh_csv(std::ostream& vertices_out, std::ostream& simplices_out, const SimplexMesh& mesh) {
    vertices_out.precision(17);
    for (int k = 0; k < mesh.dim; ++k) vertices_out << (k ? "," : "") << "xi" << (k + 1);
    vertices_out << '\n';
    for (const auto& v : mesh.vertices) {
        for (int k = 0; k < mesh.dim; ++k) vertices_out << (k ? "," : "") << v[k];
        vertices_out << '\n';
    }
    for (int k = 0; k <= mesh.dim; ++k) simplices_out << 'v' << k << ',';
    simplices_out << "label,points\n";
    for (std::size_t s = 0; s < mesh.size(); ++s) {
        for (int v : mesh.simplices[s]) simplices_out << v << ',';
        simplices_out << (s < mesh.labels.size() ? static_cast<int>(mesh.labels[s]) : 0) << ','
                      << (s < mesh.points.size() ? mesh.points[s].size() : 0) << '\n';
    }
}

}  // namespace lstrack
