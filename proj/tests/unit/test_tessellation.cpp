#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "support.hpp"

#include <functional>

#include <Eigen/Dense>

#include "lstrack/delaunay.hpp"
#include "lstrack/forward_models.hpp"
#include "lstrack/tessellation.hpp"

using namespace lstrack;

namespace {

LevelSetField field_from(int dim, int m, const std::function<double(const std::vector<double>&)>& f) {
    LevelSetField field;
    field.grid = build_grid(StochasticDomain::uniform(dim), m);
    field.phi.resize(field.grid.size());
    for (std::size_t i = 0; i < field.grid.size(); ++i) field.phi[i] = f(field.grid.point(i));
    return field;
}

double total_volume(const SimplexMesh& mesh) {
    double v = 0.0;
    for (std::size_t s = 0; s < mesh.size(); ++s) v += mesh.volume(s);
    return v;
}

// Fraction of simplices whose contained points share one phi sign.
double single_signed_fraction(const SimplexMesh& mesh, const LevelSetField& field) {
    std::size_t ok = 0;
    for (const auto& pts : mesh.points) {
        bool pos = false, neg = false;
        for (std::size_t i : pts) (field.phi[i] >= 0.0 ? pos : neg) = true;
        ok += !(pos && neg);
    }
    return static_cast<double>(ok) / static_cast<double>(mesh.size());
}

bool has_vertex(const SimplexMesh& mesh, std::vector<double> p) {
    for (const auto& v : mesh.vertices) {
        double d = 0.0;
        for (std::size_t k = 0; k < p.size(); ++k) d = std::max(d, std::abs(v[k] - p[k]));
        if (d <= 1e-12) return true;
    }
    return false;
}

}  // namespace

TEST_CASE("initial mesh") {
    CHECK(initial_mesh(2, 1).size() == 2);
    CHECK(initial_mesh(3, 1).size() == 6);
    CHECK(total_volume(initial_mesh(2, 1)) == doctest::Approx(4.0));
    CHECK(total_volume(initial_mesh(3, 1)) == doctest::Approx(8.0));
    const auto m = initial_mesh(2, 4);
    CHECK(m.size() == 32);
    CHECK(total_volume(m) == doctest::Approx(4.0));
    for (std::size_t s = 0; s < m.size(); ++s) CHECK(m.volume(s) == doctest::Approx(4.0 / 32));
}

TEST_CASE("one-signed field leaves the mesh unchanged") {
    const auto field = field_from(2, 21, [](const auto&) { return 1.0; });
    const auto mesh = initial_mesh(2, 4);
    RefineStats stats;
    const auto out = refine_by_levelset(mesh, field, 0.05, 100, &stats);
    CHECK(out.size() == mesh.size());
    CHECK(out.vertices.size() == mesh.vertices.size());
    CHECK(stats.inserted == 0);
}

TEST_CASE("a line through the square splits both triangles") {
    const auto field = field_from(2, 21, [](const auto& p) { return p[0]; });
    const auto out = refine_by_levelset(initial_mesh(2, 1), field, 1e-3, 100, nullptr, false);
    CHECK(out.size() == 6);
    CHECK(out.vertices.size() == 7);
    // linear roots on the sign-changing edges
    CHECK(has_vertex(out, {0.0, -1.0}));
    CHECK(has_vertex(out, {0.0, 0.0}));
    CHECK(has_vertex(out, {0.0, 1.0}));
    CHECK(total_volume(out) == doctest::Approx(4.0));
    for (std::size_t s = 0; s < out.size(); ++s) CHECK(out.volume(s) > 0.0);
}

TEST_CASE("roots closer than min_sep to a vertex are skipped") {
    const auto field = field_from(2, 21, [](const auto& p) { return p[0] - 0.99; });
    const auto out = refine_by_levelset(initial_mesh(2, 1), field, 0.1, 100, nullptr, false);
    CHECK(out.size() == 2);
}

TEST_CASE("point location") {
    const auto field = field_from(2, 41, [](const auto& p) { return p[0] * p[0] + p[1] * p[1] - 0.4; });
    auto mesh = refine_by_levelset(initial_mesh(2, 4), field, 0.025);
    SimplexLocator loc(mesh);
    std::mt19937_64 rng(4);
    std::vector<double> bary(3);
    for (int t = 0; t < 10000; ++t) {
        const auto xi = testing::uniform_point(rng, 2);
        const auto s = loc.locate(xi);
        REQUIRE(s < mesh.size());
        mesh.barycentric(s, xi, bary);
        CHECK(bary[0] + bary[1] + bary[2] == doctest::Approx(1.0));
        for (double b : bary) CHECK(b >= -1e-12);
    }
    // centroid lands in its own simplex; a shared facet goes to the lower index
    const auto base = initial_mesh(2, 1);
    SimplexLocator base_loc(base);
    for (std::size_t s = 0; s < base.size(); ++s) {
        std::vector<double> c(2, 0.0);
        for (int v : base.simplices[s])
            for (int k = 0; k < 2; ++k) c[k] += base.vertices[v][k] / 3.0;
        CHECK(base_loc.locate(c) == s);
    }
    const double origin[2] = {0.0, 0.0};
    CHECK(base_loc.locate(origin) == 0);
}

TEST_CASE("assign_points partitions the grid") {
    const auto field = field_from(3, 17, [](const auto& p) { return p[0] + 0.3 * p[1] - 0.2 * p[2] - 0.1; });
    auto mesh = refine_by_levelset(initial_mesh(3, 2), field, 1.0 / 16);
    assign_points(mesh, field);
    std::vector<int> seen(field.grid.size(), 0);
    for (const auto& pts : mesh.points)
        for (std::size_t i : pts) ++seen[i];
    for (int c : seen) CHECK(c == 1);
    CHECK(total_volume(mesh) == doctest::Approx(8.0));
    CHECK(single_signed_fraction(mesh, field) >= 0.95);
}

TEST_CASE("burgers indicator conformity") {
    const BurgersRiemannConfig cfg;
    const auto field = field_from(2, 61, [&](const auto& p) { return burgers_discontinuity_indicator(cfg, p); });
    RefineStats stats;
    auto mesh = refine_by_levelset(initial_mesh(2, 4), field, 0.5 * field.grid.spacing(), 100, &stats);
    assign_points(mesh, field);
    CHECK(stats.inserted > 0);
    CHECK(single_signed_fraction(mesh, field) >= 0.95);
    CHECK(total_volume(mesh) == doctest::Approx(4.0));
}

namespace {

// Circumsphere test computed from scratch for the Delaunay property.
bool inside_circumsphere(int dim, const std::vector<std::array<double, 3>>& v, const std::array<int, 4>& s,
                         const std::array<double, 3>& p) {
    Eigen::MatrixXd a(dim, dim);
    Eigen::VectorXd b(dim);
    for (int r = 0; r < dim; ++r) {
        double n0 = 0.0, n1 = 0.0;
        for (int k = 0; k < dim; ++k) {
            a(r, k) = 2.0 * (v[s[r + 1]][k] - v[s[0]][k]);
            n0 += v[s[0]][k] * v[s[0]][k];
            n1 += v[s[r + 1]][k] * v[s[r + 1]][k];
        }
        b(r) = n1 - n0;
    }
    const Eigen::VectorXd c = a.fullPivLu().solve(b);
    double r2 = 0.0, d2 = 0.0;
    for (int k = 0; k < dim; ++k) {
        r2 += (v[s[0]][k] - c(k)) * (v[s[0]][k] - c(k));
        d2 += (p[k] - c(k)) * (p[k] - c(k));
    }
    return d2 < r2 * (1.0 - 1e-9);
}

void check_delaunay(int dim, int n_points, std::uint64_t seed) {
    std::vector<std::array<double, 3>> verts;
    std::vector<std::array<int, 4>> simp;
    const auto base = initial_mesh(dim, 1);
    for (const auto& p : base.vertices) verts.push_back({p[0], p[1], dim == 3 ? p[2] : 0.0});
    for (const auto& s : base.simplices) simp.push_back({s[0], s[1], s[2], dim == 3 ? s[3] : -1});
    Delaunay del(dim, verts, simp);
    std::mt19937_64 rng(seed);
    for (int i = 0; i < n_points; ++i) del.insert(testing::uniform_point(rng, dim, -0.99, 0.99));
    const auto& v = del.vertices();
    const auto cells = del.simplices();
    double volume = 0.0;
    int violations = 0;
    for (const auto& s : cells) {
        const std::array<double, 3>* pts[4] = {&v[s[0]], &v[s[1]], &v[s[2]], dim == 3 ? &v[s[3]] : nullptr};
        const double o = Delaunay::orientation(dim, pts);
        CHECK(o > 0.0);
        volume += o / (dim == 2 ? 2.0 : 6.0);
        for (std::size_t q = 0; q < v.size(); ++q) violations += inside_circumsphere(dim, v, s, v[q]);
    }
    CHECK(violations == 0);
    CHECK(volume == doctest::Approx(dim == 2 ? 4.0 : 8.0));
}

}  // namespace

TEST_CASE("delaunay empty circumsphere property") {
    check_delaunay(2, 300, 1);
    check_delaunay(3, 80, 2);
}
