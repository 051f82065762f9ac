#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "support.hpp"

#include "lstrack/megpc_adaptive.hpp"

using namespace lstrack;

namespace {

double leaf_probability(const MegpcResult& r) {
    double total = 0.0;
    for (int id : r.leaves) total += r.nodes[id].element.probability();
    return total;
}

}  // namespace

TEST_CASE("local decay") {
    const GpcBasis b1(1, 2);
    Eigen::VectorXd c(3);
    c << 5.0, 0.3, 0.4;
    CHECK(local_decay(c, b1) == doctest::Approx(0.64));
    c << 2.0, 0.0, 0.0;
    CHECK(local_decay(c, b1) == 0.0);
    c << 0.0, 0.0, 1.0;
    CHECK(local_decay(c, b1) == doctest::Approx(1.0));
}

TEST_CASE("split criterion") {
    CHECK(should_split(0.01, 0.25, 0.5, 1e-3));
    CHECK_FALSE(should_split(1e-8, 0.25, 0.5, 1e-3));
    CHECK(should_split(1.0, 1e-3, 0.5, 1e-3));
    CHECK_FALSE(should_split(0.0, 1.0, 0.5, 1e-3));
}

TEST_CASE("split dimensions") {
    const GpcBasis b(2, 2);
    // order: (0,0) (1,0) (0,1) (2,0) (1,1) (0,2)
    Eigen::VectorXd c(6);
    c << 1.0, 0.5, 0.5, 1.0, 0.0, 0.1;
    const MeElement e{{-1.0, -1.0}, {0.0, 1.0}};
    const auto r = dimension_sensitivity(c, b);
    CHECK(r[0] == doctest::Approx(1.0 / 1.01));
    CHECK(r[1] == doctest::Approx(0.01 / 1.01));
    CHECK(split_dimensions(c, b, 0.2, e) == std::vector<int>{0});
    c << 1.0, 0.5, 0.5, 1.0, 0.0, 0.9;
    CHECK(split_dimensions(c, b, 0.2, e) == std::vector<int>{0, 1});
    // no top-degree axis content: widest dimension
    c << 1.0, 0.5, 0.5, 0.0, 0.7, 0.0;
    CHECK(split_dimensions(c, b, 0.2, e) == std::vector<int>{1});
}

TEST_CASE("low-degree polynomial needs a single element") {
    const FunctionModel model("poly", 2, [](std::span<const double> x) { return 1.0 + x[0] - 0.5 * x[1] * x[0]; });
    MegpcConfig cfg;
    cfg.order = 3;
    const auto r = run_adaptive_megpc(model, cfg);
    CHECK(r.leaves.size() == 1);
    CHECK(r.mean == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(r.variance == doctest::Approx(1.0 / 3.0 + 0.25 / 9.0).epsilon(1e-10));
    const double xi[2] = {0.3, -0.7};
    CHECK(r.evaluate(xi) == doctest::Approx(model.evaluate(xi)).epsilon(1e-12));
    CHECK(r.n_ev == 25);
}

TEST_CASE("smooth function moments") {
    const FunctionModel model("smooth", 2,
                              [](std::span<const double> x) { return std::exp(x[0]) * std::cos(x[1]); });
    MegpcConfig cfg;
    cfg.order = 4;
    cfg.theta1 = 1e-6;
    const auto r = run_adaptive_megpc(model, cfg);
    const double mean = std::sinh(1.0) * std::sin(1.0);
    const double second = 0.25 * (std::exp(2.0) - std::exp(-2.0)) * 0.5 * (1.0 + 0.5 * std::sin(2.0));
    CHECK(r.mean == doctest::Approx(mean).epsilon(1e-6));
    CHECK(r.variance == doctest::Approx(second - mean * mean).epsilon(1e-5));
    CHECK(std::abs(leaf_probability(r) - 1.0) <= 1e-12);
}

TEST_CASE("discontinuous response refines toward the jump") {
    const FunctionModel step("step", 2, [](std::span<const double> x) { return x[0] + 0.3 * x[1] > 0.1 ? 1.0 : 0.0; });
    std::size_t prev = 0;
    for (double theta1 : {1e-1, 1e-2, 1e-3}) {
        MegpcConfig cfg;
        cfg.theta1 = theta1;
        const auto r = run_adaptive_megpc(step, cfg);
        CHECK(std::abs(leaf_probability(r) - 1.0) <= 1e-12);
        CHECK(r.leaves.size() >= prev);
        prev = r.leaves.size();

        double agg = 0.0;
        for (int id : r.leaves) agg += r.nodes[id].element.probability() * r.nodes[id].coeffs(0);
        CHECK(r.mean == doctest::Approx(agg).epsilon(1e-12));
        for (const auto& n : r.nodes)
            if (!n.children.empty()) CHECK(n.coeffs.size() == 0);
    }
    CHECK(prev > 10);
}

TEST_CASE("refinement is invariant to scaling the response") {
    auto f = [](std::span<const double> x) { return std::abs(x[0] - 0.2) + x[1] * x[1]; };
    const FunctionModel a("a", 2, f);
    const FunctionModel b("b", 2, [&](std::span<const double> x) { return -7.0 * f(x); });
    MegpcConfig cfg;
    cfg.theta1 = 1e-3;
    const auto ra = run_adaptive_megpc(a, cfg);
    const auto rb = run_adaptive_megpc(b, cfg);
    REQUIRE(ra.leaves.size() == rb.leaves.size());
    for (std::size_t i = 0; i < ra.leaves.size(); ++i) {
        CHECK(ra.nodes[ra.leaves[i]].element.lo == rb.nodes[rb.leaves[i]].element.lo);
        CHECK(ra.nodes[ra.leaves[i]].element.hi == rb.nodes[rb.leaves[i]].element.hi);
    }
    CHECK(rb.mean == doctest::Approx(-7.0 * ra.mean));
}

TEST_CASE("invalid parameters") {
    const FunctionModel model("c", 2, [](std::span<const double>) { return 1.0; });
    MegpcConfig cfg;
    cfg.alpha = 1.0;
    CHECK_THROWS_KIND(run_adaptive_megpc(model, cfg), ErrorKind::InvalidArgument);
    cfg = {};
    cfg.theta1 = 0.0;
    CHECK_THROWS_KIND(run_adaptive_megpc(model, cfg), ErrorKind::InvalidArgument);
}
