#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "support.hpp"

#include "lstrack/analytics.hpp"

using namespace lstrack;

TEST_CASE("relative l1 error examples") {
    const auto g = build_grid(StochasticDomain::uniform(2), 11);
    std::vector<double> ref(g.size()), zero(g.size(), 0.0), twice(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        const auto p = g.point(i);
        ref[i] = std::sin(3.0 * p[0]) + p[1];
        twice[i] = 2.0 * ref[i];
    }
    CHECK(rel_l1_error(ref, ref, g) == 0.0);
    CHECK(rel_l1_error(zero, ref, g) == doctest::Approx(1.0));
    CHECK(rel_l1_error(twice, ref, g) == doctest::Approx(1.0));
    CHECK_THROWS_KIND(rel_l1_error(ref, zero, g), ErrorKind::UndefinedMetric);
    CHECK_THROWS_KIND(rel_l1_error(ref, std::vector<double>(3, 1.0), g), ErrorKind::InvalidArgument);
}

TEST_CASE("weighted l1 norm") {
    for (int d = 1; d <= 3; ++d) {
        const int m = 9;
        const auto g = build_grid(StochasticDomain::uniform(d), m);
        const std::vector<double> ones(g.size(), 1.0);
        CHECK(weighted_l1_norm(ones, g) == doctest::Approx(std::pow(m / (m - 1.0), d)));
        std::vector<double> u(g.size());
        std::mt19937_64 rng(static_cast<std::uint64_t>(d));
        for (auto& v : u) v = testing::uniform_point(rng, 1)[0];
        std::vector<double> scaled(u);
        for (auto& v : scaled) v *= -2.5;
        CHECK(weighted_l1_norm(scaled, g) == doctest::Approx(2.5 * weighted_l1_norm(u, g)));
    }
}

TEST_CASE("moment errors") {
    const auto e = rel_moment_errors(1.1, 2.0, 1.0, 2.0);
    CHECK(e.mean == doctest::Approx(0.1));
    CHECK(e.stddev == 0.0);
    CHECK_THROWS_KIND(rel_moment_errors(1.0, 1.0, 0.0, 1.0), ErrorKind::UndefinedMetric);
    CHECK_THROWS_KIND(rel_moment_errors(1.0, 1.0, 1.0, 0.0), ErrorKind::UndefinedMetric);
}

TEST_CASE("monte carlo reference") {
    auto constant = [](std::span<const double>) { return 3.0; };
    auto st = monte_carlo_reference(constant, 2, 1000, 1);
    CHECK(st.mean == doctest::Approx(3.0));
    CHECK(std::abs(st.stddev) <= 1e-12);

    auto indicator = [](std::span<const double> x) { return x[0] > 0.0 ? 1.0 : 0.0; };
    const std::size_t n = 200000;
    st = monte_carlo_reference(indicator, 2, n, 7);
    CHECK(st.samples == n);
    CHECK(std::abs(st.mean - 0.5) <= 4.0 * 0.5 / std::sqrt(static_cast<double>(n)));
    CHECK(st.se_mean == doctest::Approx(0.5 / std::sqrt(static_cast<double>(n))).epsilon(0.01));

    const auto half = monte_carlo_reference(indicator, 2, n / 2, 7);
    CHECK(half.se_mean / st.se_mean == doctest::Approx(std::sqrt(2.0)).epsilon(0.2));

    // the reported standard error matches the spread of independent replicates
    std::vector<double> means;
    for (std::uint64_t s = 100; s < 120; ++s) means.push_back(monte_carlo_reference(indicator, 1, 4000, s).mean);
    double mu = 0.0, var = 0.0;
    for (double m : means) mu += m / means.size();
    for (double m : means) var += (m - mu) * (m - mu) / (means.size() - 1);
    CHECK(std::sqrt(var) == doctest::Approx(0.5 / std::sqrt(4000.0)).epsilon(0.4));
}

TEST_CASE("monte carlo is independent of the worker count") {
    auto f = [](std::span<const double> x) { return std::exp(x[0]) * x[1] + x[2]; };
    const auto a = monte_carlo_reference(f, 3, 300000, 42, 1);
    const auto b = monte_carlo_reference(f, 3, 300000, 42, 3);
    CHECK(a.mean == b.mean);
    CHECK(a.stddev == b.stddev);
    const auto c = monte_carlo_reference(f, 3, 300000, 43, 1);
    CHECK(a.mean != c.mean);
    CHECK_THROWS_KIND(monte_carlo_reference(f, 3, 0, 1), ErrorKind::InvalidArgument);
}
