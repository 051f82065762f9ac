#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "support.hpp"

#include <limits>

#include "lstrack/basis.hpp"
#include "lstrack/regression.hpp"

using namespace lstrack;

namespace {

Eigen::MatrixXd random_design(std::mt19937_64& rng, int n, int dim, int order) {
    const GpcBasis b(dim, order);
    Eigen::MatrixXd psi(n, static_cast<Eigen::Index>(b.size()));
    Eigen::VectorXd row(b.size());
    for (int i = 0; i < n; ++i) {
        b.eval_all(testing::uniform_point(rng, dim), std::span<double>(row.data(), b.size()));
        psi.row(i) = row.transpose();
    }
    return psi;
}

// Exhaustive LAD: an optimum interpolates rank-many rows exactly.
double brute_force_lad(const Eigen::MatrixXd& psi, const Eigen::VectorXd& u) {
    const int n = static_cast<int>(psi.rows());
    const int p = static_cast<int>(psi.cols());
    double best = std::numeric_limits<double>::infinity();
    std::vector<int> pick(static_cast<std::size_t>(p));
    for (int i = 0; i < p; ++i) pick[i] = i;
    for (;;) {
        Eigen::MatrixXd a(p, p);
        Eigen::VectorXd b(p);
        for (int i = 0; i < p; ++i) {
            a.row(i) = psi.row(pick[i]);
            b(i) = u(pick[i]);
        }
        Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
        if (lu.isInvertible()) best = std::min(best, (psi * lu.solve(b) - u).lpNorm<1>());
        int k = p - 1;
        while (k >= 0 && pick[k] == n - p + k) --k;
        if (k < 0) break;
        ++pick[k];
        for (int j = k + 1; j < p; ++j) pick[j] = pick[j - 1] + 1;
    }
    return best;
}

}  // namespace

TEST_CASE("ols examples") {
    Eigen::MatrixXd id = Eigen::MatrixXd::Identity(3, 3);
    Eigen::VectorXd u(3);
    u << 1.0, -2.0, 0.5;
    auto rep = solve_ols_tsvd(id, u);
    CHECK((rep.coeffs - u).cwiseAbs().maxCoeff() <= 1e-14);

    Eigen::MatrixXd ones = Eigen::MatrixXd::Ones(4, 1);
    rep = solve_ols_tsvd(ones, Eigen::VectorXd::Constant(4, 2.0));
    CHECK(rep.coeffs(0) == doctest::Approx(2.0));

    // duplicated column: minimum-norm solution splits the weight
    Eigen::MatrixXd dup(4, 2);
    dup << 1, 1, 2, 2, -1, -1, 0.5, 0.5;
    Eigen::VectorXd y = 3.0 * dup.col(0);
    rep = solve_ols_tsvd(dup, y);
    CHECK(rep.rank == 1);
    CHECK(rep.truncated == 1);
    CHECK(rep.coeffs(0) == doctest::Approx(1.5));
    CHECK(rep.coeffs(1) == doctest::Approx(1.5));

    CHECK_THROWS_KIND(solve_ols_tsvd(Eigen::MatrixXd::Zero(3, 2), u), ErrorKind::RankZero);
    CHECK_THROWS_KIND(solve_ols_tsvd(id, Eigen::VectorXd::Zero(2)), ErrorKind::InvalidArgument);
}

TEST_CASE("ols residual is orthogonal to the columns") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> noise(0.0, 1.0);
    for (int rep_i = 0; rep_i < 10; ++rep_i) {
        const auto psi = random_design(rng, 60, 2, 3);
        Eigen::VectorXd u(60);
        for (auto& v : u) v = noise(rng);
        const auto rep = solve_ols_tsvd(psi, u);
        CHECK((psi.transpose() * rep.residual).cwiseAbs().maxCoeff() <= 1e-10 * u.norm());
        CHECK((rep.residual - (u - psi * rep.coeffs)).cwiseAbs().maxCoeff() <= 1e-12);
    }
}

TEST_CASE("lad examples") {
    Eigen::MatrixXd ones = Eigen::MatrixXd::Ones(4, 1);
    Eigen::VectorXd u(4);
    u << 0.0, 0.0, 0.0, 100.0;
    auto rep = solve_lad(ones, u);
    CHECK(std::abs(rep.coeffs(0)) <= 1e-8);
    CHECK(rep.g(3) == doctest::Approx(100.0));

    CHECK_THROWS_KIND(solve_lad(Eigen::MatrixXd::Identity(3, 3), Eigen::VectorXd::Ones(3)), ErrorKind::NoNullSpace);
    CHECK_THROWS_KIND(solve_lad(Eigen::MatrixXd::Zero(4, 2), u), ErrorKind::RankZero);
}

TEST_CASE("lad is exact on noise-free data") {
    std::mt19937_64 rng(8);
    const auto psi = random_design(rng, 80, 2, 3);
    Eigen::VectorXd c(psi.cols());
    for (auto& v : c) v = testing::uniform_point(rng, 1)[0];
    const auto rep = solve_lad(psi, psi * c);
    CHECK((rep.coeffs - c).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("lad ignores sparse corruption") {
    std::mt19937_64 rng(21);
    const auto psi = random_design(rng, 200, 2, 3);
    Eigen::VectorXd c(psi.cols());
    for (auto& v : c) v = testing::uniform_point(rng, 1)[0];
    Eigen::VectorXd u = psi * c;
    for (int i = 0; i < 10; ++i) u(static_cast<Eigen::Index>(rng() % 200)) += 5.0;
    const auto lad = solve_lad(psi, u);
    const auto ols = solve_ols_tsvd(psi, u);
    CHECK((lad.coeffs - c).cwiseAbs().maxCoeff() <= 1e-6);
    CHECK((ols.coeffs - c).cwiseAbs().maxCoeff() > 1e-2);
}

TEST_CASE("lad attains the exhaustive optimum") {
    std::mt19937_64 rng(77);
    std::normal_distribution<double> noise(0.0, 1.0);
    for (int t = 0; t < 20; ++t) {
        const auto psi = random_design(rng, 12, 1, 2);
        Eigen::VectorXd u(12);
        for (auto& v : u) v = noise(rng);
        const auto rep = solve_lad(psi, u);
        const double got = rep.residual.lpNorm<1>();
        CHECK(got <= brute_force_lad(psi, u) * (1.0 + 1e-9) + 1e-12);
        CHECK(got <= solve_ols_tsvd(psi, u).residual.lpNorm<1>() + 1e-12);
    }
}

TEST_CASE("regression is scale equivariant") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> noise(0.0, 1.0);
    const auto psi = random_design(rng, 40, 2, 2);
    Eigen::VectorXd u(40);
    for (auto& v : u) v = noise(rng);
    for (double a : {-3.0, 0.25, 1e3}) {
        const auto o1 = solve_ols_tsvd(psi, u);
        const auto o2 = solve_ols_tsvd(psi, a * u);
        CHECK((o2.coeffs - a * o1.coeffs).norm() <= 1e-10 * std::abs(a) * o1.coeffs.norm());
        const auto l1 = solve_lad(psi, u);
        const auto l2 = solve_lad(psi, a * u);
        CHECK(std::abs(l2.residual.lpNorm<1>() - std::abs(a) * l1.residual.lpNorm<1>()) <=
              1e-7 * std::abs(a) * l1.residual.lpNorm<1>());
    }
}

TEST_CASE("repair and jump floor") {
    RegressionReport rep;
    rep.residual = Eigen::VectorXd(3);
    rep.residual << 0.01, -0.6, 0.2;
    CHECK(repair_misclassified(rep, 0.5) == std::vector<std::size_t>{1});
    CHECK(repair_misclassified(rep, 1.0).empty());

    const StochasticGrid g(StochasticDomain::uniform(1), {5});
    const std::vector<double> values{0.0, 0.0, 0.1, 1.0, 1.0};
    const std::vector<std::int8_t> labels{-1, -1, -1, 1, 1};
    CHECK(estimate_jump_floor(g, values, labels) == doctest::Approx(0.45));
    const std::vector<std::int8_t> same(5, 1);
    CHECK(estimate_jump_floor(g, values, same) == 0.0);
}
