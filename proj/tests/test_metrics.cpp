#include "hro/metrics.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

using namespace hro;

namespace {

Vector vec(std::initializer_list<double> values)
{
    Vector v(static_cast<Eigen::Index>(values.size()));
    std::copy(values.begin(), values.end(), v.data());
    return v;
}

} // namespace

TEST_CASE("hand-computed metric values")
{
    const HitInterval band;
    const Vector zero = Vector::Zero(3);
    CHECK(hit_rate(vec({-0.1, -0.5, 0.05}), zero, band) == doctest::Approx(2.0 / 3.0));
    CHECK(hit_rate(vec({0.2}), vec({0.0}), band) == 1.0);
    CHECK(hit_rate(zero, zero, band) == 1.0);

    CHECK(mae(vec({1, -1}), vec({0, 0})) == 1.0);
    CHECK(mae(vec({0.3}), vec({0})) == doctest::Approx(0.3));
    CHECK(rmse(vec({3, 4}), vec({0, 0})) == doctest::Approx(std::sqrt(12.5)));
    CHECK(r2(vec({1, 2, 4}), vec({1, 2, 3})) == doctest::Approx(0.5));
    CHECK(r2(vec({2, 2, 2}), vec({1, 2, 3})) == doctest::Approx(0.0));
    CHECK_THROWS_AS(r2(vec({1, 2}), vec({1, 1})), ValidationError);

    CHECK(mape_a(vec({0.6}), vec({0.5})) == doctest::Approx(0.1));
    CHECK(mape(vec({202}), vec({200})) == doctest::Approx(0.01));
    try {
        mape(vec({1}), vec({0}));
        FAIL("expected a validation error");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("mape_a") != std::string::npos);
    }

    CHECK(mae_masked(vec({0.1, 0.5, -0.3}), zero, band) == doctest::Approx(0.8 / 3.0));
    CHECK(mae_masked(vec({0.1, 0.2, -0.2}), zero, band) == 0.0);
    CHECK_THROWS_AS(HitInterval(0.1, -0.1), ValidationError);
    CHECK_THROWS_AS(HitInterval(-INFINITY, 1.0), ValidationError);
    CHECK_THROWS_AS(mae(Vector(0), Vector(0)), ValidationError);
}

TEST_CASE("perfect predictions")
{
    const Vector a = vec({1.0, 2.5, -3.0});
    const MetricReport rep = report(a, a, HitInterval{});
    CHECK(rep.hr == 1.0);
    CHECK(rep.mae == 0.0);
    CHECK(rep.rmse == 0.0);
    CHECK(rep.r2 == 1.0);
    CHECK(rep.mape == 0.0);
    CHECK(rep.mape_a == 0.0);
    CHECK(rep.mae_hr == 0.0);
    CHECK(rep.rmse_hr == 0.0);
}

TEST_CASE("metrics match straight-line references on random instances")
{
    std::mt19937_64 rng(123);
    std::normal_distribution<double> n01;
    std::uniform_int_distribution<int> size(2, 50);
    for (int trial = 0; trial < 100; ++trial) {
        const int n = size(rng);
        std::vector<double> p(static_cast<std::size_t>(n)), a(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            a[static_cast<std::size_t>(i)] = 2.0 * n01(rng);
            p[static_cast<std::size_t>(i)] = a[static_cast<std::size_t>(i)] + 0.3 * n01(rng);
        }
        const double lo = -0.05 - 0.3 * std::fabs(n01(rng));
        const double hi = 0.05 + 0.3 * std::fabs(n01(rng));
        const Eigen::Map<const Vector> P(p.data(), n), A(a.data(), n);
        const HitInterval band(lo, hi);
        const auto ref = oracle::metric_reference(p, a, lo, hi);
        const auto rep = report(P, A, band);
        CHECK(std::fabs(rep.hr - ref.hr) <= 1e-12);
        CHECK(std::fabs(rep.mae - ref.mae) <= 1e-12);
        CHECK(std::fabs(rep.rmse - ref.rmse) <= 1e-12);
        CHECK(std::fabs(rep.r2 - ref.r2) <= 1e-12);
        CHECK(std::fabs(rep.mape_a - ref.mape_a) <= 1e-12);
        CHECK(std::fabs(rep.mae_hr - ref.mae_hr) <= 1e-12);
        CHECK(std::fabs(rep.rmse_hr - ref.rmse_hr) <= 1e-12);

        // Structural properties.
        CHECK(rep.mae_hr <= rep.mae);
        CHECK(rep.rmse_hr <= rep.rmse);
        CHECK(rep.rmse >= rep.mae - 1e-15);
        CHECK(rep.rmse_hr >= rep.mae_hr - 1e-15);
        int missed = 0;
        for (int i = 0; i < n; ++i) {
            missed += band.contains(p[static_cast<std::size_t>(i)] - a[static_cast<std::size_t>(i)]) ? 0 : 1;
        }
        CHECK(rep.hr + static_cast<double>(missed) / n == 1.0);

        // Shift and permutation invariance.
        const Vector shift = Vector::Constant(n, 3.7);
        CHECK(hit_rate(P + shift, A + shift, band) == rep.hr);
        std::vector<int> perm(static_cast<std::size_t>(n));
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), rng);
        Vector pp(n), pa(n);
        for (int i = 0; i < n; ++i) {
            pp(i) = p[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])];
            pa(i) = a[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])];
        }
        const auto permuted = report(pp, pa, band);
        CHECK(permuted.hr == rep.hr);
        CHECK(std::fabs(permuted.mae - rep.mae) <= 1e-12);
        CHECK(std::fabs(permuted.r2 - rep.r2) <= 1e-12);
    }
}
