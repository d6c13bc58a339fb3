#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "evspec/distributions.hpp"
#include "oracles.hpp"

using namespace evspec;

TEST_CASE("student_renorm_pdf known values") {
    CHECK(student_renorm_pdf(3.0, 0.0) == Catch::Approx(2.0 / M_PI).epsilon(1e-14));
    CHECK(student_renorm_pdf(3.0, 1.0) == Catch::Approx(1.0 / (2.0 * M_PI)).epsilon(1e-14));
    CHECK(student_renorm_pdf(5.0, 0.0) > 0.0);
    for (double t : {0.3, 1.7, 4.0})
        CHECK(student_renorm_pdf(4.0, t) == Catch::Approx(student_renorm_pdf(4.0, -t)).epsilon(1e-15));
    CHECK_THROWS_AS(student_renorm_pdf(2.0, 0.0), std::domain_error);
    CHECK_THROWS_AS(student_renorm_pdf(1.5, 0.0), std::domain_error);
}

TEST_CASE("student_renorm_pdf integrates to one with unit second moment") {
    for (double nu : {2.5, 3.0, 4.0, 6.0}) {
        const double mass = 2.0 * oracles::integrate_positive_axis(
                                      [nu](double t) { return student_renorm_pdf(nu, t); });
        CHECK(mass == Catch::Approx(1.0).margin(1e-9));
        const double second = 2.0 * oracles::integrate_positive_axis(
                                        [nu](double t) { return t * t * student_renorm_pdf(nu, t); });
        CHECK(second == Catch::Approx(1.0).margin(1e-6));
    }
}

TEST_CASE("h_nu_pdf values and change of variables") {
    CHECK(h_nu_pdf(3.0, 1.0) == Catch::Approx(1.0 / (2.0 * M_PI)).epsilon(1e-14));
    // leading tau^(-1/2) divergence at the origin
    CHECK(h_nu_pdf(3.0, 1e-8) == Catch::Approx((2.0 / M_PI) * 1e4).epsilon(1e-6));
    for (double nu : {2.5, 3.0, 4.0, 6.0})
        for (double tau : {0.01, 0.4, 1.0, 7.0, 120.0}) {
            const double via_pdf = student_renorm_pdf(nu, std::sqrt(tau)) / std::sqrt(tau);
            CHECK(h_nu_pdf(nu, tau) == Catch::Approx(via_pdf).epsilon(1e-14));
        }
    CHECK_THROWS_AS(h_nu_pdf(3.0, 0.0), std::domain_error);
    CHECK_THROWS_AS(h_nu_pdf(3.0, -1.0), std::domain_error);
}

TEST_CASE("h3 histogram of squared Student samples matches the density") {
    const auto draws = sample(VolatilityModel::student(3.0), 1000000, 314159);
    const int bins = 40;
    const double lo = 0.25, hi = 4.0;
    const double width = (hi - lo) / bins;
    std::vector<double> counts(bins, 0.0);
    for (double v : draws) {
        const double sq = v * v;
        if (sq >= lo && sq < hi) counts[static_cast<int>((sq - lo) / width)] += 1.0;
    }
    // exact bin masses from the closed-form tail
    double sup = 0.0;
    for (int b = 0; b < bins; ++b) {
        const double a = lo + b * width, c = a + width;
        const double expected = (h3_tail(a) - h3_tail(c)) / width;
        const double observed = counts[b] / (draws.size() * width);
        sup = std::max(sup, std::fabs(observed - expected));
    }
    CHECK(sup <= 0.01);
}

TEST_CASE("h3_tail closed form") {
    CHECK(h3_tail(1.0) == Catch::Approx(0.5 - 1.0 / M_PI).epsilon(1e-14));
    CHECK(h3_tail(1e-12) == Catch::Approx(1.0).margin(1e-5));
    CHECK(h3_tail(1e12) == Catch::Approx(0.0).margin(1e-5));
    double prev = h3_tail(1e-3);
    for (double tau = 1e-2; tau < 1e4; tau *= 3.0) {
        const double cur = h3_tail(tau);
        CHECK(cur < prev);
        prev = cur;
    }
    CHECK_THROWS_AS(h3_tail(0.0), std::domain_error);

    // exact complement of the integrated density
    for (double tau : {0.1, 1.0, 10.0, 100.0}) {
        // substituting tau = v^2 removes the v^(-1) singularity of h3
        const double cdf = oracles::integrate(
            [](double v) { return (4.0 / M_PI) / ((1.0 + v * v) * (1.0 + v * v)); }, 0.0,
            std::sqrt(tau), 1e-13);
        CHECK(h3_tail(tau) == Catch::Approx(1.0 - cdf).margin(1e-10));
    }
}

TEST_CASE("frechet cdf and pdf") {
    const FrechetLaw law(1.5);
    CHECK(frechet_cdf(law, 1.0) == Catch::Approx(std::exp(-1.0)).epsilon(1e-14));
    CHECK(frechet_cdf(law, 0.0) == 0.0);
    CHECK(frechet_cdf(law, -3.0) == 0.0);
    CHECK(frechet_cdf(law, 4.0) == Catch::Approx(std::exp(-0.125)).epsilon(1e-14));
    double prev = -1.0;
    for (double x = -1.0; x < 20.0; x += 0.25) {
        const double cur = frechet_cdf(law, x);
        CHECK(cur >= prev);
        prev = cur;
    }
    for (double x : {0.5, 1.0, 2.0, 5.0}) {
        const double h = 1e-6 * x;
        const double fd = (frechet_cdf(law, x + h) - frechet_cdf(law, x - h)) / (2.0 * h);
        CHECK(fd == Catch::Approx(frechet_pdf(law, x)).epsilon(1e-6));
    }
    CHECK_THROWS_AS(FrechetLaw(0.0), std::domain_error);
}

TEST_CASE("samplers are deterministic and match their moments") {
    SECTION("constant law is degenerate") {
        const auto v = sample(VolatilityModel::constant(2.0), 3, 99);
        CHECK(v == std::vector<double>{2.0, 2.0, 2.0});
    }
    SECTION("same seed, same stream") {
        const auto a = sample(NoiseModel::gaussian(), 1000, 77);
        const auto b = sample(NoiseModel::gaussian(), 1000, 77);
        CHECK(a == b);
        const auto c = sample(NoiseModel::gaussian(), 1000, 78);
        CHECK(a != c);
    }
    SECTION("gaussian CLT-scale mean") {
        const auto v = sample(NoiseModel::gaussian(), 1000000, 2024);
        double mean = 0.0;
        for (double x : v) mean += x;
        mean /= v.size();
        CHECK(std::fabs(mean) <= 0.005);
    }
    SECTION("student variance is near one (heavy-tailed estimator, loose band)") {
        const auto v = sample(VolatilityModel::student(3.0), 1000000, 4096);
        double ss = 0.0;
        for (double x : v) ss += x * x;
        CHECK(ss / v.size() > 0.9);
        CHECK(ss / v.size() < 1.1);
    }
    SECTION("rademacher is exactly +-1 with unit variance") {
        const auto v = sample(NoiseModel::rademacher(), 100000, 5);
        double mean = 0.0;
        for (double x : v) {
            CHECK(std::fabs(x) == 1.0);
            mean += x;
        }
        CHECK(std::fabs(mean / v.size()) < 0.02);
    }
    SECTION("renormalised uniform has unit variance") {
        const auto v = sample(NoiseModel::uniform_renormalised(), 1000000, 6);
        double mean = 0.0, ss = 0.0;
        for (double x : v) {
            CHECK(std::fabs(x) <= std::sqrt(3.0));
            mean += x;
            ss += x * x;
        }
        mean /= v.size();
        CHECK(std::fabs(mean) < 0.005);
        CHECK(ss / v.size() - mean * mean == Catch::Approx(1.0).margin(0.005));
    }
    SECTION("normal volatility has unit second moment") {
        const auto v = sample(VolatilityModel::standard_normal(), 1000000, 7);
        double ss = 0.0;
        for (double x : v) ss += x * x;
        CHECK(ss / v.size() == Catch::Approx(1.0).margin(0.01));
    }
    SECTION("student(4) also renormalised to unit variance") {
        const auto v = sample(VolatilityModel::student(4.0), 1000000, 8);
        double ss = 0.0;
        for (double x : v) ss += x * x;
        CHECK(ss / v.size() == Catch::Approx(1.0).margin(0.05));
    }
    CHECK_THROWS_AS(sample(NoiseModel::gaussian(), 0, 1), std::invalid_argument);
    CHECK_THROWS_AS(VolatilityModel::student(2.0), std::domain_error);
    CHECK_THROWS_AS(VolatilityModel::constant(0.0), std::domain_error);
}
