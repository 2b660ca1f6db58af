#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <vector>

#include "touchsim/rng.hpp"

using namespace touchsim;

TEST_CASE("Rng streams are deterministic per seed") {
    Rng a(42), b(42), c(43);
    std::vector<double> va, vb, vc;
    for (int i = 0; i < 100; ++i) {
        va.push_back(a.uniform());
        vb.push_back(b.uniform());
        vc.push_back(c.uniform());
    }
    CHECK(va == vb);
    CHECK(va != vc);
}

TEST_CASE("uniform lies in [0,1) and has the right mean") {
    Rng rng(7);
    double sum = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double u = rng.uniform();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        sum += u;
    }
    // sd of the mean = sqrt(1/12)/sqrt(n)
    CHECK(std::abs(sum / n - 0.5) < 3.0 * std::sqrt(1.0 / 12.0 / n));
}

TEST_CASE("exponential draws have the requested rate") {
    Rng rng(11);
    const double rate = 0.25;
    const int n = 200000;
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = rng.exponential(rate);
        REQUIRE(x >= 0.0);
        sum += x;
    }
    const double mean = sum / n;
    // mean of Exp(rate) is 1/rate with sd 1/rate
    CHECK(std::abs(mean - 1.0 / rate) < 3.0 / (rate * std::sqrt(double(n))));
}

TEST_CASE("bernoulli frequency matches p") {
    Rng rng(13);
    const double p = 0.0173;
    const int n = 500000;
    int hits = 0;
    for (int i = 0; i < n; ++i) hits += rng.bernoulli(p) ? 1 : 0;
    const double se = std::sqrt(p * (1 - p) / n);
    CHECK(std::abs(double(hits) / n - p) < 3.0 * se);
}

TEST_CASE("sub_seed separates streams by tag") {
    CHECK(sub_seed(1, "a") != sub_seed(1, "b"));
    CHECK(sub_seed(1, "a") != sub_seed(2, "a"));
    CHECK(sub_seed(1, "a") == sub_seed(1, "a"));
    Rng a(sub_seed(5, "moves")), b(sub_seed(5, "times"));
    CHECK(a.uniform() != b.uniform());
}

TEST_CASE("below is bounded") {
    Rng rng(3);
    for (int i = 0; i < 1000; ++i) REQUIRE(rng.below(7) < 7);
}

TEST_CASE("nanosecond quantization is idempotent and faithful") {
    for (double t : {0.0, 1.0, 11.9, 123.456789123, 499999.999999999}) {
        const double q = quantize_time_ns(t);
        CHECK(quantize_time_ns(q) == q);
        CHECK(std::abs(q - t) <= 5e-10);
    }
}
