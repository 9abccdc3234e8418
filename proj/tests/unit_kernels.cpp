#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdlib>
#include <vector>

#include "fnce/kernels.hpp"
#include "fnce/rng.hpp"

using namespace fnce;

namespace {

std::vector<double> random_vec(std::size_t n, Rng& rng, double lo = -2.0, double hi = 2.0) {
    std::vector<double> v(n);
    for (double& x : v) x = rng.uniform(lo, hi);
    return v;
}

}  // namespace

TEST_CASE("scalar dot known values") {
    const double a[] = {1.0, 2.0, 3.0};
    const double b[] = {4.0, -5.0, 6.0};
    CHECK(kern::scalar::dot(a, b, 3) == doctest::Approx(12.0).epsilon(1e-15));
    CHECK(kern::scalar::dot(a, b, 0) == 0.0);
}

TEST_CASE("scalar sum and max") {
    const double a[] = {0.5, -1.25, 2.0, 0.25};
    CHECK(kern::scalar::sum(a, 4) == 1.5);
    CHECK(kern::scalar::max_value(a, 4) == 2.0);
}

TEST_CASE("scalar axpy and scale") {
    double y[] = {1.0, 1.0, 1.0};
    const double x[] = {1.0, 2.0, 3.0};
    kern::scalar::axpy(2.0, x, y, 3);
    CHECK(y[0] == 3.0);
    CHECK(y[1] == 5.0);
    CHECK(y[2] == 7.0);
    kern::scalar::scale(y, 0.5, 3);
    CHECK(y[0] == 1.5);
    CHECK(y[2] == 3.5);
}

TEST_CASE("scalar squared distance") {
    const double a[] = {1.0, 0.0};
    const double b[] = {-1.0, 0.0};
    CHECK(kern::scalar::squared_distance(a, b, 2) == 4.0);
}

TEST_CASE("dispatch agrees with scalar kernels across lengths") {
    Rng rng(7);
    // Lengths straddle the vector width and the unrolled main loop.
    for (std::size_t n : {std::size_t(1), std::size_t(3), std::size_t(4), std::size_t(7),
                          std::size_t(8), std::size_t(17), std::size_t(64), std::size_t(129),
                          std::size_t(1000)}) {
        const std::vector<double> a = random_vec(n, rng);
        const std::vector<double> b = random_vec(n, rng);
        CHECK(kern::dot(a.data(), b.data(), n) ==
              doctest::Approx(kern::scalar::dot(a.data(), b.data(), n)).epsilon(1e-13));
        CHECK(kern::sum(a.data(), n) ==
              doctest::Approx(kern::scalar::sum(a.data(), n)).epsilon(1e-13));
        CHECK(kern::max_value(a.data(), n) == kern::scalar::max_value(a.data(), n));
        CHECK(kern::squared_distance(a.data(), b.data(), n) ==
              doctest::Approx(kern::scalar::squared_distance(a.data(), b.data(), n))
                  .epsilon(1e-13));
        std::vector<double> y1 = b, y2 = b;
        kern::axpy(1.7, a.data(), y1.data(), n);
        kern::scalar::axpy(1.7, a.data(), y2.data(), n);
        for (std::size_t i = 0; i < n; ++i) CHECK(y1[i] == doctest::Approx(y2[i]).epsilon(1e-13));
        kern::scale(y1.data(), -0.3, n);
        kern::scale(y2.data(), -0.3, n);
        for (std::size_t i = 0; i < n; ++i) CHECK(y1[i] == doctest::Approx(y2[i]).epsilon(1e-13));
    }
}

#if defined(FNCE_HAS_AVX2_KERNELS)
TEST_CASE("avx2 kernels match scalar within accumulation tolerance") {
    if (kern::active_level() != kern::Level::avx2) {
        MESSAGE("avx2 not active on this host; skipping");
        return;
    }
    Rng rng(11);
    for (std::size_t n : {std::size_t(1), std::size_t(2), std::size_t(5), std::size_t(8),
                          std::size_t(13), std::size_t(32), std::size_t(100),
                          std::size_t(4097)}) {
        const std::vector<double> a = random_vec(n, rng);
        const std::vector<double> b = random_vec(n, rng);
        CHECK(kern::avx2::dot(a.data(), b.data(), n) ==
              doctest::Approx(kern::scalar::dot(a.data(), b.data(), n)).epsilon(1e-12));
        CHECK(kern::avx2::sum(a.data(), n) ==
              doctest::Approx(kern::scalar::sum(a.data(), n)).epsilon(1e-12));
        CHECK(kern::avx2::max_value(a.data(), n) == kern::scalar::max_value(a.data(), n));
        CHECK(kern::avx2::squared_distance(a.data(), b.data(), n) ==
              doctest::Approx(kern::scalar::squared_distance(a.data(), b.data(), n))
                  .epsilon(1e-12));
        std::vector<double> y1 = b, y2 = b;
        kern::avx2::axpy(-2.5, a.data(), y1.data(), n);
        kern::scalar::axpy(-2.5, a.data(), y2.data(), n);
        for (std::size_t i = 0; i < n; ++i)
            CHECK(y1[i] == doctest::Approx(y2[i]).epsilon(1e-12));
    }
}

TEST_CASE("avx2 kernels are run-to-run deterministic") {
    if (kern::active_level() != kern::Level::avx2) {
        MESSAGE("avx2 not active on this host; skipping");
        return;
    }
    Rng rng(13);
    const std::vector<double> a = random_vec(1003, rng);
    const std::vector<double> b = random_vec(1003, rng);
    const double d1 = kern::avx2::dot(a.data(), b.data(), a.size());
    const double d2 = kern::avx2::dot(a.data(), b.data(), a.size());
    CHECK(d1 == d2);
    const double s1 = kern::avx2::sum(a.data(), a.size());
    const double s2 = kern::avx2::sum(a.data(), a.size());
    CHECK(s1 == s2);
}
#endif

TEST_CASE("rng is stable across constructions") {
    Rng a(123), b(123);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
    Rng c(123), d(124);
    CHECK(c.next_u64() != d.next_u64());
}

TEST_CASE("rng uniform stays in [0,1) and has sane mean") {
    Rng rng(5);
    double acc = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        const double u = rng.uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        acc += u;
    }
    CHECK(acc / n == doctest::Approx(0.5).epsilon(0.01));
}

TEST_CASE("rng normal has sane moments") {
    Rng rng(6);
    double mean = 0.0, var = 0.0;
    const int n = 200000;
    std::vector<double> xs(n);
    for (double& x : xs) x = rng.normal();
    for (double x : xs) mean += x;
    mean /= n;
    for (double x : xs) var += (x - mean) * (x - mean);
    var /= n - 1;
    CHECK(mean == doctest::Approx(0.0).epsilon(1).scale(0.02));
    CHECK(var == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("rng shuffle permutes deterministically") {
    std::vector<int> v{0, 1, 2, 3, 4, 5, 6, 7};
    Rng a(9);
    a.shuffle(v);
    std::vector<int> w{0, 1, 2, 3, 4, 5, 6, 7};
    Rng b(9);
    b.shuffle(w);
    CHECK(v == w);
    std::vector<int> sorted = v;
    std::sort(sorted.begin(), sorted.end());
    CHECK(sorted == std::vector<int>{0, 1, 2, 3, 4, 5, 6, 7});
}

TEST_CASE("uniform_below covers the range without bias toward edges") {
    Rng rng(21);
    std::vector<int> counts(10, 0);
    for (int i = 0; i < 100000; ++i) ++counts[rng.uniform_below(10)];
    for (int c : counts) CHECK(c > 9000);
}
