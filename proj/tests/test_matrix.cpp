#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "casolv/matrix.hpp"

using casolv::Rational;
using casolv::SquareMatrix;

namespace {

SquareMatrix<Rational> random_matrix(std::mt19937& rng, int order) {
    std::uniform_int_distribution<int> num(-10, 10);
    std::uniform_int_distribution<int> den(1, 7);
    SquareMatrix<Rational> m(order);
    for (int r = 0; r < order; ++r)
        for (int c = 0; c < order; ++c) m(r, c) = casolv::rational(num(rng), den(rng));
    return m;
}

}  // namespace

TEST_CASE("det_exact on small known matrices") {
    SquareMatrix<Rational> id{{Rational(1), Rational(0)}, {Rational(0), Rational(1)}};
    CHECK(casolv::det_exact(id) == 1);

    SquareMatrix<Rational> m{{Rational(3), Rational(5)}, {Rational(5), Rational(9)}};
    CHECK(casolv::det_exact(m) == 2);

    SquareMatrix<Rational> sing{{Rational(2), Rational(4)}, {Rational(2), Rational(4)}};
    CHECK(casolv::det_exact(sing) == 0);
}

TEST_CASE("det_exact handles rational entries") {
    SquareMatrix<Rational> m{{casolv::rational(1, 2), casolv::rational(1, 3)},
                             {casolv::rational(1, 5), casolv::rational(1, 7)}};
    CHECK(casolv::det_exact(m) == casolv::rational(1, 14) - casolv::rational(1, 15));
}

TEST_CASE("det_exact requires a pivot search (zero leading pivot)") {
    SquareMatrix<Rational> m{{Rational(0), Rational(2)}, {Rational(3), Rational(1)}};
    CHECK(casolv::det_exact(m) == -6);
}

TEST_CASE("det_exact agrees with det_bruteforce on random matrices") {
    std::mt19937 rng(42);
    for (int trial = 0; trial < 100; ++trial) {
        int order = 2 + trial % 4;
        auto m = random_matrix(rng, order);
        CHECK(casolv::det_exact(m) == casolv::det_bruteforce(m));
    }
}

TEST_CASE("determinant is multilinear in rows and alternating") {
    std::mt19937 rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        auto m = random_matrix(rng, 4);
        Rational base = casolv::det_exact(m);

        auto scaled = m;
        for (int c = 0; c < 4; ++c) scaled(1, c) *= casolv::rational(3, 2);
        CHECK(casolv::det_exact(scaled) == base * casolv::rational(3, 2));

        auto swapped = m;
        for (int c = 0; c < 4; ++c) std::swap(swapped(0, c), swapped(2, c));
        CHECK(casolv::det_exact(swapped) == -base);
    }
}

TEST_CASE("det_bruteforce rejects orders above the cap") {
    SquareMatrix<Rational> m(6);
    CHECK_THROWS_AS(casolv::det_bruteforce(m), std::invalid_argument);
}

TEST_CASE("det_float on benign matrices") {
    SquareMatrix<double> id{{1.0, 0.0}, {0.0, 1.0}};
    auto res = casolv::det_float(id);
    CHECK(res.value == 1.0);
    CHECK(res.growth == 1.0);
    CHECK_FALSE(res.singular);

    SquareMatrix<double> diag{{2.0, 0.0, 0.0}, {0.0, 3.0, 0.0}, {0.0, 0.0, 5.0}};
    res = casolv::det_float(diag);
    CHECK(res.value == doctest::Approx(30.0));
    CHECK(res.growth == doctest::Approx(1.0));
}

TEST_CASE("det_float flags exactly singular input") {
    SquareMatrix<double> m{{1.0, 2.0}, {2.0, 4.0}};
    auto res = casolv::det_float(m);
    CHECK(res.singular);
}

TEST_CASE("det_float growth diagnostic detects cancellation") {
    // nearly parallel rows: huge entries, tiny determinant
    SquareMatrix<double> m{{1e8, 1e8 + 1.0}, {1e8 - 1.0, 1e8}};
    auto res = casolv::det_float(m);
    CHECK(res.growth > 1e10);
}

TEST_CASE("det_float tracks det_exact on random rational matrices") {
    std::mt19937 rng(99);
    for (int trial = 0; trial < 50; ++trial) {
        int order = 2 + trial % 4;
        auto m = random_matrix(rng, order);
        SquareMatrix<double> f(order);
        for (int r = 0; r < order; ++r)
            for (int c = 0; c < order; ++c) f(r, c) = casolv::to_double(m(r, c));
        double exact = casolv::to_double(casolv::det_exact(m));
        double approx = casolv::det_float(f).value;
        CHECK(std::abs(approx - exact) <= 1e-10 * std::max(1.0, std::abs(exact)));
    }
}
