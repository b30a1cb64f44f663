#include <cmath>
#include <random>

#include "doctest.h"
#include "rydft/levels.hpp"

using namespace rydft;

namespace {
RydbergState make(int n, Orbital l, int j2, int mj2, int mi2 = 3, double neff = 60.0) {
    return RydbergState{n, l, HalfInt(j2), HalfInt(mj2), HalfInt(mi2), neff};
}
}  // namespace

TEST_CASE("dipole selection rules") {
    // 70S_1/2 (mJ=1/2) -> 69P_3/2 (mJ=3/2)
    CHECK(dipole_allowed(make(70, Orbital::S, 1, 1), make(69, Orbital::P, 3, 3)));
    // same orbital forbidden
    CHECK_FALSE(dipole_allowed(make(70, Orbital::S, 1, 1), make(70, Orbital::S, 1, 1)));
    // |mJ| > J names no sublevel
    CHECK_FALSE(dipole_allowed(make(60, Orbital::D, 3, 3), make(60, Orbital::P, 3, 5)));
    // nuclear projection cannot change in a single E1 photon
    RydbergState a = make(70, Orbital::S, 1, 1, 3);
    RydbergState b = make(69, Orbital::P, 3, 1, 1);
    CHECK_FALSE(dipole_allowed(a, b));
    // delta J = 2 forbidden
    CHECK_FALSE(dipole_allowed(make(70, Orbital::S, 1, 1), make(69, Orbital::P, 5, 1)));
}

TEST_CASE("dipole rule is symmetric") {
    std::mt19937 rng(7);
    std::uniform_int_distribution<int> orb(0, 3), j2(0, 2), m(-2, 2);
    for (int i = 0; i < 200; ++i) {
        RydbergState a = make(50 + i % 3, static_cast<Orbital>(orb(rng)), 2 * j2(rng) + 1,
                              2 * m(rng) + 1, 3);
        RydbergState b = make(50 + i % 5, static_cast<Orbital>(orb(rng)), 2 * j2(rng) + 1,
                              2 * m(rng) + 1, 3);
        CHECK(dipole_allowed(a, b) == dipole_allowed(b, a));
    }
}

TEST_CASE("bundled branching table") {
    auto table = rb87_70s_rd_branching();
    CHECK(table.ratio({HalfInt::from_int(2), HalfInt::from_int(2)}) == doctest::Approx(0.534));
    CHECK(table.ratio({HalfInt::from_int(1), HalfInt::from_int(1)}) == doctest::Approx(0.168));
    CHECK(table.entries().size() == 8);
    CHECK(std::abs(table.deficit()) <= 2.5e-4);
}

TEST_CASE("branching table round-trips through CSV") {
    auto table = rb87_70s_rd_branching();
    auto again = load_branching_table(table.to_csv());
    for (const auto& [f, r] : table.entries()) CHECK(again.ratio(f) == doctest::Approx(r));
}

TEST_CASE("branching table rejects bad rows") {
    CHECK_THROWS(load_branching_table("F,mF,ratio\n2,2,1.5\n"));
    CHECK_THROWS(load_branching_table("F,mF,ratio\n2,2,0.3\n2,2,0.2\n"));
    CHECK_THROWS(load_branching_table("F,mF,ratio\n1,2,0.3\n"));  // |mF| > F
}

TEST_CASE("bbr target table normalizes") {
    auto t = rb87_70s_bbr_targets();
    REQUIRE(t.entries.size() == 4);
    double sum = 0.0;
    for (auto& [r, w] : t.entries) {
        CHECK(w >= 0.0);
        sum += w;
    }
    CHECK(sum == doctest::Approx(1.0));
}

TEST_CASE("bbr rate scaling laws") {
    double base = bbr_total_rate(300.0, 66.87);
    CHECK(bbr_total_rate(600.0, 66.87) == doctest::Approx(2.0 * base));
    CHECK(bbr_total_rate(300.0, 2 * 66.87) == doctest::Approx(base / 4.0));
    // scaling invariant: rate * n^2 / T constant over a grid
    double ref = base * 66.87 * 66.87 / 300.0;
    for (double T : {4.0, 77.0, 650.0})
        for (double n : {30.0, 50.0, 90.0})
            CHECK(bbr_total_rate(T, n) * n * n / T == doctest::Approx(ref));
    // frozen hand evaluation of 4 kB T/(3 c^3 n_eff^2) at T=300 K, n_eff=66.87
    CHECK(base == doctest::Approx(4549.0).epsilon(0.01));
    CHECK_THROWS(bbr_total_rate(-1.0, 60.0));
    CHECK_THROWS(bbr_total_rate(300.0, 0.0));
}

TEST_CASE("rd rate cube law") {
    CHECK(rd_rate_scaled(100.0, 66.9, 66.9) == doctest::Approx(100.0));
    CHECK(rd_rate_scaled(100.0, 60.0, 120.0) == doctest::Approx(12.5));
    double prev = 1e99;
    for (double n = 40.0; n < 100.0; n += 7.0) {
        double r = rd_rate_scaled(1000.0, 40.0, n);
        CHECK(r <= prev);
        prev = r;
    }
    CHECK_THROWS(rd_rate_scaled(-1.0, 60.0, 70.0));
}

TEST_CASE("species encodings") {
    auto s87 = rb87();
    CHECK(s87.I == HalfInt(3));
    CHECK(s87.qubit1.F == HalfInt::from_int(2));
    CHECK(s87.qubit1.mF == HalfInt::from_int(1));
    CHECK(s87.qubit0.F == HalfInt::from_int(1));
    CHECK(s87.qubit0.mF == HalfInt::from_int(-1));
    CHECK_FALSE(s87.supports_bias_preserving());
    auto s85 = rb85();
    CHECK(s85.I == HalfInt(5));
    CHECK(s85.supports_bias_preserving());
    CHECK(s85.stretched_ground_plus.mF == HalfInt::from_int(3));
}
