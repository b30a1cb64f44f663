#include <cmath>
#include <random>

#include "doctest.h"
#include "rydft/geometry.hpp"

using namespace rydft;

TEST_CASE("ryd7 layout distances quoted for the (3,3,1) gate") {
    Layout l = ryd7_triangular();
    int a3 = l.data_atom(0, 3), b3 = l.data_atom(1, 3), c1 = l.data_atom(2, 1);
    CHECK(l.dist(a3, b3) == doctest::Approx(3.0));
    CHECK(l.dist(a3, c1) == doctest::Approx(std::sqrt(13.0)));
    CHECK(l.dist(b3, c1) == doctest::Approx(4.0));
    // nearest-neighbor spacing within a block is exactly d
    CHECK(l.dist2_int(l.data_atom(0, 3), l.data_atom(0, 2)) == 1);
}

TEST_CASE("ryd7 transversal CZ pairs sit at 3d") {
    Layout l = ryd7_triangular();
    for (int j = 1; j <= 7; ++j)
        CHECK(l.dist(l.data_atom(0, j), l.data_atom(1, j)) == doctest::Approx(3.0));
}

namespace {

std::vector<EntanglingStep> ryd7_ccz_steps(const Layout& l, bool reduced) {
    std::vector<EntanglingStep> steps;
    std::array<int, 3> targets = reduced ? std::array<int, 3>{3, 5, 6} : std::array<int, 3>{1, 2, 3};
    for (int j = 1; j <= 3; ++j)
        for (int k = 1; k <= 3; ++k)
            for (int t : targets)
                steps.push_back(
                    {{l.data_atom(0, j), l.data_atom(1, k), l.data_atom(2, t)}, true,
                     RydClass::Single});
    return steps;
}

}  // namespace

TEST_CASE("min blockade radius for the Ryd-7 CCZ gate sets") {
    Layout l = ryd7_triangular();
    CHECK(min_blockade_radius(l, ryd7_ccz_steps(l, false)) ==
          doctest::Approx(std::sqrt(13.0)).epsilon(1e-12));
    CHECK(min_blockade_radius(l, ryd7_ccz_steps(l, true)) == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("min blockade radius for the Ryd-3 Toffoli variants") {
    Layout l = ryd3_triangular();
    auto geo = ryd3_toffoli_geometry(l);
    std::vector<EntanglingStep> direct, relay;
    for (int j = 1; j <= 3; ++j)
        for (int k = 1; k <= 3; ++k) {
            auto [fl, fr] = geo.flanks[j];
            bool problem = (k == 2) && (j == 1 || j == 3);
            for (const std::string& f : {fl, fr})
                direct.push_back({{l.data_atom(0, j), l.data_atom(1, k), l.ancilla(f)}, false,
                                  RydClass::R1});
            if (!problem) {
                for (const std::string& f : {fl, fr})
                    relay.push_back({{l.data_atom(0, j), l.data_atom(1, k), l.ancilla(f)}, false,
                                     RydClass::R1});
            } else {
                std::string near = (fl == geo.far_ancilla) ? fr : fl;
                relay.push_back({{l.data_atom(0, j), l.data_atom(1, k), l.ancilla(near)}, false,
                                 RydClass::R1});
                relay.push_back(
                    {{l.data_atom(0, j), l.data_atom(1, k), l.ancilla(geo.substitute[j])},
                     false, RydClass::R1});
                relay.push_back({{l.ancilla(geo.substitute[j]), l.ancilla(geo.far_ancilla)},
                                 false, RydClass::R1});
            }
        }
    CHECK(min_blockade_radius(l, direct) == doctest::Approx(std::sqrt(13.0)).epsilon(1e-12));
    CHECK(min_blockade_radius(l, relay) == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("square-lattice Ryd-3 CCZ needs sqrt(10) d") {
    Layout l = ryd3_square();
    std::vector<EntanglingStep> steps;
    for (int j = 1; j <= 3; ++j)
        for (int k = 1; k <= 3; ++k)
            for (int t = 1; t <= 3; ++t)
                steps.push_back(
                    {{l.data_atom(0, j), l.data_atom(1, k), l.data_atom(2, t)}, true,
                     RydClass::R1});
    CHECK(min_blockade_radius(l, steps) == doctest::Approx(std::sqrt(10.0)).epsilon(1e-12));
}

TEST_CASE("two-of-three rule drops the largest pair") {
    Layout l = ryd7_triangular();
    EntanglingStep s{{l.data_atom(0, 3), l.data_atom(1, 3), l.data_atom(2, 1)}, true,
                     RydClass::Single};
    auto pairs = required_pairs(l, s);
    REQUIRE(pairs.size() == 2);
    for (auto [i, j] : pairs) CHECK(l.dist(i, j) <= std::sqrt(13.0) + 1e-12);
    // fixed-role gates keep both control-target links
    EntanglingStep f = s;
    f.reassignable_roles = false;
    auto fixed = required_pairs(l, f);
    CHECK(fixed[0].second == l.data_atom(2, 1));
    CHECK(fixed[1].second == l.data_atom(2, 1));
}

TEST_CASE("feasibility is monotone when gates are added") {
    Layout l = ryd7_triangular();
    std::mt19937 rng(11);
    auto steps = ryd7_ccz_steps(l, false);
    std::shuffle(steps.begin(), steps.end(), rng);
    double prev = 0.0;
    std::vector<EntanglingStep> acc;
    for (const auto& s : steps) {
        acc.push_back(s);
        double r = min_blockade_radius(l, acc);
        CHECK(r >= prev - 1e-12);
        prev = r;
    }
}

TEST_CASE("every bundled protocol step passes gate_feasible at its radius") {
    Layout l7 = ryd7_triangular();
    for (const auto& s : ryd7_ccz_steps(l7, true)) CHECK(gate_feasible(l7, s, l7.rb));
    Layout l3 = ryd3_triangular();
    // stabilizer CNOT triples: control and relay adjacent to each target
    for (int lq = 0; lq < 3; ++lq) {
        auto block = l3.logical_block(lq);
        for (int q : block) {
            int neighbors = 0;
            for (int i = 0; i < l3.size(); ++i)
                if (l3.atoms[i].kind == AtomAssignment::Kind::Ancilla &&
                    l3.dist2_int(i, q) == 1)
                    ++neighbors;
            CHECK(neighbors >= 1);
        }
    }
}

TEST_CASE("layout JSON round-trip") {
    Layout l = ryd3_triangular();
    Layout back = Layout::from_json(l.to_json());
    CHECK(back.size() == l.size());
    CHECK(back.rb1 == doctest::Approx(l.rb1));
    CHECK(back.data_atom(2, 3) == l.data_atom(2, 3));
    CHECK(back.dist2_int(0, 5) == l.dist2_int(0, 5));
}

TEST_CASE("transport heating") {
    // D = 50 um in 250 us at w0 = 2pi x 50 kHz with the 85Rb mass
    double m85 = 84.9118 * 1.66053907e-27;
    auto h = transport_heating(50e-6, 250e-6, 2 * M_PI * 50e3, m85);
    CHECK(h.delta_n < 1.0);
    CHECK(h.delta_n > 0.9);  // close to the bound, as stated
    // T^4 and D^2 laws
    auto h2 = transport_heating(50e-6, 500e-6, 2 * M_PI * 50e3, m85);
    CHECK(h.delta_e_joule / h2.delta_e_joule == doctest::Approx(16.0));
    auto h3 = transport_heating(100e-6, 250e-6, 2 * M_PI * 50e3, m85);
    CHECK(h3.delta_e_joule / h.delta_e_joule == doctest::Approx(4.0));
    CHECK_THROWS(transport_heating(-1, 1, 1, 1));
}
