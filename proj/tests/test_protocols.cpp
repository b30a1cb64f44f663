#include <cmath>
#include <set>

#include "doctest.h"
#include "rydft/campaign.hpp"
#include "rydft/protocols.hpp"

using namespace rydft;

namespace {

// weight of the target atom being at qubit level `bit` in the final state
double level_weight(const Register& r, int atom, int bit) {
    double w = 0.0;
    for (const auto& [k, a] : r.amplitudes())
        if (k.get(atom) == bit) w += std::norm(a);
    return w;
}

struct CnotSite {
    int control, target, relay;
};

CnotSite cnot_site(const Layout& lay) {
    auto block = lay.logical_block(0);
    int target = block[0];
    for (int i = 0; i < lay.size(); ++i) {
        if (lay.atoms[i].kind != AtomAssignment::Kind::Ancilla) continue;
        if (lay.dist2_int(i, target) != 1) continue;
        LatticePos want{2 * lay.atoms[target].pos.a - lay.atoms[i].pos.a,
                        2 * lay.atoms[target].pos.b - lay.atoms[i].pos.b};
        for (int k = 0; k < lay.size(); ++k)
            if (k != i && lay.atoms[k].kind == AtomAssignment::Kind::Ancilla &&
                lay.atoms[k].pos == want)
                return {i, target, k};
    }
    throw std::runtime_error("no collinear site");
}

}  // namespace

TEST_CASE("bias-preserving CNOT truth table is exact") {
    Layout lay = ryd3_triangular();
    auto site = cnot_site(lay);
    for (int c = 0; c < 2; ++c)
        for (int t = 0; t < 2; ++t) {
            SimContext ctx(lay, rb85(), {});
            ctx.reg.set_qubit(site.control, c ? 0.0 : 1.0, c ? 1.0 : 0.0);
            ctx.reg.set_qubit(site.target, t ? 0.0 : 1.0, t ? 1.0 : 0.0);
            bias_preserving_cnot(ctx, site.control, site.target, site.relay);
            int want = t ^ c;
            CHECK(level_weight(ctx.reg, site.target, want) == doctest::Approx(1.0));
            CHECK(level_weight(ctx.reg, site.control, c) == doctest::Approx(1.0));
            // relay uncomputed
            CHECK(level_weight(ctx.reg, site.relay, 0) == doctest::Approx(1.0));
            CHECK(ctx.counts.two_qubit == 2);
            CHECK(ctx.counts.three_qubit == 1);
        }
}

TEST_CASE("bias-preserving CNOT preserves superpositions (exact CNOT unitary)") {
    Layout lay = ryd3_triangular();
    auto site = cnot_site(lay);
    SimContext ctx(lay, rb85(), {});
    ctx.reg.set_qubit(site.control, std::sqrt(0.3), std::sqrt(0.7));
    ctx.reg.set_qubit(site.target, 1.0, 0.0);
    bias_preserving_cnot(ctx, site.control, site.target, site.relay);
    // ideal: sqrt(0.3)|00> + sqrt(0.7)|11>
    Register ideal(lay, rb85());
    ideal.set_block_amplitudes({site.control, site.target},
                               {{{0, 0}, std::sqrt(0.3)}, {{1, 1}, std::sqrt(0.7)}});
    CHECK(std::abs(ctx.reg.overlap(ideal)) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("bias-preserving Toffoli truth table (direct and relay variants)") {
    Layout lay = ryd3_triangular();
    auto geo = ryd3_toffoli_geometry(lay);
    // j=2 gate: flanks A1/A2, no substitution needed
    int c1 = lay.data_atom(0, 2), c2 = lay.data_atom(1, 1), t = lay.data_atom(2, 2);
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
            for (int v = 0; v < 2; ++v) {
                SimContext ctx(lay, rb85(), {});
                ctx.reg.set_qubit(c1, a ? 0.0 : 1.0, a ? 1.0 : 0.0);
                ctx.reg.set_qubit(c2, b ? 0.0 : 1.0, b ? 1.0 : 0.0);
                ctx.reg.set_qubit(t, v ? 0.0 : 1.0, v ? 1.0 : 0.0);
                bias_preserving_toffoli(ctx, c1, c2, t, geo.flanks[2].first,
                                        geo.flanks[2].second, "");
                int want = v ^ (a & b);
                CHECK(level_weight(ctx.reg, t, want) == doctest::Approx(1.0));
                CHECK(ctx.counts.three_qubit == 5);
                CHECK(ctx.counts.two_qubit == 0);
            }
    // j=1, k=2 gate: the sqrt(13) pair, handled through the substitute relay
    int c1b = lay.data_atom(0, 1), c2b = lay.data_atom(1, 2), tb = lay.data_atom(2, 1);
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
            SimContext ctx(lay, rb85(), {});
            ctx.reg.set_qubit(c1b, a ? 0.0 : 1.0, a ? 1.0 : 0.0);
            ctx.reg.set_qubit(c2b, b ? 0.0 : 1.0, b ? 1.0 : 0.0);
            bias_preserving_toffoli(ctx, c1b, c2b, tb, geo.flanks[1].second, geo.far_ancilla,
                                    geo.substitute[1]);
            int want = a & b;
            CHECK(level_weight(ctx.reg, tb, want) == doctest::Approx(1.0));
            CHECK(ctx.counts.three_qubit == 5);
            CHECK(ctx.counts.two_qubit == 2);
        }
}

TEST_CASE("ryd7 logical |0> preparation is exact when fault-free") {
    Layout lay = ryd7_triangular();
    SimContext ctx(lay, rb87(), {});
    ryd7_prepare_zero(ctx, 0);
    Register ideal(lay, rb87());
    std::vector<int> atoms = lay.logical_block(0);
    std::vector<std::pair<std::vector<int>, cplx>> terms;
    for (auto t : steane_logical_terms(0)) {
        std::vector<int> bits;
        for (int q = 0; q < 7; ++q) bits.push_back((t >> q) & 1);
        terms.push_back({bits, 1.0 / (2.0 * std::sqrt(2.0))});
    }
    ideal.set_block_amplitudes(atoms, terms);
    CHECK(std::abs(ctx.reg.overlap(ideal)) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(ctx.counts.two_qubit == 9);
}

TEST_CASE("ryd7 QEC round on clean |0>_L: all +1 and 24 entangling gates") {
    Layout lay = ryd7_triangular();
    SimContext ctx(lay, rb87(), {});
    ryd7_prepare_zero(ctx, 0);
    ctx.counts = {};
    ctx.syndromes.clear();
    ryd7_qec_round(ctx, 0);
    CHECK(ctx.counts.two_qubit == 24);
    CHECK(ctx.counts.three_qubit == 0);
    REQUIRE(ctx.syndromes.size() == 6);
    for (const auto& s : ctx.syndromes) CHECK(s.value == 1);
    CHECK(ctx.corrections.empty());
}

TEST_CASE("injected Z before the round triggers the g3 path and is corrected") {
    Layout lay = ryd7_triangular();
    SimContext ctx(lay, rb87(), {});
    ryd7_prepare_zero(ctx, 0);
    Register snapshot = ctx.reg;
    ctx.reg.pauli_z(lay.data_atom(0, 1));  // Z on physical qubit 1
    ctx.counts = {};
    ryd7_qec_round(ctx, 0);
    // g3 = -1 flagged, sector re-measured unprotected (+12 gates), fixed
    CHECK(ctx.counts.two_qubit == 36);
    REQUIRE(!ctx.corrections.empty());
    CHECK(ctx.corrections[0].find('Z') != std::string::npos);
    CHECK(std::abs(ctx.reg.overlap(snapshot)) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("ryd7 logical CZ applies the logical phase") {
    CampaignConfig cfg;
    cfg.protocol = "ryd7-cz";
    cfg.input_state = "generic";
    // fault-free run through the campaign plumbing: verdict must be clean
    const auto& spec = protocol_registry().at(cfg.protocol);
    Layout lay = layout_for(cfg.protocol, cfg.exec);
    SimContext ctx(lay, rb87(), cfg.exec);
    // |1>_L|1>_L picks up a -1 relative to |0>_L|0>_L
    std::vector<cplx> coeffs = {0.5, 0.5, 0.5, 0.5};  // |++>_L
    std::vector<int> atoms;
    for (int b : {0, 1})
        for (int a : lay.logical_block(b)) atoms.push_back(a);
    std::vector<std::pair<std::vector<int>, cplx>> terms;
    for (unsigned idx = 0; idx < 4; ++idx) {
        auto ta = steane_logical_terms(idx >> 1);
        auto tb = steane_logical_terms(idx & 1);
        for (auto x : ta)
            for (auto y : tb) {
                std::vector<int> bits;
                for (int q = 0; q < 7; ++q) bits.push_back((x >> q) & 1);
                for (int q = 0; q < 7; ++q) bits.push_back((y >> q) & 1);
                terms.push_back({bits, coeffs[idx] / 8.0});
            }
    }
    ctx.reg.set_block_amplitudes(atoms, terms);
    spec.run(ctx);
    CHECK(ctx.counts.two_qubit == 7);
    // ideal: phases (+,+,+,-)
    Register ideal(lay, rb87());
    std::vector<std::pair<std::vector<int>, cplx>> iterms;
    for (unsigned idx = 0; idx < 4; ++idx) {
        double ph = idx == 3 ? -1.0 : 1.0;
        auto ta = steane_logical_terms(idx >> 1);
        auto tb = steane_logical_terms(idx & 1);
        for (auto x : ta)
            for (auto y : tb) {
                std::vector<int> bits;
                for (int q = 0; q < 7; ++q) bits.push_back((x >> q) & 1);
                for (int q = 0; q < 7; ++q) bits.push_back((y >> q) & 1);
                iterms.push_back({bits, ph * coeffs[idx] / 8.0});
            }
    }
    ideal.set_block_amplitudes(atoms, iterms);
    CHECK(std::abs(ctx.reg.overlap(ideal)) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("ryd7 logical CCZ phases |111>_L relative to |000>_L") {
    Layout lay = ryd7_triangular();
    for (auto set : {CczGateSet::ReducedJ, CczGateSet::Alg3}) {
        ExecOptions opts;
        opts.ccz_set = set;
        Layout l = lay;
        if (set == CczGateSet::Alg3) l.rb = std::sqrt(13.0);
        for (unsigned in : {0u, 7u, 5u}) {
            SimContext ctx(l, rb87(), opts);
            std::vector<int> atoms;
            for (int b : {0, 1, 2})
                for (int a : l.logical_block(b)) atoms.push_back(a);
            std::vector<std::pair<std::vector<int>, cplx>> terms;
            auto t0 = steane_logical_terms((in >> 2) & 1);
            auto t1 = steane_logical_terms((in >> 1) & 1);
            auto t2 = steane_logical_terms(in & 1);
            for (auto x : t0)
                for (auto y : t1)
                    for (auto z : t2) {
                        std::vector<int> bits;
                        for (int q = 0; q < 7; ++q) bits.push_back((x >> q) & 1);
                        for (int q = 0; q < 7; ++q) bits.push_back((y >> q) & 1);
                        for (int q = 0; q < 7; ++q) bits.push_back((z >> q) & 1);
                        terms.push_back({bits, cplx(1.0 / (16.0 * std::sqrt(2.0)))});
                    }
            ctx.reg.set_block_amplitudes(atoms, terms);
            Register before = ctx.reg;
            ryd7_logical_ccz(ctx);
            CHECK(ctx.counts.three_qubit == 27);
            CHECK(ctx.counts.two_qubit == 0);
            cplx ov = before.overlap(ctx.reg);
            // global phase equal across inputs up to the CCZ sign on |111>
            double want = in == 7 ? -1.0 : 1.0;
            CHECK(std::abs(ov) == doctest::Approx(1.0).epsilon(1e-9));
            static cplx ref;
            if (in == 0) ref = ov;
            CHECK(std::abs(ov / ref - want) < 1e-9);
        }
    }
}

TEST_CASE("ryd3 stabilizer round on clean states and after a Z error") {
    Layout lay = ryd3_triangular();
    SimContext ctx(lay, rb85(), {});
    std::vector<int> atoms = lay.logical_block(0);
    std::vector<std::pair<std::vector<int>, cplx>> terms;
    for (auto t : repetition_logical_terms(0)) {
        std::vector<int> bits;
        for (int q = 0; q < 3; ++q) bits.push_back((t >> q) & 1);
        terms.push_back({bits, 0.5});
    }
    ctx.reg.set_block_amplitudes(atoms, terms);
    Register clean = ctx.reg;
    ryd3_stabilizer_round(ctx, 0);
    CHECK(ctx.counts.two_qubit == 8);
    CHECK(ctx.counts.three_qubit == 4);
    CHECK(std::abs(ctx.reg.overlap(clean)) == doctest::Approx(1.0).epsilon(1e-9));
    // inject Z on the middle atom: both stabilizers flip, round repeats once
    ctx.counts = {};
    ctx.reg.pauli_z(atoms[1]);
    ryd3_stabilizer_round(ctx, 0);
    CHECK(ctx.counts.two_qubit == 16);
    CHECK(ctx.counts.three_qubit == 8);
    CHECK(std::abs(ctx.reg.overlap(clean)) == doctest::Approx(1.0).epsilon(1e-9));
    REQUIRE(!ctx.corrections.empty());
}

TEST_CASE("ryd3 pieceable Toffoli implements logical CCX") {
    Layout lay = ryd3_triangular();
    for (unsigned in : {0u, 6u, 7u, 3u}) {
        SimContext ctx(lay, rb85(), {});
        std::vector<int> atoms;
        for (int b : {0, 1, 2})
            for (int a : lay.logical_block(b)) atoms.push_back(a);
        std::vector<std::pair<std::vector<int>, cplx>> terms;
        auto t0 = repetition_logical_terms((in >> 2) & 1);
        auto t1 = repetition_logical_terms((in >> 1) & 1);
        auto t2 = repetition_logical_terms(in & 1);
        for (auto x : t0)
            for (auto y : t1)
                for (auto z : t2) {
                    std::vector<int> bits;
                    for (int q = 0; q < 3; ++q) bits.push_back((x >> q) & 1);
                    for (int q = 0; q < 3; ++q) bits.push_back((y >> q) & 1);
                    for (int q = 0; q < 3; ++q) bits.push_back((z >> q) & 1);
                    terms.push_back({bits, cplx(1.0 / 8.0)});
                }
        ctx.reg.set_block_amplitudes(atoms, terms);
        ryd3_pieceable_toffoli(ctx);
        unsigned a = (in >> 2) & 1, b = (in >> 1) & 1, t = in & 1;
        unsigned out = (a << 2) | (b << 1) | (t ^ (a & b));
        Register ideal(lay, rb85());
        std::vector<std::pair<std::vector<int>, cplx>> iterms;
        auto i0 = repetition_logical_terms((out >> 2) & 1);
        auto i1 = repetition_logical_terms((out >> 1) & 1);
        auto i2 = repetition_logical_terms(out & 1);
        for (auto x : i0)
            for (auto y : i1)
                for (auto z : i2) {
                    std::vector<int> bits;
                    for (int q = 0; q < 3; ++q) bits.push_back((x >> q) & 1);
                    for (int q = 0; q < 3; ++q) bits.push_back((y >> q) & 1);
                    for (int q = 0; q < 3; ++q) bits.push_back((z >> q) & 1);
                    iterms.push_back({bits, cplx(1.0 / 8.0)});
                }
        ideal.set_block_amplitudes(atoms, iterms);
        CHECK(std::abs(ctx.reg.overlap(ideal)) == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(ctx.counts.three_qubit == 53);
        CHECK(ctx.counts.two_qubit == 20);
    }
}

TEST_CASE("ryd3 Hadamard gadget maps |0>_L and |1>_L to |+->_L") {
    Layout lay = ryd3_triangular();
    for (int in : {0, 1}) {
        SimContext ctx(lay, rb85(), {});
        std::vector<int> atoms = lay.logical_block(0);
        std::vector<std::pair<std::vector<int>, cplx>> terms;
        for (auto t : repetition_logical_terms(in)) {
            std::vector<int> bits;
            for (int q = 0; q < 3; ++q) bits.push_back((t >> q) & 1);
            terms.push_back({bits, 0.5});
        }
        ctx.reg.set_block_amplitudes(atoms, terms);
        ryd3_hadamard(ctx);
        // output block 1 should hold (|0>_L + (-1)^in |1>_L)/sqrt(2)
        Register ideal(lay, rb85());
        std::vector<int> eatoms = lay.logical_block(1);
        std::vector<std::pair<std::vector<int>, cplx>> iterms;
        for (int v : {0, 1})
            for (auto t : repetition_logical_terms(v)) {
                std::vector<int> bits;
                for (int q = 0; q < 3; ++q) bits.push_back((t >> q) & 1);
                double sign = (v == 1 && in == 1) ? -1.0 : 1.0;
                iterms.push_back({bits, sign * 0.5 / std::sqrt(2.0)});
            }
        ideal.set_block_amplitudes(eatoms, iterms);
        CHECK(std::abs(ctx.reg.overlap(ideal)) == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("probe detects a planted Rydberg leak and conversion clears it") {
    Layout lay = ryd7_triangular();
    SimContext ctx(lay, rb87(), {});
    int d = lay.data_atom(0, 4);
    ctx.reg.pauli_x(d);
    KrausEvent e;
    e.kind = KrausEvent::Kind::JumpToRydberg;
    e.ryd_target = bbr_target_state(RydClass::Single, +1);
    RecordedChooser tmp;
    REQUIRE(ctx.reg.inject(d, e, tmp) == Register::InjectResult::Applied);
    int probe = lay.ancilla("A1:0");
    CHECK(ctx.probe_rydberg(probe, RydClass::Single));
    ctx.pump_leaks_to_stretched();
    ctx.optical_pump(Register::PumpScheme::Standard);
    CHECK(ctx.reg.status(d) == AtomStatus::Active);
    // clean register: probe reads nothing
    SimContext ctx2(lay, rb87(), {});
    CHECK_FALSE(ctx2.probe_rydberg(probe, RydClass::Single));
}

TEST_CASE("loss detection circuit: present -1, lost +1, leaked counts as lost") {
    Layout lay = ryd7_triangular();
    SimContext ctx(lay, rb87(), {});
    int d = lay.data_atom(0, 2);
    int anc = lay.ancilla("A1:0");
    ctx.reg.hadamard(d);  // superposition must be preserved
    auto before = ctx.reg.amplitudes();
    CHECK_FALSE(ctx.loss_check(d, anc, RydClass::Single, true));
    // data preserved up to the deterministic global phase of the circuit
    CHECK(std::abs(std::abs(inner(before, ctx.reg.amplitudes())) - 1.0) < 1e-9);
    // lose the atom
    KrausEvent loss;
    loss.kind = KrausEvent::Kind::AtomLoss;
    RecordedChooser tmp;
    ctx.reg.inject(d, loss, tmp);
    CHECK(ctx.loss_check(d, anc, RydClass::Single, true));
    ctx.reg.replace(d, false);
    CHECK(ctx.reg.status(d) == AtomStatus::Active);
}
