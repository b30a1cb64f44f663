#include <cmath>
#include <complex>

#include "doctest.h"
#include "rydft/protocols.hpp"
#include "rydft/sim.hpp"

using namespace rydft;

namespace {

Layout two_atom_layout() {
    Layout l;
    l.lattice = LatticeKind::Triangular;
    l.rb = 3.0;
    l.rb1 = 3.0;
    l.rb2 = 1.5;
    AtomAssignment a;
    a.kind = AtomAssignment::Kind::Data;
    a.logical = 0;
    a.physical = 1;
    a.pos = {0, 0};
    l.atoms.push_back(a);
    a.physical = 2;
    a.pos = {1, 0};
    l.atoms.push_back(a);
    return l;
}

Layout four_atom_layout() {
    Layout l = two_atom_layout();
    AtomAssignment a;
    a.kind = AtomAssignment::Kind::Data;
    a.logical = 0;
    a.physical = 3;
    a.pos = {0, 1};
    l.atoms.push_back(a);
    a.physical = 4;
    a.pos = {1, -1};
    l.atoms.push_back(a);
    return l;
}

// dense column of the operator implemented by `op` on qubit basis state `in`
std::vector<cplx> dense_column(Register reg, const std::function<void(Register&)>& op,
                               const std::vector<int>& atoms, unsigned in) {
    std::vector<int> lv(reg.n_atoms(), 0);
    for (std::size_t i = 0; i < atoms.size(); ++i)
        lv[atoms[i]] = (in >> (atoms.size() - 1 - i)) & 1;
    reg.set_product_state(lv);
    op(reg);
    std::vector<cplx> col(std::size_t(1) << atoms.size(), 0.0);
    for (const auto& [k, a] : reg.amplitudes()) {
        unsigned idx = 0;
        bool in_basis = true;
        for (std::size_t i = 0; i < atoms.size(); ++i) {
            int l = k.get(atoms[i]);
            if (l > 1) in_basis = false;
            idx = (idx << 1) | unsigned(l);
        }
        if (in_basis) col[idx] += a;
    }
    return col;
}

}  // namespace

TEST_CASE("single-qubit ops act as expected") {
    Layout lay = two_atom_layout();
    Register r(lay, rb87());
    r.hadamard(0);
    CHECK(r.amplitudes().size() == 2);
    r.hadamard(0);
    CHECK(r.amplitudes().size() == 1);
    r.pauli_x(0);
    RecordedChooser ch;
    CHECK(r.measure(0, MeasureBasis::Z, ch) == MeasureOutcome::Minus);  // |1> -> -1
    r.assert_norm("after ops");
}

TEST_CASE("measurement conventions: |0> -> +1 in Z, |+> -> +1 in X") {
    Layout lay = two_atom_layout();
    Register r(lay, rb87());
    RecordedChooser ch;
    CHECK(r.measure(0, MeasureBasis::Z, ch) == MeasureOutcome::Plus);
    r.hadamard(1);
    RecordedChooser ch2;
    CHECK(r.measure(1, MeasureBasis::X, ch2) == MeasureOutcome::Plus);
    // |+> measured in X leaves the state unchanged
    CHECK(r.amplitudes().size() == 2);
}

TEST_CASE("two-atom R gate equals diag(1,-1,-1,-1)") {
    Layout lay = two_atom_layout();
    Register reg(lay, rb87());
    for (unsigned in = 0; in < 4; ++in) {
        auto col = dense_column(
            reg, [](Register& r) { r.collective_gate({0}, {1}, RydClass::Single); }, {0, 1}, in);
        for (unsigned out = 0; out < 4; ++out) {
            cplx want = (in == out) ? (in == 0 ? 1.0 : -1.0) : 0.0;
            CHECK(std::abs(col[out] - want) < 1e-12);
        }
    }
}

TEST_CASE("three-atom R gate equals diag(1,-1,...,-1) when all pairs blockade") {
    Layout lay = four_atom_layout();
    Register reg(lay, rb87());
    for (unsigned in = 0; in < 8; ++in) {
        auto col = dense_column(
            reg, [](Register& r) { r.collective_gate({0, 1}, {2}, RydClass::Single); },
            {0, 1, 2}, in);
        for (unsigned out = 0; out < 8; ++out) {
            cplx want = (in == out) ? (in == 0 ? 1.0 : -1.0) : 0.0;
            CHECK(std::abs(col[out] - want) < 1e-12);
        }
    }
}

TEST_CASE("pulse-level gate equals the one-shot diagonal") {
    Layout lay = four_atom_layout();
    Register reg(lay, rb87());
    for (unsigned in = 0; in < 16; ++in) {
        auto a = dense_column(
            reg, [](Register& r) { r.collective_gate({0, 1}, {2, 3}, RydClass::Single); },
            {0, 1, 2, 3}, in);
        auto b = dense_column(
            reg,
            [](Register& r) { r.collective_gate_oneshot({0, 1}, {2, 3}, RydClass::Single); },
            {0, 1, 2, 3}, in);
        for (unsigned o = 0; o < 16; ++o) CHECK(std::abs(a[o] - b[o]) < 1e-12);
    }
}

TEST_CASE("unblockaded control pair flips the diagonal tail") {
    // controls 4d apart do not blockade each other: diag(1,-1,-1,-1,-1,-1,1,1)
    Layout lay;
    lay.lattice = LatticeKind::Triangular;
    lay.rb = 3.0;
    AtomAssignment a;
    a.kind = AtomAssignment::Kind::Data;
    a.logical = 0;
    a.physical = 1;
    a.pos = {0, 0};
    lay.atoms.push_back(a);
    a.physical = 2;
    a.pos = {4, 0};
    lay.atoms.push_back(a);
    a.physical = 3;
    a.pos = {2, 0};  // target within 3d of both controls... dist=2 each
    lay.atoms.push_back(a);
    Register reg(lay, rb87());
    static const double want[8] = {1, -1, -1, -1, -1, -1, 1, 1};
    for (unsigned in = 0; in < 8; ++in) {
        auto col = dense_column(
            reg, [](Register& r) { r.collective_gate({0, 1}, {2}, RydClass::Single); },
            {0, 1, 2}, in);
        CHECK(std::abs(col[in] - want[in]) < 1e-12);
    }
}

TEST_CASE("pi then -pi on the same transition is the identity") {
    Layout lay = two_atom_layout();
    Register r(lay, rb87());
    r.hadamard(0);
    auto before = r.amplitudes();
    const AtomLevel q1 = qubit_level(rb87(), 1);
    const AtomLevel rp = rydberg_level(drive_state(rb87(), RydClass::Single, +1, false),
                                       RydClass::Single);
    r.rydberg_pulse(0, q1, rp, M_PI);
    CHECK(r.status(0) == AtomStatus::DrivenRydberg);
    r.rydberg_pulse(0, q1, rp, -M_PI);
    CHECK(r.status(0) == AtomStatus::Active);
    CHECK(std::abs(inner(before, r.amplitudes()) - cplx(1.0)) < 1e-12);
}

TEST_CASE("blockaded 2pi pulse leaves amplitudes unchanged") {
    Layout lay = two_atom_layout();
    Register r(lay, rb87());
    const AtomLevel q1 = qubit_level(rb87(), 1);
    const AtomLevel rp = rydberg_level(drive_state(rb87(), RydClass::Single, +1, false),
                                       RydClass::Single);
    r.pauli_x(0);                      // atom0 -> |1>
    r.rydberg_pulse(0, q1, rp, M_PI);  // excite
    r.pauli_x(1);
    auto before = r.amplitudes();
    r.rydberg_pulse(1, q1, rp, 2 * M_PI);  // blockaded by atom0
    CHECK(std::abs(inner(before, r.amplitudes()) - cplx(1.0)) < 1e-12);
}

TEST_CASE("fault injection on a superposed atom collapses the register") {
    Layout lay = two_atom_layout();
    Register r(lay, rb87());
    r.hadamard(0);  // (|0>+|1>)/sqrt(2)
    KrausEvent e;
    e.kind = KrausEvent::Kind::JumpToHyperfine;
    e.hf_target = rb87().stretched_ground_plus;
    RecordedChooser ch;
    CHECK(r.inject(0, e, ch) == Register::InjectResult::Applied);
    CHECK(r.status(0) == AtomStatus::HyperfineLeaked);
    CHECK(r.norm() == doctest::Approx(1.0));
    // |0> component was annihilated; pump restores to |1>
    r.optical_pump(0, Register::PumpScheme::Standard);
    CHECK(r.status(0) == AtomStatus::Active);
    RecordedChooser ch2;
    CHECK(r.measure(0, MeasureBasis::Z, ch2) == MeasureOutcome::Minus);
}

TEST_CASE("dephase on |+> gives |->") {
    Layout lay = two_atom_layout();
    Register r(lay, rb87());
    r.hadamard(0);
    KrausEvent z;
    z.kind = KrausEvent::Kind::DephaseZ;
    RecordedChooser ch;
    CHECK(r.inject(0, z, ch) == Register::InjectResult::Applied);
    CHECK(r.measure(0, MeasureBasis::X, ch) == MeasureOutcome::Minus);
}

TEST_CASE("null faults are reported") {
    Layout lay = two_atom_layout();
    Register r(lay, rb87());
    KrausEvent e;  // jump to Rydberg with no |1> or Rydberg support
    e.kind = KrausEvent::Kind::JumpToRydberg;
    e.ryd_target = bbr_target_state(RydClass::Single, +1);
    RecordedChooser ch;
    CHECK(r.inject(0, e, ch) == Register::InjectResult::NullFault);
}

TEST_CASE("sign partition constrains jump sources") {
    Layout lay = two_atom_layout();
    Register r(lay, rb85());
    // drive the |0> population into the minus-side stretched S state
    const AtomLevel q0 = qubit_level(rb85(), 0);
    const AtomLevel sm = rydberg_level(drive_state(rb85(), RydClass::R1, -1, false), RydClass::R1);
    r.rydberg_pulse(0, q0, sm, M_PI);
    CHECK(r.status(0) == AtomStatus::DrivenRydberg);
    // a plus-side hyperfine target cannot source from a minus-side level
    KrausEvent plus;
    plus.kind = KrausEvent::Kind::JumpToHyperfine;
    plus.hf_target = rb85().stretched_ground_plus;
    RecordedChooser ch;
    CHECK(r.inject(0, plus, ch) == Register::InjectResult::NullFault);
    // the minus-side target works and routes to |0> under the pump
    KrausEvent minus;
    minus.kind = KrausEvent::Kind::JumpToHyperfine;
    minus.hf_target = rb85().stretched_ground_minus;
    CHECK(r.inject(0, minus, ch) == Register::InjectResult::Applied);
    r.optical_pump(0, Register::PumpScheme::CnotMinus);
    CHECK(r.status(0) == AtomStatus::Active);
    CHECK(r.measure(0, MeasureBasis::Z, ch) == MeasureOutcome::Plus);
}

TEST_CASE("atom loss branches over occupied levels and replacement restores") {
    Layout lay = two_atom_layout();
    Register r(lay, rb87());
    r.hadamard(0);
    r.collective_gate({0}, {1}, RydClass::Single);  // entangle a bit
    KrausEvent loss;
    loss.kind = KrausEvent::Kind::AtomLoss;
    RecordedChooser ch;
    ch.decisions = {1};  // project onto |1> branch
    CHECK(r.inject(0, loss, ch) == Register::InjectResult::Applied);
    CHECK(r.status(0) == AtomStatus::Lost);
    CHECK_THROWS(r.eject(1));  // atom 1 is fine
    r.replace(0, false);       // back as |0>
    CHECK(r.status(0) == AtomStatus::Active);
    RecordedChooser ch2;
    CHECK(r.measure(0, MeasureBasis::Z, ch2) == MeasureOutcome::Plus);
}

TEST_CASE("leaked atom returns NoSignal and pulses touching Lost atoms throw") {
    Layout lay = two_atom_layout();
    Register r(lay, rb87());
    KrausEvent e;
    e.kind = KrausEvent::Kind::JumpToHyperfine;
    e.hf_target = rb87().stretched_ground_plus;
    r.pauli_x(0);
    RecordedChooser ch;
    r.inject(0, e, ch);
    CHECK(r.measure(0, MeasureBasis::Z, ch) == MeasureOutcome::NoSignal);
    KrausEvent loss;
    loss.kind = KrausEvent::Kind::AtomLoss;
    r.inject(0, loss, ch);
    const AtomLevel q1 = qubit_level(rb87(), 1);
    const AtomLevel rp = rydberg_level(drive_state(rb87(), RydClass::Single, +1, false),
                                       RydClass::Single);
    CHECK_THROWS(r.rydberg_pulse(0, q1, rp, M_PI));
    CHECK_THROWS(r.replace(1, true));  // atom 1 is present
}

TEST_CASE("rydberg leak blockades same-class pulses only") {
    Layout lay = two_atom_layout();
    lay.rb1 = 3.0;
    lay.rb2 = 1.5;
    Register r(lay, rb85());
    // leak atom 0 into an R1-class state
    r.pauli_x(0);
    KrausEvent e;
    e.kind = KrausEvent::Kind::JumpToRydberg;
    e.ryd_target = bbr_target_state(RydClass::R1, +1);
    e.leak_class = RydClass::R1;
    RecordedChooser ch;
    CHECK(r.inject(0, e, ch) == Register::InjectResult::Applied);
    CHECK(r.status(0) == AtomStatus::RydbergLeaked);
    // R1 pulse on the neighbor is blockaded, R2 pulse is not
    const AtomLevel q1 = qubit_level(rb85(), 1);
    const AtomLevel r1 = rydberg_level(drive_state(rb85(), RydClass::R1, +1, false), RydClass::R1);
    const AtomLevel r2 = rydberg_level(drive_state(rb85(), RydClass::R2, +1, false), RydClass::R2);
    r.pauli_x(1);
    r.rydberg_pulse(1, q1, r1, M_PI);
    CHECK(r.status(1) == AtomStatus::Active);  // blocked: still in |1>
    r.rydberg_pulse(1, q1, r2, M_PI);
    CHECK(r.status(1) == AtomStatus::DrivenRydberg);  // cross-class: resonant
    // and the leak converts through the pump chain to |1>
    r.rydberg_pulse(1, q1, r2, -M_PI);
    r.pump_rydberg_to_stretched(0);
    CHECK(r.status(0) == AtomStatus::HyperfineLeaked);
    r.optical_pump(0, Register::PumpScheme::Standard);
    RecordedChooser ch2;
    CHECK(r.measure(0, MeasureBasis::Z, ch2) == MeasureOutcome::Minus);
}

TEST_CASE("optical pump is idempotent and preserves unleaked coherence") {
    Layout lay = two_atom_layout();
    Register r(lay, rb87());
    r.hadamard(0);
    auto before = r.amplitudes();
    r.optical_pump_all(Register::PumpScheme::Standard);
    r.optical_pump_all(Register::PumpScheme::Standard);
    CHECK(std::abs(inner(before, r.amplitudes()) - cplx(1.0)) < 1e-12);
}

TEST_CASE("pump routes the minus-stretched state to |0>") {
    Layout lay = two_atom_layout();
    Register r(lay, rb87());
    r.pauli_x(0);
    KrausEvent e;
    e.kind = KrausEvent::Kind::JumpToHyperfine;
    e.hf_target = rb87().stretched_ground_minus;
    e.allow_sign_cross = true;  // exercising the sink, not the channel
    RecordedChooser ch;
    r.inject(0, e, ch);
    r.optical_pump(0, Register::PumpScheme::Standard);
    CHECK(r.measure(0, MeasureBasis::Z, ch) == MeasureOutcome::Plus);  // |0>
}

TEST_CASE("register JSON dump mentions flags") {
    Layout lay = two_atom_layout();
    Register r(lay, rb87());
    CHECK(r.dump_json().find("active") != std::string::npos);
}
