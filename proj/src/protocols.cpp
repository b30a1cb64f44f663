#include "rydft/protocols.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace rydft {

// ---------------------------------------------------------------------------
// canonical Rydberg states used by the pulse programs

RydbergState drive_state(const Species& sp, RydClass cls, int sign, bool shelf) {
    RydbergState r;
    r.n = cls == RydClass::R1 ? 80 : (cls == RydClass::R2 ? 60 : 70);
    r.n_eff = r.n - 3.13;
    if (shelf) {
        // stretched nD_{3/2} states with mI = +-I
        r.L = Orbital::D;
        r.J = HalfInt(3);
        r.mJ = sign > 0 ? HalfInt(3) : HalfInt(-3);
        r.mI = sign > 0 ? sp.I : -sp.I;
    } else {
        r.L = Orbital::S;
        r.J = HalfInt(1);
        r.mJ = sign > 0 ? HalfInt(1) : HalfInt(-1);
        r.mI = sign > 0 ? HalfInt(3) : HalfInt(-3);
    }
    return r;
}

RydbergState bbr_target_state(RydClass cls, int sign) {
    RydbergState r;
    r.n = cls == RydClass::R1 ? 79 : (cls == RydClass::R2 ? 59 : 69);
    r.n_eff = r.n - 2.65;
    r.L = Orbital::P;
    r.J = HalfInt(3);
    r.mJ = sign > 0 ? HalfInt(3) : HalfInt(-3);
    r.mI = sign > 0 ? HalfInt(3) : HalfInt(-3);
    return r;
}

namespace {

HyperfineState shelf_state(const Species& sp, int sign) {
    // |1> <-> |F=I-1/2, mF=+2> and |0> <-> |F=I+1/2, mF=-2>
    if (sign > 0) return {sp.I - HalfInt(1), HalfInt::from_int(2)};
    return {sp.I + HalfInt(1), HalfInt::from_int(-2)};
}

}  // namespace

// ---------------------------------------------------------------------------
// SimContext

SimContext::SimContext(const Layout& layout, Species species, ExecOptions o)
    : ProtocolContext(layout, species, o), reg(layout, this->species()) {}

void SimContext::injection_window(const std::string& desc, const std::vector<int>& gate_atoms,
                                  RydClass cls) {
    if (record_windows) {
        FaultWindow w;
        w.id = window_counter;
        w.desc = desc;
        w.gate_atoms = gate_atoms;
        w.ryd_class = cls;
        for (int a : gate_atoms) {
            w.has_ryd_support.push_back(reg.driven_rydberg_support(a));
            bool q = false;
            if (reg.status(a) == AtomStatus::Active || reg.status(a) == AtomStatus::DrivenRydberg)
                q = true;
            w.has_qubit_support.push_back(q);
        }
        windows.push_back(std::move(w));
    }
    if (plan.active && !fault_applied && !fault_null && window_counter == plan.window) {
        auto r = reg.inject(plan.atom, plan.event, chooser);
        if (r == Register::InjectResult::Applied) {
            fault_applied = true;
            log("fault injected at w" + std::to_string(window_counter) + " [" + desc + "]");
        } else {
            fault_null = true;
        }
    }
    ++window_counter;
}

void SimContext::r_gate(const std::vector<int>& controls, const std::vector<int>& targets,
                        RydClass cls) {
    int n = int(controls.size() + targets.size());
    if (n == 2) ++counts.two_qubit;
    else ++counts.three_qubit;
    std::vector<int> all = controls;
    all.insert(all.end(), targets.begin(), targets.end());
    reg.collective_gate(controls, targets, cls,
                        [&](int, int) { injection_window("rgate", all, cls); });
}

void SimContext::or_gate(const std::vector<int>& controls, int target, RydClass cls) {
    if (int(controls.size()) + 1 == 2) ++counts.two_qubit;
    else ++counts.three_qubit;
    std::vector<int> all = controls;
    all.push_back(target);
    const AtomLevel q1 = qubit_level(species(), 1);
    const AtomLevel rp = rydberg_level(drive_state(species(), cls, +1, false), cls);
    for (int c : controls) {
        injection_window("or:ctrl", all, cls);
        reg.rydberg_pulse(c, q1, rp, M_PI, false);
    }
    conditional_flip_sequence(*this, target, cls);
    for (auto it = controls.rbegin(); it != controls.rend(); ++it) {
        injection_window("or:ctrl-ret", all, cls);
        reg.rydberg_pulse(*it, q1, rp, -M_PI, false);
    }
    injection_window("or:end", all, cls);
}

void conditional_flip_sequence(SimContext& ctx, int atom, RydClass cls) {
    Register& reg = ctx.reg;
    const Species& sp = ctx.species();
    const AtomLevel q0 = qubit_level(sp, 0), q1 = qubit_level(sp, 1);
    const AtomLevel shp = hyperfine_level(shelf_state(sp, +1));
    const AtomLevel shm = hyperfine_level(shelf_state(sp, -1));
    const AtomLevel dp = rydberg_level(drive_state(sp, cls, +1, true), cls);
    const AtomLevel dm = rydberg_level(drive_state(sp, cls, -1, true), cls);
    const AtomLevel spl = rydberg_level(drive_state(sp, cls, +1, false), cls);
    const AtomLevel smn = rydberg_level(drive_state(sp, cls, -1, false), cls);
    std::vector<int> atoms = {atom};
    // step 1: shelve both qubit states into the stretched D Rydberg states
    reg.hyperfine_swap(atom, q1, shp);
    reg.hyperfine_swap(atom, q0, shm);
    ctx.injection_window("flip:d+", atoms, cls);
    reg.rydberg_pulse(atom, shp, dp, M_PI, false);
    ctx.injection_window("flip:d-", atoms, cls);
    reg.rydberg_pulse(atom, shm, dm, M_PI, false);
    reg.hyperfine_swap(atom, q1, shp);
    reg.hyperfine_swap(atom, q0, shm);
    // step 2: second transfer attempt through the stretched S states
    ctx.injection_window("flip:s+", atoms, cls);
    reg.rydberg_pulse(atom, q1, spl, M_PI, false);
    ctx.injection_window("flip:s-", atoms, cls);
    reg.rydberg_pulse(atom, q0, smn, M_PI, false);
    // step 3: swap the qubit populations (fires only when steps 1-2 were blockaded)
    reg.pauli_x(atom);
    // step 4: invert step 1 with -pi pulses; population that a decay pushed
    // through the S-state attempt stays there for the incoherent pump
    reg.hyperfine_swap(atom, q1, shp);
    reg.hyperfine_swap(atom, q0, shm);
    ctx.injection_window("flip:d+r", atoms, cls);
    reg.rydberg_pulse(atom, shp, dp, -M_PI, false);
    ctx.injection_window("flip:d-r", atoms, cls);
    reg.rydberg_pulse(atom, shm, dm, -M_PI, false);
    reg.hyperfine_swap(atom, q1, shp);
    reg.hyperfine_swap(atom, q0, shm);
}

MeasureOutcome SimContext::measure(int atom, MeasureBasis basis, MeasurePurpose,
                                   MeasureOutcome) {
    ++counts.measurements;
    return reg.measure(atom, basis, chooser);
}

void SimContext::reset(int atom, bool to_plus) { reg.reset_ancilla(atom, to_plus, chooser); }

bool SimContext::probe_rydberg(int probe_atom, RydClass cls) {
    if (opts.disable_leak_probe) return false;
    reserve_ancilla("probe");
    const AtomLevel q1 = qubit_level(species(), 1);
    const AtomLevel rp = rydberg_level(drive_state(species(), cls, +1, false), cls);
    std::vector<int> atoms = {probe_atom};
    int positives = 0;
    for (int attempt = 0; attempt < 4; ++attempt) {
        reg.reset_ancilla(probe_atom, true, chooser);
        injection_window("probe:a", atoms, cls);
        reg.rydberg_pulse(probe_atom, q1, rp, M_PI);
        injection_window("probe:b", atoms, cls);
        reg.rydberg_pulse(probe_atom, q1, rp, M_PI);
        // multi-step readout: H, check |1>, X, check |1>
        reg.hadamard(probe_atom);
        counts.measurements += 2;
        bool c1 = reg.check_level1(probe_atom, chooser);
        if (c1) {
            // ancilla read |->: no nearby Rydberg population this attempt
            reg.reset_ancilla(probe_atom, false, chooser);
            return false;
        }
        reg.pauli_x(probe_atom);
        bool c2 = reg.check_level1(probe_atom, chooser);
        if (!c2) {
            // neither check saw |1>: the probe itself leaked; convert, redo
            log("probe ancilla leaked; converting");
            reg.pump_rydberg_to_stretched(probe_atom);
            reg.optical_pump(probe_atom, Register::PumpScheme::Standard);
            continue;
        }
        ++positives;
        if (positives >= 2) {  // repeated positive confirms (guards Z flips)
            reg.reset_ancilla(probe_atom, false, chooser);
            return true;
        }
    }
    reg.reset_ancilla(probe_atom, false, chooser);
    return positives >= 2;
}

bool SimContext::loss_check(int data_atom, int ancilla, RydClass cls, bool robust) {
    const AtomLevel q1 = qubit_level(species(), 1);
    const AtomLevel rp = rydberg_level(drive_state(species(), cls, +1, false), cls);
    std::vector<int> atoms = {data_atom, ancilla};
    auto run_once = [&]() -> int {  // +1 loss, -1 present, 0 no signal
        reg.reset_ancilla(ancilla, true, chooser);
        for (int rep = 0; rep < 2; ++rep) {
            ++counts.two_qubit;
            injection_window("loss:cpi", atoms, cls);
            if (reg.status(data_atom) != AtomStatus::Lost)
                reg.rydberg_pulse(data_atom, q1, rp, M_PI);
            injection_window("loss:t2a", atoms, cls);
            reg.rydberg_pulse(ancilla, q1, rp, M_PI);
            injection_window("loss:t2b", atoms, cls);
            reg.rydberg_pulse(ancilla, q1, rp, M_PI);
            injection_window("loss:cret", atoms, cls);
            if (reg.status(data_atom) != AtomStatus::Lost)
                reg.rydberg_pulse(data_atom, q1, rp, M_PI);
            if (reg.status(data_atom) == AtomStatus::Active ||
                reg.status(data_atom) == AtomStatus::DrivenRydberg)
                reg.pauli_x(data_atom);
        }
        ++counts.measurements;
        MeasureOutcome o = reg.measure(ancilla, MeasureBasis::X, chooser);
        if (o != MeasureOutcome::NoSignal) reg.reset_ancilla(ancilla, false, chooser);
        return o == MeasureOutcome::NoSignal ? 0 : (o == MeasureOutcome::Plus ? 1 : -1);
    };
    int r1 = run_once();
    if (r1 == 0) {  // the check ancilla itself failed: convert, retry once
        reg.pump_rydberg_to_stretched(ancilla);
        reg.optical_pump(ancilla, Register::PumpScheme::Standard);
        r1 = run_once();
    }
    if (r1 <= 0) return false;
    if (!robust) return true;
    int r2 = run_once();
    return r2 > 0;  // two positive readings confirm the loss
}

void SimContext::pump_leaks_to_stretched() {
    for (int i = 0; i < reg.n_atoms(); ++i) reg.pump_rydberg_to_stretched(i);
}

void SimContext::incoherent_rydberg_pump(const std::vector<int>& atoms) {
    for (int a : atoms) reg.incoherent_rydberg_pump(a, chooser);
}

void SimContext::optical_pump(Register::PumpScheme scheme) {
    if (opts.disable_optical_pump) return;
    reg.optical_pump_all(scheme);
}

void SimContext::eject_leaked() {
    for (int i = 0; i < reg.n_atoms(); ++i)
        if (reg.status(i) == AtomStatus::RydbergLeaked) {
            reg.eject(i);
            log("ejected leaked atom " + std::to_string(i));
        }
}

void SimContext::eject_and_replace(int atom, bool as_plus) {
    if (reg.status(atom) == AtomStatus::RydbergLeaked) reg.eject(atom);
    if (reg.status(atom) != AtomStatus::Lost)
        throw std::logic_error("eject_and_replace: atom is not lost");
    if (as_plus) reg.replace_plus(atom);
    else reg.replace(atom, true);
    log("replaced atom " + std::to_string(atom) + (as_plus ? " as |+>" : " as |1>"));
}

// ---------------------------------------------------------------------------
// shared helpers

namespace {

void physical_cz(ProtocolContext& ctx, int a, int b, RydClass cls) {
    ctx.z(a);
    ctx.z(b);
    ctx.r_gate({a}, {b}, cls);
}

void physical_cnot(ProtocolContext& ctx, int c, int t, RydClass cls) {
    ctx.h(t);
    physical_cz(ctx, c, t, cls);
    ctx.h(t);
}

// CCZ up to global phase. Pulse roles follow the geometry: the farthest
// pair acts as the two controls; when that pair sits outside the blockade
// radius the diagonal flips sign on |11x> and the Y/X conjugation variant
// restores CCZ.
void physical_ccz(ProtocolContext& ctx, int a, int b, int c, RydClass cls) {
    const Layout& lay = ctx.layout();
    std::array<std::pair<int, int>, 3> pairs = {{{a, b}, {a, c}, {b, c}}};
    int drop = 0;
    long worst = -1;
    for (int k = 0; k < 3; ++k) {
        long d2 = lay.dist2_int(pairs[k].first, pairs[k].second);
        if (d2 > worst) { worst = d2; drop = k; }
    }
    int c1 = pairs[drop].first, c2 = pairs[drop].second;
    int t = a + b + c - c1 - c2;
    double r = lay.radius(cls);
    bool ctrl_within = double(lay.dist2_int(c1, c2)) <= r * r * (1.0 + 1e-9);
    if (ctrl_within) {
        ctx.x(a); ctx.x(b); ctx.x(c);
        ctx.r_gate({c1, c2}, {t}, cls);
        ctx.x(a); ctx.x(b); ctx.x(c);
    } else {
        ctx.x(c1); ctx.x(c2);
        ctx.r_gate({c1, c2}, {t}, cls);
        ctx.y(c1); ctx.y(c2);
    }
}

void apply_pauli_correction(ProtocolContext& ctx, const PauliString& p,
                            const std::vector<int>& block) {
    for (int q = 0; q < p.n; ++q) {
        bool px = p.xmask & (1u << q), pz = p.zmask & (1u << q);
        if (px && pz) ctx.y(block[q]);
        else if (px) ctx.x(block[q]);
        else if (pz) ctx.z(block[q]);
    }
    if (!p.is_identity()) ctx.corrections.push_back(p.str());
}

std::vector<int> stab_support(const StabilizerCode& code, int gen) {
    std::vector<int> qubits;
    const auto& g = code.generators[gen];
    std::uint32_t mask = g.xmask | g.zmask;
    for (int q = 0; q < code.n_data; ++q)
        if (mask & (1u << q)) qubits.push_back(q);
    return qubits;
}

}  // namespace

// ---------------------------------------------------------------------------
// Ryd-7 programs

namespace {

struct Ryd7SectorResult {
    std::vector<int> values{1, 1, 1};
    bool leak = false;
    std::vector<int> leak_gate_order;
};

int ryd7_measure_stab(ProtocolContext& ctx, int logical, int gen, bool protected_mode,
                      Ryd7SectorResult* sr) {
    const auto code = steane_code();
    const Layout& lay = ctx.layout();
    auto block = lay.logical_block(logical);
    int a2 = lay.ancilla("A2:" + std::to_string(logical));
    int a1 = lay.ancilla("A1:" + std::to_string(logical));
    bool x_type = gen < 3;
    auto qubits = stab_support(code, gen);

    ctx.reserve_ancilla("syndrome");
    ctx.reset(a2, true);
    for (int q : qubits) {
        ctx.z(block[q]);
        if (x_type) ctx.h(block[q]);
    }
    for (std::size_t i = 0; i < qubits.size(); ++i) {
        ctx.r_gate({a2}, {block[qubits[i]]}, RydClass::Single);
        bool last = (i + 1 == qubits.size());
        if (protected_mode && (ctx.opts.per_gate_probe || last)) {
            if (ctx.probe_rydberg(a1, RydClass::Single)) {
                ctx.log("leak detected during g" + std::to_string(gen + 1));
                ctx.pump_leaks_to_stretched();
                if (sr) {
                    sr->leak = true;
                    sr->leak_gate_order.clear();
                    for (int q : qubits) sr->leak_gate_order.push_back(q);
                }
            }
        }
    }
    if (protected_mode) ctx.optical_pump(Register::PumpScheme::Standard);
    for (int q : qubits)
        if (x_type) ctx.h(block[q]);
    MeasureOutcome o =
        ctx.measure(a2, MeasureBasis::X, MeasurePurpose::Syndrome, MeasureOutcome::Plus);
    ctx.reset(a2, false);
    int v = o == MeasureOutcome::Minus ? -1 : 1;
    ctx.syndromes.push_back({std::string("L") + std::to_string(logical) + ":g" +
                                 std::to_string(gen + 1),
                             v});
    return v;
}

Ryd7SectorResult ryd7_sector(ProtocolContext& ctx, int logical, char sector) {
    std::vector<int> gens = sector == 'X' ? std::vector<int>{0, 1, 2} : std::vector<int>{3, 4, 5};
    Ryd7SectorResult sr;
    bool any_minus = false;
    for (std::size_t i = 0; i < gens.size(); ++i) {
        sr.values[i] = ryd7_measure_stab(ctx, logical, gens[i], true, &sr);
        if (sr.values[i] < 0) { any_minus = true; break; }
    }
    if (any_minus) {
        // re-measure the whole sector in the unprotected way; the resulting
        // outcomes are the correct stabilizer values to leading order
        for (std::size_t i = 0; i < gens.size(); ++i)
            sr.values[i] = ryd7_measure_stab(ctx, logical, gens[i], false, nullptr);
    }
    return sr;
}

}  // namespace

std::vector<int> ryd7_stabilizer_sector(ProtocolContext& ctx, int logical, char sector) {
    return ryd7_sector(ctx, logical, sector).values;
}

void ryd7_qec_round(ProtocolContext& ctx, int logical) {
    const auto code = steane_code();
    auto block = ctx.layout().logical_block(logical);

    // a Z-sector leak in the previous round leaves a Z-type correlated
    // pattern for this round's X sector to decode
    bool carried = ctx.deferred_leak.active;
    std::vector<int> carried_order = ctx.deferred_leak.gate_order;
    ctx.deferred_leak.active = false;

    Ryd7SectorResult xs = ryd7_sector(ctx, logical, 'X');
    Ryd7SectorResult zs = ryd7_sector(ctx, logical, 'Z');

    Syndrome full{{xs.values[0], xs.values[1], xs.values[2], zs.values[0], zs.values[1],
                   zs.values[2]}};
    if (carried) {
        auto table = postponed_stabilizer_table(code, carried_order, false);
        apply_pauli_correction(ctx, decode_correlated(table, full), block);
        Syndrome xonly{{1, 1, 1, zs.values[0], zs.values[1], zs.values[2]}};
        auto d = decode(code, xonly);
        if (!d.multi_error) apply_pauli_correction(ctx, d.correction, block);
        return;
    }
    if (xs.leak) {
        // X-sector leak: X-type pattern on the data, read by the Z sector
        auto table = postponed_stabilizer_table(code, xs.leak_gate_order, true);
        apply_pauli_correction(ctx, decode_correlated(table, full), block);
        Syndrome zonly{{xs.values[0], xs.values[1], xs.values[2], 1, 1, 1}};
        auto d = decode(code, zonly);
        if (!d.multi_error) apply_pauli_correction(ctx, d.correction, block);
        return;
    }
    if (zs.leak) {
        // Z-sector leak: pattern is Z-type; defer its decoding to the next
        // round's X sector, correct the X part seen by this round
        ctx.deferred_leak.active = true;
        ctx.deferred_leak.gate_order = zs.leak_gate_order;
        Syndrome xonly{{1, 1, 1, zs.values[0], zs.values[1], zs.values[2]}};
        auto d = decode(code, xonly);
        if (!d.multi_error) apply_pauli_correction(ctx, d.correction, block);
        // Z corrections indicated by the X sector are still valid
        Syndrome zonly{{xs.values[0], xs.values[1], xs.values[2], 1, 1, 1}};
        auto dz = decode(code, zonly);
        if (!dz.multi_error) apply_pauli_correction(ctx, dz.correction, block);
        return;
    }
    auto d = decode(code, full);
    if (d.multi_error) ctx.log("multi-error syndrome " + full.str());
    apply_pauli_correction(ctx, d.correction, block);
}

void ryd7_prepare_zero(ProtocolContext& ctx, int logical) {
    const Layout& lay = ctx.layout();
    auto block = lay.logical_block(logical);
    int a1 = lay.ancilla("A1:" + std::to_string(logical));
    for (int q : {0, 1, 3}) ctx.h(block[q]);  // generator pivots start in |+>
    struct CN { int c, t; };
    static const CN cnots[] = {{3, 4}, {3, 5}, {3, 6}, {1, 2}, {1, 5}, {1, 6},
                               {0, 2}, {0, 4}, {0, 6}};
    for (const auto& g : cnots) {
        physical_cnot(ctx, block[g.c], block[g.t], RydClass::Single);
        if (ctx.probe_rydberg(a1, RydClass::Single)) {
            ctx.log("leak during |0>_L preparation");
            ctx.pump_leaks_to_stretched();
        }
        ctx.optical_pump(Register::PumpScheme::Standard);
    }
}

void ryd7_logical_cz(ProtocolContext& ctx, int la, int lb) {
    const Layout& lay = ctx.layout();
    auto a = lay.logical_block(la), b = lay.logical_block(lb);
    int probe = lay.ancilla("A1:c");
    for (int j = 0; j < 7; ++j) { ctx.z(a[j]); ctx.z(b[j]); }
    for (int j = 0; j < 7; ++j) {
        ctx.r_gate({a[j]}, {b[j]}, RydClass::Single);
        if (ctx.probe_rydberg(probe, RydClass::Single)) {
            ctx.log("leak during logical CZ");
            ctx.pump_leaks_to_stretched();
        }
    }
    ctx.optical_pump(Register::PumpScheme::Standard);
}

namespace {

struct CczGate { int ja, kb, lc; };

std::vector<std::vector<CczGate>> ccz_groups(CczGateSet set) {
    const std::array<int, 3> targets =
        set == CczGateSet::Alg3 ? std::array<int, 3>{1, 2, 3} : std::array<int, 3>{3, 5, 6};
    std::vector<std::vector<CczGate>> groups;
    for (int r = 0; r < 3; ++r)
        for (int s = 0; s < 3; ++s) {
            std::vector<CczGate> g;
            for (int j = 0; j < 3; ++j)
                g.push_back({j + 1, 1 + (j + r) % 3, targets[(j + s) % 3]});
            groups.push_back(g);
        }
    return groups;
}

}  // namespace

void ryd7_logical_ccz(ProtocolContext& ctx) {
    const auto code = steane_code();
    const Layout& lay = ctx.layout();
    std::array<std::vector<int>, 3> blocks = {lay.logical_block(0), lay.logical_block(1),
                                              lay.logical_block(2)};
    int probe = lay.ancilla("A1:c");
    auto groups = ccz_groups(ctx.opts.ccz_set);
    auto atom_of = [&](int logical, int label) { return blocks[logical][label - 1]; };

    std::vector<int> involved;
    {
        std::array<std::set<int>, 3> labels;
        for (const auto& grp : groups)
            for (const auto& g : grp) {
                labels[0].insert(g.ja);
                labels[1].insert(g.kb);
                labels[2].insert(g.lc);
            }
        for (int l = 0; l < 3; ++l)
            for (int lbl : labels[l]) involved.push_back(atom_of(l, lbl));
    }

    bool responded = false;
    for (std::size_t gi = 0; gi < groups.size(); ++gi) {
        const auto& grp = groups[gi];
        for (const auto& g : grp)
            physical_ccz(ctx, atom_of(0, g.ja), atom_of(1, g.kb), atom_of(2, g.lc),
                         RydClass::Single);
        if (responded) continue;  // remaining groups run unprotected
        if (!ctx.probe_rydberg(probe, RydClass::Single)) continue;
        responded = true;
        ctx.log("leak detected after CCZ group " + std::to_string(gi + 1));

        // (i) eject, localize with the loss circuit, replace as |+>
        ctx.eject_leaked();
        int lost = -1;
        for (int at : involved)
            if (ctx.loss_check(at, probe, RydClass::Single, false) && lost < 0) lost = at;
        if (lost >= 0) ctx.eject_and_replace(lost, true);

        // (ii) re-execute the two gates the leak may have blockaded
        for (int k : {1, 2}) {
            const auto& g = grp[k];
            physical_ccz(ctx, atom_of(0, g.ja), atom_of(1, g.kb), atom_of(2, g.lc),
                         RydClass::Single);
        }
        // (iii) g2,g3 for each logical, unprotected; correlated decode
        for (int l = 0; l < 3; ++l) {
            int v2 = ryd7_measure_stab(ctx, l, 1, false, nullptr);
            int v3 = ryd7_measure_stab(ctx, l, 2, false, nullptr);
            int la = l == 0 ? grp[1].ja : (l == 1 ? grp[1].kb : grp[1].lc);
            int lb = l == 0 ? grp[2].ja : (l == 1 ? grp[2].kb : grp[2].lc);
            auto table = ccz_group_table(code, la, lb);
            Syndrome s{{1, v2, v3, 1, 1, 1}};
            apply_pauli_correction(ctx, decode_correlated(table, s), blocks[l]);
        }
        // (iv) Z-type generators for each logical: catch the |+> replacement
        for (int l = 0; l < 3; ++l) {
            int z4 = ryd7_measure_stab(ctx, l, 3, false, nullptr);
            int z5 = ryd7_measure_stab(ctx, l, 4, false, nullptr);
            int z6 = ryd7_measure_stab(ctx, l, 5, false, nullptr);
            Syndrome s{{1, 1, 1, z4, z5, z6}};
            auto d = decode(code, s);
            if (!d.multi_error) apply_pauli_correction(ctx, d.correction, blocks[l]);
        }
    }
}

// ---------------------------------------------------------------------------
// Ryd-3 programs

namespace {

struct StabGeometry {
    int syndrome = -1;
    std::array<int, 2> relays{-1, -1};
};

StabGeometry ryd3_stab_geometry(const Layout& lay, int d1, int d2) {
    StabGeometry g;
    for (int i = 0; i < lay.size(); ++i) {
        if (lay.atoms[i].kind != AtomAssignment::Kind::Ancilla) continue;
        if (lay.dist2_int(i, d1) == 1 && lay.dist2_int(i, d2) == 1) {
            g.syndrome = i;
            break;
        }
    }
    if (g.syndrome < 0) throw std::runtime_error("ryd3: no syndrome site for data pair");
    std::array<int, 2> data = {d1, d2};
    for (int k = 0; k < 2; ++k) {
        LatticePos want{2 * lay.atoms[data[k]].pos.a - lay.atoms[g.syndrome].pos.a,
                        2 * lay.atoms[data[k]].pos.b - lay.atoms[g.syndrome].pos.b};
        for (int i = 0; i < lay.size(); ++i)
            if (lay.atoms[i].kind == AtomAssignment::Kind::Ancilla && lay.atoms[i].pos == want)
                g.relays[k] = i;
        if (g.relays[k] < 0) throw std::runtime_error("ryd3: no relay site for stabilizer CNOT");
    }
    return g;
}

}  // namespace

void bias_preserving_cnot(ProtocolContext& ctx, int control, int target, int relay) {
    if (!ctx.species().supports_bias_preserving())
        throw std::invalid_argument("bias-preserving CNOT needs nuclear spin I >= 5/2");
    std::vector<int> all = {control, target, relay};
    if (!ctx.opts.disable_cnot_relay) {
        ctx.reset(relay, false);  // ancilla initialized |0>
        ctx.or_gate({control}, relay, RydClass::R1);          // (a) CNOT C -> A
        ctx.or_gate({control, relay}, target, RydClass::R2);  // (b) three-atom gate
        ctx.or_gate({control}, relay, RydClass::R1);          // (c) uncompute
    } else {
        ctx.or_gate({control}, target, RydClass::R2);
    }
    // steps 5-6: incoherent Rydberg drive then sign-routed optical pumping
    ctx.incoherent_rydberg_pump(all);
    ctx.pump_leaks_to_stretched();
    ctx.optical_pump(Register::PumpScheme::CnotPlus);
    ctx.optical_pump(Register::PumpScheme::CnotMinus);
}

void ryd3_stabilizer_round(ProtocolContext& ctx, int logical) {
    const Layout& lay = ctx.layout();
    auto block = lay.logical_block(logical);
    auto g1 = ryd3_stab_geometry(lay, block[0], block[1]);
    auto g2 = ryd3_stab_geometry(lay, block[1], block[2]);
    ctx.reserve_ancilla("syn1");
    ctx.reserve_ancilla("syn2");
    ctx.reserve_ancilla("rel1");
    ctx.reserve_ancilla("rel2");

    auto measure_stab = [&](const StabGeometry& g, int da, int db, const char* label) {
        ctx.reset(g.syndrome, true);
        bias_preserving_cnot(ctx, g.syndrome, da, g.relays[0]);
        bias_preserving_cnot(ctx, g.syndrome, db, g.relays[1]);
        MeasureOutcome o = ctx.measure(g.syndrome, MeasureBasis::X, MeasurePurpose::Syndrome,
                                       MeasureOutcome::Plus);
        ctx.reset(g.syndrome, false);
        int v = o == MeasureOutcome::Minus ? -1 : 1;
        ctx.syndromes.push_back({label, v});
        return v;
    };

    int v1 = 0, v2 = 0;
    for (int attempt = 0; attempt < 2; ++attempt) {
        v1 = measure_stab(g1, block[0], block[1], "rep:g1");
        v2 = measure_stab(g2, block[1], block[2], "rep:g2");
        if (v1 > 0 && v2 > 0) break;  // repeat the round once on any -1
    }
    auto d = decode(repetition_code(), Syndrome{{v1, v2}});
    apply_pauli_correction(ctx, d.correction, block);
}

void ryd3_prepare_plus(ProtocolContext& ctx, int logical, int logical_value) {
    auto block = ctx.layout().logical_block(logical);
    for (int a : block) {
        ctx.reset(a, true);
        if (logical_value) ctx.z(a);  // |-> per atom
    }
}

void ryd3_logical_cz(ProtocolContext& ctx, int la, int lb) {
    const Layout& lay = ctx.layout();
    auto a = lay.logical_block(la), b = lay.logical_block(lb);
    for (int j = 0; j < 3; ++j)
        for (int k = 0; k < 3; ++k) {
            physical_cz(ctx, a[j], b[k], RydClass::R1);
            // preventative repump converts any Rydberg leak after each gate
            ctx.incoherent_rydberg_pump({a[j], b[k]});
            ctx.pump_leaks_to_stretched();
            ctx.optical_pump(Register::PumpScheme::Standard);
        }
}

void ryd3_logical_ccz(ProtocolContext& ctx) {
    const Layout& lay = ctx.layout();
    std::array<std::vector<int>, 3> blocks = {lay.logical_block(0), lay.logical_block(1),
                                              lay.logical_block(2)};
    int probe = lay.ancilla("A2");
    std::array<int, 3> loss_anc = {lay.ancilla("s0a"), lay.ancilla("s1a"), lay.ancilla("A1")};
    ctx.reserve_ancilla("probe");
    for (int l = 0; l < 3; ++l) ctx.reserve_ancilla("loss" + std::to_string(l));

    bool responded = false;
    for (int j = 0; j < 3; ++j)
        for (int k = 0; k < 3; ++k)
            for (int l = 0; l < 3; ++l) {
                physical_ccz(ctx, blocks[0][j], blocks[1][k], blocks[2][l], RydClass::R1);
                if (responded) continue;
                if (!ctx.probe_rydberg(probe, RydClass::R1)) continue;
                responded = true;
                ctx.log("leak detected during logical CCZ");
                ctx.eject_leaked();
                int lost = -1;
                for (int lq = 0; lq < 3; ++lq)
                    for (int q = 0; q < 3; ++q)
                        if (ctx.loss_check(blocks[lq][q], loss_anc[lq], RydClass::R1, false) &&
                            lost < 0)
                            lost = blocks[lq][q];
                if (lost >= 0) ctx.eject_and_replace(lost, false);  // |1>: Z-type
            }
}

void bias_preserving_toffoli(ProtocolContext& ctx, int c1, int c2, int target,
                             const std::string& flank_left, const std::string& flank_right,
                             const std::string& substitute) {
    const Layout& lay = ctx.layout();
    int fl = lay.ancilla(flank_left), fr = lay.ancilla(flank_right);
    bool use_sub = !substitute.empty() && !ctx.opts.toffoli_direct;
    int sub = use_sub ? lay.ancilla(substitute) : -1;
    ctx.reserve_ancilla("rel1");
    ctx.reserve_ancilla("rel2");
    if (use_sub) ctx.reserve_ancilla("syn1");

    ctx.reset(fl, false);
    ctx.reset(fr, false);
    if (use_sub) ctx.reset(sub, false);

    ctx.x(c1);
    ctx.x(c2);
    ctx.or_gate({c1, c2}, fl, RydClass::R1);
    if (use_sub) {
        ctx.or_gate({c1, c2}, sub, RydClass::R1);
        ctx.or_gate({sub}, fr, RydClass::R1);  // relay CNOT into the far flank
    } else {
        ctx.or_gate({c1, c2}, fr, RydClass::R1);
    }
    ctx.or_gate({fl, fr}, target, RydClass::R2);
    if (use_sub) {
        ctx.or_gate({sub}, fr, RydClass::R1);
        ctx.or_gate({c1, c2}, sub, RydClass::R1);
    } else {
        ctx.or_gate({c1, c2}, fr, RydClass::R1);
    }
    ctx.or_gate({c1, c2}, fl, RydClass::R1);
    ctx.x(c1);
    ctx.x(c2);
    ctx.x(target);

    std::vector<int> all = {c1, c2, target, fl, fr};
    if (use_sub) all.push_back(sub);
    ctx.incoherent_rydberg_pump(all);
    ctx.pump_leaks_to_stretched();
    ctx.optical_pump(Register::PumpScheme::CnotPlus);
    ctx.optical_pump(Register::PumpScheme::CnotMinus);
}

void ryd3_pieceable_toffoli(ProtocolContext& ctx) {
    const Layout& lay = ctx.layout();
    std::array<std::vector<int>, 3> blocks = {lay.logical_block(0), lay.logical_block(1),
                                              lay.logical_block(2)};
    auto geo = ryd3_toffoli_geometry(lay);
    // pieces: fixed control index k on block 1; QEC on the target block
    // between pieces stops Z spreading through later gates
    for (int k = 1; k <= 3; ++k) {
        for (int j = 1; j <= 3; ++j) {
            bool problem_pair = (k == 2) && (j == 1 || j == 3);
            const auto& [fl, fr] = geo.flanks[j];
            // the far ancilla is listed first for targets 1 and 3
            std::string left = fl, right = fr, sub;
            if (!ctx.opts.toffoli_direct && problem_pair) {
                // far flank written through the substitute relay
                left = fr;          // near flank direct
                right = geo.far_ancilla;
                sub = geo.substitute[j];
            } else if (fl == geo.far_ancilla) {
                left = fr;
                right = fl;
            }
            bias_preserving_toffoli(ctx, blocks[0][j - 1], blocks[1][k - 1], blocks[2][j - 1],
                                    left, right, sub);
        }
        if (k < 3) ryd3_stabilizer_round(ctx, 2);
    }
}

void ryd3_hadamard(ProtocolContext& ctx) {
    const Layout& lay = ctx.layout();
    auto dblock = lay.logical_block(0);
    auto eblock = lay.logical_block(1);
    auto mblock = lay.logical_block(2);
    for (int a : eblock) ctx.reserve_ancilla("block:" + std::to_string(a));
    for (int a : mblock) ctx.reserve_ancilla("block:" + std::to_string(a));

    ryd3_prepare_plus(ctx, 1, 0);  // E = |+>_L
    ryd3_prepare_plus(ctx, 2, 1);  // M = |->_L
    ryd3_pieceable_toffoli(ctx);   // CCX(D, E -> M) acts as CZ(D,E)

    // transversal X readout of D teleports H|psi> onto E up to X_L
    std::array<int, 3> dx{};
    for (int i = 0; i < 3; ++i) {
        MeasureOutcome o = ctx.measure(dblock[i], MeasureBasis::X, MeasurePurpose::DataReadout,
                                       MeasureOutcome::Plus);
        dx[i] = o == MeasureOutcome::Minus ? -1 : 1;
    }
    int xbar = dx[0] + dx[1] + dx[2] > 0 ? 1 : -1;  // majority decode
    if (xbar < 0) ctx.x(eblock[0]);                 // logical X correction

    // M should still read |->_L; its readout only verifies
    std::array<int, 3> mx{};
    for (int i = 0; i < 3; ++i) {
        MeasureOutcome o = ctx.measure(mblock[i], MeasureBasis::X, MeasurePurpose::DataReadout,
                                       MeasureOutcome::Minus);
        mx[i] = o == MeasureOutcome::Minus ? -1 : 1;
    }
    if (mx[0] + mx[1] + mx[2] > 0) ctx.log("verification block lost its X parity");

    // consumed blocks end in |0> so the output state is a clean product
    for (int a : dblock) ctx.reset(a, false);
    for (int a : mblock) ctx.reset(a, false);
}

}  // namespace rydft
