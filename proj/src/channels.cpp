#include "rydft/channels.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

namespace rydft {

std::string KrausEvent::str() const {
    std::ostringstream os;
    switch (kind) {
        case Kind::NoJump: os << "NoJump(a=" << alpha << ",b=" << beta << ")"; break;
        case Kind::JumpToRydberg: os << "JumpToRydberg(" << ryd_target.str() << ")"; break;
        case Kind::JumpToHyperfine: os << "JumpToHyperfine(" << hf_target.str() << ")"; break;
        case Kind::DephaseZ: os << "DephaseZ"; break;
        case Kind::AtomLoss: os << "AtomLoss"; break;
    }
    return os.str();
}

std::string FaultLocation::str() const {
    std::ostringstream os;
    os << "w" << circuit_step << " atom" << atom << " " << event.str();
    if (!window_desc.empty()) os << " [" << window_desc << "]";
    return os.str();
}

double ErrorChannel::completeness_defect() const {
    // All jump branches are rank-one out of |1>, NoJump branches are diagonal,
    // so Sum M^dag M is diagonal on {|0>,|1>,|r>} (identity on other levels).
    double on0 = 0.0, on1 = 0.0, onr = 0.0;
    for (const auto& e : events) {
        double w = std::norm(e.amplitude);
        switch (e.kind) {
            case KrausEvent::Kind::NoJump:
                on1 += w * e.alpha * e.alpha;
                on0 += w * e.beta * e.beta;
                onr += w * e.r_coeff * e.r_coeff;
                break;
            case KrausEvent::Kind::JumpToRydberg:
            case KrausEvent::Kind::JumpToHyperfine:
                on1 += w;
                break;
            case KrausEvent::Kind::DephaseZ:
            case KrausEvent::Kind::AtomLoss:
                on0 += w;
                on1 += w;
                onr += w;
                break;
        }
    }
    return std::max({std::abs(on0 - 1.0), std::abs(on1 - 1.0), std::abs(onr - 1.0)});
}

ErrorChannel bbr_channel(double jump_probability, const BBRTargetTable& targets) {
    if (jump_probability < 0.0 || jump_probability > 1.0)
        throw std::invalid_argument("bbr_channel: P outside [0,1]");
    ErrorChannel ch;
    ch.total_jump_probability = jump_probability;
    double sum_jumps = 0.0;
    for (const auto& [r, w] : targets.entries) {
        if (jump_probability * w == 0.0) continue;
        KrausEvent e;
        e.kind = KrausEvent::Kind::JumpToRydberg;
        e.ryd_target = r;
        e.amplitude = std::sqrt(jump_probability * w);
        sum_jumps += std::norm(e.amplitude);
        ch.events.push_back(e);
    }
    KrausEvent m0;
    m0.kind = KrausEvent::Kind::NoJump;
    m0.alpha = std::sqrt(std::max(0.0, 1.0 - sum_jumps));  // completeness solve
    ch.events.insert(ch.events.begin(), m0);
    return ch;
}

RdPulseConstants rd_pulse_constants(double gamma, double t_pi, double pulse_angle) {
    if (gamma < 0.0 || t_pi <= 0.0) throw std::invalid_argument("rd constants: bad inputs");
    if (std::abs(pulse_angle - 2.0 * M_PI) < 1e-12)
        return {0.75 * gamma * t_pi, gamma * t_pi / 8.0};
    if (std::abs(pulse_angle - M_PI) < 1e-12) {
        // derived fixture for a pi pulse: final-r jump weight is the
        // sin^2*cos^2 integral, dephasing weight matches exp(-gamma t_pi/4)
        return {gamma * t_pi / 8.0, 3.0 * gamma * t_pi / 16.0};
    }
    throw std::invalid_argument("rd constants: only pi and 2pi pulses tabulated");
}

ErrorChannel rd_channel(double gamma_total, double t_pi, const BranchingTable& branching,
                        const RdChannelOptions& opts) {
    if (gamma_total < 0.0 || t_pi <= 0.0)
        throw std::invalid_argument("rd_channel: rates must be nonnegative");
    ErrorChannel ch;
    if (gamma_total == 0.0) {
        ch.events.push_back(KrausEvent{});
        return ch;
    }
    if (gamma_total * t_pi >= 0.1)
        throw std::invalid_argument("rd_channel: gamma*t_pi outside the leading-order regime");

    const Species sp = rb87();
    const double gamma1 = gamma_total * branching.ratio(sp.qubit1);
    const auto [p1, p2] = rd_pulse_constants(gamma1, t_pi, 2.0 * M_PI);

    std::vector<KrausEvent> jumps;
    {
        KrausEvent mr;  // decay to |1> re-driven into |r> by the rest of the pulse
        mr.kind = KrausEvent::Kind::JumpToRydberg;
        mr.ryd_target = RydbergState{70, Orbital::S, HalfInt(1), HalfInt(1), HalfInt(3), 66.95};
        mr.amplitude = std::sqrt(p1 * (1.0 - p2));
        jumps.push_back(mr);

        KrausEvent m1;
        m1.kind = KrausEvent::Kind::JumpToHyperfine;
        m1.hf_target = sp.qubit1;
        m1.amplitude = std::sqrt(p2);
        jumps.push_back(m1);
    }
    double leak1 = 0.0;
    for (const auto& [f, b] : branching.entries()) {
        if (f == sp.qubit1 || b == 0.0) continue;
        if (f == sp.qubit0 && !opts.include_qubit0_decay) continue;
        KrausEvent mf;
        mf.kind = KrausEvent::Kind::JumpToHyperfine;
        mf.hf_target = f;
        mf.amplitude = std::sqrt(gamma_total * b * t_pi);
        leak1 += std::norm(mf.amplitude);
        jumps.push_back(mf);
    }
    if (opts.intermediate_scatter_probability > 0.0) {
        auto is = intermediate_scattering_channel(opts.intermediate_scatter_probability, sp);
        for (const auto& e : is.events)
            if (e.kind == KrausEvent::Kind::JumpToHyperfine) {
                jumps.push_back(e);
                leak1 += std::norm(e.amplitude);
            }
    }

    const double on1 = p1 * (1.0 - p2) + p2 + leak1;
    KrausEvent m0;  // alpha solves completeness; equals sqrt((1-p1)(1-p2)) when leak-free
    m0.kind = KrausEvent::Kind::NoJump;
    m0.alpha = std::sqrt(std::max(0.0, 1.0 - on1));
    m0.beta = std::sqrt(1.0 - p2);
    ch.events.push_back(m0);
    KrausEvent m2;  // M2 = sqrt(p2)|0><0|
    m2.kind = KrausEvent::Kind::NoJump;
    m2.amplitude = std::sqrt(p2);
    m2.alpha = 0.0;
    m2.beta = 1.0;
    m2.r_coeff = 0.0;
    for (auto& j : jumps) ch.events.push_back(j);
    ch.events.push_back(m2);
    ch.total_jump_probability = on1;
    return ch;
}

ErrorChannel intermediate_scattering_channel(double probability, const Species& species) {
    if (probability < 0.0 || probability > 1.0)
        throw std::invalid_argument("intermediate scattering: probability outside [0,1]");
    ErrorChannel ch;
    ch.total_jump_probability = probability;
    // scattering via the sigma+ ladder ends in |1> or the two neighboring
    // ground states; equal thirds by default (configuration)
    std::vector<HyperfineState> targets = {
        species.qubit1,
        {species.qubit1.F, species.qubit1.mF + HalfInt::from_int(1)},
        {species.qubit1.F - HalfInt::from_int(1), species.qubit1.mF},
    };
    for (const auto& t : targets) {
        KrausEvent e;
        e.kind = KrausEvent::Kind::JumpToHyperfine;
        e.hf_target = t;
        e.amplitude = std::sqrt(probability / 3.0);
        ch.events.push_back(e);
    }
    KrausEvent m0;
    m0.kind = KrausEvent::Kind::NoJump;
    m0.alpha = std::sqrt(1.0 - probability);
    ch.events.insert(ch.events.begin(), m0);
    return ch;
}

// ---------------------------------------------------------------------------
// Correlated-error derivation: dense replay of the pi-2pi-pi schedule with
// four levels per atom: 0=|0>, 1=|1>, 2=|r>, 3=leaked Rydberg.

namespace {

struct MiniState {
    int n;
    std::vector<cplx> amp;
    explicit MiniState(int atoms) : n(atoms), amp(dim(atoms), 0.0) {}
    static std::size_t dim(int n) { return std::size_t(1) << (2 * n); }
    static int level(std::size_t idx, int atom) { return int((idx >> (2 * atom)) & 3u); }
    static std::size_t with_level(std::size_t idx, int atom, int lvl) {
        return (idx & ~(std::size_t(3) << (2 * atom))) | (std::size_t(lvl) << (2 * atom));
    }
};

bool blocked(const MiniState& s, std::size_t idx, int atom) {
    for (int j = 0; j < s.n; ++j)
        if (j != atom && MiniState::level(idx, j) >= 2) return true;
    return false;
}

// pi pulse |1> <-> |r>, phase -i on the transferred amplitude
void pulse_pi(MiniState& s, int atom) {
    std::vector<cplx> out(s.amp.size(), 0.0);
    for (std::size_t i = 0; i < s.amp.size(); ++i) {
        cplx a = s.amp[i];
        if (a == cplx(0.0)) continue;
        int l = MiniState::level(i, atom);
        if ((l == 1 || l == 2) && !blocked(s, i, atom))
            out[MiniState::with_level(i, atom, l == 1 ? 2 : 1)] += cplx(0, -1) * a;
        else
            out[i] += a;
    }
    s.amp = std::move(out);
}

}  // namespace

int collective_gate_window_count(const CollectiveGateDescriptor& g) {
    return 2 * g.n_controls + 2 * g.n_targets;
}

std::vector<CorrelatedFactor> correlated_error_terms(const CollectiveGateDescriptor& gate,
                                                     int fault_atom, int window) {
    const int n = gate.n_controls + gate.n_targets;
    if (fault_atom < 0 || fault_atom >= n) throw std::invalid_argument("fault atom out of range");
    const int total_windows = collective_gate_window_count(gate);
    if (window < 0 || window > total_windows)
        throw std::invalid_argument("fault outside gate schedule");

    struct RunResult {
        MiniState state{1};
        bool fault_applied = false;
        std::set<int> suppressed;  // atoms whose post-fault pulses were blockade-suppressed
    };

    auto run = [&](std::size_t basis_in, bool with_fault) {
        RunResult r;
        r.state = MiniState(n);
        r.state.amp[basis_in] = 1.0;
        int w = 0;
        auto maybe_fault = [&]() {
            if (!with_fault || w != window) return;
            std::vector<cplx> out(r.state.amp.size(), 0.0);
            for (std::size_t i = 0; i < r.state.amp.size(); ++i) {
                if (r.state.amp[i] == cplx(0.0)) continue;
                if (MiniState::level(i, fault_atom) == 2) {
                    out[MiniState::with_level(i, fault_atom, 3)] += r.state.amp[i];
                    r.fault_applied = true;
                }
            }
            r.state.amp = std::move(out);
        };
        auto do_pulse = [&](int atom) {
            if (r.fault_applied && atom != fault_atom) {
                // record suppression: a leaked neighbor blockades this pulse
                bool has_support = false;
                for (std::size_t i = 0; i < r.state.amp.size(); ++i)
                    if (r.state.amp[i] != cplx(0.0) && MiniState::level(i, atom) >= 1 &&
                        MiniState::level(i, atom) <= 2)
                        has_support = true;
                if (has_support) r.suppressed.insert(atom);
            }
            pulse_pi(r.state, atom);
        };
        for (int c = 0; c < gate.n_controls; ++c) { maybe_fault(); do_pulse(c); ++w; }
        for (int t = 0; t < gate.n_targets; ++t) {
            int atom = gate.n_controls + t;
            maybe_fault(); do_pulse(atom); ++w;
            maybe_fault(); do_pulse(atom); ++w;
        }
        for (int c = gate.n_controls - 1; c >= 0; --c) { maybe_fault(); do_pulse(c); ++w; }
        maybe_fault();
        return r;
    };

    std::vector<CorrelatedFactor> out;
    bool any = false;
    std::set<int> suppressed_union, stranded;
    std::map<std::size_t, cplx> residual;
    for (std::size_t b = 0; b < MiniState::dim(n); ++b) {
        bool qubit_basis = true;
        for (int a = 0; a < n; ++a) qubit_basis &= (MiniState::level(b, a) <= 1);
        if (!qubit_basis) continue;
        RunResult faulted = run(b, true);
        if (!faulted.fault_applied) continue;
        any = true;
        suppressed_union.insert(faulted.suppressed.begin(), faulted.suppressed.end());
        RunResult ideal = run(b, false);
        std::size_t expect = MiniState::with_level(b, fault_atom, 3);
        cplx a = faulted.state.amp[expect];
        if (std::abs(a) > 1e-12 && std::abs(ideal.state.amp[b]) > 1e-12)
            residual[b] = a / ideal.state.amp[b];
        // atoms stranded with Rydberg population after the schedule
        for (std::size_t i = 0; i < faulted.state.amp.size(); ++i)
            if (std::abs(faulted.state.amp[i]) > 1e-12)
                for (int at = 0; at < n; ++at)
                    if (at != fault_atom && MiniState::level(i, at) == 2) stranded.insert(at);
    }
    if (!any) return out;  // null fault: no Rydberg support at this window

    out.push_back({fault_atom, CorrelatedFactorKind::RydbergLeak});
    for (int at : stranded) out.push_back({at, CorrelatedFactorKind::RydbergLeak});

    // detect strict single-atom Z structure in the surviving-branch residuals
    std::set<int> zset;
    for (int atom = 0; atom < n; ++atom) {
        if (atom == fault_atom) continue;
        for (const auto& [b, rphase] : residual) {
            if (MiniState::level(b, atom) == 1) continue;
            auto it = residual.find(MiniState::with_level(b, atom, 1));
            if (it == residual.end()) continue;
            if (std::abs(it->second / rphase + 1.0) < 1e-9) zset.insert(atom);
            break;
        }
    }
    for (int at : zset) out.push_back({at, CorrelatedFactorKind::PauliZ});
    for (int at : suppressed_union)
        if (!zset.count(at) && !stranded.count(at))
            out.push_back({at, CorrelatedFactorKind::BlockedPhase});
    return out;
}

}  // namespace rydft
