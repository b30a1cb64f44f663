#include "rydft/sim.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "json.hpp"

namespace rydft {

namespace {
int sgn(int x) { return x > 0 ? 1 : (x < 0 ? -1 : 0); }
}  // namespace

AtomLevel qubit_level(const Species& sp, int which) {
    AtomLevel l;
    l.kind = AtomLevel::Kind::Hyperfine;
    l.hf = which == 0 ? sp.qubit0 : sp.qubit1;
    l.m_sign = sgn(l.hf.mF.twice());
    return l;
}

AtomLevel hyperfine_level(const HyperfineState& hf) {
    AtomLevel l;
    l.kind = AtomLevel::Kind::Hyperfine;
    l.hf = hf;
    l.m_sign = sgn(hf.mF.twice());
    return l;
}

AtomLevel rydberg_level(const RydbergState& r, RydClass cls) {
    AtomLevel l;
    l.kind = AtomLevel::Kind::Rydberg;
    l.ryd = r;
    l.ryd_class = cls;
    l.m_sign = sgn(r.m_total().twice());
    return l;
}

int RecordedChooser::choose(const std::string&, const std::vector<double>& weights) {
    std::vector<int> v;
    for (int i = 0; i < int(weights.size()); ++i)
        if (weights[i] > 1e-12) v.push_back(i);
    viable.push_back(v);
    std::size_t point = taken.size();
    int pick;
    if (point < decisions.size()) {
        pick = decisions[point];
        if (pick >= int(weights.size()) || weights[pick] <= 1e-12)
            throw std::runtime_error("recorded branch decision is not viable");
    } else {
        pick = v.empty() ? 0 : v.front();
    }
    path_weight *= weights[pick];
    taken.push_back(pick);
    return pick;
}

static bool level_equal(const AtomLevel& a, const AtomLevel& b) {
    if (a.kind != b.kind) return false;
    if (a.kind == AtomLevel::Kind::Hyperfine) return a.hf == b.hf;
    return a.ryd == b.ryd && a.ryd_class == b.ryd_class;
}

Register::Register(const Layout& layout, Species species)
    : layout_(&layout), species_(std::move(species)) {
    int n = layout.size();
    if (n > 32) throw std::invalid_argument("register: more than 32 atoms");
    status_.assign(n, AtomStatus::Active);
    leak_info_.resize(n);
    levels_.resize(n);
    for (int i = 0; i < n; ++i) {
        levels_[i].push_back(qubit_level(species_, 0));
        levels_[i].push_back(qubit_level(species_, 1));
    }
    amp_[BasisKey{}] = 1.0;
}

int Register::find_level(int atom, const AtomLevel& level) const {
    for (int i = 0; i < int(levels_[atom].size()); ++i)
        if (level_equal(levels_[atom][i], level)) return i;
    return -1;
}

int Register::level_id(int atom, const AtomLevel& level) {
    int id = find_level(atom, level);
    if (id >= 0) return id;
    if (levels_[atom].size() >= 16) throw std::runtime_error("register: atom level table full");
    levels_[atom].push_back(level);
    return int(levels_[atom].size()) - 1;
}

void Register::set_product_state(const std::vector<int>& lvls) {
    BasisKey k;
    for (int i = 0; i < n_atoms(); ++i) k.set(i, lvls.at(i));
    amp_.clear();
    amp_[k] = 1.0;
    for (auto& s : status_) s = AtomStatus::Active;
}

void Register::set_qubit(int atom, cplx c0, cplx c1) {
    AmplitudeMap out;
    for (const auto& [k, a] : amp_) {
        if (k.get(atom) != 0)
            throw std::logic_error("set_qubit: atom already has nonzero support");
        if (std::abs(c0) > 0) out[k] += a * c0;
        if (std::abs(c1) > 0) out[k.with(atom, 1)] += a * c1;
    }
    amp_ = std::move(out);
}

void Register::set_block_amplitudes(
    const std::vector<int>& atoms, const std::vector<std::pair<std::vector<int>, cplx>>& terms) {
    AmplitudeMap out;
    for (const auto& [k, a] : amp_) {
        for (int at : atoms)
            if (k.get(at) != 0) throw std::logic_error("set_block_amplitudes: atom in use");
        for (const auto& [bits, c] : terms) {
            BasisKey k2 = k;
            for (std::size_t i = 0; i < atoms.size(); ++i) k2.set(atoms[i], bits[i]);
            out[k2] += a * c;
        }
    }
    amp_ = std::move(out);
}

void Register::apply_qubit_unitary(int atom, const std::array<cplx, 4>& u) {
    if (status_[atom] != AtomStatus::Active && status_[atom] != AtomStatus::DrivenRydberg) return;
    AmplitudeMap out;
    out.reserve(amp_.size() * 2);
    for (const auto& [k, a] : amp_) {
        int l = k.get(atom);
        if (l == 0) {
            if (u[0] != cplx(0.0)) out[k] += u[0] * a;
            if (u[2] != cplx(0.0)) out[k.with(atom, 1)] += u[2] * a;
        } else if (l == 1) {
            if (u[1] != cplx(0.0)) out[k.with(atom, 0)] += u[1] * a;
            if (u[3] != cplx(0.0)) out[k] += u[3] * a;
        } else {
            out[k] += a;
        }
    }
    amp_ = std::move(out);
    prune(amp_);
}

void Register::hadamard(int atom) {
    const double s = 1.0 / std::sqrt(2.0);
    apply_qubit_unitary(atom, {s, s, s, -s});
}
void Register::pauli_x(int atom) { apply_qubit_unitary(atom, {0, 1, 1, 0}); }
void Register::pauli_y(int atom) {
    apply_qubit_unitary(atom, {0, cplx(0, -1), cplx(0, 1), 0});
}
void Register::pauli_z(int atom) { apply_qubit_unitary(atom, {1, 0, 0, -1}); }
void Register::phase_s(int atom) { apply_qubit_unitary(atom, {1, 0, 0, cplx(0, 1)}); }

void Register::hyperfine_swap(int atom, const AtomLevel& a, const AtomLevel& b) {
    if (status_[atom] != AtomStatus::Active && status_[atom] != AtomStatus::DrivenRydberg) return;
    int la = level_id(atom, a), lb = level_id(atom, b);
    AmplitudeMap out;
    out.reserve(amp_.size());
    for (const auto& [k, am] : amp_) {
        int l = k.get(atom);
        if (l == la) out[k.with(atom, lb)] += am;
        else if (l == lb) out[k.with(atom, la)] += am;
        else out[k] += am;
    }
    amp_ = std::move(out);
}

bool Register::blocked_in_basis(const BasisKey& k, int atom, RydClass cls) const {
    double r = layout_->radius(cls);
    double r2 = r * r * (1.0 + 1e-9);
    for (int j = 0; j < n_atoms(); ++j) {
        if (j == atom) continue;
        if (double(layout_->dist2_int(atom, j)) > r2) continue;
        if (status_[j] == AtomStatus::RydbergLeaked && leak_info_[j].ryd_class == cls) return true;
        int lj = k.get(j);
        if (lj >= 2 && lj < int(levels_[j].size())) {
            const AtomLevel& L = levels_[j][lj];
            if (L.is_rydberg() && L.ryd_class == cls) return true;
        }
    }
    return false;
}

void Register::rydberg_pulse(int atom, const AtomLevel& ground, const AtomLevel& ryd,
                             double angle, bool throw_on_lost) {
    if (status_[atom] == AtomStatus::Lost) {
        if (throw_on_lost) throw std::logic_error("rydberg_pulse: atom is lost");
        return;  // addressed pulse at an empty site
    }
    if (status_[atom] == AtomStatus::RydbergLeaked || status_[atom] == AtomStatus::HyperfineLeaked)
        return;  // addressed transition has no population
    if (!ryd.is_rydberg()) throw std::invalid_argument("rydberg_pulse: target not Rydberg");
    int lg = level_id(atom, ground), lr = level_id(atom, ryd);
    RydClass cls = ryd.ryd_class;
    const bool is_2pi = std::abs(std::abs(angle) - 2.0 * M_PI) < 1e-12;
    const cplx f = angle > 0 ? cplx(0, -1) : cplx(0, 1);
    AmplitudeMap out;
    out.reserve(amp_.size());
    for (const auto& [k, a] : amp_) {
        int l = k.get(atom);
        bool involved = (l == lg || l == lr);
        if (!involved || blocked_in_basis(k, atom, cls)) {
            out[k] += a;
            continue;
        }
        if (is_2pi) {
            out[k] += -a;
        } else {
            out[k.with(atom, l == lg ? lr : lg)] += f * a;
        }
    }
    amp_ = std::move(out);
    prune(amp_);
    refresh_status(atom);
}

void Register::refresh_status(int atom) {
    if (status_[atom] != AtomStatus::Active && status_[atom] != AtomStatus::DrivenRydberg) return;
    for (const auto& [k, a] : amp_) {
        int l = k.get(atom);
        if (l >= 2 && l < int(levels_[atom].size()) && levels_[atom][l].is_rydberg()) {
            status_[atom] = AtomStatus::DrivenRydberg;
            return;
        }
    }
    status_[atom] = AtomStatus::Active;
}

void Register::collective_gate(const std::vector<int>& controls, const std::vector<int>& targets,
                               RydClass cls,
                               const std::function<void(int, int)>& window_hook) {
    // geometry precondition: control-target pairs within the class radius
    for (int c : controls)
        for (int t : targets)
            if (layout_->dist(c, t) > layout_->radius(cls) * (1.0 + 1e-12))
                throw std::runtime_error("collective gate infeasible: atoms " + std::to_string(c) +
                                         "," + std::to_string(t) + " outside blockade radius");
    const AtomLevel q1 = qubit_level(species_, 1);
    RydbergState rplus{70, Orbital::S, HalfInt(1), HalfInt(1), species_.I, 66.95};
    if (cls == RydClass::R1) rplus.n = 80;
    if (cls == RydClass::R2) rplus.n = 60;
    const AtomLevel rl = rydberg_level(rplus, cls);
    int w = 0;
    auto hook = [&](int pulse_atom) {
        if (window_hook) window_hook(w, pulse_atom);
        ++w;
    };
    for (int c : controls) { hook(c); rydberg_pulse(c, q1, rl, M_PI, false); }
    for (int t : targets) {
        hook(t); rydberg_pulse(t, q1, rl, M_PI, false);
        hook(t); rydberg_pulse(t, q1, rl, M_PI, false);
    }
    for (auto it = controls.rbegin(); it != controls.rend(); ++it) {
        hook(*it); rydberg_pulse(*it, q1, rl, M_PI, false);  // +pi return, total -1 phase
    }
    if (window_hook) window_hook(w, -1);  // after the last pulse
}

void Register::collective_gate_oneshot(const std::vector<int>& controls,
                                       const std::vector<int>& targets, RydClass cls) {
    double r = layout_->radius(cls);
    double r2 = r * r * (1.0 + 1e-9);
    auto near = [&](int i, int j) { return double(layout_->dist2_int(i, j)) <= r2; };
    AmplitudeMap out;
    out.reserve(amp_.size());
    for (const auto& [k, a] : amp_) {
        double phase = 1.0;
        std::vector<int> excited;
        auto blocked_by_env = [&](int atom) {
            for (int j = 0; j < n_atoms(); ++j) {
                if (j == atom || !near(atom, j)) continue;
                if (status_[j] == AtomStatus::RydbergLeaked && leak_info_[j].ryd_class == cls)
                    return true;
                int lj = k.get(j);
                if (lj >= 2 && levels_[j][lj].is_rydberg() && levels_[j][lj].ryd_class == cls)
                    return true;
            }
            for (int e : excited)
                if (near(atom, e)) return true;
            return false;
        };
        for (int c : controls) {
            if (k.get(c) == 1 && status_[c] == AtomStatus::Active && !blocked_by_env(c)) {
                excited.push_back(c);
                phase = -phase;
            }
        }
        for (int t : targets)
            if (k.get(t) == 1 && status_[t] == AtomStatus::Active && !blocked_by_env(t))
                phase = -phase;
        out[k] += phase * a;
    }
    amp_ = std::move(out);
}

Register::InjectResult Register::inject(int atom, const KrausEvent& event,
                                        BranchChooser& chooser) {
    if (status_[atom] == AtomStatus::Lost) return InjectResult::NullFault;
    switch (event.kind) {
        case KrausEvent::Kind::JumpToRydberg:
        case KrausEvent::Kind::JumpToHyperfine: {
            // radiative decay is a two-photon cascade (|delta mF| <= 2); BBR is
            // a single microwave photon (|delta m| <= 1); higher orders sit
            // behind the allow_sign_cross flag
            int target_m2 = event.kind == KrausEvent::Kind::JumpToRydberg
                                ? event.ryd_target.m_total().twice()
                                : event.hf_target.mF.twice();
            int max_dm2 = event.kind == KrausEvent::Kind::JumpToRydberg ? 2 : 4;
            auto reachable = [&](const AtomLevel& src) {
                if (event.allow_sign_cross) return true;
                if (!src.is_rydberg()) return false;
                return std::abs(src.ryd.m_total().twice() - target_m2) <= max_dm2;
            };
            // decay strikes only Rydberg-occupied amplitude; an atom parked in
            // the ground manifold cannot jump
            std::vector<int> sources;
            for (int l = 2; l < int(levels_[atom].size()); ++l)
                if (levels_[atom][l].is_rydberg() && reachable(levels_[atom][l]))
                    sources.push_back(l);
            AmplitudeMap out;
            double w = 0.0;
            for (const auto& [k, a] : amp_) {
                int l = k.get(atom);
                if (std::find(sources.begin(), sources.end(), l) != sources.end()) {
                    out[k] += a;  // target level substituted below
                    w += std::norm(a);
                }
            }
            if (w < 1e-18) return InjectResult::NullFault;
            if (event.kind == KrausEvent::Kind::JumpToRydberg) {
                AtomLevel tl = rydberg_level(event.ryd_target, event.leak_class);
                int tid = level_id(atom, tl);
                AmplitudeMap mapped;
                for (const auto& [k, a] : out) mapped[k.with(atom, tid)] += a;
                amp_ = std::move(mapped);
                renormalize();
                // factor the atom out and flag it
                AmplitudeMap fact;
                for (const auto& [k, a] : amp_) fact[k.with(atom, 0)] += a;
                amp_ = std::move(fact);
                status_[atom] = AtomStatus::RydbergLeaked;
                leak_info_[atom] = tl;
            } else {
                const AtomLevel tl = hyperfine_level(event.hf_target);
                int existing = find_level(atom, tl);
                if (existing >= 0) {
                    // the state takes part in the running pulse program (qubit
                    // or shelf level): keep the atom dynamical
                    AmplitudeMap mapped;
                    for (const auto& [k, a] : out) mapped[k.with(atom, existing)] += a;
                    amp_ = std::move(mapped);
                    renormalize();
                    refresh_status(atom);
                } else {
                    AmplitudeMap mapped;
                    for (const auto& [k, a] : out) mapped[k.with(atom, 0)] += a;
                    amp_ = std::move(mapped);
                    renormalize();
                    status_[atom] = AtomStatus::HyperfineLeaked;
                    leak_info_[atom] = tl;
                }
            }
            return InjectResult::Applied;
        }
        case KrausEvent::Kind::DephaseZ: {
            bool any = false;
            for (auto& [k, a] : amp_) {
                int l = k.get(atom);
                if (l == 1) { a = -a; any = true; }
                else if (l == 0) any = true;
            }
            return any ? InjectResult::Applied : InjectResult::NullFault;
        }
        case KrausEvent::Kind::NoJump: {
            for (auto& [k, a] : amp_) {
                int l = k.get(atom);
                if (l == 1) a *= event.alpha;
                else if (l == 0) a *= event.beta;
                else if (l < int(levels_[atom].size()) && levels_[atom][l].is_rydberg())
                    a *= event.r_coeff;
            }
            prune(amp_);
            if (norm2(amp_) < 1e-18) return InjectResult::NullFault;
            renormalize();
            return InjectResult::Applied;
        }
        case KrausEvent::Kind::AtomLoss: {
            // erasure: branch over the atom's occupied levels, then remove it
            std::vector<double> wts(levels_[atom].size(), 0.0);
            for (const auto& [k, a] : amp_) wts[k.get(atom)] += std::norm(a);
            double tot = 0.0;
            for (double v : wts) tot += v;
            if (tot < 1e-18) {
                // factored atom (flagged): losing it is still meaningful
                status_[atom] = AtomStatus::Lost;
                return InjectResult::Applied;
            }
            for (auto& v : wts) v /= tot;
            int pick = chooser.choose("loss_level", wts);
            collapse_to_level(atom, pick);
            AmplitudeMap fact;
            for (const auto& [k, a] : amp_) fact[k.with(atom, 0)] += a;
            amp_ = std::move(fact);
            status_[atom] = AtomStatus::Lost;
            return InjectResult::Applied;
        }
    }
    return InjectResult::NullFault;
}

void Register::collapse_to_level(int atom, int level) {
    AmplitudeMap out;
    for (const auto& [k, a] : amp_)
        if (k.get(atom) == level) out[k] += a;
    amp_ = std::move(out);
    renormalize();
}

MeasureOutcome Register::measure(int atom, MeasureBasis basis, BranchChooser& chooser) {
    if (status_[atom] == AtomStatus::Lost || status_[atom] == AtomStatus::RydbergLeaked ||
        status_[atom] == AtomStatus::HyperfineLeaked)
        return MeasureOutcome::NoSignal;
    if (basis == MeasureBasis::X) {
        hadamard(atom);
        MeasureOutcome o = measure(atom, MeasureBasis::Z, chooser);
        if (o != MeasureOutcome::NoSignal) hadamard(atom);
        return o;
    }
    double w0 = 0, w1 = 0, wother = 0;
    for (const auto& [k, a] : amp_) {
        int l = k.get(atom);
        double p = std::norm(a);
        if (l == 0) w0 += p;
        else if (l == 1) w1 += p;
        else wother += p;
    }
    double tot = w0 + w1 + wother;
    int pick = chooser.choose("measure", {w0 / tot, w1 / tot, wother / tot});
    if (pick == 2) {
        AmplitudeMap out;
        for (const auto& [k, a] : amp_)
            if (k.get(atom) >= 2) out[k] += a;
        amp_ = std::move(out);
        renormalize();
        return MeasureOutcome::NoSignal;
    }
    collapse_to_level(atom, pick);
    return pick == 0 ? MeasureOutcome::Plus : MeasureOutcome::Minus;
}

bool Register::check_level1(int atom, BranchChooser& chooser) {
    if (status_[atom] != AtomStatus::Active && status_[atom] != AtomStatus::DrivenRydberg)
        return false;
    double w1 = 0, rest = 0;
    for (const auto& [k, a] : amp_) {
        if (k.get(atom) == 1) w1 += std::norm(a);
        else rest += std::norm(a);
    }
    double tot = w1 + rest;
    int pick = chooser.choose("check1", {rest / tot, w1 / tot});
    if (pick == 1) {
        collapse_to_level(atom, 1);
        return true;
    }
    AmplitudeMap out;
    for (const auto& [k, a] : amp_)
        if (k.get(atom) != 1) out[k] += a;
    amp_ = std::move(out);
    renormalize();
    return false;
}

bool Register::any_rydberg_population_within(int probe_atom, RydClass cls) const {
    double r = layout_->radius(cls);
    double r2 = r * r * (1.0 + 1e-9);
    for (int j = 0; j < n_atoms(); ++j) {
        if (j == probe_atom) continue;
        if (double(layout_->dist2_int(probe_atom, j)) > r2) continue;
        if (status_[j] == AtomStatus::RydbergLeaked && leak_info_[j].ryd_class == cls) return true;
        for (const auto& [k, a] : amp_) {
            int lj = k.get(j);
            if (lj >= 2 && levels_[j][lj].is_rydberg() && levels_[j][lj].ryd_class == cls)
                return true;
        }
    }
    return false;
}

bool Register::driven_rydberg_support(int atom) const {
    for (const auto& [k, a] : amp_) {
        int l = k.get(atom);
        if (l >= 2 && l < int(levels_[atom].size()) && levels_[atom][l].is_rydberg()) return true;
    }
    return false;
}

void Register::pump_rydberg_to_stretched(int atom) {
    if (status_[atom] != AtomStatus::RydbergLeaked) return;
    const HyperfineState target = leak_info_[atom].m_sign >= 0 ? species_.stretched_ground_plus
                                                               : species_.stretched_ground_minus;
    status_[atom] = AtomStatus::HyperfineLeaked;
    leak_info_[atom] = hyperfine_level(target);
}

void Register::incoherent_rydberg_pump(int atom, BranchChooser& chooser) {
    if (status_[atom] == AtomStatus::RydbergLeaked) {
        pump_rydberg_to_stretched(atom);
        return;
    }
    if (status_[atom] != AtomStatus::DrivenRydberg) return;
    // collapse the driven Rydberg component: one branch per occupied Rydberg
    // level plus the ground branch
    std::vector<int> ryd_levels;
    for (int l = 2; l < int(levels_[atom].size()); ++l)
        if (levels_[atom][l].is_rydberg()) ryd_levels.push_back(l);
    std::vector<double> wts;
    double ground = 0.0;
    std::vector<double> per_level(ryd_levels.size(), 0.0);
    for (const auto& [k, a] : amp_) {
        int l = k.get(atom);
        auto it = std::find(ryd_levels.begin(), ryd_levels.end(), l);
        if (it == ryd_levels.end()) ground += std::norm(a);
        else per_level[it - ryd_levels.begin()] += std::norm(a);
    }
    double tot = ground;
    for (double v : per_level) tot += v;
    wts.push_back(ground / tot);
    for (double v : per_level) wts.push_back(v / tot);
    int pick = chooser.choose("ryd_pump", wts);
    if (pick == 0) {
        AmplitudeMap out;
        for (const auto& [k, a] : amp_) {
            int l = k.get(atom);
            if (std::find(ryd_levels.begin(), ryd_levels.end(), l) == ryd_levels.end())
                out[k] += a;
        }
        amp_ = std::move(out);
        renormalize();
        refresh_status(atom);
        return;
    }
    int lvl = ryd_levels[pick - 1];
    collapse_to_level(atom, lvl);
    AmplitudeMap fact;
    for (const auto& [k, a] : amp_) fact[k.with(atom, 0)] += a;
    amp_ = std::move(fact);
    const AtomLevel& L = levels_[atom][lvl];
    const HyperfineState target =
        L.m_sign >= 0 ? species_.stretched_ground_plus : species_.stretched_ground_minus;
    status_[atom] = AtomStatus::HyperfineLeaked;
    leak_info_[atom] = hyperfine_level(target);
}

void Register::optical_pump(int atom, PumpScheme scheme) {
    if (status_[atom] != AtomStatus::HyperfineLeaked) return;  // no effect without a leak
    const HyperfineState f = leak_info_[atom].hf;
    int sign = sgn(f.mF.twice());
    int sink = -1;
    switch (scheme) {
        case PumpScheme::Standard:
            sink = (f == species_.stretched_ground_minus) ? 0 : 1;
            break;
        case PumpScheme::CnotPlus:
            // sigma+ cycling also carries mF=0 leakage upward into |1>
            if (sign >= 0) sink = 1;
            break;
        case PumpScheme::CnotMinus:
            if (sign < 0) sink = 0;
            break;
    }
    if (sink < 0) return;
    if (sink == 1) {
        AmplitudeMap out;
        for (const auto& [k, a] : amp_) out[k.with(atom, 1)] += a;
        amp_ = std::move(out);
    }
    status_[atom] = AtomStatus::Active;
}

void Register::optical_pump_all(PumpScheme scheme) {
    for (int i = 0; i < n_atoms(); ++i) optical_pump(i, scheme);
}

void Register::eject(int atom) {
    if (status_[atom] == AtomStatus::Lost) return;
    if (status_[atom] != AtomStatus::RydbergLeaked)
        throw std::logic_error("eject: atom is not Rydberg-leaked");
    status_[atom] = AtomStatus::Lost;
}

void Register::replace(int atom, bool as_one) {
    if (status_[atom] == AtomStatus::Active || status_[atom] == AtomStatus::DrivenRydberg)
        throw std::logic_error("replace: atom still present");
    if (as_one) {
        AmplitudeMap out;
        for (const auto& [k, a] : amp_) out[k.with(atom, 1)] += a;
        amp_ = std::move(out);
    }
    status_[atom] = AtomStatus::Active;
}

void Register::replace_plus(int atom) {
    replace(atom, false);
    hadamard(atom);
}

void Register::reset_ancilla(int atom, bool to_plus, BranchChooser& chooser) {
    if (status_[atom] == AtomStatus::Lost) replace(atom, false);  // reload from reservoir
    if (status_[atom] == AtomStatus::RydbergLeaked || status_[atom] == AtomStatus::HyperfineLeaked) {
        // pump-based reset of a leaked ancilla
        pump_rydberg_to_stretched(atom);
        optical_pump(atom, PumpScheme::Standard);
    }
    std::vector<double> wts(levels_[atom].size(), 0.0);
    for (const auto& [k, a] : amp_) wts[k.get(atom)] += std::norm(a);
    int support = 0;
    for (double v : wts)
        if (v > 1e-18) ++support;
    int lvl = 0;
    if (support > 1) {
        // a disentangled ancilla (e.g. fresh out of a measurement) resets by
        // a plain rotation; only an entangled one needs a measurement
        std::optional<std::vector<cplx>> local = factor_single_atom(atom);
        if (local) {
            AmplitudeMap out;
            out.reserve(amp_.size());
            for (const auto& [k, a] : amp_) {
                int l = k.get(atom);
                cplx c = (*local)[l];
                if (std::abs(c) < 1e-15) continue;
                out[k.with(atom, 0)] += std::conj(c) * a;
            }
            amp_ = std::move(out);
            renormalize();
            lvl = 0;
        } else {
            double tot = 0.0;
            for (double v : wts) tot += v;
            for (auto& v : wts) v /= tot;
            lvl = chooser.choose("reset", wts);
            collapse_to_level(atom, lvl);
        }
    } else {
        for (int i = 0; i < int(wts.size()); ++i)
            if (wts[i] > 1e-18) lvl = i;
    }
    if (lvl != 0) {
        AmplitudeMap out;
        for (const auto& [k, a] : amp_) out[k.with(atom, 0)] += a;
        amp_ = std::move(out);
    }
    if (to_plus) hadamard(atom);
    refresh_status(atom);
}

std::optional<std::vector<cplx>> Register::factor_single_atom(int atom) const {
    // returns the atom's local state when the register factorizes as
    // |phi>_atom (x) |rest>, else nullopt
    AmplitudeMap rest;  // reference conditional state
    std::vector<cplx> local(levels_[atom].size(), 0.0);
    // pick the heaviest level as the reference
    std::vector<double> wts(levels_[atom].size(), 0.0);
    for (const auto& [k, a] : amp_) wts[k.get(atom)] += std::norm(a);
    int ref = 0;
    for (int i = 0; i < int(wts.size()); ++i)
        if (wts[i] > wts[ref]) ref = i;
    double refnorm = std::sqrt(wts[ref]);
    if (refnorm < 1e-12) return std::nullopt;
    for (const auto& [k, a] : amp_)
        if (k.get(atom) == ref) rest[k.with(atom, 0)] = a / refnorm;
    local[ref] = refnorm;
    for (int l = 0; l < int(local.size()); ++l) {
        if (l == ref || wts[l] < 1e-18) continue;
        // conditional state for level l must be parallel to the reference
        cplx coeff = 0.0;
        for (const auto& [k, a] : amp_)
            if (k.get(atom) == l) {
                auto it = rest.find(k.with(atom, 0));
                if (it == rest.end()) return std::nullopt;
                coeff += std::conj(it->second) * a;
            }
        double resid = 0.0;
        for (const auto& [k, a] : amp_)
            if (k.get(atom) == l) {
                auto it = rest.find(k.with(atom, 0));
                cplx expect = it == rest.end() ? cplx(0.0) : coeff * it->second;
                resid += std::norm(a - expect);
            }
        if (resid > 1e-18) return std::nullopt;
        local[l] = coeff;
    }
    return local;
}

void Register::renormalize() {
    double n2 = norm2(amp_);
    if (n2 <= 0.0) throw std::runtime_error("register: state annihilated");
    scale(amp_, 1.0 / std::sqrt(n2));
    prune(amp_);
}

void Register::assert_norm(const char* where) const {
    double n = norm();
    if (std::abs(n - 1.0) > 1e-9)
        throw std::runtime_error(std::string("norm drift at ") + where + ": " +
                                 std::to_string(n));
}

cplx Register::overlap(const Register& other) const { return inner(amp_, other.amp_); }

std::string Register::dump_json() const {
    nlohmann::json j;
    j["atoms"] = nlohmann::json::array();
    for (int i = 0; i < n_atoms(); ++i) {
        nlohmann::json ja;
        switch (status_[i]) {
            case AtomStatus::Active: ja["status"] = "active"; break;
            case AtomStatus::DrivenRydberg: ja["status"] = "driven"; break;
            case AtomStatus::RydbergLeaked: ja["status"] = "ryd_leaked"; break;
            case AtomStatus::HyperfineLeaked: ja["status"] = "hf_leaked"; break;
            case AtomStatus::Lost: ja["status"] = "lost"; break;
        }
        j["atoms"].push_back(ja);
    }
    j["amplitudes"] = nlohmann::json::array();
    for (const auto& [k, a] : amp_) {
        std::string s;
        for (int i = 0; i < n_atoms(); ++i) s += std::to_string(k.get(i)) + (i + 1 < n_atoms() ? "," : "");
        j["amplitudes"].push_back({{"levels", s}, {"re", a.real()}, {"im", a.imag()}});
    }
    return j.dump(2);
}

}  // namespace rydft
