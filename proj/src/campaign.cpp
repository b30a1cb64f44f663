#include "rydft/campaign.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "json.hpp"

namespace rydft {

// ---------------------------------------------------------------------------
// registry

namespace {

std::vector<cplx> apply_diag_phase(const std::vector<cplx>& in,
                                   const std::function<double(unsigned)>& phase) {
    std::vector<cplx> out(in.size());
    for (unsigned i = 0; i < in.size(); ++i) out[i] = phase(i) * in[i];
    return out;
}

std::map<std::string, ProtocolSpec> build_registry() {
    std::map<std::string, ProtocolSpec> r;
    auto ident = [](const std::vector<cplx>& c) { return c; };

    {
        ProtocolSpec s;
        s.name = "ryd7-prep-zero";
        s.input_blocks = {};
        s.output_blocks = {0};
        s.run = [](ProtocolContext& c) { ryd7_prepare_zero(c, 0); };
        s.trailing = [](ProtocolContext& c) { ryd7_qec_round(c, 0); };
        s.ideal = [](const std::vector<cplx>&) { return std::vector<cplx>{1.0, 0.0}; };
        r[s.name] = s;
    }
    {
        ProtocolSpec s;
        s.name = "ryd7-qec-round";
        s.input_blocks = {0};
        s.output_blocks = {0};
        s.run = [](ProtocolContext& c) { ryd7_qec_round(c, 0); };
        s.trailing = [](ProtocolContext& c) { ryd7_qec_round(c, 0); };
        s.ideal = ident;
        r[s.name] = s;
    }
    {
        ProtocolSpec s;
        s.name = "ryd7-cz";
        s.input_blocks = {0, 1};
        s.output_blocks = {0, 1};
        s.run = [](ProtocolContext& c) { ryd7_logical_cz(c, 0, 1); };
        s.trailing = [](ProtocolContext& c) {
            ryd7_qec_round(c, 0);
            ryd7_qec_round(c, 1);
        };
        s.ideal = [=](const std::vector<cplx>& c) {
            return apply_diag_phase(c, [](unsigned i) { return i == 3 ? -1.0 : 1.0; });
        };
        r[s.name] = s;
    }
    {
        ProtocolSpec s;
        s.name = "ryd7-ccz";
        s.input_blocks = {0, 1, 2};
        s.output_blocks = {0, 1, 2};
        s.run = [](ProtocolContext& c) { ryd7_logical_ccz(c); };
        s.trailing = [](ProtocolContext& c) {
            for (int l = 0; l < 3; ++l) ryd7_qec_round(c, l);
        };
        s.ideal = [=](const std::vector<cplx>& c) {
            return apply_diag_phase(c, [](unsigned i) { return i == 7 ? -1.0 : 1.0; });
        };
        r[s.name] = s;
    }
    {
        ProtocolSpec s;
        s.name = "ryd3-prep-plus";
        s.ryd3 = true;
        s.input_blocks = {};
        s.output_blocks = {0};
        s.run = [](ProtocolContext& c) { ryd3_prepare_plus(c, 0, 0); };
        s.trailing = [](ProtocolContext& c) { ryd3_stabilizer_round(c, 0); };
        s.ideal = [](const std::vector<cplx>&) {
            double v = 1.0 / std::sqrt(2.0);
            return std::vector<cplx>{v, v};
        };
        s.allowed_residual = 'Z';
        r[s.name] = s;
    }
    {
        ProtocolSpec s;
        s.name = "ryd3-stab-round";
        s.ryd3 = true;
        s.input_blocks = {0};
        s.output_blocks = {0};
        s.run = [](ProtocolContext& c) { ryd3_stabilizer_round(c, 0); };
        s.trailing = [](ProtocolContext& c) { ryd3_stabilizer_round(c, 0); };
        s.ideal = ident;
        s.allowed_residual = 'Z';
        r[s.name] = s;
    }
    {
        ProtocolSpec s;
        s.name = "ryd3-cz";
        s.ryd3 = true;
        s.input_blocks = {0, 1};
        s.output_blocks = {0, 1};
        s.run = [](ProtocolContext& c) { ryd3_logical_cz(c, 0, 1); };
        s.trailing = [](ProtocolContext& c) {
            ryd3_stabilizer_round(c, 0);
            ryd3_stabilizer_round(c, 1);
        };
        s.ideal = [=](const std::vector<cplx>& c) {
            return apply_diag_phase(c, [](unsigned i) { return i == 3 ? -1.0 : 1.0; });
        };
        s.allowed_residual = 'Z';
        r[s.name] = s;
    }
    {
        ProtocolSpec s;
        s.name = "ryd3-ccz";
        s.ryd3 = true;
        s.input_blocks = {0, 1, 2};
        s.output_blocks = {0, 1, 2};
        s.run = [](ProtocolContext& c) { ryd3_logical_ccz(c); };
        s.trailing = [](ProtocolContext& c) {
            for (int l = 0; l < 3; ++l) ryd3_stabilizer_round(c, l);
        };
        s.ideal = [=](const std::vector<cplx>& c) {
            return apply_diag_phase(c, [](unsigned i) { return i == 7 ? -1.0 : 1.0; });
        };
        s.allowed_residual = 'Z';
        r[s.name] = s;
    }
    {
        ProtocolSpec s;
        s.name = "ryd3-toffoli";
        s.ryd3 = true;
        s.input_blocks = {0, 1, 2};
        s.output_blocks = {0, 1, 2};
        s.run = [](ProtocolContext& c) { ryd3_pieceable_toffoli(c); };
        s.trailing = [](ProtocolContext& c) {
            for (int l = 0; l < 3; ++l) ryd3_stabilizer_round(c, l);
        };
        s.ideal = [](const std::vector<cplx>& c) {
            std::vector<cplx> out(c.size());
            for (unsigned i = 0; i < c.size(); ++i) {
                unsigned a = (i >> 2) & 1, b = (i >> 1) & 1, t = i & 1;
                unsigned j = (a << 2) | (b << 1) | (t ^ (a & b));
                out[j] = c[i];
            }
            return out;
        };
        s.allowed_residual = 'Z';
        r[s.name] = s;
    }
    {
        ProtocolSpec s;
        s.name = "ryd3-hadamard";
        s.ryd3 = true;
        s.input_blocks = {0};
        s.output_blocks = {1};
        s.run = [](ProtocolContext& c) { ryd3_hadamard(c); };
        s.trailing = [](ProtocolContext& c) { ryd3_stabilizer_round(c, 1); };
        s.ideal = [](const std::vector<cplx>& c) {
            double v = 1.0 / std::sqrt(2.0);
            return std::vector<cplx>{v * (c[0] + c[1]), v * (c[0] - c[1])};
        };
        s.allowed_residual = 'Z';
        r[s.name] = s;
    }
    return r;
}

}  // namespace

const std::map<std::string, ProtocolSpec>& protocol_registry() {
    static const auto reg = build_registry();
    return reg;
}

Layout layout_for(const std::string& protocol, const ExecOptions& opts) {
    if (protocol.rfind("ryd7", 0) == 0) {
        Layout l = ryd7_triangular();
        if (opts.ccz_set == CczGateSet::Alg3) l.rb = std::sqrt(13.0);
        return l;
    }
    Layout l = ryd3_triangular();
    if (opts.toffoli_direct) l.rb1 = std::sqrt(13.0);
    return l;
}

Species species_for(const std::string& protocol) {
    return protocol.rfind("ryd7", 0) == 0 ? rb87() : rb85();
}

// ---------------------------------------------------------------------------
// input / ideal state construction

namespace {

std::vector<cplx> block_coeffs(const std::string& kind, int block_index) {
    if (kind == "zero") return {1.0, 0.0};
    if (kind == "plus") return {1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0)};
    // generic: fixed non-trivial superpositions, different per block
    static const std::vector<std::pair<double, cplx>> seeds = {
        {0.6, cplx(0.48, 0.64)},
        {0.8, cplx(0.36, -0.48)},
        {1.0 / std::sqrt(2.0), cplx(0.5, 0.5)},
    };
    auto [a, b] = seeds[block_index % seeds.size()];
    return {a, b};
}

std::vector<std::uint32_t> logical_terms(bool ryd3, int value) {
    return ryd3 ? repetition_logical_terms(value) : steane_logical_terms(value);
}

// writes a (possibly entangled) logical state over the listed blocks
void set_logical_state(Register& reg, const Layout& lay, bool ryd3,
                       const std::vector<int>& blocks, const std::vector<cplx>& coeffs) {
    if (blocks.empty()) return;
    int nb = int(blocks.size());
    int n_data = ryd3 ? 3 : 7;
    std::vector<int> atoms;
    for (int b : blocks)
        for (int a : lay.logical_block(b)) atoms.push_back(a);
    double term_norm = std::pow(double(logical_terms(ryd3, 0).size()), -0.5 * nb);
    std::vector<std::pair<std::vector<int>, cplx>> terms;
    for (unsigned idx = 0; idx < coeffs.size(); ++idx) {
        if (std::abs(coeffs[idx]) < 1e-15) continue;
        // bit (nb-1-k) of idx = logical value of block k
        std::vector<std::vector<std::uint32_t>> block_terms;
        for (int k = 0; k < nb; ++k) {
            int v = (idx >> (nb - 1 - k)) & 1;
            block_terms.push_back(logical_terms(ryd3, v));
        }
        std::vector<unsigned> pos(nb, 0);
        while (true) {
            std::vector<int> bits;
            for (int k = 0; k < nb; ++k) {
                std::uint32_t t = block_terms[k][pos[k]];
                for (int q = 0; q < n_data; ++q) bits.push_back((t >> q) & 1);
            }
            terms.push_back({bits, coeffs[idx] * term_norm});
            int k = nb - 1;
            while (k >= 0 && ++pos[k] == block_terms[k].size()) pos[k--] = 0;
            if (k < 0) break;
        }
    }
    reg.set_block_amplitudes(atoms, terms);
}

struct Classification {
    bool pass = false;
    std::string residual;
    std::string detail;
};

Classification classify(Register& fin, const Register& ideal, const std::vector<int>& data_atoms,
                        char allowed) {
    Classification c;
    for (int i = 0; i < fin.n_atoms(); ++i) {
        AtomStatus s = fin.status(i);
        if (s == AtomStatus::RydbergLeaked || s == AtomStatus::HyperfineLeaked ||
            s == AtomStatus::Lost || s == AtomStatus::DrivenRydberg) {
            c.detail = "atom " + std::to_string(i) + " flagged at end";
            return c;
        }
    }
    const double tol = 1e-9;
    cplx g0 = ideal.overlap(fin);
    if (std::norm(g0) >= 1.0 - tol) {
        c.pass = true;
        c.residual = "none";
        return c;
    }
    std::string paulis = allowed == 'Z' ? "Z" : "XYZ";
    for (int atom : data_atoms) {
        for (char p : paulis) {
            Register pi = ideal;
            if (p == 'X') pi.pauli_x(atom);
            if (p == 'Y') pi.pauli_y(atom);
            if (p == 'Z') pi.pauli_z(atom);
            cplx g01 = ideal.overlap(pi);
            cplx c0 = ideal.overlap(fin);
            cplx c1 = pi.overlap(fin);
            double proj;
            if (std::norm(g01) > 1.0 - 1e-12) {
                proj = std::norm(c0);
            } else {
                // projection onto span{ideal, P ideal} with Gram inverse
                double den = 1.0 - std::norm(g01);
                cplx num = std::norm(c0) + std::norm(c1) -
                           2.0 * std::real(std::conj(c0) * g01 * std::conj(c1) * 1.0);
                // careful: proj^2 = [c0* c1*] G^{-1} [c0;c1]
                cplx t = (std::norm(c0) + std::norm(c1) -
                          2.0 * std::real(c0 * std::conj(c1) * std::conj(g01)));
                (void)num;
                proj = std::real(t) / den;
            }
            if (proj >= 1.0 - tol) {
                c.pass = true;
                c.residual = std::string(1, p) + "@" + std::to_string(atom);
                return c;
            }
        }
    }
    c.detail = "residual beyond one single-qubit Pauli (|<ideal|fin>|^2=" +
               std::to_string(std::norm(g0)) + ")";
    return c;
}

}  // namespace

// ---------------------------------------------------------------------------
// fault enumeration

std::vector<FaultWindow> dry_run_windows(const CampaignConfig& cfg) {
    const auto& spec = protocol_registry().at(cfg.protocol);
    Layout lay = layout_for(cfg.protocol, cfg.exec);
    Species sp = species_for(cfg.protocol);
    SimContext ctx(lay, sp, cfg.exec);
    ctx.record_windows = true;
    std::vector<cplx> coeffs(std::size_t(1) << spec.input_blocks.size(), 0.0);
    {
        std::vector<cplx> joint = {1.0};
        for (std::size_t k = 0; k < spec.input_blocks.size(); ++k) {
            auto bc = block_coeffs(cfg.input_state, int(k));
            std::vector<cplx> next(joint.size() * 2);
            for (std::size_t i = 0; i < joint.size(); ++i) {
                next[2 * i] = joint[i] * bc[0];
                next[2 * i + 1] = joint[i] * bc[1];
            }
            joint = next;
        }
        coeffs = joint;
    }
    set_logical_state(ctx.reg, lay, spec.ryd3, spec.input_blocks, coeffs);
    spec.run(ctx);
    return ctx.windows;
}

std::vector<FaultLocation> enumerate_fault_locations(const CampaignConfig& cfg) {
    auto windows = dry_run_windows(cfg);
    Species sp = species_for(cfg.protocol);
    bool ryd3 = protocol_registry().at(cfg.protocol).ryd3;
    std::vector<FaultLocation> locs;
    auto kind_enabled = [&](const std::string& k) {
        if (cfg.fault_kinds.empty()) {
            // atom loss is heralded erasure; the repetition code has no X
            // sector, so loss sits outside its leading-order model unless
            // explicitly requested
            if (ryd3 && k == std::string("loss")) return false;
            return true;
        }
        return std::find(cfg.fault_kinds.begin(), cfg.fault_kinds.end(), k) !=
               cfg.fault_kinds.end();
    };

    for (const auto& w : windows) {
        if (!cfg.window_filter.empty() &&
            std::find(cfg.window_filter.begin(), cfg.window_filter.end(), w.id) ==
                cfg.window_filter.end())
            continue;
        for (std::size_t ai = 0; ai < w.gate_atoms.size(); ++ai) {
            int atom = w.gate_atoms[ai];
            if (!cfg.atom_filter.empty() &&
                std::find(cfg.atom_filter.begin(), cfg.atom_filter.end(), atom) ==
                    cfg.atom_filter.end())
                continue;
            auto push = [&](KrausEvent e, const char* kind) {
                if (!kind_enabled(kind)) return;
                FaultLocation l;
                l.circuit_step = w.id;
                l.atom = atom;
                l.event = e;
                l.window_desc = w.desc;
                locs.push_back(l);
            };
            if (w.has_ryd_support[ai]) {
                for (int sign : {+1, -1}) {
                    KrausEvent bbr;
                    bbr.kind = KrausEvent::Kind::JumpToRydberg;
                    bbr.ryd_target = bbr_target_state(w.ryd_class, sign);
                    bbr.leak_class = w.ryd_class;
                    bbr.amplitude = std::sqrt(cfg.channel.p_bbr);
                    push(bbr, "bbr");
                    KrausEvent rd1;
                    rd1.kind = KrausEvent::Kind::JumpToHyperfine;
                    rd1.hf_target = sign > 0 ? sp.qubit1 : sp.qubit0;
                    push(rd1, "rd-qubit");
                    KrausEvent rds;
                    rds.kind = KrausEvent::Kind::JumpToHyperfine;
                    rds.hf_target =
                        sign > 0 ? sp.stretched_ground_plus : sp.stretched_ground_minus;
                    push(rds, "rd-leak");
                }
                if (!ryd3) {
                    // bundled RD table targets beyond the stretched state
                    for (HyperfineState f :
                         {HyperfineState{HalfInt::from_int(1), HalfInt::from_int(1)},
                          HyperfineState{HalfInt::from_int(2), HalfInt::from_int(0)},
                          HyperfineState{HalfInt::from_int(1), HalfInt::from_int(0)}}) {
                        KrausEvent e;
                        e.kind = KrausEvent::Kind::JumpToHyperfine;
                        e.hf_target = f;
                        push(e, "rd-leak");
                    }
                } else {
                    for (int sign : {+1, -1}) {
                        KrausEvent e;  // decay into the open shelf transition
                        e.kind = KrausEvent::Kind::JumpToHyperfine;
                        e.hf_target = sign > 0
                                          ? HyperfineState{sp.I - HalfInt(1), HalfInt::from_int(2)}
                                          : HyperfineState{sp.I + HalfInt(1), HalfInt::from_int(-2)};
                        push(e, "rd-shelf");
                    }
                }
                if (cfg.channel.include_qubit0_decay) {
                    KrausEvent e;
                    e.kind = KrausEvent::Kind::JumpToHyperfine;
                    e.hf_target = sp.qubit0;
                    e.allow_sign_cross = true;
                    push(e, "rd-qubit0");
                }
            }
            if (w.has_qubit_support[ai]) {
                KrausEvent z;
                z.kind = KrausEvent::Kind::DephaseZ;
                push(z, "dephase");
                KrausEvent nj;
                nj.kind = KrausEvent::Kind::NoJump;
                nj.alpha = std::sqrt(1.0 - cfg.channel.p_bbr);
                nj.beta = 1.0;
                push(nj, "nojump");
                KrausEvent loss;
                loss.kind = KrausEvent::Kind::AtomLoss;
                push(loss, "loss");
            }
        }
    }
    return locs;
}

// ---------------------------------------------------------------------------
// campaign runner

namespace {

struct RunOutcome {
    bool null_fault = false;
    Classification cls;
    RecordedChooser chooser;
};

RunOutcome run_once(const CampaignConfig& cfg, const ProtocolSpec& spec, const Layout& lay,
                    const Species& sp, const FaultLocation* loc,
                    const std::vector<int>& decisions) {
    RunOutcome out;
    SimContext ctx(lay, sp, cfg.exec);
    ctx.chooser.decisions = decisions;
    // input
    std::vector<cplx> joint = {1.0};
    for (std::size_t k = 0; k < spec.input_blocks.size(); ++k) {
        auto bc = block_coeffs(cfg.input_state, int(k));
        std::vector<cplx> next(joint.size() * 2);
        for (std::size_t i = 0; i < joint.size(); ++i) {
            next[2 * i] = joint[i] * bc[0];
            next[2 * i + 1] = joint[i] * bc[1];
        }
        joint = next;
    }
    set_logical_state(ctx.reg, lay, spec.ryd3, spec.input_blocks, joint);
    if (loc) {
        ctx.plan.active = true;
        ctx.plan.window = loc->circuit_step;
        ctx.plan.atom = loc->atom;
        ctx.plan.event = loc->event;
    }
    spec.run(ctx);
    if (loc && (ctx.fault_null || !ctx.fault_applied)) {
        out.null_fault = true;
        out.chooser = ctx.chooser;
        return out;
    }
    spec.trailing(ctx);

    // ideal register: same layout, output blocks set to the ideal coefficients
    Register ideal(lay, sp);
    std::vector<cplx> out_coeffs = spec.ideal(joint);
    set_logical_state(ideal, lay, spec.ryd3, spec.output_blocks, out_coeffs);
    std::vector<int> data_atoms;
    for (int b : spec.output_blocks)
        for (int a : lay.logical_block(b)) data_atoms.push_back(a);
    out.cls = classify(ctx.reg, ideal, data_atoms, spec.allowed_residual);
    out.chooser = ctx.chooser;
    return out;
}

LocationVerdict verdict_for(const CampaignConfig& cfg, const ProtocolSpec& spec,
                            const Layout& lay, const Species& sp, const FaultLocation& loc) {
    LocationVerdict v;
    v.loc = loc;
    std::vector<std::vector<int>> stack = {{}};
    std::set<std::vector<int>> seen;
    while (!stack.empty()) {
        auto decisions = stack.back();
        stack.pop_back();
        if (seen.count(decisions)) continue;
        seen.insert(decisions);
        if (int(seen.size()) > cfg.max_branches) {
            v.pass = false;
            v.detail = "branch budget exceeded";
            break;
        }
        RunOutcome out = run_once(cfg, spec, lay, sp, &loc, decisions);
        if (out.null_fault) {
            v.skipped = true;
            return v;
        }
        ++v.branches;
        if (!out.cls.pass) {
            v.pass = false;
            v.residual = "violation";
            v.detail = out.cls.detail;
            return v;
        }
        if (v.residual.empty() || out.cls.residual != "none") v.residual = out.cls.residual;
        // queue unexplored alternatives past the given prefix
        for (std::size_t i = decisions.size(); i < out.chooser.taken.size(); ++i) {
            for (int alt : out.chooser.viable[i]) {
                if (alt == out.chooser.taken[i]) continue;
                std::vector<int> next(out.chooser.taken.begin(),
                                      out.chooser.taken.begin() + i);
                next.push_back(alt);
                stack.push_back(next);
            }
        }
    }
    return v;
}

}  // namespace

CampaignReport run_campaign(const CampaignConfig& cfg) {
    auto t0 = std::chrono::steady_clock::now();
    const auto& spec = protocol_registry().at(cfg.protocol);
    Layout lay = layout_for(cfg.protocol, cfg.exec);
    Species sp = species_for(cfg.protocol);
    auto locs = enumerate_fault_locations(cfg);

    CampaignReport rep;
    rep.protocol = cfg.protocol;
    rep.total_locations = int(locs.size());
    rep.verdicts.resize(locs.size());

    std::atomic<std::size_t> next{0};
    int workers = std::max(1, cfg.workers);
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (;;) {
                std::size_t i = next.fetch_add(1);
                if (i >= locs.size()) return;
                rep.verdicts[i] = verdict_for(cfg, spec, lay, sp, locs[i]);
            }
        });
    for (auto& t : pool) t.join();

    for (const auto& v : rep.verdicts) {
        if (v.skipped) ++rep.skipped;
        else if (v.pass) {
            ++rep.passed;
            ++rep.residual_histogram[v.residual.empty() ? "none" : v.residual];
        } else {
            ++rep.failed;
            ++rep.residual_histogram["violation"];
        }
    }
    rep.runtime_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!cfg.out_jsonl.empty()) {
        std::ofstream f(cfg.out_jsonl);
        f << rep.verdicts_jsonl();
    }
    if (!cfg.out_summary.empty()) {
        std::ofstream f(cfg.out_summary);
        f << rep.summary_json();
    }
    return rep;
}

std::string CampaignReport::summary_json() const {
    nlohmann::json j;
    j["protocol"] = protocol;
    j["total_locations"] = total_locations;
    j["passed"] = passed;
    j["failed"] = failed;
    j["skipped"] = skipped;
    j["residual_histogram"] = residual_histogram;
    j["runtime_seconds"] = runtime_seconds;
    return j.dump(2);
}

std::string CampaignReport::verdicts_jsonl() const {
    std::ostringstream os;
    for (const auto& v : verdicts) {
        nlohmann::json j;
        j["window"] = v.loc.circuit_step;
        j["atom"] = v.loc.atom;
        j["event"] = v.loc.event.str();
        j["where"] = v.loc.window_desc;
        j["branches"] = v.branches;
        j["verdict"] = v.skipped ? "skip" : (v.pass ? "pass" : "fail");
        j["residual"] = v.residual;
        if (!v.detail.empty()) j["detail"] = v.detail;
        os << j.dump() << "\n";
    }
    return os.str();
}

std::string CampaignReport::verdicts_csv() const {
    std::ostringstream os;
    os << "window,atom,event,verdict,branches,residual\n";
    for (const auto& v : verdicts)
        os << v.loc.circuit_step << "," << v.loc.atom << "," << v.loc.event.str() << ","
           << (v.skipped ? "skip" : (v.pass ? "pass" : "fail")) << "," << v.branches << ","
           << v.residual << "\n";
    return os.str();
}

// ---------------------------------------------------------------------------
// bias campaign over the physical CNOT / Toffoli

namespace {

struct BiasGate {
    std::function<void(ProtocolContext&)> run;
    std::vector<int> controls;
    int target;
    std::vector<int> all_atoms;
    std::function<int(const std::vector<int>&)> ideal_flip;  // target bit out
};

std::vector<BiasGate> bias_gates(const std::string& which, const Layout& lay) {
    std::vector<BiasGate> gates;
    if (which == "cnot") {
        auto block = lay.logical_block(0);
        // collinear control-target-relay triple from the stabilizer geometry
        int target = block[0];
        int control = -1, relay = -1;
        for (int i = 0; i < lay.size(); ++i) {
            if (lay.atoms[i].kind != AtomAssignment::Kind::Ancilla) continue;
            if (lay.dist2_int(i, target) != 1) continue;
            LatticePos want{2 * lay.atoms[target].pos.a - lay.atoms[i].pos.a,
                            2 * lay.atoms[target].pos.b - lay.atoms[i].pos.b};
            for (int k = 0; k < lay.size(); ++k)
                if (k != i && lay.atoms[k].kind == AtomAssignment::Kind::Ancilla &&
                    lay.atoms[k].pos == want) {
                    control = i;
                    relay = k;
                }
            if (control >= 0) break;
        }
        if (control < 0) throw std::runtime_error("bias campaign: no collinear triple");
        BiasGate g;
        g.controls = {control};
        g.target = target;
        g.all_atoms = {control, target, relay};
        g.run = [control, target, relay](ProtocolContext& c) {
            bias_preserving_cnot(c, control, target, relay);
        };
        g.ideal_flip = [](const std::vector<int>& in) { return in[1] ^ in[0]; };
        gates.push_back(g);
        return gates;
    }
    // toffoli: one direct physical gate and one relay-substituted gate
    auto geo = ryd3_toffoli_geometry(lay);
    auto blocks0 = lay.logical_block(0);
    auto blocks1 = lay.logical_block(1);
    auto blocks2 = lay.logical_block(2);
    struct Pick { int j, k; };
    for (Pick p : {Pick{2, 1}, Pick{1, 2}}) {
        int c1 = blocks0[p.j - 1], c2 = blocks1[p.k - 1], t = blocks2[p.j - 1];
        auto [fl, fr] = geo.flanks[p.j];
        bool problem = (p.k == 2) && (p.j == 1 || p.j == 3);
        std::string left = fl, right = fr, sub;
        if (problem) {
            left = fr;
            right = geo.far_ancilla;
            sub = geo.substitute[p.j];
        } else if (fl == geo.far_ancilla) {
            left = fr;
            right = fl;
        }
        BiasGate g;
        g.controls = {c1, c2};
        g.target = t;
        g.all_atoms = {c1, c2, t};
        std::string L = left, R = right, S = sub;
        g.run = [c1, c2, t, L, R, S](ProtocolContext& c) {
            bias_preserving_toffoli(c, c1, c2, t, L, R, S);
        };
        g.ideal_flip = [](const std::vector<int>& in) { return in[2] ^ (in[0] & in[1]); };
        gates.push_back(g);
    }
    return gates;
}

}  // namespace

BiasReport run_bias_campaign(const std::string& which, const CampaignConfig& cfg, double tol) {
    Layout lay = ryd3_triangular();
    Species sp = rb85();
    BiasReport rep;
    auto gates = bias_gates(which, lay);

    for (std::size_t gi = 0; gi < gates.size(); ++gi) {
        const auto& g = gates[gi];
        // dry run to enumerate windows
        SimContext dry(lay, sp, cfg.exec);
        dry.record_windows = true;
        for (std::size_t i = 0; i < g.controls.size(); ++i) dry.reg.set_qubit(g.controls[i], 0, 1);
        dry.reg.set_qubit(g.target, 1, 0);
        g.run(dry);
        std::vector<FaultLocation> locs;
        CampaignConfig sub = cfg;
        sub.protocol = "";
        for (const auto& w : dry.windows) {
            for (std::size_t ai = 0; ai < w.gate_atoms.size(); ++ai) {
                int atom = w.gate_atoms[ai];
                auto add = [&](KrausEvent e) {
                    FaultLocation l;
                    l.circuit_step = w.id;
                    l.atom = atom;
                    l.event = e;
                    l.window_desc = w.desc;
                    locs.push_back(l);
                };
                for (int sign : {+1, -1}) {
                    KrausEvent bbr;
                    bbr.kind = KrausEvent::Kind::JumpToRydberg;
                    bbr.ryd_target = bbr_target_state(w.ryd_class, sign);
                    bbr.leak_class = w.ryd_class;
                    add(bbr);
                    KrausEvent rd1;
                    rd1.kind = KrausEvent::Kind::JumpToHyperfine;
                    rd1.hf_target = sign > 0 ? sp.qubit1 : sp.qubit0;
                    add(rd1);
                    KrausEvent rds;
                    rds.kind = KrausEvent::Kind::JumpToHyperfine;
                    rds.hf_target = sign > 0 ? sp.stretched_ground_plus : sp.stretched_ground_minus;
                    add(rds);
                    KrausEvent rsh;
                    rsh.kind = KrausEvent::Kind::JumpToHyperfine;
                    rsh.hf_target = sign > 0
                                        ? HyperfineState{sp.I - HalfInt(1), HalfInt::from_int(2)}
                                        : HyperfineState{sp.I + HalfInt(1), HalfInt::from_int(-2)};
                    add(rsh);
                }
                KrausEvent z;
                z.kind = KrausEvent::Kind::DephaseZ;
                add(z);
                KrausEvent nj;
                nj.kind = KrausEvent::Kind::NoJump;
                nj.alpha = 0.95;
                add(nj);
            }
        }
        rep.total_locations += int(locs.size());

        int nin = int(g.controls.size()) + 1;
        for (const auto& loc : locs) {
            bool any_applied = false;
            bool ok = true;
            std::string why;
            for (int input = 0; input < (1 << nin) && ok; ++input) {
                std::vector<int> bits(nin);
                for (int b = 0; b < nin; ++b) bits[b] = (input >> (nin - 1 - b)) & 1;
                std::vector<std::vector<int>> stack = {{}};
                std::set<std::vector<int>> seen;
                while (!stack.empty() && ok) {
                    auto dec = stack.back();
                    stack.pop_back();
                    if (!seen.insert(dec).second) continue;
                    SimContext ctx(lay, sp, cfg.exec);
                    ctx.chooser.decisions = dec;
                    for (std::size_t i = 0; i < g.controls.size(); ++i)
                        ctx.reg.set_qubit(g.controls[i], bits[i] ? 0.0 : 1.0,
                                          bits[i] ? 1.0 : 0.0);
                    ctx.reg.set_qubit(g.target, bits[nin - 1] ? 0.0 : 1.0,
                                      bits[nin - 1] ? 1.0 : 0.0);
                    ctx.plan.active = true;
                    ctx.plan.window = loc.circuit_step;
                    ctx.plan.atom = loc.atom;
                    ctx.plan.event = loc.event;
                    g.run(ctx);
                    if (ctx.fault_null || !ctx.fault_applied) continue;
                    any_applied = true;
                    int want = g.ideal_flip(bits);
                    // bias violation = amplitude at the wrong qubit level;
                    // heralded leakage/loss is erasure, not an X/Y component
                    double wrong = 0.0;
                    if (ctx.reg.status(g.target) == AtomStatus::Active)
                        for (const auto& [k, a] : ctx.reg.amplitudes()) {
                            int l = k.get(g.target);
                            if (l <= 1 && l != want) wrong += std::norm(a);
                        }
                    rep.worst_flip_weight = std::max(rep.worst_flip_weight, wrong);
                    if (wrong > tol) {
                        ok = false;
                        why = "flip weight " + std::to_string(wrong) + " on input " +
                              std::to_string(input) + " at " + loc.str();
                    }
                    for (std::size_t i = dec.size(); i < ctx.chooser.taken.size(); ++i)
                        for (int alt : ctx.chooser.viable[i])
                            if (alt != ctx.chooser.taken[i]) {
                                std::vector<int> next(ctx.chooser.taken.begin(),
                                                      ctx.chooser.taken.begin() + i);
                                next.push_back(alt);
                                stack.push_back(next);
                            }
                }
            }
            if (!any_applied) ++rep.skipped;
            else if (ok) ++rep.passed;
            else {
                ++rep.failed;
                rep.failures.push_back(why);
            }
        }
    }
    return rep;
}

// ---------------------------------------------------------------------------
// postponement equivalence

EquivalenceReport run_postponement_equivalence(const CampaignConfig& base) {
    EquivalenceReport rep;
    CampaignConfig cfg = base;
    cfg.protocol = "ryd7-qec-round";

    CampaignConfig end_cfg = cfg;
    end_cfg.exec.per_gate_probe = false;
    CampaignConfig per_cfg = cfg;
    per_cfg.exec.per_gate_probe = true;

    auto wins_end = dry_run_windows(end_cfg);
    auto wins_per = dry_run_windows(per_cfg);
    // match the k-th entangling-gate window across the two schedules
    std::vector<int> end_ids, per_ids;
    for (const auto& w : wins_end)
        if (w.desc == "rgate") end_ids.push_back(w.id);
    for (const auto& w : wins_per)
        if (w.desc == "rgate") per_ids.push_back(w.id);
    std::size_t n = std::min(end_ids.size(), per_ids.size());

    const auto& spec = protocol_registry().at(cfg.protocol);
    Layout lay = layout_for(cfg.protocol, cfg.exec);
    Species sp = species_for(cfg.protocol);

    Species spp = sp;
    std::vector<KrausEvent> events;
    {
        KrausEvent bbr;
        bbr.kind = KrausEvent::Kind::JumpToRydberg;
        bbr.ryd_target = bbr_target_state(RydClass::Single, +1);
        events.push_back(bbr);
        KrausEvent rd;
        rd.kind = KrausEvent::Kind::JumpToHyperfine;
        rd.hf_target = spp.stretched_ground_plus;
        events.push_back(rd);
        KrausEvent z;
        z.kind = KrausEvent::Kind::DephaseZ;
        events.push_back(z);
    }

    auto collect = [&](const CampaignConfig& c, const FaultLocation& loc) {
        std::vector<std::pair<double, Register>> finals;
        std::vector<std::vector<int>> stack = {{}};
        std::set<std::vector<int>> seen;
        bool nullf = false;
        while (!stack.empty()) {
            auto dec = stack.back();
            stack.pop_back();
            if (!seen.insert(dec).second) continue;
            RunOutcome out = run_once(c, spec, lay, sp, &loc, dec);
            if (out.null_fault) {
                nullf = true;
                break;
            }
            // re-run inline to capture the final register
            SimContext ctx(lay, sp, c.exec);
            ctx.chooser.decisions = dec;
            std::vector<cplx> joint = {1.0};
            for (std::size_t k = 0; k < spec.input_blocks.size(); ++k) {
                auto bc = block_coeffs(c.input_state, int(k));
                std::vector<cplx> next(joint.size() * 2);
                for (std::size_t i = 0; i < joint.size(); ++i) {
                    next[2 * i] = joint[i] * bc[0];
                    next[2 * i + 1] = joint[i] * bc[1];
                }
                joint = next;
            }
            set_logical_state(ctx.reg, lay, spec.ryd3, spec.input_blocks, joint);
            ctx.plan.active = true;
            ctx.plan.window = loc.circuit_step;
            ctx.plan.atom = loc.atom;
            ctx.plan.event = loc.event;
            spec.run(ctx);
            spec.trailing(ctx);
            finals.emplace_back(ctx.chooser.path_weight, ctx.reg);
            for (std::size_t i = dec.size(); i < out.chooser.taken.size(); ++i)
                for (int alt : out.chooser.viable[i])
                    if (alt != out.chooser.taken[i]) {
                        std::vector<int> next(out.chooser.taken.begin(),
                                              out.chooser.taken.begin() + i);
                        next.push_back(alt);
                        stack.push_back(next);
                    }
        }
        std::sort(finals.begin(), finals.end(),
                  [](const auto& a, const auto& b) { return a.first > b.first; });
        return std::make_pair(nullf, finals);
    };

    for (std::size_t k = 0; k < n; ++k) {
        auto wend = wins_end[end_ids[k] < int(wins_end.size()) ? end_ids[k] : 0];
        for (const auto& w : wins_end)
            if (w.id == end_ids[k]) wend = w;
        for (int atom : wend.gate_atoms) {
            for (const auto& ev : events) {
                FaultLocation le, lp;
                le.circuit_step = end_ids[k];
                le.atom = atom;
                le.event = ev;
                lp.circuit_step = per_ids[k];
                lp.atom = atom;
                lp.event = ev;
                auto [n1, fe] = collect(end_cfg, le);
                auto [n2, fp] = collect(per_cfg, lp);
                if (n1 && n2) continue;
                ++rep.compared;
                bool ok = !n1 && !n2 && fe.size() == fp.size();
                if (ok) {
                    for (std::size_t b = 0; b < fe.size(); ++b) {
                        double ov = std::abs(fe[b].second.overlap(fp[b].second));
                        if (std::abs(fe[b].first - fp[b].first) > 1e-6 || ov < 1.0 - 1e-9) {
                            ok = false;
                            break;
                        }
                    }
                }
                if (!ok) {
                    ++rep.mismatches;
                    rep.details.push_back("gate " + std::to_string(k) + " atom " +
                                          std::to_string(atom) + " event " + ev.str());
                }
            }
        }
    }
    return rep;
}

// ---------------------------------------------------------------------------
// config parsing (flat key=value lines)

CampaignConfig parse_campaign_config(const std::string& text) {
    CampaignConfig cfg;
    std::istringstream in(text);
    std::string line;
    auto as_bool = [](const std::string& v) { return v == "1" || v == "true" || v == "yes"; };
    while (std::getline(in, line)) {
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        auto trim = [](std::string s) {
            s.erase(0, s.find_first_not_of(" \t"));
            auto e = s.find_last_not_of(" \t\r");
            if (e != std::string::npos) s.erase(e + 1);
            return s;
        };
        std::string key = trim(line.substr(0, eq));
        std::string val = trim(line.substr(eq + 1));
        if (key == "protocol") cfg.protocol = val;
        else if (key == "input_state") cfg.input_state = val;
        else if (key == "p_bbr") cfg.channel.p_bbr = std::stod(val);
        else if (key == "gamma") cfg.channel.gamma = std::stod(val);
        else if (key == "t_pi") cfg.channel.t_pi = std::stod(val);
        else if (key == "p_scatter") cfg.channel.p_scatter = std::stod(val);
        else if (key == "include_qubit0_decay") cfg.channel.include_qubit0_decay = as_bool(val);
        else if (key == "disable_leak_probe") cfg.exec.disable_leak_probe = as_bool(val);
        else if (key == "disable_optical_pump") cfg.exec.disable_optical_pump = as_bool(val);
        else if (key == "disable_cnot_relay") cfg.exec.disable_cnot_relay = as_bool(val);
        else if (key == "per_gate_probe") cfg.exec.per_gate_probe = as_bool(val);
        else if (key == "ccz_set")
            cfg.exec.ccz_set = val == "alg3" ? CczGateSet::Alg3 : CczGateSet::ReducedJ;
        else if (key == "toffoli_direct") cfg.exec.toffoli_direct = as_bool(val);
        else if (key == "workers") cfg.workers = std::stoi(val);
        else if (key == "out_jsonl") cfg.out_jsonl = val;
        else if (key == "out_summary") cfg.out_summary = val;
        else if (key == "fault_kinds") {
            std::istringstream fs(val);
            std::string k;
            while (std::getline(fs, k, ',')) cfg.fault_kinds.push_back(k);
        } else if (key == "max_branches") cfg.max_branches = std::stoi(val);
        else if (key == "species_I") {
            // species constraint check for bias protocols
            if (std::stod(val) < 2.5)
                throw std::invalid_argument(
                    "config: bias-preserving protocols require nuclear spin I >= 5/2");
        } else {
            throw std::invalid_argument("config: unknown key '" + key + "'");
        }
    }
    if (cfg.protocol.empty()) throw std::invalid_argument("config: missing protocol");
    return cfg;
}

CampaignConfig load_campaign_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return parse_campaign_config(os.str());
}

}  // namespace rydft
