#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "rydft/codes.hpp"
#include "rydft/sim.hpp"

namespace rydft {

enum class CczGateSet { Alg3, ReducedJ };

struct ExecOptions {
    bool disable_leak_probe = false;   // negative control: skip Rydberg probes
    bool disable_optical_pump = false; // negative control: skip optical pumping
    bool disable_cnot_relay = false;   // negative control: single-control CNOT
    bool per_gate_probe = false;       // probe after every gate instead of end-of-round
    CczGateSet ccz_set = CczGateSet::ReducedJ;
    bool toffoli_direct = false;       // sqrt(13)-radius variant without relay CNOTs
};

struct GateCounts {
    int two_qubit = 0;
    int three_qubit = 0;
    int measurements = 0;

    GateCounts& operator+=(const GateCounts& o) {
        two_qubit += o.two_qubit;
        three_qubit += o.three_qubit;
        measurements += o.measurements;
        return *this;
    }
};

// One injectable window of a compiled schedule (recorded during a dry run).
struct FaultWindow {
    int id = 0;
    std::string desc;
    std::vector<int> gate_atoms;
    RydClass ryd_class = RydClass::Single;
    // fault-free support at this window, per gate atom (parallel arrays)
    std::vector<bool> has_ryd_support;
    std::vector<bool> has_qubit_support;
};

// Purpose tag for measurements (drives count-mode outcome policy and logs).
enum class MeasurePurpose { Syndrome, Probe, LossCheck, DataReadout, Reset };

struct SyndromeRecord {
    std::string label;
    int value = 0;  // +1/-1 (0 = no signal)
};

// Abstract executor: the protocol definitions below run against either the
// state-vector simulator or the counting walker.
class ProtocolContext {
public:
    explicit ProtocolContext(const Layout& layout, Species species, ExecOptions opts)
        : layout_(layout), species_(std::move(species)), opts(opts) {}
    virtual ~ProtocolContext() = default;

    const Layout& layout() const { return layout_; }
    const Species& species() const { return species_; }

private:
    const Layout& layout_;
    Species species_;

public:
    ExecOptions opts;
    GateCounts counts;
    std::vector<SyndromeRecord> syndromes;
    std::vector<std::string> corrections;
    std::vector<std::string> events;

    // multi-qubit entangling operations
    virtual void r_gate(const std::vector<int>& controls, const std::vector<int>& targets,
                        RydClass cls) = 0;
    // one "natural" bias-preserving gate: pi on each control (may be one),
    // the conditional-flip sequence on the target, -pi returns
    virtual void or_gate(const std::vector<int>& controls, int target, RydClass cls) = 0;

    // ideal hyperfine single-qubit operations (error-free)
    virtual void h(int atom) = 0;
    virtual void x(int atom) = 0;
    virtual void y(int atom) = 0;
    virtual void z(int atom) = 0;

    virtual MeasureOutcome measure(int atom, MeasureBasis basis, MeasurePurpose purpose,
                                   MeasureOutcome fault_free) = 0;
    virtual void reset(int atom, bool to_plus) = 0;

    // multi-step Rydberg-population probe (Appendix-E semantics);
    // returns true when leaked population was detected
    virtual bool probe_rydberg(int probe_atom, RydClass cls) = 0;
    // atom-loss detection circuit; returns true on (possibly repeated) +1
    virtual bool loss_check(int data_atom, int ancilla, RydClass cls, bool robust) = 0;

    // leakage conversions
    virtual void pump_leaks_to_stretched() = 0;                 // Rydberg flags -> hyperfine
    virtual void incoherent_rydberg_pump(const std::vector<int>& atoms) = 0;
    virtual void optical_pump(Register::PumpScheme scheme) = 0;
    virtual void eject_leaked() = 0;                             // Rydberg flags -> Lost
    virtual void eject_and_replace(int atom, bool as_plus) = 0;  // lost/leaked -> |1>/|+>

    // helpers the campaign needs
    virtual bool is_sim() const = 0;
    void log(const std::string& e) { events.push_back(e); }
    // declared ancilla role slot (drives the resource-table ancilla numbers)
    void reserve_ancilla(const std::string& tag) { ancilla_slots.insert(tag); }
    std::set<std::string> ancilla_slots;

    // leak context deferred to the next QEC round (Z-sector leaks leave a
    // Z-type correlated pattern that the following X-sector must decode)
    struct DeferredLeak {
        bool active = false;
        std::vector<int> gate_order;
    };
    DeferredLeak deferred_leak;
};

// --- protocol programs ------------------------------------------------------

// Ryd-7 (Steane): data blocks live on layout logicals 0..2
void ryd7_prepare_zero(ProtocolContext& ctx, int logical);
// one sector (X-type or Z-type stabilizers) incl. repeat-on-minus handling;
// returns the sector syndrome actually decided on
std::vector<int> ryd7_stabilizer_sector(ProtocolContext& ctx, int logical, char sector);
void ryd7_qec_round(ProtocolContext& ctx, int logical);
void ryd7_logical_cz(ProtocolContext& ctx, int logical_a, int logical_b);
void ryd7_logical_ccz(ProtocolContext& ctx);

// Ryd-3 (repetition): layout logicals 0..2
void ryd3_prepare_plus(ProtocolContext& ctx, int logical, int logical_value);
void ryd3_stabilizer_round(ProtocolContext& ctx, int logical);
void bias_preserving_cnot(ProtocolContext& ctx, int control, int target, int relay);
void bias_preserving_toffoli(ProtocolContext& ctx, int c1, int c2, int target,
                             const std::string& flank_left, const std::string& flank_right,
                             const std::string& substitute);
void ryd3_logical_cz(ProtocolContext& ctx, int logical_a, int logical_b);
void ryd3_logical_ccz(ProtocolContext& ctx);
void ryd3_pieceable_toffoli(ProtocolContext& ctx);
void ryd3_hadamard(ProtocolContext& ctx);

// --- simulator-backed executor ---------------------------------------------

struct FaultPlan {
    bool active = false;
    int window = -1;
    int atom = -1;
    KrausEvent event;
};

class SimContext : public ProtocolContext {
public:
    SimContext(const Layout& layout, Species species, ExecOptions opts);

    Register reg;
    RecordedChooser chooser;
    FaultPlan plan;
    bool fault_applied = false;
    bool fault_null = false;
    bool record_windows = false;
    std::vector<FaultWindow> windows;

    void r_gate(const std::vector<int>& controls, const std::vector<int>& targets,
                RydClass cls) override;
    void or_gate(const std::vector<int>& controls, int target, RydClass cls) override;
    void h(int atom) override { reg.hadamard(atom); }
    void x(int atom) override { reg.pauli_x(atom); }
    void y(int atom) override { reg.pauli_y(atom); }
    void z(int atom) override { reg.pauli_z(atom); }
    MeasureOutcome measure(int atom, MeasureBasis basis, MeasurePurpose purpose,
                           MeasureOutcome fault_free) override;
    void reset(int atom, bool to_plus) override;
    bool probe_rydberg(int probe_atom, RydClass cls) override;
    bool loss_check(int data_atom, int ancilla, RydClass cls, bool robust) override;
    void pump_leaks_to_stretched() override;
    void incoherent_rydberg_pump(const std::vector<int>& atoms) override;
    void optical_pump(Register::PumpScheme scheme) override;
    void eject_leaked() override;
    void eject_and_replace(int atom, bool as_plus) override;
    bool is_sim() const override { return true; }

    int window_counter = 0;

    void injection_window(const std::string& desc, const std::vector<int>& gate_atoms,
                          RydClass cls);
};

// Fig. and pulse-level building blocks shared by the Ryd-3 gates (exposed
// for unit tests).
void conditional_flip_sequence(SimContext& ctx, int atom, RydClass cls);

// canonical Rydberg states per class and sign used by the pulse programs
RydbergState drive_state(const Species& sp, RydClass cls, int sign, bool shelf);
RydbergState bbr_target_state(RydClass cls, int sign);

}  // namespace rydft
