#pragma once

#include <complex>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "rydft/geometry.hpp"
#include "rydft/levels.hpp"

namespace rydft {

using cplx = std::complex<double>;

// One Kraus branch of a single-atom error channel. Jump events are rank-one
// (|target><source|); NoJump carries the amplitude tilt of the no-jump
// evolution (alpha on |1>, beta on |0>, identity on every other level).
struct KrausEvent {
    enum class Kind { NoJump, JumpToRydberg, JumpToHyperfine, DephaseZ, AtomLoss };
    Kind kind = Kind::NoJump;
    cplx amplitude = 1.0;        // overall weight of the branch
    double alpha = 1.0;          // NoJump |1><1| coefficient
    double beta = 1.0;           // NoJump |0><0| coefficient
    double r_coeff = 1.0;        // NoJump |r><r| coefficient
    RydbergState ryd_target;     // JumpToRydberg
    RydClass leak_class = RydClass::Single;  // blockade class of the leak target
    HyperfineState hf_target;    // JumpToHyperfine
    // jumps respect the m-sign partition of their source level unless this
    // is set (used for the higher-order |0><1| channel behind its flag)
    bool allow_sign_cross = false;

    std::string str() const;
};

struct ErrorChannel {
    std::vector<KrausEvent> events;
    double total_jump_probability = 0.0;

    // Sum_k M_k^dag M_k deviation from identity, evaluated on the channel's
    // level set {|0>,|1>,|r>} plus all jump targets. Zero for a CPTP map.
    double completeness_defect() const;
};

// BBR channel: one Rydberg jump per target state with weight sqrt(P*w_i),
// no-jump tilt solved so the completeness relation holds exactly.
ErrorChannel bbr_channel(double jump_probability, const BBRTargetTable& targets);

struct RdChannelOptions {
    bool include_qubit0_decay = false;  // |0><1| channel, ~1e-3 branching
    double intermediate_scatter_probability = 0.0;
};

// Radiative-decay channel for a 2pi Rydberg pulse: the decay-to-|1> block
// with p1 = 3 gamma t_pi / 4 and p2 = gamma t_pi / 8, plus one hyperfine
// leak branch per branching-table row. gamma_total is the full RD rate;
// the branching table splits it over final states.
ErrorChannel rd_channel(double gamma_total, double t_pi, const BranchingTable& branching,
                        const RdChannelOptions& opts = {});

// Kraus constants for the decay-to-|1> block.
struct RdPulseConstants {
    double p1;  // weight of the |r><1| branch (before the 1-p2 factor)
    double p2;  // weight of each dephasing projector branch
};
// 2pi pulse: closed form. pi pulse: derived from the same time-averaged
// jump integrals (final-state overlaps sin^2/cos^2 over the pulse).
RdPulseConstants rd_pulse_constants(double gamma, double t_pi, double pulse_angle);

// Intermediate-state scattering: an RD-type channel restricted to decay
// into |1> and the two hyperfine states reachable from the sigma+ ladder.
ErrorChannel intermediate_scattering_channel(double probability, const Species& species);

// A Kraus event pinned to a circuit location.
struct FaultLocation {
    int circuit_step = 0;   // injection-window index in the compiled schedule
    int atom = 0;
    KrausEvent event;
    double time_fraction = 0.5;
    std::string window_desc;

    std::string str() const;
};

// --- Correlated-error derivation for the collective gate -----------------

// Descriptor of a pi-2pi-pi collective gate (controls then targets).
struct CollectiveGateDescriptor {
    int n_controls = 1;
    int n_targets = 1;
};

enum class CorrelatedFactorKind { PauliZ, RydbergLeak, BlockedPhase };
struct CorrelatedFactor {
    int atom;  // index within the gate: controls first, then targets
    CorrelatedFactorKind kind;
};

// For a jump fault at pulse-window `window` (0-based over the gate's pulse
// ordering: control pis, target 2pis split in half, control return pis),
// the error factors induced on the *other* atoms of the gate, derived by
// propagating basis states through the remaining pulse schedule.
std::vector<CorrelatedFactor> correlated_error_terms(const CollectiveGateDescriptor& gate,
                                                     int fault_atom, int window);
int collective_gate_window_count(const CollectiveGateDescriptor& gate);

}  // namespace rydft
