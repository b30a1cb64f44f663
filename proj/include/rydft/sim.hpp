#pragma once

#include <array>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "rydft/channels.hpp"
#include "rydft/geometry.hpp"
#include "rydft/levels.hpp"
#include "rydft/state.hpp"

namespace rydft {

enum class AtomStatus { Active, DrivenRydberg, RydbergLeaked, HyperfineLeaked, Lost };

// One entry of an atom's dynamic level table. Level ids 0 and 1 are always
// the qubit states; other levels are added as pulses reference them.
struct AtomLevel {
    enum class Kind { Hyperfine, Rydberg };
    Kind kind = Kind::Hyperfine;
    HyperfineState hf;
    RydbergState ryd;
    RydClass ryd_class = RydClass::Single;
    int m_sign = 0;  // sign of the total projection, drives pump routing

    bool is_rydberg() const { return kind == Kind::Rydberg; }
};

// Chooses which branch to take at nondeterministic points (measurements,
// projective collapses). Campaign drivers enumerate; tests script outcomes.
class BranchChooser {
public:
    virtual ~BranchChooser() = default;
    // weights sum to ~1; must return an index with weight > 0
    virtual int choose(const std::string& tag, const std::vector<double>& weights) = 0;
};

// Deterministic chooser following a decision list; appends the first viable
// branch when past the end and records what it chose (DFS exploration).
class RecordedChooser : public BranchChooser {
public:
    std::vector<int> decisions;               // prefix to replay
    std::vector<int> taken;                   // what this run actually took
    std::vector<std::vector<int>> viable;     // viable branch ids at each point
    double path_weight = 1.0;                 // product of chosen branch weights
    int choose(const std::string& tag, const std::vector<double>& weights) override;
};

enum class MeasureBasis { Z, X };
// +1/-1 eigenvalue, or NoSignal for a leaked/lost atom
enum class MeasureOutcome { Plus, Minus, NoSignal };

struct PulseOp {
    int atom = 0;
    AtomLevel from;       // must currently exist or be a qubit level
    AtomLevel to;
    double angle = M_PI;  // pi, -pi or 2pi
    bool blockade_conditioned = false;
    RydClass ryd_class = RydClass::Single;
};

class Register {
public:
    Register(const Layout& layout, Species species);

    const Layout& layout() const { return *layout_; }
    const Species& species() const { return species_; }
    int n_atoms() const { return int(status_.size()); }
    AtomStatus status(int atom) const { return status_[atom]; }
    const AtomLevel& leaked_level(int atom) const { return leak_info_[atom]; }
    const AmplitudeMap& amplitudes() const { return amp_; }

    // --- state preparation (ideal) ---
    void set_product_state(const std::vector<int>& levels);  // all atoms, level ids
    void set_qubit(int atom, cplx c0, cplx c1);              // atom must be factored/fresh
    // overwrite amplitudes of a block of atoms with a sparse pattern over {0,1}
    void set_block_amplitudes(const std::vector<int>& atoms,
                              const std::vector<std::pair<std::vector<int>, cplx>>& terms);

    // --- level bookkeeping ---
    int level_id(int atom, const AtomLevel& level);              // find or register
    int find_level(int atom, const AtomLevel& level) const;     // -1 if absent
    const std::vector<AtomLevel>& levels(int atom) const { return levels_[atom]; }

    // --- ideal single-atom hyperfine operations ---
    void apply_qubit_unitary(int atom, const std::array<cplx, 4>& u);  // row-major 2x2
    void hadamard(int atom);
    void pauli_x(int atom);
    void pauli_y(int atom);
    void pauli_z(int atom);
    void phase_s(int atom);
    // exact pi swap between two hyperfine levels (population exchange)
    void hyperfine_swap(int atom, const AtomLevel& a, const AtomLevel& b);

    // --- Rydberg pulses (blockade-conditioned, physical phases) ---
    // angle pi: |a> -> -i|b>;  -pi: |a> -> +i|b>;  2pi: -1 on the pair
    // throw_on_lost=false addresses the site regardless (empty site: no-op)
    void rydberg_pulse(int atom, const AtomLevel& ground, const AtomLevel& ryd, double angle,
                       bool throw_on_lost = true);

    // --- collective gate (pulse-composed R gate; controls get +pi/+pi) ---
    void collective_gate(const std::vector<int>& controls, const std::vector<int>& targets,
                         RydClass cls,
                         const std::function<void(int window, int pulse_atom)>& window_hook = {});
    // reference implementation: the ideal diagonal of the same gate
    void collective_gate_oneshot(const std::vector<int>& controls, const std::vector<int>& targets,
                                 RydClass cls);

    // --- faults ---
    enum class InjectResult { Applied, NullFault };
    InjectResult inject(int atom, const KrausEvent& event, BranchChooser& chooser);

    // --- measurement / collapse ---
    MeasureOutcome measure(int atom, MeasureBasis basis, BranchChooser& chooser);
    // fluorescence check "is the atom in |1>?" (true/false), leaked -> false
    bool check_level1(int atom, BranchChooser& chooser);

    // --- leakage handling ---
    bool any_rydberg_population_within(int probe_atom, RydClass cls) const;
    bool driven_rydberg_support(int atom) const;
    // leaked Rydberg flag -> hyperfine stretched-state flag (sign routed)
    void pump_rydberg_to_stretched(int atom);
    // incoherent drive: collapse driven Rydberg amplitude, then flag rewrite
    void incoherent_rydberg_pump(int atom, BranchChooser& chooser);
    enum class PumpScheme { Standard, CnotPlus, CnotMinus };
    // sweeps flagged leaks and any dynamical population parked in non-qubit
    // ground levels into the scheme's sink states
    void optical_pump(int atom, PumpScheme scheme, BranchChooser& chooser);
    void optical_pump_all(PumpScheme scheme, BranchChooser& chooser);

    void eject(int atom);  // RydbergLeaked -> Lost
    void replace(int atom, bool as_one);              // Lost -> Active |0>/|1>
    void replace_plus(int atom);                      // Lost -> Active |+>
    // ancilla -> |0> or |+>; measures first when the ancilla is undetermined
    void reset_ancilla(int atom, bool to_plus, BranchChooser& chooser);

    // --- diagnostics ---
    // atom's local state when the register factorizes across it, else nullopt
    std::optional<std::vector<cplx>> factor_single_atom(int atom) const;
    double norm() const { return std::sqrt(norm2(amp_)); }
    void renormalize();
    void assert_norm(const char* where) const;
    std::string dump_json() const;
    // squared overlap with another register's amplitudes on the same footprint
    cplx overlap(const Register& other) const;

private:
    const Layout* layout_;
    Species species_;
    AmplitudeMap amp_;
    std::vector<AtomStatus> status_;
    std::vector<AtomLevel> leak_info_;
    std::vector<std::vector<AtomLevel>> levels_;

    bool blocked_in_basis(const BasisKey& k, int atom, RydClass cls) const;
    void collapse_to_level(int atom, int level_id);
    void refresh_status(int atom);
};

AtomLevel qubit_level(const Species& sp, int which);            // 0 or 1
AtomLevel hyperfine_level(const HyperfineState& hf);
AtomLevel rydberg_level(const RydbergState& r, RydClass cls);

}  // namespace rydft
