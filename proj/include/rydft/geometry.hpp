#pragma once

#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace rydft {

enum class LatticeKind { Triangular, Square };

// Integer lattice coordinates. Triangular: pos = a*e1 + b*e2 with
// e1=(1,0), e2=(1/2,sqrt(3)/2), so |v|^2 = a^2+ab+b^2 (exact).
// Square: |v|^2 = a^2+b^2.
struct LatticePos {
    int a = 0;
    int b = 0;
    friend bool operator==(const LatticePos&, const LatticePos&) = default;
};

// Rydberg state classes with distinct blockade radii.
enum class RydClass { Single, R1, R2 };

struct AtomAssignment {
    enum class Kind { Data, Ancilla };
    Kind kind = Kind::Data;
    int logical = -1;   // data: 0-based logical block
    int physical = 0;   // data: 1-based index within the code block
    std::string label;  // ancilla label
    LatticePos pos;
};

class Layout {
public:
    LatticeKind lattice = LatticeKind::Triangular;
    double spacing_d = 1.0;  // meters per lattice unit if physical; 1.0 otherwise
    std::vector<AtomAssignment> atoms;
    double rb = 0.0;   // single-species radius, units of d
    double rb1 = 0.0;  // larger radius (Ryd-3)
    double rb2 = 0.0;  // smaller radius (Ryd-3)

    int size() const { return static_cast<int>(atoms.size()); }
    int data_atom(int logical, int physical) const;
    int ancilla(const std::string& label) const;
    bool is_data(int atom) const { return atoms.at(atom).kind == AtomAssignment::Kind::Data; }
    std::vector<int> logical_block(int logical) const;  // physical order 1..n

    long dist2_int(int i, int j) const;  // exact squared distance in d^2
    double dist(int i, int j) const;     // in units of d
    double radius(RydClass c) const;

    std::string to_json() const;
    static Layout from_json(const std::string& text);
};

// A single entangling step for feasibility purposes. For symmetric phase
// gates (CZ / CCZ type) the 2pi-target role may be reassigned so that the
// largest pairwise distance is excluded (two-of-three rule); role-fixed
// gates (bias-preserving sequences) list required pairs explicitly.
struct EntanglingStep {
    std::vector<int> atoms;          // 2 or 3 atoms
    bool reassignable_roles = true;  // true for diagonal R gates
    RydClass ryd_class = RydClass::Single;
};

// Pairs of atoms whose distance must be below the blockade radius for the
// step to work, applying the two-of-three rule when roles are free.
std::vector<std::pair<int, int>> required_pairs(const Layout& layout, const EntanglingStep& step);

bool gate_feasible(const Layout& layout, const EntanglingStep& step, double radius_units_d);

// Maximum required pair distance over a schedule of entangling steps,
// i.e. the minimum blockade radius that makes every step feasible.
double min_blockade_radius(const Layout& layout, const std::vector<EntanglingStep>& steps);

// Canonical layouts.
Layout ryd7_triangular();         // three logical hexagons + ancillas
Layout ryd3_triangular();         // three logical triangles + ancilla pool
Layout ryd3_square();             // alternating data/ancilla checkerboard

// Ryd-3 triangular ancilla pool around logical block 2 (the CCZ/Toffoli
// target block): flank pairs per target label and the far ancilla "A3".
struct Ryd3ToffoliGeometry {
    // flanks[l] = ancilla labels flanking target atom l (1-based l in 1..3)
    std::array<std::pair<std::string, std::string>, 4> flanks;
    std::string far_ancilla;                    // "A3"
    std::array<std::string, 4> substitute;      // relay ancilla per target label (3d variant)
};
Ryd3ToffoliGeometry ryd3_toffoli_geometry(const Layout& layout);

// Average heating from moving a trapped atom a distance D in time T with a
// linear-in-time acceleration profile: dE = 36 m D^2 / (w0^2 T^4), and the
// corresponding vibrational quantum number increase dN = dE/(hbar w0).
struct TransportHeating {
    double delta_e_joule;
    double delta_n;
};
TransportHeating transport_heating(double distance_m, double move_time_s, double omega0_rad_s,
                                   double mass_kg);

}  // namespace rydft
