#include "rydft/geometry.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "json.hpp"

namespace rydft {

using nlohmann::json;

int Layout::data_atom(int logical, int physical) const {
    for (int i = 0; i < size(); ++i) {
        const auto& a = atoms[i];
        if (a.kind == AtomAssignment::Kind::Data && a.logical == logical && a.physical == physical)
            return i;
    }
    throw std::out_of_range("layout: no data atom (" + std::to_string(logical) + "," +
                            std::to_string(physical) + ")");
}

int Layout::ancilla(const std::string& label) const {
    for (int i = 0; i < size(); ++i) {
        const auto& a = atoms[i];
        if (a.kind == AtomAssignment::Kind::Ancilla && a.label == label) return i;
    }
    throw std::out_of_range("layout: no ancilla labeled " + label);
}

std::vector<int> Layout::logical_block(int logical) const {
    std::vector<std::pair<int, int>> found;
    for (int i = 0; i < size(); ++i) {
        const auto& a = atoms[i];
        if (a.kind == AtomAssignment::Kind::Data && a.logical == logical)
            found.emplace_back(a.physical, i);
    }
    std::sort(found.begin(), found.end());
    std::vector<int> out;
    for (auto& [p, i] : found) out.push_back(i);
    return out;
}

long Layout::dist2_int(int i, int j) const {
    const auto& p = atoms.at(i).pos;
    const auto& q = atoms.at(j).pos;
    long da = p.a - q.a, db = p.b - q.b;
    if (lattice == LatticeKind::Triangular) return da * da + da * db + db * db;
    return da * da + db * db;
}

double Layout::dist(int i, int j) const { return std::sqrt(static_cast<double>(dist2_int(i, j))); }

double Layout::radius(RydClass c) const {
    switch (c) {
        case RydClass::Single: return rb;
        case RydClass::R1: return rb1;
        case RydClass::R2: return rb2;
    }
    return 0.0;
}

std::vector<std::pair<int, int>> required_pairs(const Layout& layout, const EntanglingStep& step) {
    const auto& a = step.atoms;
    if (a.size() == 2) return {{a[0], a[1]}};
    if (a.size() != 3) throw std::invalid_argument("entangling step: only 2- or 3-atom gates");
    if (!step.reassignable_roles) {
        // fixed roles: atoms = {control, control, target}; control-control link not needed
        return {{a[0], a[2]}, {a[1], a[2]}};
    }
    // diagonal gate: drop the largest of the three pair distances (the two
    // remaining atoms act as controls; the gate differs from CCZ by
    // single-qubit conjugation, which the protocol layer compensates)
    std::array<std::pair<int, int>, 3> pairs = {{{a[0], a[1]}, {a[0], a[2]}, {a[1], a[2]}}};
    int drop = 0;
    long worst = -1;
    for (int k = 0; k < 3; ++k) {
        long d2 = layout.dist2_int(pairs[k].first, pairs[k].second);
        if (d2 > worst) { worst = d2; drop = k; }
    }
    std::vector<std::pair<int, int>> out;
    for (int k = 0; k < 3; ++k)
        if (k != drop) out.push_back(pairs[k]);
    return out;
}

bool gate_feasible(const Layout& layout, const EntanglingStep& step, double radius_units_d) {
    for (auto [i, j] : required_pairs(layout, step))
        if (layout.dist(i, j) > radius_units_d * (1.0 + 1e-12)) return false;
    return true;
}

double min_blockade_radius(const Layout& layout, const std::vector<EntanglingStep>& steps) {
    long worst2 = 0;
    for (const auto& s : steps)
        for (auto [i, j] : required_pairs(layout, s)) worst2 = std::max(worst2, layout.dist2_int(i, j));
    return std::sqrt(static_cast<double>(worst2));
}

namespace {

AtomAssignment data(int logical, int physical, int a, int b) {
    AtomAssignment x;
    x.kind = AtomAssignment::Kind::Data;
    x.logical = logical;
    x.physical = physical;
    x.pos = {a, b};
    return x;
}

AtomAssignment anc(const std::string& label, int a, int b) {
    AtomAssignment x;
    x.kind = AtomAssignment::Kind::Ancilla;
    x.label = label;
    x.pos = {a, b};
    return x;
}

}  // namespace

Layout ryd7_triangular() {
    // Seven-atom hexagonal clusters (center + ring) on a coarse triangular
    // lattice with period 3d. The internal numbering reproduces the
    // distances quoted for the logical CCZ: dist(3_A,3_B)=3d,
    // dist(3_A,1_C)=sqrt(13) d, dist(3_B,1_C)=4d, and the reduced gate set
    // {3,5,6} on block C fits entirely within 3d.
    static const std::array<LatticePos, 8> motif = {{
        {0, 0},    // unused slot so index==physical
        {-1, 1},   // 1
        {0, 1},    // 2
        {0, 0},    // 3 (center)
        {1, 0},    // 4
        {1, -1},   // 5
        {0, -1},   // 6
        {-1, 0},   // 7
    }};
    static const std::array<LatticePos, 3> offsets = {{{0, 0}, {3, 0}, {0, 3}}};
    Layout l;
    l.lattice = LatticeKind::Triangular;
    l.rb = 3.0;
    for (int q = 0; q < 3; ++q)
        for (int p = 1; p <= 7; ++p)
            l.atoms.push_back(
                data(q, p, motif[p].a + offsets[q].a, motif[p].b + offsets[q].b));
    // per-block probe (A1) and syndrome (A2) ancillas, all within 3d of the
    // block's seven atoms; central probe/syndrome reach all three blocks
    static const LatticePos a1_off = {2, -2}, a2_off = {-1, 2};
    for (int q = 0; q < 3; ++q) {
        std::string suffix = std::to_string(q);
        l.atoms.push_back(anc("A1:" + suffix, a1_off.a + offsets[q].a, a1_off.b + offsets[q].b));
        l.atoms.push_back(anc("A2:" + suffix, a2_off.a + offsets[q].a, a2_off.b + offsets[q].b));
    }
    l.atoms.push_back(anc("A1:c", 1, 1));
    return l;
}

Layout ryd3_triangular() {
    Layout l;
    l.lattice = LatticeKind::Triangular;
    l.rb1 = 3.0;
    l.rb2 = 1.5;
    // block 0
    l.atoms.push_back(data(0, 1, 1, 0));
    l.atoms.push_back(data(0, 2, 0, 0));
    l.atoms.push_back(data(0, 3, 1, -1));
    // block 1
    l.atoms.push_back(data(1, 1, 1, 2));
    l.atoms.push_back(data(1, 2, 0, 2));
    l.atoms.push_back(data(1, 3, 1, 1));
    // block 2 (CCZ / Toffoli target block)
    l.atoms.push_back(data(2, 1, 3, 0));
    l.atoms.push_back(data(2, 2, 2, 0));
    l.atoms.push_back(data(2, 3, 3, -1));
    // ancilla pool around block 2: flanks of its atoms; A3 is the far one
    l.atoms.push_back(anc("A1", 2, 1));
    l.atoms.push_back(anc("A2", 2, -1));
    l.atoms.push_back(anc("A3", 4, -1));
    // stabilizer-measurement sites for blocks 0 and 1 (block 2 reuses the pool)
    l.atoms.push_back(anc("s0a", 0, 1));
    l.atoms.push_back(anc("s0b", 0, -1));
    l.atoms.push_back(anc("s1a", 0, 3));
    return l;
}

Ryd3ToffoliGeometry ryd3_toffoli_geometry(const Layout&) {
    Ryd3ToffoliGeometry g;
    g.flanks[1] = {"A3", "A1"};
    g.flanks[2] = {"A1", "A2"};
    g.flanks[3] = {"A3", "A2"};
    g.far_ancilla = "A3";
    g.substitute[1] = "A2";
    g.substitute[2] = "";
    g.substitute[3] = "A1";
    return g;
}

Layout ryd3_square() {
    Layout l;
    l.lattice = LatticeKind::Square;
    l.rb1 = std::sqrt(10.0);
    l.rb2 = 1.2;  // flank pairs sit perpendicular (mutual distance sqrt(2) > rb2)
    // diagonal three-atom blocks; block 2 nestles between blocks 0 and 1
    l.atoms.push_back(data(0, 1, 0, 0));
    l.atoms.push_back(data(0, 2, -1, -1));
    l.atoms.push_back(data(0, 3, 1, 1));
    l.atoms.push_back(data(1, 1, 2, -2));
    l.atoms.push_back(data(1, 2, 1, -3));
    l.atoms.push_back(data(1, 3, 3, -1));
    l.atoms.push_back(data(2, 1, 1, -1));
    l.atoms.push_back(data(2, 2, 0, -2));
    l.atoms.push_back(data(2, 3, 2, 0));
    // flank ancillas for block-2 targets
    l.atoms.push_back(anc("f1a", 2, -1));
    l.atoms.push_back(anc("f1b", 0, -1));
    l.atoms.push_back(anc("f2a", 1, -2));
    l.atoms.push_back(anc("f3a", 1, 0));
    return l;
}

std::string Layout::to_json() const {
    json j;
    j["lattice"] = lattice == LatticeKind::Triangular ? "triangular" : "square";
    j["spacing_d"] = spacing_d;
    j["rb"] = rb;
    j["rb1"] = rb1;
    j["rb2"] = rb2;
    j["atoms"] = json::array();
    for (const auto& a : atoms) {
        json ja;
        ja["kind"] = a.kind == AtomAssignment::Kind::Data ? "data" : "ancilla";
        if (a.kind == AtomAssignment::Kind::Data) {
            ja["logical"] = a.logical;
            ja["physical"] = a.physical;
        } else {
            ja["label"] = a.label;
        }
        ja["pos"] = {a.pos.a, a.pos.b};
        j["atoms"].push_back(ja);
    }
    return j.dump(2);
}

Layout Layout::from_json(const std::string& text) {
    json j = json::parse(text);
    Layout l;
    l.lattice = j.at("lattice") == "square" ? LatticeKind::Square : LatticeKind::Triangular;
    l.spacing_d = j.value("spacing_d", 1.0);
    l.rb = j.value("rb", 0.0);
    l.rb1 = j.value("rb1", 0.0);
    l.rb2 = j.value("rb2", 0.0);
    for (const auto& ja : j.at("atoms")) {
        AtomAssignment a;
        if (ja.at("kind") == "data") {
            a.kind = AtomAssignment::Kind::Data;
            a.logical = ja.at("logical");
            a.physical = ja.at("physical");
        } else {
            a.kind = AtomAssignment::Kind::Ancilla;
            a.label = ja.at("label");
        }
        a.pos = {ja.at("pos")[0], ja.at("pos")[1]};
        l.atoms.push_back(a);
    }
    // positions must be distinct
    for (size_t i = 0; i < l.atoms.size(); ++i)
        for (size_t k = i + 1; k < l.atoms.size(); ++k)
            if (l.atoms[i].pos == l.atoms[k].pos)
                throw std::invalid_argument("layout: duplicate atom position");
    return l;
}

TransportHeating transport_heating(double distance_m, double move_time_s, double omega0_rad_s,
                                   double mass_kg) {
    if (distance_m <= 0 || move_time_s <= 0 || omega0_rad_s <= 0 || mass_kg <= 0)
        throw std::invalid_argument("transport_heating: inputs must be positive");
    constexpr double hbar = 1.054571817e-34;
    double t4 = move_time_s * move_time_s * move_time_s * move_time_s;
    double de = 36.0 * mass_kg * distance_m * distance_m / (omega0_rad_s * omega0_rad_s * t4);
    return {de, de / (hbar * omega0_rad_s)};
}

}  // namespace rydft
