#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rydft/halfint.hpp"

namespace rydft {

enum class Orbital { S = 0, P = 1, D = 2, F = 3 };

Orbital orbital_from_char(char c);
char orbital_char(Orbital l);

// Ground-manifold hyperfine sublevel |F, mF>.
struct HyperfineState {
    HalfInt F;
    HalfInt mF;

    friend auto operator<=>(const HyperfineState&, const HyperfineState&) = default;
    bool valid() const { return mF.abs() <= F; }
    std::string str() const { return "|F=" + F.str() + ",mF=" + mF.str() + ">"; }
};

// Rydberg fine-structure level |n L J mJ; mI> with its effective principal
// quantum number (E ~ -1/2 n_eff^2).
struct RydbergState {
    int n = 0;
    Orbital L = Orbital::S;
    HalfInt J;
    HalfInt mJ;
    HalfInt mI;
    double n_eff = 0.0;

    friend bool operator==(const RydbergState&, const RydbergState&) = default;
    bool valid() const { return n > 0 && mJ.abs() <= J && n_eff > 0.0; }
    HalfInt m_total() const { return mJ + mI; }
    std::string str() const;
};

// Alkali species with the qubit encoding used by the protocols.
struct Species {
    std::string name;
    HalfInt I;  // nuclear spin
    HyperfineState qubit0;
    HyperfineState qubit1;
    HyperfineState stretched_ground_plus;   // |F=I+1/2, mF=+(I+1/2)>
    HyperfineState stretched_ground_minus;  // |F=I+1/2, mF=-(I+1/2)>

    bool supports_bias_preserving() const { return I >= HalfInt(5); }  // I >= 5/2
};

Species rb87();
Species rb85();

// Single E1 photon selection rules between fine-structure levels.
// States with |mJ| > J have no physical sublevel and are never connected.
bool dipole_allowed(const RydbergState& a, const RydbergState& b);

// Radiative-decay branching ratios into the ground manifold.
class BranchingTable {
public:
    BranchingTable() = default;
    explicit BranchingTable(std::map<HyperfineState, double> entries);

    double ratio(const HyperfineState& f) const;
    const std::map<HyperfineState, double>& entries() const { return entries_; }
    double total() const;
    double deficit() const { return 1.0 - total(); }
    std::string to_csv() const;

private:
    std::map<HyperfineState, double> entries_;
};

BranchingTable load_branching_table(const std::string& csv_text);
BranchingTable load_branching_table_file(const std::string& path);

// Dominant Rydberg final states for blackbody-induced transitions,
// with relative weights normalized to 1 on load.
struct BBRTargetTable {
    std::vector<std::pair<RydbergState, double>> entries;
};

BBRTargetTable load_bbr_target_table(const std::string& csv_text);
BBRTargetTable load_bbr_target_table_file(const std::string& path);

// Bundled 87Rb 70S data files, resolved from (in order) an explicit dir,
// RYDFT_DATA_DIR, or the compiled-in source-tree default.
std::string data_dir(const std::string& override_dir = "");
BranchingTable rb87_70s_rd_branching(const std::string& dir = "");
BBRTargetTable rb87_70s_bbr_targets(const std::string& dir = "");

// Total BBR transition rate 4 kB T / (3 c^3 n_eff^2), SI inputs (kelvin),
// evaluated in atomic units and returned in 1/s.
double bbr_total_rate(double temperature_k, double n_eff);

// Radiative decay rate scaling Gamma ~ 1/n_eff^3 from a reference point.
double rd_rate_scaled(double rate_ref, double n_eff_ref, double n_eff);

}  // namespace rydft
