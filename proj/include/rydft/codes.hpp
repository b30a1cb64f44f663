#pragma once

#include <complex>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace rydft {

// Pauli string over n qubits as (X-mask, Z-mask) bit pairs; O(1) commutation.
struct PauliString {
    int n = 0;
    std::uint32_t xmask = 0;
    std::uint32_t zmask = 0;

    static PauliString identity(int n) { return {n, 0, 0}; }
    static PauliString single(int n, int qubit, char p);
    static PauliString from_str(const std::string& s);  // e.g. "IIIXXXX"

    bool commutes_with(const PauliString& other) const;
    PauliString operator*(const PauliString& other) const;  // phase-free product
    bool is_identity() const { return xmask == 0 && zmask == 0; }
    int weight() const;
    std::string str() const;
    friend auto operator<=>(const PauliString&, const PauliString&) = default;
};

// Syndrome: ordered +-1 list aligned to the code's generators.
struct Syndrome {
    std::vector<int> values;  // +1 / -1
    friend bool operator==(const Syndrome&, const Syndrome&) = default;
    std::string str() const;
};

struct StabilizerCode {
    int n_data = 0;
    std::vector<PauliString> generators;
    PauliString logical_x;
    PauliString logical_z;
    int distance = 0;

    // +-1 pattern a Pauli error imprints on the generators
    Syndrome syndrome_of(const PauliString& error) const;
    bool check_invariants() const;  // commutation relations
};

StabilizerCode steane_code();
StabilizerCode repetition_code();

// Logical computational-basis states as sparse bitstring expansions
// (uniform coefficients 1/sqrt(#terms)).
std::vector<std::uint32_t> steane_logical_terms(int logical_value);      // 8 terms
std::vector<std::uint32_t> repetition_logical_terms(int logical_value);  // 4 terms

// Minimal-weight single-qubit decode. X- and Z-sector lookups are
// independent for the Steane code; the repetition code has no X sector and
// refuses X-type syndromes.
struct DecodeResult {
    PauliString correction;
    bool multi_error = false;  // syndrome inconsistent with <=1 error per sector
};
DecodeResult decode(const StabilizerCode& code, const Syndrome& s);

// Correlated-error lookup for postponed leakage detection.
struct CorrelatedErrorTable {
    // context tag for reports; syndromes keyed over a stated generator subset
    std::string context;
    std::vector<int> generator_indices;        // which generators the key covers
    std::map<std::vector<int>, PauliString> entries;

    bool collision_free() const { return true; }  // keys are map-unique by construction
};

// Appendix-style table for one X-stabilizer measurement with postponed
// detection: gate order alpha..delta over the stabilizer's support; a leak
// on the k-th data atom imprints X on atoms k..delta. Keyed on the Z-sector
// generators.
CorrelatedErrorTable postponed_stabilizer_table(const StabilizerCode& code,
                                                const std::vector<int>& gate_order_qubits,
                                                bool x_sector_errors);

// Table for a CCZ group: the two re-executed gates touch `atoms_a` and
// `atoms_b` (1-based data indices) of one logical qubit; patterns are
// {I, Z_a, Z_b, Z_a Z_b}, keyed on the X-sector generators (g2, g3).
CorrelatedErrorTable ccz_group_table(const StabilizerCode& code, int atom_a, int atom_b);

PauliString decode_correlated(const CorrelatedErrorTable& table, const Syndrome& s);

std::string code_to_json(const StabilizerCode& code);
std::string table_to_json(const CorrelatedErrorTable& table);

}  // namespace rydft
