#include "rydft/codes.hpp"

#include <bit>
#include <stdexcept>

#include "json.hpp"

namespace rydft {

PauliString PauliString::single(int n, int qubit, char p) {
    PauliString s{n, 0, 0};
    std::uint32_t bit = 1u << qubit;
    if (p == 'X' || p == 'Y') s.xmask |= bit;
    if (p == 'Z' || p == 'Y') s.zmask |= bit;
    return s;
}

PauliString PauliString::from_str(const std::string& text) {
    PauliString s{int(text.size()), 0, 0};
    for (int i = 0; i < s.n; ++i) {
        char c = text[i];
        std::uint32_t bit = 1u << i;
        if (c == 'X' || c == 'Y') s.xmask |= bit;
        if (c == 'Z' || c == 'Y') s.zmask |= bit;
        if (c != 'I' && c != 'X' && c != 'Y' && c != 'Z')
            throw std::invalid_argument("pauli string: bad character");
    }
    return s;
}

bool PauliString::commutes_with(const PauliString& o) const {
    int anti = std::popcount(xmask & o.zmask) + std::popcount(zmask & o.xmask);
    return anti % 2 == 0;
}

PauliString PauliString::operator*(const PauliString& o) const {
    return {n, xmask ^ o.xmask, zmask ^ o.zmask};
}

int PauliString::weight() const { return std::popcount(xmask | zmask); }

std::string PauliString::str() const {
    std::string s;
    for (int i = 0; i < n; ++i) {
        bool x = xmask & (1u << i), z = zmask & (1u << i);
        s += x && z ? 'Y' : (x ? 'X' : (z ? 'Z' : 'I'));
    }
    return s;
}

std::string Syndrome::str() const {
    std::string s;
    for (int v : values) s += v > 0 ? '+' : '-';
    return s;
}

Syndrome StabilizerCode::syndrome_of(const PauliString& error) const {
    Syndrome s;
    for (const auto& g : generators) s.values.push_back(g.commutes_with(error) ? 1 : -1);
    return s;
}

bool StabilizerCode::check_invariants() const {
    for (std::size_t i = 0; i < generators.size(); ++i)
        for (std::size_t j = i + 1; j < generators.size(); ++j)
            if (!generators[i].commutes_with(generators[j])) return false;
    for (const auto& g : generators)
        if (!logical_x.commutes_with(g) || !logical_z.commutes_with(g)) return false;
    return !logical_x.commutes_with(logical_z);
}

StabilizerCode steane_code() {
    StabilizerCode c;
    c.n_data = 7;
    c.distance = 3;
    c.generators = {
        PauliString::from_str("IIIXXXX"), PauliString::from_str("IXXIIXX"),
        PauliString::from_str("XIXIXIX"), PauliString::from_str("IIIZZZZ"),
        PauliString::from_str("IZZIIZZ"), PauliString::from_str("ZIZIZIZ"),
    };
    c.logical_x = PauliString::from_str("XXXXXXX");
    c.logical_z = PauliString::from_str("ZZZZZZZ");
    return c;
}

StabilizerCode repetition_code() {
    StabilizerCode c;
    c.n_data = 3;
    c.distance = 3;  // distance 3 against Z errors; no X protection
    c.generators = {PauliString::from_str("XXI"), PauliString::from_str("IXX")};
    c.logical_x = PauliString::from_str("XII");
    c.logical_z = PauliString::from_str("ZZZ");
    return c;
}

std::vector<std::uint32_t> steane_logical_terms(int logical_value) {
    // span of the X-type generators applied to |0000000> (or X_L of it)
    auto c = steane_code();
    std::vector<std::uint32_t> terms;
    for (int a = 0; a < 8; ++a) {
        std::uint32_t bits = 0;
        if (a & 1) bits ^= c.generators[0].xmask;
        if (a & 2) bits ^= c.generators[1].xmask;
        if (a & 4) bits ^= c.generators[2].xmask;
        if (logical_value) bits ^= c.logical_x.xmask;
        terms.push_back(bits);
    }
    return terms;
}

std::vector<std::uint32_t> repetition_logical_terms(int logical_value) {
    // |0>_L: even-weight bitstrings; |1>_L: odd-weight
    std::vector<std::uint32_t> terms;
    for (std::uint32_t b = 0; b < 8; ++b)
        if (std::popcount(b) % 2 == (logical_value ? 1 : 0)) terms.push_back(b);
    return terms;
}

DecodeResult decode(const StabilizerCode& code, const Syndrome& s) {
    if (int(s.values.size()) != int(code.generators.size()))
        throw std::invalid_argument("decode: syndrome length mismatch");
    DecodeResult r;
    r.correction = PauliString::identity(code.n_data);
    if (code.n_data == 7) {
        // X-sector generators (indices 0..2) detect Z errors, Z-sector X errors
        auto sector = [&](int base, char pauli) {
            int idx = 0;
            for (int b = 0; b < 3; ++b)
                if (s.values[base + b] < 0) idx |= 1 << b;
            if (idx == 0) return;
            // qubit whose generator column matches the syndrome bits
            for (int q = 0; q < 7; ++q) {
                int col = 0;
                for (int b = 0; b < 3; ++b) {
                    const auto& g = code.generators[base + b];
                    std::uint32_t mask = base == 0 ? g.xmask : g.zmask;
                    if (mask & (1u << q)) col |= 1 << b;
                }
                if (col == idx) {
                    r.correction = r.correction * PauliString::single(7, q, pauli);
                    return;
                }
            }
            r.multi_error = true;
        };
        sector(0, 'Z');  // X-type stabilizers flag Z errors
        sector(3, 'X');
        return r;
    }
    if (code.n_data == 3) {
        int g1 = s.values[0], g2 = s.values[1];
        if (g1 > 0 && g2 > 0) return r;
        int q = g1 < 0 ? (g2 < 0 ? 1 : 0) : 2;
        r.correction = PauliString::single(3, q, 'Z');
        return r;
    }
    throw std::invalid_argument("decode: unsupported code");
}

CorrelatedErrorTable postponed_stabilizer_table(const StabilizerCode& code,
                                                const std::vector<int>& order,
                                                bool x_sector_errors) {
    if (order.size() != 4) throw std::invalid_argument("postponed table: need 4 data atoms");
    CorrelatedErrorTable t;
    t.context = "postponed-stabilizer";
    // leaked data atom k imprints errors on atoms k..delta; syndromes read in
    // the opposite sector
    int base = x_sector_errors ? 3 : 0;  // X errors read Z-type generators
    t.generator_indices = {base, base + 1, base + 2};
    auto add = [&](const PauliString& err) {
        Syndrome full = code.syndrome_of(err);
        std::vector<int> key = {full.values[base], full.values[base + 1], full.values[base + 2]};
        if (t.entries.count(key) && !(t.entries[key] == err))
            throw std::logic_error("postponed table: syndrome collision");
        t.entries[key] = err;
    };
    char p = x_sector_errors ? 'X' : 'Z';
    for (int k = 1; k < 4; ++k) {  // leak on beta, gamma or delta
        PauliString err = PauliString::identity(code.n_data);
        for (std::size_t j = k; j < order.size(); ++j)
            err = err * PauliString::single(code.n_data, order[j], p);
        add(err);
    }
    add(PauliString::identity(code.n_data));  // ancilla leak: no data error
    return t;
}

CorrelatedErrorTable ccz_group_table(const StabilizerCode& code, int atom_a, int atom_b) {
    CorrelatedErrorTable t;
    t.context = "ccz-group";
    t.generator_indices = {1, 2};  // g2, g3
    auto add = [&](const PauliString& err) {
        Syndrome full = code.syndrome_of(err);
        std::vector<int> key = {full.values[1], full.values[2]};
        if (t.entries.count(key) && !(t.entries[key] == err))
            throw std::logic_error("ccz group table: syndrome collision");
        t.entries[key] = err;
    };
    PauliString za = PauliString::single(code.n_data, atom_a - 1, 'Z');
    PauliString zb = PauliString::single(code.n_data, atom_b - 1, 'Z');
    add(PauliString::identity(code.n_data));
    add(za);
    add(zb);
    add(za * zb);
    return t;
}

PauliString decode_correlated(const CorrelatedErrorTable& table, const Syndrome& s) {
    std::vector<int> key;
    for (int gi : table.generator_indices) key.push_back(s.values.at(gi));
    auto it = table.entries.find(key);
    if (it == table.entries.end())
        throw std::runtime_error("decode_correlated: unexpected syndrome " + s.str() +
                                 " in context " + table.context);
    return it->second;
}

std::string code_to_json(const StabilizerCode& code) {
    nlohmann::json j;
    j["n_data"] = code.n_data;
    j["distance"] = code.distance;
    j["generators"] = nlohmann::json::array();
    for (const auto& g : code.generators) j["generators"].push_back(g.str());
    j["logical_x"] = code.logical_x.str();
    j["logical_z"] = code.logical_z.str();
    return j.dump(2);
}

std::string table_to_json(const CorrelatedErrorTable& table) {
    nlohmann::json j;
    j["context"] = table.context;
    j["generators"] = table.generator_indices;
    j["entries"] = nlohmann::json::array();
    for (const auto& [key, err] : table.entries) {
        nlohmann::json e;
        e["syndrome"] = key;
        e["correction"] = err.str();
        j["entries"].push_back(e);
    }
    return j.dump(2);
}

}  // namespace rydft
