#include "rydft/levels.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace rydft {

Orbital orbital_from_char(char c) {
    switch (c) {
        case 'S': case 's': return Orbital::S;
        case 'P': case 'p': return Orbital::P;
        case 'D': case 'd': return Orbital::D;
        case 'F': case 'f': return Orbital::F;
    }
    throw std::invalid_argument(std::string("unknown orbital label: ") + c);
}

char orbital_char(Orbital l) {
    static const char tab[] = {'S', 'P', 'D', 'F'};
    return tab[static_cast<int>(l)];
}

std::string RydbergState::str() const {
    std::ostringstream os;
    os << n << orbital_char(L) << J.str() << " mJ=" << mJ.str() << " mI=" << mI.str();
    return os.str();
}

Species rb87() {
    Species s;
    s.name = "87Rb";
    s.I = HalfInt(3);  // 3/2
    s.qubit0 = {HalfInt::from_int(1), HalfInt::from_int(-1)};
    s.qubit1 = {HalfInt::from_int(2), HalfInt::from_int(1)};
    s.stretched_ground_plus = {HalfInt::from_int(2), HalfInt::from_int(2)};
    s.stretched_ground_minus = {HalfInt::from_int(2), HalfInt::from_int(-2)};
    return s;
}

Species rb85() {
    Species s;
    s.name = "85Rb";
    s.I = HalfInt(5);  // 5/2
    s.qubit0 = {HalfInt::from_int(2), HalfInt::from_int(-1)};
    s.qubit1 = {HalfInt::from_int(3), HalfInt::from_int(1)};
    s.stretched_ground_plus = {HalfInt::from_int(3), HalfInt::from_int(3)};
    s.stretched_ground_minus = {HalfInt::from_int(3), HalfInt::from_int(-3)};
    return s;
}

bool dipole_allowed(const RydbergState& a, const RydbergState& b) {
    if (a.n <= 0 || b.n <= 0) throw std::invalid_argument("dipole_allowed: unlabeled state");
    if (a.mJ.abs() > a.J || b.mJ.abs() > b.J) return false;  // no such sublevel
    int dL = std::abs(static_cast<int>(a.L) - static_cast<int>(b.L));
    if (dL != 1) return false;
    HalfInt dJ = (a.J - b.J).abs();
    if (dJ > HalfInt::from_int(1)) return false;
    HalfInt dmJ = (a.mJ - b.mJ).abs();
    if (dmJ > HalfInt::from_int(1)) return false;
    if (a.mI != b.mI) return false;
    return true;
}

BranchingTable::BranchingTable(std::map<HyperfineState, double> entries)
    : entries_(std::move(entries)) {
    for (const auto& [f, r] : entries_) {
        if (!f.valid()) throw std::invalid_argument("branching table: |mF| > F in " + f.str());
        if (r < 0.0 || r > 1.0)
            throw std::invalid_argument("branching table: ratio outside [0,1] for " + f.str());
    }
}

double BranchingTable::ratio(const HyperfineState& f) const {
    auto it = entries_.find(f);
    return it == entries_.end() ? 0.0 : it->second;
}

double BranchingTable::total() const {
    double t = 0.0;
    for (const auto& [f, r] : entries_) t += r;
    return t;
}

std::string BranchingTable::to_csv() const {
    std::ostringstream os;
    os << "F,mF,ratio\n";
    os.setf(std::ios::fixed);
    os.precision(3);
    for (const auto& [f, r] : entries_)
        os << f.F.value() << "," << f.mF.value() << "," << r << "\n";
    return os.str();
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') { out.push_back(cur); cur.clear(); }
        else if (!isspace(static_cast<unsigned char>(c))) cur += c;
    }
    out.push_back(cur);
    return out;
}

HalfInt parse_halfint(const std::string& s) {
    // accepts "2", "-1", "1.5", "-2.5", "3/2"
    auto slash = s.find('/');
    if (slash != std::string::npos)
        return HalfInt(std::stoi(s.substr(0, slash)));
    double v = std::stod(s);
    double tw = v * 2.0;
    int t = static_cast<int>(std::lround(tw));
    if (std::abs(tw - t) > 1e-9) throw std::invalid_argument("not a half-integer: " + s);
    return HalfInt(t);
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open data file: " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

}  // namespace

BranchingTable load_branching_table(const std::string& csv_text) {
    std::istringstream in(csv_text);
    std::string line;
    std::map<HyperfineState, double> entries;
    bool header_done = false;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (!header_done) { header_done = true; continue; }  // header row F,mF,ratio
        auto cols = split_csv_line(line);
        if (cols.size() != 3) throw std::invalid_argument("branching CSV: expected 3 columns");
        HyperfineState f{parse_halfint(cols[0]), parse_halfint(cols[1])};
        double ratio = std::stod(cols[2]);
        if (ratio < 0.0 || ratio > 1.0)
            throw std::invalid_argument("branching CSV: ratio outside [0,1]");
        if (entries.count(f))
            throw std::invalid_argument("branching CSV: duplicate state " + f.str());
        entries[f] = ratio;
    }
    return BranchingTable(std::move(entries));
}

BranchingTable load_branching_table_file(const std::string& path) {
    return load_branching_table(read_file(path));
}

BBRTargetTable load_bbr_target_table(const std::string& csv_text) {
    std::istringstream in(csv_text);
    std::string line;
    BBRTargetTable table;
    bool header_done = false;
    double total = 0.0;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (!header_done) { header_done = true; continue; }  // header n,L,J,mJ,mI,n_eff,weight
        auto cols = split_csv_line(line);
        if (cols.size() != 7) throw std::invalid_argument("BBR CSV: expected 7 columns");
        RydbergState r;
        r.n = std::stoi(cols[0]);
        r.L = orbital_from_char(cols[1][0]);
        r.J = parse_halfint(cols[2]);
        r.mJ = parse_halfint(cols[3]);
        r.mI = parse_halfint(cols[4]);
        r.n_eff = std::stod(cols[5]);
        double w = std::stod(cols[6]);
        if (w < 0.0) throw std::invalid_argument("BBR CSV: negative weight");
        if (!r.valid()) throw std::invalid_argument("BBR CSV: invalid state " + r.str());
        table.entries.emplace_back(r, w);
        total += w;
    }
    if (total <= 0.0) throw std::invalid_argument("BBR CSV: zero total weight");
    for (auto& [r, w] : table.entries) w /= total;
    return table;
}

BBRTargetTable load_bbr_target_table_file(const std::string& path) {
    return load_bbr_target_table(read_file(path));
}

std::string data_dir(const std::string& override_dir) {
    if (!override_dir.empty()) return override_dir;
    if (const char* env = std::getenv("RYDFT_DATA_DIR")) return env;
    return RYDFT_DEFAULT_DATA_DIR;
}

BranchingTable rb87_70s_rd_branching(const std::string& dir) {
    return load_branching_table_file(data_dir(dir) + "/rb87_70s_rd_branching.csv");
}

BBRTargetTable rb87_70s_bbr_targets(const std::string& dir) {
    return load_bbr_target_table_file(data_dir(dir) + "/rb87_70s_bbr_targets.csv");
}

double bbr_total_rate(double temperature_k, double n_eff) {
    if (temperature_k <= 0.0 || n_eff <= 0.0)
        throw std::invalid_argument("bbr_total_rate: inputs must be positive");
    constexpr double kb_au = 3.166811563e-6;      // hartree per kelvin
    constexpr double c_au = 137.035999084;        // speed of light, atomic units
    constexpr double atomic_time_s = 2.4188843265857e-17;
    double gamma_au = 4.0 * kb_au * temperature_k / (3.0 * c_au * c_au * c_au * n_eff * n_eff);
    return gamma_au / atomic_time_s;
}

double rd_rate_scaled(double rate_ref, double n_eff_ref, double n_eff) {
    if (rate_ref <= 0.0 || n_eff_ref <= 0.0 || n_eff <= 0.0)
        throw std::invalid_argument("rd_rate_scaled: inputs must be positive");
    double r = n_eff_ref / n_eff;
    return rate_ref * r * r * r;
}

}  // namespace rydft
