#include "rydft/accounting.hpp"

#include <algorithm>
#include <sstream>

#include "json.hpp"
#include "rydft/campaign.hpp"

namespace rydft {

std::string CountPair::str() const {
    if (worst == no_error) return std::to_string(no_error);
    return std::to_string(no_error) + " (" + std::to_string(worst) + ")";
}

// ---------------------------------------------------------------------------
// counting walker: executes the protocol control flow without state

namespace {

class CountContext : public ProtocolContext {
public:
    CountContext(const Layout& layout, Species species, ExecOptions opts)
        : ProtocolContext(layout, std::move(species), opts) {}

    int deviation = -1;    // index of the decision event that misbehaves
    int event_counter = 0;
    bool leak_pending = false;  // a probe deviation fired; next loss check hits

    void r_gate(const std::vector<int>& controls, const std::vector<int>& targets,
                RydClass) override {
        if (controls.size() + targets.size() == 2) ++counts.two_qubit;
        else ++counts.three_qubit;
    }
    void or_gate(const std::vector<int>& controls, int, RydClass) override {
        if (controls.size() + 1 == 2) ++counts.two_qubit;
        else ++counts.three_qubit;
    }
    void h(int) override {}
    void x(int) override {}
    void y(int) override {}
    void z(int) override {}

    bool deviate_now() { return event_counter++ == deviation; }

    MeasureOutcome measure(int, MeasureBasis, MeasurePurpose purpose,
                           MeasureOutcome fault_free) override {
        ++counts.measurements;
        if (purpose == MeasurePurpose::Reset) return fault_free;
        if (deviate_now())
            return fault_free == MeasureOutcome::Plus ? MeasureOutcome::Minus
                                                      : MeasureOutcome::Plus;
        return fault_free;
    }
    void reset(int, bool) override {}
    bool probe_rydberg(int, RydClass) override {
        if (opts.disable_leak_probe) return false;
        reserve_ancilla("probe");
        counts.measurements += 2;
        if (deviate_now()) {
            counts.measurements += 2;  // confirmation repeat
            leak_pending = true;
            return true;
        }
        return false;
    }
    bool loss_check(int, int, RydClass, bool robust) override {
        counts.two_qubit += 2;
        ++counts.measurements;
        bool found = leak_pending;
        leak_pending = false;
        if (robust && found) {
            counts.two_qubit += 2;
            ++counts.measurements;
        }
        return found;
    }
    void pump_leaks_to_stretched() override {}
    void incoherent_rydberg_pump(const std::vector<int>&) override {}
    void optical_pump(Register::PumpScheme) override {}
    void eject_leaked() override {}
    void eject_and_replace(int, bool) override {}
    bool is_sim() const override { return false; }
};

void run_protocol_counted(CountContext& ctx, const std::string& name) {
    const auto& reg = protocol_registry();
    auto it = reg.find(name);
    if (it == reg.end()) throw std::invalid_argument("unknown protocol: " + name);
    it->second.run(ctx);
}

}  // namespace

ResourceTally tally(const std::string& protocol, const ExecOptions& opts) {
    Layout lay = layout_for(protocol, opts);
    Species sp = species_for(protocol);
    ResourceTally t;
    t.protocol = protocol;

    CountContext base(lay, sp, opts);
    run_protocol_counted(base, protocol);
    t.two_qubit.no_error = base.counts.two_qubit;
    t.three_qubit.no_error = base.counts.three_qubit;
    t.measurements.no_error = base.counts.measurements;
    std::set<std::string> slots = base.ancilla_slots;

    int n_events = base.event_counter;
    GateCounts worst = base.counts;
    long worst_total = worst.two_qubit + worst.three_qubit;
    for (int d = 0; d < n_events; ++d) {
        CountContext c(lay, sp, opts);
        c.deviation = d;
        run_protocol_counted(c, protocol);
        slots.insert(c.ancilla_slots.begin(), c.ancilla_slots.end());
        long total = c.counts.two_qubit + c.counts.three_qubit;
        if (total > worst_total ||
            (total == worst_total && c.counts.two_qubit > worst.two_qubit)) {
            worst_total = total;
            worst = c.counts;
        }
    }
    t.two_qubit.worst = worst.two_qubit;
    t.three_qubit.worst = worst.three_qubit;
    t.measurements.worst = worst.measurements;
    t.ancillas = int(slots.size());
    return t;
}

// ---------------------------------------------------------------------------
// paper tables

std::vector<TableRow> stabilizer_table() {
    return {
        {"7-qubit flagged", {36, 48}, {0, 0}, 2, false, ""},
        {"15-qubit flagged", {80, 112}, {0, 0}, 2, false, ""},
        {"Ryd-7", {24, 36}, {0, 0}, 2, true, "ryd7-qec-round"},
        {"Ryd-3", {8, 16}, {4, 8}, 4, true, "ryd3-stab-round"},
    };
}

std::vector<TableRow> logical_op_table() {
    return {
        {"Yoder-Takagi-Chuang (CCZ)", {162, 162}, {21, 21}, 72, false, ""},
        {"Chao-Reichardt (CCZ)", {1352, 1416}, {84, 84}, 4, false, ""},
        {"Ryd-7 (CCZ)", {0, 78}, {27, 29}, 2, true, "ryd7-ccz"},
        {"Ryd-3 (CCZ)", {0, 18}, {27, 27}, 4, true, "ryd3-ccz"},
        {"Ryd-3 (H)", {20, 28}, {53, 57}, 10, true, "ryd3-hadamard"},
    };
}

std::string render_table_text(const std::vector<TableRow>& rows, const std::string& title) {
    std::ostringstream os;
    os << title << "\n";
    os << "  " << std::string(64, '-') << "\n";
    char buf[128];
    snprintf(buf, sizeof buf, "  %-28s %-12s %-12s %s\n", "scheme", "2q gates", "3q gates",
             "ancillas");
    os << buf;
    for (const auto& r : rows) {
        snprintf(buf, sizeof buf, "  %-28s %-12s %-12s %d\n", r.name.c_str(),
                 r.two_qubit.str().c_str(), r.three_qubit.str().c_str(), r.ancillas);
        os << buf;
    }
    return os.str();
}

std::string render_table_csv(const std::vector<TableRow>& rows) {
    std::ostringstream os;
    os << "scheme,2q,2q_worst,3q,3q_worst,ancillas\n";
    for (const auto& r : rows)
        os << r.name << "," << r.two_qubit.no_error << "," << r.two_qubit.worst << ","
           << r.three_qubit.no_error << "," << r.three_qubit.worst << "," << r.ancillas << "\n";
    return os.str();
}

std::string render_table_json(const std::vector<TableRow>& rows, const std::string& title) {
    nlohmann::json j;
    j["title"] = title;
    j["rows"] = nlohmann::json::array();
    for (const auto& r : rows) {
        nlohmann::json jr;
        jr["scheme"] = r.name;
        jr["two_qubit"] = {r.two_qubit.no_error, r.two_qubit.worst};
        jr["three_qubit"] = {r.three_qubit.no_error, r.three_qubit.worst};
        jr["ancillas"] = r.ancillas;
        j["rows"].push_back(jr);
    }
    return j.dump(2);
}

int diff_paper(std::vector<std::string>& lines) {
    int mismatches = 0;
    auto check = [&](const std::vector<TableRow>& rows) {
        for (const auto& r : rows) {
            if (!r.recomputed) continue;
            ExecOptions opts;
            ResourceTally t = tally(r.protocol, opts);
            auto cell = [&](const char* what, const CountPair& got, const CountPair& want) {
                bool ok = got == want;
                if (!ok) ++mismatches;
                lines.push_back("  " + r.name + " " + what + ": computed " + got.str() +
                                (ok ? " == " : " != ") + want.str());
            };
            cell("2q", t.two_qubit, r.two_qubit);
            cell("3q", t.three_qubit, r.three_qubit);
            bool ok = t.ancillas == r.ancillas;
            if (!ok) ++mismatches;
            lines.push_back("  " + r.name + " ancillas: computed " + std::to_string(t.ancillas) +
                            (ok ? " == " : " != ") + std::to_string(r.ancillas));
        }
    };
    check(stabilizer_table());
    check(logical_op_table());
    return mismatches;
}

}  // namespace rydft
