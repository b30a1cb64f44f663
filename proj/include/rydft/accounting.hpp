#pragma once

#include <string>
#include <vector>

#include "rydft/protocols.hpp"

namespace rydft {

struct CountPair {
    int no_error = 0;
    int worst = 0;
    std::string str() const;
    friend bool operator==(const CountPair&, const CountPair&) = default;
};

struct ResourceTally {
    std::string protocol;
    CountPair two_qubit;
    CountPair three_qubit;
    CountPair measurements;
    int ancillas = 0;
};

// Counts by walking the protocol schedule with at most one adversarial
// deviation (a -1 syndrome or a detected leak); never hard-coded.
ResourceTally tally(const std::string& protocol, const ExecOptions& opts = {});

// Reference rows of the comparison tables (cited baselines are stored, the
// Ryd rows are recomputed by tally).
struct TableRow {
    std::string name;
    CountPair two_qubit;
    CountPair three_qubit;
    int ancillas = 0;
    bool recomputed = false;   // true for the Ryd rows
    std::string protocol;      // registry name when recomputed
};

std::vector<TableRow> stabilizer_table();  // "measurement of all stabilizers"
std::vector<TableRow> logical_op_table();  // "highest-cost logical operation"

std::string render_table_text(const std::vector<TableRow>& rows, const std::string& title);
std::string render_table_csv(const std::vector<TableRow>& rows);
std::string render_table_json(const std::vector<TableRow>& rows, const std::string& title);

// recompute the Ryd rows and compare with the stored values; returns the
// number of mismatching cells and appends human-readable lines
int diff_paper(std::vector<std::string>& lines);

}  // namespace rydft
