#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rydft/protocols.hpp"

namespace rydft {

struct ChannelParams {
    double p_bbr = 1e-3;       // BBR jump probability per gate window
    double gamma = 1.0;        // total RD rate (units of 1/t_pi scale)
    double t_pi = 1e-3;        // pulse duration
    double p_scatter = 0.0;    // intermediate-state scattering knob
    bool include_qubit0_decay = false;
};

struct CampaignConfig {
    std::string protocol;  // registry name
    ChannelParams channel;
    ExecOptions exec;
    std::string input_state = "generic";  // or "zero", "plus"
    std::vector<std::string> fault_kinds;  // empty = all
    std::vector<int> atom_filter;          // empty = all
    std::vector<int> window_filter;        // empty = all
    int workers = 2;
    std::string out_jsonl;
    std::string out_summary;
    bool csv = false;
    int max_branches = 64;
};

CampaignConfig parse_campaign_config(const std::string& text);
CampaignConfig load_campaign_config(const std::string& path);

struct LocationVerdict {
    FaultLocation loc;
    int branches = 0;
    bool pass = true;
    bool skipped = false;  // null fault
    std::string residual;  // "none", "Z@4", ... of the worst branch
    std::string detail;
};

struct CampaignReport {
    std::string protocol;
    int total_locations = 0;
    int passed = 0;
    int failed = 0;
    int skipped = 0;
    std::map<std::string, int> residual_histogram;
    std::vector<LocationVerdict> verdicts;
    double runtime_seconds = 0.0;

    bool all_pass() const { return failed == 0; }
    std::string summary_json() const;
    std::string verdicts_jsonl() const;
    std::string verdicts_csv() const;
};

// protocol registry ----------------------------------------------------------

struct ProtocolSpec {
    std::string name;
    bool ryd3 = false;
    // which logical blocks carry input / are compared at the end
    std::vector<int> input_blocks;
    std::vector<int> output_blocks;
    // runs the protocol proper
    std::function<void(ProtocolContext&)> run;
    // trailing standard QEC rounds for the certificate
    std::function<void(ProtocolContext&)> trailing;
    // ideal logical action on the input coefficient vector (indexed by the
    // concatenated logical bits of input_blocks)
    std::function<std::vector<cplx>(const std::vector<cplx>&)> ideal;
    // residuals allowed by the certificate ('A' = any Pauli, 'Z' = Z only)
    char allowed_residual = 'A';
};

const std::map<std::string, ProtocolSpec>& protocol_registry();
Layout layout_for(const std::string& protocol, const ExecOptions& opts);
Species species_for(const std::string& protocol);

// fault enumeration + exhaustive campaign ------------------------------------

std::vector<FaultWindow> dry_run_windows(const CampaignConfig& cfg);
std::vector<FaultLocation> enumerate_fault_locations(const CampaignConfig& cfg);
CampaignReport run_campaign(const CampaignConfig& cfg);

// bias-certificate campaign over the physical CNOT / Toffoli: checks that no
// branch produces a target-flip amplitude beyond tol for Z-basis inputs
struct BiasReport {
    int total_locations = 0;
    int passed = 0, failed = 0, skipped = 0;
    double worst_flip_weight = 0.0;
    std::vector<std::string> failures;
    bool all_pass() const { return failed == 0; }
};
BiasReport run_bias_campaign(const std::string& which,  // "cnot" or "toffoli"
                             const CampaignConfig& cfg, double tol = 1e-10);

// postponement equivalence (criterion-6 check): per-gate vs end-of-round
// probing produce identical post-QEC states for every single fault
struct EquivalenceReport {
    int compared = 0;
    int mismatches = 0;
    std::vector<std::string> details;
    bool all_pass() const { return mismatches == 0; }
};
EquivalenceReport run_postponement_equivalence(const CampaignConfig& base);

}  // namespace rydft
