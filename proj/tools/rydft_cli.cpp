#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "rydft/accounting.hpp"
#include "rydft/campaign.hpp"
#include "rydft/oracle.hpp"

using namespace rydft;

int main(int argc, char** argv) {
    CLI::App app{"rydft: Rydberg-atom fault-tolerance simulator and verifier"};
    app.require_subcommand(1);
    std::string data_dir_flag;
    app.add_option("--data-dir", data_dir_flag, "override the bundled data directory");

    // campaign ---------------------------------------------------------------
    auto* camp = app.add_subcommand("campaign", "exhaustive single-fault campaigns");
    std::string camp_cmd, camp_config;
    camp->add_option("action", camp_cmd, "run | list-locations")->required();
    camp->add_option("config", camp_config, "campaign config file")->required();
    bool camp_csv = false;
    camp->add_flag("--csv", camp_csv, "emit verdicts as CSV to stdout");

    // tally ------------------------------------------------------------------
    auto* tal = app.add_subcommand("tally", "resource tables by schedule walking");
    std::string tal_fmt = "text";
    bool tal_diff = false;
    tal->add_option("--format", tal_fmt, "text | csv | json");
    tal->add_flag("--diff-paper", tal_diff, "compare with the stored table values");

    // geometry ---------------------------------------------------------------
    auto* geo = app.add_subcommand("geometry", "layout feasibility and blockade radii");
    std::string geo_fmt = "text";
    geo->add_option("--format", geo_fmt, "text | csv");
    std::string geo_layout;
    geo->add_option("--layout", geo_layout, "layout JSON file (default: bundled layouts)");

    // rates ------------------------------------------------------------------
    auto* rates = app.add_subcommand("rates", "BBR/RD rate laws");
    double rates_T = 300.0, rates_neff = 66.87;
    rates->add_option("--temperature", rates_T, "kelvin");
    rates->add_option("--n-eff", rates_neff, "effective principal quantum number");

    // oracle -----------------------------------------------------------------
    auto* orc = app.add_subcommand("oracle", "master-equation checks");
    std::string orc_cmd = "rd-check";
    orc->add_option("action", orc_cmd, "rd-check");
    std::string orc_csv;
    orc->add_option("--csv", orc_csv, "write fixture CSV to this path");

    CLI11_PARSE(app, argc, argv);
    if (!data_dir_flag.empty()) setenv("RYDFT_DATA_DIR", data_dir_flag.c_str(), 1);

    try {
        if (camp->parsed()) {
            CampaignConfig cfg = load_campaign_config(camp_config);
            if (camp_cmd == "list-locations") {
                auto locs = enumerate_fault_locations(cfg);
                for (const auto& l : locs) std::cout << l.str() << "\n";
                std::cout << locs.size() << " locations\n";
                return 0;
            }
            if (camp_cmd != "run") {
                std::cerr << "unknown campaign action: " << camp_cmd << "\n";
                return 2;
            }
            CampaignReport rep = run_campaign(cfg);
            if (camp_csv) std::cout << rep.verdicts_csv();
            std::cout << rep.summary_json() << "\n";
            return rep.all_pass() ? 0 : 1;
        }
        if (tal->parsed()) {
            if (tal_diff) {
                std::vector<std::string> lines;
                int bad = diff_paper(lines);
                for (const auto& l : lines) std::cout << l << "\n";
                std::cout << (bad == 0 ? "all table cells match" : "MISMATCHES: ")
                          << (bad == 0 ? "" : std::to_string(bad)) << "\n";
                return bad == 0 ? 0 : 1;
            }
            auto t1 = stabilizer_table();
            auto t2 = logical_op_table();
            for (auto* rows : {&t1, &t2})
                for (auto& r : *rows)
                    if (r.recomputed) {
                        ResourceTally t = tally(r.protocol, ExecOptions{});
                        r.two_qubit = t.two_qubit;
                        r.three_qubit = t.three_qubit;
                        r.ancillas = t.ancillas;
                    }
            if (tal_fmt == "csv") {
                std::cout << render_table_csv(t1) << "\n" << render_table_csv(t2);
            } else if (tal_fmt == "json") {
                std::cout << render_table_json(t1, "stabilizer measurement") << "\n"
                          << render_table_json(t2, "highest-cost logical operation") << "\n";
            } else {
                std::cout << render_table_text(t1,
                                               "Resource cost: fault-tolerant measurement of all "
                                               "stabilizers");
                std::cout << "\n";
                std::cout << render_table_text(
                    t2, "Resource cost: highest-cost fault-tolerant logical operation");
            }
            return 0;
        }
        if (geo->parsed()) {
            struct Row {
                std::string name;
                double radius;
            };
            std::vector<Row> rows;
            {
                Layout l7 = ryd7_triangular();
                std::vector<EntanglingStep> alg3, redj;
                auto blocks = {l7.logical_block(0), l7.logical_block(1), l7.logical_block(2)};
                auto b = std::vector<std::vector<int>>{l7.logical_block(0), l7.logical_block(1),
                                                       l7.logical_block(2)};
                for (int j = 1; j <= 3; ++j)
                    for (int k = 1; k <= 3; ++k) {
                        for (int l : {1, 2, 3})
                            alg3.push_back({{b[0][j - 1], b[1][k - 1], b[2][l - 1]}, true,
                                            RydClass::Single});
                        for (int l : {3, 5, 6})
                            redj.push_back({{b[0][j - 1], b[1][k - 1], b[2][l - 1]}, true,
                                            RydClass::Single});
                    }
                rows.push_back({"ryd7 CCZ (round-robin {1,2,3})", min_blockade_radius(l7, alg3)});
                rows.push_back({"ryd7 CCZ (reduced set {3,5,6})", min_blockade_radius(l7, redj)});
            }
            {
                Layout l3 = ryd3_triangular();
                auto geo3 = ryd3_toffoli_geometry(l3);
                auto b = std::vector<std::vector<int>>{l3.logical_block(0), l3.logical_block(1),
                                                       l3.logical_block(2)};
                std::vector<EntanglingStep> direct, relay;
                for (int j = 1; j <= 3; ++j)
                    for (int k = 1; k <= 3; ++k) {
                        auto [fl, fr] = geo3.flanks[j];
                        for (auto* fs : {&fl, &fr}) {
                            direct.push_back(
                                {{b[0][j - 1], b[1][k - 1], l3.ancilla(*fs)}, false,
                                 RydClass::R1});
                        }
                        bool problem = (k == 2) && (j == 1 || j == 3);
                        if (!problem) {
                            for (auto* fs : {&fl, &fr})
                                relay.push_back({{b[0][j - 1], b[1][k - 1], l3.ancilla(*fs)},
                                                 false, RydClass::R1});
                        } else {
                            std::string near = fl == geo3.far_ancilla ? fr : fl;
                            relay.push_back({{b[0][j - 1], b[1][k - 1], l3.ancilla(near)}, false,
                                             RydClass::R1});
                            std::string sub = geo3.substitute[j];
                            relay.push_back({{b[0][j - 1], b[1][k - 1], l3.ancilla(sub)}, false,
                                             RydClass::R1});
                            relay.push_back(
                                {{l3.ancilla(sub), l3.ancilla(geo3.far_ancilla)}, false,
                                 RydClass::R1});
                        }
                    }
                rows.push_back({"ryd3 Toffoli (direct)", min_blockade_radius(l3, direct)});
                rows.push_back({"ryd3 Toffoli (relay CNOTs)", min_blockade_radius(l3, relay)});
            }
            {
                Layout ls = ryd3_square();
                auto b = std::vector<std::vector<int>>{ls.logical_block(0), ls.logical_block(1),
                                                       ls.logical_block(2)};
                std::vector<EntanglingStep> ccz;
                for (int j = 0; j < 3; ++j)
                    for (int k = 0; k < 3; ++k)
                        for (int l = 0; l < 3; ++l)
                            ccz.push_back({{b[0][j], b[1][k], b[2][l]}, true, RydClass::R1});
                rows.push_back({"ryd3 square CCZ", min_blockade_radius(ls, ccz)});
            }
            if (geo_fmt == "csv") {
                std::cout << "schedule,min_blockade_radius_d\n";
                for (const auto& r : rows) std::cout << r.name << "," << r.radius << "\n";
            } else {
                printf("%-36s %s\n", "schedule", "min blockade radius [d]");
                for (const auto& r : rows) printf("%-36s %.12f\n", r.name.c_str(), r.radius);
            }
            return 0;
        }
        if (rates->parsed()) {
            double g = bbr_total_rate(rates_T, rates_neff);
            printf("BBR total rate at T=%.1f K, n_eff=%.2f: %.4f 1/s\n", rates_T, rates_neff, g);
            printf("RD rate scaling from (ref 1/s @ n_eff): x%.6f at 2x n_eff\n",
                   rd_rate_scaled(1.0, rates_neff, 2 * rates_neff));
            return 0;
        }
        if (orc->parsed()) {
            auto branching = BranchingTable({{rb87().qubit1, 1.0}});
            std::ostringstream csv;
            csv << "gamma_over_omega,entry,channel,oracle\n";
            double worst = 0.0;
            for (double go : {1e-2, 1e-3, 1e-4}) {
                double omega = 1.0, gamma = go;
                double t_pi = M_PI / (2.0 * omega);
                auto ch = rd_channel(gamma, t_pi, branching);
                DensityMatrix3 rho0 = DensityMatrix3::qubit(std::sqrt(0.5), std::sqrt(0.5));
                DensityMatrix3 a = apply_rd_channel_2pi(ch, rho0);
                DensityMatrix3 b = master_equation_oracle(gamma, omega, rho0, 2.0 * M_PI);
                double diff = a.max_abs_diff(b);
                worst = std::max(worst, diff / (go * go));
                for (int i = 0; i < 3; ++i)
                    for (int j = 0; j < 3; ++j)
                        csv << go << "," << i << j << "," << a(i, j).real() << ","
                            << b(i, j).real() << "\n";
                printf("gamma/Omega=%.0e  max entry diff %.3e (%.2fx (g/O)^2)\n", go, diff,
                       diff / (go * go));
            }
            if (!orc_csv.empty()) {
                std::ofstream f(orc_csv);
                f << csv.str();
            }
            printf("worst ratio vs (gamma/Omega)^2: %.3f (tolerance 5)\n", worst);
            return worst <= 5.0 ? 0 : 1;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
