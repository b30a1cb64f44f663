#include <cmath>

#include "doctest.h"
#include "rydft/accounting.hpp"
#include "rydft/campaign.hpp"

using namespace rydft;

TEST_CASE("ryd7 stabilizer-round tally matches the stored table row") {
    auto t = tally("ryd7-qec-round");
    CHECK(t.two_qubit.no_error == 24);
    CHECK(t.two_qubit.worst == 36);
    CHECK(t.three_qubit.no_error == 0);
    CHECK(t.three_qubit.worst == 0);
    CHECK(t.ancillas == 2);
}

TEST_CASE("ryd3 stabilizer-round tally") {
    auto t = tally("ryd3-stab-round");
    CHECK(t.two_qubit.no_error == 8);
    CHECK(t.two_qubit.worst == 16);
    CHECK(t.three_qubit.no_error == 4);
    CHECK(t.three_qubit.worst == 8);
    CHECK(t.ancillas == 4);
}

TEST_CASE("ryd7 CCZ tally") {
    auto t = tally("ryd7-ccz");
    CHECK(t.two_qubit.no_error == 0);
    CHECK(t.two_qubit.worst == 78);
    CHECK(t.three_qubit.no_error == 27);
    CHECK(t.three_qubit.worst == 29);
    CHECK(t.ancillas == 2);
}

TEST_CASE("ryd3 CCZ tally") {
    auto t = tally("ryd3-ccz");
    CHECK(t.two_qubit.no_error == 0);
    CHECK(t.two_qubit.worst == 18);
    CHECK(t.three_qubit.no_error == 27);
    CHECK(t.three_qubit.worst == 27);
    CHECK(t.ancillas == 4);
}

TEST_CASE("ryd3 Hadamard tally at both blockade radii") {
    auto t = tally("ryd3-hadamard");
    CHECK(t.two_qubit.no_error == 20);
    CHECK(t.two_qubit.worst == 28);
    CHECK(t.three_qubit.no_error == 53);
    CHECK(t.three_qubit.worst == 57);
    CHECK(t.ancillas == 10);
    // the sqrt(13) radius removes the four relay CNOTs
    ExecOptions direct;
    direct.toffoli_direct = true;
    auto td = tally("ryd3-hadamard", direct);
    CHECK(td.two_qubit.no_error == 16);
    CHECK(td.three_qubit.no_error == 53);
}

TEST_CASE("tally equals the sim-instrumented gate count on the no-error branch") {
    for (const char* name : {"ryd7-qec-round", "ryd3-stab-round", "ryd7-ccz", "ryd3-ccz",
                             "ryd3-hadamard", "ryd7-cz", "ryd3-toffoli"}) {
        CampaignConfig cfg;
        cfg.protocol = name;
        const auto& spec = protocol_registry().at(cfg.protocol);
        Layout lay = layout_for(cfg.protocol, cfg.exec);
        SimContext ctx(lay, species_for(cfg.protocol), cfg.exec);
        int nd = spec.ryd3 ? 3 : 7;
        if (!spec.input_blocks.empty()) {
            std::vector<int> atoms;
            std::vector<std::pair<std::vector<int>, cplx>> terms;
            std::vector<std::vector<std::uint32_t>> bt;
            for (std::size_t b = 0; b < spec.input_blocks.size(); ++b)
                bt.push_back(spec.ryd3 ? repetition_logical_terms(0) : steane_logical_terms(0));
            for (int b : spec.input_blocks)
                for (int a : lay.logical_block(b)) atoms.push_back(a);
            std::vector<unsigned> pos(bt.size(), 0);
            double nrm = std::pow(double(bt[0].size()), -0.5 * double(bt.size()));
            while (true) {
                std::vector<int> bits;
                for (std::size_t k = 0; k < bt.size(); ++k)
                    for (int q = 0; q < nd; ++q) bits.push_back(int((bt[k][pos[k]] >> q) & 1));
                terms.push_back({bits, nrm});
                int k = int(bt.size()) - 1;
                while (k >= 0 && ++pos[k] == bt[k].size()) pos[k--] = 0;
                if (k < 0) break;
            }
            ctx.reg.set_block_amplitudes(atoms, terms);
        }
        spec.run(ctx);
        auto t = tally(name);
        INFO(name);
        CHECK(ctx.counts.two_qubit == t.two_qubit.no_error);
        CHECK(ctx.counts.three_qubit == t.three_qubit.no_error);
    }
}

TEST_CASE("diff against the stored paper rows is clean") {
    std::vector<std::string> lines;
    CHECK(diff_paper(lines) == 0);
}

TEST_CASE("table renderers include the recomputed rows") {
    auto rows = stabilizer_table();
    auto txt = render_table_text(rows, "t");
    CHECK(txt.find("Ryd-7") != std::string::npos);
    CHECK(render_table_csv(rows).find("Ryd-3") != std::string::npos);
    CHECK(render_table_json(rows, "t").find("two_qubit") != std::string::npos);
}
