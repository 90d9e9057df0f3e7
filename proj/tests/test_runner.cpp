#include <doctest.h>

#include "qsdc/runner.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

using namespace qsdc;
using nlohmann::json;

namespace {

std::vector<std::string> split_lines(const std::string& s) {
    std::vector<std::string> lines;
    std::istringstream in(s);
    std::string line;
    while (std::getline(in, line))
        if (!line.empty()) lines.push_back(line);
    return lines;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    fields.push_back(cur);
    return fields;
}

}  // namespace

TEST_CASE("config parsing applies defaults") {
    RunConfig c = parse_run_config(json::object());
    CHECK(c.session.d == 2);
    CHECK(c.session.m_bases == 2);
    CHECK(c.session.n_pairs == 64);
    CHECK(c.session.p_check == 0.25);
    CHECK(c.session.decoy_count == -1);
    CHECK(c.trials == 1);
    CHECK(c.format == "json");
    CHECK(c.session.eve.kind == EveStrategy::Kind::None);
    CHECK_FALSE(c.topology.has_value());

    RunConfig full = parse_run_config(json{
        {"d", 3},
        {"m_bases", 4},
        {"n_pairs", 128},
        {"p_check", 0.2},
        {"decoy_count", 16},
        {"s_e2_count", 9},
        {"seed", 42},
        {"trials", 3},
        {"format", "csv"},
        {"decoy_source", {{"kind", "by_measurement"}, {"n1", 20}, {"n2", 16}}},
        {"eve", {{"kind", "intercept_resend"}, {"legs", {"bob_to_alice"}}}},
    });
    CHECK(full.session.d == 3);
    CHECK(full.session.m_bases == 4);
    CHECK(full.session.decoy_count == 16);
    CHECK(full.session.seed == 42);
    CHECK(full.trials == 3);
    CHECK(full.format == "csv");
    CHECK(full.session.decoy_source == SessionConfig::DecoySource::ByMeasurement);
    CHECK(full.session.n1 == 20);
    CHECK(full.session.n2 == 16);
    CHECK(full.session.eve.kind == EveStrategy::Kind::InterceptResendMUB);
    CHECK(full.session.eve.legs == std::set<ChannelLeg>{ChannelLeg::BobToAlice});
}

TEST_CASE("config parse errors name the offending field") {
    auto expect_error = [](const json& j, const std::string& needle) {
        try {
            parse_run_config(j);
            FAIL(("expected invalid_argument for " + j.dump()));
        } catch (const std::invalid_argument& e) {
            CHECK(std::string(e.what()).find(needle) != std::string::npos);
        }
    };
    expect_error({{"d", "three"}}, "\"d\"");
    expect_error({{"n_pairs", json::array()}}, "\"n_pairs\"");
    expect_error({{"trials", 0}}, "\"trials\"");
    expect_error({{"format", "xml"}}, "\"format\"");
    expect_error({{"eve", {{"kind", "quantum_cloner"}}}}, "\"eve.kind\"");
    expect_error({{"eve", {{"kind", "intercept_resend"}, {"legs", {"sideways"}}}}},
                 "\"eve.legs\"");
    expect_error({{"decoy_source", "telepathy"}}, "\"decoy_source\"");
    expect_error({{"topology", {{"kind", "star"}}}}, "\"topology.branches\"");
}

TEST_CASE("config file loading") {
    CHECK_THROWS_AS(load_run_config("/nonexistent/qsdc-config.json"), std::invalid_argument);

    auto path = std::filesystem::temp_directory_path() / "qsdc_runner_test_config.json";
    {
        std::ofstream out(path);
        out << R"({"d": 3, "m_bases": 2, "n_pairs": 96, "trials": 2, "seed": 5})";
    }
    RunConfig c = load_run_config(path.string());
    CHECK(c.session.d == 3);
    CHECK(c.session.n_pairs == 96);
    CHECK(c.trials == 2);
    {
        std::ofstream out(path);
        out << "{not json";
    }
    CHECK_THROWS_AS(load_run_config(path.string()), std::invalid_argument);
    std::filesystem::remove(path);
}

TEST_CASE("config echo resolves defaults") {
    RunConfig c = parse_run_config(json{{"d", 2}, {"n_pairs", 64}});
    auto echoed = config_to_json(c);
    CHECK(echoed["d"] == 2);
    CHECK(echoed["decoy_count"] == 7);   // ceil(0.1 * 64)
    CHECK(echoed["s_e2_count"] == 7);
    CHECK(echoed["eve"]["kind"] == "none");
    CHECK(echoed["decoy_source"] == "fresh_preparation");
}

TEST_CASE("honest multi-trial run") {
    RunConfig c = parse_run_config(json{{"d", 3}, {"m_bases", 2}, {"n_pairs", 64},
                                        {"trials", 5}, {"seed", 11}});
    RunReport rep = cmd_run(c);
    const auto& j = rep.json;
    CHECK(j["schema_version"] == 1);
    CHECK(j["config"]["d"] == 3);
    REQUIRE(j["trials"].size() == 5);
    for (int t = 0; t < 5; ++t) {
        const auto& row = j["trials"][t];
        CHECK(row["trial"] == t);
        CHECK(row["seed"] == 11 + t);
        CHECK(row["status"] == "completed");
        CHECK(row["first_check"]["errors"] == 0);
        CHECK(row["decoy_check"]["errors"] == 0);
        CHECK(row["final_check"]["errors"] == 0);
        CHECK(row["message_fidelity"] == 1.0);
        CHECK(row["message_symbols"].get<int>() > 0);
    }
    const auto& agg = j["aggregate"];
    CHECK(agg["abort_fraction"] == 0.0);
    CHECK(agg["mean_decoy_check_rate"] == 0.0);
    CHECK(agg["message_fidelity"] == 1.0);
    CHECK(agg["theoretical_eve_error_rate"].get<double>() == doctest::Approx(1.0 / 3));
    CHECK(agg["empirical_decoy"]["errors"] == 0);

    auto lines = split_lines(rep.csv);
    REQUIRE(lines.size() == 6);  // header + 5 trials
    CHECK(lines[0].rfind("trial,seed,status", 0) == 0);
    auto fields = split_csv(lines[1]);
    CHECK(fields[2] == "completed");
}

TEST_CASE("reports are deterministic and parallel-safe") {
    RunConfig c = parse_run_config(json{{"d", 3}, {"m_bases", 4}, {"n_pairs", 96},
                                        {"trials", 6}, {"seed", 77},
                                        {"eve", "intercept_resend"}});
    RunReport a = cmd_run(c, 1, true);
    RunReport b = cmd_run(c, 3, true);
    CHECK(a.json.dump() == b.json.dump());
    CHECK(a.csv == b.csv);
}

TEST_CASE("sweep grid") {
    RunConfig base = parse_run_config(json{{"n_pairs", 64}, {"trials", 2}, {"seed", 3}});

    SUBCASE("empty spec yields a single base row") {
        auto lines = split_lines(cmd_sweep(base, json::object()));
        REQUIRE(lines.size() == 2);
        auto fields = split_csv(lines[1]);
        CHECK(fields[0] == "2");
        CHECK(fields[3] == "none");
        CHECK(fields[4] == "yes");
    }

    SUBCASE("theoretical column follows the closed form") {
        json spec = {{"d", {3}}, {"m_bases", {2, 3, 4}}, {"eve", {"intercept_resend"}}};
        auto lines = split_lines(cmd_sweep(base, spec));
        REQUIRE(lines.size() == 4);
        std::vector<double> expected = {1.0 / 3, 4.0 / 9, 0.5};
        for (int i = 0; i < 3; ++i) {
            auto fields = split_csv(lines[1 + i]);
            REQUIRE(fields.size() == 11);
            CHECK(fields[0] == "3");
            CHECK(fields[3] == "intercept_resend");
            CHECK(fields[4] == "yes");
            CHECK(std::stod(fields[10]) == doctest::Approx(expected[i]));
            CHECK(std::stod(fields[7]) >= 0.0);  // empirical decoy rate present
        }
    }

    SUBCASE("unsupported points are marked, the sweep continues") {
        json spec = {{"d", {5}}, {"m_bases", {2, 3}}};
        auto lines = split_lines(cmd_sweep(base, spec));
        REQUIRE(lines.size() == 3);
        CHECK(split_csv(lines[1])[4] == "yes");   // (5, 2)
        CHECK(split_csv(lines[2])[4] == "no");    // (5, 3) beyond the envelope
        CHECK(split_csv(lines[2]).size() == 11);
    }

    SUBCASE("malformed axis is rejected") {
        CHECK_THROWS_AS(cmd_sweep(base, json{{"d", 3}}), std::invalid_argument);
    }
}

TEST_CASE("verify command") {
    std::string out;
    CHECK(cmd_verify(out));
    auto lines = split_lines(out);
    REQUIRE(lines.size() == 5);
    for (const auto& line : lines) CHECK(line.rfind("PASS", 0) == 0);
    CHECK(out.find("bell_identity_d2_to_d5") != std::string::npos);
    CHECK(out.find("composition_matches_matrix_product") != std::string::npos);

    // negative control: a perturbed basis vector must be caught
    std::string bad;
    CHECK_FALSE(cmd_verify(bad, true));
    CHECK(bad.find("FAIL  builtin_bases_mutually_unbiased") != std::string::npos);
}
