#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "qsdc/runner.hpp"

namespace {

void write_output(const std::string& text, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << text;
        if (!text.empty() && text.back() != '\n') std::cout << '\n';
    } else {
        std::ofstream out(out_path, std::ios::binary);
        if (!out) throw std::invalid_argument("cannot open output file: " + out_path);
        out << text;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"d-dimensional QSDC network simulator"};
    app.require_subcommand(1);

    std::string config_path, out_path, sweep_path, transcript_out, format;
    std::uint64_t seed_override = 0;
    bool seed_set = false;
    int parallel = 1;
    bool perturb = false;

    auto* run = app.add_subcommand("run", "execute sessions from a config file");
    run->add_option("--config", config_path, "JSON config file")->required();
    run->add_option("--out", out_path, "write the report here instead of stdout");
    run->add_option("--format", format, "json|csv (overrides config)");
    run->add_option("--seed", seed_override, "override the config seed")
        ->each([&](const std::string&) { seed_set = true; });
    run->add_option("--parallel", parallel, "run independent trials on N threads");
    run->add_option("--transcript-out", transcript_out,
                    "write per-trial NDJSON transcripts to this file");

    auto* sweep = app.add_subcommand("sweep", "grid sweep, one CSV row per point");
    sweep->add_option("--config", config_path, "JSON base config file")->required();
    sweep->add_option("--sweep", sweep_path, "JSON sweep spec (subset of d, m_bases, "
                                             "decoy_count, eve)");
    sweep->add_option("--out", out_path, "write the CSV here instead of stdout");
    sweep->add_option("--seed", seed_override, "override the config seed")
        ->each([&](const std::string&) { seed_set = true; });
    sweep->add_option("--parallel", parallel, "run independent trials on N threads");

    auto* verify = app.add_subcommand("verify", "run the built-in invariant suite");
    verify->add_flag("--self-test-perturb", perturb, "negative control: perturb H_d")
        ->group("");  // hidden

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand(run)) {
            qsdc::RunConfig config = qsdc::load_run_config(config_path);
            if (seed_set) config.session.seed = seed_override;
            if (!format.empty()) {
                if (format != "json" && format != "csv")
                    throw std::invalid_argument("--format must be json or csv");
                config.format = format;
            }
            bool want_transcripts = !transcript_out.empty();
            qsdc::RunReport report = qsdc::cmd_run(config, parallel, want_transcripts);
            if (want_transcripts) {
                std::string all;
                for (auto& row : report.json["trials"]) {
                    all += row["transcript"].get<std::string>();
                    row.erase("transcript");
                }
                write_output(all, transcript_out);
            }
            write_output(config.format == "csv" ? report.csv : report.json.dump(2) + "\n",
                         out_path);
        } else if (app.got_subcommand(sweep)) {
            qsdc::RunConfig config = qsdc::load_run_config(config_path);
            if (seed_set) config.session.seed = seed_override;
            nlohmann::json spec = nlohmann::json::object();
            if (!sweep_path.empty()) {
                std::ifstream in(sweep_path);
                if (!in) throw std::invalid_argument("cannot open sweep file: " + sweep_path);
                in >> spec;
            }
            write_output(qsdc::cmd_sweep(config, spec, parallel), out_path);
        } else {
            std::string listing;
            bool ok = qsdc::cmd_verify(listing, perturb);
            std::cout << listing;
            return ok ? 0 : 1;
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
