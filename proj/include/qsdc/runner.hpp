#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "qsdc/netsim.hpp"
#include "qsdc/protocol.hpp"

namespace qsdc {

struct RunConfig {
    SessionConfig session;
    std::optional<TopologySpec> topology;
    int topology_sender = -1;
    int topology_receiver = -1;
    int trials = 1;
    std::string format = "json";  // "json" | "csv"
};

// Parses the canonical config schema:
// {d, m_bases, n_pairs, p_check, decoy_count, s_e2_count, epsilon_t,
//  decoy_source, eve: {kind, legs}, topology, trials, seed}
// Unknown or ill-typed fields raise invalid_argument naming the field.
RunConfig parse_run_config(const nlohmann::json& j);
RunConfig load_run_config(const std::string& path);

nlohmann::ordered_json config_to_json(const RunConfig& config);

struct RunReport {
    nlohmann::ordered_json json;  // schema_version 1
    std::string csv;
};

// Executes `trials` sessions with seeds seed, seed+1, ... and aggregates.
// `parallel` > 1 runs independent trials on that many threads.
RunReport cmd_run(const RunConfig& config, int parallel = 1,
                  bool include_transcripts = false);

// One row per grid point over any subset of {d, m_bases, decoy_count, eve};
// unsupported (d, M) points are marked and skipped, the sweep continues.
std::string cmd_sweep(const RunConfig& base, const nlohmann::json& sweep_spec,
                      int parallel = 1);

// Built-in invariant suite; prints one line per property to `out`.
// `perturb_hadamard` is a negative-control hook for tests.
bool cmd_verify(std::string& out, bool perturb_hadamard = false);

}  // namespace qsdc
