#include "qsdc/runner.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <thread>

namespace qsdc {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

[[noreturn]] void bad_field(const std::string& field, const std::string& why) {
    throw std::invalid_argument("config field \"" + field + "\": " + why);
}

template <typename T>
T get_field(const json& j, const std::string& field, T fallback) {
    if (!j.contains(field)) return fallback;
    try {
        return j.at(field).get<T>();
    } catch (const json::exception&) {
        bad_field(field, "wrong type");
    }
}

ChannelLeg parse_leg(const std::string& s) {
    if (s == "alice_to_charlie") return ChannelLeg::AliceToCharlie;
    if (s == "charlie_to_bob") return ChannelLeg::CharlieToBob;
    if (s == "bob_to_alice") return ChannelLeg::BobToAlice;
    bad_field("eve.legs", "unknown leg \"" + s + "\"");
}

std::string eve_kind_name(EveStrategy::Kind k) {
    switch (k) {
        case EveStrategy::Kind::None: return "none";
        case EveStrategy::Kind::InterceptResendMUB: return "intercept_resend";
        case EveStrategy::Kind::DishonestServer: return "dishonest_server";
    }
    return "?";
}

struct TrialSummary {
    std::uint64_t seed = 0;
    bool completed = false;
    std::string aborted_at;
    std::optional<stats::RateEstimate> first, decoy, final_;
    double fidelity = 0.0;
    int message_symbols = 0;
    EveReport eve;
    std::string transcript_ndjson;
};

ordered_json rate_to_json(const std::optional<stats::RateEstimate>& r) {
    if (!r || r->samples == 0) return nullptr;
    return ordered_json{{"errors", r->errors},
                        {"samples", r->samples},
                        {"rate", r->rate},
                        {"ci95", {r->ci_lo, r->ci_hi}}};
}

TrialSummary run_trial(const RunConfig& config, std::uint64_t seed, bool keep_transcript) {
    SessionConfig sc = config.session;
    sc.seed = seed;

    SessionResult res;
    if (config.topology) {
        Topology topo = build_topology(*config.topology);
        SessionRoute route =
            route_session(topo, config.topology_sender, config.topology_receiver);
        res = run_network_session(topo, route, sc);
    } else {
        res = run_session(sc);
    }

    TrialSummary t;
    t.seed = seed;
    t.completed = res.status == SessionResult::Status::Completed;
    t.aborted_at = res.aborted_at;
    t.first = res.first_check_rate;
    t.decoy = res.decoy_check_rate;
    t.final_ = res.final_check_rate;
    t.message_symbols = t.completed ? static_cast<int>(res.decoded_message.size()) : 0;
    if (t.completed && !res.encoded_message.empty()) {
        std::size_t hits = 0;
        for (std::size_t i = 0;
             i < res.encoded_message.size() && i < res.decoded_message.size(); ++i)
            if (res.encoded_message[i] == res.decoded_message[i]) ++hits;
        t.fidelity = static_cast<double>(hits) / res.encoded_message.size();
    } else if (t.completed) {
        t.fidelity = 1.0;  // zero-length message
    }
    t.eve = res.eve;
    if (keep_transcript) t.transcript_ndjson = res.transcript.to_ndjson();
    return t;
}

std::vector<TrialSummary> run_trials(const RunConfig& config, int parallel,
                                     bool keep_transcripts) {
    if (config.trials < 1) bad_field("trials", "must be >= 1");
    std::vector<TrialSummary> out(config.trials);
    auto worker = [&](int begin, int step) {
        for (int t = begin; t < config.trials; t += step)
            out[t] = run_trial(config, config.session.seed + static_cast<std::uint64_t>(t),
                               keep_transcripts);
    };
    if (parallel <= 1) {
        worker(0, 1);
    } else {
        std::vector<std::thread> threads;
        for (int w = 0; w < parallel; ++w) threads.emplace_back(worker, w, parallel);
        for (auto& th : threads) th.join();
    }
    return out;
}

}  // namespace

RunConfig parse_run_config(const json& j) {
    RunConfig c;
    auto& s = c.session;
    s.d = get_field<int>(j, "d", 2);
    s.m_bases = get_field<int>(j, "m_bases", 2);
    s.n_pairs = get_field<int>(j, "n_pairs", 64);
    s.p_check = get_field<double>(j, "p_check", 0.25);
    s.decoy_count = get_field<int>(j, "decoy_count", -1);
    s.s_e2_count = get_field<int>(j, "s_e2_count", -1);
    s.epsilon_t = get_field<double>(j, "epsilon_t", 0.05);
    s.seed = get_field<std::uint64_t>(j, "seed", 0);
    c.trials = get_field<int>(j, "trials", 1);
    if (c.trials < 1) bad_field("trials", "must be >= 1");
    c.format = get_field<std::string>(j, "format", "json");
    if (c.format != "json" && c.format != "csv") bad_field("format", "must be json or csv");

    if (j.contains("decoy_source")) {
        const auto& ds = j.at("decoy_source");
        std::string kind = ds.is_string() ? ds.get<std::string>()
                                          : get_field<std::string>(ds, "kind", "");
        if (kind == "fresh_preparation") {
            s.decoy_source = SessionConfig::DecoySource::FreshPreparation;
        } else if (kind == "by_measurement") {
            s.decoy_source = SessionConfig::DecoySource::ByMeasurement;
            if (ds.is_object()) {
                s.n1 = get_field<int>(ds, "n1", -1);
                s.n2 = get_field<int>(ds, "n2", -1);
            }
        } else {
            bad_field("decoy_source", "must be fresh_preparation or by_measurement");
        }
    }

    if (j.contains("eve")) {
        const auto& e = j.at("eve");
        std::string kind = e.is_string() ? e.get<std::string>()
                                         : get_field<std::string>(e, "kind", "none");
        if (kind == "none") {
            s.eve.kind = EveStrategy::Kind::None;
        } else if (kind == "intercept_resend") {
            s.eve.kind = EveStrategy::Kind::InterceptResendMUB;
            auto legs = get_field<std::vector<std::string>>(e, "legs", {"charlie_to_bob"});
            for (const auto& l : legs) s.eve.legs.insert(parse_leg(l));
        } else if (kind == "dishonest_server") {
            s.eve.kind = EveStrategy::Kind::DishonestServer;
        } else {
            bad_field("eve.kind", "unknown strategy \"" + kind + "\"");
        }
    }

    if (j.contains("topology")) {
        const auto& t = j.at("topology");
        TopologySpec spec;
        spec.kind = get_field<std::string>(t, "kind", "star");
        if (!t.contains("branches") || !t.at("branches").is_array())
            bad_field("topology.branches", "required array");
        for (const auto& b : t.at("branches")) {
            Branch br;
            br.server_id = get_field<int>(b, "server_id", -1);
            br.user_ids = get_field<std::vector<int>>(b, "user_ids", {});
            spec.branches.push_back(std::move(br));
        }
        c.topology = std::move(spec);
        c.topology_sender = get_field<int>(t, "sender_id", -1);
        c.topology_receiver = get_field<int>(t, "receiver_id", -1);
    }
    return c;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open config file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw std::invalid_argument("config file is not valid JSON: " + std::string(e.what()));
    }
    return parse_run_config(j);
}

ordered_json config_to_json(const RunConfig& config) {
    SessionConfig s = config.session.resolved();
    ordered_json j;
    j["d"] = s.d;
    j["m_bases"] = s.m_bases;
    j["n_pairs"] = s.n_pairs;
    j["p_check"] = s.p_check;
    j["decoy_count"] = s.decoy_count;
    j["s_e2_count"] = s.s_e2_count;
    j["epsilon_t"] = s.epsilon_t;
    if (s.decoy_source == SessionConfig::DecoySource::ByMeasurement)
        j["decoy_source"] = {{"kind", "by_measurement"}, {"n1", s.n1}, {"n2", s.n2}};
    else
        j["decoy_source"] = "fresh_preparation";
    ordered_json eve;
    eve["kind"] = eve_kind_name(s.eve.kind);
    if (s.eve.kind == EveStrategy::Kind::InterceptResendMUB) {
        std::vector<std::string> legs;
        for (auto l : s.eve.legs) legs.push_back(to_string(l));
        eve["legs"] = legs;
    }
    j["eve"] = eve;
    j["trials"] = config.trials;
    j["seed"] = s.seed;
    if (config.topology) {
        ordered_json t;
        t["kind"] = config.topology->kind;
        t["branches"] = ordered_json::array();
        for (const auto& b : config.topology->branches)
            t["branches"].push_back({{"server_id", b.server_id}, {"user_ids", b.user_ids}});
        t["sender_id"] = config.topology_sender;
        t["receiver_id"] = config.topology_receiver;
        j["topology"] = t;
    }
    return j;
}

RunReport cmd_run(const RunConfig& config, int parallel, bool include_transcripts) {
    auto trials = run_trials(config, parallel, include_transcripts);
    SessionConfig resolved = config.session.resolved();

    ordered_json report;
    report["schema_version"] = 1;
    report["config"] = config_to_json(config);

    int aborts = 0;
    std::uint64_t decoy_errors = 0, decoy_samples = 0;
    double sum_first = 0, sum_decoy = 0, sum_final = 0, sum_fid = 0;
    int n_first = 0, n_decoy = 0, n_final = 0, n_completed = 0;

    report["trials"] = ordered_json::array();
    for (std::size_t t = 0; t < trials.size(); ++t) {
        const auto& tr = trials[t];
        ordered_json row;
        row["trial"] = t;
        row["seed"] = tr.seed;
        row["status"] = tr.completed ? "completed" : "aborted";
        if (!tr.completed) row["aborted_at"] = tr.aborted_at;
        row["first_check"] = rate_to_json(tr.first);
        row["decoy_check"] = rate_to_json(tr.decoy);
        row["final_check"] = rate_to_json(tr.final_);
        row["message_symbols"] = tr.message_symbols;
        row["message_fidelity"] = tr.completed ? ordered_json(tr.fidelity) : nullptr;
        row["eve"] = {{"key_recovery_rate", tr.eve.key_recovery_rate},
                      {"message_recovery_rate", tr.eve.message_recovery_rate}};
        if (include_transcripts) row["transcript"] = tr.transcript_ndjson;
        report["trials"].push_back(std::move(row));

        if (!tr.completed) ++aborts;
        if (tr.completed) {
            ++n_completed;
            sum_fid += tr.fidelity;
        }
        if (tr.first && tr.first->samples) { sum_first += tr.first->rate; ++n_first; }
        if (tr.decoy && tr.decoy->samples) {
            sum_decoy += tr.decoy->rate;
            ++n_decoy;
            decoy_errors += tr.decoy->errors;
            decoy_samples += tr.decoy->samples;
        }
        if (tr.final_ && tr.final_->samples) { sum_final += tr.final_->rate; ++n_final; }
    }

    ordered_json agg;
    agg["trials"] = config.trials;
    agg["abort_fraction"] = static_cast<double>(aborts) / config.trials;
    agg["mean_first_check_rate"] = n_first ? ordered_json(sum_first / n_first) : nullptr;
    agg["mean_decoy_check_rate"] = n_decoy ? ordered_json(sum_decoy / n_decoy) : nullptr;
    agg["mean_final_check_rate"] = n_final ? ordered_json(sum_final / n_final) : nullptr;
    agg["message_fidelity"] = n_completed ? ordered_json(sum_fid / n_completed) : nullptr;
    agg["theoretical_eve_error_rate"] =
        stats::theoretical_eve_error_rate(resolved.d, resolved.m_bases);
    if (decoy_samples > 0) {
        auto est = stats::estimate_rate(decoy_errors, decoy_samples);
        agg["empirical_decoy"] = {{"errors", est.errors},
                                  {"samples", est.samples},
                                  {"rate", est.rate},
                                  {"ci95", {est.ci_lo, est.ci_hi}}};
    } else {
        agg["empirical_decoy"] = nullptr;
    }
    report["aggregate"] = std::move(agg);

    RunReport out;
    out.json = std::move(report);

    std::ostringstream csv;
    csv << "trial,seed,status,first_rate,decoy_rate,final_rate,message_symbols,"
           "message_fidelity,theoretical_eve_error_rate\n";
    double theo = stats::theoretical_eve_error_rate(resolved.d, resolved.m_bases);
    for (std::size_t t = 0; t < trials.size(); ++t) {
        const auto& tr = trials[t];
        auto rate_or = [](const std::optional<stats::RateEstimate>& r) {
            return r && r->samples ? std::to_string(r->rate) : std::string();
        };
        csv << t << ',' << tr.seed << ',' << (tr.completed ? "completed" : "aborted") << ','
            << rate_or(tr.first) << ',' << rate_or(tr.decoy) << ',' << rate_or(tr.final_)
            << ',' << tr.message_symbols << ','
            << (tr.completed ? std::to_string(tr.fidelity) : std::string()) << ',' << theo
            << '\n';
    }
    out.csv = csv.str();
    return out;
}

std::string cmd_sweep(const RunConfig& base, const json& sweep_spec, int parallel) {
    auto axis = [&](const std::string& name, std::vector<json> fallback) {
        if (!sweep_spec.contains(name)) return fallback;
        if (!sweep_spec.at(name).is_array()) bad_field("sweep." + name, "must be an array");
        std::vector<json> vals;
        for (const auto& v : sweep_spec.at(name)) vals.push_back(v);
        return vals;
    };
    auto ds = axis("d", {json(base.session.d)});
    auto ms = axis("m_bases", {json(base.session.m_bases)});
    auto decoys = axis("decoy_count", {json(base.session.decoy_count)});
    auto eves = axis("eve", {json()});

    std::ostringstream csv;
    csv << "d,m_bases,decoy_count,eve,supported,trials,abort_fraction,"
           "empirical_decoy_rate,ci_lo,ci_hi,theoretical_eve_error_rate\n";
    for (const auto& dv : ds)
        for (const auto& mv : ms)
            for (const auto& dcv : decoys)
                for (const auto& ev : eves) {
                    RunConfig c = base;
                    c.session.d = dv.get<int>();
                    c.session.m_bases = mv.get<int>();
                    c.session.decoy_count = dcv.get<int>();
                    std::string eve_name = "base";
                    if (!ev.is_null()) {
                        json patched = {{"eve", ev}};
                        RunConfig tmp = parse_run_config(patched);
                        c.session.eve = tmp.session.eve;
                        eve_name = ev.is_string() ? ev.get<std::string>()
                                                  : ev.value("kind", "?");
                    } else {
                        eve_name = eve_kind_name(c.session.eve.kind);
                    }
                    csv << c.session.d << ',' << c.session.m_bases << ','
                        << c.session.decoy_count << ',' << eve_name << ',';
                    try {
                        builtin_basis_set(c.session.d, c.session.m_bases);
                        c.session.resolved();
                    } catch (const std::exception&) {
                        csv << "no,,,,,," << '\n';
                        continue;
                    }
                    auto report = cmd_run(c, parallel);
                    const auto& agg = report.json["aggregate"];
                    csv << "yes," << c.trials << ',' << agg["abort_fraction"].dump() << ',';
                    if (agg["empirical_decoy"].is_null())
                        csv << ",,";
                    else
                        csv << agg["empirical_decoy"]["rate"].dump() << ','
                            << agg["empirical_decoy"]["ci95"][0].dump() << ','
                            << agg["empirical_decoy"]["ci95"][1].dump();
                    csv << ',' << agg["theoretical_eve_error_rate"].dump() << '\n';
                }
    return csv.str();
}

bool cmd_verify(std::string& out, bool perturb_hadamard) {
    std::ostringstream os;
    bool all_ok = true;
    auto check = [&](const std::string& name, bool ok) {
        os << (ok ? "PASS" : "FAIL") << "  " << name << '\n';
        all_ok = all_ok && ok;
    };

    {  // (I (x) U_nm) Psi_00 == Psi_nm, d <= 5
        bool ok = true;
        for (int d = 2; d <= 5; ++d) {
            PairState psi00 = make_bell_state(0, 0, d);
            for (int n = 0; n < d && ok; ++n)
                for (int m = 0; m < d && ok; ++m) {
                    PairState got = apply_to_photon_b(psi00, pauli_unitary(n, m, d));
                    PairState want = make_bell_state(n, m, d);
                    for (std::size_t i = 0; i < got.amps.size(); ++i)
                        if (std::abs(got.amps[i] - want.amps[i]) > kAlgebraTol) ok = false;
                }
        }
        check("bell_identity_d2_to_d5", ok);
    }
    {  // H_d|j> = |j>_x, d <= 5
        bool ok = true;
        for (int d = 2; d <= 5 && ok; ++d) {
            Unitary h = hadamard_matrix(d);
            BasisSet set = builtin_basis_set(d, 2);
            for (int j = 0; j < d && ok; ++j) {
                QuditState got = apply_unitary(computational_ket(j, d), h);
                for (int k = 0; k < d; ++k)
                    if (std::abs(got.amps[k] - set.bases[1].vectors[j].amps[k]) > kAlgebraTol)
                        ok = false;
            }
        }
        check("hadamard_maps_z_to_x", ok);
    }
    {  // built-in sets pairwise unbiased
        bool ok = true;
        for (auto [d, m] : std::vector<std::pair<int, int>>{{2, 3}, {3, 4}, {4, 2}, {5, 2}}) {
            BasisSet set = builtin_basis_set(d, m);
            if (perturb_hadamard && set.count() >= 2)
                set.bases[1].vectors[0].amps[0] += cplx{0.05, 0.0};
            for (int a = 0; a < set.count() && ok; ++a)
                for (int b = a + 1; b < set.count() && ok; ++b)
                    for (const auto& va : set.bases[a].vectors)
                        for (const auto& vb : set.bases[b].vectors)
                            if (std::abs(std::norm(inner(va, vb)) - 1.0 / d) > 1e-9) {
                                ok = false;
                                break;
                            }
        }
        check("builtin_bases_mutually_unbiased", ok);
    }
    {  // composition oracle, exhaustive d in {2,3,5}
        bool ok = true;
        for (int d : {2, 3, 5})
            for (int n1 = 0; n1 < d && ok; ++n1)
                for (int m1 = 0; m1 < d && ok; ++m1)
                    for (int n2 = 0; n2 < d && ok; ++n2)
                        for (int m2 = 0; m2 < d && ok; ++m2) {
                            auto [idx, phase] = compose_indices({n1, m1, d}, {n2, m2, d});
                            Unitary u1 = pauli_unitary(n1, m1, d);
                            Unitary u2 = pauli_unitary(n2, m2, d);
                            Unitary expect = pauli_unitary(idx.n, idx.m, d);
                            for (int r = 0; r < d && ok; ++r)
                                for (int cc = 0; cc < d; ++cc) {
                                    cplx prod = 0.0;
                                    for (int k = 0; k < d; ++k)
                                        prod += u2.at(r, k) * u1.at(k, cc);
                                    if (std::abs(prod - phase * expect.at(r, cc)) >
                                        kAlgebraTol) {
                                        ok = false;
                                        break;
                                    }
                                }
                        }
        check("composition_matches_matrix_product", ok);
    }
    {  // honest end-to-end, d in {2,3}
        bool ok = true;
        for (int d : {2, 3}) {
            SessionConfig c;
            c.d = d;
            c.m_bases = 2;
            c.n_pairs = 64;
            c.seed = 7;
            SessionResult r = run_session(c);
            if (r.status != SessionResult::Status::Completed) ok = false;
            if (r.decoded_message != r.encoded_message) ok = false;
        }
        check("honest_session_roundtrip", ok);
    }

    out = os.str();
    return all_ok;
}

}  // namespace qsdc
