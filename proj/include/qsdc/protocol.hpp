#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qsdc/adversary.hpp"
#include "qsdc/qudit.hpp"
#include "qsdc/sequence.hpp"
#include "qsdc/stats.hpp"
#include "qsdc/transcript.hpp"

namespace qsdc {

struct SessionConfig {
    int d = 2;
    int m_bases = 2;
    int n_pairs = 64;
    double p_check = 0.25;     // fraction consumed by the first check
    int decoy_count = -1;      // -1: ceil(0.1 * n_pairs)
    int s_e2_count = -1;       // -1: ceil(0.1 * n_pairs)
    double epsilon_t = 0.05;

    enum class DecoySource { FreshPreparation, ByMeasurement };
    DecoySource decoy_source = DecoySource::FreshPreparation;
    int n1 = -1;  // by-measurement first-check samples; -1: ceil(p_check * n_pairs)
    int n2 = -1;  // by-measurement kept decoys; -1: decoy_count

    EveStrategy eve;
    std::uint64_t seed = 0;

    // fills the -1 defaults and checks the envelope; throws on invalid configs
    SessionConfig resolved() const;
};

struct DecoyRecord {
    int slot = -1;
    int basis_id = -1;
    int vector_index = -1;
};

struct SessionResult {
    enum class Status { Completed, Aborted };
    Status status = Status::Completed;
    std::string aborted_at;  // "first_check" | "decoy_check" | "final_check"

    std::vector<PauliIndex> encoded_message;
    std::vector<PauliIndex> decoded_message;

    std::optional<stats::RateEstimate> first_check_rate;
    std::optional<stats::RateEstimate> decoy_check_rate;
    std::optional<stats::RateEstimate> final_check_rate;

    Transcript transcript;

    // audit-only fields; no party reads these during the run
    std::vector<std::optional<PauliIndex>> true_key;
    std::vector<std::optional<PauliIndex>> true_message_by_slot;
    EveReport eve;
    int message_slot_count = 0;
    int dim = 0;
};

// Party state machines sharing one simulated optical line. The step methods
// are exposed individually so tests can drive the protocol piecewise;
// run() executes S1 through S7 with the configured Eve attached.
class Session {
public:
    explicit Session(const SessionConfig& config,
                     std::optional<std::vector<PauliIndex>> message = std::nullopt);

    SessionResult run();

    // --- individual protocol steps ---
    void prepare_sequences();                        // S1
    void transmit(ChannelLeg leg);                   // channel hop (Eve hook)
    stats::RateEstimate first_check();               // S2, fresh-decoy sessions
    stats::RateEstimate first_check_by_measurement();// S2 + decoy production variant
    void encrypt_and_insert_decoys();                // S3
    stats::RateEstimate decoy_check();               // S4
    void encode_message();                           // S5
    void server_bell_measure();                      // S6
    SessionResult final_check_and_decode();          // S7

    // --- state access for tests and reporting ---
    const SessionConfig& config() const { return config_; }
    const QuantumStore& store() const { return store_; }
    const PhotonSequence& sequence_a() const { return sa_; }
    const PhotonSequence& sequence_b() const { return sb_; }
    const std::vector<std::optional<PauliIndex>>& key() const { return key_; }
    const std::vector<DecoyRecord>& decoy_record() const { return decoy_record_; }
    const std::vector<std::optional<PauliIndex>>& check_ops() const { return check_ops_; }
    const std::vector<std::optional<PauliIndex>>& message_by_slot() const {
        return message_by_slot_;
    }
    const std::vector<std::optional<PauliIndex>>& bell_announcements() const {
        return bell_results_;
    }
    Transcript& transcript() { return transcript_; }

private:
    int live_entangled_count() const;
    SessionResult aborted_result(const std::string& check_id);
    void fill_result_common(SessionResult& r);
    void finalize_eve(SessionResult& r);

    SessionConfig config_;
    BasisSet basis_set_;
    QuantumStore store_;
    PhotonSequence sa_;
    PhotonSequence sb_;
    Transcript transcript_;

    RandomStream rng_alice_;
    RandomStream rng_bob_;
    RandomStream rng_charlie_;
    RandomStream rng_eve_;

    // Charlie-private
    std::vector<std::optional<PauliIndex>> key_;
    std::vector<DecoyRecord> decoy_record_;
    // Bob-private
    std::vector<std::optional<PauliIndex>> check_ops_;        // s_e2 ops by slot
    std::vector<std::optional<PauliIndex>> message_by_slot_;
    std::vector<PauliIndex> message_;
    bool message_fixed_ = false;
    // public announcements
    std::vector<std::optional<PauliIndex>> bell_results_;

    std::optional<stats::RateEstimate> first_rate_;
    std::optional<stats::RateEstimate> decoy_rate_;

    EveKnowledge eve_knowledge_;
    DishonestServerAttack dishonest_;
};

// S1-S7 end to end; deterministic given config.seed. If no message is given,
// Bob draws a uniformly random one of the right length.
SessionResult run_session(const SessionConfig& config,
                          std::optional<std::vector<PauliIndex>> message = std::nullopt);

}  // namespace qsdc
