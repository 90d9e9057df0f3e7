#pragma once

#include <optional>
#include <set>
#include <vector>

#include "qsdc/qudit.hpp"
#include "qsdc/sequence.hpp"
#include "qsdc/transcript.hpp"

namespace qsdc {

enum class ChannelLeg { AliceToCharlie, CharlieToBob, BobToAlice };

const char* to_string(ChannelLeg leg);

struct EveStrategy {
    enum class Kind { None, InterceptResendMUB, DishonestServer };
    Kind kind = Kind::None;
    std::set<ChannelLeg> legs;  // InterceptResendMUB only
};

// Per-slot guesses; untouched slots stay at the uniform 1/d^2 prior.
struct EveKnowledge {
    std::vector<std::optional<PauliIndex>> guessed_key;
    std::vector<std::optional<PauliIndex>> guessed_message;
    std::vector<double> confidence;

    void resize(int n_slots, int d) {
        guessed_key.assign(n_slots, std::nullopt);
        guessed_message.assign(n_slots, std::nullopt);
        confidence.assign(n_slots, 1.0 / (static_cast<double>(d) * d));
    }
};

struct EveReport {
    double key_recovery_rate = 0.0;
    double message_recovery_rate = 0.0;
};

// Fraction of slots (with defined ground truth) where the guess is right.
// Undecided guesses are scored by drawing uniformly from the rng.
EveReport eve_report(const EveKnowledge& knowledge,
                     const std::vector<std::optional<PauliIndex>>& true_key,
                     const std::vector<std::optional<PauliIndex>>& true_message,
                     int d, RandomStream& rng);

// Measure every in-transit photon of S_B in a uniformly random basis from the
// set and forward the outcome eigenstate. Entangled halves collapse their
// retained partner.
void intercept_resend_mub(QuantumStore& store, PhotonSequence& sb, const BasisSet& set,
                          ChannelLeg leg, EveKnowledge& knowledge, RandomStream& rng,
                          Transcript& transcript);

// The server as the adversary: she holds S_A and hears every announcement.
// On the Charlie->Bob leg she Bell-measures each intercepted photon against
// her retained partner (an ancilla Psi_00 half when no partner survives),
// reading U_C off entangled slots, and forwards a fresh Psi_00 half whose
// partner she keeps. On the Bob->Alice leg she Bell-measures the returning
// photons against those kept partners, reading Bob's operation, and later
// fabricates the public Bell announcements from her own readings.
class DishonestServerAttack {
public:
    void on_charlie_to_bob(QuantumStore& store, PhotonSequence& sa, PhotonSequence& sb,
                           RandomStream& rng, Transcript& transcript);
    void on_bob_to_alice(QuantumStore& store, PhotonSequence& sb, RandomStream& rng,
                         Transcript& transcript);

    bool has_fabricated_results() const { return engaged_; }
    // Fabricated S6 announcement for a slot; nullopt when she read nothing there.
    std::optional<PauliIndex> fabricated_result(int slot) const;

    const EveKnowledge& knowledge() const { return knowledge_; }
    EveKnowledge& knowledge() { return knowledge_; }

private:
    bool engaged_ = false;
    EveKnowledge knowledge_;
    std::vector<std::optional<PauliIndex>> read_bob_ops_;
};

}  // namespace qsdc
