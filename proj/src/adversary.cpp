#include "qsdc/adversary.hpp"

namespace qsdc {

const char* to_string(ChannelLeg leg) {
    switch (leg) {
        case ChannelLeg::AliceToCharlie: return "alice_to_charlie";
        case ChannelLeg::CharlieToBob: return "charlie_to_bob";
        case ChannelLeg::BobToAlice: return "bob_to_alice";
    }
    return "?";
}

EveReport eve_report(const EveKnowledge& knowledge,
                     const std::vector<std::optional<PauliIndex>>& true_key,
                     const std::vector<std::optional<PauliIndex>>& true_message,
                     int d, RandomStream& rng) {
    auto score = [&](const std::vector<std::optional<PauliIndex>>& guesses,
                     const std::vector<std::optional<PauliIndex>>& truth) {
        std::uint64_t hits = 0, total = 0;
        for (std::size_t i = 0; i < truth.size(); ++i) {
            if (!truth[i]) continue;
            ++total;
            PauliIndex guess{rng.uniform_int(d), rng.uniform_int(d), d};
            if (i < guesses.size() && guesses[i]) guess = *guesses[i];
            if (guess.n == truth[i]->n && guess.m == truth[i]->m) ++hits;
        }
        return total == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(total);
    };
    EveReport r;
    r.key_recovery_rate = score(knowledge.guessed_key, true_key);
    r.message_recovery_rate = score(knowledge.guessed_message, true_message);
    return r;
}

void intercept_resend_mub(QuantumStore& store, PhotonSequence& sb, const BasisSet& set,
                          ChannelLeg leg, EveKnowledge& knowledge, RandomStream& rng,
                          Transcript& transcript) {
    (void)knowledge;  // basis outcomes carry no operator-index information
    int touched = 0;
    for (auto& slot : sb.slots) {
        if (slot.kind == SlotState::Kind::EntangledHalf) {
            auto& pair = store.pairs[slot.pair_id];
            if (!pair) continue;
            int b = rng.uniform_int(set.count());
            auto res = measure_pair_local(*pair, PhotonTag::B, set.bases[b], rng);
            // retained partner collapses; the forwarded photon is the eigenstate
            *pair = tensor(res.partner, set.bases[b].vectors[res.outcome]);
            ++touched;
        } else if (slot.kind == SlotState::Kind::Decoy) {
            auto& single = store.singles[slot.single_id];
            if (!single) continue;
            int b = rng.uniform_int(set.count());
            auto res = measure_single(*single, set.bases[b], rng);
            *single = res.collapsed;
            ++touched;
        }
    }
    transcript.add("eve", "intercept_resend",
                   {{"leg", to_string(leg)}, {"photons_measured", touched}}, false);
}

void DishonestServerAttack::on_charlie_to_bob(QuantumStore& store, PhotonSequence& sa,
                                              PhotonSequence& sb, RandomStream& rng,
                                              Transcript& transcript) {
    const int d = store.dim;
    const int n = static_cast<int>(sb.slots.size());
    engaged_ = true;
    knowledge_.resize(n, d);
    read_bob_ops_.assign(n, std::nullopt);

    int read_exact = 0;
    for (int i = 0; i < n; ++i) {
        auto& slot = sb.slots[i];
        if (slot.kind == SlotState::Kind::Consumed) continue;
        if (slot.kind == SlotState::Kind::EntangledHalf && store.pairs[slot.pair_id]) {
            PauliIndex outcome = bell_measure(*store.pairs[slot.pair_id], rng);
            store.pairs[slot.pair_id].reset();
            knowledge_.guessed_key[i] = outcome;
            knowledge_.confidence[i] = 1.0;
            ++read_exact;
        } else {
            // No retained partner (a decoy or a displaced slot): she pairs the
            // intercepted photon with an ancilla Psi_00 half. Her side of that
            // measurement is maximally mixed, so the Bell outcome is uniform.
            PauliIndex outcome{rng.uniform_int(d), rng.uniform_int(d), d};
            knowledge_.guessed_key[i] = outcome;
            if (slot.kind == SlotState::Kind::Decoy) store.singles[slot.single_id].reset();
        }
        // forward a fresh Psi_00 half and keep its partner
        int anc = store.add_pair(make_bell_state(0, 0, d));
        slot = SlotState{SlotState::Kind::EntangledHalf, anc, -1, {}};
        sa.slots[i] = slot;
    }
    transcript.add("eve", "dishonest_server_intercept",
                   {{"leg", "charlie_to_bob"}, {"slots_read", read_exact}}, false);
}

void DishonestServerAttack::on_bob_to_alice(QuantumStore& store, PhotonSequence& sb,
                                            RandomStream& rng, Transcript& transcript) {
    int read = 0;
    for (std::size_t i = 0; i < sb.slots.size(); ++i) {
        auto& slot = sb.slots[i];
        if (slot.kind != SlotState::Kind::EntangledHalf) continue;
        if (!store.pairs[slot.pair_id]) continue;
        PauliIndex outcome = bell_measure(*store.pairs[slot.pair_id], rng);
        store.pairs[slot.pair_id].reset();
        read_bob_ops_[i] = outcome;
        knowledge_.guessed_message[i] = outcome;
        ++read;
    }
    transcript.add("eve", "dishonest_server_readout",
                   {{"leg", "bob_to_alice"}, {"slots_read", read}}, false);
}

std::optional<PauliIndex> DishonestServerAttack::fabricated_result(int slot) const {
    if (slot < 0 || slot >= static_cast<int>(read_bob_ops_.size())) return std::nullopt;
    if (!read_bob_ops_[slot] || !knowledge_.guessed_key[slot]) return std::nullopt;
    return compose_indices(*knowledge_.guessed_key[slot], *read_bob_ops_[slot]).first;
}

}  // namespace qsdc
