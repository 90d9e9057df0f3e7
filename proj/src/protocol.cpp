#include "qsdc/protocol.hpp"

#include <algorithm>
#include <cmath>

namespace qsdc {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t role_seed(std::uint64_t seed, std::uint64_t role) {
    return splitmix64(seed ^ splitmix64(role));
}

nlohmann::ordered_json index_json(const PauliIndex& p) {
    return {{"n", p.n}, {"m", p.m}};
}

nlohmann::ordered_json rate_json(const stats::RateEstimate& e) {
    return {{"errors", e.errors}, {"samples", e.samples}, {"rate", e.rate}};
}

}  // namespace

SessionConfig SessionConfig::resolved() const {
    SessionConfig c = *this;
    if (c.n_pairs < 1) throw std::invalid_argument("n_pairs must be >= 1");
    if (c.p_check < 0.0 || c.p_check >= 1.0)
        throw std::invalid_argument("p_check must be in [0, 1)");
    if (c.epsilon_t <= 0.0 || c.epsilon_t >= 1.0)
        throw std::invalid_argument("epsilon_t must be in (0, 1)");
    if (c.decoy_count < 0) c.decoy_count = static_cast<int>(std::ceil(0.1 * c.n_pairs));
    if (c.s_e2_count < 0) c.s_e2_count = static_cast<int>(std::ceil(0.1 * c.n_pairs));
    if (c.decoy_source == DecoySource::ByMeasurement) {
        if (c.n1 < 0) c.n1 = static_cast<int>(std::ceil(c.p_check * c.n_pairs));
        if (c.n2 < 0) c.n2 = c.decoy_count;
        if (c.n2 != c.decoy_count)
            throw std::invalid_argument("n2 must equal decoy_count for by-measurement decoys");
        if (c.n1 + c.n2 + c.s_e2_count >= c.n_pairs)
            throw std::invalid_argument("n1 + n2 + s_e2_count must be < n_pairs");
    } else {
        int first = static_cast<int>(std::ceil(c.p_check * c.n_pairs));
        if (first + c.decoy_count + c.s_e2_count >= c.n_pairs)
            throw std::invalid_argument(
                "p_check * n_pairs + decoy_count + s_e2_count must be < n_pairs");
    }
    builtin_basis_set(c.d, c.m_bases);  // envelope check
    return c;
}

Session::Session(const SessionConfig& config, std::optional<std::vector<PauliIndex>> message)
    : config_(config.resolved()),
      basis_set_(builtin_basis_set(config_.d, config_.m_bases)),
      rng_alice_(RandomStream(role_seed(config_.seed, 1))),
      rng_bob_(RandomStream(role_seed(config_.seed, 2))),
      rng_charlie_(RandomStream(role_seed(config_.seed, 3))),
      rng_eve_(RandomStream(role_seed(config_.seed, 4))) {
    if (message) {
        message_ = std::move(*message);
        message_fixed_ = true;
        for (const auto& s : message_)
            if (s.dim != config_.d || s.n < 0 || s.n >= config_.d || s.m < 0 || s.m >= config_.d)
                throw std::invalid_argument("message symbol out of range for dimension");
    }
}

void Session::prepare_sequences() {
    const int d = config_.d;
    const int n = config_.n_pairs;
    store_ = QuantumStore{d, {}, {}};
    sa_ = PhotonSequence{d, {}};
    sb_ = PhotonSequence{d, {}};
    for (int i = 0; i < n; ++i) {
        int id = store_.add_pair(make_bell_state(0, 0, d));
        sa_.slots.push_back({SlotState::Kind::EntangledHalf, id, -1, {}});
        sb_.slots.push_back({SlotState::Kind::EntangledHalf, id, -1, {}});
    }
    key_.assign(n, std::nullopt);
    check_ops_.assign(n, std::nullopt);
    message_by_slot_.assign(n, std::nullopt);
    bell_results_.assign(n, std::nullopt);
    eve_knowledge_.resize(n, d);
    transcript_.add("alice", "prepare", {{"n_pairs", n}, {"d", d}}, false);
}

void Session::transmit(ChannelLeg leg) {
    transcript_.add("channel", "send", {{"leg", to_string(leg)}}, false);
    switch (config_.eve.kind) {
        case EveStrategy::Kind::None:
            break;
        case EveStrategy::Kind::InterceptResendMUB:
            if (config_.eve.legs.count(leg))
                intercept_resend_mub(store_, sb_, basis_set_, leg, eve_knowledge_, rng_eve_,
                                     transcript_);
            break;
        case EveStrategy::Kind::DishonestServer:
            if (leg == ChannelLeg::CharlieToBob)
                dishonest_.on_charlie_to_bob(store_, sa_, sb_, rng_eve_, transcript_);
            else if (leg == ChannelLeg::BobToAlice)
                dishonest_.on_bob_to_alice(store_, sb_, rng_eve_, transcript_);
            break;
    }
}

stats::RateEstimate Session::first_check() {
    const int n = config_.n_pairs;
    const int samples = static_cast<int>(std::ceil(config_.p_check * n));
    auto chosen = rng_charlie_.sample_without_replacement(n, samples);
    transcript_.add("charlie", "first_check_samples",
                    {{"slots", chosen}}, true);

    // restrict to bases with a deterministic outcome pairing inside the set
    auto capable = correlation_capable_bases(basis_set_);
    if (capable.empty())
        throw std::invalid_argument("first_check: no correlation-capable basis in the set");

    std::uint64_t errors = 0;
    for (int slot : chosen) {
        int b = capable[rng_alice_.uniform_int(static_cast<int>(capable.size()))];
        auto& pair = store_.pairs[sb_.slots[slot].pair_id];
        auto alice = measure_pair_local(*pair, PhotonTag::A, basis_set_.bases[b], rng_alice_);
        int sid = store_.add_single(alice.partner);
        pair.reset();
        transcript_.add("alice", "measure_announce",
                        {{"slot", slot}, {"basis", b}, {"outcome", alice.outcome}}, true);

        auto pc = partner_correlation(basis_set_, b);
        auto charlie = measure_single(*store_.singles[sid],
                                      basis_set_.bases[pc.partner_basis_id], rng_charlie_);
        store_.singles[sid].reset();
        if (charlie.outcome != pc.map[alice.outcome]) ++errors;

        sa_.slots[slot] = {SlotState::Kind::Consumed, -1, -1, ConsumedReason::FirstCheck};
        sb_.slots[slot] = {SlotState::Kind::Consumed, -1, -1, ConsumedReason::FirstCheck};
    }
    auto rate = samples > 0 ? stats::estimate_rate(errors, samples) : stats::RateEstimate{};
    first_rate_ = rate;
    transcript_.add("charlie", "first_check_result", rate_json(rate), true);
    return rate;
}

stats::RateEstimate Session::first_check_by_measurement() {
    const int d = config_.d;
    const int n = config_.n_pairs;
    const int n1 = config_.n1;
    const int n2 = config_.n2;
    int live = 0;
    for (const auto& s : sb_.slots)
        if (s.kind == SlotState::Kind::EntangledHalf) ++live;
    if (n1 + n2 > live)
        throw std::invalid_argument("by-measurement sampling exceeds live slots");

    auto chosen = rng_charlie_.sample_without_replacement(n, n1 + n2);
    transcript_.add("charlie", "first_check_samples", {{"slots", chosen}}, true);
    // which of the chosen slots Charlie keeps as decoys stays private
    auto kept_pos = rng_charlie_.sample_without_replacement(n1 + n2, n2);
    std::vector<bool> keep(n1 + n2, false);
    for (int p : kept_pos) keep[p] = true;

    Unitary h = hadamard_matrix(d);
    std::uint64_t errors = 0;
    for (std::size_t ci = 0; ci < chosen.size(); ++ci) {
        int slot = chosen[ci];
        int b = rng_alice_.uniform_int(2);  // Z_d or X_d only in this variant
        auto& pair = store_.pairs[sb_.slots[slot].pair_id];
        auto alice = measure_pair_local(*pair, PhotonTag::A, basis_set_.bases[b], rng_alice_);
        int sid = store_.add_single(alice.partner);
        pair.reset();
        transcript_.add("alice", "measure_announce",
                        {{"slot", slot}, {"basis", b}, {"outcome", alice.outcome}}, true);

        auto pc = partner_correlation(basis_set_, b);
        if (!keep[ci]) {
            auto charlie = measure_single(*store_.singles[sid],
                                          basis_set_.bases[pc.partner_basis_id], rng_charlie_);
            store_.singles[sid].reset();
            if (charlie.outcome != pc.map[alice.outcome]) ++errors;
            sa_.slots[slot] = {SlotState::Kind::Consumed, -1, -1, ConsumedReason::FirstCheck};
            sb_.slots[slot] = {SlotState::Kind::Consumed, -1, -1, ConsumedReason::FirstCheck};
        } else {
            // the collapsed partner becomes a decoy in a state Charlie can
            // predict without measuring it
            int basis_id = pc.partner_basis_id;
            int index = pc.map[alice.outcome];
            if (rng_charlie_.uniform_int(2) == 1) {
                // rotate to the other of Z/X, updating the predicted record
                *store_.singles[sid] = apply_unitary(*store_.singles[sid], h);
                QuditState predicted =
                    apply_unitary(basis_set_.bases[basis_id].vectors[index], h);
                bool found = false;
                for (int nb = 0; nb < 2 && !found; ++nb)
                    for (int l = 0; l < d; ++l)
                        if (std::abs(std::norm(inner(basis_set_.bases[nb].vectors[l],
                                                     predicted)) - 1.0) < 1e-9) {
                            basis_id = nb;
                            index = l;
                            found = true;
                            break;
                        }
                if (!found) throw std::logic_error("rotated decoy is not a basis eigenstate");
            }
            decoy_record_.push_back({slot, basis_id, index});
            sa_.slots[slot] = {SlotState::Kind::Consumed, -1, -1, ConsumedReason::Removed};
            sb_.slots[slot] = {SlotState::Kind::Decoy, -1, sid, {}};
            transcript_.add("charlie", "decoy_kept",
                            {{"slot", slot}, {"basis", basis_id}, {"index", index}}, false);
        }
    }
    auto rate = n1 > 0 ? stats::estimate_rate(errors, n1) : stats::RateEstimate{};
    first_rate_ = rate;
    transcript_.add("charlie", "first_check_result", rate_json(rate), true);
    return rate;
}

void Session::encrypt_and_insert_decoys() {
    const int d = config_.d;
    if (config_.decoy_source == SessionConfig::DecoySource::FreshPreparation &&
        config_.decoy_count > 0) {
        std::vector<int> live;
        for (std::size_t i = 0; i < sb_.slots.size(); ++i)
            if (sb_.slots[i].kind == SlotState::Kind::EntangledHalf)
                live.push_back(static_cast<int>(i));
        if (config_.decoy_count > static_cast<int>(live.size()))
            throw std::invalid_argument("decoy_count exceeds live slots");
        auto picks = rng_charlie_.sample_without_replacement(static_cast<int>(live.size()),
                                                            config_.decoy_count);
        for (int p : picks) {
            int slot = live[p];
            auto& pair = store_.pairs[sb_.slots[slot].pair_id];
            // displaced original: measured in Z_d and discarded; the partner in
            // S_A is excluded from the final Bell measurements
            auto disp = measure_pair_local(*pair, PhotonTag::B, basis_set_.bases[0],
                                           rng_charlie_);
            pair.reset();
            transcript_.add("charlie", "displaced_measured",
                            {{"slot", slot}, {"outcome", disp.outcome}}, false);
            sa_.slots[slot] = {SlotState::Kind::Consumed, -1, -1, ConsumedReason::Removed};

            int b = rng_charlie_.uniform_int(basis_set_.count());
            int idx = rng_charlie_.uniform_int(d);
            int sid = store_.add_single(basis_set_.bases[b].vectors[idx]);
            sb_.slots[slot] = {SlotState::Kind::Decoy, -1, sid, {}};
            decoy_record_.push_back({slot, b, idx});
            transcript_.add("charlie", "decoy_insert",
                            {{"slot", slot}, {"basis", b}, {"index", idx}}, false);
        }
        std::sort(decoy_record_.begin(), decoy_record_.end(),
                  [](const DecoyRecord& a, const DecoyRecord& b) { return a.slot < b.slot; });
    }
    int encrypted = 0;
    for (std::size_t i = 0; i < sb_.slots.size(); ++i) {
        auto& slot = sb_.slots[i];
        if (slot.kind != SlotState::Kind::EntangledHalf) continue;
        PauliIndex op{rng_charlie_.uniform_int(d), rng_charlie_.uniform_int(d), d};
        auto& pair = store_.pairs[slot.pair_id];
        *pair = apply_to_photon_b(*pair, pauli_unitary(op.n, op.m, d));
        key_[i] = op;
        ++encrypted;
    }
    transcript_.add("charlie", "encrypt", {{"slots_encrypted", encrypted}}, false);
}

stats::RateEstimate Session::decoy_check() {
    std::uint64_t errors = 0;
    for (const auto& rec : decoy_record_) {
        transcript_.add("charlie", "decoy_reveal",
                        {{"slot", rec.slot}, {"basis", rec.basis_id},
                         {"index", rec.vector_index}},
                        true);
        auto& slot = sb_.slots[rec.slot];
        const Basis& basis = basis_set_.bases[rec.basis_id];
        int outcome;
        if (slot.kind == SlotState::Kind::Decoy && store_.singles[slot.single_id]) {
            outcome = measure_single(*store_.singles[slot.single_id], basis, rng_bob_).outcome;
            store_.singles[slot.single_id].reset();
        } else if (slot.kind == SlotState::Kind::EntangledHalf && store_.pairs[slot.pair_id]) {
            // an attacker substituted a pair half at this position
            outcome = measure_pair_local(*store_.pairs[slot.pair_id], PhotonTag::B, basis,
                                         rng_bob_)
                          .outcome;
            store_.pairs[slot.pair_id].reset();
        } else {
            throw std::runtime_error("decoy_check: announced position holds a consumed slot");
        }
        if (outcome != rec.vector_index) ++errors;
        slot = {SlotState::Kind::Consumed, -1, -1, ConsumedReason::DecoyCheck};
    }
    auto rate = decoy_record_.empty()
                    ? stats::RateEstimate{}
                    : stats::estimate_rate(errors, decoy_record_.size());
    decoy_rate_ = rate;
    transcript_.add("bob", "decoy_check_result", rate_json(rate), true);
    return rate;
}

void Session::encode_message() {
    const int d = config_.d;
    std::vector<int> live;
    for (std::size_t i = 0; i < sb_.slots.size(); ++i)
        if (sb_.slots[i].kind == SlotState::Kind::EntangledHalf)
            live.push_back(static_cast<int>(i));
    if (config_.s_e2_count > static_cast<int>(live.size()))
        throw std::invalid_argument("s_e2_count exceeds live slots");
    int msg_len = static_cast<int>(live.size()) - config_.s_e2_count;

    if (!message_fixed_) {
        message_.clear();
        for (int i = 0; i < msg_len; ++i)
            message_.push_back({rng_bob_.uniform_int(d), rng_bob_.uniform_int(d), d});
    } else if (static_cast<int>(message_.size()) != msg_len) {
        throw std::invalid_argument("message length must equal live slots - s_e2_count");
    }

    auto checks = rng_bob_.sample_without_replacement(static_cast<int>(live.size()),
                                                     config_.s_e2_count);
    std::vector<bool> is_check(live.size(), false);
    for (int c : checks) is_check[c] = true;

    int next = 0;
    for (std::size_t li = 0; li < live.size(); ++li) {
        int slot = live[li];
        PauliIndex op{0, 0, d};
        if (is_check[li]) {
            op = {rng_bob_.uniform_int(d), rng_bob_.uniform_int(d), d};
            check_ops_[slot] = op;
        } else {
            op = message_[next++];
            message_by_slot_[slot] = op;
        }
        auto& pair = store_.pairs[sb_.slots[slot].pair_id];
        *pair = apply_to_photon_b(*pair, pauli_unitary(op.n, op.m, d));
    }
    transcript_.add("bob", "encode",
                    {{"message_slots", msg_len}, {"check_slots", config_.s_e2_count}}, false);
}

void Session::server_bell_measure() {
    for (std::size_t i = 0; i < sb_.slots.size(); ++i) {
        auto& slot = sb_.slots[i];
        if (slot.kind != SlotState::Kind::EntangledHalf) continue;
        std::optional<PauliIndex> result;
        if (dishonest_.has_fabricated_results()) {
            result = dishonest_.fabricated_result(static_cast<int>(i));
        } else if (store_.pairs[slot.pair_id]) {
            result = bell_measure(*store_.pairs[slot.pair_id], rng_alice_);
            store_.pairs[slot.pair_id].reset();
        }
        if (!result) continue;
        bell_results_[i] = *result;
        transcript_.add("alice", "bell_result",
                        {{"slot", static_cast<int>(i)}, {"result", index_json(*result)}}, true);
        slot = {SlotState::Kind::Consumed, -1, -1, ConsumedReason::BellMeasured};
        sa_.slots[i] = {SlotState::Kind::Consumed, -1, -1, ConsumedReason::BellMeasured};
    }
}

SessionResult Session::final_check_and_decode() {
    const int d = config_.d;
    std::uint64_t errors = 0, samples = 0;
    for (std::size_t i = 0; i < check_ops_.size(); ++i) {
        if (!check_ops_[i]) continue;
        ++samples;
        if (!bell_results_[i] || !key_[i]) {
            ++errors;
            continue;
        }
        PauliIndex expected = compose_indices(*key_[i], *check_ops_[i]).first;
        if (!(*bell_results_[i] == expected)) ++errors;
    }
    auto rate = samples > 0 ? stats::estimate_rate(errors, samples) : stats::RateEstimate{};
    transcript_.add("bob", "final_check_result", rate_json(rate), true);

    SessionResult r;
    r.final_check_rate = rate;
    if (stats::abort_decision(rate, config_.epsilon_t) == stats::Decision::Abort) {
        r.status = SessionResult::Status::Aborted;
        r.aborted_at = "final_check";
        transcript_.add("bob", "abort", {{"check", "final_check"}, {"rate", rate.rate}}, true);
    } else {
        for (std::size_t i = 0; i < message_by_slot_.size(); ++i) {
            if (!message_by_slot_[i]) continue;
            if (bell_results_[i] && key_[i]) {
                r.decoded_message.push_back(
                    {(bell_results_[i]->n - key_[i]->n + d) % d,
                     (bell_results_[i]->m - key_[i]->m + d) % d, d});
            } else {
                r.decoded_message.push_back({-1, -1, d});  // missing announcement
            }
        }
        transcript_.add("charlie", "decode",
                        {{"symbols", static_cast<int>(r.decoded_message.size())}}, false);
    }
    fill_result_common(r);
    return r;
}

int Session::live_entangled_count() const {
    int live = 0;
    for (const auto& s : sb_.slots)
        if (s.kind == SlotState::Kind::EntangledHalf) ++live;
    return live;
}

void Session::fill_result_common(SessionResult& r) {
    r.encoded_message = message_;
    r.first_check_rate = first_rate_;
    r.decoy_check_rate = decoy_rate_;
    r.true_key = key_;
    r.true_message_by_slot = message_by_slot_;
    r.message_slot_count = static_cast<int>(r.encoded_message.size());
    r.dim = config_.d;
    finalize_eve(r);
    r.transcript = std::move(transcript_);
}

void Session::finalize_eve(SessionResult& r) {
    const EveKnowledge& k = config_.eve.kind == EveStrategy::Kind::DishonestServer
                                ? dishonest_.knowledge()
                                : eve_knowledge_;
    r.eve = eve_report(k, key_, message_by_slot_, config_.d, rng_eve_);
}

SessionResult Session::aborted_result(const std::string& check_id) {
    transcript_.add("charlie", "abort", {{"check", check_id}}, true);
    SessionResult r;
    r.status = SessionResult::Status::Aborted;
    r.aborted_at = check_id;
    fill_result_common(r);
    return r;
}

SessionResult Session::run() {
    prepare_sequences();
    transmit(ChannelLeg::AliceToCharlie);

    auto first = config_.decoy_source == SessionConfig::DecoySource::ByMeasurement
                     ? first_check_by_measurement()
                     : first_check();
    if (first.samples > 0 &&
        stats::abort_decision(first, config_.epsilon_t) == stats::Decision::Abort)
        return aborted_result("first_check");

    encrypt_and_insert_decoys();
    transmit(ChannelLeg::CharlieToBob);

    auto decoy = decoy_check();
    if (decoy.samples > 0 &&
        stats::abort_decision(decoy, config_.epsilon_t) == stats::Decision::Abort)
        return aborted_result("decoy_check");

    encode_message();
    transmit(ChannelLeg::BobToAlice);
    server_bell_measure();
    return final_check_and_decode();
}

SessionResult run_session(const SessionConfig& config,
                          std::optional<std::vector<PauliIndex>> message) {
    Session session(config, std::move(message));
    return session.run();
}

}  // namespace qsdc
