#pragma once

#include <optional>
#include <vector>

#include "qsdc/qudit.hpp"

namespace qsdc {

enum class ConsumedReason { FirstCheck, DecoyCheck, BellMeasured, Removed };

// Logical content of one position in an ordered photon sequence. The slot kind
// tracks the physical photon currently occupying the position; an attacker may
// substitute photons, so the kind can disagree with a party's private records.
struct SlotState {
    enum class Kind { EntangledHalf, Decoy, Consumed };
    Kind kind = Kind::EntangledHalf;
    int pair_id = -1;                                      // EntangledHalf
    int single_id = -1;                                    // Decoy
    ConsumedReason reason = ConsumedReason::FirstCheck;    // Consumed
};

// Amplitude store shared by S_A and S_B: each pair_id indexes one isolated
// two-qudit system, each single_id one lone qudit. nullopt once destroyed.
struct QuantumStore {
    int dim = 0;
    std::vector<std::optional<PairState>> pairs;
    std::vector<std::optional<QuditState>> singles;

    int add_pair(PairState p) {
        pairs.push_back(std::move(p));
        return static_cast<int>(pairs.size()) - 1;
    }
    int add_single(QuditState s) {
        singles.push_back(std::move(s));
        return static_cast<int>(singles.size()) - 1;
    }
};

// Ordered slots of one traveling sequence. Slot order is never permuted.
struct PhotonSequence {
    int dim = 0;
    std::vector<SlotState> slots;
};

}  // namespace qsdc
