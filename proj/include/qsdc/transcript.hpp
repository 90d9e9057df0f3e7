#pragma once

#include <string>
#include <vector>

#include <json.hpp>

namespace qsdc {

// One record of the session audit log. Public events model the authenticated
// classical channel (readable by everyone, not modifiable); private events are
// party- or attacker-local bookkeeping and are excluded from replay-visible
// announcements.
struct TranscriptEvent {
    int seq_no = 0;
    std::string actor;
    std::string event_type;
    nlohmann::ordered_json payload;
    bool is_public = false;
};

class Transcript {
public:
    void add(std::string actor, std::string event_type, nlohmann::ordered_json payload,
             bool is_public) {
        events_.push_back({next_seq_++, std::move(actor), std::move(event_type),
                           std::move(payload), is_public});
    }

    const std::vector<TranscriptEvent>& events() const { return events_; }

    // newline-delimited JSON records {seq_no, actor, event_type, payload}
    std::string to_ndjson(bool public_only = false) const {
        std::string out;
        for (const auto& e : events_) {
            if (public_only && !e.is_public) continue;
            nlohmann::ordered_json rec;
            rec["seq_no"] = e.seq_no;
            rec["actor"] = e.actor;
            rec["event_type"] = e.event_type;
            rec["payload"] = e.payload;
            out += rec.dump();
            out += '\n';
        }
        return out;
    }

private:
    std::vector<TranscriptEvent> events_;
    int next_seq_ = 0;
};

}  // namespace qsdc
