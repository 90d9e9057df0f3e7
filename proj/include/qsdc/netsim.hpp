#pragma once

#include <string>
#include <vector>

#include "qsdc/protocol.hpp"

namespace qsdc {

struct Branch {
    int server_id = 0;
    std::vector<int> user_ids;
};

struct Topology {
    enum class Kind { Star, Loop };
    Kind kind = Kind::Star;
    std::vector<Branch> branches;
};

struct TopologySpec {
    std::string kind = "star";  // "star" | "loop"
    std::vector<Branch> branches;
};

// validated topology; throws on duplicate users/servers or empty branch list
Topology build_topology(const TopologySpec& spec);

struct SessionRoute {
    int sender_id = -1;
    int receiver_id = -1;
    int serving_server_id = -1;
    std::vector<int> relay_server_ids;
};

// The receiver's branch server provides the service; other servers on the
// path are pass-through relays. Loop paths take the shortest arc, ties broken
// toward ascending server id.
SessionRoute route_session(const Topology& topology, int sender_id, int receiver_id);

// Delegates to run_session with the serving server as Alice; relay hops are
// recorded in the transcript as pass-through channel events.
SessionResult run_network_session(const Topology& topology, const SessionRoute& route,
                                  const SessionConfig& config);

}  // namespace qsdc
