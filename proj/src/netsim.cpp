#include "qsdc/netsim.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace qsdc {

namespace {

int branch_of_user(const Topology& t, int user_id) {
    for (std::size_t i = 0; i < t.branches.size(); ++i)
        for (int u : t.branches[i].user_ids)
            if (u == user_id) return static_cast<int>(i);
    throw std::out_of_range("unknown user id " + std::to_string(user_id));
}

}  // namespace

Topology build_topology(const TopologySpec& spec) {
    Topology t;
    if (spec.kind == "star")
        t.kind = Topology::Kind::Star;
    else if (spec.kind == "loop")
        t.kind = Topology::Kind::Loop;
    else
        throw std::invalid_argument("topology kind must be \"star\" or \"loop\"");
    if (spec.branches.empty()) throw std::invalid_argument("topology needs at least one server");

    std::set<int> servers, users;
    for (const auto& b : spec.branches) {
        if (!servers.insert(b.server_id).second)
            throw std::invalid_argument("duplicate server id " + std::to_string(b.server_id));
        for (int u : b.user_ids)
            if (!users.insert(u).second)
                throw std::invalid_argument("user " + std::to_string(u) +
                                            " appears in two branches");
    }
    t.branches = spec.branches;
    return t;
}

SessionRoute route_session(const Topology& topology, int sender_id, int receiver_id) {
    if (sender_id == receiver_id) throw std::invalid_argument("self-session rejected");
    int bs = branch_of_user(topology, sender_id);
    int br = branch_of_user(topology, receiver_id);

    SessionRoute route;
    route.sender_id = sender_id;
    route.receiver_id = receiver_id;
    route.serving_server_id = topology.branches[br].server_id;
    if (bs == br) return route;

    if (topology.kind == Topology::Kind::Star) {
        // branches meet at a passive hub; the sender's branch server relays
        route.relay_server_ids.push_back(topology.branches[bs].server_id);
        return route;
    }

    const int n = static_cast<int>(topology.branches.size());
    int fwd = (bs - br + n) % n;
    int bwd = (br - bs + n) % n;
    int dir;  // +1: ascending branch index from the serving branch
    if (fwd < bwd)
        dir = 1;
    else if (bwd < fwd)
        dir = -1;
    else {
        int fwd_first = topology.branches[(br + 1) % n].server_id;
        int bwd_first = topology.branches[(br - 1 + n) % n].server_id;
        dir = fwd_first <= bwd_first ? 1 : -1;
    }
    int steps = dir == 1 ? fwd : bwd;
    for (int s = 1; s < steps; ++s)
        route.relay_server_ids.push_back(
            topology.branches[((br + dir * s) % n + n) % n].server_id);
    route.relay_server_ids.push_back(topology.branches[bs].server_id);
    return route;
}

SessionResult run_network_session(const Topology& topology, const SessionRoute& route,
                                  const SessionConfig& config) {
    (void)topology;
    SessionResult result = run_session(config);
    result.transcript.add("network", "route",
                          {{"sender", route.sender_id},
                           {"receiver", route.receiver_id},
                           {"serving_server", route.serving_server_id},
                           {"relays", route.relay_server_ids}},
                          false);
    for (int relay : route.relay_server_ids)
        result.transcript.add("network", "relay_hop", {{"server", relay}}, false);
    return result;
}

}  // namespace qsdc
