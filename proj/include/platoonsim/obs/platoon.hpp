#pragma once

#include <vector>

#include "platoonsim/control/longitudinal.hpp"
#include "platoonsim/sim/world.hpp"

namespace psim {

// A CAV is CACC-engaged while its immediate same-lane predecessor is a CAV
// within the engagement gap for the follower's speed.
bool cacc_engaged(const WorldState& world, int ego_id, const EngagementRule& rule);

// Number of consecutive CACC-engaged CAVs immediately ahead of ego in its
// lane; stops at the first human vehicle or oversize gap.
int count_connected_ahead(const WorldState& world, int ego_id,
                          const EngagementRule& rule);

// Maximal CACC chains (cooperative platoons), one vector of vehicle ids per
// chain ordered front to back. A lone CAV is a chain of one.
std::vector<std::vector<int>> platoon_chains(const WorldState& world,
                                             const EngagementRule& rule);

}  // namespace psim
