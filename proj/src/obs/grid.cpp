#include "platoonsim/obs/grid.hpp"

#include <cmath>
#include <limits>

#include "platoonsim/common/errors.hpp"

namespace psim {

namespace {

void write_cell(GridObservation& obs, const GridConfig& cfg,
                const VehicleState& v, int cell, double cell_left) {
    obs.at(0, v.lane, cell) = (v.x - cell_left) / cfg.l_grid;
    obs.at(1, v.lane, cell) = v.v / cfg.v_max;
    obs.at(2, v.lane, cell) = static_cast<double>(grid_code(v.kind));
}

}  // namespace

GridObservation encode_grid(const WorldState& world, int ego_id,
                            const GridConfig& cfg) {
    const VehicleState& ego = world.vehicle(ego_id);
    if (ego.exited) throw ContractViolation("encode_grid: ego has exited");

    GridObservation obs;
    obs.channels = cfg.channels;
    obs.lanes = cfg.lanes;
    obs.cells = cfg.cells();
    obs.data.assign(static_cast<std::size_t>(obs.channels) * obs.lanes * obs.cells, 0.0);

    const double window_left = ego.x - cfg.l_tail;
    // Distance to ego of the current occupant of each (lane, cell).
    std::vector<double> occupant_dist(
        static_cast<std::size_t>(obs.lanes) * obs.cells,
        std::numeric_limits<double>::infinity());

    for (const auto& v : world.vehicles) {
        if (v.exited || v.lane >= cfg.lanes) continue;
        const double offset = v.x - window_left;
        if (offset < 0.0 || offset >= cfg.l_tail + cfg.l_head) continue;
        const int cell = static_cast<int>(offset / cfg.l_grid);
        if (cell < 0 || cell >= obs.cells) continue;
        const double dist = std::abs(v.x - ego.x);
        double& best = occupant_dist[static_cast<std::size_t>(v.lane) * obs.cells + cell];
        if (dist < best) {  // nearest-to-ego wins a shared cell
            best = dist;
            write_cell(obs, cfg, v, cell, window_left + cell * cfg.l_grid);
        }
    }
    return obs;
}

GridObservation encode_global_state(const WorldState& world, const GridConfig& cfg) {
    GridObservation obs;
    obs.channels = cfg.channels;
    obs.lanes = cfg.lanes;
    obs.cells = static_cast<int>(std::ceil(world.road.segment_length / cfg.l_grid));
    obs.data.assign(static_cast<std::size_t>(obs.channels) * obs.lanes * obs.cells, 0.0);

    std::vector<double> occupant_dist(
        static_cast<std::size_t>(obs.lanes) * obs.cells,
        std::numeric_limits<double>::infinity());

    for (const auto& v : world.vehicles) {
        if (v.exited || v.lane >= cfg.lanes) continue;
        if (v.x < 0.0 || v.x >= obs.cells * cfg.l_grid) continue;
        const int cell = static_cast<int>(v.x / cfg.l_grid);
        const double cell_center = (cell + 0.5) * cfg.l_grid;
        const double dist = std::abs(v.x - cell_center);
        double& best = occupant_dist[static_cast<std::size_t>(v.lane) * obs.cells + cell];
        if (dist < best) {
            best = dist;
            write_cell(obs, cfg, v, cell, cell * cfg.l_grid);
        }
    }
    return obs;
}

}  // namespace psim
