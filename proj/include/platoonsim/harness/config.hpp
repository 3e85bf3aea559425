#pragma once

#include <string>

#include "platoonsim/env/episode.hpp"
#include "platoonsim/rl/qmix.hpp"

namespace psim {

// Scenario + controller + training settings loaded from one JSON config.
// Keys mirror the usual parameter names (learning_rate, memory_size,
// batch_size, gamma, w1..w3, T_D, ...); anything absent keeps its default.
struct FileConfig {
    EnvConfig env;
    rl::TrainConfig train;
};

FileConfig default_config();
FileConfig load_config(const std::string& path);  // "" -> defaults
std::string config_to_json(const FileConfig& cfg);

}  // namespace psim
