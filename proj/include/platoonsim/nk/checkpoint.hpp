#pragma once

#include <string>
#include <utility>
#include <vector>

#include "platoonsim/nk/params.hpp"

namespace psim::nk {

// Versioned binary dump of parameter groups; round-trips bit-exactly.
struct CheckpointGroup {
    ParamLayout layout;
    ParamVector values;
};

struct CheckpointFile {
    std::string kind;       // model family tag, e.g. "cnn_qmix"
    std::string meta_json;  // architecture/config record
    std::vector<std::pair<std::string, CheckpointGroup>> groups;
};

void save_checkpoint(const std::string& path, const CheckpointFile& file);
CheckpointFile load_checkpoint(const std::string& path);

}  // namespace psim::nk
