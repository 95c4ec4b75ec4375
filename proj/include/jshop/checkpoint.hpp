#pragma once

#include <string>

#include "jshop/osm.hpp"
#include "jshop/ppo.hpp"
#include "jshop/sim_env.hpp"

namespace jshop {

// Versioned binary container for a training run: snapshot plus the resolved
// configs and the pristine base instance. Loading resumes bit-compatible
// training in the same (double) precision.
struct CheckpointData {
    TrainerSnapshot snapshot;
    TrainerConfig trainer;
    EnvConfig env;
    OsmConfig osm;
    std::string base_instance;  // standard-format serialization
    std::string instance_name;
};

void save_checkpoint(const std::string& path, const CheckpointData& data);
CheckpointData load_checkpoint(const std::string& path);

}  // namespace jshop
