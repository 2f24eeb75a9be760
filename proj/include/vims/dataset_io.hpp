#pragma once

#include <string>
#include <vector>

#include "vims/scenario.hpp"

namespace vims {

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Dataset directory layout:
//   dataset.jsonl    header line (world + config + seed), then one event per
//                    line in time order
//   groundtruth.tum  `t x y z qx qy qz qw`, 9 decimal places
void write_dataset(const ScenarioDataset& dataset, const std::string& dir);
ScenarioDataset read_dataset(const std::string& dir);

struct TrajectoryPoint {
  double t = 0.0;
  Pose3 pose;
};

void write_tum(const std::vector<TrajectoryPoint>& traj, const std::string& path);
std::vector<TrajectoryPoint> read_tum(const std::string& path);

}  // namespace vims
