#pragma once

#include <string>
#include <utility>
#include <vector>

#include "evoflow/flow.hpp"
#include "evoflow/oracle.hpp"

// Trajectory serialization.
//
// CSV: header row `t,<state columns>,<diagnostic columns>`, one row per
// sample, every number printed with 17 significant digits so a
// round-trip is lossless. State columns: simplex p_1..p_n; Gaussian
// a_1..a_n then C_11..C_nn row-major; grid w_1..w_K.
//
// JSON: object with arrays keyed `times`, `states` (flattened state per
// sample, same column order as CSV) and `diagnostics` (name -> array).

namespace evoflow {

enum class TrajectoryFormat { Csv, Json };

TrajectoryFormat parse_format(const std::string& name);

void emit_trajectory(const Trajectory<Eigen::VectorXd>& traj, TrajectoryFormat format,
                     const std::string& path);
void emit_trajectory(const Trajectory<GaussianParams>& traj, TrajectoryFormat format,
                     const std::string& path);
void emit_trajectory(const Trajectory<GridDensity>& traj, TrajectoryFormat format,
                     const std::string& path);

/// Format-agnostic view of a stored trajectory, used for round-trips.
struct FlatTrajectory {
  std::vector<double> times;
  std::vector<std::vector<double>> states;
  std::vector<std::pair<std::string, std::vector<double>>> diagnostics;
};

FlatTrajectory load_trajectory_json(const std::string& path);

}  // namespace evoflow
