#pragma once

#include <optional>
#include <string>
#include <vector>

#include "vims/config.hpp"
#include "vims/geometry.hpp"
#include "vims/rng.hpp"
#include "vims/world.hpp"

namespace vims {

struct ImuSample {
  double t = 0.0;
  Vec3 gyro = Vec3::Zero();   // rad/s, body
  Vec3 accel = Vec3::Zero();  // m/s^2, body (specific force)
};

struct MagSample {
  double t = 0.0;
  Vec3 field_body = Vec3::Zero();  // microtesla
};

struct SonarSample {
  double t = 0.0;
  double range = 0.0;  // m, along the sonar boresight
};

// One tracked feature in one camera frame. view_rotation and distance are
// the true viewing conditions; the descriptor model turns them into bits at
// run time so the same dataset serves every descriptor configuration.
struct FrameFeature {
  std::uint32_t landmark_id = 0;
  Vec2 uv = Vec2::Zero();      // normalized image plane
  double view_rotation = 0.0;  // in-plane rotation vs the landmark's canonical, rad
  double distance = 0.0;       // m, camera to landmark
};

struct FrameObservation {
  double t = 0.0;
  std::vector<FrameFeature> features;
};

struct GroundTruthSample {
  double t = 0.0;
  Pose3 pose;  // world <- body
  Vec3 velocity = Vec3::Zero();
};

struct CameraSpec {
  double max_norm_coord = 0.577;  // half-FOV as tan(angle)
  double min_range = 0.2;         // m
  double max_range = 8.0;         // visibility cutoff, m
  double atten_start = 5.0;       // saliency attenuation onset, m
  double detection_floor = 0.1;   // effective saliency needed for detection
};

// Sensor mounting. Camera and sonar boresights are their +z axes.
struct RigSpec {
  Pose3 T_bc{Quat(Eigen::AngleAxisd(M_PI, Vec3::UnitX())), Vec3(0.10, 0.0, -0.05)};
  Pose3 T_bs{Quat(Eigen::AngleAxisd(M_PI, Vec3::UnitX())), Vec3(-0.10, 0.0, -0.05)};
  CameraSpec camera;
};

struct WorldModel {
  CoilSpec coil;
  SeafloorModel floor;
  WorldConstants constants;
  std::vector<Landmark> landmarks;
};

enum class TrajectoryFamily { Lawnmower, ReversedLoop, Cruise };

const char* trajectory_family_name(TrajectoryFamily f);
TrajectoryFamily trajectory_family_from_name(const std::string& name);

struct ScenarioConfig {
  TrajectoryFamily trajectory = TrajectoryFamily::Lawnmower;
  double duration = 180.0;  // s
  double speed = 0.3;       // m/s target cruise speed, capped at 0.38
  double altitude = 3.0;    // m above the seafloor plane

  double imu_rate = 200.0;
  double mag_rate = 1000.0;
  double sonar_rate = 10.0;
  double camera_rate = 20.0;

  double landmark_density = 3.0;  // per m^2
  int descriptor_motifs = 40;    // appearance prototypes (aliasing model)
  double motif_flip_prob = 24.0 / 256.0;  // per-bit deviation from the motif

  double accel_bias_init_sigma = 0.01;    // m/s^2
  double gyro_bias_init_sigma = 5.0e-4;   // rad/s

  CoilSpec coil;
  SeafloorModel floor;
  WorldConstants constants;
  SensorNoiseSpec noise;
  RigSpec rig;

  static ScenarioConfig from_config(const Config& cfg);
  void validate() const;
};

struct ScenarioDataset {
  ScenarioConfig config;
  WorldModel world;
  std::uint64_t seed = 0;
  Vec3 initial_gyro_bias = Vec3::Zero();
  Vec3 initial_accel_bias = Vec3::Zero();

  std::vector<ImuSample> imu;
  std::vector<MagSample> mag;
  std::vector<SonarSample> sonar;
  std::vector<FrameObservation> frames;
  std::vector<GroundTruthSample> ground_truth;
};

// Analytic trajectory sample; derivatives are exact (no numeric
// differentiation anywhere in the simulator).
struct TrajectorySample {
  Vec3 position = Vec3::Zero();
  Vec3 velocity = Vec3::Zero();
  Vec3 acceleration = Vec3::Zero();
  double yaw = 0.0;
  double yaw_rate = 0.0;

  Pose3 pose() const { return Pose3(yaw_quat(yaw), position); }
};

class Trajectory {
 public:
  Trajectory(TrajectoryFamily family, double duration, double speed, double altitude,
             double floor_height);

  TrajectorySample at(double t) const;
  double duration() const { return duration_; }
  // Axis-aligned bounds of the ground track (for landmark seeding).
  void horizontal_bounds(double& x_lo, double& x_hi, double& y_lo, double& y_hi) const;

 private:
  TrajectoryFamily family_;
  double duration_;
  double speed_;
  double z0_;
  // family parameters, fixed at construction
  double ax_ = 0.0, ay_ = 0.0, wx_ = 0.0, wy_ = 0.0;
  double yaw_amp_ = 0.0, yaw_period_ = 1.0, yaw_offset_ = 0.0;
  double turn_rate_ = 0.0, turn_time_ = 0.0;  // reversed loop
  double ramp_k_ = 0.0, ramp_t0_ = 0.0;       // cruise
  double az_ = 0.0, wz_ = 0.0;
};

// Single-sensor sampling. These are the measurement models; generate_scenario
// wires them to the analytic trajectory.
MagSample sample_magnetometer(const WorldModel& world, const Pose3& pose_truth, double t,
                              const SensorNoiseSpec& noise, Rng& rng);
SonarSample sample_sonar(const WorldModel& world, const RigSpec& rig, const Pose3& pose_truth,
                         double t, const SensorNoiseSpec& noise, Rng& rng);
FrameObservation sample_frame(const WorldModel& world, const RigSpec& rig,
                              const Pose3& pose_truth, double t, const SensorNoiseSpec& noise,
                              Rng& rng);

ScenarioDataset generate_scenario(const ScenarioConfig& config, std::uint64_t seed);

}  // namespace vims
