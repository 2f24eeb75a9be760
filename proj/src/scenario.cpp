#include "vims/scenario.hpp"

#include <algorithm>
#include <cmath>

namespace vims {

namespace {

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

constexpr double kSpeedCap = 0.38;  // m/s

}  // namespace

const char* trajectory_family_name(TrajectoryFamily f) {
  switch (f) {
    case TrajectoryFamily::Lawnmower: return "lawnmower";
    case TrajectoryFamily::ReversedLoop: return "reversed_loop";
    case TrajectoryFamily::Cruise: return "cruise";
  }
  return "?";
}

TrajectoryFamily trajectory_family_from_name(const std::string& name) {
  if (name == "lawnmower") return TrajectoryFamily::Lawnmower;
  if (name == "reversed_loop") return TrajectoryFamily::ReversedLoop;
  if (name == "cruise") return TrajectoryFamily::Cruise;
  throw ConfigError("unknown trajectory family: " + name);
}

Trajectory::Trajectory(TrajectoryFamily family, double duration, double speed,
                       double altitude, double floor_height)
    : family_(family), duration_(duration), speed_(std::min(speed, kSpeedCap)),
      z0_(floor_height + altitude) {
  switch (family_) {
    case TrajectoryFamily::Lawnmower: {
      // Serpentine sweep: both axes are raised-cosine oscillations starting
      // at rest; the pattern retraces itself every lcm of the periods.
      const double base_period = 120.0;
      wx_ = 3.0 * 2.0 * M_PI / base_period;
      wy_ = 2.0 * M_PI / base_period;
      ax_ = 0.85 * speed_ / wx_;  // half-spans
      ay_ = 0.45 * speed_ / wy_;
      az_ = 0.15;
      wz_ = 2.0 * M_PI / 60.0;
      yaw_amp_ = 0.6;
      yaw_period_ = 40.0;
      yaw_offset_ = 0.3;
      break;
    }
    case TrajectoryFamily::ReversedLoop: {
      // Out and back along x with a smooth 180 deg heading turn at the far
      // end; the return leg passes over the outbound leg with reversed yaw.
      const double period = duration_;
      wx_ = 2.0 * M_PI / period;
      ax_ = speed_ / wx_;
      ay_ = 0.15;
      wy_ = 2.0 * M_PI / (period / 4.0);
      az_ = 0.10;
      wz_ = 2.0 * M_PI / (period / 3.0);
      turn_rate_ = 0.8;
      turn_time_ = 0.5 * period;
      break;
    }
    case TrajectoryFamily::Cruise: {
      // Near-straight constant-velocity leg. The velocity ramp is a
      // logistic, so position is a softplus with closed-form derivatives.
      ramp_k_ = 0.5;
      ramp_t0_ = 10.0;
      ay_ = 0.2;
      wy_ = 2.0 * M_PI / 40.0;
      az_ = 0.1;
      wz_ = 2.0 * M_PI / 35.0;
      yaw_amp_ = 0.08;
      yaw_period_ = 50.0;
      break;
    }
  }
}

TrajectorySample Trajectory::at(double t) const {
  TrajectorySample s;
  switch (family_) {
    case TrajectoryFamily::Lawnmower: {
      s.position.x() = ax_ * (1.0 - std::cos(wx_ * t));
      s.position.y() = ay_ * (1.0 - std::cos(wy_ * t));
      s.position.z() = z0_ + az_ * (1.0 - std::cos(wz_ * t));
      s.velocity = Vec3(ax_ * wx_ * std::sin(wx_ * t), ay_ * wy_ * std::sin(wy_ * t),
                        az_ * wz_ * std::sin(wz_ * t));
      s.acceleration = Vec3(ax_ * wx_ * wx_ * std::cos(wx_ * t),
                            ay_ * wy_ * wy_ * std::cos(wy_ * t),
                            az_ * wz_ * wz_ * std::cos(wz_ * t));
      const double wyaw = 2.0 * M_PI / yaw_period_;
      s.yaw = yaw_offset_ + yaw_amp_ * std::sin(wyaw * t);
      s.yaw_rate = yaw_amp_ * wyaw * std::cos(wyaw * t);
      break;
    }
    case TrajectoryFamily::ReversedLoop: {
      s.position.x() = ax_ * (1.0 - std::cos(wx_ * t));
      s.position.y() = ay_ * (1.0 - std::cos(wy_ * t));
      s.position.z() = z0_ + az_ * (1.0 - std::cos(wz_ * t));
      s.velocity = Vec3(ax_ * wx_ * std::sin(wx_ * t), ay_ * wy_ * std::sin(wy_ * t),
                        az_ * wz_ * std::sin(wz_ * t));
      s.acceleration = Vec3(ax_ * wx_ * wx_ * std::cos(wx_ * t),
                            ay_ * wy_ * wy_ * std::cos(wy_ * t),
                            az_ * wz_ * wz_ * std::cos(wz_ * t));
      const double sig = logistic(turn_rate_ * (t - turn_time_));
      s.yaw = M_PI * sig;
      s.yaw_rate = M_PI * turn_rate_ * sig * (1.0 - sig);
      break;
    }
    case TrajectoryFamily::Cruise: {
      const double u = ramp_k_ * (t - ramp_t0_);
      // softplus(u)/k * speed, numerically stable for large |u|
      const double softplus = u > 30.0 ? u : std::log1p(std::exp(u));
      const double sig = logistic(u);
      s.position.x() = speed_ * softplus / ramp_k_;
      s.velocity.x() = speed_ * sig;
      s.acceleration.x() = speed_ * ramp_k_ * sig * (1.0 - sig);
      s.position.y() = ay_ * (1.0 - std::cos(wy_ * t));
      s.velocity.y() = ay_ * wy_ * std::sin(wy_ * t);
      s.acceleration.y() = ay_ * wy_ * wy_ * std::cos(wy_ * t);
      s.position.z() = z0_ + az_ * (1.0 - std::cos(wz_ * t));
      s.velocity.z() = az_ * wz_ * std::sin(wz_ * t);
      s.acceleration.z() = az_ * wz_ * wz_ * std::cos(wz_ * t);
      const double wyaw = 2.0 * M_PI / yaw_period_;
      s.yaw = yaw_amp_ * std::sin(wyaw * t);
      s.yaw_rate = yaw_amp_ * wyaw * std::cos(wyaw * t);
      break;
    }
  }
  return s;
}

void Trajectory::horizontal_bounds(double& x_lo, double& x_hi, double& y_lo,
                                   double& y_hi) const {
  switch (family_) {
    case TrajectoryFamily::Lawnmower:
    case TrajectoryFamily::ReversedLoop:
      x_lo = 0.0;
      x_hi = 2.0 * ax_;
      y_lo = 0.0;
      y_hi = 2.0 * ay_;
      break;
    case TrajectoryFamily::Cruise: {
      const double u = ramp_k_ * (duration_ - ramp_t0_);
      const double softplus = u > 30.0 ? u : std::log1p(std::exp(u));
      x_lo = 0.0;
      x_hi = speed_ * softplus / ramp_k_;
      y_lo = 0.0;
      y_hi = 2.0 * ay_;
      break;
    }
  }
}

ScenarioConfig ScenarioConfig::from_config(const Config& cfg) {
  ScenarioConfig sc;
  sc.trajectory = trajectory_family_from_name(cfg.get_string("trajectory", "lawnmower"));
  sc.duration = cfg.get_double("duration", sc.duration);
  sc.speed = cfg.get_double("speed", sc.speed);
  sc.altitude = cfg.get_double("altitude", sc.altitude);
  sc.imu_rate = cfg.get_double("imu_rate", sc.imu_rate);
  sc.mag_rate = cfg.get_double("mag_rate", sc.mag_rate);
  sc.sonar_rate = cfg.get_double("sonar_rate", sc.sonar_rate);
  sc.camera_rate = cfg.get_double("camera_rate", sc.camera_rate);
  sc.landmark_density = cfg.get_double("landmark_density", sc.landmark_density);
  sc.descriptor_motifs = cfg.get_int("descriptor_motifs", sc.descriptor_motifs);
  sc.motif_flip_prob = cfg.get_double("motif_flip_prob", sc.motif_flip_prob);
  sc.accel_bias_init_sigma = cfg.get_double("accel_bias_init_sigma", sc.accel_bias_init_sigma);
  sc.gyro_bias_init_sigma = cfg.get_double("gyro_bias_init_sigma", sc.gyro_bias_init_sigma);

  sc.coil.center = cfg.get_vec3("coil_center", sc.coil.center);
  sc.coil.axis = cfg.get_vec3("coil_axis", sc.coil.axis).normalized();
  sc.coil.radius = cfg.get_double("coil_radius", sc.coil.radius);
  sc.coil.turns = cfg.get_int("coil_turns", sc.coil.turns);
  sc.coil.current_amplitude = cfg.get_double("coil_current", sc.coil.current_amplitude);
  sc.coil.drive_frequency = cfg.get_double("coil_drive_frequency", sc.coil.drive_frequency);

  sc.floor.plane_height = cfg.get_double("floor_height", sc.floor.plane_height);
  sc.floor.roughness_sigma = cfg.get_double("floor_roughness_sigma", sc.floor.roughness_sigma);
  sc.constants.geomagnetic_world_ut =
      cfg.get_vec3("geomagnetic_world", sc.constants.geomagnetic_world_ut);

  sc.noise.gyro_noise_density = cfg.get_double("gyro_noise_density", sc.noise.gyro_noise_density);
  sc.noise.gyro_bias_walk = cfg.get_double("gyro_bias_walk", sc.noise.gyro_bias_walk);
  sc.noise.accel_noise_density =
      cfg.get_double("accel_noise_density", sc.noise.accel_noise_density);
  sc.noise.accel_bias_walk = cfg.get_double("accel_bias_walk", sc.noise.accel_bias_walk);
  sc.noise.mag_noise_sigma = cfg.get_double("mag_noise_sigma", sc.noise.mag_noise_sigma);
  sc.noise.sonar_range_sigma = cfg.get_double("sonar_range_sigma", sc.noise.sonar_range_sigma);
  sc.noise.sonar_multipath_prob =
      cfg.get_double("sonar_multipath_prob", sc.noise.sonar_multipath_prob);
  sc.noise.sonar_multipath_scale =
      cfg.get_double("sonar_multipath_scale", sc.noise.sonar_multipath_scale);
  sc.noise.pixel_noise_sigma = cfg.get_double("pixel_noise_sigma", sc.noise.pixel_noise_sigma);

  sc.rig.camera.max_norm_coord = cfg.get_double("camera_fov_coord", sc.rig.camera.max_norm_coord);
  sc.rig.camera.max_range = cfg.get_double("camera_max_range", sc.rig.camera.max_range);
  sc.rig.camera.atten_start = cfg.get_double("camera_atten_start", sc.rig.camera.atten_start);
  sc.rig.camera.detection_floor = cfg.get_double("detection_floor", sc.rig.camera.detection_floor);

  const auto unknown = cfg.unknown_keys();
  if (!unknown.empty()) {
    std::string msg = "unknown scenario config keys:";
    for (const auto& k : unknown) msg += " " + k;
    throw ConfigError(msg);
  }
  sc.validate();
  return sc;
}

void ScenarioConfig::validate() const {
  if (duration <= 1.0) throw ConfigError("duration must exceed 1 s");
  if (speed <= 0.0) throw ConfigError("speed must be positive");
  if (altitude < 0.5) throw ConfigError("altitude must be at least 0.5 m");
  if (imu_rate <= 0 || mag_rate <= 0 || sonar_rate <= 0 || camera_rate <= 0) {
    throw ConfigError("sensor rates must be positive");
  }
  const double ratio = imu_rate / camera_rate;
  if (std::abs(ratio - std::round(ratio)) > 1e-9) {
    throw ConfigError("imu_rate must be an integer multiple of camera_rate");
  }
  if (landmark_density <= 0.0) throw ConfigError("landmark_density must be positive");
  if (descriptor_motifs < 1) throw ConfigError("descriptor_motifs must be >= 1");
  if (motif_flip_prob < 0.0 || motif_flip_prob > 0.5) {
    throw ConfigError("motif_flip_prob must be in [0, 0.5]");
  }
  coil.validate(mag_rate);
  noise.validate();
  const double geo = constants.geomagnetic_world_ut.norm();
  if (geo < 20.0 || geo > 70.0) {
    throw ConfigError("geomagnetic field norm must be in [20, 70] uT");
  }
}

MagSample sample_magnetometer(const WorldModel& world, const Pose3& pose_truth, double t,
                              const SensorNoiseSpec& noise, Rng& rng) {
  const Vec3 alt_world_ut = coil_field(world.coil, pose_truth.t) * 1e6;
  const Vec3 field_world = world.constants.geomagnetic_world_ut +
                           alt_world_ut * std::sin(2.0 * M_PI * world.coil.drive_frequency * t);
  Vec3 body = pose_truth.q.conjugate() * field_world;
  body += noise.mag_noise_sigma * Vec3(rng.gaussian(), rng.gaussian(), rng.gaussian());
  return MagSample{t, body};
}

SonarSample sample_sonar(const WorldModel& world, const RigSpec& rig, const Pose3& pose_truth,
                         double t, const SensorNoiseSpec& noise, Rng& rng) {
  const Pose3 T_ws = pose_truth * rig.T_bs;
  const Vec3 dir = T_ws.q * Vec3::UnitZ();
  if (dir.z() > -1e-6) {
    throw std::domain_error("sample_sonar: beam does not point toward the seafloor");
  }
  const double along = (world.floor.plane_height - T_ws.t.z()) / dir.z();
  if (along <= 0.0) {
    throw std::domain_error("sample_sonar: no intersection with the seafloor plane");
  }
  double range = along + noise.sonar_range_sigma * rng.gaussian();
  if (rng.bernoulli(noise.sonar_multipath_prob)) {
    range *= noise.sonar_multipath_scale;
  }
  return SonarSample{t, std::max(range, 1e-3)};
}

FrameObservation sample_frame(const WorldModel& world, const RigSpec& rig,
                              const Pose3& pose_truth, double t, const SensorNoiseSpec& noise,
                              Rng& rng) {
  FrameObservation obs;
  obs.t = t;
  const Pose3 T_wc = pose_truth * rig.T_bc;
  const Pose3 T_cw = T_wc.inverse();
  const Vec3 cam_x_world = T_wc.q * Vec3::UnitX();
  const double cam_azimuth = std::atan2(cam_x_world.y(), cam_x_world.x());
  const CameraSpec& cam = rig.camera;

  for (const Landmark& lm : world.landmarks) {
    const Vec3 pc = T_cw * lm.position;
    if (pc.z() < cam.min_range) continue;
    const double range = pc.norm();
    if (range > cam.max_range) continue;
    double atten = 1.0;
    if (range > cam.atten_start) {
      atten = (cam.max_range - range) / (cam.max_range - cam.atten_start);
    }
    if (lm.saliency * atten <= cam.detection_floor) continue;
    const double u = pc.x() / pc.z();
    const double v = pc.y() / pc.z();
    if (std::abs(u) > cam.max_norm_coord || std::abs(v) > cam.max_norm_coord) continue;
    FrameFeature f;
    f.landmark_id = lm.id;
    f.uv = Vec2(u + noise.pixel_noise_sigma * rng.gaussian(),
                v + noise.pixel_noise_sigma * rng.gaussian());
    f.view_rotation = wrap_angle(cam_azimuth - lm.canonical_orientation);
    f.distance = range;
    obs.features.push_back(f);
  }
  return obs;
}

ScenarioDataset generate_scenario(const ScenarioConfig& config, std::uint64_t seed) {
  config.validate();
  ScenarioDataset ds;
  ds.config = config;
  ds.seed = seed;
  ds.world.coil = config.coil;
  ds.world.floor = config.floor;
  ds.world.constants = config.constants;

  const Trajectory traj(config.trajectory, config.duration, config.speed, config.altitude,
                        config.floor.plane_height);

  Rng root(seed);

  {  // landmark field
    Rng rng = root.fork("landmarks");
    double x_lo, x_hi, y_lo, y_hi;
    traj.horizontal_bounds(x_lo, x_hi, y_lo, y_hi);
    const double margin = 4.5;
    x_lo -= margin;
    x_hi += margin;
    y_lo -= margin;
    y_hi += margin;
    const double area = (x_hi - x_lo) * (y_hi - y_lo);
    const auto count = static_cast<std::uint32_t>(std::lround(config.landmark_density * area));

    std::vector<std::array<std::uint64_t, 4>> motifs(config.descriptor_motifs);
    for (auto& m : motifs) {
      for (auto& w : m) w = rng.next_u64();
    }

    ds.world.landmarks.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) {
      Landmark lm;
      lm.id = i;
      lm.position.x() = rng.uniform(x_lo, x_hi);
      lm.position.y() = rng.uniform(y_lo, y_hi);
      double dz = config.floor.roughness_sigma * rng.gaussian();
      const double cap = 4.0 * config.floor.roughness_sigma;
      dz = std::clamp(dz, -cap, cap);
      lm.position.z() = config.floor.plane_height + dz;
      lm.saliency = rng.uniform(0.05, 1.0);
      lm.descriptor = motifs[rng.uniform_index(motifs.size())];
      for (int w = 0; w < 4; ++w) {
        for (int b = 0; b < 64; ++b) {
          if (rng.bernoulli(config.motif_flip_prob)) {
            lm.descriptor[w] ^= (1ull << b);
          }
        }
      }
      lm.canonical_orientation = rng.uniform(-M_PI, M_PI);
      ds.world.landmarks.push_back(lm);
    }
  }

  {  // initial IMU biases
    Rng rng = root.fork("bias");
    for (int i = 0; i < 3; ++i) {
      ds.initial_gyro_bias[i] = config.gyro_bias_init_sigma * rng.gaussian();
      ds.initial_accel_bias[i] = config.accel_bias_init_sigma * rng.gaussian();
    }
  }

  {  // inertial stream with bias random walk
    Rng rng = root.fork("imu");
    const double dt = 1.0 / config.imu_rate;
    const double gyro_sigma = config.noise.gyro_noise_density * std::sqrt(config.imu_rate);
    const double accel_sigma = config.noise.accel_noise_density * std::sqrt(config.imu_rate);
    const double gyro_walk = config.noise.gyro_bias_walk * std::sqrt(dt);
    const double accel_walk = config.noise.accel_bias_walk * std::sqrt(dt);
    Vec3 bg = ds.initial_gyro_bias;
    Vec3 ba = ds.initial_accel_bias;
    const auto n = static_cast<std::size_t>(std::floor(config.duration * config.imu_rate)) + 1;
    ds.imu.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double t = static_cast<double>(i) * dt;
      const TrajectorySample s = traj.at(t);
      const Quat q = yaw_quat(s.yaw);
      ImuSample m;
      m.t = t;
      m.gyro = Vec3(0.0, 0.0, s.yaw_rate) + bg +
               gyro_sigma * Vec3(rng.gaussian(), rng.gaussian(), rng.gaussian());
      m.accel = q.conjugate() * (s.acceleration - ds.world.constants.gravity) + ba +
                accel_sigma * Vec3(rng.gaussian(), rng.gaussian(), rng.gaussian());
      ds.imu.push_back(m);
      bg += gyro_walk * Vec3(rng.gaussian(), rng.gaussian(), rng.gaussian());
      ba += accel_walk * Vec3(rng.gaussian(), rng.gaussian(), rng.gaussian());
    }
  }

  {  // magnetometer stream
    Rng rng = root.fork("mag");
    const double dt = 1.0 / config.mag_rate;
    const auto n = static_cast<std::size_t>(std::floor(config.duration * config.mag_rate)) + 1;
    ds.mag.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double t = static_cast<double>(i) * dt;
      ds.mag.push_back(
          sample_magnetometer(ds.world, traj.at(t).pose(), t, config.noise, rng));
    }
  }

  {  // sonar stream
    Rng rng = root.fork("sonar");
    const double dt = 1.0 / config.sonar_rate;
    const auto n = static_cast<std::size_t>(std::floor(config.duration * config.sonar_rate)) + 1;
    ds.sonar.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double t = static_cast<double>(i) * dt;
      ds.sonar.push_back(sample_sonar(ds.world, config.rig, traj.at(t).pose(), t,
                                      config.noise, rng));
    }
  }

  {  // camera stream + ground truth on the camera grid
    Rng rng = root.fork("camera");
    const double dt = 1.0 / config.camera_rate;
    const auto n = static_cast<std::size_t>(std::floor(config.duration * config.camera_rate)) + 1;
    ds.frames.reserve(n);
    ds.ground_truth.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double t = static_cast<double>(i) * dt;
      const TrajectorySample s = traj.at(t);
      ds.frames.push_back(sample_frame(ds.world, config.rig, s.pose(), t, config.noise, rng));
      ds.ground_truth.push_back(GroundTruthSample{t, s.pose(), s.velocity});
    }
  }

  return ds;
}

}  // namespace vims
