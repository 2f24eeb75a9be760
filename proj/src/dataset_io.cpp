#include "vims/dataset_io.hpp"

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace vims {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json vec3_to_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

Vec3 vec3_from_json(const json& j) {
  return Vec3(j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>());
}

json pose_to_json(const Pose3& p) {
  return json{{"t", vec3_to_json(p.t)},
              {"q", json::array({p.q.w(), p.q.x(), p.q.y(), p.q.z()})}};
}

Pose3 pose_from_json(const json& j) {
  const auto& q = j.at("q");
  return Pose3(Quat(q.at(0).get<double>(), q.at(1).get<double>(), q.at(2).get<double>(),
                    q.at(3).get<double>()),
               vec3_from_json(j.at("t")));
}

std::string descriptor_to_hex(const std::array<std::uint64_t, 4>& d) {
  char buf[4 * 16 + 1];
  std::snprintf(buf, sizeof(buf), "%016" PRIx64 "%016" PRIx64 "%016" PRIx64 "%016" PRIx64,
                d[0], d[1], d[2], d[3]);
  return std::string(buf);
}

std::array<std::uint64_t, 4> descriptor_from_hex(const std::string& s) {
  if (s.size() != 64) throw IoError("descriptor hex must be 64 chars");
  std::array<std::uint64_t, 4> d{};
  for (int i = 0; i < 4; ++i) {
    d[i] = std::stoull(s.substr(static_cast<std::size_t>(i) * 16, 16), nullptr, 16);
  }
  return d;
}

json header_json(const ScenarioDataset& ds) {
  const ScenarioConfig& c = ds.config;
  json lms = json::array();
  for (const Landmark& lm : ds.world.landmarks) {
    lms.push_back(json{{"id", lm.id},
                       {"p", vec3_to_json(lm.position)},
                       {"sal", lm.saliency},
                       {"des", descriptor_to_hex(lm.descriptor)},
                       {"ori", lm.canonical_orientation}});
  }
  return json{
      {"type", "header"},
      {"version", 1},
      {"seed", ds.seed},
      {"trajectory", trajectory_family_name(c.trajectory)},
      {"duration", c.duration},
      {"speed", c.speed},
      {"altitude", c.altitude},
      {"rates",
       {{"imu", c.imu_rate}, {"mag", c.mag_rate}, {"sonar", c.sonar_rate},
        {"camera", c.camera_rate}}},
      {"coil",
       {{"center", vec3_to_json(c.coil.center)},
        {"axis", vec3_to_json(c.coil.axis)},
        {"radius", c.coil.radius},
        {"turns", c.coil.turns},
        {"current", c.coil.current_amplitude},
        {"drive_frequency", c.coil.drive_frequency}}},
      {"floor", {{"height", c.floor.plane_height}, {"roughness", c.floor.roughness_sigma}}},
      {"constants",
       {{"gravity", vec3_to_json(c.constants.gravity)},
        {"geomagnetic", vec3_to_json(c.constants.geomagnetic_world_ut)}}},
      {"noise",
       {{"gyro_noise_density", c.noise.gyro_noise_density},
        {"gyro_bias_walk", c.noise.gyro_bias_walk},
        {"accel_noise_density", c.noise.accel_noise_density},
        {"accel_bias_walk", c.noise.accel_bias_walk},
        {"mag_noise_sigma", c.noise.mag_noise_sigma},
        {"sonar_range_sigma", c.noise.sonar_range_sigma},
        {"sonar_multipath_prob", c.noise.sonar_multipath_prob},
        {"sonar_multipath_scale", c.noise.sonar_multipath_scale},
        {"pixel_noise_sigma", c.noise.pixel_noise_sigma}}},
      {"rig",
       {{"T_bc", pose_to_json(c.rig.T_bc)},
        {"T_bs", pose_to_json(c.rig.T_bs)},
        {"camera",
         {{"max_norm_coord", c.rig.camera.max_norm_coord},
          {"min_range", c.rig.camera.min_range},
          {"max_range", c.rig.camera.max_range},
          {"atten_start", c.rig.camera.atten_start},
          {"detection_floor", c.rig.camera.detection_floor}}}}},
      {"initial_bias",
       {{"gyro", vec3_to_json(ds.initial_gyro_bias)},
        {"accel", vec3_to_json(ds.initial_accel_bias)}}},
      {"landmark_density", c.landmark_density},
      {"descriptor_motifs", c.descriptor_motifs},
      {"motif_flip_prob", c.motif_flip_prob},
      {"accel_bias_init_sigma", c.accel_bias_init_sigma},
      {"gyro_bias_init_sigma", c.gyro_bias_init_sigma},
      {"landmarks", lms}};
}

void parse_header(const json& j, ScenarioDataset& ds) {
  if (j.value("type", "") != "header") throw IoError("first dataset line must be the header");
  if (j.value("version", 0) != 1) throw IoError("unsupported dataset version");
  ScenarioConfig& c = ds.config;
  ds.seed = j.at("seed").get<std::uint64_t>();
  c.trajectory = trajectory_family_from_name(j.at("trajectory").get<std::string>());
  c.duration = j.at("duration").get<double>();
  c.speed = j.at("speed").get<double>();
  c.altitude = j.at("altitude").get<double>();
  c.imu_rate = j.at("rates").at("imu").get<double>();
  c.mag_rate = j.at("rates").at("mag").get<double>();
  c.sonar_rate = j.at("rates").at("sonar").get<double>();
  c.camera_rate = j.at("rates").at("camera").get<double>();
  const auto& coil = j.at("coil");
  c.coil.center = vec3_from_json(coil.at("center"));
  c.coil.axis = vec3_from_json(coil.at("axis"));
  c.coil.radius = coil.at("radius").get<double>();
  c.coil.turns = coil.at("turns").get<int>();
  c.coil.current_amplitude = coil.at("current").get<double>();
  c.coil.drive_frequency = coil.at("drive_frequency").get<double>();
  c.floor.plane_height = j.at("floor").at("height").get<double>();
  c.floor.roughness_sigma = j.at("floor").at("roughness").get<double>();
  c.constants.gravity = vec3_from_json(j.at("constants").at("gravity"));
  c.constants.geomagnetic_world_ut = vec3_from_json(j.at("constants").at("geomagnetic"));
  const auto& n = j.at("noise");
  c.noise.gyro_noise_density = n.at("gyro_noise_density").get<double>();
  c.noise.gyro_bias_walk = n.at("gyro_bias_walk").get<double>();
  c.noise.accel_noise_density = n.at("accel_noise_density").get<double>();
  c.noise.accel_bias_walk = n.at("accel_bias_walk").get<double>();
  c.noise.mag_noise_sigma = n.at("mag_noise_sigma").get<double>();
  c.noise.sonar_range_sigma = n.at("sonar_range_sigma").get<double>();
  c.noise.sonar_multipath_prob = n.at("sonar_multipath_prob").get<double>();
  c.noise.sonar_multipath_scale = n.at("sonar_multipath_scale").get<double>();
  c.noise.pixel_noise_sigma = n.at("pixel_noise_sigma").get<double>();
  const auto& rig = j.at("rig");
  c.rig.T_bc = pose_from_json(rig.at("T_bc"));
  c.rig.T_bs = pose_from_json(rig.at("T_bs"));
  const auto& cam = rig.at("camera");
  c.rig.camera.max_norm_coord = cam.at("max_norm_coord").get<double>();
  c.rig.camera.min_range = cam.at("min_range").get<double>();
  c.rig.camera.max_range = cam.at("max_range").get<double>();
  c.rig.camera.atten_start = cam.at("atten_start").get<double>();
  c.rig.camera.detection_floor = cam.at("detection_floor").get<double>();
  ds.initial_gyro_bias = vec3_from_json(j.at("initial_bias").at("gyro"));
  ds.initial_accel_bias = vec3_from_json(j.at("initial_bias").at("accel"));
  c.landmark_density = j.at("landmark_density").get<double>();
  c.descriptor_motifs = j.at("descriptor_motifs").get<int>();
  c.motif_flip_prob = j.at("motif_flip_prob").get<double>();
  c.accel_bias_init_sigma = j.at("accel_bias_init_sigma").get<double>();
  c.gyro_bias_init_sigma = j.at("gyro_bias_init_sigma").get<double>();

  ds.world.coil = c.coil;
  ds.world.floor = c.floor;
  ds.world.constants = c.constants;
  for (const auto& lj : j.at("landmarks")) {
    Landmark lm;
    lm.id = lj.at("id").get<std::uint32_t>();
    lm.position = vec3_from_json(lj.at("p"));
    lm.saliency = lj.at("sal").get<double>();
    lm.descriptor = descriptor_from_hex(lj.at("des").get<std::string>());
    lm.canonical_orientation = lj.at("ori").get<double>();
    ds.world.landmarks.push_back(lm);
  }
}

// Merge the per-sensor streams into one time-ordered sequence; ties resolve
// in the order imu, mag, sonar, frame.
struct Cursor {
  int kind;  // 0 imu, 1 mag, 2 sonar, 3 frame
  std::size_t i = 0;
};

}  // namespace

void write_dataset(const ScenarioDataset& ds, const std::string& dir) {
  fs::create_directories(dir);
  std::ofstream out(fs::path(dir) / "dataset.jsonl");
  if (!out) throw IoError("cannot write dataset.jsonl in " + dir);
  out << header_json(ds).dump() << "\n";

  std::array<Cursor, 4> cur{Cursor{0}, Cursor{1}, Cursor{2}, Cursor{3}};
  const auto remaining_t = [&](const Cursor& c) -> double {
    switch (c.kind) {
      case 0: return c.i < ds.imu.size() ? ds.imu[c.i].t : 1e300;
      case 1: return c.i < ds.mag.size() ? ds.mag[c.i].t : 1e300;
      case 2: return c.i < ds.sonar.size() ? ds.sonar[c.i].t : 1e300;
      default: return c.i < ds.frames.size() ? ds.frames[c.i].t : 1e300;
    }
  };
  while (true) {
    int best = -1;
    double best_t = 1e300;
    for (int k = 0; k < 4; ++k) {
      const double t = remaining_t(cur[k]);
      if (t < best_t) {
        best_t = t;
        best = k;
      }
    }
    if (best < 0 || best_t >= 1e299) break;
    Cursor& c = cur[best];
    json e;
    switch (best) {
      case 0: {
        const ImuSample& s = ds.imu[c.i];
        e = json{{"t", s.t},
                 {"type", "imu"},
                 {"w", vec3_to_json(s.gyro)},
                 {"a", vec3_to_json(s.accel)}};
        break;
      }
      case 1: {
        const MagSample& s = ds.mag[c.i];
        e = json{{"t", s.t}, {"type", "mag"}, {"b", vec3_to_json(s.field_body)}};
        break;
      }
      case 2: {
        const SonarSample& s = ds.sonar[c.i];
        e = json{{"t", s.t}, {"type", "sonar"}, {"range", s.range}};
        break;
      }
      default: {
        const FrameObservation& s = ds.frames[c.i];
        json feats = json::array();
        for (const FrameFeature& f : s.features) {
          feats.push_back(json{{"id", f.landmark_id},
                               {"uv", json::array({f.uv.x(), f.uv.y()})},
                               {"rot", f.view_rotation},
                               {"dist", f.distance}});
        }
        e = json{{"t", s.t}, {"type", "frame"}, {"obs", feats}};
        break;
      }
    }
    out << e.dump() << "\n";
    ++c.i;
  }

  std::vector<TrajectoryPoint> gt;
  gt.reserve(ds.ground_truth.size());
  for (const auto& g : ds.ground_truth) gt.push_back(TrajectoryPoint{g.t, g.pose});
  write_tum(gt, (fs::path(dir) / "groundtruth.tum").string());
}

ScenarioDataset read_dataset(const std::string& dir) {
  std::ifstream in(fs::path(dir) / "dataset.jsonl");
  if (!in) throw IoError("cannot open dataset.jsonl in " + dir);
  ScenarioDataset ds;
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty dataset file");
  parse_header(json::parse(line), ds);

  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const json e = json::parse(line);
    const std::string type = e.at("type").get<std::string>();
    const double t = e.at("t").get<double>();
    if (type == "imu") {
      ds.imu.push_back(ImuSample{t, vec3_from_json(e.at("w")), vec3_from_json(e.at("a"))});
    } else if (type == "mag") {
      ds.mag.push_back(MagSample{t, vec3_from_json(e.at("b"))});
    } else if (type == "sonar") {
      ds.sonar.push_back(SonarSample{t, e.at("range").get<double>()});
    } else if (type == "frame") {
      FrameObservation obs;
      obs.t = t;
      for (const auto& fj : e.at("obs")) {
        FrameFeature f;
        f.landmark_id = fj.at("id").get<std::uint32_t>();
        f.uv = Vec2(fj.at("uv").at(0).get<double>(), fj.at("uv").at(1).get<double>());
        f.view_rotation = fj.at("rot").get<double>();
        f.distance = fj.at("dist").get<double>();
        obs.features.push_back(f);
      }
      ds.frames.push_back(std::move(obs));
    } else {
      throw IoError("unknown event type: " + type);
    }
  }

  const auto gt = read_tum((fs::path(dir) / "groundtruth.tum").string());
  for (const auto& p : gt) {
    ds.ground_truth.push_back(GroundTruthSample{p.t, p.pose, Vec3::Zero()});
  }
  return ds;
}

void write_tum(const std::vector<TrajectoryPoint>& traj, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw IoError("cannot write " + path);
  for (const auto& p : traj) {
    const Quat q = p.pose.q.normalized();
    std::fprintf(f, "%.9f %.9f %.9f %.9f %.9f %.9f %.9f %.9f\n", p.t, p.pose.t.x(),
                 p.pose.t.y(), p.pose.t.z(), q.x(), q.y(), q.z(), q.w());
  }
  std::fclose(f);
}

std::vector<TrajectoryPoint> read_tum(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::vector<TrajectoryPoint> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    TrajectoryPoint p;
    double qx, qy, qz, qw;
    if (!(ss >> p.t >> p.pose.t.x() >> p.pose.t.y() >> p.pose.t.z() >> qx >> qy >> qz >> qw)) {
      throw IoError("bad TUM line in " + path);
    }
    p.pose.q = Quat(qw, qx, qy, qz).normalized();
    out.push_back(p);
  }
  return out;
}

}  // namespace vims
