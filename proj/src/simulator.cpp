#include "drone_assoc/simulator.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "drone_assoc/error.hpp"

namespace drone_assoc {

double ScenarioRng::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double ScenarioRng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

double ScenarioRng::normal(double mean, double sigma) {
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  const double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  return mean + sigma * z;
}

std::size_t ScenarioRng::index(std::size_t n) { return static_cast<std::size_t>(engine_() % n); }

int ScenarioRng::poisson(double lambda) {
  if (lambda <= 0.0) return 0;
  const double limit = std::exp(-lambda);
  int k = 0;
  double p = uniform();
  while (p > limit) {
    ++k;
    p *= uniform();
  }
  return k;
}

void ScenarioConfig::validate() const {
  auto fail = [](const std::string& msg) { throw ValidationError("scenario config: " + msg); };
  if (n_objects < 0) fail("n_objects must be non-negative");
  if (n_frames < 1) fail("n_frames must be positive");
  if (!(world_extent > 0.0)) fail("world_extent must be positive");
  if (!(image_width > 0.0 && image_height > 0.0)) fail("image size must be positive");
  if (!(min_speed >= 0.0 && max_speed >= min_speed)) fail("speed range must satisfy 0 <= min <= max");
  if (!(min_size > 0.0 && max_size >= min_size)) fail("size range must satisfy 0 < min <= max");
  if (n_classes < 1) fail("n_classes must be at least 1");
  long long total = 0;
  for (const auto& p : camera_script) {
    if (p.duration < 0) fail("camera phase durations must be non-negative");
    total += p.duration;
  }
  if (total != n_frames) {
    fail("camera script durations sum to " + std::to_string(total) + " but n_frames is " +
         std::to_string(n_frames));
  }
  if (!(detection_noise_sigma >= 0.0)) fail("detection_noise_sigma must be non-negative");
  if (!(miss_prob >= 0.0 && miss_prob <= 1.0)) fail("miss_prob must lie in [0, 1]");
  if (!(false_positive_rate >= 0.0)) fail("false_positive_rate must be non-negative");
  if (!(score_model.sigma_hit >= 0.0 && score_model.sigma_fp >= 0.0)) fail("score sigmas must be non-negative");
  if (embedding_dim < 2) fail("embedding_dim must be at least 2");
  if (!(embedding_noise >= 0.0)) fail("embedding_noise must be non-negative");
  for (const auto& o : occlusion_events) {
    if (o.object < 0 || o.object >= n_objects) fail("occlusion event refers to an unknown object");
    if (o.start < 1 || o.duration < 0) fail("occlusion event has a bad frame range");
  }
}

ScenarioConfig standard_ablation_scenario() {
  ScenarioConfig cfg;
  cfg.seed = 42;
  cfg.n_objects = 20;
  cfg.n_frames = 600;
  cfg.camera_script = {CameraPhase::hover(100), CameraPhase::translate(4.0, 1.0, 200),
                       CameraPhase::rotate(0.02, 150), CameraPhase::hover(150)};
  cfg.detection_noise_sigma = 1.5;
  cfg.miss_prob = 0.08;
  cfg.false_positive_rate = 0.5;
  cfg.occlusion_events = {{3, 150, 25}, {11, 380, 25}};
  return cfg;
}

ScenarioConfig noiseless_hover_scenario() {
  ScenarioConfig cfg;
  cfg.seed = 7;
  cfg.n_objects = 12;
  cfg.n_frames = 300;
  cfg.camera_script = {CameraPhase::hover(300)};
  cfg.detection_noise_sigma = 0.0;
  cfg.miss_prob = 0.0;
  cfg.false_positive_rate = 0.0;
  cfg.score_model = {0.9, 0.0, 0.35, 0.0};
  cfg.motion_jitter = 0.0;
  cfg.embedding_noise = 0.0;
  cfg.occlusion_events.clear();
  return cfg;
}

ScenarioConfig named_scenario(const std::string& name) {
  if (name == "standard") return standard_ablation_scenario();
  if (name == "noiseless-hover") return noiseless_hover_scenario();
  throw ValidationError("unknown scenario '" + name + "' (known: standard, noiseless-hover)");
}

namespace {

std::string format_script(const std::vector<CameraPhase>& script) {
  std::string out;
  for (const auto& p : script) {
    if (!out.empty()) out += ';';
    switch (p.kind) {
      case CameraPhase::Kind::Hover:
        out += "hover:" + std::to_string(p.duration);
        break;
      case CameraPhase::Kind::Translate:
        out += "translate:" + format_double(p.vx) + "," + format_double(p.vy) + "," + std::to_string(p.duration);
        break;
      case CameraPhase::Kind::Rotate:
        out += "rotate:" + format_double(p.omega) + "," + std::to_string(p.duration);
        break;
    }
  }
  return out;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) {
    const auto first = item.find_first_not_of(" \t");
    if (first == std::string::npos) continue;
    const auto last = item.find_last_not_of(" \t");
    out.push_back(item.substr(first, last - first + 1));
  }
  return out;
}

double parse_number(const std::string& s, const std::string& what) {
  KeyValueConfig tmp;
  tmp.set(what, s);
  return tmp.get_double(what, 0.0);
}

int parse_count(const std::string& s, const std::string& what) {
  KeyValueConfig tmp;
  tmp.set(what, s);
  return static_cast<int>(tmp.get_int(what, 0));
}

std::vector<CameraPhase> parse_script(const std::string& text) {
  std::vector<CameraPhase> script;
  for (const std::string& phase : split(text, ';')) {
    const auto colon = phase.find(':');
    if (colon == std::string::npos) throw ValidationError("camera_script phase '" + phase + "' lacks ':'");
    const std::string kind = phase.substr(0, colon);
    const auto args = split(phase.substr(colon + 1), ',');
    if (kind == "hover" && args.size() == 1) {
      script.push_back(CameraPhase::hover(parse_count(args[0], "camera_script")));
    } else if (kind == "translate" && args.size() == 3) {
      script.push_back(CameraPhase::translate(parse_number(args[0], "camera_script"),
                                              parse_number(args[1], "camera_script"),
                                              parse_count(args[2], "camera_script")));
    } else if (kind == "rotate" && args.size() == 2) {
      script.push_back(CameraPhase::rotate(parse_number(args[0], "camera_script"),
                                           parse_count(args[1], "camera_script")));
    } else {
      throw ValidationError("camera_script phase '" + phase + "' is not hover:N, translate:vx,vy,N or rotate:w,N");
    }
  }
  return script;
}

std::string format_occlusions(const std::vector<OcclusionEvent>& events) {
  std::string out;
  for (const auto& e : events) {
    if (!out.empty()) out += ';';
    out += std::to_string(e.object) + ":" + std::to_string(e.start) + ":" + std::to_string(e.duration);
  }
  return out;
}

std::vector<OcclusionEvent> parse_occlusions(const std::string& text) {
  std::vector<OcclusionEvent> events;
  for (const std::string& e : split(text, ';')) {
    const auto parts = split(e, ':');
    if (parts.size() != 3) throw ValidationError("occlusion event '" + e + "' is not object:start:duration");
    events.push_back({parse_count(parts[0], "occlusions"), parse_count(parts[1], "occlusions"),
                      parse_count(parts[2], "occlusions")});
  }
  return events;
}

}  // namespace

KeyValueConfig to_key_value(const ScenarioConfig& c) {
  KeyValueConfig kv;
  kv.set("rng", kScenarioRngId);
  kv.set("seed", std::to_string(c.seed));
  kv.set("n_objects", std::to_string(c.n_objects));
  kv.set("n_frames", std::to_string(c.n_frames));
  kv.set("world_extent", format_double(c.world_extent));
  kv.set("world_origin_x", format_double(c.world_origin.x));
  kv.set("world_origin_y", format_double(c.world_origin.y));
  kv.set("image_width", format_double(c.image_width));
  kv.set("image_height", format_double(c.image_height));
  kv.set("min_speed", format_double(c.min_speed));
  kv.set("max_speed", format_double(c.max_speed));
  kv.set("motion_jitter", format_double(c.motion_jitter));
  kv.set("min_size", format_double(c.min_size));
  kv.set("max_size", format_double(c.max_size));
  kv.set("n_classes", std::to_string(c.n_classes));
  kv.set("camera_script", format_script(c.camera_script));
  kv.set("detection_noise_sigma", format_double(c.detection_noise_sigma));
  kv.set("miss_prob", format_double(c.miss_prob));
  kv.set("false_positive_rate", format_double(c.false_positive_rate));
  kv.set("score_mean_hit", format_double(c.score_model.mean_hit));
  kv.set("score_sigma_hit", format_double(c.score_model.sigma_hit));
  kv.set("score_mean_fp", format_double(c.score_model.mean_fp));
  kv.set("score_sigma_fp", format_double(c.score_model.sigma_fp));
  kv.set("embedding_dim", std::to_string(c.embedding_dim));
  kv.set("view_drift_rate", format_double(c.view_drift_rate));
  kv.set("embedding_noise", format_double(c.embedding_noise));
  kv.set("occlusions", format_occlusions(c.occlusion_events));
  return kv;
}

ScenarioConfig scenario_from_key_value(const KeyValueConfig& kv) {
  kv.require_known({"rng", "seed", "n_objects", "n_frames", "world_extent", "world_origin_x", "world_origin_y",
                    "image_width", "image_height", "min_speed", "max_speed", "motion_jitter", "min_size",
                    "max_size", "n_classes", "camera_script", "detection_noise_sigma", "miss_prob",
                    "false_positive_rate", "score_mean_hit", "score_sigma_hit", "score_mean_fp",
                    "score_sigma_fp", "embedding_dim", "view_drift_rate", "embedding_noise", "occlusions"});
  if (auto rng = kv.get("rng"); rng && *rng != kScenarioRngId) {
    throw ValidationError("scenario config: unsupported rng '" + *rng + "' (this build uses " +
                          std::string(kScenarioRngId) + ")");
  }
  ScenarioConfig c;
  const long long seed = kv.get_int("seed", static_cast<long long>(c.seed));
  if (seed < 0) throw ValidationError("scenario config: seed must be non-negative");
  c.seed = static_cast<std::uint64_t>(seed);
  c.n_objects = static_cast<int>(kv.get_int("n_objects", c.n_objects));
  c.n_frames = static_cast<int>(kv.get_int("n_frames", c.n_frames));
  c.world_extent = kv.get_double("world_extent", c.world_extent);
  c.world_origin.x = kv.get_double("world_origin_x", c.world_origin.x);
  c.world_origin.y = kv.get_double("world_origin_y", c.world_origin.y);
  c.image_width = kv.get_double("image_width", c.image_width);
  c.image_height = kv.get_double("image_height", c.image_height);
  c.min_speed = kv.get_double("min_speed", c.min_speed);
  c.max_speed = kv.get_double("max_speed", c.max_speed);
  c.motion_jitter = kv.get_double("motion_jitter", c.motion_jitter);
  c.min_size = kv.get_double("min_size", c.min_size);
  c.max_size = kv.get_double("max_size", c.max_size);
  c.n_classes = static_cast<int>(kv.get_int("n_classes", c.n_classes));
  if (auto s = kv.get("camera_script")) {
    c.camera_script = parse_script(*s);
  } else {
    c.camera_script = {CameraPhase::hover(c.n_frames)};
  }
  c.detection_noise_sigma = kv.get_double("detection_noise_sigma", c.detection_noise_sigma);
  c.miss_prob = kv.get_double("miss_prob", c.miss_prob);
  c.false_positive_rate = kv.get_double("false_positive_rate", c.false_positive_rate);
  c.score_model.mean_hit = kv.get_double("score_mean_hit", c.score_model.mean_hit);
  c.score_model.sigma_hit = kv.get_double("score_sigma_hit", c.score_model.sigma_hit);
  c.score_model.mean_fp = kv.get_double("score_mean_fp", c.score_model.mean_fp);
  c.score_model.sigma_fp = kv.get_double("score_sigma_fp", c.score_model.sigma_fp);
  const long long dim = kv.get_int("embedding_dim", static_cast<long long>(c.embedding_dim));
  if (dim < 2) throw ValidationError("scenario config: embedding_dim must be at least 2");
  c.embedding_dim = static_cast<std::size_t>(dim);
  c.view_drift_rate = kv.get_double("view_drift_rate", c.view_drift_rate);
  c.embedding_noise = kv.get_double("embedding_noise", c.embedding_noise);
  if (auto s = kv.get("occlusions")) c.occlusion_events = parse_occlusions(*s);
  c.validate();
  return c;
}

namespace {

struct SimObject {
  Point2 position;  // world center
  Point2 velocity;
  double w = 0.0;
  double h = 0.0;
  int class_id = 1;
  std::vector<double> base;  // unit identity feature
  std::vector<double> perp;  // unit direction the feature drifts toward
};

std::vector<double> random_unit(ScenarioRng& rng, std::size_t dim) {
  std::vector<double> v(dim);
  double norm = 0.0;
  do {
    norm = 0.0;
    for (double& x : v) {
      x = rng.normal(0.0, 1.0);
      norm += x * x;
    }
  } while (!(norm > 0.0));
  norm = std::sqrt(norm);
  for (double& x : v) x /= norm;
  return v;
}

std::vector<double> orthogonal_unit(ScenarioRng& rng, const std::vector<double>& base) {
  while (true) {
    std::vector<double> v = random_unit(rng, base.size());
    double dot = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) dot += v[i] * base[i];
    double norm = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
      v[i] -= dot * base[i];
      norm += v[i] * v[i];
    }
    norm = std::sqrt(norm);
    if (norm > 1e-6) {
      for (double& x : v) x /= norm;
      return v;
    }
  }
}

void clamp_speed(Point2& v, double lo, double hi) {
  const double speed = std::hypot(v.x, v.y);
  if (speed <= 0.0) return;
  const double target = std::clamp(speed, lo, hi);
  v.x *= target / speed;
  v.y *= target / speed;
}

void reflect(double& pos, double& vel, double lo, double hi) {
  if (pos < lo) {
    pos = 2.0 * lo - pos;
    vel = -vel;
  } else if (pos > hi) {
    pos = 2.0 * hi - pos;
    vel = -vel;
  }
  pos = std::clamp(pos, lo, hi);
}

std::vector<float> noisy_feature(ScenarioRng& rng, const std::vector<double>& base,
                                 const std::vector<double>& perp, double drift_angle, double noise) {
  const double cs = std::cos(drift_angle);
  const double sn = std::sin(drift_angle);
  std::vector<double> v(base.size());
  double norm = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    v[i] = cs * base[i] + sn * perp[i];
    if (noise > 0.0) v[i] += rng.normal(0.0, noise);
    norm += v[i] * v[i];
  }
  norm = std::sqrt(norm);
  std::vector<float> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = static_cast<float>(v[i] / norm);
  return out;
}

bool occluded(const ScenarioConfig& cfg, int object, FrameIndex frame) {
  for (const auto& o : cfg.occlusion_events) {
    if (o.object == object && frame >= o.start && frame < o.start + o.duration) return true;
  }
  return false;
}

}  // namespace

Scenario generate_scenario(const ScenarioConfig& cfg) {
  cfg.validate();
  ScenarioRng rng(cfg.seed);
  Scenario out;

  const double x0 = cfg.world_origin.x;
  const double y0 = cfg.world_origin.y;
  const double x1 = x0 + cfg.world_extent;
  const double y1 = y0 + cfg.world_extent;
  const Point2 pivot{cfg.image_width / 2.0, cfg.image_height / 2.0};

  std::vector<SimObject> objects(static_cast<std::size_t>(cfg.n_objects));
  for (auto& o : objects) {
    o.position = {rng.uniform(x0, x1), rng.uniform(y0, y1)};
    const double speed = rng.uniform(cfg.min_speed, cfg.max_speed);
    const double heading = rng.uniform(0.0, 2.0 * std::numbers::pi);
    o.velocity = {speed * std::cos(heading), speed * std::sin(heading)};
    o.w = rng.uniform(cfg.min_size, cfg.max_size);
    o.h = rng.uniform(cfg.min_size, cfg.max_size);
    o.class_id = 1 + static_cast<int>(rng.index(static_cast<std::size_t>(cfg.n_classes)));
    o.base = random_unit(rng, cfg.embedding_dim);
    o.perp = orthogonal_unit(rng, o.base);
  }

  // Phase of each frame.
  for (const auto& p : cfg.camera_script) {
    for (int k = 0; k < p.duration; ++k) out.phase_of_frame.push_back(p.kind);
  }
  std::vector<const CameraPhase*> phase_ptr;
  for (const auto& p : cfg.camera_script) {
    for (int k = 0; k < p.duration; ++k) phase_ptr.push_back(&p);
  }

  AffineTransform world_to_image = AffineTransform::identity();
  double cumulative_rotation = 0.0;

  for (FrameIndex frame = 1; frame <= cfg.n_frames; ++frame) {
    if (frame >= 2) {
      const CameraPhase& phase = *phase_ptr[static_cast<std::size_t>(frame - 1)];
      AffineTransform step = AffineTransform::identity();
      if (phase.kind == CameraPhase::Kind::Translate) {
        step = AffineTransform::translation(phase.vx, phase.vy);
      } else if (phase.kind == CameraPhase::Kind::Rotate) {
        step = AffineTransform::rotation(phase.omega, pivot);
        cumulative_rotation += phase.omega;
      }
      world_to_image = step.compose(world_to_image);
      out.affines[frame] = step;

      for (auto& o : objects) {
        if (cfg.motion_jitter > 0.0) {
          o.velocity.x += rng.normal(0.0, cfg.motion_jitter);
          o.velocity.y += rng.normal(0.0, cfg.motion_jitter);
          clamp_speed(o.velocity, cfg.min_speed, cfg.max_speed);
        }
        o.position.x += o.velocity.x;
        o.position.y += o.velocity.y;
        reflect(o.position.x, o.velocity.x, x0, x1);
        reflect(o.position.y, o.velocity.y, y0, y1);
      }
    }

    struct PendingDetection {
      MotLine line;
      std::vector<float> feature;
    };
    std::vector<PendingDetection> dets;
    const double drift = cfg.view_drift_rate * std::abs(cumulative_rotation);

    for (std::size_t k = 0; k < objects.size(); ++k) {
      const SimObject& o = objects[k];
      const BoundingBox world_box{o.position.x - o.w / 2.0, o.position.y - o.h / 2.0, o.w, o.h};
      const BoundingBox box = apply_affine(world_box, world_to_image);
      const Point2 c = center(box);
      if (c.x < 0.0 || c.y < 0.0 || c.x >= cfg.image_width || c.y >= cfg.image_height) continue;
      out.gt.push_back({frame, static_cast<TrackId>(k + 1), box, 1.0, o.class_id, 1.0});

      const bool missed = rng.uniform() < cfg.miss_prob;
      if (missed || occluded(cfg, static_cast<int>(k), frame)) continue;
      const double sigma = cfg.detection_noise_sigma;
      BoundingBox noisy = box;
      if (sigma > 0.0) {
        noisy.x = rng.normal(box.x, sigma);
        noisy.y = rng.normal(box.y, sigma);
        noisy.w = std::max(2.0, rng.normal(box.w, sigma));
        noisy.h = std::max(2.0, rng.normal(box.h, sigma));
      }
      const double score =
          std::clamp(rng.normal(cfg.score_model.mean_hit, cfg.score_model.sigma_hit), 0.01, 1.0);
      dets.push_back({{frame, -1, noisy, score, o.class_id, 1.0},
                      noisy_feature(rng, o.base, o.perp, drift, cfg.embedding_noise)});
    }

    const int n_fp = rng.poisson(cfg.false_positive_rate);
    for (int f = 0; f < n_fp; ++f) {
      const double w = rng.uniform(cfg.min_size, cfg.max_size);
      const double h = rng.uniform(cfg.min_size, cfg.max_size);
      const BoundingBox box{rng.uniform(0.0, cfg.image_width - w), rng.uniform(0.0, cfg.image_height - h), w, h};
      const int cls = 1 + static_cast<int>(rng.index(static_cast<std::size_t>(cfg.n_classes)));
      const double score = std::clamp(rng.normal(cfg.score_model.mean_fp, cfg.score_model.sigma_fp), 0.01, 1.0);
      const std::vector<double> feat = random_unit(rng, cfg.embedding_dim);
      dets.push_back({{frame, -1, box, score, cls, 1.0}, std::vector<float>(feat.begin(), feat.end())});
    }

    // Detector output order carries no identity information.
    for (std::size_t i = dets.size(); i > 1; --i) std::swap(dets[i - 1], dets[rng.index(i)]);

    for (std::size_t i = 0; i < dets.size(); ++i) {
      out.detections.push_back(dets[i].line);
      out.embeddings.push_back({static_cast<std::uint32_t>(frame), static_cast<std::uint32_t>(i),
                                std::move(dets[i].feature)});
    }
  }
  return out;
}

ScenarioPaths scenario_paths(const std::filesystem::path& dir) {
  return {dir / "gt.txt", dir / "det.txt", dir / "emb.bin", dir / "affine.txt", dir / "scenario.cfg"};
}

ScenarioPaths write_scenario(const Scenario& scenario, const ScenarioConfig& cfg,
                             const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ValidationError("cannot create directory " + dir.string() + ": " + ec.message());
  const ScenarioPaths paths = scenario_paths(dir);
  write_text_file(paths.gt, format_mot_lines(scenario.gt));
  write_text_file(paths.detections, format_mot_lines(scenario.detections));
  write_embeddings(paths.embeddings, scenario.embeddings, cfg.embedding_dim);
  write_affines(paths.affines, scenario.affines);
  write_text_file(paths.config, to_key_value(cfg).to_string());
  return paths;
}

}  // namespace drone_assoc
