#include "drone_assoc/io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "drone_assoc/error.hpp"

namespace drone_assoc {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  while (true) {
    const auto comma = line.find(',');
    out.push_back(trim(line.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    line = line.substr(comma + 1);
  }
  return out;
}

template <typename Fn>
void for_each_line(std::string_view text, Fn&& fn) {
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    line = trim(line);
    if (!line.empty()) fn(line, line_no);
  }
}

std::optional<double> to_number(std::string_view s) {
  double v = 0.0;
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc{} || ptr != end || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::optional<long long> to_integer(std::string_view s) {
  const auto v = to_number(s);
  if (!v || *v != std::floor(*v) || std::abs(*v) > 9.0e15) return std::nullopt;
  return static_cast<long long>(*v);
}

std::optional<MotLine> parse_mot_line(std::string_view line) {
  const auto f = split_fields(line);
  if (f.size() < 7) return std::nullopt;
  const auto frame = to_integer(f[0]);
  const auto id = to_integer(f[1]);
  const auto x = to_number(f[2]);
  const auto y = to_number(f[3]);
  const auto w = to_number(f[4]);
  const auto h = to_number(f[5]);
  const auto score = to_number(f[6]);
  if (!frame || !id || !x || !y || !w || !h || !score) return std::nullopt;
  MotLine out;
  out.frame = *frame;
  out.id = *id;
  out.box = {*x, *y, *w, *h};
  out.score = *score;
  if (f.size() > 7) {
    const auto cls = to_integer(f[7]);
    if (!cls) return std::nullopt;
    out.class_id = static_cast<int>(*cls);
  }
  if (f.size() > 8) {
    const auto vis = to_number(f[8]);
    if (!vis) return std::nullopt;
    out.visibility = *vis;
  }
  if (out.frame < 1 || !out.box.valid()) return std::nullopt;
  return out;
}

std::uint32_t read_u32_le(std::string_view bytes, std::size_t offset) {
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) {
    v = (v << 8) | static_cast<unsigned char>(bytes[offset + static_cast<std::size_t>(i)]);
  }
  return v;
}

void append_u32_le(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFFu));
}

float read_f32_le(std::string_view bytes, std::size_t offset) {
  return std::bit_cast<float>(read_u32_le(bytes, offset));
}

void insert_embedding(EmbeddingMap& map, FrameIndex frame, std::uint32_t ordinal,
                      const std::vector<double>& raw) {
  const EmbeddingKey key{frame, ordinal};
  if (map.contains(key)) {
    throw ValidationError("duplicate embedding for frame " + std::to_string(frame) + " ordinal " +
                          std::to_string(ordinal));
  }
  try {
    map.emplace(key, FeatureEmbedding::normalize(raw));
  } catch (const EmbeddingError& e) {
    throw EmbeddingError("embedding for frame " + std::to_string(frame) + " ordinal " +
                         std::to_string(ordinal) + ": " + e.what());
  }
}

}  // namespace

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ValidationError("cannot write file " + path.string());
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw ValidationError("failed writing file " + path.string());
}

MotFile parse_mot_text(std::string_view text) {
  MotFile file;
  std::size_t total = 0;
  for_each_line(text, [&](std::string_view line, std::size_t) {
    ++total;
    if (auto parsed = parse_mot_line(line)) {
      file.lines.push_back(*parsed);
    } else {
      ++file.malformed;
    }
  });
  if (total > 0 && static_cast<double>(file.malformed) > 0.1 * static_cast<double>(total)) {
    throw ValidationError(std::to_string(file.malformed) + " of " + std::to_string(total) +
                          " lines are malformed (more than 10%)");
  }
  return file;
}

MotFile read_mot_file(const std::filesystem::path& path) {
  try {
    return parse_mot_text(read_text_file(path));
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

DetectionSequence group_detections(const MotFile& file) {
  std::map<FrameIndex, FrameDetections> frames;
  for (const MotLine& line : file.lines) {
    auto& fd = frames[line.frame];
    fd.frame = line.frame;
    Detection d;
    d.bbox = line.box;
    d.score = line.score;
    d.class_id = line.class_id;
    d.ordinal = static_cast<std::uint32_t>(fd.detections.size());
    fd.detections.push_back(std::move(d));
  }
  DetectionSequence seq;
  seq.malformed_lines = file.malformed;
  for (auto& [frame, fd] : frames) seq.frames.push_back(std::move(fd));
  return seq;
}

DetectionSequence parse_detections(const std::filesystem::path& path) {
  return group_detections(read_mot_file(path));
}

LabeledSequence to_labeled_sequence(const MotFile& file) {
  LabeledSequence seq;
  for (const MotLine& line : file.lines) seq[line.frame].push_back({line.id, line.box, line.class_id});
  return seq;
}

LabeledSequence parse_tracks(const std::filesystem::path& path) {
  return to_labeled_sequence(read_mot_file(path));
}

EmbeddingMap parse_embeddings_binary(std::string_view bytes, std::size_t expected_dim) {
  if (bytes.size() < 16 || bytes.substr(0, 4) != "DEMB") {
    throw ValidationError("embedding sidecar: bad magic (expected DEMB)");
  }
  const std::uint32_t version = read_u32_le(bytes, 4);
  const std::uint32_t dim = read_u32_le(bytes, 8);
  const std::uint32_t count = read_u32_le(bytes, 12);
  if (version != kEmbeddingVersion) {
    throw ValidationError("embedding sidecar: unsupported version " + std::to_string(version));
  }
  if (dim != expected_dim) {
    throw ValidationError("embedding sidecar: dimension " + std::to_string(dim) +
                          " does not match configured dimension " + std::to_string(expected_dim));
  }
  const std::size_t record_size = 8 + 4 * static_cast<std::size_t>(dim);
  if (bytes.size() != 16 + record_size * count) {
    throw ValidationError("embedding sidecar: size does not match header record count");
  }
  EmbeddingMap map;
  std::vector<double> raw(dim);
  for (std::size_t r = 0; r < count; ++r) {
    const std::size_t base = 16 + r * record_size;
    const std::uint32_t frame = read_u32_le(bytes, base);
    const std::uint32_t ordinal = read_u32_le(bytes, base + 4);
    for (std::size_t k = 0; k < dim; ++k) raw[k] = read_f32_le(bytes, base + 8 + 4 * k);
    insert_embedding(map, frame, ordinal, raw);
  }
  return map;
}

EmbeddingMap parse_embeddings_csv(std::string_view text, std::size_t expected_dim) {
  EmbeddingMap map;
  for_each_line(text, [&](std::string_view line, std::size_t line_no) {
    const auto f = split_fields(line);
    if (f.size() != expected_dim + 2) {
      throw ValidationError("embedding csv line " + std::to_string(line_no) + ": expected " +
                            std::to_string(expected_dim) + " values, found " +
                            std::to_string(f.size() < 2 ? 0 : f.size() - 2));
    }
    const auto frame = to_integer(f[0]);
    const auto ordinal = to_integer(f[1]);
    if (!frame || !ordinal || *frame < 1 || *ordinal < 0) {
      throw ValidationError("embedding csv line " + std::to_string(line_no) + ": bad frame/ordinal");
    }
    std::vector<double> raw(expected_dim);
    for (std::size_t k = 0; k < expected_dim; ++k) {
      const auto v = to_number(f[k + 2]);
      if (!v) throw ValidationError("embedding csv line " + std::to_string(line_no) + ": bad value");
      raw[k] = *v;
    }
    insert_embedding(map, *frame, static_cast<std::uint32_t>(*ordinal), raw);
  });
  return map;
}

EmbeddingMap parse_embeddings(const std::filesystem::path& path, std::size_t expected_dim) {
  const std::string bytes = read_text_file(path);
  try {
    if (path.extension() == ".csv") return parse_embeddings_csv(bytes, expected_dim);
    return parse_embeddings_binary(bytes, expected_dim);
  } catch (const EmbeddingError& e) {
    throw EmbeddingError(path.string() + ": " + e.what());
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

std::string encode_embeddings(std::span<const EmbeddingRecord> records, std::size_t dim) {
  std::string out = "DEMB";
  append_u32_le(out, kEmbeddingVersion);
  append_u32_le(out, static_cast<std::uint32_t>(dim));
  append_u32_le(out, static_cast<std::uint32_t>(records.size()));
  out.reserve(16 + records.size() * (8 + 4 * dim));
  for (const auto& r : records) {
    if (r.values.size() != dim) throw ValidationError("embedding record has wrong dimension");
    append_u32_le(out, r.frame);
    append_u32_le(out, r.ordinal);
    for (float v : r.values) append_u32_le(out, std::bit_cast<std::uint32_t>(v));
  }
  return out;
}

void write_embeddings(const std::filesystem::path& path, std::span<const EmbeddingRecord> records,
                      std::size_t dim) {
  write_text_file(path, encode_embeddings(records, dim));
}

IngestStats attach_embeddings(DetectionSequence& seq, const EmbeddingMap& embeddings, double theta_low) {
  IngestStats stats;
  for (auto& fd : seq.frames) {
    std::vector<Detection> kept;
    kept.reserve(fd.detections.size());
    for (auto& d : fd.detections) {
      const auto it = embeddings.find({fd.frame, d.ordinal});
      if (it == embeddings.end()) {
        throw ValidationError("missing embedding for frame " + std::to_string(fd.frame) + " ordinal " +
                              std::to_string(d.ordinal));
      }
      d.embedding = it->second;
      if (d.score < 0.0 || d.score > 1.0) {
        d.score = std::clamp(d.score, 0.0, 1.0);
        ++stats.clamped_scores;
      }
      if (d.score < theta_low) {
        ++stats.dropped_low_score;
        continue;
      }
      kept.push_back(std::move(d));
    }
    fd.detections = std::move(kept);
  }
  return stats;
}

AffineMap parse_affines_text(std::string_view text) {
  AffineMap map;
  for_each_line(text, [&](std::string_view line, std::size_t line_no) {
    const auto f = split_fields(line);
    const std::string where = "affine line " + std::to_string(line_no);
    if (f.size() != 7) throw ValidationError(where + ": expected frame,a,b,tx,c,d,ty");
    const auto frame = to_integer(f[0]);
    if (!frame || *frame < 1) throw ValidationError(where + ": bad frame index");
    double v[6];
    for (int k = 0; k < 6; ++k) {
      const auto x = to_number(f[static_cast<std::size_t>(k + 1)]);
      if (!x) throw ValidationError(where + ": bad number");
      v[k] = *x;
    }
    const AffineTransform m{v[0], v[1], v[2], v[3], v[4], v[5]};
    if (m.is_degenerate()) throw DegenerateTransformError(where + ": degenerate transform (|det| <= 1e-9)");
    map[*frame] = m;
  });
  return map;
}

AffineMap parse_affines(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) return {};
  try {
    return parse_affines_text(read_text_file(path));
  } catch (const DegenerateTransformError& e) {
    throw DegenerateTransformError(path.string() + ": " + e.what());
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

AffineTransform affine_for(const AffineMap& affines, FrameIndex frame) {
  const auto it = affines.find(frame);
  return it == affines.end() ? AffineTransform::identity() : it->second;
}

std::string format_affines(const AffineMap& affines) {
  std::string out;
  for (const auto& [frame, m] : affines) {
    out += std::to_string(frame);
    for (double v : {m.a, m.b, m.tx, m.c, m.d, m.ty}) out += "," + format_double(v);
    out += '\n';
  }
  return out;
}

void write_affines(const std::filesystem::path& path, const AffineMap& affines) {
  write_text_file(path, format_affines(affines));
}

std::string format_results(std::vector<TrackOutput> outputs) {
  std::sort(outputs.begin(), outputs.end(), [](const TrackOutput& a, const TrackOutput& b) {
    return a.frame != b.frame ? a.frame < b.frame : a.id < b.id;
  });
  std::string out;
  for (const auto& o : outputs) {
    out += std::to_string(o.frame) + "," + std::to_string(o.id) + "," + format_double(o.box.x) + "," +
           format_double(o.box.y) + "," + format_double(o.box.w) + "," + format_double(o.box.h) + "," +
           format_double(o.score) + "," + std::to_string(o.class_id) + ",-1,-1\n";
  }
  return out;
}

void write_results(const std::filesystem::path& path, std::vector<TrackOutput> outputs) {
  write_text_file(path, format_results(std::move(outputs)));
}

std::string format_mot_lines(std::span<const MotLine> lines) {
  std::string out;
  for (const auto& l : lines) {
    out += std::to_string(l.frame) + "," + std::to_string(l.id) + "," + format_double(l.box.x) + "," +
           format_double(l.box.y) + "," + format_double(l.box.w) + "," + format_double(l.box.h) + "," +
           format_double(l.score) + "," + std::to_string(l.class_id) + "," +
           format_double(l.visibility.value_or(1.0)) + "\n";
  }
  return out;
}

RunConfig apply_run_config(const KeyValueConfig& cfg, RunConfig base) {
  cfg.require_known({"theta_high", "theta_low", "alpha_f", "w_a", "w_r", "radius", "key_bank_capacity",
                     "novelty_threshold", "iou_gate", "confirm_hits", "max_lost_age", "afs", "dmp",
                     "rotation", "estimate_affine", "seed", "embedding_dim", "detections", "embeddings",
                     "affines", "output"});
  TrackerConfig& t = base.tracker;
  t.theta_high = cfg.get_double("theta_high", t.theta_high);
  t.theta_low = cfg.get_double("theta_low", t.theta_low);
  t.alpha_f = cfg.get_double("alpha_f", t.alpha_f);
  t.w_a = cfg.get_double("w_a", t.w_a);
  t.w_r = cfg.get_double("w_r", t.w_r);
  t.radius_r = cfg.get_double("radius", t.radius_r);
  t.key_bank_capacity = static_cast<int>(cfg.get_int("key_bank_capacity", t.key_bank_capacity));
  t.novelty_threshold = cfg.get_double("novelty_threshold", t.novelty_threshold);
  t.iou_gate = cfg.get_double("iou_gate", t.iou_gate);
  t.confirm_hits = static_cast<int>(cfg.get_int("confirm_hits", t.confirm_hits));
  t.max_lost_age = static_cast<int>(cfg.get_int("max_lost_age", t.max_lost_age));
  t.afs_enabled = cfg.get_bool("afs", t.afs_enabled);
  t.dmp_enabled = cfg.get_bool("dmp", t.dmp_enabled);
  if (!cfg.get_bool("rotation", true)) t.w_r = 0.0;
  t.estimate_affine = cfg.get_bool("estimate_affine", t.estimate_affine);
  const long long seed = cfg.get_int("seed", static_cast<long long>(t.seed));
  if (seed < 0) throw ValidationError("config key 'seed' must be non-negative");
  t.seed = static_cast<std::uint64_t>(seed);
  const long long dim = cfg.get_int("embedding_dim", static_cast<long long>(base.embedding_dim));
  if (dim < 1) throw ValidationError("config key 'embedding_dim' must be positive");
  base.embedding_dim = static_cast<std::size_t>(dim);
  if (auto v = cfg.get("detections")) base.detections = *v;
  if (auto v = cfg.get("embeddings")) base.embeddings = *v;
  if (auto v = cfg.get("affines")) base.affines = std::filesystem::path(*v);
  if (auto v = cfg.get("output")) base.output = *v;
  return base;
}

}  // namespace drone_assoc
