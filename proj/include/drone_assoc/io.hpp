#pragma once

// File formats:
//   detections / GT / results  MOT text, `frame,id,x,y,w,h,score,class[,vis,...]`
//                              (frames 1-based, extra columns ignored)
//   embeddings                 binary sidecar, little-endian:
//                              "DEMB" | u32 version | u32 dim | u32 count, then
//                              count x (u32 frame | u32 ordinal | dim x f32);
//                              `.csv` files use `frame,ordinal,v0,...` instead
//   affines                    CSV `frame,a,b,tx,c,d,ty`, frame t-1 -> t
// A detection's ordinal is its 0-based position among the valid lines of its
// frame, in file order.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "drone_assoc/association.hpp"
#include "drone_assoc/config_file.hpp"
#include "drone_assoc/core.hpp"
#include "drone_assoc/motion.hpp"

namespace drone_assoc {

struct MotLine {
  FrameIndex frame = 1;
  TrackId id = -1;
  BoundingBox box;
  double score = 1.0;
  int class_id = 0;
  std::optional<double> visibility;
};

struct MotFile {
  std::vector<MotLine> lines;
  std::size_t malformed = 0;
};

// Blank lines are ignored. Lines with too few or non-numeric fields, frame < 1
// or a non-positive size are counted as malformed and skipped; more than 10%
// malformed lines is a ValidationError.
MotFile parse_mot_text(std::string_view text);
MotFile read_mot_file(const std::filesystem::path& path);

struct DetectionSequence {
  // Ascending frame order; only frames that have detections appear.
  std::vector<FrameDetections> frames;
  std::size_t malformed_lines = 0;
};

DetectionSequence group_detections(const MotFile& file);
DetectionSequence parse_detections(const std::filesystem::path& path);

// Result or ground-truth file as identity-labeled boxes per frame.
LabeledSequence to_labeled_sequence(const MotFile& file);
LabeledSequence parse_tracks(const std::filesystem::path& path);

using EmbeddingKey = std::pair<FrameIndex, std::uint32_t>;
using EmbeddingMap = std::map<EmbeddingKey, FeatureEmbedding>;

struct EmbeddingRecord {
  std::uint32_t frame = 0;
  std::uint32_t ordinal = 0;
  std::vector<float> values;
};

inline constexpr std::uint32_t kEmbeddingVersion = 1;

// Throws ValidationError on bad magic, a dimension other than `expected_dim`,
// truncation, or duplicate keys. Vectors are normalized on load.
EmbeddingMap parse_embeddings(const std::filesystem::path& path, std::size_t expected_dim);
EmbeddingMap parse_embeddings_binary(std::string_view bytes, std::size_t expected_dim);
EmbeddingMap parse_embeddings_csv(std::string_view text, std::size_t expected_dim);
std::string encode_embeddings(std::span<const EmbeddingRecord> records, std::size_t dim);
void write_embeddings(const std::filesystem::path& path, std::span<const EmbeddingRecord> records,
                      std::size_t dim);

struct IngestStats {
  std::size_t clamped_scores = 0;
  std::size_t dropped_low_score = 0;
};

// Gives every detection its embedding (a missing one is a ValidationError),
// clamps scores into [0, 1] and drops detections scoring below `theta_low`.
IngestStats attach_embeddings(DetectionSequence& seq, const EmbeddingMap& embeddings, double theta_low);

using AffineMap = std::map<FrameIndex, AffineTransform>;

// A path that does not exist yields an empty map (every frame identity).
// Degenerate or malformed lines are a ValidationError.
AffineMap parse_affines(const std::filesystem::path& path);
AffineMap parse_affines_text(std::string_view text);
AffineTransform affine_for(const AffineMap& affines, FrameIndex frame);
std::string format_affines(const AffineMap& affines);
void write_affines(const std::filesystem::path& path, const AffineMap& affines);

// Sorted by (frame, id): `frame,id,x,y,w,h,score,class,-1,-1`.
std::string format_results(std::vector<TrackOutput> outputs);
void write_results(const std::filesystem::path& path, std::vector<TrackOutput> outputs);

std::string format_mot_lines(std::span<const MotLine> lines);
void write_text_file(const std::filesystem::path& path, std::string_view contents);
std::string read_text_file(const std::filesystem::path& path);

struct RunConfig {
  TrackerConfig tracker;
  std::filesystem::path detections;
  std::filesystem::path embeddings;
  std::optional<std::filesystem::path> affines;
  std::filesystem::path output;
  std::size_t embedding_dim = 128;
};

// Overlays the keys present in `cfg` onto `base`. `rotation = false` sets
// w_r to 0. Unknown keys are a ValidationError.
RunConfig apply_run_config(const KeyValueConfig& cfg, RunConfig base = {});

}  // namespace drone_assoc
