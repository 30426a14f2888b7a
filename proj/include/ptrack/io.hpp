#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ptrack/metrics.hpp"
#include "ptrack/revision.hpp"
#include "ptrack/synth.hpp"
#include "ptrack/tracker.hpp"

namespace ptrack {

/// Malformed or inconsistent input data; the message names the file and the
/// offending record or field.
class ParseError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct ImageInfo {
    std::int64_t frame_id = 0;
    std::string file_name;
    int width = 0;
    int height = 0;
};

/// One pose record. Keypoints are K (x, y, c) triplets where c is the
/// location probability and c <= 0 marks an absent joint; the optional
/// availability list supplies per-joint availability probabilities (1.0
/// assumed when missing, which reduces confidences to plain location
/// probabilities).
struct Annotation {
    std::int64_t frame_id = 0;
    std::optional<std::int64_t> track_id;
    std::array<double, 4> bbox{0, 0, 0, 0};  // x, y, w, h
    std::vector<double> keypoints;           // 3K values
    std::optional<std::vector<double>> availability;  // K values
    double score = 0.0;
    std::optional<double> head_length;  // px, ground-truth files only
};

struct CategoryInfo {
    std::vector<std::string> joint_names;
    std::vector<double> falloff;
    std::array<int, 2> head_pair{14, 12};
};

struct AnnotationDocument {
    std::vector<ImageInfo> images;
    std::vector<Annotation> annotations;
    std::optional<CategoryInfo> category;

    /// Skeleton from the embedded category, or the 15-joint default.
    SkeletonSpec skeleton() const;
    int joint_count() const;
};

AnnotationDocument load_annotations(const std::filesystem::path& path);

/// Canonical serialization: sorted keys, shortest round-trip floats, a
/// trailing newline. Documents holding non-finite values are refused.
void save_annotations(const AnnotationDocument& doc, const std::filesystem::path& path);

/// Document -> per-frame tracker inputs, one entry per image frame in
/// ascending frame order. With ignore_availability the availability lists
/// are treated as all-ones.
std::vector<FrameObservations> observations_from_document(const AnnotationDocument& doc,
                                                          bool ignore_availability = false);

/// Document -> evaluation ground truth. Every annotation needs a track id;
/// the acceptance radius comes from head_length when present, else from the
/// head-pair keypoints, else from the box diagonal.
GroundTruthSequence ground_truth_from_document(const AnnotationDocument& doc);

/// Document -> scored, identity-carrying predictions for the evaluators.
std::vector<TrackedFrame> predictions_from_document(const AnnotationDocument& doc);

AnnotationDocument document_from_tracks(const std::vector<TrackedFrame>& frames,
                                        const std::vector<ImageInfo>& images,
                                        const SkeletonSpec& spec);
AnnotationDocument document_from_ground_truth(const GroundTruthSequence& gt,
                                              const std::vector<ImageInfo>& images,
                                              const SkeletonSpec& spec);
AnnotationDocument document_from_observations(const std::vector<FrameObservations>& obs,
                                              const std::vector<ImageInfo>& images,
                                              const SkeletonSpec& spec);

// Dense flow files: magic "PEH1", then width and height as little-endian
// u32, then height*width little-endian float pairs (dx, dy), row-major.
FlowField read_flow(const std::filesystem::path& path);
void write_flow(const FlowField& flow, const std::filesystem::path& path);

/// flow_%06d.bin; the transition t-1 -> t is stored under index t.
std::string flow_file_name(std::int64_t frame);

/// Appearance features keyed by (frame id, detection index within frame).
using FeatureTable = std::map<std::pair<std::int64_t, std::int64_t>, FeatureVector>;

// Feature files: one "frame_id, detection_id, v1, v2, ..." record per line.
FeatureTable load_features(const std::filesystem::path& path);
void save_features(const FeatureTable& table, const std::filesystem::path& path);

/// Copies features onto the matching observation slots; records that point
/// at a missing frame or detection index are an error.
void attach_features(std::vector<FrameObservations>& obs, const FeatureTable& table);

/// Synthetic image metadata for a scenario (frame_%06d.jpg names).
std::vector<ImageInfo> bundle_images(const ScenarioBundle& bundle);

/// Writes detections.json, gt.json, features.txt and flow/flow_*.bin.
void write_bundle(const ScenarioBundle& bundle, const std::filesystem::path& dir);

/// Loads flow_%06d.bin files on demand from a directory. Thread safe; the
/// most recent field is cached since the tracker queries one frame at a
/// time.
class DenseFileFlowProvider final : public FlowProvider {
  public:
    explicit DenseFileFlowProvider(std::filesystem::path dir);

    FlowField flow_for(const std::vector<std::array<double, 2>>& recent_centers,
                       std::int64_t frame) const override;

  private:
    std::filesystem::path dir_;
    mutable std::mutex mutex_;
    mutable std::optional<std::pair<std::int64_t, FlowField>> cache_;
};

}  // namespace ptrack
