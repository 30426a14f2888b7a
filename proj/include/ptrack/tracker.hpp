#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "ptrack/association.hpp"
#include "ptrack/reid.hpp"
#include "ptrack/revision.hpp"
#include "ptrack/skeleton.hpp"

namespace ptrack {

enum class TrackState { active, lost };

/// One tracked identity. `last_observed` is the frame of the last real
/// detection backing the pose; a flow-revived pose does not advance it, which
/// limits revival to a single frame per miss.
struct Track {
    std::int64_t id = 0;
    Pose pose;
    std::vector<Pose> history;  // most recent last, bounded by history_depth
    TrackState state = TrackState::active;
    std::optional<std::int64_t> lost_since;
    std::optional<FeatureVector> feature;
    std::int64_t last_observed = -1;
};

struct TrackerConfig {
    double conf_threshold = 0.35;
    double match_threshold = 0.2;
    double nms_oks_threshold = 0.6;
    RevisionConfig revision;
    ReidConfig reid;
    double revival_margin = 0.10;
    int history_depth = 2;
    bool enable_revision = true;
    bool enable_reid = true;

    void validate() const;
};

/// Per-frame input to the tracker: detections with populated location and
/// availability probabilities, optional per-detection appearance features,
/// and optionally the dense flow for the transition into this frame.
struct FrameObservations {
    std::int64_t frame = 0;
    std::vector<Pose> detections;
    std::vector<std::optional<FeatureVector>> features;  // parallel to detections, or empty
    std::optional<FlowField> flow;                       // t-1 -> t
};

struct TrackedPose {
    std::int64_t track_id = 0;
    Pose pose;
};

struct TrackedFrame {
    std::int64_t frame = 0;
    std::vector<TrackedPose> poses;  // sorted by track id
};

/// Online multi-person pose tracker. Per frame it fuses and filters keypoint
/// confidences, deduplicates detections with OKS NMS, associates detections
/// to active trajectories with an OKS-weighted Hungarian assignment, revives
/// unmatched trajectories by flow warping, retrieves lost identities by
/// appearance, and assigns fresh ids to the remainder. Strictly sequential
/// per instance.
class Tracker {
  public:
    Tracker(SkeletonSpec spec, TrackerConfig cfg,
            std::shared_ptr<const FlowProvider> flow_provider = nullptr);

    /// Advances one frame. Frame indices must be strictly increasing and
    /// detections must conform to the skeleton spec.
    TrackedFrame step(const FrameObservations& obs);

    const std::vector<Track>& active_tracks() const { return tracks_; }
    const Gallery& gallery() const { return gallery_; }

  private:
    FlowField flow_for_track(const Track& track, const FrameObservations& obs) const;

    SkeletonSpec spec_;
    TrackerConfig cfg_;
    std::shared_ptr<const FlowProvider> flow_provider_;
    std::vector<Track> tracks_;  // active tracks, sorted by id
    Gallery gallery_;
    std::int64_t next_id_ = 1;
    std::optional<std::int64_t> last_frame_;
};

/// Folds Tracker::step over a sequence. Deterministic for identical inputs
/// and configuration.
std::vector<TrackedFrame> run(const std::vector<FrameObservations>& sequence,
                              const SkeletonSpec& spec, const TrackerConfig& cfg,
                              std::shared_ptr<const FlowProvider> flow_provider = nullptr);

}  // namespace ptrack
