#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "ptrack/skeleton.hpp"

namespace ptrack {

/// Dense per-pixel displacement grid for one frame transition (t-1 -> t),
/// row-major. Components are stored as 32-bit floats, matching the on-disk
/// format. A 1x1 field acts as a uniform displacement.
struct FlowField {
    int width = 0;
    int height = 0;
    std::vector<std::array<float, 2>> vectors;  // (dx, dy) per pixel

    static FlowField uniform(double dx, double dy);
    static FlowField zeros(int width, int height);

    const std::array<float, 2>& at(int x, int y) const {
        return vectors[static_cast<std::size_t>(y) * width + x];
    }
    std::array<float, 2>& at(int x, int y) {
        return vectors[static_cast<std::size_t>(y) * width + x];
    }

    /// Bilinearly interpolated displacement at (x, y); coordinates outside
    /// the grid clamp to the nearest edge vector.
    std::array<double, 2> sample(double x, double y) const;
};

struct RevisionConfig {
    double score_threshold = 0.35;    // min average keypoint confidence of a revived box
    double overlap_threshold = 0.5;   // suppression cutoff on the shared-keypoint overlap
    double iou_gate = 0.1;            // overlap is forced to 0 at or below this box IoU
    double conf_threshold = 0.35;     // per-keypoint confidence gate in the overlap metric
    double nms_oks_threshold = 0.6;   // detection-stage OKS NMS

    void validate() const;
};

/// A revived-box proposal: the warped pose and its bounding rectangle,
/// tagged with the trajectory it came from.
struct RevivalCandidate {
    BBox box;
    Pose pose;
    std::int64_t track_id = -1;
};

/// Translates every keypoint of p by the flow sampled at its location.
/// Probabilities carry over; the box is recomputed from the moved keypoints
/// (kept as-is for an empty pose).
Pose warp_pose(const Pose& p, const FlowField& flow);

/// Minimum bounding rectangle over the warped keypoints, expanded by
/// margin. Poses with fewer than two keypoints are not revivable and yield
/// nullopt.
std::optional<RevivalCandidate> propose_box(const Pose& warped, double margin);

/// Keeps candidates whose pose score exceeds cfg.score_threshold.
std::vector<RevivalCandidate> score_filter(const std::vector<RevivalCandidate>& candidates,
                                           const RevisionConfig& cfg);

/// Shared-keypoint overlap between two poses: 0 unless their boxes overlap
/// with IoU above cfg.iou_gate, otherwise the mean OKS kernel over joints
/// confident (p_conf > cfg.conf_threshold) in both. Empty support yields 0.
double overlap_similarity(const Pose& p, const Pose& q, const SkeletonSpec& spec,
                          const RevisionConfig& cfg);

/// Drops candidates that duplicate a current detection or a higher-scoring
/// accepted candidate (overlap above cfg.overlap_threshold). Candidates are
/// processed in descending score order.
std::vector<RevivalCandidate> suppress_candidates(const std::vector<RevivalCandidate>& candidates,
                                                  const std::vector<Pose>& detections,
                                                  const SkeletonSpec& spec,
                                                  const RevisionConfig& cfg);

/// Greedy NMS in descending score order with OKS as the overlap metric.
/// Returns the indices of kept poses in input order.
std::vector<std::size_t> oks_nms_indices(const std::vector<Pose>& poses,
                                         const SkeletonSpec& spec, double threshold);

/// Same, returning the surviving poses.
std::vector<Pose> oks_nms(const std::vector<Pose>& poses, const SkeletonSpec& spec,
                          double threshold);

/// Source of flow for a frame transition, standing in for a dense optical
/// flow estimator. Implementations must tolerate concurrent calls for
/// distinct frames.
class FlowProvider {
  public:
    virtual ~FlowProvider() = default;

    /// Flow for transition (frame-1 -> frame) as applied to one trajectory.
    /// recent_centers holds the trajectory's last box centers, oldest first;
    /// dense providers ignore them.
    virtual FlowField flow_for(const std::vector<std::array<double, 2>>& recent_centers,
                               std::int64_t frame) const = 0;
};

/// Zero flow everywhere.
class IdentityFlowProvider final : public FlowProvider {
  public:
    FlowField flow_for(const std::vector<std::array<double, 2>>&,
                       std::int64_t) const override {
        return FlowField::uniform(0.0, 0.0);
    }
};

/// Uniform per-track flow equal to the displacement between the track's two
/// most recent centers; zero until two are available.
class ConstantVelocityFlowProvider final : public FlowProvider {
  public:
    FlowField flow_for(const std::vector<std::array<double, 2>>& recent_centers,
                       std::int64_t) const override;
};

}  // namespace ptrack
