#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace ptrack {

/// A single body joint observation. `p_loc` is the peak heatmap response at
/// the decoded location, `p_avl` the predicted availability (visibility)
/// probability, and `p_conf` their product.
struct Keypoint {
    double x = 0.0;
    double y = 0.0;
    double p_loc = 1.0;
    double p_avl = 1.0;
    double p_conf = 1.0;
};

/// Axis-aligned box in pixel coordinates, corners inclusive.
struct BBox {
    double x_min = 0.0;
    double y_min = 0.0;
    double x_max = 0.0;
    double y_max = 0.0;

    double width() const { return x_max - x_min; }
    double height() const { return y_max - y_min; }
    double area() const { return width() * height(); }
    bool valid() const { return x_max >= x_min && y_max >= y_min; }
};

/// Skeleton layout shared by every pose in a run: joint count, per-joint
/// falloff constants for the OKS kernel, and the head segment used by the
/// evaluation matcher.
struct SkeletonSpec {
    std::vector<std::string> joint_names;
    std::vector<double> falloff;      // k_i, one per joint
    std::array<int, 2> head_pair{14, 12};

    int joint_count() const { return static_cast<int>(joint_names.size()); }

    /// Throws std::invalid_argument if sizes disagree, any k_i <= 0, or the
    /// head pair is degenerate.
    void validate() const;

    /// The 15-joint layout used by both PoseTrack releases, with COCO
    /// keypoint sigmas as falloff constants. Head top/bottom reuse the ear
    /// sigma since neither appears in the COCO set.
    static SkeletonSpec posetrack15();
};

/// One person in one frame: a fixed-length slot per joint (absent slots are
/// keypoints the detector did not produce or filtering removed), the
/// detection box, and the average keypoint confidence as score.
struct Pose {
    std::vector<std::optional<Keypoint>> keypoints;
    BBox bbox;
    double score = 0.0;

    static Pose empty(int joint_count) {
        Pose p;
        p.keypoints.resize(static_cast<std::size_t>(joint_count));
        return p;
    }

    int present_count() const;

    /// Mean p_conf over present keypoints, 0 if none. Stores and returns it.
    double recompute_score();
};

/// Intersection over union; 0 when the union has zero area.
double iou(const BBox& a, const BBox& b);

/// Object scale s = sqrt(box area), floored at 1 px for degenerate boxes.
double object_scale(const Pose& p);

/// Object keypoint similarity between two poses over the joints present in
/// both with p_conf > visibility_threshold. The kernel scale s^2 is the
/// geometric mean of the two boxes' areas, which keeps the measure symmetric.
/// Returns 0 when no joint qualifies.
double oks(const Pose& p, const Pose& q, const SkeletonSpec& spec,
           double visibility_threshold);

/// Minimum axis-aligned rectangle over the points, expanded on each side by
/// margin times the corresponding extent. Throws on an empty list.
BBox bbox_from_keypoints(const std::vector<Keypoint>& kps, double margin);

/// The present keypoints of a pose, in joint order.
std::vector<Keypoint> present_keypoints(const Pose& p);

}  // namespace ptrack
