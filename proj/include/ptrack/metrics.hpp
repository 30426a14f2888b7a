#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ptrack/skeleton.hpp"
#include "ptrack/tracker.hpp"

namespace ptrack {

/// One annotated person in one frame. Joint visibility is encoded by slot
/// presence in the pose; head_length is the head segment length in pixels
/// and sets the keypoint acceptance radius.
struct GtInstance {
    std::int64_t track_id = 0;
    Pose pose;
    double head_length = 1.0;
};

struct GtFrame {
    std::int64_t frame = 0;
    std::vector<GtInstance> instances;
};

using GroundTruthSequence = std::vector<GtFrame>;

/// Accepted (prediction, ground truth) pairs for one joint class in one
/// frame, as indices into the two instance lists.
struct JointMatching {
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
};

/// Per joint class, a maximum-cardinality minimum-total-distance one-to-one
/// matching between predicted keypoints and visible ground-truth keypoints.
/// A pair is only acceptable within tau_factor times the ground truth's head
/// segment length.
std::vector<JointMatching> match_joints(const std::vector<TrackedPose>& predictions,
                                        const GtFrame& gt, const SkeletonSpec& spec,
                                        double tau_factor);

struct MotaJointCounts {
    std::int64_t fp = 0;
    std::int64_t fn = 0;
    std::int64_t idsw = 0;
    std::int64_t gt = 0;
    double mota = 0.0;  // 1 - (fp+fn+idsw)/gt; 0 reported when gt = 0
};

struct MotaReport {
    std::vector<MotaJointCounts> per_joint;
    MotaJointCounts totals;
    bool no_ground_truth = false;  // total gt count was zero; MOTA undefined
};

/// MOTA arithmetic on raw counts.
double mota_from_counts(std::int64_t fp, std::int64_t fn, std::int64_t idsw, std::int64_t gt);

/// CLEAR-MOT evaluation over per-joint keypoint matchings. A ground-truth
/// identity keeps its previously matched predicted id while that pairing
/// continues to match; switching to a different id counts one identity
/// switch. Unmatched predictions are false positives, unmatched visible
/// ground-truth joints are misses. Predicted frames absent from the ground
/// truth are ignored.
MotaReport mota(const std::vector<TrackedFrame>& predictions, const GroundTruthSequence& gt,
                const SkeletonSpec& spec, double tau_factor);

struct ApReport {
    std::vector<double> per_joint_ap;
    std::vector<bool> joint_evaluated;  // false where no gt keypoints exist
    double map = 0.0;                   // mean over evaluated joints
};

/// Average precision per joint class: predictions ranked by pose score over
/// the whole sequence, matched greedily against unclaimed visible ground
/// truth within the acceptance radius, AP as the area under the
/// interpolated precision-recall curve.
ApReport map_eval(const std::vector<TrackedFrame>& predictions, const GroundTruthSequence& gt,
                  const SkeletonSpec& spec, double tau_factor);

/// Fixed-layout text report: one row per joint plus totals.
std::string report_text(const MotaReport& mota_report, const ApReport& ap_report,
                        const SkeletonSpec& spec);

/// Same content as report_text, machine readable.
std::string report_json(const MotaReport& mota_report, const ApReport& ap_report,
                        const SkeletonSpec& spec);

}  // namespace ptrack
