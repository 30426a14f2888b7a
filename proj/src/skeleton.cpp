#include "ptrack/skeleton.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ptrack {

void SkeletonSpec::validate() const {
    const auto k = joint_names.size();
    if (k == 0) {
        throw std::invalid_argument("SkeletonSpec: joint count must be >= 1");
    }
    if (falloff.size() != k) {
        throw std::invalid_argument("SkeletonSpec: falloff size must equal joint count");
    }
    for (double ki : falloff) {
        if (!(ki > 0.0)) {
            throw std::invalid_argument("SkeletonSpec: every falloff constant must be > 0");
        }
    }
    const int n = static_cast<int>(k);
    if (head_pair[0] == head_pair[1] || head_pair[0] < 0 || head_pair[1] < 0 ||
        head_pair[0] >= n || head_pair[1] >= n) {
        throw std::invalid_argument("SkeletonSpec: head pair must be two distinct joint indices");
    }
}

SkeletonSpec SkeletonSpec::posetrack15() {
    SkeletonSpec spec;
    spec.joint_names = {
        "right_ankle", "right_knee",  "right_hip",      "left_hip",
        "left_knee",   "left_ankle",  "right_wrist",    "right_elbow",
        "right_shoulder", "left_shoulder", "left_elbow", "left_wrist",
        "head_bottom", "nose",        "head_top",
    };
    spec.falloff = {
        0.089, 0.087, 0.107, 0.107, 0.087, 0.089,  // legs
        0.062, 0.072, 0.079, 0.079, 0.072, 0.062,  // arms
        0.035, 0.026, 0.035,                       // head (ear sigma reused)
    };
    spec.head_pair = {14, 12};
    return spec;
}

int Pose::present_count() const {
    int n = 0;
    for (const auto& kp : keypoints) {
        if (kp.has_value()) ++n;
    }
    return n;
}

double Pose::recompute_score() {
    double sum = 0.0;
    int n = 0;
    for (const auto& kp : keypoints) {
        if (kp.has_value()) {
            sum += kp->p_conf;
            ++n;
        }
    }
    score = n > 0 ? sum / n : 0.0;
    return score;
}

double iou(const BBox& a, const BBox& b) {
    const double ix = std::max(0.0, std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min));
    const double iy = std::max(0.0, std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min));
    const double inter = ix * iy;
    const double uni = a.area() + b.area() - inter;
    return uni > 0.0 ? inter / uni : 0.0;
}

double object_scale(const Pose& p) {
    const double area = p.bbox.area();
    if (area == 0.0) return 1.0;
    return std::sqrt(area);
}

double oks(const Pose& p, const Pose& q, const SkeletonSpec& spec,
           double visibility_threshold) {
    const auto k = static_cast<std::size_t>(spec.joint_count());
    if (p.keypoints.size() != k || q.keypoints.size() != k) {
        throw std::invalid_argument("oks: poses do not conform to the skeleton spec");
    }
    const double s2 = object_scale(p) * object_scale(q);  // geometric mean of areas
    double sum = 0.0;
    int support = 0;
    for (std::size_t i = 0; i < k; ++i) {
        const auto& a = p.keypoints[i];
        const auto& b = q.keypoints[i];
        if (!a || !b) continue;
        if (a->p_conf <= visibility_threshold || b->p_conf <= visibility_threshold) continue;
        const double dx = a->x - b->x;
        const double dy = a->y - b->y;
        const double ki = spec.falloff[i];
        sum += std::exp(-(dx * dx + dy * dy) / (2.0 * s2 * ki * ki));
        ++support;
    }
    return support > 0 ? sum / support : 0.0;
}

BBox bbox_from_keypoints(const std::vector<Keypoint>& kps, double margin) {
    if (kps.empty()) {
        throw std::invalid_argument("bbox_from_keypoints: empty keypoint list");
    }
    BBox box{kps[0].x, kps[0].y, kps[0].x, kps[0].y};
    for (const auto& kp : kps) {
        box.x_min = std::min(box.x_min, kp.x);
        box.y_min = std::min(box.y_min, kp.y);
        box.x_max = std::max(box.x_max, kp.x);
        box.y_max = std::max(box.y_max, kp.y);
    }
    const double mx = margin * box.width();
    const double my = margin * box.height();
    return BBox{box.x_min - mx, box.y_min - my, box.x_max + mx, box.y_max + my};
}

std::vector<Keypoint> present_keypoints(const Pose& p) {
    std::vector<Keypoint> out;
    out.reserve(p.keypoints.size());
    for (const auto& kp : p.keypoints) {
        if (kp.has_value()) out.push_back(*kp);
    }
    return out;
}

}  // namespace ptrack
