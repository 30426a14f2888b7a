#include "ptrack/revision.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <stdexcept>

namespace ptrack {

FlowField FlowField::uniform(double dx, double dy) {
    FlowField f;
    f.width = 1;
    f.height = 1;
    f.vectors = {{static_cast<float>(dx), static_cast<float>(dy)}};
    return f;
}

FlowField FlowField::zeros(int width, int height) {
    FlowField f;
    f.width = width;
    f.height = height;
    f.vectors.assign(static_cast<std::size_t>(width) * height, {0.0f, 0.0f});
    return f;
}

std::array<double, 2> FlowField::sample(double x, double y) const {
    const double cx = std::clamp(x, 0.0, static_cast<double>(width - 1));
    const double cy = std::clamp(y, 0.0, static_cast<double>(height - 1));
    const int x0 = static_cast<int>(std::floor(cx));
    const int y0 = static_cast<int>(std::floor(cy));
    const int x1 = std::min(x0 + 1, width - 1);
    const int y1 = std::min(y0 + 1, height - 1);
    const double fx = cx - x0;
    const double fy = cy - y0;
    std::array<double, 2> out{};
    for (int c = 0; c < 2; ++c) {
        const double top = (1.0 - fx) * at(x0, y0)[c] + fx * at(x1, y0)[c];
        const double bot = (1.0 - fx) * at(x0, y1)[c] + fx * at(x1, y1)[c];
        out[c] = (1.0 - fy) * top + fy * bot;
    }
    return out;
}

void RevisionConfig::validate() const {
    const double vals[] = {score_threshold, overlap_threshold, iou_gate,
                           conf_threshold, nms_oks_threshold};
    for (double v : vals) {
        if (!(v >= 0.0 && v <= 1.0)) {
            throw std::invalid_argument("RevisionConfig: thresholds must lie in [0,1]");
        }
    }
}

Pose warp_pose(const Pose& p, const FlowField& flow) {
    Pose out = p;
    for (auto& kp : out.keypoints) {
        if (!kp.has_value()) continue;
        const auto d = flow.sample(kp->x, kp->y);
        kp->x += d[0];
        kp->y += d[1];
    }
    const auto moved = present_keypoints(out);
    if (!moved.empty()) {
        out.bbox = bbox_from_keypoints(moved, 0.0);
    }
    return out;
}

std::optional<RevivalCandidate> propose_box(const Pose& warped, double margin) {
    const auto kps = present_keypoints(warped);
    if (kps.size() < 2) return std::nullopt;
    RevivalCandidate cand;
    cand.box = bbox_from_keypoints(kps, margin);
    cand.pose = warped;
    cand.pose.bbox = cand.box;
    return cand;
}

std::vector<RevivalCandidate> score_filter(const std::vector<RevivalCandidate>& candidates,
                                           const RevisionConfig& cfg) {
    std::vector<RevivalCandidate> out;
    for (const auto& cand : candidates) {
        if (cand.pose.score > cfg.score_threshold) out.push_back(cand);
    }
    return out;
}

double overlap_similarity(const Pose& p, const Pose& q, const SkeletonSpec& spec,
                          const RevisionConfig& cfg) {
    const auto k = static_cast<std::size_t>(spec.joint_count());
    if (p.keypoints.size() != k || q.keypoints.size() != k) {
        throw std::invalid_argument("overlap_similarity: poses do not conform to the skeleton spec");
    }
    if (!(iou(p.bbox, q.bbox) > cfg.iou_gate)) return 0.0;
    const double s2 = object_scale(p) * object_scale(q);
    double sum = 0.0;
    int support = 0;
    for (std::size_t i = 0; i < k; ++i) {
        const auto& a = p.keypoints[i];
        const auto& b = q.keypoints[i];
        if (!a || !b) continue;
        if (!(a->p_conf > cfg.conf_threshold) || !(b->p_conf > cfg.conf_threshold)) continue;
        const double dx = a->x - b->x;
        const double dy = a->y - b->y;
        const double ki = spec.falloff[i];
        sum += std::exp(-(dx * dx + dy * dy) / (2.0 * s2 * ki * ki));
        ++support;
    }
    return support > 0 ? sum / support : 0.0;
}

namespace {

// Indices sorted by descending score; equal scores keep input order.
std::vector<std::size_t> by_descending_score(std::size_t n,
                                             const std::function<double(std::size_t)>& score) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return score(a) > score(b); });
    return order;
}

}  // namespace

std::vector<RevivalCandidate> suppress_candidates(const std::vector<RevivalCandidate>& candidates,
                                                  const std::vector<Pose>& detections,
                                                  const SkeletonSpec& spec,
                                                  const RevisionConfig& cfg) {
    const auto order = by_descending_score(
        candidates.size(), [&](std::size_t i) { return candidates[i].pose.score; });
    std::vector<char> kept(candidates.size(), 0);
    std::vector<std::size_t> accepted;
    for (std::size_t i : order) {
        bool duplicate = false;
        for (const auto& det : detections) {
            if (overlap_similarity(candidates[i].pose, det, spec, cfg) > cfg.overlap_threshold) {
                duplicate = true;
                break;
            }
        }
        for (std::size_t j : accepted) {
            if (duplicate) break;
            if (overlap_similarity(candidates[i].pose, candidates[j].pose, spec, cfg) >
                cfg.overlap_threshold) {
                duplicate = true;
            }
        }
        if (!duplicate) {
            kept[i] = 1;
            accepted.push_back(i);
        }
    }
    std::vector<RevivalCandidate> out;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        if (kept[i]) out.push_back(candidates[i]);
    }
    return out;
}

std::vector<std::size_t> oks_nms_indices(const std::vector<Pose>& poses,
                                         const SkeletonSpec& spec, double threshold) {
    const auto order =
        by_descending_score(poses.size(), [&](std::size_t i) { return poses[i].score; });
    std::vector<std::size_t> accepted;
    for (std::size_t i : order) {
        bool suppressed = false;
        for (std::size_t j : accepted) {
            if (oks(poses[i], poses[j], spec, 0.0) > threshold) {
                suppressed = true;
                break;
            }
        }
        if (!suppressed) accepted.push_back(i);
    }
    std::sort(accepted.begin(), accepted.end());
    return accepted;
}

std::vector<Pose> oks_nms(const std::vector<Pose>& poses, const SkeletonSpec& spec,
                          double threshold) {
    std::vector<Pose> out;
    for (std::size_t i : oks_nms_indices(poses, spec, threshold)) {
        out.push_back(poses[i]);
    }
    return out;
}

FlowField ConstantVelocityFlowProvider::flow_for(
    const std::vector<std::array<double, 2>>& recent_centers, std::int64_t) const {
    const std::size_t n = recent_centers.size();
    if (n < 2) return FlowField::uniform(0.0, 0.0);
    return FlowField::uniform(recent_centers[n - 1][0] - recent_centers[n - 2][0],
                              recent_centers[n - 1][1] - recent_centers[n - 2][1]);
}

}  // namespace ptrack
