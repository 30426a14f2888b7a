#pragma once

#include <random>
#include <stdexcept>
#include <vector>

#include "ptrack/skeleton.hpp"

namespace testutil {

// Pose with the given joints present, unit confidences, box from the points.
inline ptrack::Pose make_pose(int joint_count,
                              const std::vector<std::pair<int, ptrack::Keypoint>>& joints,
                              double margin = 0.0) {
    ptrack::Pose p = ptrack::Pose::empty(joint_count);
    for (const auto& [idx, kp] : joints) {
        p.keypoints[static_cast<std::size_t>(idx)] = kp;
    }
    const auto present = ptrack::present_keypoints(p);
    if (!present.empty()) p.bbox = ptrack::bbox_from_keypoints(present, margin);
    p.recompute_score();
    return p;
}

inline ptrack::Keypoint kp(double x, double y, double conf = 1.0) {
    ptrack::Keypoint k;
    k.x = x;
    k.y = y;
    k.p_loc = conf;
    k.p_avl = 1.0;
    k.p_conf = conf;
    return k;
}

// Full-skeleton pose around an anchor, jittered, all confidences 1.
inline ptrack::Pose random_pose(std::mt19937& rng, int joint_count, double cx, double cy,
                                double spread) {
    std::uniform_real_distribution<double> d(-spread, spread);
    std::vector<std::pair<int, ptrack::Keypoint>> joints;
    for (int j = 0; j < joint_count; ++j) {
        joints.emplace_back(j, kp(cx + d(rng), cy + d(rng)));
    }
    return make_pose(joint_count, joints);
}

}  // namespace testutil
