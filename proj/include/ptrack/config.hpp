#pragma once

#include <filesystem>
#include <string>

#include "ptrack/tracker.hpp"

namespace ptrack {

/// Run-wide settings: tracker thresholds, evaluation radius, feature
/// dimension and flow source. Defaults carry the published operating point
/// (confidence 0.35, OKS NMS 0.6, retrieval distance 100, IoU gate 0.1).
struct RunConfig {
    TrackerConfig tracker;
    double tau_factor = 0.5;
    int feature_dim = 512;
    std::string flow_provider = "identity";  // identity | constant_velocity | file
    bool ignore_availability = false;

    void validate() const;
};

/// Parses flat "key = value" text ('#' starts a comment). Unknown keys and
/// out-of-range values are errors. Keys:
///   conf_threshold, match_threshold, nms_oks_threshold, revival_margin,
///   history_depth, enable_revision, enable_reid,
///   revision_score_threshold, revision_overlap_threshold, revision_iou_gate,
///   revision_conf_threshold, reid_distance_threshold, reid_max_age,
///   tau_factor, feature_dim, flow_provider, ignore_availability
RunConfig parse_run_config(const std::string& text, const std::string& origin = "config");

RunConfig load_run_config(const std::filesystem::path& path);

}  // namespace ptrack
