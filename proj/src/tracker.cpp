#include "ptrack/tracker.hpp"

#include <algorithm>
#include <stdexcept>
#include <utility>

#include "ptrack/confidence.hpp"

namespace ptrack {

namespace {

std::array<double, 2> box_center(const BBox& b) {
    return {0.5 * (b.x_min + b.x_max), 0.5 * (b.y_min + b.y_max)};
}

std::vector<std::array<double, 2>> recent_centers(const Track& t) {
    std::vector<std::array<double, 2>> centers;
    centers.reserve(t.history.size());
    for (const auto& pose : t.history) centers.push_back(box_center(pose.bbox));
    return centers;
}

void push_history(Track& t, const Pose& pose, int depth) {
    t.history.push_back(pose);
    while (static_cast<int>(t.history.size()) > depth) {
        t.history.erase(t.history.begin());
    }
}

}  // namespace

void TrackerConfig::validate() const {
    const double unit[] = {conf_threshold, match_threshold, nms_oks_threshold};
    for (double v : unit) {
        if (!(v >= 0.0 && v <= 1.0)) {
            throw std::invalid_argument("TrackerConfig: thresholds must lie in [0,1]");
        }
    }
    if (!(revival_margin >= 0.0)) {
        throw std::invalid_argument("TrackerConfig: revival margin must be >= 0");
    }
    if (history_depth < 2) {
        throw std::invalid_argument("TrackerConfig: history depth must be >= 2");
    }
    revision.validate();
    reid.validate();
}

Tracker::Tracker(SkeletonSpec spec, TrackerConfig cfg,
                 std::shared_ptr<const FlowProvider> flow_provider)
    : spec_(std::move(spec)), cfg_(cfg), flow_provider_(std::move(flow_provider)) {
    spec_.validate();
    cfg_.validate();
}

FlowField Tracker::flow_for_track(const Track& track, const FrameObservations& obs) const {
    if (obs.flow.has_value()) return *obs.flow;
    if (flow_provider_) return flow_provider_->flow_for(recent_centers(track), obs.frame);
    return FlowField::uniform(0.0, 0.0);
}

TrackedFrame Tracker::step(const FrameObservations& obs) {
    if (last_frame_.has_value() && obs.frame <= *last_frame_) {
        throw std::invalid_argument("Tracker::step: frame indices must be strictly increasing");
    }
    const auto k = static_cast<std::size_t>(spec_.joint_count());
    for (const auto& det : obs.detections) {
        if (det.keypoints.size() != k) {
            throw std::invalid_argument("Tracker::step: detection does not conform to the skeleton spec");
        }
    }
    if (!obs.features.empty() && obs.features.size() != obs.detections.size()) {
        throw std::invalid_argument("Tracker::step: feature list must parallel detections");
    }

    // Confidence fusion and filtering; detections left without keypoints are
    // unusable and dropped.
    std::vector<Pose> dets;
    std::vector<std::optional<FeatureVector>> det_features;
    for (std::size_t i = 0; i < obs.detections.size(); ++i) {
        Pose p = obs.detections[i];
        for (auto& kp : p.keypoints) {
            if (kp.has_value()) kp->p_conf = fuse_confidence(kp->p_avl, kp->p_loc);
        }
        p = filter_keypoints(p, cfg_.conf_threshold);
        if (p.present_count() == 0) continue;
        dets.push_back(std::move(p));
        det_features.push_back(obs.features.empty() ? std::nullopt : obs.features[i]);
    }

    // Detection-stage NMS on the OKS metric.
    {
        const auto keep = oks_nms_indices(dets, spec_, cfg_.nms_oks_threshold);
        std::vector<Pose> kept;
        std::vector<std::optional<FeatureVector>> kept_features;
        for (std::size_t i : keep) {
            kept.push_back(std::move(dets[i]));
            kept_features.push_back(std::move(det_features[i]));
        }
        dets = std::move(kept);
        det_features = std::move(kept_features);
    }

    // Hungarian association against active trajectories.
    std::vector<Pose> track_poses;
    track_poses.reserve(tracks_.size());
    for (const auto& t : tracks_) track_poses.push_back(t.pose);
    const SimilarityMatrix sim =
        build_similarity(track_poses, dets, spec_, cfg_.conf_threshold);
    const AssignmentResult assoc =
        gate(hungarian_assign(sim), sim, cfg_.match_threshold);

    std::vector<char> track_resolved(tracks_.size(), 0);
    std::vector<char> det_claimed(dets.size(), 0);
    for (const auto& match : assoc.matches) {
        Track& t = tracks_[match.track];
        t.pose = dets[match.detection];
        push_history(t, t.pose, cfg_.history_depth);
        t.last_observed = obs.frame;
        if (det_features[match.detection].has_value()) {
            t.feature = det_features[match.detection];
        }
        track_resolved[match.track] = 1;
        det_claimed[match.detection] = 1;
    }

    // Bbox revision: warp unmatched trajectories forward, keep confident
    // proposals that do not duplicate a detection or each other.
    if (cfg_.enable_revision) {
        std::vector<RevivalCandidate> candidates;
        std::vector<std::size_t> candidate_track_index;
        for (std::size_t ti : assoc.unmatched_tracks) {
            const Track& t = tracks_[ti];
            if (t.last_observed != obs.frame - 1) continue;  // single-frame revival window
            const Pose warped = warp_pose(t.pose, flow_for_track(t, obs));
            auto cand = propose_box(warped, cfg_.revival_margin);
            if (!cand.has_value()) continue;
            cand->track_id = t.id;
            candidates.push_back(std::move(*cand));
            candidate_track_index.push_back(ti);
        }
        const auto scored = score_filter(candidates, cfg_.revision);
        const auto survivors = suppress_candidates(scored, dets, spec_, cfg_.revision);
        for (const auto& cand : survivors) {
            for (std::size_t j = 0; j < candidates.size(); ++j) {
                if (candidates[j].track_id != cand.track_id) continue;
                Track& t = tracks_[candidate_track_index[j]];
                t.pose = cand.pose;
                push_history(t, t.pose, cfg_.history_depth);
                track_resolved[candidate_track_index[j]] = 1;
                break;
            }
        }
    }

    // Identity retrieval for detections the association left unclaimed.
    std::vector<Track> new_tracks;
    for (std::size_t di = 0; di < dets.size(); ++di) {
        if (det_claimed[di]) continue;
        std::optional<std::int64_t> restored;
        if (cfg_.enable_reid && det_features[di].has_value()) {
            restored = gallery_.retrieve(*det_features[di], cfg_.reid);
        }
        Track t;
        t.id = restored.has_value() ? *restored : next_id_++;
        t.pose = dets[di];
        push_history(t, t.pose, cfg_.history_depth);
        t.state = TrackState::active;
        t.last_observed = obs.frame;
        t.feature = det_features[di];
        new_tracks.push_back(std::move(t));
    }

    // Unmatched, unrevived trajectories go lost; their appearance enters the
    // gallery for later retrieval.
    std::vector<Track> still_active;
    for (std::size_t ti = 0; ti < tracks_.size(); ++ti) {
        if (track_resolved[ti]) {
            still_active.push_back(std::move(tracks_[ti]));
            continue;
        }
        Track& t = tracks_[ti];
        t.state = TrackState::lost;
        t.lost_since = obs.frame;
        if (cfg_.enable_reid && t.feature.has_value()) {
            gallery_.insert(t.id, *t.feature, obs.frame);
        }
    }
    tracks_ = std::move(still_active);
    for (auto& t : new_tracks) tracks_.push_back(std::move(t));
    std::sort(tracks_.begin(), tracks_.end(),
              [](const Track& a, const Track& b) { return a.id < b.id; });

    if (cfg_.enable_reid) gallery_.prune(obs.frame, cfg_.reid);

    last_frame_ = obs.frame;
    TrackedFrame out;
    out.frame = obs.frame;
    for (const auto& t : tracks_) out.poses.push_back(TrackedPose{t.id, t.pose});
    return out;
}

std::vector<TrackedFrame> run(const std::vector<FrameObservations>& sequence,
                              const SkeletonSpec& spec, const TrackerConfig& cfg,
                              std::shared_ptr<const FlowProvider> flow_provider) {
    Tracker tracker(spec, cfg, std::move(flow_provider));
    std::vector<TrackedFrame> out;
    out.reserve(sequence.size());
    for (const auto& obs : sequence) {
        out.push_back(tracker.step(obs));
    }
    return out;
}

}  // namespace ptrack
