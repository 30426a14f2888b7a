#include "ptrack/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

#include "ptrack/association.hpp"

namespace ptrack {

namespace {

// Large enough that matching one more feasible pair always beats any
// distance saving, so cardinality is maximized first.
constexpr double kFeasibleBonus = 1e5;

struct JointObservation {
    std::size_t instance = 0;  // index into the frame's instance list
    double x = 0.0;
    double y = 0.0;
};

double dist(const JointObservation& a, const JointObservation& b) {
    return std::hypot(a.x - b.x, a.y - b.y);
}

std::vector<JointObservation> predicted_joints(const std::vector<TrackedPose>& predictions,
                                               std::size_t joint) {
    std::vector<JointObservation> out;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        const auto& kp = predictions[i].pose.keypoints[joint];
        if (kp.has_value()) out.push_back({i, kp->x, kp->y});
    }
    return out;
}

std::vector<JointObservation> visible_gt_joints(const GtFrame& gt, std::size_t joint) {
    std::vector<JointObservation> out;
    for (std::size_t i = 0; i < gt.instances.size(); ++i) {
        const auto& kp = gt.instances[i].pose.keypoints[joint];
        if (kp.has_value()) out.push_back({i, kp->x, kp->y});
    }
    return out;
}

// Hungarian matching of one joint class: pairs beyond the per-gt radius are
// infeasible; among maximum-cardinality matchings the total distance is
// minimized.
std::vector<std::pair<std::size_t, std::size_t>> match_one_joint(
    const std::vector<JointObservation>& preds, const std::vector<JointObservation>& gts,
    const GtFrame& gt_frame, double tau_factor) {
    std::vector<std::pair<std::size_t, std::size_t>> accepted;
    if (preds.empty() || gts.empty()) return accepted;
    SimilarityMatrix m = SimilarityMatrix::zeros(preds.size(), gts.size());
    for (std::size_t i = 0; i < preds.size(); ++i) {
        for (std::size_t j = 0; j < gts.size(); ++j) {
            const double d = dist(preds[i], gts[j]);
            const double tau = tau_factor * gt_frame.instances[gts[j].instance].head_length;
            if (d <= tau) m.at(i, j) = kFeasibleBonus - d;
        }
    }
    for (const auto& [i, j] : hungarian_assign(m)) {
        const double d = dist(preds[i], gts[j]);
        const double tau = tau_factor * gt_frame.instances[gts[j].instance].head_length;
        if (d <= tau) accepted.emplace_back(i, j);
    }
    return accepted;
}

void check_conformance(const std::vector<TrackedPose>& predictions, const GtFrame& gt,
                       std::size_t joint_count) {
    for (const auto& p : predictions) {
        if (p.pose.keypoints.size() != joint_count) {
            throw std::invalid_argument("metrics: prediction does not conform to the skeleton spec");
        }
    }
    for (const auto& g : gt.instances) {
        if (g.pose.keypoints.size() != joint_count) {
            throw std::invalid_argument("metrics: ground truth does not conform to the skeleton spec");
        }
    }
}

}  // namespace

std::vector<JointMatching> match_joints(const std::vector<TrackedPose>& predictions,
                                        const GtFrame& gt, const SkeletonSpec& spec,
                                        double tau_factor) {
    const auto k = static_cast<std::size_t>(spec.joint_count());
    check_conformance(predictions, gt, k);
    std::vector<JointMatching> out(k);
    for (std::size_t joint = 0; joint < k; ++joint) {
        const auto preds = predicted_joints(predictions, joint);
        const auto gts = visible_gt_joints(gt, joint);
        for (const auto& [pi, gi] : match_one_joint(preds, gts, gt, tau_factor)) {
            out[joint].pairs.emplace_back(preds[pi].instance, gts[gi].instance);
        }
    }
    return out;
}

double mota_from_counts(std::int64_t fp, std::int64_t fn, std::int64_t idsw, std::int64_t gt) {
    if (gt == 0) return 0.0;
    return 1.0 - static_cast<double>(fp + fn + idsw) / static_cast<double>(gt);
}

MotaReport mota(const std::vector<TrackedFrame>& predictions, const GroundTruthSequence& gt,
                const SkeletonSpec& spec, double tau_factor) {
    const auto k = static_cast<std::size_t>(spec.joint_count());
    std::map<std::int64_t, const TrackedFrame*> pred_by_frame;
    for (const auto& frame : predictions) {
        if (!pred_by_frame.emplace(frame.frame, &frame).second) {
            throw std::invalid_argument("mota: duplicate prediction frame");
        }
        std::map<std::int64_t, int> seen;
        for (const auto& p : frame.poses) {
            if (++seen[p.track_id] > 1) {
                throw std::invalid_argument("mota: duplicate track id within a frame");
            }
        }
    }

    MotaReport report;
    report.per_joint.assign(k, MotaJointCounts{});
    // Persistent gt identity -> predicted identity, per joint class.
    std::vector<std::map<std::int64_t, std::int64_t>> mapping(k);

    static const std::vector<TrackedPose> kNoPredictions;
    for (const auto& gt_frame : gt) {
        const auto it = pred_by_frame.find(gt_frame.frame);
        const std::vector<TrackedPose>& preds =
            it != pred_by_frame.end() ? it->second->poses : kNoPredictions;
        check_conformance(preds, gt_frame, k);

        for (std::size_t joint = 0; joint < k; ++joint) {
            auto pred_joints = predicted_joints(preds, joint);
            auto gt_joints = visible_gt_joints(gt_frame, joint);
            auto& counts = report.per_joint[joint];
            counts.gt += static_cast<std::int64_t>(gt_joints.size());

            // Carry-over: an existing (gt, pred) pairing survives while both
            // sides appear and still fall within the acceptance radius.
            std::vector<std::pair<std::size_t, std::size_t>> matched;  // instance indices
            std::vector<char> pred_used(pred_joints.size(), 0), gt_used(gt_joints.size(), 0);
            for (std::size_t gj = 0; gj < gt_joints.size(); ++gj) {
                const auto& gt_inst = gt_frame.instances[gt_joints[gj].instance];
                const auto map_it = mapping[joint].find(gt_inst.track_id);
                if (map_it == mapping[joint].end()) continue;
                for (std::size_t pj = 0; pj < pred_joints.size(); ++pj) {
                    if (pred_used[pj]) continue;
                    if (preds[pred_joints[pj].instance].track_id != map_it->second) continue;
                    const double tau = tau_factor * gt_inst.head_length;
                    if (dist(pred_joints[pj], gt_joints[gj]) <= tau) {
                        matched.emplace_back(pred_joints[pj].instance, gt_joints[gj].instance);
                        pred_used[pj] = 1;
                        gt_used[gj] = 1;
                    }
                    break;  // the mapped id appears at most once per frame
                }
            }

            std::vector<JointObservation> free_preds, free_gts;
            for (std::size_t pj = 0; pj < pred_joints.size(); ++pj) {
                if (!pred_used[pj]) free_preds.push_back(pred_joints[pj]);
            }
            for (std::size_t gj = 0; gj < gt_joints.size(); ++gj) {
                if (!gt_used[gj]) free_gts.push_back(gt_joints[gj]);
            }
            const auto fresh = match_one_joint(free_preds, free_gts, gt_frame, tau_factor);
            for (const auto& [pi, gi] : fresh) {
                matched.emplace_back(free_preds[pi].instance, free_gts[gi].instance);
            }

            for (const auto& [pred_inst, gt_inst_idx] : matched) {
                const std::int64_t gt_id = gt_frame.instances[gt_inst_idx].track_id;
                const std::int64_t pred_id = preds[pred_inst].track_id;
                const auto map_it = mapping[joint].find(gt_id);
                if (map_it != mapping[joint].end() && map_it->second != pred_id) {
                    ++counts.idsw;
                }
                mapping[joint][gt_id] = pred_id;
            }
            counts.fp += static_cast<std::int64_t>(pred_joints.size() - matched.size());
            counts.fn += static_cast<std::int64_t>(gt_joints.size() - matched.size());
        }
    }

    for (auto& counts : report.per_joint) {
        counts.mota = mota_from_counts(counts.fp, counts.fn, counts.idsw, counts.gt);
        report.totals.fp += counts.fp;
        report.totals.fn += counts.fn;
        report.totals.idsw += counts.idsw;
        report.totals.gt += counts.gt;
    }
    report.no_ground_truth = report.totals.gt == 0;
    report.totals.mota =
        mota_from_counts(report.totals.fp, report.totals.fn, report.totals.idsw, report.totals.gt);
    return report;
}

ApReport map_eval(const std::vector<TrackedFrame>& predictions, const GroundTruthSequence& gt,
                  const SkeletonSpec& spec, double tau_factor) {
    const auto k = static_cast<std::size_t>(spec.joint_count());
    std::map<std::int64_t, const TrackedFrame*> pred_by_frame;
    for (const auto& frame : predictions) pred_by_frame[frame.frame] = &frame;

    ApReport report;
    report.per_joint_ap.assign(k, 0.0);
    report.joint_evaluated.assign(k, false);

    struct RankedKeypoint {
        double score;
        std::size_t frame_pos;  // position in the gt sequence (ranking tiebreak)
        std::size_t pred_idx;
        double x, y;
    };

    double ap_sum = 0.0;
    int evaluated = 0;
    for (std::size_t joint = 0; joint < k; ++joint) {
        std::int64_t total_gt = 0;
        std::vector<RankedKeypoint> ranked;
        // claimed[frame_pos] flags gt instances already taken by a higher rank
        std::vector<std::vector<char>> claimed(gt.size());
        for (std::size_t f = 0; f < gt.size(); ++f) {
            claimed[f].assign(gt[f].instances.size(), 0);
            for (const auto& inst : gt[f].instances) {
                if (inst.pose.keypoints[joint].has_value()) ++total_gt;
            }
            const auto it = pred_by_frame.find(gt[f].frame);
            if (it == pred_by_frame.end()) continue;
            const auto& poses = it->second->poses;
            for (std::size_t pi = 0; pi < poses.size(); ++pi) {
                const auto& kp = poses[pi].pose.keypoints[joint];
                if (kp.has_value()) {
                    ranked.push_back({poses[pi].pose.score, f, pi, kp->x, kp->y});
                }
            }
        }
        if (total_gt == 0) continue;
        report.joint_evaluated[joint] = true;
        ++evaluated;

        std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
            if (a.score != b.score) return a.score > b.score;
            if (a.frame_pos != b.frame_pos) return a.frame_pos < b.frame_pos;
            return a.pred_idx < b.pred_idx;
        });

        std::vector<char> is_tp(ranked.size(), 0);
        for (std::size_t r = 0; r < ranked.size(); ++r) {
            const auto& item = ranked[r];
            const auto& frame = gt[item.frame_pos];
            double best_d = 0.0;
            std::ptrdiff_t best_g = -1;
            for (std::size_t gi = 0; gi < frame.instances.size(); ++gi) {
                if (claimed[item.frame_pos][gi]) continue;
                const auto& kp = frame.instances[gi].pose.keypoints[joint];
                if (!kp.has_value()) continue;
                const double d = std::hypot(item.x - kp->x, item.y - kp->y);
                if (d > tau_factor * frame.instances[gi].head_length) continue;
                if (best_g < 0 || d < best_d) {
                    best_g = static_cast<std::ptrdiff_t>(gi);
                    best_d = d;
                }
            }
            if (best_g >= 0) {
                claimed[item.frame_pos][static_cast<std::size_t>(best_g)] = 1;
                is_tp[r] = 1;
            }
        }

        std::vector<double> precision(ranked.size());
        std::int64_t tp = 0;
        for (std::size_t r = 0; r < ranked.size(); ++r) {
            if (is_tp[r]) ++tp;
            precision[r] = static_cast<double>(tp) / static_cast<double>(r + 1);
        }
        for (std::size_t r = precision.size(); r-- > 1;) {
            precision[r - 1] = std::max(precision[r - 1], precision[r]);
        }
        double precision_sum = 0.0;
        for (std::size_t r = 0; r < ranked.size(); ++r) {
            if (is_tp[r]) precision_sum += precision[r];
        }
        const double ap = precision_sum / static_cast<double>(total_gt);
        report.per_joint_ap[joint] = ap;
        ap_sum += ap;
    }
    report.map = evaluated > 0 ? ap_sum / evaluated : 0.0;
    return report;
}

namespace {

std::string format_row(const std::string& name, const MotaJointCounts& c, double ap,
                       bool have_ap) {
    char buf[160];
    if (have_ap) {
        std::snprintf(buf, sizeof(buf), "%-16s %8lld %8lld %8lld %8lld %9.4f %9.4f\n",
                      name.c_str(), static_cast<long long>(c.fp), static_cast<long long>(c.fn),
                      static_cast<long long>(c.idsw), static_cast<long long>(c.gt), c.mota, ap);
    } else {
        std::snprintf(buf, sizeof(buf), "%-16s %8lld %8lld %8lld %8lld %9.4f %9s\n",
                      name.c_str(), static_cast<long long>(c.fp), static_cast<long long>(c.fn),
                      static_cast<long long>(c.idsw), static_cast<long long>(c.gt), c.mota, "-");
    }
    return buf;
}

}  // namespace

std::string report_text(const MotaReport& mota_report, const ApReport& ap_report,
                        const SkeletonSpec& spec) {
    std::string out;
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%-16s %8s %8s %8s %8s %9s %9s\n", "joint", "fp", "fn",
                  "idsw", "gt", "mota", "ap");
    out += buf;
    for (std::size_t j = 0; j < mota_report.per_joint.size(); ++j) {
        out += format_row(spec.joint_names[j], mota_report.per_joint[j],
                          ap_report.per_joint_ap[j], ap_report.joint_evaluated[j]);
    }
    out += format_row("total", mota_report.totals, ap_report.map, true);
    if (mota_report.no_ground_truth) {
        out += "note: no ground truth keypoints; MOTA undefined\n";
    }
    std::snprintf(buf, sizeof(buf), "total_mota %.6f\n", mota_report.totals.mota);
    out += buf;
    std::snprintf(buf, sizeof(buf), "total_map %.6f\n", ap_report.map);
    out += buf;
    return out;
}

std::string report_json(const MotaReport& mota_report, const ApReport& ap_report,
                        const SkeletonSpec& spec) {
    nlohmann::json doc;
    nlohmann::json joints = nlohmann::json::array();
    for (std::size_t j = 0; j < mota_report.per_joint.size(); ++j) {
        const auto& c = mota_report.per_joint[j];
        joints.push_back({{"name", spec.joint_names[j]},
                          {"fp", c.fp},
                          {"fn", c.fn},
                          {"idsw", c.idsw},
                          {"gt", c.gt},
                          {"mota", c.mota},
                          {"ap", ap_report.per_joint_ap[j]},
                          {"ap_evaluated", static_cast<bool>(ap_report.joint_evaluated[j])}});
    }
    doc["joints"] = joints;
    doc["totals"] = {{"fp", mota_report.totals.fp},
                     {"fn", mota_report.totals.fn},
                     {"idsw", mota_report.totals.idsw},
                     {"gt", mota_report.totals.gt},
                     {"mota", mota_report.totals.mota},
                     {"map", ap_report.map},
                     {"no_ground_truth", mota_report.no_ground_truth}};
    return doc.dump(2) + "\n";
}

}  // namespace ptrack
