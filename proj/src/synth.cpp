#include "ptrack/synth.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ptrack {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

// 15-joint stick figure in PoseTrack joint order, unit body height, y down.
// The anchor (path position) sits at the pelvis.
constexpr std::array<std::array<double, 2>, 15> kTemplate = {{
    {-0.08, 0.50},   // right_ankle
    {-0.07, 0.25},   // right_knee
    {-0.06, 0.00},   // right_hip
    {0.06, 0.00},    // left_hip
    {0.07, 0.25},    // left_knee
    {0.08, 0.50},    // left_ankle
    {-0.22, 0.05},   // right_wrist
    {-0.17, -0.12},  // right_elbow
    {-0.11, -0.28},  // right_shoulder
    {0.11, -0.28},   // left_shoulder
    {0.17, -0.12},   // left_elbow
    {0.22, 0.05},    // left_wrist
    {0.00, -0.33},   // head_bottom
    {0.02, -0.40},   // nose
    {0.00, -0.47},   // head_top
}};

bool in_range(std::int64_t frame, std::int64_t from, std::int64_t to) {
    return frame >= from && frame <= to;
}

double point_box_distance(double x, double y, const BBox& b) {
    const double dx = std::max({b.x_min - x, 0.0, x - b.x_max});
    const double dy = std::max({b.y_min - y, 0.0, y - b.y_max});
    return std::hypot(dx, dy);
}

}  // namespace

double Rng::uniform() {
    // 53 random mantissa bits -> [0, 1)
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

double Rng::gaussian(double mean, double sigma) {
    if (have_spare_) {
        have_spare_ = false;
        return mean + sigma * spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(kTwoPi * u2);
    have_spare_ = true;
    return mean + sigma * r * std::cos(kTwoPi * u2);
}

std::array<double, 2> MotionPath::position(std::int64_t frame) const {
    const double t = static_cast<double>(frame);
    std::array<double, 2> pos{start[0] + velocity[0] * t, start[1] + velocity[1] * t};
    if (kind == Kind::sinusoidal) {
        pos[1] += amplitude * std::sin(kTwoPi * t / period + phase);
    }
    return pos;
}

void ScenarioConfig::validate() const {
    if (frames < 1) throw std::invalid_argument("ScenarioConfig: frame count must be >= 1");
    if (width < 1 || height < 1) {
        throw std::invalid_argument("ScenarioConfig: frame size must be positive");
    }
    if (agents.empty()) throw std::invalid_argument("ScenarioConfig: at least one agent required");
    if (!(noise_sigma >= 0.0)) throw std::invalid_argument("ScenarioConfig: noise sigma must be >= 0");
    if (feature_dim < 1) throw std::invalid_argument("ScenarioConfig: feature dim must be >= 1");
    if (static_cast<int>(agents.size()) > feature_dim) {
        throw std::invalid_argument("ScenarioConfig: feature dim must be >= agent count");
    }
    for (const auto& a : agents) {
        if (!(a.scale > 0.0)) throw std::invalid_argument("ScenarioConfig: agent scale must be > 0");
    }
    const int n = static_cast<int>(agents.size());
    auto check_event = [&](int agent, std::int64_t from, std::int64_t to, const char* what) {
        if (agent < 0 || agent >= n) {
            throw std::invalid_argument(std::string("ScenarioConfig: ") + what +
                                        " references an unknown agent");
        }
        if (from < 0 || to >= frames || from > to) {
            throw std::invalid_argument(std::string("ScenarioConfig: ") + what +
                                        " has an invalid frame range");
        }
    };
    for (const auto& e : dropouts) check_event(e.agent, e.from, e.to, "dropout");
    for (const auto& e : absences) check_event(e.agent, e.from, e.to, "absence");
    for (const auto& e : occlusions) {
        check_event(e.agent, e.from, e.to, "occlusion");
        for (int j : e.joints) {
            if (j < 0 || j >= static_cast<int>(kTemplate.size())) {
                throw std::invalid_argument("ScenarioConfig: occlusion references an unknown joint");
            }
        }
    }
    for (const auto& e : blurs) {
        check_event(e.agent, e.from, e.to, "blur");
        for (int j : e.joints) {
            if (j < 0 || j >= static_cast<int>(kTemplate.size())) {
                throw std::invalid_argument("ScenarioConfig: blur references an unknown joint");
            }
        }
    }
}

FeatureVector agent_feature(int agent, const ScenarioConfig& cfg) {
    FeatureVector f(static_cast<std::size_t>(cfg.feature_dim), 0.0);
    f[static_cast<std::size_t>(agent)] = cfg.feature_separation;
    return f;
}

ScenarioBundle generate(const ScenarioConfig& cfg) {
    cfg.validate();
    ScenarioBundle bundle;
    bundle.spec = SkeletonSpec::posetrack15();
    bundle.config = cfg;
    const int n_agents = static_cast<int>(cfg.agents.size());
    const auto k = kTemplate.size();
    Rng rng(cfg.seed);

    auto absent = [&](int agent, std::int64_t frame) {
        for (const auto& e : cfg.absences) {
            if (e.agent == agent && in_range(frame, e.from, e.to)) return true;
        }
        return false;
    };
    auto dropped = [&](int agent, std::int64_t frame) {
        for (const auto& e : cfg.dropouts) {
            if (e.agent == agent && in_range(frame, e.from, e.to)) return true;
        }
        return false;
    };
    auto occluded = [&](int agent, std::int64_t frame, int joint) {
        for (const auto& e : cfg.occlusions) {
            if (e.agent == agent && in_range(frame, e.from, e.to) &&
                std::find(e.joints.begin(), e.joints.end(), joint) != e.joints.end()) {
                return true;
            }
        }
        return false;
    };
    auto blurred = [&](int agent, std::int64_t frame, int joint) {
        for (const auto& e : cfg.blurs) {
            if (e.agent == agent && in_range(frame, e.from, e.to) &&
                std::find(e.joints.begin(), e.joints.end(), joint) != e.joints.end()) {
                return true;
            }
        }
        return false;
    };
    auto joint_position = [&](int agent, std::int64_t frame, std::size_t joint) {
        const auto pos = cfg.agents[agent].path.position(frame);
        const double s = cfg.agents[agent].scale;
        return std::array<double, 2>{pos[0] + s * kTemplate[joint][0],
                                     pos[1] + s * kTemplate[joint][1]};
    };
    auto gt_box = [&](int agent, std::int64_t frame) {
        std::vector<Keypoint> kps;
        kps.reserve(k);
        for (std::size_t j = 0; j < k; ++j) {
            const auto p = joint_position(agent, frame, j);
            kps.push_back(Keypoint{p[0], p[1], 1.0, 1.0, 1.0});
        }
        return bbox_from_keypoints(kps, 0.0);
    };

    // Draw order is fixed (frames, then agents, then joints, then the four
    // per-joint draws) so a seed pins the whole bundle.
    for (std::int64_t t = 0; t < cfg.frames; ++t) {
        GtFrame gt_frame;
        gt_frame.frame = t;
        FrameObservations obs;
        obs.frame = t;
        for (int a = 0; a < n_agents; ++a) {
            if (absent(a, t)) continue;
            const double s = cfg.agents[a].scale;

            GtInstance inst;
            inst.track_id = a + 1;
            inst.pose = Pose::empty(static_cast<int>(k));
            for (std::size_t j = 0; j < k; ++j) {
                if (occluded(a, t, static_cast<int>(j))) continue;  // invisible in gt
                const auto p = joint_position(a, t, j);
                inst.pose.keypoints[j] = Keypoint{p[0], p[1], 1.0, 1.0, 1.0};
            }
            inst.pose.bbox = gt_box(a, t);
            inst.pose.recompute_score();
            const double head = s * std::hypot(kTemplate[14][0] - kTemplate[12][0],
                                               kTemplate[14][1] - kTemplate[12][1]);
            inst.head_length = head;
            gt_frame.instances.push_back(std::move(inst));

            if (dropped(a, t)) continue;
            Pose det = Pose::empty(static_cast<int>(k));
            for (std::size_t j = 0; j < k; ++j) {
                const auto p = joint_position(a, t, j);
                const double nx = rng.gaussian(0.0, cfg.noise_sigma);
                const double ny = rng.gaussian(0.0, cfg.noise_sigma);
                double p_loc, p_avl;
                if (occluded(a, t, static_cast<int>(j))) {
                    p_loc = rng.uniform(0.80, 0.95);
                    p_avl = rng.uniform(0.05, 0.20);
                } else if (blurred(a, t, static_cast<int>(j))) {
                    p_loc = rng.uniform(0.30, 0.54);
                    p_avl = rng.uniform(0.30, 0.44);
                } else {
                    p_loc = rng.uniform(0.85, 0.99);
                    p_avl = rng.uniform(0.92, 1.00);
                }
                Keypoint kp;
                kp.x = std::clamp(p[0] + nx, 0.0, static_cast<double>(cfg.width - 1));
                kp.y = std::clamp(p[1] + ny, 0.0, static_cast<double>(cfg.height - 1));
                kp.p_loc = p_loc;
                kp.p_avl = p_avl;
                kp.p_conf = p_avl * p_loc;
                det.keypoints[j] = kp;
            }
            det.bbox = bbox_from_keypoints(present_keypoints(det), 0.1);
            det.recompute_score();
            obs.detections.push_back(std::move(det));
            obs.features.push_back(agent_feature(a, cfg));
        }

        // Exact flow for t-1 -> t: each pixel takes the rigid displacement of
        // the nearest agent box (present in both frames), so warping any of
        // that agent's keypoints transports them exactly.
        if (t > 0) {
            struct Mover {
                BBox box;
                float dx, dy;
            };
            std::vector<Mover> movers;
            for (int a = 0; a < n_agents; ++a) {
                if (absent(a, t - 1) || absent(a, t)) continue;
                const auto prev = cfg.agents[a].path.position(t - 1);
                const auto cur = cfg.agents[a].path.position(t);
                movers.push_back(Mover{gt_box(a, t - 1), static_cast<float>(cur[0] - prev[0]),
                                       static_cast<float>(cur[1] - prev[1])});
            }
            FlowField flow = FlowField::zeros(cfg.width, cfg.height);
            if (!movers.empty()) {
                for (int y = 0; y < cfg.height; ++y) {
                    for (int x = 0; x < cfg.width; ++x) {
                        std::size_t best = 0;
                        double best_d = point_box_distance(x, y, movers[0].box);
                        for (std::size_t m = 1; m < movers.size(); ++m) {
                            const double d = point_box_distance(x, y, movers[m].box);
                            if (d < best_d) {
                                best_d = d;
                                best = m;
                            }
                        }
                        flow.at(x, y) = {movers[best].dx, movers[best].dy};
                    }
                }
            }
            obs.flow = std::move(flow);
        }

        bundle.gt.push_back(std::move(gt_frame));
        bundle.observations.push_back(std::move(obs));
    }
    return bundle;
}

std::vector<TrackedFrame> gt_as_predictions(const GroundTruthSequence& gt) {
    std::vector<TrackedFrame> out;
    out.reserve(gt.size());
    for (const auto& frame : gt) {
        TrackedFrame tf;
        tf.frame = frame.frame;
        for (const auto& inst : frame.instances) {
            tf.poses.push_back(TrackedPose{inst.track_id, inst.pose});
        }
        out.push_back(std::move(tf));
    }
    return out;
}

ScenarioConfig clean_scenario(std::uint64_t seed) {
    ScenarioConfig cfg;
    cfg.frames = 50;
    cfg.width = 480;
    cfg.height = 270;
    cfg.noise_sigma = 0.4;
    cfg.seed = seed;
    cfg.agents = {
        AgentSpec{60.0, {MotionPath::Kind::linear, {60.0, 60.0}, {2.5, 0.0}}},
        AgentSpec{60.0, {MotionPath::Kind::linear, {420.0, 135.0}, {-2.5, 0.0}}},
        AgentSpec{55.0, {MotionPath::Kind::sinusoidal, {120.0, 210.0}, {2.0, 0.0}, 6.0, 40.0}},
    };
    return cfg;
}

ScenarioConfig dropout_scenario(std::uint64_t seed) {
    ScenarioConfig cfg;
    cfg.frames = 60;
    cfg.width = 480;
    cfg.height = 270;
    cfg.noise_sigma = 0.4;
    cfg.seed = seed;
    cfg.agents = {
        AgentSpec{60.0, {MotionPath::Kind::linear, {40.0, 60.0}, {3.0, 0.0}}},
        AgentSpec{60.0, {MotionPath::Kind::linear, {440.0, 135.0}, {-3.0, 0.0}}},
        AgentSpec{55.0, {MotionPath::Kind::linear, {40.0, 210.0}, {3.5, 0.0}}},
    };
    cfg.dropouts = {
        DropoutEvent{0, 12, 12}, DropoutEvent{0, 30, 30}, DropoutEvent{0, 47, 47},
        DropoutEvent{1, 20, 20}, DropoutEvent{2, 38, 38}, DropoutEvent{2, 52, 52},
    };
    return cfg;
}

ScenarioConfig reentry_scenario(std::uint64_t seed) {
    ScenarioConfig cfg;
    cfg.frames = 70;
    cfg.width = 480;
    cfg.height = 270;
    cfg.noise_sigma = 0.4;
    cfg.seed = seed;
    cfg.feature_separation = 500.0;
    cfg.agents = {
        AgentSpec{60.0, {MotionPath::Kind::linear, {40.0, 60.0}, {2.8, 0.0}}},
        AgentSpec{60.0, {MotionPath::Kind::linear, {440.0, 135.0}, {-2.8, 0.0}}},
        AgentSpec{55.0, {MotionPath::Kind::linear, {40.0, 210.0}, {3.0, 0.0}}},
    };
    cfg.absences = {AbsenceEvent{0, 25, 32}, AbsenceEvent{2, 40, 47}};
    return cfg;
}

ScenarioConfig occlusion_scenario(std::uint64_t seed) {
    ScenarioConfig cfg;
    cfg.frames = 40;
    cfg.width = 480;
    cfg.height = 270;
    cfg.noise_sigma = 0.4;
    cfg.seed = seed;
    cfg.agents = {
        AgentSpec{60.0, {MotionPath::Kind::linear, {40.0, 60.0}, {3.0, 0.0}}},
        AgentSpec{60.0, {MotionPath::Kind::linear, {440.0, 135.0}, {-3.0, 0.0}}},
        AgentSpec{55.0, {MotionPath::Kind::linear, {240.0, 210.0}, {0.0, 0.0}}},
    };
    // Hips and one shoulder hidden behind a foreground object; wrists blurred
    // by arm motion.
    cfg.occlusions = {OcclusionEvent{0, 8, 35, {2, 3, 8}}};
    cfg.blurs = {BlurEvent{1, 5, 38, {6, 11}}};
    return cfg;
}

ScenarioConfig crossing_scenario(std::uint64_t seed) {
    ScenarioConfig cfg;
    cfg.frames = 40;
    cfg.width = 640;
    cfg.height = 360;
    cfg.noise_sigma = 0.4;
    cfg.seed = seed;
    cfg.agents = {
        AgentSpec{70.0, {MotionPath::Kind::linear, {80.0, 80.0}, {6.0, 0.0}}},
        AgentSpec{70.0, {MotionPath::Kind::linear, {560.0, 180.0}, {-6.0, 0.0}}},
        AgentSpec{65.0, {MotionPath::Kind::linear, {320.0, 280.0}, {0.0, 0.0}}},
    };
    return cfg;
}

}  // namespace ptrack
