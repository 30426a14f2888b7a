#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "ptrack/metrics.hpp"
#include "ptrack/tracker.hpp"

namespace ptrack {

/// Deterministic random source for scenario generation. The engine is
/// std::mt19937_64 (bit-exact across platforms per the standard); uniform
/// and gaussian draws are derived with fixed arithmetic rather than the
/// implementation-defined standard distributions, so bundles reproduce
/// everywhere.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform in [0, 1).
    double uniform();
    double uniform(double lo, double hi);

    /// Box-Muller gaussian.
    double gaussian(double mean, double sigma);

  private:
    std::mt19937_64 engine_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

struct MotionPath {
    enum class Kind { linear, sinusoidal };
    Kind kind = Kind::linear;
    std::array<double, 2> start{0.0, 0.0};
    std::array<double, 2> velocity{0.0, 0.0};  // px per frame
    double amplitude = 0.0;                    // sinusoidal: vertical swing in px
    double period = 60.0;                      // sinusoidal: frames per cycle
    double phase = 0.0;                        // radians

    std::array<double, 2> position(std::int64_t frame) const;
};

struct AgentSpec {
    double scale = 120.0;  // skeleton height in px
    MotionPath path;
};

/// Detector misses the agent entirely; ground truth is unaffected.
struct DropoutEvent {
    int agent = 0;
    std::int64_t from = 0;
    std::int64_t to = 0;  // inclusive
};

/// The agent leaves the scene: absent from ground truth and observations.
struct AbsenceEvent {
    int agent = 0;
    std::int64_t from = 0;
    std::int64_t to = 0;
};

/// Listed joints become invisible in ground truth while the detector still
/// reports them with high location probability and low availability.
struct OcclusionEvent {
    int agent = 0;
    std::int64_t from = 0;
    std::int64_t to = 0;
    std::vector<int> joints;
};

/// Listed joints stay visible but are degraded by motion blur: low location
/// probability and low availability in the observations.
struct BlurEvent {
    int agent = 0;
    std::int64_t from = 0;
    std::int64_t to = 0;
    std::vector<int> joints;
};

struct ScenarioConfig {
    std::int64_t frames = 30;
    int width = 960;
    int height = 540;
    std::vector<AgentSpec> agents;
    std::vector<DropoutEvent> dropouts;
    std::vector<AbsenceEvent> absences;
    std::vector<OcclusionEvent> occlusions;
    std::vector<BlurEvent> blurs;
    double noise_sigma = 0.5;         // detection keypoint jitter in px
    double feature_separation = 500;  // min distance between distinct agents' features
    int feature_dim = 32;
    std::uint64_t seed = 1;

    void validate() const;
};

/// Everything a tracking-plus-evaluation run needs, generated from one
/// config: ground truth, corrupted observations with features and exact
/// per-transition flow, and the skeleton spec.
struct ScenarioBundle {
    SkeletonSpec spec;
    ScenarioConfig config;
    GroundTruthSequence gt;
    std::vector<FrameObservations> observations;
};

/// Deterministic for a given config and seed.
ScenarioBundle generate(const ScenarioConfig& cfg);

/// Ground truth replayed as predictions (agent ids as track ids), for
/// closure checks against the evaluators.
std::vector<TrackedFrame> gt_as_predictions(const GroundTruthSequence& gt);

/// The agent's appearance feature: deterministic, identical across re-entry.
FeatureVector agent_feature(int agent, const ScenarioConfig& cfg);

// Named scenario presets used by tests and the command line.
ScenarioConfig clean_scenario(std::uint64_t seed);
ScenarioConfig dropout_scenario(std::uint64_t seed);
ScenarioConfig reentry_scenario(std::uint64_t seed);
ScenarioConfig occlusion_scenario(std::uint64_t seed);
ScenarioConfig crossing_scenario(std::uint64_t seed);

}  // namespace ptrack
