#pragma once

#include <vector>

#include "ptrack/skeleton.hpp"

namespace ptrack {

/// Dense response map, row-major (index y * width + x).
struct Heatmap {
    int width = 0;
    int height = 0;
    std::vector<double> values;

    static Heatmap zeros(int width, int height);

    double at(int x, int y) const {
        return values[static_cast<std::size_t>(y) * width + x];
    }
    double& at(int x, int y) {
        return values[static_cast<std::size_t>(y) * width + x];
    }
};

struct GaussianSpec {
    double sigma = 1.0;
    double amplitude = 1.0;
};

/// Focal loss balance parameters; defaults are alpha = 0.25, gamma = 2.
struct LossConfig {
    double alpha = 0.25;
    double gamma = 2.0;
};

/// Renders an isotropic Gaussian centered at (cx, cy), evaluated at integer
/// pixel centers with no truncation window. Throws on sigma <= 0 or empty
/// grid dimensions.
Heatmap render_gaussian(double cx, double cy, const GaussianSpec& spec,
                        int width, int height);

struct DecodedPeak {
    int x = 0;
    int y = 0;
    double p_loc = 0.0;  // peak value clamped to [0,1]
};

/// Location and value of the maximum response. Ties break toward the
/// smallest row-major index so decoding is reproducible.
DecodedPeak decode_heatmap(const Heatmap& m);

/// Mean squared error between predicted and target heatmap stacks,
/// normalized by K*W*H. Throws on any shape mismatch.
double heatmap_mse_loss(const std::vector<Heatmap>& predicted,
                        const std::vector<Heatmap>& target);

/// Alpha-balanced focal loss for a binary availability label. p is clamped
/// to [1e-7, 1 - 1e-7] before the log. Throws if p is outside [0,1] or the
/// label is not 0/1.
double focal_loss(double p, int label, const LossConfig& cfg = {});

/// Keypoint confidence: the product of availability and location
/// probabilities. Throws if either factor leaves [0,1].
double fuse_confidence(double p_avl, double p_loc);

/// Removes keypoints with p_conf <= threshold and recomputes the pose score.
Pose filter_keypoints(const Pose& p, double threshold);

}  // namespace ptrack
