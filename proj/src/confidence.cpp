#include "ptrack/confidence.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ptrack {

namespace {
constexpr double kProbClamp = 1e-7;
}

Heatmap Heatmap::zeros(int width, int height) {
    Heatmap m;
    m.width = width;
    m.height = height;
    m.values.assign(static_cast<std::size_t>(width) * height, 0.0);
    return m;
}

Heatmap render_gaussian(double cx, double cy, const GaussianSpec& spec,
                        int width, int height) {
    if (!(spec.sigma > 0.0)) {
        throw std::invalid_argument("render_gaussian: sigma must be > 0");
    }
    if (width < 1 || height < 1) {
        throw std::invalid_argument("render_gaussian: grid must be at least 1x1");
    }
    Heatmap m = Heatmap::zeros(width, height);
    const double inv = 1.0 / (2.0 * spec.sigma * spec.sigma);
    for (int v = 0; v < height; ++v) {
        const double dy = v - cy;
        for (int u = 0; u < width; ++u) {
            const double dx = u - cx;
            m.at(u, v) = spec.amplitude * std::exp(-(dx * dx + dy * dy) * inv);
        }
    }
    return m;
}

DecodedPeak decode_heatmap(const Heatmap& m) {
    if (m.width < 1 || m.height < 1 ||
        m.values.size() != static_cast<std::size_t>(m.width) * m.height) {
        throw std::invalid_argument("decode_heatmap: empty or inconsistent grid");
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i < m.values.size(); ++i) {
        if (m.values[i] > m.values[best]) best = i;
    }
    DecodedPeak peak;
    peak.x = static_cast<int>(best % m.width);
    peak.y = static_cast<int>(best / m.width);
    peak.p_loc = std::clamp(m.values[best], 0.0, 1.0);
    return peak;
}

double heatmap_mse_loss(const std::vector<Heatmap>& predicted,
                        const std::vector<Heatmap>& target) {
    if (predicted.size() != target.size() || predicted.empty()) {
        throw std::invalid_argument("heatmap_mse_loss: stacks must be non-empty and equal-sized");
    }
    const int w = predicted[0].width;
    const int h = predicted[0].height;
    double sum = 0.0;
    for (std::size_t k = 0; k < predicted.size(); ++k) {
        const Heatmap& m = predicted[k];
        const Heatmap& g = target[k];
        if (m.width != w || m.height != h || g.width != w || g.height != h ||
            m.values.size() != g.values.size()) {
            throw std::invalid_argument("heatmap_mse_loss: shape mismatch");
        }
        for (std::size_t i = 0; i < m.values.size(); ++i) {
            const double d = m.values[i] - g.values[i];
            sum += d * d;
        }
    }
    return sum / (static_cast<double>(predicted.size()) * w * h);
}

double focal_loss(double p, int label, const LossConfig& cfg) {
    if (!(p >= 0.0 && p <= 1.0)) {
        throw std::invalid_argument("focal_loss: p must lie in [0,1]");
    }
    if (label != 0 && label != 1) {
        throw std::invalid_argument("focal_loss: label must be 0 or 1");
    }
    const double pc = std::clamp(p, kProbClamp, 1.0 - kProbClamp);
    if (label == 1) {
        return -cfg.alpha * std::pow(1.0 - pc, cfg.gamma) * std::log(pc);
    }
    return -(1.0 - cfg.alpha) * std::pow(pc, cfg.gamma) * std::log(1.0 - pc);
}

double fuse_confidence(double p_avl, double p_loc) {
    if (!(p_avl >= 0.0 && p_avl <= 1.0) || !(p_loc >= 0.0 && p_loc <= 1.0)) {
        throw std::invalid_argument("fuse_confidence: probabilities must lie in [0,1]");
    }
    return p_avl * p_loc;
}

Pose filter_keypoints(const Pose& p, double threshold) {
    Pose out = p;
    for (auto& kp : out.keypoints) {
        if (kp.has_value() && kp->p_conf <= threshold) {
            kp.reset();
        }
    }
    out.recompute_score();
    return out;
}

}  // namespace ptrack
