#include "ptrack/reid.hpp"

#include <cmath>
#include <stdexcept>

namespace ptrack {

void ReidConfig::validate() const {
    if (!(distance_threshold > 0.0)) {
        throw std::invalid_argument("ReidConfig: distance threshold must be > 0");
    }
    if (max_age < 1) {
        throw std::invalid_argument("ReidConfig: max age must be >= 1");
    }
}

double euclidean_distance(const FeatureVector& a, const FeatureVector& b) {
    if (a.size() != b.size()) {
        throw std::invalid_argument("euclidean_distance: dimension mismatch");
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        sum += d * d;
    }
    return std::sqrt(sum);
}

void Gallery::insert(std::int64_t track_id, FeatureVector feature, std::int64_t frame) {
    if (dim_.has_value() && feature.size() != *dim_) {
        throw std::invalid_argument("Gallery: feature dimension mismatch");
    }
    if (!dim_.has_value()) dim_ = feature.size();
    entries_[track_id] = GalleryEntry{track_id, std::move(feature), frame};
}

std::optional<std::int64_t> Gallery::retrieve(const FeatureVector& query,
                                              const ReidConfig& cfg) {
    if (dim_.has_value() && query.size() != *dim_) {
        throw std::invalid_argument("Gallery: query dimension mismatch");
    }
    const GalleryEntry* best = nullptr;
    double best_dist = 0.0;
    for (const auto& [id, entry] : entries_) {
        const double d = euclidean_distance(query, entry.feature);
        const bool better =
            best == nullptr || d < best_dist ||
            (d == best_dist && (entry.last_seen < best->last_seen ||
                                (entry.last_seen == best->last_seen && id < best->track_id)));
        if (better) {
            best = &entry;
            best_dist = d;
        }
    }
    if (best == nullptr || !(best_dist < cfg.distance_threshold)) {
        return std::nullopt;
    }
    const std::int64_t id = best->track_id;
    entries_.erase(id);
    return id;
}

void Gallery::prune(std::int64_t current_frame, const ReidConfig& cfg) {
    for (auto it = entries_.begin(); it != entries_.end();) {
        if (current_frame - it->second.last_seen > cfg.max_age) {
            it = entries_.erase(it);
        } else {
            ++it;
        }
    }
}

}  // namespace ptrack
