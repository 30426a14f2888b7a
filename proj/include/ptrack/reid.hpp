#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

namespace ptrack {

using FeatureVector = std::vector<double>;

struct ReidConfig {
    double distance_threshold = 100.0;  // a retrieval needs distance strictly below this
    std::int64_t max_age = 30;          // frames a lost identity stays retrievable

    void validate() const;
};

struct GalleryEntry {
    std::int64_t track_id = 0;
    FeatureVector feature;
    std::int64_t last_seen = 0;
};

/// Euclidean distance; throws on dimension mismatch.
double euclidean_distance(const FeatureVector& a, const FeatureVector& b);

/// Appearance features of lost tracks, one entry per identity (the newest
/// feature wins on re-insertion). Single-owner mutable store; tracker
/// instances each hold their own.
class Gallery {
  public:
    /// Adds or replaces the entry for id. The first insert pins the feature
    /// dimension; later mismatches throw.
    void insert(std::int64_t track_id, FeatureVector feature, std::int64_t frame);

    /// Identity of the nearest entry if its distance is strictly below
    /// cfg.distance_threshold, removing that entry. Distance ties prefer the
    /// smaller last_seen, then the smaller id.
    std::optional<std::int64_t> retrieve(const FeatureVector& query, const ReidConfig& cfg);

    /// Drops entries with current_frame - last_seen > cfg.max_age.
    void prune(std::int64_t current_frame, const ReidConfig& cfg);

    std::size_t size() const { return entries_.size(); }
    bool contains(std::int64_t track_id) const { return entries_.count(track_id) > 0; }
    const std::map<std::int64_t, GalleryEntry>& entries() const { return entries_; }

  private:
    std::map<std::int64_t, GalleryEntry> entries_;
    std::optional<std::size_t> dim_;
};

}  // namespace ptrack
