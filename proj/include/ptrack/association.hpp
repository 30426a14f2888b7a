#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "ptrack/skeleton.hpp"

namespace ptrack {

/// Rectangular weight matrix between previous-frame tracks (rows) and
/// current-frame detections (columns). Built from OKS the weights lie in
/// [0,1]; the solver itself accepts any finite weights.
struct SimilarityMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> weights;  // row-major

    static SimilarityMatrix zeros(std::size_t rows, std::size_t cols);

    double at(std::size_t r, std::size_t c) const { return weights[r * cols + c]; }
    double& at(std::size_t r, std::size_t c) { return weights[r * cols + c]; }
};

struct Match {
    std::size_t track = 0;
    std::size_t detection = 0;
    double weight = 0.0;
};

/// Outcome of gating an assignment: accepted pairs plus the two leftover
/// sets. Together they partition the input rows and columns.
struct AssignmentResult {
    std::vector<Match> matches;
    std::vector<std::size_t> unmatched_tracks;
    std::vector<std::size_t> unmatched_detections;
};

/// weights[i][j] = oks(tracks[i], detections[j]).
SimilarityMatrix build_similarity(const std::vector<Pose>& tracks,
                                  const std::vector<Pose>& detections,
                                  const SkeletonSpec& spec,
                                  double visibility_threshold);

/// Maximum-total-weight one-to-one assignment of min(rows, cols) pairs,
/// returned sorted by row. Among equally optimal assignments the
/// lexicographically smallest (row, col) sequence is chosen, so the result
/// is deterministic. Throws on non-finite weights.
std::vector<std::pair<std::size_t, std::size_t>> hungarian_assign(
    const SimilarityMatrix& m);

/// Demotes assigned pairs whose weight falls below match_threshold: the row
/// joins unmatched_tracks and the column unmatched_detections.
AssignmentResult gate(const std::vector<std::pair<std::size_t, std::size_t>>& assignment,
                      const SimilarityMatrix& m, double match_threshold);

}  // namespace ptrack
