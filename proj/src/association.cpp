#include "ptrack/association.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace ptrack {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Shortest augmenting path assignment (Jonker-Volgenant style) on a square
// cost matrix, minimizing total cost. Returns row -> col.
std::vector<int> solve_square_min(const std::vector<double>& cost, int n) {
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<int> p(n + 1, 0), way(n + 1, 0);
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::vector<double> minv(n + 1, kInf);
        std::vector<char> used(n + 1, 0);
        do {
            used[j0] = 1;
            const int i0 = p[j0];
            int j1 = 0;
            double delta = kInf;
            for (int j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = cost[static_cast<std::size_t>(i0 - 1) * n + (j - 1)] - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const int j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0);
    }
    std::vector<int> row_to_col(n, -1);
    for (int j = 1; j <= n; ++j) {
        if (p[j] > 0) row_to_col[p[j] - 1] = j - 1;
    }
    return row_to_col;
}

// Optimal total weight over a row/column subset of m. Rectangular subsets
// are padded to square with zero-weight slots, so exactly
// min(|rows|, |cols|) real pairs are formed.
double max_weight_total(const SimilarityMatrix& m,
                        const std::vector<std::size_t>& rows,
                        const std::vector<std::size_t>& cols) {
    if (rows.empty() || cols.empty()) return 0.0;
    const std::size_t n = std::max(rows.size(), cols.size());
    std::vector<double> cost(n * n, 0.0);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < cols.size(); ++j) {
            cost[i * n + j] = -m.at(rows[i], cols[j]);
        }
    }
    const auto row_to_col = solve_square_min(cost, static_cast<int>(n));
    double total = 0.0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const int j = row_to_col[i];
        if (j >= 0 && static_cast<std::size_t>(j) < cols.size()) {
            total += m.at(rows[i], cols[j]);
        }
    }
    return total;
}

}  // namespace

SimilarityMatrix SimilarityMatrix::zeros(std::size_t rows, std::size_t cols) {
    SimilarityMatrix m;
    m.rows = rows;
    m.cols = cols;
    m.weights.assign(rows * cols, 0.0);
    return m;
}

SimilarityMatrix build_similarity(const std::vector<Pose>& tracks,
                                  const std::vector<Pose>& detections,
                                  const SkeletonSpec& spec,
                                  double visibility_threshold) {
    SimilarityMatrix m = SimilarityMatrix::zeros(tracks.size(), detections.size());
    for (std::size_t i = 0; i < tracks.size(); ++i) {
        for (std::size_t j = 0; j < detections.size(); ++j) {
            m.at(i, j) = oks(tracks[i], detections[j], spec, visibility_threshold);
        }
    }
    return m;
}

std::vector<std::pair<std::size_t, std::size_t>> hungarian_assign(
    const SimilarityMatrix& m) {
    for (double w : m.weights) {
        if (!std::isfinite(w)) {
            throw std::invalid_argument("hungarian_assign: weights must be finite");
        }
    }
    std::vector<std::pair<std::size_t, std::size_t>> result;
    if (m.rows == 0 || m.cols == 0) return result;

    std::vector<std::size_t> all_rows(m.rows), avail_cols(m.cols);
    for (std::size_t i = 0; i < m.rows; ++i) all_rows[i] = i;
    for (std::size_t j = 0; j < m.cols; ++j) avail_cols[j] = j;

    const double opt = max_weight_total(m, all_rows, avail_cols);
    const double tol = 1e-9 * std::max(1.0, std::abs(opt));

    // Fix pairs row by row, always taking the smallest column that still
    // admits an optimal completion. This picks the lexicographically
    // smallest optimal assignment.
    double fixed_total = 0.0;
    for (std::size_t r = 0; r < m.rows; ++r) {
        std::vector<std::size_t> remaining_rows;
        for (std::size_t i = r + 1; i < m.rows; ++i) remaining_rows.push_back(i);
        for (std::size_t ci = 0; ci < avail_cols.size(); ++ci) {
            const std::size_t c = avail_cols[ci];
            std::vector<std::size_t> rest_cols = avail_cols;
            rest_cols.erase(rest_cols.begin() + static_cast<std::ptrdiff_t>(ci));
            const double rest = max_weight_total(m, remaining_rows, rest_cols);
            if (fixed_total + m.at(r, c) + rest >= opt - tol) {
                result.emplace_back(r, c);
                fixed_total += m.at(r, c);
                avail_cols.erase(avail_cols.begin() + static_cast<std::ptrdiff_t>(ci));
                break;
            }
        }
        // No feasible column means row r stays unmatched in the
        // lexicographically smallest optimum (only possible when rows > cols).
    }
    return result;
}

AssignmentResult gate(const std::vector<std::pair<std::size_t, std::size_t>>& assignment,
                      const SimilarityMatrix& m, double match_threshold) {
    AssignmentResult out;
    std::vector<char> row_taken(m.rows, 0), col_taken(m.cols, 0);
    for (const auto& [r, c] : assignment) {
        const double w = m.at(r, c);
        if (w < match_threshold) continue;  // demoted below
        out.matches.push_back(Match{r, c, w});
        row_taken[r] = 1;
        col_taken[c] = 1;
    }
    for (std::size_t r = 0; r < m.rows; ++r) {
        if (!row_taken[r]) out.unmatched_tracks.push_back(r);
    }
    for (std::size_t c = 0; c < m.cols; ++c) {
        if (!col_taken[c]) out.unmatched_detections.push_back(c);
    }
    return out;
}

}  // namespace ptrack
