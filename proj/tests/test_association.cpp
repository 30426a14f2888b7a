#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "helpers.hpp"
#include "ptrack/association.hpp"

using namespace ptrack;

namespace {

SimilarityMatrix matrix(std::size_t rows, std::size_t cols, std::vector<double> weights) {
    SimilarityMatrix m;
    m.rows = rows;
    m.cols = cols;
    m.weights = std::move(weights);
    return m;
}

// Exhaustive-permutation maximum: the brute-force oracle for the solver.
double brute_force_max(const SimilarityMatrix& m) {
    const bool transpose = m.rows > m.cols;
    const std::size_t small = transpose ? m.cols : m.rows;
    const std::size_t large = transpose ? m.rows : m.cols;
    double best = -1e300;
    // all injective mappings from the small side into the large side
    std::vector<std::size_t> idx(large);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    do {
        double total = 0.0;
        for (std::size_t i = 0; i < small; ++i) {
            total += transpose ? m.at(idx[i], i) : m.at(i, idx[i]);
        }
        best = std::max(best, total);
    } while (std::next_permutation(idx.begin(), idx.end()));
    return best;
}

double assignment_total(const SimilarityMatrix& m,
                        const std::vector<std::pair<std::size_t, std::size_t>>& pairs) {
    double total = 0.0;
    for (const auto& [r, c] : pairs) total += m.at(r, c);
    return total;
}

}  // namespace

TEST_CASE("hungarian on small fixed matrices") {
    const auto id2 = hungarian_assign(matrix(2, 2, {1, 0, 0, 1}));
    CHECK(id2 == std::vector<std::pair<std::size_t, std::size_t>>{{0, 0}, {1, 1}});

    // brute force over all 6 permutations gives 18 via (0,1),(1,0),(2,2)
    const auto m3 = matrix(3, 3, {2, 9, 1, 9, 8, 3, 1, 3, 0});
    const auto a3 = hungarian_assign(m3);
    CHECK(a3 == std::vector<std::pair<std::size_t, std::size_t>>{{0, 1}, {1, 0}, {2, 2}});
    CHECK(assignment_total(m3, a3) == 18.0);

    const auto rect = hungarian_assign(matrix(2, 3, {5, 1, 1, 1, 5, 1}));
    CHECK(rect.size() == 2);
    CHECK(rect == std::vector<std::pair<std::size_t, std::size_t>>{{0, 0}, {1, 1}});

    CHECK(hungarian_assign(matrix(0, 0, {})).empty());
    CHECK(hungarian_assign(matrix(0, 3, {})).empty());
}

TEST_CASE("hungarian ties resolve to the lexicographically smallest pairs") {
    const auto flat = hungarian_assign(matrix(3, 3, std::vector<double>(9, 1.0)));
    CHECK(flat == std::vector<std::pair<std::size_t, std::size_t>>{{0, 0}, {1, 1}, {2, 2}});

    // two optimal assignments; {(0,0),(1,1)} is the smaller sequence
    const auto tie = hungarian_assign(matrix(2, 2, {1, 1, 1, 1}));
    CHECK(tie == std::vector<std::pair<std::size_t, std::size_t>>{{0, 0}, {1, 1}});
}

TEST_CASE("hungarian equals the exhaustive-permutation oracle") {
    std::mt19937 rng(101);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t rows = 1 + rng() % 5;
        const std::size_t cols = 1 + rng() % 5;
        std::vector<double> w(rows * cols);
        // lattice weights keep every sum exactly representable
        for (auto& v : w) v = static_cast<double>(rng() % 641) / 64.0;
        const auto m = matrix(rows, cols, std::move(w));
        const auto pairs = hungarian_assign(m);
        CHECK(pairs.size() == std::min(rows, cols));
        CHECK(assignment_total(m, pairs) == brute_force_max(m));
    }
}

TEST_CASE("adding a constant to every weight keeps the assignment") {
    std::mt19937 rng(55);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t rows = 1 + rng() % 4;
        const std::size_t cols = 1 + rng() % 4;
        std::vector<double> w(rows * cols);
        for (auto& v : w) v = static_cast<double>(rng() % 257) / 16.0;
        const auto m = matrix(rows, cols, w);
        for (auto& v : w) v += 3.25;
        const auto shifted = matrix(rows, cols, std::move(w));
        CHECK(hungarian_assign(m) == hungarian_assign(shifted));
    }
}

TEST_CASE("hungarian is deterministic and rejects non-finite weights") {
    const auto m = matrix(3, 4, {1, 2, 3, 4, 4, 3, 2, 1, 2, 2, 2, 2});
    CHECK(hungarian_assign(m) == hungarian_assign(m));

    auto bad = m;
    bad.weights[5] = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(hungarian_assign(bad), std::invalid_argument);
}

TEST_CASE("build similarity matches elementwise oks") {
    const SkeletonSpec spec = SkeletonSpec::posetrack15();
    std::mt19937 rng(77);
    std::vector<Pose> tracks{testutil::random_pose(rng, 15, 40, 40, 15),
                             testutil::random_pose(rng, 15, 140, 40, 15)};
    std::vector<Pose> dets{testutil::random_pose(rng, 15, 45, 42, 15),
                           testutil::random_pose(rng, 15, 150, 38, 15)};

    const auto m = build_similarity(tracks, dets, spec, 0.35);
    CHECK(m.rows == 2);
    CHECK(m.cols == 2);
    for (std::size_t i = 0; i < 2; ++i) {
        for (std::size_t j = 0; j < 2; ++j) {
            CHECK(m.at(i, j) == doctest::Approx(oks(tracks[i], dets[j], spec, 0.35))
                                    .epsilon(1e-12));
        }
    }

    // transpose symmetry follows from OKS symmetry
    const auto mt = build_similarity(dets, tracks, spec, 0.35);
    for (std::size_t i = 0; i < 2; ++i) {
        for (std::size_t j = 0; j < 2; ++j) {
            CHECK(m.at(i, j) == doctest::Approx(mt.at(j, i)).epsilon(1e-12));
        }
    }

    const auto empty = build_similarity({}, dets, spec, 0.35);
    CHECK(empty.rows == 0);

    // identical pose pairs sit on the diagonal at similarity 1
    const auto self = build_similarity(tracks, tracks, spec, 0.35);
    CHECK(self.at(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(self.at(1, 1) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("gate demotes weak pairs") {
    const auto strong = matrix(2, 2, {1.0, 0.0, 0.0, 1.0});
    const auto all = gate(hungarian_assign(strong), strong, 0.2);
    CHECK(all.matches.size() == 2);
    CHECK(all.unmatched_tracks.empty());
    CHECK(all.unmatched_detections.empty());

    const auto weak = matrix(1, 1, {0.1});
    const auto none = gate(hungarian_assign(weak), weak, 0.2);
    CHECK(none.matches.empty());
    CHECK(none.unmatched_tracks == std::vector<std::size_t>{0});
    CHECK(none.unmatched_detections == std::vector<std::size_t>{0});

    const auto mixed = matrix(2, 2, {0.9, 0.0, 0.0, 0.15});
    const auto some = gate(hungarian_assign(mixed), mixed, 0.2);
    CHECK(some.matches.size() == 1);
    CHECK(some.matches[0].track == 0);
    CHECK(some.unmatched_tracks == std::vector<std::size_t>{1});
    CHECK(some.unmatched_detections == std::vector<std::size_t>{1});
}

TEST_CASE("gate output partitions the inputs") {
    std::mt19937 rng(99);
    std::uniform_real_distribution<double> w(0.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t rows = rng() % 5;
        const std::size_t cols = rng() % 5;
        std::vector<double> weights(rows * cols);
        for (auto& v : weights) v = w(rng);
        const auto m = matrix(rows, cols, std::move(weights));
        const auto result = gate(hungarian_assign(m), m, 0.3);

        std::vector<char> row_seen(rows, 0), col_seen(cols, 0);
        for (const auto& match : result.matches) {
            CHECK(!row_seen[match.track]);
            CHECK(!col_seen[match.detection]);
            row_seen[match.track] = 1;
            col_seen[match.detection] = 1;
        }
        for (std::size_t r : result.unmatched_tracks) {
            CHECK(!row_seen[r]);
            row_seen[r] = 1;
        }
        for (std::size_t c : result.unmatched_detections) {
            CHECK(!col_seen[c]);
            col_seen[c] = 1;
        }
        CHECK(std::count(row_seen.begin(), row_seen.end(), 1) == static_cast<long>(rows));
        CHECK(std::count(col_seen.begin(), col_seen.end(), 1) == static_cast<long>(cols));
    }
}
