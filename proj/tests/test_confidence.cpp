#include <doctest.h>

#include <cmath>
#include <random>

#include "helpers.hpp"
#include "ptrack/confidence.hpp"

using namespace ptrack;
using testutil::kp;
using testutil::make_pose;

TEST_CASE("render gaussian peak and falloff") {
    const Heatmap m = render_gaussian(3.0, 2.0, GaussianSpec{2.0, 1.0}, 8, 6);
    CHECK(m.at(3, 2) == doctest::Approx(1.0));
    // pixel one sigma away from the center
    CHECK(m.at(5, 2) == doctest::Approx(std::exp(-0.5)).epsilon(1e-12));
    CHECK(m.at(3, 4) == doctest::Approx(std::exp(-0.5)).epsilon(1e-12));
}

TEST_CASE("render gaussian far outside the grid stays positive") {
    const double cx = -40.0, cy = -40.0, sigma = 3.0;
    const Heatmap m = render_gaussian(cx, cy, GaussianSpec{sigma, 1.0}, 8, 8);
    // nearest pixel to the center is (0, 0)
    const double bound = std::exp(-0.5 * (cx * cx + cy * cy) / (sigma * sigma));
    for (double v : m.values) {
        CHECK(v > 0.0);
        CHECK(v <= bound + 1e-15);
    }
}

TEST_CASE("render gaussian rejects bad inputs") {
    CHECK_THROWS_AS(render_gaussian(0, 0, GaussianSpec{0.0, 1.0}, 4, 4), std::invalid_argument);
    CHECK_THROWS_AS(render_gaussian(0, 0, GaussianSpec{-1.0, 1.0}, 4, 4), std::invalid_argument);
    CHECK_THROWS_AS(render_gaussian(0, 0, GaussianSpec{1.0, 1.0}, 0, 4), std::invalid_argument);
}

TEST_CASE("decode heatmap") {
    Heatmap m = Heatmap::zeros(4, 3);
    m.at(2, 1) = 0.7;
    const auto peak = decode_heatmap(m);
    CHECK(peak.x == 2);
    CHECK(peak.y == 1);
    CHECK(peak.p_loc == doctest::Approx(0.7));

    // tie at (1,0) and (0,1): the smaller row-major index wins
    Heatmap tie = Heatmap::zeros(4, 3);
    tie.at(1, 0) = 0.5;
    tie.at(0, 1) = 0.5;
    const auto t = decode_heatmap(tie);
    CHECK(t.x == 1);
    CHECK(t.y == 0);

    const auto zero = decode_heatmap(Heatmap::zeros(4, 3));
    CHECK(zero.x == 0);
    CHECK(zero.y == 0);
    CHECK(zero.p_loc == 0.0);

    // predicted maps may overshoot; the decoded probability clamps
    Heatmap hot = Heatmap::zeros(2, 2);
    hot.at(1, 1) = 1.8;
    CHECK(decode_heatmap(hot).p_loc == 1.0);
}

TEST_CASE("decode round-trips a rendered gaussian") {
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> cx(0.0, 15.0), cy(0.0, 11.0);
    for (int i = 0; i < 100; ++i) {
        const double x = cx(rng), y = cy(rng);
        const auto peak = decode_heatmap(render_gaussian(x, y, GaussianSpec{1.5, 1.0}, 16, 12));
        CHECK(std::abs(peak.x - x) <= 0.5 + 1e-9);
        CHECK(std::abs(peak.y - y) <= 0.5 + 1e-9);
    }
}

TEST_CASE("heatmap mse loss") {
    std::vector<Heatmap> m{Heatmap::zeros(2, 2)};
    std::vector<Heatmap> g{Heatmap::zeros(2, 2)};
    CHECK(heatmap_mse_loss(m, g) == 0.0);

    m[0].at(1, 0) = 1.0;
    CHECK(heatmap_mse_loss(m, g) == doctest::Approx(0.25));

    std::vector<Heatmap> a, b;
    std::mt19937 rng(17);
    std::uniform_real_distribution<double> d(0.0, 1.0);
    for (int k = 0; k < 3; ++k) {
        Heatmap ha = Heatmap::zeros(4, 4), hb = Heatmap::zeros(4, 4);
        for (auto& v : ha.values) v = d(rng);
        for (auto& v : hb.values) v = d(rng);
        a.push_back(ha);
        b.push_back(hb);
    }
    // independent long double re-summation
    long double sum = 0.0L;
    for (int k = 0; k < 3; ++k) {
        for (std::size_t i = 0; i < a[k].values.size(); ++i) {
            const long double diff = static_cast<long double>(a[k].values[i]) - b[k].values[i];
            sum += diff * diff;
        }
    }
    const double expected = static_cast<double>(sum / (3.0L * 4.0L * 4.0L));
    CHECK(heatmap_mse_loss(a, b) == doctest::Approx(expected).epsilon(1e-12));

    std::vector<Heatmap> wrong{Heatmap::zeros(3, 4)};
    CHECK_THROWS_AS(heatmap_mse_loss(m, wrong), std::invalid_argument);
    CHECK_THROWS_AS(heatmap_mse_loss({}, {}), std::invalid_argument);
}

TEST_CASE("focal loss fixed points") {
    CHECK(focal_loss(1.0 - 1e-7, 1) < 1e-6);
    CHECK(focal_loss(1e-7, 0) < 1e-6);
    // 0.25 * 0.25 * ln 2
    CHECK(focal_loss(0.5, 1) == doctest::Approx(0.25 * 0.25 * std::log(2.0)).epsilon(1e-9));
    CHECK(focal_loss(0.5, 1) == doctest::Approx(0.0433217).epsilon(1e-4));

    CHECK_THROWS_AS(focal_loss(0.5, 2), std::invalid_argument);
    CHECK_THROWS_AS(focal_loss(0.5, -1), std::invalid_argument);
    CHECK_THROWS_AS(focal_loss(1.5, 1), std::invalid_argument);
    CHECK_THROWS_AS(focal_loss(-0.1, 0), std::invalid_argument);
}

TEST_CASE("focal loss is monotone and non-negative") {
    double prev_pos = focal_loss(0.01, 1);
    double prev_neg = focal_loss(0.01, 0);
    for (double p = 0.02; p < 1.0; p += 0.01) {
        const double pos = focal_loss(p, 1);
        const double neg = focal_loss(p, 0);
        CHECK(pos >= 0.0);
        CHECK(neg >= 0.0);
        CHECK(pos < prev_pos);  // decreasing in p for the positive label
        CHECK(neg > prev_neg);  // increasing in p for the negative label
        prev_pos = pos;
        prev_neg = neg;
    }
}

TEST_CASE("fuse confidence") {
    CHECK(fuse_confidence(0.5, 0.8) == doctest::Approx(0.4));
    CHECK(fuse_confidence(1.0, 0.37) == doctest::Approx(0.37));
    CHECK(fuse_confidence(0.0, 0.9) == 0.0);
    CHECK_THROWS_AS(fuse_confidence(1.2, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(fuse_confidence(0.5, -0.1), std::invalid_argument);

    std::mt19937 rng(29);
    std::uniform_real_distribution<double> d(0.0, 1.0);
    for (int i = 0; i < 100; ++i) {
        const double a = d(rng), b = d(rng);
        CHECK(fuse_confidence(a, b) <= std::min(a, b) + 1e-15);
    }
}

TEST_CASE("filter keypoints") {
    const Pose p =
        make_pose(15, {{0, kp(0, 0, 0.2)}, {1, kp(1, 1, 0.4)}, {2, kp(2, 2, 0.9)}});
    const Pose filtered = filter_keypoints(p, 0.35);
    CHECK(filtered.present_count() == 2);
    CHECK(!filtered.keypoints[0].has_value());
    CHECK(filtered.score == doctest::Approx(0.65));

    // threshold zero only removes zero-confidence keypoints
    const Pose z = make_pose(15, {{0, kp(0, 0, 0.0)}, {1, kp(1, 1, 0.1)}});
    const Pose zf = filter_keypoints(z, 0.0);
    CHECK(zf.present_count() == 1);

    const Pose all_low = make_pose(15, {{0, kp(0, 0, 0.1)}, {1, kp(1, 1, 0.2)}});
    const Pose empty = filter_keypoints(all_low, 0.5);
    CHECK(empty.present_count() == 0);
    CHECK(empty.score == 0.0);
}

TEST_CASE("filtering is idempotent and monotone in the threshold") {
    std::mt19937 rng(41);
    std::uniform_real_distribution<double> conf(0.0, 1.0);
    std::uniform_real_distribution<double> pos(0.0, 100.0);
    for (int i = 0; i < 50; ++i) {
        std::vector<std::pair<int, Keypoint>> joints;
        for (int j = 0; j < 15; ++j) {
            if (rng() % 4 == 0) continue;
            joints.emplace_back(j, kp(pos(rng), pos(rng), conf(rng)));
        }
        const Pose p = make_pose(15, joints);
        int prev_count = p.present_count();
        for (double theta = 0.0; theta <= 1.0; theta += 0.1) {
            const Pose once = filter_keypoints(p, theta);
            const Pose twice = filter_keypoints(once, theta);
            CHECK(once.present_count() == twice.present_count());
            CHECK(once.score == doctest::Approx(twice.score).epsilon(1e-12));
            CHECK(once.present_count() <= prev_count);
            prev_count = once.present_count();
        }
    }
}
