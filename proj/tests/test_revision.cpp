#include <doctest.h>

#include <cmath>
#include <random>

#include "helpers.hpp"
#include "ptrack/revision.hpp"

using namespace ptrack;
using testutil::kp;
using testutil::make_pose;

TEST_CASE("flow sampling is bilinear with edge clamping") {
    FlowField f = FlowField::zeros(2, 1);
    f.at(1, 0) = {2.0f, 0.0f};
    const auto mid = f.sample(0.5, 0.0);
    CHECK(mid[0] == doctest::Approx(1.0));
    CHECK(mid[1] == doctest::Approx(0.0));

    // outside the grid the nearest edge vector applies
    const auto left = f.sample(-3.0, 5.0);
    CHECK(left[0] == doctest::Approx(0.0));
    const auto right = f.sample(9.0, -2.0);
    CHECK(right[0] == doctest::Approx(2.0));

    const FlowField u = FlowField::uniform(3.0, -2.0);
    const auto anywhere = u.sample(123.4, -56.7);
    CHECK(anywhere[0] == doctest::Approx(3.0));
    CHECK(anywhere[1] == doctest::Approx(-2.0));
}

TEST_CASE("warp pose") {
    const Pose p = make_pose(15, {{0, kp(10, 10)}, {1, kp(20, 30)}});

    const Pose same = warp_pose(p, FlowField::uniform(0.0, 0.0));
    CHECK(same.keypoints[0]->x == doctest::Approx(10.0));
    CHECK(same.keypoints[1]->y == doctest::Approx(30.0));

    const Pose moved = warp_pose(p, FlowField::uniform(3.0, -2.0));
    CHECK(moved.keypoints[0]->x == doctest::Approx(13.0));
    CHECK(moved.keypoints[0]->y == doctest::Approx(8.0));
    CHECK(moved.keypoints[1]->x == doctest::Approx(23.0));
    CHECK(moved.keypoints[1]->y == doctest::Approx(28.0));
    // probabilities carry over
    CHECK(moved.keypoints[0]->p_conf == p.keypoints[0]->p_conf);

    FlowField ramp = FlowField::zeros(2, 1);
    ramp.at(1, 0) = {2.0f, 0.0f};
    const Pose half = warp_pose(make_pose(15, {{0, kp(0.5, 0.0)}}), ramp);
    CHECK(half.keypoints[0]->x == doctest::Approx(1.5));
}

TEST_CASE("propose box") {
    const Pose two = make_pose(15, {{0, kp(0, 0)}, {1, kp(10, 20)}});
    const auto tight = propose_box(two, 0.0);
    REQUIRE(tight.has_value());
    CHECK(tight->box.x_min == doctest::Approx(0.0));
    CHECK(tight->box.y_max == doctest::Approx(20.0));

    const auto wide = propose_box(two, 0.1);
    REQUIRE(wide.has_value());
    CHECK(wide->box.x_min == doctest::Approx(-1.0));
    CHECK(wide->box.y_min == doctest::Approx(-2.0));
    CHECK(wide->box.x_max == doctest::Approx(11.0));
    CHECK(wide->box.y_max == doctest::Approx(22.0));
    CHECK(wide->pose.bbox.x_min == doctest::Approx(-1.0));

    // one keypoint is not revivable
    CHECK(!propose_box(make_pose(15, {{0, kp(5, 5)}}), 0.1).has_value());
}

TEST_CASE("score filter keeps strictly confident candidates") {
    RevisionConfig cfg;
    auto cand = [&](double score) {
        RevivalCandidate c;
        c.pose = make_pose(15, {{0, kp(0, 0, score)}, {1, kp(1, 1, score)}});
        c.box = c.pose.bbox;
        return c;
    };
    CHECK(score_filter({cand(0.9)}, cfg).size() == 1);
    CHECK(score_filter({cand(0.1)}, cfg).empty());
    const auto boundary = score_filter({cand(0.34), cand(0.36)}, cfg);
    REQUIRE(boundary.size() == 1);
    CHECK(boundary[0].pose.score == doctest::Approx(0.36));
    // exactly at the threshold fails the strict comparison
    CHECK(score_filter({cand(0.35)}, cfg).empty());
}

TEST_CASE("overlap similarity gates on box iou") {
    const SkeletonSpec spec = SkeletonSpec::posetrack15();
    RevisionConfig cfg;

    std::mt19937 rng(13);
    Pose p = testutil::random_pose(rng, 15, 50, 50, 20);

    // identical poses with full overlap
    CHECK(overlap_similarity(p, p, spec, cfg) == doctest::Approx(1.0).epsilon(1e-12));

    // same keypoints but boxes adjusted to overlap barely (iou <= 0.1)
    Pose q = p;
    p.bbox = BBox{0, 0, 10, 10};
    q.bbox = BBox{9.5, 0, 19.5, 10};
    CHECK(iou(p.bbox, q.bbox) <= 0.1);
    CHECK(overlap_similarity(p, q, spec, cfg) == 0.0);

    // overlapping boxes but no joint confident in both
    Pose a = make_pose(15, {{0, kp(5, 5, 0.9)}, {1, kp(6, 6, 0.1)}});
    Pose b = make_pose(15, {{0, kp(5, 5, 0.1)}, {1, kp(6, 6, 0.9)}});
    a.bbox = BBox{0, 0, 10, 10};
    b.bbox = BBox{0, 0, 10, 10};
    CHECK(overlap_similarity(a, b, spec, cfg) == 0.0);
}

TEST_CASE("overlap similarity is symmetric and bounded") {
    const SkeletonSpec spec = SkeletonSpec::posetrack15();
    RevisionConfig cfg;
    std::mt19937 rng(19);
    std::uniform_real_distribution<double> pos(0.0, 120.0);
    for (int i = 0; i < 200; ++i) {
        const Pose p = testutil::random_pose(rng, 15, pos(rng), pos(rng), 25.0);
        const Pose q = testutil::random_pose(rng, 15, pos(rng), pos(rng), 25.0);
        const double pq = overlap_similarity(p, q, spec, cfg);
        CHECK(std::abs(pq - overlap_similarity(q, p, spec, cfg)) <= 1e-12);
        CHECK(pq >= 0.0);
        CHECK(pq <= 1.0);
    }
}

TEST_CASE("overlap similarity is zero for disjoint random pose pairs") {
    const SkeletonSpec spec = SkeletonSpec::posetrack15();
    RevisionConfig cfg;
    std::mt19937 rng(37);
    for (int i = 0; i < 100; ++i) {
        // separated anchors keep the boxes disjoint
        const Pose p = testutil::random_pose(rng, 15, 40.0, 50.0, 15.0);
        const Pose q = testutil::random_pose(rng, 15, 400.0, 50.0, 15.0);
        CHECK(overlap_similarity(p, q, spec, cfg) == 0.0);
    }
}

TEST_CASE("suppress candidates") {
    const SkeletonSpec spec = SkeletonSpec::posetrack15();
    RevisionConfig cfg;
    std::mt19937 rng(43);

    const Pose person = testutil::random_pose(rng, 15, 60, 60, 18);
    RevivalCandidate dup;
    dup.pose = person;
    dup.box = person.bbox;
    dup.track_id = 1;

    // identical to a detection: similarity 1 -> dropped
    CHECK(suppress_candidates({dup}, {person}, spec, cfg).empty());

    // far from all detections -> kept
    const Pose far = testutil::random_pose(rng, 15, 400, 60, 18);
    CHECK(suppress_candidates({dup}, {far}, spec, cfg).size() == 1);

    // two mutually overlapping candidates: the higher score survives
    RevivalCandidate high = dup;
    high.pose.score = 0.9;
    high.track_id = 2;
    RevivalCandidate low = dup;
    low.pose.score = 0.5;
    low.track_id = 3;
    const auto kept = suppress_candidates({low, high}, {}, spec, cfg);
    REQUIRE(kept.size() == 1);
    CHECK(kept[0].track_id == 2);
}

TEST_CASE("suppressed output is duplicate-free") {
    const SkeletonSpec spec = SkeletonSpec::posetrack15();
    RevisionConfig cfg;
    std::mt19937 rng(47);
    std::uniform_real_distribution<double> pos(0.0, 200.0);
    std::uniform_real_distribution<double> score(0.4, 1.0);
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<RevivalCandidate> cands;
        std::vector<Pose> dets;
        for (int i = 0; i < 5; ++i) {
            RevivalCandidate c;
            c.pose = testutil::random_pose(rng, 15, pos(rng), pos(rng), 20.0);
            c.pose.score = score(rng);
            c.box = c.pose.bbox;
            c.track_id = i;
            cands.push_back(c);
            if (i % 2 == 0) dets.push_back(testutil::random_pose(rng, 15, pos(rng), pos(rng), 20.0));
        }
        const auto kept = suppress_candidates(cands, dets, spec, cfg);
        for (std::size_t i = 0; i < kept.size(); ++i) {
            for (const auto& det : dets) {
                CHECK(overlap_similarity(kept[i].pose, det, spec, cfg) <= cfg.overlap_threshold);
            }
            for (std::size_t j = 0; j < kept.size(); ++j) {
                if (i == j) continue;
                CHECK(overlap_similarity(kept[i].pose, kept[j].pose, spec, cfg) <=
                      cfg.overlap_threshold);
            }
        }
    }
}

TEST_CASE("oks nms") {
    const SkeletonSpec spec = SkeletonSpec::posetrack15();
    std::mt19937 rng(53);

    Pose a = testutil::random_pose(rng, 15, 60, 60, 18);
    a.score = 0.9;
    Pose b = a;  // duplicate
    b.score = 0.8;
    const auto dedup = oks_nms({a, b}, spec, 0.6);
    REQUIRE(dedup.size() == 1);
    CHECK(dedup[0].score == doctest::Approx(0.9));

    Pose c = testutil::random_pose(rng, 15, 300, 60, 18);
    c.score = 0.7;
    Pose d = testutil::random_pose(rng, 15, 60, 220, 18);
    d.score = 0.6;
    CHECK(oks_nms({a, c, d}, spec, 0.6).size() == 3);

    // greedy walk: b duplicates a, c stands alone -> {a, c}
    Pose near_dup = a;
    near_dup.score = 0.8;
    for (auto& kpt : near_dup.keypoints) {
        if (kpt.has_value()) kpt->x += 0.5;
    }
    const auto walk = oks_nms({a, near_dup, c}, spec, 0.6);
    REQUIRE(walk.size() == 2);
    CHECK(walk[0].score == doctest::Approx(0.9));
    CHECK(walk[1].score == doctest::Approx(0.7));
}

TEST_CASE("oks nms size bounds and threshold monotonicity") {
    const SkeletonSpec spec = SkeletonSpec::posetrack15();
    std::mt19937 rng(59);
    std::uniform_real_distribution<double> score(0.1, 1.0);
    std::uniform_real_distribution<double> jitter(-2.0, 2.0);
    for (int trial = 0; trial < 30; ++trial) {
        // clusters of jittered duplicates around well-separated people
        std::vector<Pose> poses;
        for (int person = 0; person < 3; ++person) {
            const Pose base = testutil::random_pose(rng, 15, 80.0 + 150.0 * person, 80.0, 18.0);
            const int copies = 1 + static_cast<int>(rng() % 3);
            for (int c = 0; c < copies; ++c) {
                Pose dup = base;
                for (auto& kpt : dup.keypoints) {
                    if (kpt.has_value()) {
                        kpt->x += jitter(rng);
                        kpt->y += jitter(rng);
                    }
                }
                dup.score = score(rng);
                poses.push_back(dup);
            }
        }
        std::size_t prev = 0;
        for (double thr = 0.2; thr <= 1.01; thr += 0.2) {
            const auto kept = oks_nms(poses, spec, thr);
            CHECK(kept.size() <= poses.size());
            CHECK(kept.size() >= prev);
            prev = kept.size();
        }
    }
}

TEST_CASE("constant velocity flow provider") {
    ConstantVelocityFlowProvider provider;
    const auto still = provider.flow_for({{10.0, 10.0}}, 5);
    CHECK(still.sample(0, 0)[0] == 0.0);

    const auto moving = provider.flow_for({{10.0, 10.0}, {13.0, 8.0}}, 5);
    const auto d = moving.sample(50.0, 50.0);
    CHECK(d[0] == doctest::Approx(3.0));
    CHECK(d[1] == doctest::Approx(-2.0));
}

TEST_CASE("revision config validation") {
    RevisionConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.overlap_threshold = 1.5;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}
