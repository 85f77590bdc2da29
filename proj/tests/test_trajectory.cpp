#include <catch2/catch_amalgamated.hpp>

#include "latentmotion/philox.hpp"
#include "latentmotion/trajectory.hpp"

using namespace lm;

namespace {

// Single-layer trajectory from scalar frames.
LatentTrajectory scalar_traj(std::initializer_list<double> values) {
    LatentTrajectory traj;
    for (double v : values) {
        Code c(1, 1);
        c(0, 0) = v;
        traj.frames.push_back(c);
    }
    return traj;
}

LatentTrajectory random_traj(Philox& rng, int t, int layers, int dim) {
    LatentTrajectory traj;
    for (int i = 0; i < t; ++i) {
        Code c(layers, dim);
        for (int l = 0; l < layers; ++l)
            for (int d = 0; d < dim; ++d) c(l, d) = rng.gaussian();
        traj.frames.push_back(std::move(c));
    }
    return traj;
}

double max_abs_diff(const LatentTrajectory& a, const LatentTrajectory& b) {
    REQUIRE(a.frame_count() == b.frame_count());
    double worst = 0.0;
    for (int t = 0; t < a.frame_count(); ++t)
        worst = std::max(worst, (a.frames[t] - b.frames[t]).cwiseAbs().maxCoeff());
    return worst;
}

}  // namespace

TEST_CASE("single-frame trajectory has no transitions") {
    const auto ts = compute_transitions(scalar_traj({5.0}), {0, 1});
    CHECK(ts.transition_count() == 0);
    CHECK(ts.origin_code(0, 0) == 5.0);

    const auto back = integrate(ts);
    CHECK(back.frame_count() == 1);
    CHECK(back.frames[0](0, 0) == 5.0);
}

TEST_CASE("static video yields zero transitions") {
    const auto ts = compute_transitions(scalar_traj({2.0, 2.0, 2.0, 2.0}), {0, 1});
    CHECK(ts.transitions.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("transitions are pairwise differences") {
    const auto ts = compute_transitions(scalar_traj({0.0, 1.0, 2.0, 3.0}), {0, 1});
    REQUIRE(ts.transition_count() == 3);
    CHECK(ts.transitions(0, 0) == 1.0);
    CHECK(ts.transitions(1, 0) == 1.0);
    CHECK(ts.transitions(2, 0) == 1.0);
}

TEST_CASE("integration is a cumulative sum from the origin") {
    TransitionSequence ts;
    ts.layer_range = {0, 1};
    ts.dim = 1;
    ts.origin_code = Code::Zero(1, 1);
    ts.transitions = Eigen::MatrixXd::Ones(3, 1);

    const auto traj = integrate(ts);
    REQUIRE(traj.frame_count() == 4);
    for (int t = 0; t < 4; ++t) CHECK(traj.frames[t](0, 0) == double(t));
}

TEST_CASE("round trip reproduces the trajectory") {
    Philox rng(11, 0);
    for (int rep = 0; rep < 20; ++rep) {
        const int t = 1 + int(rng.next_u32() % 12);
        const auto x = random_traj(rng, t, 4, 3);

        const auto full = integrate(compute_transitions(x, {0, 4}));
        CHECK(max_abs_diff(full, x) <= 1e-9);

        const auto partial = integrate(compute_transitions(x, {1, 2}));
        CHECK(max_abs_diff(partial, x) <= 1e-9);
    }
}

TEST_CASE("length law: T-1 transitions") {
    Philox rng(12, 0);
    for (int t = 1; t <= 9; ++t)
        CHECK(compute_transitions(random_traj(rng, t, 2, 2), {0, 2}).transition_count() == t - 1);
}

TEST_CASE("compute_transitions is linear in the codes") {
    Philox rng(13, 0);
    const auto x = random_traj(rng, 6, 3, 2);
    LatentTrajectory scaled = x;
    for (auto& f : scaled.frames) f *= 2.5;

    const auto tx = compute_transitions(x, {0, 3});
    const auto ts = compute_transitions(scaled, {0, 3});
    CHECK((ts.transitions - 2.5 * tx.transitions).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("scale_transitions") {
    Philox rng(14, 0);
    const auto ts = compute_transitions(random_traj(rng, 8, 2, 3), {0, 2});

    CHECK(scale_transitions(ts, 0.0).transitions.cwiseAbs().maxCoeff() == 0.0);
    CHECK((scale_transitions(ts, 1.0).transitions - ts.transitions).cwiseAbs().maxCoeff() == 0.0);

    // unit transitions scaled by 1.5 have norm 1.5
    TransitionSequence unit = ts;
    for (int t = 0; t < unit.transitions.rows(); ++t)
        unit.transitions.row(t) /= unit.transitions.row(t).norm();
    const auto scaled = scale_transitions(unit, 1.5);
    for (int t = 0; t < scaled.transitions.rows(); ++t)
        CHECK(scaled.transitions.row(t).norm() == Catch::Approx(1.5).margin(1e-12));

    // composition: scaling by a then b equals scaling by a*b
    const auto ab = scale_transitions(ts, 0.7 * -1.3);
    const auto chained = scale_transitions(scale_transitions(ts, 0.7), -1.3);
    CHECK((ab.transitions - chained.transitions).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("passthrough replays original fine layers, freeze pins them") {
    // layer 0 in range; layer 1 outside, moving on its own
    LatentTrajectory x;
    for (int t = 0; t < 5; ++t) {
        Code c(2, 2);
        c.row(0) << double(t), 2.0 * t;
        c.row(1) << 10.0 + 3.0 * t, -double(t);
        x.frames.push_back(c);
    }

    const auto ts = compute_transitions(x, {0, 1});
    const auto replay = integrate(ts, FinePolicy::replay);
    CHECK(max_abs_diff(replay, x) <= 1e-12);

    const auto frozen = integrate(ts, FinePolicy::freeze);
    for (int t = 0; t < 5; ++t) {
        // in-range layer integrated, fine layer held at w_0
        CHECK((frozen.frames[t].row(0) - x.frames[t].row(0)).cwiseAbs().maxCoeff() <= 1e-12);
        CHECK((frozen.frames[t].row(1) - x.frames[0].row(1)).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("integration without passthrough falls back to freeze") {
    TransitionSequence ts;
    ts.layer_range = {0, 1};
    ts.dim = 2;
    ts.origin_code = Code::Zero(2, 2);
    ts.origin_code.row(1) << 7.0, 8.0;
    ts.transitions = Eigen::MatrixXd::Ones(2, 2);

    const auto traj = integrate(ts, FinePolicy::replay);
    REQUIRE(traj.frame_count() == 3);
    for (int t = 0; t < 3; ++t) {
        CHECK(traj.frames[t](0, 0) == double(t));
        CHECK(traj.frames[t](1, 0) == 7.0);
        CHECK(traj.frames[t](1, 1) == 8.0);
    }
}

TEST_CASE("validation errors") {
    CHECK_THROWS_MATCHES(compute_transitions({}, {0, 1}), Error,
                         Catch::Matchers::Predicate<Error>([](const Error& e) {
                             return e.code() == errc::shape_mismatch;
                         }));

    const auto x = scalar_traj({1.0, 2.0});
    CHECK_THROWS_MATCHES(compute_transitions(x, {0, 2}), Error,
                         Catch::Matchers::Predicate<Error>([](const Error& e) {
                             return e.code() == errc::layer_range_out_of_bounds;
                         }));
    CHECK_THROWS_MATCHES(compute_transitions(x, {-1, 1}), Error,
                         Catch::Matchers::Predicate<Error>([](const Error& e) {
                             return e.code() == errc::layer_range_out_of_bounds;
                         }));

    auto bad = scalar_traj({1.0, 2.0});
    bad.frames[1](0, 0) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_MATCHES(compute_transitions(bad, {0, 1}), Error,
                         Catch::Matchers::Predicate<Error>([](const Error& e) {
                             return e.code() == errc::non_finite_input;
                         }));

    const auto ts = compute_transitions(x, {0, 1});
    CHECK_THROWS_MATCHES(scale_transitions(ts, std::numeric_limits<double>::infinity()), Error,
                         Catch::Matchers::Predicate<Error>([](const Error& e) {
                             return e.code() == errc::non_finite_input;
                         }));
}
