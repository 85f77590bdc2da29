#include <catch2/catch_amalgamated.hpp>

#include "latentmotion/analysis.hpp"
#include "latentmotion/synth.hpp"

using namespace lm;

TEST_CASE("generated bases are mutually orthogonal") {
    SynthSpec spec;
    spec.d_sub = 16;
    spec.subspace_dims = {4, 4};
    spec.seed = 71;
    const auto bases = make_orthogonal_bases(spec);
    REQUIRE(bases.size() == 2);

    CHECK((bases[0] * bases[1].transpose()).cwiseAbs().maxCoeff() <= 1e-12);
    for (const auto& b : bases) {
        const Eigen::MatrixXd gram = b * b.transpose();
        CHECK((gram - Eigen::MatrixXd::Identity(4, 4)).cwiseAbs().maxCoeff() <= 1e-12);
    }
}

TEST_CASE("a full-dimensional basis spans the whole space") {
    SynthSpec spec;
    spec.d_sub = 8;
    spec.subspace_dims = {8};
    spec.seed = 72;
    const auto basis = make_orthogonal_bases(spec)[0];
    const auto s = subspace_from_basis(basis, {0, 1}, 8, "full");

    Philox rng(72, 1);
    for (int rep = 0; rep < 50; ++rep) {
        Eigen::VectorXd d(8);
        for (int i = 0; i < 8; ++i) d[i] = rng.gaussian();
        const Eigen::VectorXd p = project_transition(d, s);
        CHECK((p - d).cwiseAbs().maxCoeff() <= 1e-9);
        CHECK(std::abs(p.norm() - d.norm()) <= 1e-9);
    }
}

TEST_CASE("bases regenerate bit-exactly for a fixed seed") {
    SynthSpec spec;
    spec.d_sub = 512;
    spec.subspace_dims = {8, 8};
    spec.seed = 7;
    const auto a = make_orthogonal_bases(spec);
    const auto b = make_orthogonal_bases(spec);
    CHECK(a[0] == b[0]);
    CHECK(a[1] == b[1]);
}

TEST_CASE("dims exceeding the ambient dimension are rejected") {
    SynthSpec spec;
    spec.d_sub = 8;
    spec.subspace_dims = {5, 5};
    CHECK_THROWS_MATCHES(make_orthogonal_bases(spec), Error,
                         Catch::Matchers::Predicate<Error>([](const Error& e) {
                             return e.code() == errc::dims_exceed_ambient;
                         }));
}

TEST_CASE("pure-motion trajectories live inside their subspace") {
    SynthSpec spec;
    spec.d_sub = 24;
    spec.subspace_dims = {5, 5};
    spec.n_trajectories = 4;
    spec.frames = 9;
    spec.seed = 73;
    const auto bases = make_orthogonal_bases(spec);
    const auto s0 = subspace_from_basis(bases[0], spec.layer_range(), spec.layout_dim(), "a");

    const auto s1 = subspace_from_basis(bases[1], spec.layer_range(), spec.layout_dim(), "b");
    for (const auto& st : sample_trajectories(spec, bases, {1.0, 0.0})) {
        const auto ts = compute_transitions(st.trajectory, spec.layer_range());
        const auto proj = project_sequence(ts, s0);
        CHECK((proj.transitions - ts.transitions).cwiseAbs().maxCoeff() <= 1e-12);
        CHECK(st.true_parts[1].cwiseAbs().maxCoeff() == 0.0);

        // energy leaked into the orthogonal subspace is numerically nil
        const auto leak = project_sequence(ts, s1);
        for (int t = 0; t < ts.transition_count(); ++t) {
            const double total = ts.transitions.row(t).squaredNorm();
            CHECK(leak.transitions.row(t).squaredNorm() / total <= 1e-12);
        }
    }

    // with noise, the residual stays within a generous noise bound
    SynthSpec noisy = spec;
    noisy.noise_sigma = 0.01;
    for (const auto& st : sample_trajectories(noisy, bases, {1.0, 0.0})) {
        const auto ts = compute_transitions(st.trajectory, spec.layer_range());
        const auto proj = project_sequence(ts, s0);
        CHECK((proj.transitions - ts.transitions).cwiseAbs().maxCoeff() <= 10.0 * 0.01);
    }
}

TEST_CASE("ground-truth parts plus noise reproduce the transitions exactly") {
    SynthSpec spec;
    spec.d_sub = 12;
    spec.subspace_dims = {4, 4};
    spec.n_trajectories = 3;
    spec.frames = 7;
    spec.noise_sigma = 0.05;
    spec.seed = 74;
    const auto bases = make_orthogonal_bases(spec);

    for (const auto& st : sample_trajectories(spec, bases, {1.0, 1.0})) {
        const auto ts = compute_transitions(st.trajectory, spec.layer_range());
        Eigen::MatrixXd sum = st.noise;
        for (const auto& part : st.true_parts) sum += part;
        CHECK((sum - ts.transitions).cwiseAbs().maxCoeff() <= 1e-12);
    }
}

TEST_CASE("decomposition against fitted subspaces recovers stored ground truth") {
    SynthSpec spec;
    spec.d_sub = 32;
    spec.subspace_dims = {4, 4};
    spec.n_trajectories = 30;
    spec.frames = 8;
    spec.seed = 75;
    const auto bases = make_orthogonal_bases(spec);

    // fit each subspace from its own pure-motion set
    std::vector<MotionSubspace> fitted;
    for (int motion = 0; motion < 2; ++motion) {
        SynthSpec pure = spec;
        pure.seed = spec.seed + 100 + motion;
        std::vector<double> weights(2, 0.0);
        weights[motion] = 1.0;
        std::vector<TransitionSequence> seqs;
        for (const auto& st : sample_trajectories(pure, bases, weights))
            seqs.push_back(compute_transitions(st.trajectory, spec.layer_range()));
        fitted.push_back(fit_subspace(accumulate(seqs, "motion"), 4));
    }

    SynthSpec mixed = spec;
    mixed.n_trajectories = 5;
    for (const auto& st : sample_trajectories(mixed, bases, {1.0, 1.0})) {
        const auto ts = compute_transitions(st.trajectory, spec.layer_range());
        for (int motion = 0; motion < 2; ++motion) {
            const auto proj = project_sequence(ts, fitted[motion]);
            CHECK((proj.transitions - st.true_parts[motion]).cwiseAbs().maxCoeff() <= 1e-8);
        }
    }
}

TEST_CASE("drift shifts every transition of its motion") {
    SynthSpec spec;
    spec.d_sub = 6;
    spec.subspace_dims = {2};
    spec.n_trajectories = 2;
    spec.frames = 5;
    spec.seed = 76;
    const auto bases = make_orthogonal_bases(spec);

    spec.drift = {Eigen::VectorXd::Zero(6)};
    spec.drift[0] << 3.0, 0, 0, 0, 0, 0;
    const auto with_drift = sample_trajectories(spec, bases, {1.0});

    spec.drift.clear();
    const auto without = sample_trajectories(spec, bases, {1.0});

    for (int i = 0; i < 2; ++i) {
        const Eigen::MatrixXd delta =
            with_drift[i].true_parts[0] - without[i].true_parts[0];
        for (int t = 0; t < delta.rows(); ++t) {
            CHECK(delta(t, 0) == Catch::Approx(3.0).margin(1e-12));
            CHECK(delta.row(t).tail(5).cwiseAbs().maxCoeff() <= 1e-12);
        }
    }
}

TEST_CASE("trajectory generation is deterministic and stream-isolated") {
    SynthSpec spec;
    spec.d_sub = 10;
    spec.subspace_dims = {3};
    spec.n_trajectories = 4;
    spec.frames = 6;
    spec.noise_sigma = 0.1;
    spec.seed = 77;
    const auto bases = make_orthogonal_bases(spec);

    const auto a = sample_trajectories(spec, bases, {1.0});
    const auto b = sample_trajectories(spec, bases, {1.0});
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        for (int t = 0; t < a[i].trajectory.frame_count(); ++t)
            CHECK(a[i].trajectory.frames[t] == b[i].trajectory.frames[t]);

    // trajectory i does not depend on how many trajectories are requested
    SynthSpec fewer = spec;
    fewer.n_trajectories = 2;
    const auto c = sample_trajectories(fewer, bases, {1.0});
    for (int t = 0; t < c[1].trajectory.frame_count(); ++t)
        CHECK(c[1].trajectory.frames[t] == a[1].trajectory.frames[t]);
}

TEST_CASE("mirror of the mixed evaluation set: 100 + 100 + 40 trajectories") {
    SynthSpec spec;
    spec.d_sub = 8;
    spec.subspace_dims = {2, 2};
    spec.n_trajectories = 100;
    spec.frames = 3;
    spec.seed = 78;
    const auto bases = make_orthogonal_bases(spec);

    const auto rot = sample_trajectories(spec, bases, {1.0, 0.0});
    const auto trans = sample_trajectories(spec, bases, {0.0, 1.0});
    SynthSpec both = spec;
    both.n_trajectories = 40;
    both.seed = spec.seed + 1;
    const auto mixed = sample_trajectories(both, bases, {1.0, 1.0});

    CHECK(rot.size() == 100);
    CHECK(trans.size() == 100);
    CHECK(mixed.size() == 40);
}

TEST_CASE("extra layers carry the appearance and stay put") {
    SynthSpec spec;
    spec.d_sub = 8;
    spec.subspace_dims = {3};
    spec.n_trajectories = 1;
    spec.frames = 5;
    spec.seed = 79;
    spec.dim = 4;          // two in-range layers of width 4
    spec.extra_layers = 3;
    const auto bases = make_orthogonal_bases(spec);

    const auto st = sample_trajectories(spec, bases, {1.0})[0];
    CHECK(st.trajectory.layers() == 5);
    CHECK(st.trajectory.dim() == 4);
    for (int t = 1; t < st.trajectory.frame_count(); ++t)
        CHECK((st.trajectory.frames[t].bottomRows(3) - st.trajectory.frames[0].bottomRows(3))
                  .cwiseAbs()
                  .maxCoeff() == 0.0);
}

TEST_CASE("heavy-tailed coefficients spread energy further down the spectrum") {
    SynthSpec spec;
    spec.d_sub = 64;
    spec.subspace_dims = {64};
    spec.n_trajectories = 20;
    spec.frames = 11;
    spec.seed = 80;
    spec.heavy_tailed = true;
    const auto bases = make_orthogonal_bases(spec);

    std::vector<TransitionSequence> seqs;
    for (const auto& st : sample_trajectories(spec, bases, {1.0}))
        seqs.push_back(compute_transitions(st.trajectory, spec.layer_range()));
    const auto data = accumulate(seqs, "heavy");
    const auto rep = variance_report(data, 64);

    const int k40 = static_cast<int>(0.4 * 64);
    CHECK(rep.cumulative_ratio[k40 - 1] < 0.8);
    CHECK(rep.cumulative_ratio[63] >= 0.999);
}
