#pragma once

#include <Eigen/Dense>
#include <Eigen/QR>
#include <cstdint>
#include <string>
#include <vector>

#include "latentmotion/errors.hpp"
#include "latentmotion/philox.hpp"
#include "latentmotion/subspace.hpp"
#include "latentmotion/trajectory.hpp"

namespace lm {

// Recipe for a synthetic ground-truth dataset: mutually orthogonal motion
// subspaces of known dimension, and trajectories whose transitions mix them
// with known weights. Everything is a pure function of the seed (Philox
// streams, no OS randomness), so fixtures reproduce bit-exactly.
struct SynthSpec {
    int d_sub = 0;                  // ambient transition dimension
    std::vector<int> subspace_dims; // per-motion intrinsic dimensions
    int n_trajectories = 1;         // per call to sample_trajectories
    int frames = 2;                 // T per trajectory
    double noise_sigma = 0.0;       // isotropic noise std on each transition
    std::vector<Eigen::VectorXd> drift;  // optional constant per-motion mean, d_sub each
    std::uint64_t seed = 0;
    bool heavy_tailed = false;      // Student-t (nu=3) coefficients instead of Gaussian

    // Code layout of the emitted trajectories. d_sub must equal
    // in-range layers * dim; extra layers sit outside the layer range.
    int dim = 0;          // 0 means one layer of width d_sub
    int extra_layers = 0;

    int layout_dim() const { return dim > 0 ? dim : d_sub; }
    int in_range_layers() const { return d_sub / layout_dim(); }
    int total_layers() const { return in_range_layers() + extra_layers; }
    LayerRange layer_range() const { return {0, in_range_layers()}; }

    void validate() const {
        require(d_sub >= 1, errc::invalid_argument, "d_sub must be >= 1");
        require(!subspace_dims.empty(), errc::invalid_argument, "need at least one subspace");
        int total = 0;
        for (int k : subspace_dims) {
            require(k >= 1, errc::invalid_argument, "subspace dims must be >= 1");
            total += k;
        }
        require(total <= d_sub, errc::dims_exceed_ambient,
                "subspace dims sum to " + std::to_string(total) + " > d_sub = " +
                    std::to_string(d_sub));
        require(n_trajectories >= 1, errc::invalid_argument, "n_trajectories must be >= 1");
        require(frames >= 2, errc::invalid_argument, "need at least 2 frames per trajectory");
        require(noise_sigma >= 0.0, errc::invalid_argument, "noise_sigma must be >= 0");
        require(extra_layers >= 0, errc::invalid_argument, "extra_layers must be >= 0");
        require(d_sub % layout_dim() == 0, errc::invalid_argument,
                "d_sub must be divisible by the per-layer dim");
        if (!drift.empty()) {
            require(drift.size() == subspace_dims.size(), errc::shape_mismatch,
                    "need one drift vector per motion");
            for (const auto& v : drift)
                require(v.size() == d_sub, errc::shape_mismatch, "drift must have length d_sub");
        }
    }
};

namespace detail {

// Philox stream purposes used by the generator.
inline constexpr std::uint32_t kStreamBases = 0;
inline constexpr std::uint32_t kStreamOrigin = 1;
inline constexpr std::uint32_t kStreamCoeffs = 2;
inline constexpr std::uint32_t kStreamNoise = 3;

inline Eigen::MatrixXd seeded_gaussian_matrix(Philox& rng, int rows, int cols) {
    Eigen::MatrixXd m(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) m(i, j) = rng.gaussian();
    return m;
}

}  // namespace detail

// Draw one random orthonormal frame of the ambient space (QR of a seeded
// Gaussian matrix, R-diagonal signs fixed) and hand out consecutive column
// blocks as mutually orthogonal row bases, one per requested motion.
inline std::vector<Eigen::MatrixXd> make_orthogonal_bases(const SynthSpec& spec) {
    spec.validate();

    Philox rng(spec.seed, philox_stream(detail::kStreamBases, 0));
    const Eigen::MatrixXd g = detail::seeded_gaussian_matrix(rng, spec.d_sub, spec.d_sub);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
    Eigen::MatrixXd q = qr.householderQ();
    const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int j = 0; j < spec.d_sub; ++j)
        if (r(j, j) < 0.0) q.col(j) = -q.col(j);

    std::vector<Eigen::MatrixXd> bases;
    bases.reserve(spec.subspace_dims.size());
    int offset = 0;
    for (int k : spec.subspace_dims) {
        bases.push_back(q.middleCols(offset, k).transpose());
        offset += k;
    }
    return bases;
}

// Wrap a known row basis as a subspace model with unit singular values, so
// ground-truth bases flow through the same projection/decomposition code
// paths as fitted models.
inline MotionSubspace subspace_from_basis(const Eigen::MatrixXd& basis, LayerRange layer_range,
                                          int dim, const std::string& motion_label) {
    MotionSubspace s;
    s.components = basis;
    s.singular_values = Eigen::VectorXd::Ones(basis.rows());
    s.total_energy = static_cast<double>(basis.rows());
    s.mean_vector = Eigen::VectorXd::Zero(basis.cols());
    s.layer_range = layer_range;
    s.dim = dim;
    s.motion_label = motion_label;
    s.validate();
    return s;
}

// One emitted trajectory plus its exact bookkeeping: the per-motion
// transition parts and the noise, which sum to the trajectory's transitions.
struct SynthTrajectory {
    LatentTrajectory trajectory;
    std::vector<Eigen::MatrixXd> true_parts;  // per motion, (T-1) x d_sub
    Eigen::MatrixXd noise;                    // (T-1) x d_sub
};

// Generate trajectories whose transitions are
//   d_t = sum_j weight_j * (B_j c_t^j + drift_j) + eps,
// with seeded Gaussian (or Student-t) coefficients c_t^j and isotropic noise,
// integrated from a seeded random starting code. Trajectory i draws from its
// own Philox substreams, so generation order does not matter.
inline std::vector<SynthTrajectory> sample_trajectories(const SynthSpec& spec,
                                                        const std::vector<Eigen::MatrixXd>& bases,
                                                        const std::vector<double>& weights) {
    spec.validate();
    require(bases.size() == spec.subspace_dims.size(), errc::shape_mismatch,
            "need one basis per subspace dim");
    require(weights.size() == bases.size(), errc::shape_mismatch,
            "need one mixture weight per motion");
    for (std::size_t j = 0; j < bases.size(); ++j)
        require(bases[j].rows() == spec.subspace_dims[j] && bases[j].cols() == spec.d_sub,
                errc::shape_mismatch, "basis shape does not match spec");

    const int n_motions = static_cast<int>(bases.size());
    const int dim = spec.layout_dim();
    const int layers = spec.total_layers();
    const LayerRange lr = spec.layer_range();

    std::vector<SynthTrajectory> out;
    out.reserve(spec.n_trajectories);
    for (std::uint32_t i = 0; i < static_cast<std::uint32_t>(spec.n_trajectories); ++i) {
        Philox origin_rng(spec.seed, philox_stream(detail::kStreamOrigin, i));
        Philox coeff_rng(spec.seed, philox_stream(detail::kStreamCoeffs, i));
        Philox noise_rng(spec.seed, philox_stream(detail::kStreamNoise, i));

        SynthTrajectory st;
        st.noise = Eigen::MatrixXd::Zero(spec.frames - 1, spec.d_sub);
        st.true_parts.assign(n_motions, Eigen::MatrixXd::Zero(spec.frames - 1, spec.d_sub));

        Code w0(layers, dim);
        for (int r = 0; r < layers; ++r)
            for (int c = 0; c < dim; ++c) w0(r, c) = origin_rng.gaussian();

        Eigen::MatrixXd transitions = Eigen::MatrixXd::Zero(spec.frames - 1, spec.d_sub);
        for (int t = 0; t < spec.frames - 1; ++t) {
            for (int j = 0; j < n_motions; ++j) {
                Eigen::VectorXd coeff(spec.subspace_dims[j]);
                for (int k = 0; k < coeff.size(); ++k)
                    coeff[k] = spec.heavy_tailed ? coeff_rng.student_t(3) : coeff_rng.gaussian();
                Eigen::VectorXd part = bases[j].transpose() * coeff;
                if (!spec.drift.empty()) part += spec.drift[j];
                part *= weights[j];
                st.true_parts[j].row(t) = part.transpose();
                transitions.row(t) += part.transpose();
            }
            if (spec.noise_sigma > 0.0) {
                for (int c = 0; c < spec.d_sub; ++c)
                    st.noise(t, c) = spec.noise_sigma * noise_rng.gaussian();
                transitions.row(t) += st.noise.row(t);
            }
        }

        TransitionSequence ts;
        ts.transitions = std::move(transitions);
        ts.layer_range = lr;
        ts.dim = dim;
        ts.origin_code = std::move(w0);
        st.trajectory = integrate(ts, FinePolicy::freeze);
        st.trajectory.source_id = "synth-" + std::to_string(spec.seed) + "-" + std::to_string(i);
        out.push_back(std::move(st));
    }
    return out;
}

}  // namespace lm
