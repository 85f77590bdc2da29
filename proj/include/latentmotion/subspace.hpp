#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <cstdint>
#include <string>
#include <vector>

#include "latentmotion/errors.hpp"
#include "latentmotion/trajectory.hpp"

namespace lm {

// Transition vectors pooled from every trajectory of one motion type.
struct TransitionDataset {
    Eigen::MatrixXd samples;  // M x d_sub
    LayerRange layer_range;
    int dim = 0;
    std::string motion_label;

    int sample_count() const { return static_cast<int>(samples.rows()); }
    int d_sub() const { return static_cast<int>(samples.cols()); }

    void validate() const {
        require(samples.rows() >= 2, errc::insufficient_samples,
                "need at least 2 transition samples, have " + std::to_string(samples.rows()));
        require(samples.allFinite(), errc::non_finite_input, "dataset contains NaN/Inf");
        require(samples.cols() == static_cast<Eigen::Index>(layer_range.count) * dim,
                errc::shape_mismatch, "sample width must equal layer_count * dim");
    }
};

// A fitted motion subspace: the span of the top-K principal components of a
// pooled transition dataset. Components are rows, orthonormal, ordered by
// descending singular value.
struct MotionSubspace {
    Eigen::MatrixXd components;      // K x d_sub
    Eigen::VectorXd singular_values; // K, non-increasing
    double total_energy = 0.0;       // sum of squared singular values over all rank
    Eigen::VectorXd mean_vector;     // stored for reporting; projection never uses it
    LayerRange layer_range;
    int dim = 0;
    std::string motion_label;
    std::int64_t sample_count = 0;
    bool centered = false;
    bool rank_deficient = false;
    std::vector<std::string> warnings;

    int k() const { return static_cast<int>(components.rows()); }
    int d_sub() const { return static_cast<int>(components.cols()); }

    // Fraction of dataset energy captured by component i.
    double explained_ratio(int i) const {
        return total_energy > 0.0
                   ? singular_values[i] * singular_values[i] / total_energy
                   : 0.0;
    }
    double cumulative_explained() const {
        return total_energy > 0.0 ? singular_values.squaredNorm() / total_energy : 0.0;
    }

    void validate(double tol = 1e-8) const {
        require(components.rows() >= 1, errc::shape_mismatch, "subspace has no components");
        require(components.allFinite() && singular_values.allFinite(), errc::non_finite_input,
                "subspace contains NaN/Inf");
        require(singular_values.size() == components.rows(), errc::shape_mismatch,
                "one singular value per component required");
        for (int i = 0; i < singular_values.size(); ++i) {
            require(singular_values[i] >= 0.0, errc::shape_mismatch,
                    "singular values must be non-negative");
            if (i > 0)
                require(singular_values[i] <= singular_values[i - 1] + 1e-12,
                        errc::shape_mismatch, "singular values must be non-increasing");
        }
        const Eigen::MatrixXd gram = components * components.transpose();
        const double dev =
            (gram - Eigen::MatrixXd::Identity(k(), k())).cwiseAbs().maxCoeff();
        require(dev <= tol, errc::orthonormality_violation,
                "component rows are not orthonormal (max deviation " + std::to_string(dev) + ")");
    }
};

namespace detail {

// PCA signs are arbitrary; make them reproducible by forcing the entry of
// largest magnitude positive (ties broken by lowest index).
inline void canonicalize_signs(Eigen::MatrixXd& rows) {
    for (int i = 0; i < rows.rows(); ++i) {
        int arg = 0;
        double best = -1.0;
        for (int j = 0; j < rows.cols(); ++j) {
            const double a = std::abs(rows(i, j));
            if (a > best) {
                best = a;
                arg = j;
            }
        }
        if (rows(i, arg) < 0.0) rows.row(i) = -rows.row(i);
    }
}

}  // namespace detail

// Pool transition vectors from many single-motion trajectories, in input order.
inline TransitionDataset accumulate(const std::vector<TransitionSequence>& seqs,
                                    const std::string& motion_label) {
    require(!seqs.empty(), errc::insufficient_samples, "no transition sequences given");

    const auto& first = seqs.front();
    first.validate();
    Eigen::Index total = 0;
    for (const auto& s : seqs) {
        s.validate();
        require(s.layer_range == first.layer_range && s.dim == first.dim, errc::shape_mismatch,
                "all sequences must share layer range and dim");
        total += s.transitions.rows();
    }
    require(total >= 2, errc::insufficient_samples,
            "need at least 2 transitions in total, have " + std::to_string(total));

    TransitionDataset data;
    data.layer_range = first.layer_range;
    data.dim = first.dim;
    data.motion_label = motion_label;
    data.samples.resize(total, first.d_sub());
    Eigen::Index row = 0;
    for (const auto& s : seqs) {
        data.samples.middleRows(row, s.transitions.rows()) = s.transitions;
        row += s.transitions.rows();
    }
    return data;
}

// PCA of the pooled transitions: components are the top-k right singular
// vectors of the M x d_sub sample matrix. Uncentered by default -- the raw
// transitions are what gets projected, and constant-velocity motions live in
// the mean. `center` subtracts the column mean first for experimentation.
inline MotionSubspace fit_subspace(const TransitionDataset& data, int k, bool center = false) {
    data.validate();
    const int m = data.sample_count();
    const int d = data.d_sub();
    const int max_k = std::min(m, d);
    require(k >= 1, errc::invalid_argument, "k must be >= 1");
    require(k <= max_k, errc::k_too_large,
            "k = " + std::to_string(k) + " exceeds min(samples, d_sub) = " + std::to_string(max_k));

    MotionSubspace s;
    s.layer_range = data.layer_range;
    s.dim = data.dim;
    s.motion_label = data.motion_label;
    s.sample_count = m;
    s.centered = center;
    s.mean_vector = data.samples.colwise().mean().transpose();

    Eigen::MatrixXd a = data.samples;
    if (center) a.rowwise() -= s.mean_vector.transpose();
    s.total_energy = a.squaredNorm();

    Eigen::BDCSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinV);
    require(svd.info() == Eigen::Success, errc::numerical_failure, "SVD did not converge");

    s.components = svd.matrixV().leftCols(k).transpose();
    s.singular_values = svd.singularValues().head(k);
    detail::canonicalize_signs(s.components);

    const double sigma0 = svd.singularValues()[0];
    if (sigma0 <= 0.0 || s.singular_values[k - 1] < 1e-12 * sigma0) {
        s.rank_deficient = true;
        s.warnings.push_back("RankDeficient: trailing components have near-zero singular values");
    }
    return s;
}

// Orthogonal projection onto the subspace: sum_i <d, v_i> v_i. Operates on
// the raw transition, no mean subtraction.
inline Eigen::VectorXd project_transition(const Eigen::VectorXd& d, const MotionSubspace& s) {
    require(d.size() == s.d_sub(), errc::shape_mismatch,
            "vector length " + std::to_string(d.size()) + " != subspace d_sub " +
                std::to_string(s.d_sub()));
    return s.components.transpose() * (s.components * d);
}

// Element-wise projection of a whole sequence; origin and passthrough
// metadata are copied unchanged.
inline TransitionSequence project_sequence(const TransitionSequence& ts, const MotionSubspace& s) {
    ts.validate();
    require(ts.d_sub() == s.d_sub(), errc::shape_mismatch,
            "sequence width does not match subspace d_sub");
    TransitionSequence out = ts;
    out.transitions = (ts.transitions * s.components.transpose()) * s.components;
    return out;
}

// Weighted sum of projected sequences: d~_t = sum_j alpha_j d_t^{M_j}.
// Metadata comes from the first sequence.
inline TransitionSequence combine(const std::vector<TransitionSequence>& projected,
                                  const std::vector<double>& alphas) {
    require(!projected.empty(), errc::length_mismatch, "no sequences to combine");
    require(projected.size() == alphas.size(), errc::length_mismatch,
            "need one alpha per sequence");
    for (double a : alphas)
        require(std::isfinite(a), errc::non_finite_input, "alpha must be finite");

    const auto& first = projected.front();
    first.validate();
    TransitionSequence out = first;
    out.transitions = alphas[0] * first.transitions;
    for (std::size_t j = 1; j < projected.size(); ++j) {
        projected[j].validate();
        require(projected[j].transitions.rows() == first.transitions.rows() &&
                    projected[j].d_sub() == first.d_sub(),
                errc::shape_mismatch, "sequences to combine must share shape and length");
        out.transitions += alphas[j] * projected[j].transitions;
    }
    return out;
}

// Largest |dot| between components of different subspaces. Above
// kCoherenceWarnThreshold the subspaces overlap enough that combining their
// projections over-counts shared directions.
inline constexpr double kCoherenceWarnThreshold = 0.3;

inline double max_cross_coherence(const std::vector<MotionSubspace>& subspaces) {
    double worst = 0.0;
    for (std::size_t a = 0; a < subspaces.size(); ++a)
        for (std::size_t b = a + 1; b < subspaces.size(); ++b) {
            require(subspaces[a].d_sub() == subspaces[b].d_sub(), errc::shape_mismatch,
                    "subspaces must share d_sub");
            const Eigen::MatrixXd dots =
                subspaces[a].components * subspaces[b].components.transpose();
            worst = std::max(worst, dots.cwiseAbs().maxCoeff());
        }
    return worst;
}

// Split a trajectory into one per-motion trajectory per subspace. Output j
// integrates the projection onto subspaces[j], starting from the input's w_0.
inline std::vector<LatentTrajectory> decompose(const LatentTrajectory& traj,
                                               const std::vector<MotionSubspace>& subspaces) {
    require(!subspaces.empty(), errc::length_mismatch, "no subspaces given");
    const auto& lr = subspaces.front().layer_range;
    for (const auto& s : subspaces)
        require(s.layer_range == lr && s.dim == subspaces.front().dim, errc::shape_mismatch,
                "subspaces must share layer range and dim");

    const TransitionSequence ts = compute_transitions(traj, lr);
    require(ts.dim == subspaces.front().dim, errc::shape_mismatch,
            "trajectory dim does not match subspace dim");

    std::vector<LatentTrajectory> out;
    out.reserve(subspaces.size());
    for (const auto& s : subspaces) out.push_back(integrate(project_sequence(ts, s)));
    return out;
}

// Motion transfer: build the edited transitions from the driving trajectory
// per subspace and alpha, then integrate from the source code. Layers outside
// the range stay at the source values so the source appearance is preserved.
inline LatentTrajectory transfer(const Code& source_code, const LatentTrajectory& driving,
                                 const std::vector<MotionSubspace>& subspaces,
                                 const std::vector<double>& alphas) {
    require(!subspaces.empty(), errc::length_mismatch, "no subspaces given");
    require(subspaces.size() == alphas.size(), errc::length_mismatch,
            "need one alpha per subspace");
    driving.validate();
    require(source_code.rows() == driving.layers() && source_code.cols() == driving.dim(),
            errc::shape_mismatch, "source code shape must match driving codes");
    require(source_code.allFinite(), errc::non_finite_input, "source code contains NaN/Inf");

    const auto& lr = subspaces.front().layer_range;
    for (const auto& s : subspaces)
        require(s.layer_range == lr && s.dim == subspaces.front().dim, errc::shape_mismatch,
                "subspaces must share layer range and dim");

    const TransitionSequence driving_ts = compute_transitions(driving, lr);
    std::vector<TransitionSequence> projected;
    projected.reserve(subspaces.size());
    for (const auto& s : subspaces) projected.push_back(project_sequence(driving_ts, s));

    TransitionSequence edited = combine(projected, alphas);
    edited.origin_code = source_code;
    edited.passthrough.clear();
    return integrate(edited, FinePolicy::freeze);
}

}  // namespace lm
