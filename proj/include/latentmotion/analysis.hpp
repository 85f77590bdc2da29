#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <vector>

#include "latentmotion/errors.hpp"
#include "latentmotion/subspace.hpp"

namespace lm {

// Per-frame landmark point sets (P x d each, d = 2 or 3). `stride` is the
// frame subsampling step used by the pose-motion metric; neighboring frames
// barely move, so every 10th frame is compared by default.
struct LandmarkTrack {
    std::vector<Eigen::MatrixXd> frames;
    int stride = 10;

    int frame_count() const { return static_cast<int>(frames.size()); }
    int point_count() const { return frames.empty() ? 0 : static_cast<int>(frames.front().rows()); }
    int spatial_dims() const { return frames.empty() ? 0 : static_cast<int>(frames.front().cols()); }

    void validate() const {
        require(!frames.empty(), errc::too_few_frames, "landmark track is empty");
        const auto p = frames.front().rows();
        const auto d = frames.front().cols();
        require(d == 2 || d == 3, errc::unsupported_version,
                "landmarks must be 2D or 3D, got " + std::to_string(d) + "D");
        require(p >= d, errc::shape_mismatch, "too few landmark points for rotation estimation");
        require(stride >= 1, errc::invalid_argument, "stride must be >= 1");
        for (const auto& f : frames) {
            require(f.rows() == p && f.cols() == d, errc::inconsistent_point_count,
                    "all frames must share the same point count and dimensionality");
            require(f.allFinite(), errc::non_finite_input, "landmarks contain NaN/Inf");
        }
    }
};

// Least-squares proper rotation R (det = +1) minimizing
// sum ||R (p_i - centroid) - (q_i - centroid)||^2, via SVD of the
// cross-covariance with the usual reflection fix on the smallest singular
// direction. Points are rows.
inline Eigen::MatrixXd kabsch_rotation(const Eigen::MatrixXd& p, const Eigen::MatrixXd& q) {
    require(p.rows() == q.rows() && p.cols() == q.cols(), errc::shape_mismatch,
            "point sets must share shape");
    const int d = static_cast<int>(p.cols());
    require(d == 2 || d == 3, errc::unsupported_version, "kabsch supports 2D and 3D points");
    require(p.rows() >= 2, errc::degenerate_configuration, "need at least 2 points");
    require(p.allFinite() && q.allFinite(), errc::non_finite_input, "points contain NaN/Inf");

    // Static frames are common; the answer is exact.
    if (p == q) return Eigen::MatrixXd::Identity(d, d);

    const Eigen::RowVectorXd pc = p.colwise().mean();
    const Eigen::RowVectorXd qc = q.colwise().mean();
    const Eigen::MatrixXd cross = (p.rowwise() - pc).transpose() * (q.rowwise() - qc);

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Eigen::VectorXd sv = svd.singularValues();
    // rank < d-1 leaves the rotation underdetermined
    require(sv[0] > 0.0 && sv[d - 2] >= 1e-12 * sv[0], errc::degenerate_configuration,
            "point configuration does not determine a unique rotation");

    Eigen::VectorXd flip = Eigen::VectorXd::Ones(d);
    flip[d - 1] = (svd.matrixV() * svd.matrixU().transpose()).determinant() < 0.0 ? -1.0 : 1.0;
    return svd.matrixV() * flip.asDiagonal() * svd.matrixU().transpose();
}

// Aggregated pose motion: subsample frames at 0, stride, 2*stride, ...,
// estimate the rigid rotation between each consecutive subsampled pair and
// average ||R - I||_F. Zero for a static head, large under pose motion.
inline double apm(const LandmarkTrack& track) {
    track.validate();

    std::vector<int> idx;
    for (int i = 0; i < track.frame_count(); i += track.stride) idx.push_back(i);
    require(idx.size() >= 2, errc::too_few_frames,
            "fewer than 2 frames remain after subsampling with stride " +
                std::to_string(track.stride));

    const int d = track.spatial_dims();
    const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(d, d);
    double total = 0.0;
    for (std::size_t k = 0; k + 1 < idx.size(); ++k) {
        const Eigen::MatrixXd r = kabsch_rotation(track.frames[idx[k]], track.frames[idx[k + 1]]);
        total += (r - identity).norm();
    }
    return total / static_cast<double>(idx.size() - 1);
}

// Canonical angles between the spans of two row-basis matrices, in radians,
// non-decreasing. Zero angles mean shared directions, pi/2 orthogonal ones.
inline Eigen::VectorXd principal_angles(const Eigen::MatrixXd& basis_a,
                                        const Eigen::MatrixXd& basis_b) {
    require(basis_a.cols() == basis_b.cols(), errc::shape_mismatch,
            "bases must share ambient dimension");
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(basis_a * basis_b.transpose());
    Eigen::VectorXd sv = svd.singularValues();
    Eigen::VectorXd angles(sv.size());
    for (int i = 0; i < sv.size(); ++i)
        angles[i] = std::acos(std::clamp(sv[i], -1.0, 1.0));
    std::sort(angles.begin(), angles.end());
    return angles;
}

// Pairwise dot products between the leading components of two subspaces,
// a 20-bin histogram of their magnitudes, and the principal angles between
// the full spans.
struct OrthogonalityReport {
    static constexpr int kHistogramBins = 20;

    Eigen::MatrixXd dot_matrix;                          // top_k x top_k
    std::array<std::int64_t, kHistogramBins> histogram{};  // uniform bins on |dot| in [0,1]
    Eigen::VectorXd principal_angles;                    // min(K_a, K_b), non-decreasing
    int top_k = 0;
    bool top_k_clamped = false;
    std::vector<std::string> warnings;

    double histogram_bin_width() const { return 1.0 / kHistogramBins; }
};

inline OrthogonalityReport orthogonality_report(const MotionSubspace& a, const MotionSubspace& b,
                                                int top_k = 20) {
    require(a.d_sub() == b.d_sub(), errc::shape_mismatch, "subspaces must share d_sub");
    require(top_k >= 1, errc::invalid_argument, "top_k must be >= 1");

    OrthogonalityReport rep;
    const int available = std::min(a.k(), b.k());
    if (top_k > available) {
        rep.top_k_clamped = true;
        rep.warnings.push_back("top_k clamped from " + std::to_string(top_k) + " to " +
                               std::to_string(available));
        top_k = available;
    }
    rep.top_k = top_k;

    rep.dot_matrix = a.components.topRows(top_k) * b.components.topRows(top_k).transpose();
    for (int i = 0; i < top_k; ++i)
        for (int j = 0; j < top_k; ++j) {
            const double mag = std::min(std::abs(rep.dot_matrix(i, j)), 1.0);
            const int bin = std::min(static_cast<int>(mag * OrthogonalityReport::kHistogramBins),
                                     OrthogonalityReport::kHistogramBins - 1);
            ++rep.histogram[bin];
        }

    rep.principal_angles = principal_angles(a.components, b.components);
    return rep;
}

// Explained-variance curve of a transition dataset: per-component and
// cumulative ratios against the full-rank energy, plus the component counts
// needed to reach the standard coverage thresholds.
struct VarianceReport {
    Eigen::VectorXd per_component_ratio;  // descending
    Eigen::VectorXd cumulative_ratio;     // non-decreasing, in [0, 1]
    // threshold -> smallest k with cumulative >= threshold; 0 if not reached
    // within max_k.
    std::map<double, int> k_at_thresholds;
    bool centered = false;
    int full_rank = 0;
};

inline VarianceReport variance_report(const TransitionDataset& data, int max_k,
                                      bool center = false) {
    data.validate();
    const int full_rank = std::min(data.sample_count(), data.d_sub());
    require(max_k >= 1, errc::invalid_argument, "max_k must be >= 1");
    require(max_k <= full_rank, errc::k_too_large,
            "max_k = " + std::to_string(max_k) + " exceeds min(samples, d_sub) = " +
                std::to_string(full_rank));

    Eigen::MatrixXd a = data.samples;
    if (center) a.rowwise() -= a.colwise().mean();
    const double total = a.squaredNorm();

    Eigen::BDCSVD<Eigen::MatrixXd> svd(a);
    require(svd.info() == Eigen::Success, errc::numerical_failure, "SVD did not converge");
    const Eigen::VectorXd sv = svd.singularValues();

    VarianceReport rep;
    rep.centered = center;
    rep.full_rank = full_rank;
    rep.per_component_ratio.resize(max_k);
    rep.cumulative_ratio.resize(max_k);
    double cum = 0.0;
    for (int i = 0; i < max_k; ++i) {
        rep.per_component_ratio[i] = total > 0.0 ? sv[i] * sv[i] / total : 0.0;
        cum += rep.per_component_ratio[i];
        rep.cumulative_ratio[i] = std::min(cum, 1.0);
    }
    for (double threshold : {0.5, 0.7, 0.9, 0.99}) {
        int at = 0;
        for (int i = 0; i < max_k; ++i)
            if (rep.cumulative_ratio[i] >= threshold) {
                at = i + 1;
                break;
            }
        rep.k_at_thresholds[threshold] = at;
    }
    return rep;
}

}  // namespace lm
