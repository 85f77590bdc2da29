#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <cstdint>
#include <string>
#include <vector>

#include "latentmotion/errors.hpp"
#include "latentmotion/philox.hpp"
#include "latentmotion/subspace.hpp"

namespace lm {

enum class IcaContrast { logcosh, exp };

struct IcaOptions {
    int max_iter = 1000;
    double tol = 1e-6;
    std::uint64_t seed = 0;
    IcaContrast contrast = IcaContrast::logcosh;
};

// FastICA decomposition of a pooled transition dataset. Sources are
// identifiable only up to permutation and sign; compare models with
// amari_index, never by direct matrix equality.
struct IcaModel {
    Eigen::MatrixXd unmixing;         // C x d_sub: sources = unmixing * (d - mean)
    Eigen::MatrixXd mixing_estimate;  // d_sub x C: d ~ mean + mixing * sources
    Eigen::MatrixXd whitening;        // C x d_sub PCA whitening applied to centered data
    Eigen::VectorXd mean;             // d_sub
    Eigen::MatrixXd rotation;         // C x C orthogonal unmixing in whitened space
    int n_components = 0;
    int iterations = 0;
    bool converged = false;
    std::vector<std::string> warnings;

    int d_sub() const { return static_cast<int>(unmixing.cols()); }
};

namespace detail {

// Symmetric decorrelation: W <- (W W^T)^{-1/2} W.
inline Eigen::MatrixXd sym_decorrelate(const Eigen::MatrixXd& w) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(w * w.transpose());
    const Eigen::VectorXd inv_sqrt = eig.eigenvalues().cwiseMax(1e-300).cwiseSqrt().cwiseInverse();
    return eig.eigenvectors() * inv_sqrt.asDiagonal() * eig.eigenvectors().transpose() * w;
}

}  // namespace detail

// Symmetric (parallel) FastICA with the logcosh contrast (a = 1) by default.
// Data is centered, PCA-whitened down to c dimensions, then the orthogonal
// unmixing rotation is found by fixed-point iteration with symmetric
// decorrelation. Deterministic given the seed. Non-convergence flags the
// model instead of failing.
inline IcaModel fit_ica(const TransitionDataset& data, int c = 6, const IcaOptions& opts = {}) {
    data.validate();
    const int m = data.sample_count();
    const int d = data.d_sub();
    require(c >= 1, errc::invalid_argument, "component count must be >= 1");
    require(c <= std::min(m, d), errc::k_too_large,
            "c = " + std::to_string(c) + " exceeds min(samples, d_sub) = " +
                std::to_string(std::min(m, d)));
    require(opts.max_iter >= 1 && opts.tol > 0.0, errc::invalid_argument,
            "max_iter must be >= 1 and tol > 0");

    IcaModel model;
    model.n_components = c;
    if (m < 2 * c)
        model.warnings.push_back("fewer than 2*c samples; estimates may be unstable");

    // Center.
    model.mean = data.samples.colwise().mean().transpose();
    Eigen::MatrixXd x = data.samples.rowwise() - model.mean.transpose();

    // PCA whitening to c dimensions via SVD of the centered samples:
    // x = U S V^T, whitened = sqrt(m) * U(:, :c).
    Eigen::BDCSVD<Eigen::MatrixXd> svd(x, Eigen::ComputeThinU | Eigen::ComputeThinV);
    require(svd.info() == Eigen::Success, errc::numerical_failure, "SVD did not converge");
    const Eigen::VectorXd sv = svd.singularValues().head(c);
    require(sv[c - 1] > 0.0, errc::numerical_failure,
            "data rank below requested component count");

    const double scale = std::sqrt(static_cast<double>(m));
    // whitening: z = K (d - mean), K = sqrt(m) * diag(1/s) * V^T  (c x d)
    model.whitening = scale * sv.cwiseInverse().asDiagonal() *
                      svd.matrixV().leftCols(c).transpose();
    // z rows have identity covariance
    Eigen::MatrixXd z = scale * svd.matrixU().leftCols(c);

    // Seeded random orthogonal start.
    Philox rng(opts.seed, philox_stream(0x1CA, 0));
    Eigen::MatrixXd w(c, c);
    for (int i = 0; i < c; ++i)
        for (int j = 0; j < c; ++j) w(i, j) = rng.gaussian();
    w = detail::sym_decorrelate(w);

    const double inv_m = 1.0 / static_cast<double>(m);
    Eigen::MatrixXd prev(c, c);
    for (model.iterations = 1; model.iterations <= opts.max_iter; ++model.iterations) {
        prev = w;

        const Eigen::MatrixXd y = z * w.transpose();  // m x c source estimates
        Eigen::MatrixXd g(m, c), gprime(m, c);
        if (opts.contrast == IcaContrast::logcosh) {
            g = y.array().tanh().matrix();
            gprime = (1.0 - g.array().square()).matrix();
        } else {
            const Eigen::ArrayXXd e = (-0.5 * y.array().square()).exp();
            g = (y.array() * e).matrix();
            gprime = ((1.0 - y.array().square()) * e).matrix();
        }

        // w_i <- E[z g(w_i^T z)] - E[g'(w_i^T z)] w_i, then re-orthogonalize.
        w = inv_m * g.transpose() * z - (inv_m * gprime.colwise().sum().transpose()).asDiagonal() * w;
        w = detail::sym_decorrelate(w);

        // Largest change in row direction, sign-insensitive.
        const double delta =
            ((w * prev.transpose()).diagonal().cwiseAbs().array() - 1.0).abs().maxCoeff();
        if (delta < opts.tol) {
            model.converged = true;
            break;
        }
    }
    if (!model.converged) {
        model.iterations = opts.max_iter;
        model.warnings.push_back("NotConverged: FastICA hit max_iter = " +
                                 std::to_string(opts.max_iter));
    }

    model.rotation = w;
    detail::canonicalize_signs(model.rotation);
    model.unmixing = model.rotation * model.whitening;
    // pinv(unmixing) = pinv(K) W^T with orthogonal W; pinv(K) = V(:, :c) diag(s) / sqrt(m)
    model.mixing_estimate = svd.matrixV().leftCols(c) * (sv / scale).asDiagonal() *
                            model.rotation.transpose();
    return model;
}

// Map transitions to source space, zero every source not in `selected`, and
// map back (mean re-added). Full selection reproduces the rank-C
// approximation of the input; empty selection leaves constant mean motion.
inline TransitionSequence ica_project(const TransitionSequence& ts, const IcaModel& model,
                                      const std::vector<int>& selected) {
    ts.validate();
    require(ts.d_sub() == model.d_sub(), errc::shape_mismatch,
            "sequence width does not match model d_sub");

    Eigen::VectorXd keep = Eigen::VectorXd::Zero(model.n_components);
    for (int idx : selected) {
        require(idx >= 0 && idx < model.n_components, errc::index_out_of_range,
                "source index " + std::to_string(idx) + " out of range");
        keep[idx] = 1.0;
    }

    const Eigen::MatrixXd centered = ts.transitions.rowwise() - model.mean.transpose();
    const Eigen::MatrixXd sources = centered * model.unmixing.transpose();
    TransitionSequence out = ts;
    out.transitions = (sources * keep.asDiagonal()) * model.mixing_estimate.transpose();
    out.transitions.rowwise() += model.mean.transpose();
    return out;
}

// Amari index of a mixing/unmixing product: zero iff the product is a scaled
// permutation, i.e. the sources were recovered perfectly up to order and sign.
inline double amari_index(const Eigen::MatrixXd& p) {
    require(p.rows() == p.cols() && p.rows() >= 2, errc::shape_mismatch,
            "amari index needs a square matrix of size >= 2");
    const int n = static_cast<int>(p.rows());
    const Eigen::MatrixXd a = p.cwiseAbs();
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
        total += a.row(i).sum() / a.row(i).maxCoeff() - 1.0;
        total += a.col(i).sum() / a.col(i).maxCoeff() - 1.0;
    }
    return total / (2.0 * n * (n - 1));
}

}  // namespace lm
