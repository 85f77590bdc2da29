#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "latentmotion/errors.hpp"

namespace lm {

// A latent code: one n_layers x dim matrix per video frame. Row-major so a
// contiguous run of layers flattens to a plain vector.
using Code = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Contiguous run of generator layers the motion edit is restricted to.
// The first layers carry coarse structure (pose), later ones appearance,
// so edits default to [0, 10).
struct LayerRange {
    int start = 0;
    int count = 10;

    int end() const { return start + count; }

    void validate() const {
        require(start >= 0 && count >= 1, errc::layer_range_out_of_bounds,
                "layer range must have start >= 0 and count >= 1");
    }

    void check_within(int n_layers) const {
        validate();
        require(end() <= n_layers, errc::layer_range_out_of_bounds,
                "layer range [" + std::to_string(start) + ", " + std::to_string(end()) +
                    ") exceeds " + std::to_string(n_layers) + " layers");
    }

    bool operator==(const LayerRange&) const = default;
};

// Ordered latent codes {w_t}, one per frame. Immutable by convention: every
// operation takes it const and returns fresh values.
struct LatentTrajectory {
    std::vector<Code> frames;
    std::optional<double> frame_rate;
    std::string source_id;

    int frame_count() const { return static_cast<int>(frames.size()); }
    int layers() const { return frames.empty() ? 0 : static_cast<int>(frames.front().rows()); }
    int dim() const { return frames.empty() ? 0 : static_cast<int>(frames.front().cols()); }

    void validate() const {
        require(!frames.empty(), errc::shape_mismatch, "trajectory needs at least one frame");
        const auto r = frames.front().rows();
        const auto c = frames.front().cols();
        require(r >= 1 && c >= 1, errc::shape_mismatch, "latent codes must be non-empty");
        for (const auto& f : frames) {
            require(f.rows() == r && f.cols() == c, errc::shape_mismatch,
                    "all codes in a trajectory must share (n_layers, dim)");
            require(f.allFinite(), errc::non_finite_input, "trajectory contains NaN/Inf");
        }
    }
};

// Per-frame motion d_t = w_{t+1} - w_t restricted to a layer range, plus
// everything needed to rebuild a full trajectory: the starting code and the
// original frames for layers outside the range.
struct TransitionSequence {
    Eigen::MatrixXd transitions;  // (T-1) x d_sub, row t is d_t
    LayerRange layer_range;
    int dim = 0;                  // per-layer width
    Code origin_code;             // full w_0
    std::vector<Code> passthrough;  // original full codes, may be empty for synthetic sequences

    int d_sub() const { return layer_range.count * dim; }
    int transition_count() const { return static_cast<int>(transitions.rows()); }
    int frame_count() const { return transition_count() + 1; }

    void validate() const {
        layer_range.validate();
        require(dim >= 1, errc::shape_mismatch, "per-layer dim must be >= 1");
        require(transitions.rows() == 0 || transitions.cols() == d_sub(), errc::shape_mismatch,
                "transition width must equal layer_count * dim");
        require(transitions.allFinite(), errc::non_finite_input, "transitions contain NaN/Inf");
        require(origin_code.size() > 0, errc::shape_mismatch, "missing origin code");
        require(origin_code.allFinite(), errc::non_finite_input, "origin code contains NaN/Inf");
        layer_range.check_within(static_cast<int>(origin_code.rows()));
        require(origin_code.cols() == dim, errc::shape_mismatch,
                "origin code dim does not match sequence dim");
        if (!passthrough.empty()) {
            require(static_cast<int>(passthrough.size()) == frame_count(), errc::shape_mismatch,
                    "passthrough frame count must be transitions + 1");
            for (const auto& f : passthrough)
                require(f.rows() == origin_code.rows() && f.cols() == origin_code.cols(),
                        errc::shape_mismatch, "passthrough frames must match the origin shape");
        }
    }
};

// What to do with layers outside the layer range when integrating:
// replay the original per-frame codes (default, keeps appearance dynamics)
// or freeze them at the origin code.
enum class FinePolicy { replay, freeze };

namespace detail {

inline Eigen::Map<const Eigen::VectorXd> flatten_slice(const Code& code, const LayerRange& lr) {
    return {code.data() + static_cast<std::ptrdiff_t>(lr.start) * code.cols(),
            static_cast<Eigen::Index>(lr.count) * code.cols()};
}

inline void write_slice(Code& code, const LayerRange& lr, const Eigen::VectorXd& flat) {
    Eigen::Map<Eigen::VectorXd>(code.data() + static_cast<std::ptrdiff_t>(lr.start) * code.cols(),
                                flat.size()) = flat;
}

}  // namespace detail

// d_t = w_{t+1} - w_t on the flattened layer slice, for t = 0..T-2.
inline TransitionSequence compute_transitions(const LatentTrajectory& traj, LayerRange layer_range) {
    traj.validate();
    layer_range.check_within(traj.layers());

    TransitionSequence ts;
    ts.layer_range = layer_range;
    ts.dim = traj.dim();
    ts.origin_code = traj.frames.front();
    ts.passthrough = traj.frames;

    const int t_count = traj.frame_count() - 1;
    ts.transitions.resize(t_count, ts.d_sub());
    for (int t = 0; t < t_count; ++t) {
        ts.transitions.row(t) = (detail::flatten_slice(traj.frames[t + 1], layer_range) -
                                 detail::flatten_slice(traj.frames[t], layer_range))
                                    .transpose();
    }
    return ts;
}

// Rebuild a trajectory: frame 0 is the origin code, frame t's layer slice is
// slice(w_0) + sum of the first t transitions. Layers outside the range come
// from the passthrough frames (replay) or stay at the origin code (freeze).
// With no passthrough recorded, freeze is the only option and is used.
inline LatentTrajectory integrate(const TransitionSequence& ts,
                                  FinePolicy fine = FinePolicy::replay) {
    ts.validate();

    const bool replay = fine == FinePolicy::replay && !ts.passthrough.empty();
    const int frames = ts.frame_count();

    LatentTrajectory out;
    out.frames.reserve(frames);

    Eigen::VectorXd slice = detail::flatten_slice(ts.origin_code, ts.layer_range);
    for (int t = 0; t < frames; ++t) {
        if (t > 0) slice += ts.transitions.row(t - 1).transpose();
        Code frame = replay ? ts.passthrough[t] : ts.origin_code;
        detail::write_slice(frame, ts.layer_range, slice);
        out.frames.push_back(std::move(frame));
    }
    return out;
}

// Multiply every transition by alpha; metadata untouched. alpha = 0 makes a
// static video, alpha > 1 exaggerates the motion.
inline TransitionSequence scale_transitions(const TransitionSequence& ts, double alpha) {
    ts.validate();
    require(std::isfinite(alpha), errc::non_finite_input, "alpha must be finite");
    TransitionSequence out = ts;
    out.transitions *= alpha;
    return out;
}

}  // namespace lm
