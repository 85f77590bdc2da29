#pragma once

#include <stdexcept>
#include <string>

namespace lm {

// Typed failure reasons. Every error the library raises carries one of
// these codes so callers (and the CLI) can map failures to exit classes.
enum class errc {
    // validation
    layer_range_out_of_bounds,
    non_finite_input,
    shape_mismatch,
    length_mismatch,
    insufficient_samples,
    k_too_large,
    too_few_frames,
    index_out_of_range,
    dims_exceed_ambient,
    invalid_argument,
    // numerical
    numerical_failure,
    degenerate_configuration,
    // i/o
    bad_magic,
    unsupported_version,
    truncated_payload,
    non_finite_payload,
    orthonormality_violation,
    inconsistent_point_count,
    io_failure,
};

enum class error_class { validation, numerical, io };

constexpr error_class classify(errc c) {
    switch (c) {
        case errc::numerical_failure:
        case errc::degenerate_configuration:
            return error_class::numerical;
        case errc::bad_magic:
        case errc::unsupported_version:
        case errc::truncated_payload:
        case errc::non_finite_payload:
        case errc::orthonormality_violation:
        case errc::inconsistent_point_count:
        case errc::io_failure:
            return error_class::io;
        default:
            return error_class::validation;
    }
}

constexpr const char* to_string(errc c) {
    switch (c) {
        case errc::layer_range_out_of_bounds: return "LayerRangeOutOfBounds";
        case errc::non_finite_input: return "NonFiniteInput";
        case errc::shape_mismatch: return "ShapeMismatch";
        case errc::length_mismatch: return "LengthMismatch";
        case errc::insufficient_samples: return "InsufficientSamples";
        case errc::k_too_large: return "KTooLarge";
        case errc::too_few_frames: return "TooFewFrames";
        case errc::index_out_of_range: return "IndexOutOfRange";
        case errc::dims_exceed_ambient: return "DimsExceedAmbient";
        case errc::invalid_argument: return "InvalidArgument";
        case errc::numerical_failure: return "NumericalFailure";
        case errc::degenerate_configuration: return "DegenerateConfiguration";
        case errc::bad_magic: return "BadMagic";
        case errc::unsupported_version: return "UnsupportedVersion";
        case errc::truncated_payload: return "TruncatedPayload";
        case errc::non_finite_payload: return "NonFinitePayload";
        case errc::orthonormality_violation: return "OrthonormalityViolation";
        case errc::inconsistent_point_count: return "InconsistentPointCount";
        case errc::io_failure: return "IoFailure";
    }
    return "UnknownError";
}

class Error : public std::runtime_error {
  public:
    Error(errc code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    errc code() const noexcept { return code_; }
    error_class klass() const noexcept { return classify(code_); }

  private:
    errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& what) { throw Error(code, what); }

inline void require(bool ok, errc code, const std::string& what) {
    if (!ok) fail(code, what);
}

}  // namespace lm
