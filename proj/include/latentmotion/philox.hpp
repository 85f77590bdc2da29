#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace lm {

// Philox4x32-10 counter-based generator (Salmon et al., "Parallel random
// numbers: as easy as 1, 2, 3", SC 2011). Stateless round function over a
// 128-bit counter and 64-bit key, so streams are cheap and reproducible on
// any platform.
//
// Stream assignment used throughout this library:
//   key          = user seed (64-bit)
//   counter[3:2] = stream id (64-bit), e.g. (purpose << 32) | trajectory index
//   counter[1:0] = block position within the stream
class Philox {
  public:
    using result_type = std::uint32_t;

    Philox(std::uint64_t seed, std::uint64_t stream = 0)
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          stream_{static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)} {}

    static std::array<std::uint32_t, 4> block(const std::array<std::uint32_t, 4>& counter,
                                              const std::array<std::uint32_t, 2>& key) {
        std::array<std::uint32_t, 4> x = counter;
        std::array<std::uint32_t, 2> k = key;
        for (int round = 0; round < 10; ++round) {
            if (round > 0) {
                k[0] += 0x9E3779B9u;
                k[1] += 0xBB67AE85u;
            }
            const std::uint64_t p0 = std::uint64_t(0xD2511F53u) * x[0];
            const std::uint64_t p1 = std::uint64_t(0xCD9E8D57u) * x[2];
            const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
            const auto lo0 = static_cast<std::uint32_t>(p0);
            const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
            const auto lo1 = static_cast<std::uint32_t>(p1);
            x = {hi1 ^ x[1] ^ k[0], lo1, hi0 ^ x[3] ^ k[1], lo0};
        }
        return x;
    }

    std::uint32_t next_u32() {
        if (buf_pos_ == 4) {
            buf_ = block({static_cast<std::uint32_t>(pos_), static_cast<std::uint32_t>(pos_ >> 32),
                          stream_[0], stream_[1]},
                         key_);
            ++pos_;
            buf_pos_ = 0;
        }
        return buf_[buf_pos_++];
    }

    std::uint64_t next_u64() {
        const std::uint64_t lo = next_u32();
        const std::uint64_t hi = next_u32();
        return (hi << 32) | lo;
    }

    // Uniform on [0, 1), 53-bit resolution.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform on (0, 1], safe as a log() argument.
    double uniform01_open_low() { return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // Standard normal via Box-Muller; pairs are cached.
    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = uniform01_open_low();
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    // Student-t with integer dof: z / sqrt(chi2_nu / nu).
    double student_t(int nu) {
        const double z = gaussian();
        double chi2 = 0.0;
        for (int i = 0; i < nu; ++i) {
            const double g = gaussian();
            chi2 += g * g;
        }
        return z / std::sqrt(chi2 / static_cast<double>(nu));
    }

    // min/max make the engine usable with <random> adaptors if ever needed.
    static constexpr std::uint32_t min() { return 0; }
    static constexpr std::uint32_t max() { return 0xFFFFFFFFu; }

  private:
    std::array<std::uint32_t, 2> key_;
    std::array<std::uint32_t, 2> stream_;
    std::uint64_t pos_ = 0;
    std::array<std::uint32_t, 4> buf_{};
    int buf_pos_ = 4;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

// Stream id helper: purpose tag in the high word, item index in the low word.
constexpr std::uint64_t philox_stream(std::uint32_t purpose, std::uint32_t index) {
    return (std::uint64_t(purpose) << 32) | index;
}

}  // namespace lm
