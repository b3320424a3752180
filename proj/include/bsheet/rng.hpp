#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace bsheet {

/// Philox4x32-10 block function (Salmon et al., "Parallel random numbers:
/// as easy as 1, 2, 3"). Stateless: maps (counter, key) to 128 random bits.
struct Philox4x32 {
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static constexpr std::uint32_t kMul0 = 0xD2511F53u;
    static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
    static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
    static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

    static constexpr Counter apply(Counter ctr, Key key) noexcept {
        for (int round = 0; round < 10; ++round) {
            const std::uint64_t p0 = std::uint64_t{kMul0} * ctr[0];
            const std::uint64_t p1 = std::uint64_t{kMul1} * ctr[2];
            const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
            const auto lo0 = static_cast<std::uint32_t>(p0);
            const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
            const auto lo1 = static_cast<std::uint32_t>(p1);
            ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
            key[0] += kWeyl0;
            key[1] += kWeyl1;
        }
        return ctr;
    }
};

/// Reproducibility contract for Monte Carlo runs: one master seed, one
/// substream per replication.
struct RngPolicy {
    std::uint64_t seed = 7;
};

/// Stream lanes. Sheet rows use lanes 1..kMaxSheetRow (lane == row index);
/// the remaining lanes are reserved for path-marginal sampling.
namespace lane {
inline constexpr std::uint32_t kMaxSheetRow = 0x7FFFFFFFu;
inline constexpr std::uint32_t kPathIncrement = 0x80000000u;
inline constexpr std::uint32_t kBridgeUniform = 0x80000001u;
inline constexpr std::uint32_t kAuxiliary = 0x80000002u;
}  // namespace lane

/// Sequential draws from the counter space addressed by
/// (seed, substream, lane). Two streams with the same address produce the
/// same sequence regardless of what else has been drawn, which is what makes
/// sheet extension and multi-worker runs bit-reproducible.
class CounterStream {
public:
    CounterStream(std::uint64_t seed, std::uint64_t substream, std::uint32_t lane_id) noexcept
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          lane_(lane_id),
          sub_lo_(static_cast<std::uint32_t>(substream)),
          sub_hi_(static_cast<std::uint32_t>(substream >> 32)) {}

    std::uint64_t next_u64() noexcept {
        if (used_ >= 2) refill();
        const std::uint64_t out =
            (std::uint64_t{block_[2 * used_]} << 32) | block_[2 * used_ + 1];
        ++used_;
        return out;
    }

    /// Uniform on the open interval (0, 1) with 53 random bits.
    double next_uniform() noexcept {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    /// Standard normal via Box-Muller; the second variate of each pair is cached.
    double next_normal() noexcept {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = next_uniform();
        const double u2 = next_uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(angle);
        has_spare_ = true;
        return r * std::cos(angle);
    }

    std::uint64_t blocks_used() const noexcept { return block_index_; }

private:
    void refill() noexcept {
        block_ = Philox4x32::apply({static_cast<std::uint32_t>(block_index_), lane_, sub_lo_, sub_hi_}, key_);
        ++block_index_;
        used_ = 0;
    }

    Philox4x32::Key key_;
    std::uint32_t lane_;
    std::uint32_t sub_lo_;
    std::uint32_t sub_hi_;
    std::uint64_t block_index_ = 0;
    Philox4x32::Counter block_{};
    int used_ = 2;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace bsheet
