#pragma once

#include <cstdint>
#include <random>

#include "dua/matrix.hpp"

namespace dua {

/// Seeded random source. All randomness in the library flows through this
/// type; equal seeds give identical draw sequences. The normal transform is
/// implemented explicitly (Box-Muller) instead of std::normal_distribution,
/// whose output sequence is not pinned down by the standard.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform double in [0, 1).
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1p-53; }

    /// Uniform integer in [0, n).
    std::size_t uniform_index(std::size_t n);

    /// Standard normal draw.
    double normal();

    /// Matrix of i.i.d. standard normal entries, drawn row-major.
    Matrix gaussian(std::size_t rows, std::size_t cols);

    /// Stateless mix of a seed and a salt, for carving independent streams
    /// (per view, per restart, per sweep cell) out of one experiment seed.
    static std::uint64_t derive(std::uint64_t seed, std::uint64_t salt);

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace dua
