#include "dua/rng.hpp"

#include <cmath>

#include "dua/errors.hpp"

namespace dua {

std::size_t Rng::uniform_index(std::size_t n) {
    if (n == 0) throw ConfigError("uniform_index: n must be positive");
    // Rejection sampling to avoid modulo bias.
    const std::uint64_t bound = n;
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t x;
    do {
        x = next_u64();
    } while (x >= limit);
    return static_cast<std::size_t>(x % bound);
}

double Rng::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    // u1 in (0, 1] keeps the log finite.
    const double u1 = (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1p-53;
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * M_PI * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
}

Matrix Rng::gaussian(std::size_t rows, std::size_t cols) {
    if (rows == 0 || cols == 0) throw ConfigError("gaussian: dimensions must be positive");
    Matrix out(rows, cols);
    for (auto& x : out.values()) x = normal();
    return out;
}

std::uint64_t Rng::derive(std::uint64_t seed, std::uint64_t salt) {
    // splitmix64 finalizer over the combined state.
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace dua
