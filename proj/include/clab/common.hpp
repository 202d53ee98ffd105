// SPDX-License-Identifier: Apache-2.0
#ifndef CLAB_COMMON_HPP
#define CLAB_COMMON_HPP

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <cstring>
#include <initializer_list>
#include <random>
#include <string_view>
#include <vector>

namespace clab {

// 64-bit floats everywhere. Row-major matrices so flat buffers serialize
// in row-major order without copies.
using Scalar = double;
using Index = Eigen::Index;
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
using RowVec = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;
using MatMap = Eigen::Map<Mat>;
using ConstMatMap = Eigen::Map<const Mat>;

//==============================================================================
// Seed derivation
//==============================================================================

inline std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t fnv1a(std::string_view s)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::uint64_t double_bits(double d)
{
    std::uint64_t u;
    static_assert(sizeof(u) == sizeof(d));
    std::memcpy(&u, &d, sizeof(u));
    return u;
}

// Chains splitmix over the parts so every (master, tag, indices...) pair maps
// to an independent stream. Used for all derived seeds in the project.
inline std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> parts)
{
    std::uint64_t state = splitmix64(master);
    for (std::uint64_t p : parts) state = splitmix64(state ^ p);
    return state;
}

inline std::uint64_t derive_seed(std::uint64_t master, std::string_view tag)
{
    return derive_seed(master, {fnv1a(tag)});
}

inline std::uint64_t derive_seed(std::uint64_t master, std::string_view tag, std::uint64_t a)
{
    return derive_seed(master, {fnv1a(tag), a});
}

inline std::uint64_t derive_seed(std::uint64_t master, std::string_view tag, std::uint64_t a,
                                 std::uint64_t b)
{
    return derive_seed(master, {fnv1a(tag), a, b});
}

//==============================================================================
// Rng: mt19937_64 with self-contained distributions
//==============================================================================

// std::uniform_real_distribution et al. are implementation-defined; rolling the
// value derivations keeps trajectories identical across standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t next_u64() { return eng_(); }

    /// Uniform in [0, 1).
    Scalar uniform() { return static_cast<Scalar>(next_u64() >> 11) * 0x1.0p-53; }

    Scalar uniform(Scalar lo, Scalar hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n). n must be positive.
    std::size_t uniform_index(std::size_t n)
    {
        // Lemire's multiply-shift; bias is negligible for our n and the map is
        // a pure function of the engine output.
        return static_cast<std::size_t>(
            (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

    /// Standard normal via Box-Muller.
    Scalar normal()
    {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        Scalar u1 = uniform();
        if (u1 < 0x1.0p-53) u1 = 0x1.0p-53;
        const Scalar u2 = uniform();
        const Scalar r = std::sqrt(-2.0 * std::log(u1));
        const Scalar theta = 2.0 * M_PI * u2;
        spare_ = r * std::sin(theta);
        have_spare_ = true;
        return r * std::cos(theta);
    }

    /// Fisher-Yates shuffle.
    template <class T>
    void shuffle(std::vector<T>& v)
    {
        for (std::size_t i = v.size(); i > 1; --i) {
            const std::size_t j = uniform_index(i);
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::mt19937_64 eng_;
    bool have_spare_ = false;
    Scalar spare_ = 0.0;
};

} // namespace clab

#endif // CLAB_COMMON_HPP
