#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace clk {

/// Physical point in millimetres.
struct PointMM {
    double x = 0.0, y = 0.0, z = 0.0;
};

/// Integer voxel coordinate, x fastest in memory.
struct VoxelIndex {
    int x = 0, y = 0, z = 0;
};

inline bool operator==(const VoxelIndex& a, const VoxelIndex& b) {
    return a.x == b.x && a.y == b.y && a.z == b.z;
}

inline PointMM operator-(const PointMM& a, const PointMM& b) {
    return {a.x - b.x, a.y - b.y, a.z - b.z};
}

inline PointMM operator+(const PointMM& a, const PointMM& b) {
    return {a.x + b.x, a.y + b.y, a.z + b.z};
}

inline PointMM operator*(double s, const PointMM& p) {
    return {s * p.x, s * p.y, s * p.z};
}

inline double dot(const PointMM& a, const PointMM& b) {
    return a.x * b.x + a.y * b.y + a.z * b.z;
}

inline double norm(const PointMM& p) { return std::sqrt(dot(p, p)); }

inline double distance(const PointMM& a, const PointMM& b) { return norm(a - b); }

class ClkError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad command line / config input; maps to exit code 2 in the CLI.
class UsageError : public ClkError {
public:
    using ClkError::ClkError;
};

/// Compensated (Kahan) accumulator. Used where sums feed tight invariants.
struct KahanSum {
    double sum = 0.0;
    double carry = 0.0;
    void add(double v) {
        double y = v - carry;
        double t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
    double value() const { return sum; }
};

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Hand-rolled xoshiro256** generator so streams are identical on every
/// platform and standard library.
class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& w : s_) w = splitmix64(sm);
    }

    std::uint64_t next() {
        auto rotl = [](std::uint64_t v, int k) { return (v << k) | (v >> (64 - k)); };
        std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
        std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    /// Uniform in [0, 1).
    double uniform() { return double(next() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) { return next() % n; }

    /// Standard normal via Box-Muller.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = 0.0;
        while (u1 <= 1e-300) u1 = uniform();
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        spare_ = r * std::sin(2.0 * M_PI * u2);
        have_spare_ = true;
        return r * std::cos(2.0 * M_PI * u2);
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = below(i);
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::array<std::uint64_t, 4> s_{};
    double spare_ = 0.0;
    bool have_spare_ = false;
};

/// Runs fn(i) for i in [0, n) on up to `threads` workers. Callers must only
/// use it for loop bodies with disjoint writes, so results do not depend on
/// the worker count.
template <typename Fn>
void parallel_for(std::size_t n, int threads, Fn&& fn) {
    if (threads <= 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::size_t workers = std::min<std::size_t>(threads, n);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            for (std::size_t i = w; i < n; i += workers) fn(i);
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace clk
