#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>
#include <functional>

namespace linn {

// Raised when inputs violate a documented contract (shape mismatch,
// out-of-range argument, malformed config).
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Raised on malformed or unreadable files.
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

// Raised when an internal invariant breaks; indicates a bug, not bad input.
class InternalError : public std::runtime_error {
public:
    explicit InternalError(const std::string& msg) : std::runtime_error(msg) {}
};

// Deterministic PRNG (splitmix64). Self-contained so that seeded runs are
// byte-identical across standard library implementations.
class Rng {
public:
    explicit Rng(uint64_t seed = 0) : state_(seed) {}

    uint64_t next_u64() {
        uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // uniform in [0, 1)
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) {
        return lo + (hi - lo) * uniform();
    }

    // standard normal via Box-Muller (fixed draw order)
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        double u2 = uniform();
        while (u1 <= 1e-300) u1 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    int64_t below(int64_t n) {  // uniform integer in [0, n)
        return static_cast<int64_t>(next_u64() % static_cast<uint64_t>(n));
    }

    // Independent child stream, detached from this one's sequence.
    Rng fork(uint64_t stream) {
        Rng child(state_ ^ (0x6a09e667f3bcc909ULL + stream * 0x9e3779b97f4a7c15ULL));
        child.next_u64();
        return child;
    }

    template <typename It>
    void shuffle(It first, It last) {
        auto n = last - first;
        for (auto i = n - 1; i > 0; --i) {
            std::swap(first[i], first[below(i + 1)]);
        }
    }

private:
    uint64_t state_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

// Worker count for parallel sections. 0 = serial. All parallel loops in this
// codebase partition work into disjoint output ranges with a fixed schedule,
// so results are bit-identical for any thread count.
int  thread_count();
void set_thread_count(int n);

// Keep multi-megabyte activation buffers inside the malloc arena instead of
// round-tripping through mmap on every allocation. Call once per process
// before heavy numeric work; harmless where unsupported.
void tune_allocator();

// Runs fn(begin, end) over [0, n) split into contiguous blocks.
void parallel_for(int64_t n, const std::function<void(int64_t, int64_t)>& fn);

}  // namespace linn
