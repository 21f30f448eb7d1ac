// common.hpp
//
// Shared plumbing for the expsum-lab headers: complex alias, error types,
// compensated (Kahan) accumulators, a deterministic parallel map, and a
// portable seedable RNG.
//
// Determinism contract: every parallel helper here assigns work by index
// and stores results by index, so the output of a run depends only on the
// inputs (and, where shard geometry is input-derived, not even on the
// thread count).  The RNG derives all variates from the raw 64-bit output
// of std::mt19937_64; std::*_distribution is never used because its output
// is implementation-defined.

#pragma once

#include <array>
#include <atomic>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace expsum {

using i64 = std::int64_t;
using u64 = std::uint64_t;
using i128 = __int128_t;
using cplx = std::complex<double>;

using vec4 = std::array<double, 4>;
using ivec4 = std::array<i64, 4>;
using vec3 = std::array<double, 3>;

inline constexpr double kPi = 3.141592653589793238462643383279502884;
inline constexpr double kTwoPi = 2.0 * kPi;

// ---------------------------------------------------------------------------
// Error taxonomy.  computation_error covers failures of a numerical
// procedure on valid inputs (the CLI maps these to exit code 3); argument
// and precondition violations use std::invalid_argument / std::domain_error
// (exit code 2).
// ---------------------------------------------------------------------------

struct computation_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct not_stabilized : computation_error {
    explicit not_stabilized(const std::string& what) : computation_error(what) {}
};

struct non_convergence : computation_error {
    explicit non_convergence(const std::string& what) : computation_error(what) {}
};

struct empty_sphere : computation_error {
    explicit empty_sphere(const std::string& what) : computation_error(what) {}
};

struct insufficient_data : computation_error {
    explicit insufficient_data(const std::string& what) : computation_error(what) {}
};

struct resource_limit : computation_error {
    explicit resource_limit(const std::string& what) : computation_error(what) {}
};

// ---------------------------------------------------------------------------
// Compensated summation
// ---------------------------------------------------------------------------

class kahan_sum {
  public:
    void add(double x) {
        const double y = x - comp_;
        const double t = sum_ + y;
        comp_ = (t - sum_) - y;
        sum_ = t;
    }
    double value() const { return sum_; }

  private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

class kahan_csum {
  public:
    void add(cplx z) {
        re_.add(z.real());
        im_.add(z.imag());
    }
    cplx value() const { return {re_.value(), im_.value()}; }

  private:
    kahan_sum re_, im_;
};

// ---------------------------------------------------------------------------
// Threading
// ---------------------------------------------------------------------------

// Worker count: explicit request > EXPSUM_LAB_THREADS > hardware.
inline int resolve_threads(int requested = 0) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("EXPSUM_LAB_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v > 0) return static_cast<int>(v);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

// Evaluates fn(i) for i in [0, count) on up to `threads` workers and returns
// the results in index order.  fn must not touch shared mutable state.  The
// first exception thrown by any worker is rethrown on the calling thread.
template <class T, class Fn>
std::vector<T> parallel_map(std::size_t count, int threads, Fn&& fn) {
    std::vector<T> out(count);
    const int workers = std::min<std::size_t>(std::max(threads, 1), count);
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) out[i] = fn(i);
        return out;
    }
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= count || failed.load()) return;
                try {
                    out[i] = fn(i);
                } catch (...) {
                    const std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error) error = std::current_exception();
                    failed.store(true);
                    return;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
    return out;
}

// ---------------------------------------------------------------------------
// Portable seedable RNG.  Variates are built from raw mt19937_64 words so
// two platforms with the same seed produce bit-identical streams.
// ---------------------------------------------------------------------------

class rng64 {
  public:
    explicit rng64(u64 seed) : eng_(seed) {}

    // uniform in [0, 1) with 53 significant bits
    double uniform01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    // standard normal via Box-Muller (pair cached)
    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform01();
        while (u1 <= 0.0) u1 = uniform01();
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        spare_ = r * std::sin(kTwoPi * u2);
        have_spare_ = true;
        return r * std::cos(kTwoPi * u2);
    }

    // uniform direction on S^3 (normalized 4-dim Gaussian draw)
    vec4 unit4() {
        for (;;) {
            vec4 g{gaussian(), gaussian(), gaussian(), gaussian()};
            const double n = std::sqrt(g[0] * g[0] + g[1] * g[1] + g[2] * g[2] + g[3] * g[3]);
            if (n > 1e-12) {
                for (double& x : g) x /= n;
                return g;
            }
        }
    }

  private:
    std::mt19937_64 eng_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

// ---------------------------------------------------------------------------
// Small vector helpers
// ---------------------------------------------------------------------------

inline double dot(const vec4& a, const vec4& b) {
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + a[3] * b[3];
}

inline double norm(const vec4& a) { return std::sqrt(dot(a, a)); }

inline vec4 normalized(const vec4& a) {
    const double n = norm(a);
    if (n <= 0.0) throw std::invalid_argument("cannot normalize the zero vector");
    return {a[0] / n, a[1] / n, a[2] / n, a[3] / n};
}

inline bool is_unit(const vec4& a, double tol = 1e-9) { return std::abs(norm(a) - 1.0) <= tol; }

// e(x) = exp(2 pi i x)
inline cplx unit_phase(double x) { return std::polar(1.0, kTwoPi * x); }

}  // namespace expsum
