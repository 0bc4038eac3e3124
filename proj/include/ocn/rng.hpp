#ifndef OCN_RNG_HPP
#define OCN_RNG_HPP

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>

namespace ocn {

// splitmix64 finalizer; used to decorrelate seed streams.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Disjoint seed stream i derived from a master seed: mix64(master ^ mix64(i)).
inline std::uint64_t split_seed(std::uint64_t master, std::uint64_t i) {
    return mix64(master ^ mix64(i));
}

// Deterministic generator with explicit uniform/gaussian draws. All variate
// code is written out here so results do not depend on the standard
// library's distribution implementations.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : gen_(mix64(seed)) {}

    // Uniform on [0, 1) with 53 random bits.
    double uniform() {
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }

    std::uint64_t next_u64() { return gen_(); }

    // Standard normal via Box-Muller (spare value cached).
    double gaussian() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        double u2 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * M_PI * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

    // Circularly-symmetric complex gaussian with total variance var
    // (var/2 per real dimension).
    std::complex<double> cgaussian(double var) {
        const double s = std::sqrt(var / 2.0);
        return {s * gaussian(), s * gaussian()};
    }

    // normal(0,1) truncated to [-2, 2] by re-drawing.
    double truncated_gaussian2() {
        double v = gaussian();
        while (v < -2.0 || v > 2.0) v = gaussian();
        return v;
    }

  private:
    std::mt19937_64 gen_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace ocn

#endif  // OCN_RNG_HPP
