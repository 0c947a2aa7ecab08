#ifndef UDGP_RNG_HPP
#define UDGP_RNG_HPP

#include <cmath>
#include <cstdint>

namespace udgp {

// Repo-wide deterministic random source: a 64-bit counter generator
// (splitmix64). Every randomized component takes one of these, seeded
// explicitly, so runs are reproducible across platforms and stdlibs.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // Child generator for stream k; streams derived from the same parent
    // state are independent of the order they are consumed in.
    Rng derive(std::uint64_t k) const {
        Rng mix(state_ ^ (0xD1B54A32D192ED03ULL * (k + 1)));
        mix.next_u64();
        return Rng(mix.next_u64());
    }

    // Uniform in [0, 1).
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // Uniform in {0, 1, ..., n-1}.
    std::uint64_t below(std::uint64_t n) { return next_u64() % n; }

    // Standard normal via Box-Muller; one cached spare per pair.
    double normal01() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform01();
        double u2 = uniform01();
        while (u1 <= 0.0) u1 = uniform01();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * M_PI * u2;
        spare_ = radius * std::sin(angle);
        have_spare_ = true;
        return radius * std::cos(angle);
    }

    double normal(double stddev) { return stddev * normal01(); }

  private:
    std::uint64_t state_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace udgp

#endif
