#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace scout {

// Deterministic RNG wrapper. All draws go through hand-rolled conversions so
// results do not depend on the standard library's distribution internals.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    // Independent stream for a named role, derived from a base seed.
    static Rng stream(std::uint64_t seed, std::uint64_t role) {
        // splitmix64 over (seed, role) so nearby seeds decorrelate
        std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (role + 1);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return Rng(z ^ (z >> 31));
    }

    std::uint64_t next_u64() { return gen_(); }

    // uniform in [0, 1)
    double uniform() { return (next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // uniform integer in [0, n)
    int uniform_int(int n) {
        // floor(u*n); clamp guards the u -> 1 edge
        int k = static_cast<int>(uniform() * n);
        return k < n ? k : n - 1;
    }

    // standard normal via Box-Muller (two uniform draws per call, no caching,
    // so the draw count per call is fixed)
    double normal() {
        double u1 = uniform();
        double u2 = uniform();
        if (u1 < 1e-300) u1 = 1e-300;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (int i = static_cast<int>(v.size()) - 1; i > 0; --i) {
            int j = uniform_int(i + 1);
            std::swap(v[i], v[j]);
        }
    }

    // random permutation of [0, n)
    std::vector<int> permutation(int n) {
        std::vector<int> p(n);
        for (int i = 0; i < n; ++i) p[i] = i;
        shuffle(p);
        return p;
    }

  private:
    std::mt19937_64 gen_;
};

}  // namespace scout
