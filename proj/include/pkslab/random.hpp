#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace pkslab {

// mt19937_64 is fully specified by the standard; the distributions are not, so map bits by hand
// to keep seeded output identical across standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : g_(seed) {}
    double uniform() { return double(g_() >> 11) * 0x1.0p-53; }
    double uniform(double a, double b) { return a + (b - a) * uniform(); }
    int integer(int lo, int hi) { return lo + int(g_() % std::uint64_t(hi - lo + 1)); }
    double normal() {
        double u1 = uniform(), u2 = uniform();
        if (u1 < 1e-300) u1 = 1e-300;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }
    std::uint64_t bits() { return g_(); }

private:
    std::mt19937_64 g_;
};

}  // namespace pkslab
