#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace roughctrl {

// Seeded Gaussian stream. std::normal_distribution is implementation-defined,
// so Box-Muller on top of mt19937_64 keeps sampled values identical across
// standard libraries for a given seed. Copy the object to fork the stream.
class GaussStream {
public:
    explicit GaussStream(std::uint64_t seed) : eng_(seed) {}

    // uniform on (0,1), never returns 0
    double uniform() {
        const std::uint64_t r = eng_();
        return (static_cast<double>(r >> 11) + 0.5) * 0x1.0p-53;
    }

    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

private:
    std::mt19937_64 eng_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace roughctrl
