#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <random>

namespace pairex {

// Portable normal deviates: std::normal_distribution is implementation-defined, so the
// Box-Muller transform is spelled out to keep seeded runs identical across toolchains.
class Normal {
public:
    template <class Rng>
    double operator()(Rng& rng) {
        if (have_) {
            have_ = false;
            return spare_;
        }
        double u1, u2;
        do {
            u1 = uniform(rng);
        } while (u1 <= 0.0);
        u2 = uniform(rng);
        double rad = std::sqrt(-2.0 * std::log(u1));
        spare_ = rad * std::sin(2.0 * 3.14159265358979323846 * u2);
        have_ = true;
        return rad * std::cos(2.0 * 3.14159265358979323846 * u2);
    }

    template <class Rng>
    static double uniform(Rng& rng) {
        return double(rng() >> 11) * (1.0 / 9007199254740992.0);
    }

private:
    bool have_ = false;
    double spare_ = 0.0;
};

template <class Rng>
Eigen::MatrixXcd random_complex_matrix(Eigen::Index r, Eigen::Index c, Rng& rng) {
    Normal nd;
    Eigen::MatrixXcd a(r, c);
    for (Eigen::Index j = 0; j < c; ++j)
        for (Eigen::Index i = 0; i < r; ++i) {
            double re = nd(rng);
            double im = nd(rng);
            a(i, j) = {re, im};
        }
    return a;
}

template <class Rng>
Eigen::VectorXcd random_complex_vector(Eigen::Index n, Rng& rng) {
    return random_complex_matrix(n, 1, rng).col(0);
}

using Rng64 = std::mt19937_64;

}  // namespace pairex
