#pragma once

#include <random>

#include "zpat/scalar.hpp"

namespace zpat::testing {

inline double uniform(std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

template <class T>
T random_scalar(std::mt19937_64& rng) {
    T x(0);
    for (int k = 0; k < field_traits<T>::real_dim; ++k) field_traits<T>::set_component(x, k, uniform(rng));
    return x;
}

/// A random element of norm one.
template <class T>
T random_unit(std::mt19937_64& rng) {
    for (;;) {
        const T x = random_scalar<T>(rng);
        const double m = magnitude_of(x);
        if (m > 0.1) return T(x / m);
    }
}

}  // namespace zpat::testing
