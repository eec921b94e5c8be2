#ifndef AHM_SMALLVEC_HPP
#define AHM_SMALLVEC_HPP

#include <cmath>
#include <span>
#include <vector>

namespace ahm {

using Vec = std::vector<double>;

template <class T>
T dot(std::span<const T> a, std::span<const T> b) {
    T s{};
    for (std::size_t i = 0; i < a.size(); ++i)
        s += a[i] * b[i];
    return s;
}

template <class T>
T norm_sq(std::span<const T> a) {
    return dot(a, a);
}

inline double norm(std::span<const double> a) {
    return std::sqrt(norm_sq(a));
}

inline double dist(std::span<const double> a, std::span<const double> b) {
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double d = a[i] - b[i];
        s += d * d;
    }
    return std::sqrt(s);
}

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
    double m = 0;
    for (std::size_t i = 0; i < a.size(); ++i)
        m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

}  // namespace ahm

#endif
