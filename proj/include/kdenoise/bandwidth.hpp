#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>

namespace kdn {

namespace detail {
inline long isqrt_floor(long x) {
    if (x < 0) return -1;
    long s = static_cast<long>(std::sqrt(static_cast<double>(x)));
    while (s > 0 && s * s > x) --s;
    while ((s + 1) * (s + 1) <= x) ++s;
    return s;
}
} // namespace detail

// Number of integer lattice points in the closed disk of squared radius r2.
inline long lattice_points_in_disk(long r2) {
    if (r2 < 0) return 0;
    long count = 0;
    const long a_max = detail::isqrt_floor(r2);
    for (long a = -a_max; a <= a_max; ++a)
        count += 2 * detail::isqrt_floor(r2 - a * a) + 1;
    return count;
}

// Smallest squared radius whose disk contains at least eta^2 lattice points.
// The minimum is always attained with an integer squared radius.
inline long min_radius_squared(int eta) {
    if (eta < 2)
        throw std::invalid_argument("min_radius_squared: eta must be at least 2");
    const long target = static_cast<long>(eta) * static_cast<long>(eta);
    for (long r2 = 0;; ++r2) {
        if (lattice_points_in_disk(r2) >= target) return r2;
    }
}

// Neighborhood radius in lattice units for a given neighbor-count selector.
inline double min_radius(int eta) {
    return std::sqrt(static_cast<double>(min_radius_squared(eta)));
}

// A chosen Gaussian bandwidth together with its defining radius.
struct BandwidthSelection {
    int eta = 0;
    double lattice_radius = 0.0; // disk radius on the pixel lattice
    double radius = 0.0;         // same radius in physical units
    double delta = 0.0;          // Gaussian bandwidth (squared-length units)
    double eps_zero = 0.0;
    double pixel_spacing = 0.0;
};

// Picks delta so that the Gaussian kernel decays to exactly eps_zero at the
// physical distance R*h, where R is the lattice radius enclosing eta^2
// points and h the pixel spacing. The division rounds, so the result is
// nudged by ulps to whichever representable delta lands the kernel value
// closest to eps_zero.
inline double select_bandwidth(int eta, double pixel_spacing, double eps_zero) {
    if (eta < 2)
        throw std::invalid_argument("select_bandwidth: eta must be at least 2");
    if (!(pixel_spacing > 0.0))
        throw std::invalid_argument("select_bandwidth: pixel spacing must be positive");
    if (!(eps_zero > 0.0) || !(eps_zero < 1.0))
        throw std::invalid_argument("select_bandwidth: eps_zero must lie in (0,1)");
    const double r = min_radius(eta) * pixel_spacing;
    const double r2 = r * r;
    const long double target = -std::log(static_cast<long double>(eps_zero));
    double best = static_cast<double>(static_cast<long double>(r2) / target);
    double best_gap = std::abs(std::exp(-r2 / best) - eps_zero);
    for (int dir : {-1, 1}) {
        double cand = best;
        for (int step = 0; step < 2; ++step) {
            cand = std::nextafter(cand, dir > 0 ? std::numeric_limits<double>::infinity()
                                                : -std::numeric_limits<double>::infinity());
            const double gap = std::abs(std::exp(-r2 / cand) - eps_zero);
            if (gap < best_gap) {
                best = cand;
                best_gap = gap;
            }
        }
    }
    return best;
}

inline BandwidthSelection make_bandwidth_selection(int eta, double pixel_spacing,
                                                   double eps_zero) {
    BandwidthSelection sel;
    sel.eta = eta;
    sel.delta = select_bandwidth(eta, pixel_spacing, eps_zero);
    sel.lattice_radius = min_radius(eta);
    sel.radius = sel.lattice_radius * pixel_spacing;
    sel.eps_zero = eps_zero;
    sel.pixel_spacing = pixel_spacing;
    return sel;
}

} // namespace kdn
