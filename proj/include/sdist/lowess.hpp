#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "sdist/error.hpp"
#include "sdist/numeric.hpp"

namespace sdist::geo {

struct WeightedPoint {
    double x = 0.0;
    double y = 0.0;
    double weight = 1.0;
};

struct CurvePoint {
    double x = 0.0;
    double y = 0.0;
};

namespace detail {

inline double tricube(double u) noexcept {
    if (u >= 1.0) return 0.0;
    const double t = 1.0 - u * u * u;
    return t * t * t;
}

}  // namespace detail

/// Weighted local-linear smoother with tricube kernel.
///
/// At each evaluation point x0 the neighbourhood is the ceil(bandwidth * n)
/// points nearest to x0 and h is the distance to the farthest of them. Point
/// i gets weight weight_i * tricube(|x_i - x0| / h); points at distance >= h
/// get none. When all neighbours sit at x0 they are weighted equally. If the
/// weighted variance of x in the window vanishes the weighted mean is used.
///
/// The curve is evaluated on `grid_points` evenly spaced points spanning
/// [min x, max x].
inline std::vector<CurvePoint> lowess_curve(std::span<const WeightedPoint> points, double bandwidth,
                                            std::size_t grid_points = 100) {
    if (points.size() < 10) {
        throw DomainError(Errc::non_positive_argument, "lowess needs at least 10 points, got " +
                                                            std::to_string(points.size()));
    }
    if (!(bandwidth > 0.0 && bandwidth <= 1.0)) {
        throw DomainError(Errc::non_positive_argument, "lowess bandwidth must lie in (0, 1]");
    }
    if (grid_points < 2) throw DomainError(Errc::non_positive_argument, "lowess grid needs at least 2 points");
    for (const auto& p : points) {
        if (!std::isfinite(p.x) || !std::isfinite(p.y) || !(p.weight >= 0.0)) {
            throw DomainError(Errc::non_positive_argument, "lowess points must be finite with non-negative weight");
        }
    }

    std::vector<WeightedPoint> sorted(points.begin(), points.end());
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const WeightedPoint& a, const WeightedPoint& b) { return a.x < b.x; });
    const std::size_t n = sorted.size();
    const auto span = std::min(n, std::max<std::size_t>(2, static_cast<std::size_t>(std::ceil(bandwidth * n))));
    const double lo = sorted.front().x;
    const double hi = sorted.back().x;
    const double range = hi - lo;

    std::vector<CurvePoint> curve(grid_points);
    std::vector<double> w(n);
    for (std::size_t g = 0; g < grid_points; ++g) {
        const double x0 =
            g + 1 == grid_points ? hi : lo + range * static_cast<double>(g) / static_cast<double>(grid_points - 1);

        // Grow the window [left, right) of nearest points outward from x0.
        std::size_t right = static_cast<std::size_t>(
            std::lower_bound(sorted.begin(), sorted.end(), x0,
                             [](const WeightedPoint& p, double v) { return p.x < v; }) -
            sorted.begin());
        std::size_t left = right;
        while (right - left < span) {
            if (left == 0) {
                ++right;
            } else if (right == n) {
                --left;
            } else if (x0 - sorted[left - 1].x <= sorted[right].x - x0) {
                --left;
            } else {
                ++right;
            }
        }
        const double h = std::max(x0 - sorted[left].x, sorted[right - 1].x - x0);
        if (h == 0.0) {
            while (left > 0 && sorted[left - 1].x == x0) --left;
            while (right < n && sorted[right].x == x0) ++right;
        }

        // Points just outside the window at distance h carry zero weight, so
        // only the window contributes.
        CompensatedSum sw, swx, swy;
        for (std::size_t i = left; i < right; ++i) {
            const double d = std::abs(sorted[i].x - x0);
            w[i] = sorted[i].weight * (h > 0.0 ? detail::tricube(d / h) : 1.0);
            sw += w[i];
            swx += w[i] * sorted[i].x;
            swy += w[i] * sorted[i].y;
        }
        if (!(sw.value() > 0.0)) {
            throw DomainError(Errc::non_positive_argument, "lowess window has zero total weight");
        }
        const double mx = swx.value() / sw.value();
        const double my = swy.value() / sw.value();
        CompensatedSum sxx, sxy;
        for (std::size_t i = left; i < right; ++i) {
            const double dx = sorted[i].x - mx;
            sxx += w[i] * dx * dx;
            sxy += w[i] * dx * (sorted[i].y - my);
        }
        const double scale = std::max(h, range) * std::max(h, range);
        double fit = my;
        if (sxx.value() > 1e-12 * scale * sw.value()) {
            fit = my + sxy.value() / sxx.value() * (x0 - mx);
        }
        curve[g] = {x0, fit};
    }
    return curve;
}

}  // namespace sdist::geo
