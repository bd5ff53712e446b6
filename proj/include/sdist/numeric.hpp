#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <exception>
#include <span>
#include <thread>
#include <vector>

namespace sdist {

/// Neumaier-compensated accumulator. Results depend only on the order of
/// additions, so callers feed values in a fixed key order.
class CompensatedSum {
public:
    CompensatedSum& operator+=(double x) noexcept {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x)) {
            carry_ += (sum_ - t) + x;
        } else {
            carry_ += (x - t) + sum_;
        }
        sum_ = t;
        return *this;
    }

    [[nodiscard]] double value() const noexcept { return sum_ + carry_; }

private:
    double sum_ = 0.0;
    double carry_ = 0.0;
};

inline double compensated_sum(std::span<const double> xs) noexcept {
    CompensatedSum acc;
    for (double x : xs) acc += x;
    return acc.value();
}

/// Employment-weighted mean and least-squares slope of y on x.
struct WeightedFit {
    double mean_x = 0.0;
    double mean_y = 0.0;
    double var_x = 0.0;
    double cov_xy = 0.0;
    double total_weight = 0.0;

    [[nodiscard]] double slope() const noexcept { return cov_xy / var_x; }
};

inline WeightedFit weighted_fit(std::span<const double> x, std::span<const double> y,
                                std::span<const double> w) noexcept {
    WeightedFit fit;
    CompensatedSum sw, swx, swy;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sw += w[i];
        swx += w[i] * x[i];
        swy += w[i] * y[i];
    }
    fit.total_weight = sw.value();
    if (fit.total_weight <= 0.0) return fit;
    fit.mean_x = swx.value() / fit.total_weight;
    fit.mean_y = swy.value() / fit.total_weight;
    CompensatedSum sxx, sxy;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - fit.mean_x;
        sxx += w[i] * dx * dx;
        sxy += w[i] * dx * (y[i] - fit.mean_y);
    }
    fit.var_x = sxx.value() / fit.total_weight;
    fit.cov_xy = sxy.value() / fit.total_weight;
    return fit;
}

/// Runs fn(i) for i in [0, n) on up to `threads` workers over contiguous
/// blocks. fn must only write to slot i of its output.
template <class Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
    threads = std::max(1u, threads);
    if (threads == 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    const std::size_t workers = std::min<std::size_t>(threads, n);
    const std::size_t block = (n + workers - 1) / workers;
    std::vector<std::exception_ptr> failures(workers);
    {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) {
            const std::size_t begin = w * block;
            const std::size_t end = std::min(n, begin + block);
            if (begin >= end) break;
            pool.emplace_back([&fn, &failures, w, begin, end] {
                try {
                    for (std::size_t i = begin; i < end; ++i) fn(i);
                } catch (...) {
                    failures[w] = std::current_exception();
                }
            });
        }
    }
    for (const auto& f : failures) {
        if (f) std::rethrow_exception(f);
    }
}

}  // namespace sdist
