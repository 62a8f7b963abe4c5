#include "sgn/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace sgn {

SimplexResult nelder_mead(const std::function<double(const std::vector<double>&)>& objective,
                          std::vector<double> start, const SimplexOptions& options) {
    const std::size_t n = start.size();
    auto eval = [&](const std::vector<double>& x) {
        const double v = objective(x);
        return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
    };

    std::vector<std::vector<double>> pts(n + 1, start);
    for (std::size_t i = 0; i < n; ++i) pts[i + 1][i] += options.initial_step;
    std::vector<double> f(n + 1);
    for (std::size_t i = 0; i <= n; ++i) f[i] = eval(pts[i]);

    std::vector<std::size_t> order(n + 1);
    auto diameter = [&] {
        double d = 0.0;
        for (std::size_t i = 1; i <= n; ++i)
            for (std::size_t j = 0; j < n; ++j) d = std::max(d, std::abs(pts[i][j] - pts[0][j]));
        return d;
    };
    auto affine = [&](const std::vector<double>& a, const std::vector<double>& b, double t) {
        std::vector<double> r(n);
        for (std::size_t j = 0; j < n; ++j) r[j] = a[j] + t * (b[j] - a[j]);
        return r;
    };

    SimplexResult out;
    int it = 0;
    for (; it < options.max_iterations; ++it) {
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return f[a] < f[b]; });
        {
            auto p2 = pts;
            auto f2 = f;
            for (std::size_t i = 0; i <= n; ++i) {
                pts[i] = p2[order[i]];
                f[i] = f2[order[i]];
            }
        }
        const bool flat = std::isfinite(f[n]) && f[n] - f[0] <= options.value_tolerance * std::abs(f[0]);
        if (std::isfinite(f[0]) && (diameter() < options.tolerance || flat)) {
            out.converged = true;
            break;
        }

        std::vector<double> centroid(n, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) centroid[j] += pts[i][j] / static_cast<double>(n);

        const auto reflected = affine(centroid, pts[n], -1.0);
        const double fr = eval(reflected);
        if (fr < f[0]) {
            const auto expanded = affine(centroid, pts[n], -2.0);
            const double fe = eval(expanded);
            if (fe < fr) {
                pts[n] = expanded;
                f[n] = fe;
            } else {
                pts[n] = reflected;
                f[n] = fr;
            }
            continue;
        }
        if (fr < f[n - 1]) {
            pts[n] = reflected;
            f[n] = fr;
            continue;
        }
        // Outside contraction when the reflection beat the worst point,
        // inside contraction otherwise.
        const bool outside = fr < f[n];
        const auto contracted = outside ? affine(centroid, reflected, 0.5) : affine(centroid, pts[n], 0.5);
        const double fc = eval(contracted);
        if (fc < (outside ? fr : f[n])) {
            pts[n] = contracted;
            f[n] = fc;
            continue;
        }
        for (std::size_t i = 1; i <= n; ++i) {
            pts[i] = affine(pts[0], pts[i], 0.5);
            f[i] = eval(pts[i]);
        }
    }
    const auto best = static_cast<std::size_t>(std::min_element(f.begin(), f.end()) - f.begin());
    out.x = pts[best];
    out.value = f[best];
    out.iterations = it;
    return out;
}

}  // namespace sgn
