#include "infers/curvefit.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <vector>

#include <boost/math/tools/minima.hpp>

#include "infers/error.hpp"

namespace infers {

namespace {

struct Linear {
    double a = 0.0;
    double b = 0.0;
    double rss = std::numeric_limits<double>::infinity();
};

// Least squares of y on (1, exp(c x)), centred for stability.
Linear profile(std::span<const double> x, std::span<const double> y, double c)
{
    const std::size_t n = x.size();
    std::vector<double> e(n);
    for (std::size_t i = 0; i < n; ++i) e[i] = std::exp(c * x[i]);
    const double me = std::accumulate(e.begin(), e.end(), 0.0) / static_cast<double>(n);
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
    double see = 0.0, sey = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        see += (e[i] - me) * (e[i] - me);
        sey += (e[i] - me) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    Linear out;
    if (!(see > 0.0) || !std::isfinite(see)) return out;
    out.b = sey / see;
    out.a = my - out.b * me;
    double rss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = y[i] - out.a - out.b * e[i];
        rss += r * r;
    }
    out.rss = rss;
    return out;
}

}  // namespace

ExpFit exp_fit(std::span<const double> x, std::span<const double> y)
{
    const std::size_t n = x.size();
    if (n != y.size()) throw Error(ErrorCode::InvalidArgument, "x and y differ in length");
    if (n < 4) throw Error(ErrorCode::InvalidArgument, "exp_fit needs at least 4 points");
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(x[i]) || !std::isfinite(y[i])) throw Error(ErrorCode::NonFiniteInput, "non-finite point");
        if (i > 0 && !(x[i] > x[i - 1])) throw Error(ErrorCode::InvalidArgument, "x must be strictly increasing");
    }

    const double my = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
    double syy = 0.0;
    double scale = 0.0;
    for (double v : y) {
        syy += (v - my) * (v - my);
        scale = std::max(scale, std::abs(v));
    }
    const double range = x.back() - x.front();

    ExpFit flat;
    flat.a = my;
    flat.rss = syy;
    flat.ill_conditioned = true;
    if (syy <= 1e-24 * std::max(1.0, scale * scale) * static_cast<double>(n)) return flat;

    // S_k = integral of y from x_0 to x_k (trapezoid); y - y0 = A (x - x0) + c S.
    std::vector<double> s(n, 0.0);
    for (std::size_t k = 1; k < n; ++k) s[k] = s[k - 1] + 0.5 * (y[k] + y[k - 1]) * (x[k] - x[k - 1]);
    double sxx = 0.0, sxs = 0.0, sss = 0.0, sxy = 0.0, ssy = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double dx = x[k] - x[0];
        const double dy = y[k] - y[0];
        sxx += dx * dx;
        sxs += dx * s[k];
        sss += s[k] * s[k];
        sxy += dx * dy;
        ssy += s[k] * dy;
    }
    const double det = sxx * sss - sxs * sxs;
    if (!(std::abs(det) > 1e-14 * sxx * sss)) return flat;
    const double c0 = (sxx * ssy - sxs * sxy) / det;
    if (!std::isfinite(c0) || std::abs(c0) * range < 1e-9) return flat;

    const double half = 0.5 * std::abs(c0) + 1.0 / range;
    const auto objective = [&](double c) { return profile(x, y, c).rss; };
    std::uintmax_t iterations = 500;
    const auto [c, rss] = boost::math::tools::brent_find_minima(objective, c0 - half, c0 + half,
                                                                std::numeric_limits<double>::digits, iterations);
    const double best_c = objective(c0) < rss ? c0 : c;
    if (std::abs(best_c) * range < 1e-9) return flat;
    const Linear lin = profile(x, y, best_c);
    if (!std::isfinite(lin.rss) || std::abs(lin.b) <= 1e-12 * std::max(1.0, scale)) return flat;
    return ExpFit{lin.a, lin.b, best_c, lin.rss, false};
}

}  // namespace infers
