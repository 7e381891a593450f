#pragma once

#include <span>

namespace infers {

// y(x) = a + b exp(c x)
struct ExpFit {
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;
    double rss = 0.0;
    bool ill_conditioned = false;  // c not identifiable; a = mean(y), b = c = 0
};

// Integral linearization gives c, a and b follow by linear least squares on
// (1, exp(c x)); c is then polished by a bracketed one-dimensional search of
// the residual sum with a and b profiled out.  Needs at least 4 points with x
// strictly increasing, otherwise InvalidArgument.
ExpFit exp_fit(std::span<const double> x, std::span<const double> y);

}  // namespace infers
