#pragma once

// Scalar transcription of the 21 population covariance equations of the
// six-sample model, written term by term without the propagation-matrix form
// the library uses.

#include <array>

namespace oracle {

struct Model {
    double st2;  // true variance
    double bN, bF, bE, bR, bS;
    double lN, lF, lE, lR, lS;
    double sI, sN, sF, sE, sR, sS;  // error variances
};

// Order I, N, F, E, R, S.
using Cov = std::array<std::array<double, 6>, 6>;

inline Cov covariance(const Model& m)
{
    const double t = m.st2;
    Cov c{};
    auto set = [&c](int a, int b, double v) {
        c[a][b] = v;
        c[b][a] = v;
    };
    enum { I, N, F, E, R, S };

    set(I, I, t + m.sI);
    set(N, N, m.bN * m.bN * t + m.lN * m.lN * m.sI + m.sN);
    set(F, F, m.bF * m.bF * t + m.lF * m.lF * m.lN * m.lN * m.sI + m.lF * m.lF * m.sN + m.sF);
    set(E, E,
        m.bE * m.bE * t + m.lE * m.lE * m.lF * m.lF * m.lN * m.lN * m.sI + m.lE * m.lE * m.lF * m.lF * m.sN +
            m.lE * m.lE * m.sF + m.sE);
    set(R, R, m.bR * m.bR * t + m.lR * m.lR * m.lN * m.lN * m.sI + m.lR * m.lR * m.sN + m.sR);
    set(S, S,
        m.bS * m.bS * t + m.lS * m.lS * m.lR * m.lR * m.lN * m.lN * m.sI + m.lS * m.lS * m.lR * m.lR * m.sN +
            m.lS * m.lS * m.sR + m.sS);

    set(I, N, m.bN * t + m.lN * m.sI);
    set(I, F, m.bF * t + m.lF * m.lN * m.sI);
    set(I, E, m.bE * t + m.lE * m.lF * m.lN * m.sI);
    set(I, R, m.bR * t + m.lR * m.lN * m.sI);
    set(I, S, m.bS * t + m.lS * m.lR * m.lN * m.sI);

    set(N, F, m.bN * m.bF * t + m.lF * m.lN * m.lN * m.sI + m.lF * m.sN);
    set(N, E, m.bN * m.bE * t + m.lE * m.lF * m.lN * m.lN * m.sI + m.lE * m.lF * m.sN);
    set(N, R, m.bN * m.bR * t + m.lR * m.lN * m.lN * m.sI + m.lR * m.sN);
    set(N, S, m.bN * m.bS * t + m.lS * m.lR * m.lN * m.lN * m.sI + m.lS * m.lR * m.sN);

    set(F, E, m.bF * m.bE * t + m.lE * m.lF * m.lF * m.lN * m.lN * m.sI + m.lE * m.lF * m.lF * m.sN + m.lE * m.sF);
    set(F, R, m.bF * m.bR * t + m.lF * m.lR * m.lN * m.lN * m.sI + m.lF * m.lR * m.sN);
    set(F, S, m.bF * m.bS * t + m.lF * m.lS * m.lR * m.lN * m.lN * m.sI + m.lF * m.lS * m.lR * m.sN);
    set(E, R, m.bE * m.bR * t + m.lE * m.lF * m.lR * m.lN * m.lN * m.sI + m.lE * m.lF * m.lR * m.sN);
    set(E, S,
        m.bE * m.bS * t + m.lE * m.lF * m.lS * m.lR * m.lN * m.lN * m.sI + m.lE * m.lF * m.lS * m.lR * m.sN);
    set(R, S, m.bR * m.bS * t + m.lS * m.lR * m.lR * m.lN * m.lN * m.sI + m.lS * m.lR * m.lR * m.sN + m.lS * m.sR);
    return c;
}

// Just-identified triple collocation population moments:
// X_k = a_k + b_k t + e_k, with an optional error covariance between datasets 2 and 3.
struct Triplet {
    double st2;
    std::array<double, 3> b;
    std::array<double, 3> err;
    double err_cov23 = 0.0;
};

inline std::array<std::array<double, 3>, 3> covariance(const Triplet& m)
{
    std::array<std::array<double, 3>, 3> c{};
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) c[i][j] = m.b[i] * m.b[j] * m.st2 + (i == j ? m.err[i] : 0.0);
    }
    c[1][2] += m.err_cov23;
    c[2][1] += m.err_cov23;
    return c;
}

}  // namespace oracle
