#include "infers/reference.hpp"

#include <cmath>

#include "infers/error.hpp"

namespace infers {

namespace {

void require_positive_variance(const MomentSet& m, Tag t)
{
    if (!(m.var(t) > 0.0)) {
        throw Error(ErrorCode::DegenerateVariance, "Var(" + std::string(tag_name(t)) + ") <= 0");
    }
}

ReferenceSolution make(ReferenceKind kind, const MomentSet& m, Tag reference, Tag target, double slope)
{
    ReferenceSolution s;
    s.kind = kind;
    s.reference = reference;
    s.target = target;
    s.slope = slope;
    s.intercept = m.mean_of(target) - slope * m.mean_of(reference);
    return s;
}

}  // namespace

ReferenceSolution olr_fit(const MomentSet& m, Tag reference, Tag target)
{
    require_positive_variance(m, reference);
    const double vi = m.var(reference);
    auto s = make(ReferenceKind::OLR, m, reference, target, m.cov(reference, target) / vi);
    s.sigma_t2 = vi;
    s.err_var[index(reference)] = 0.0;
    s.err_var[index(target)] = m.var(target) - s.slope * s.slope * vi;
    return s;
}

ReferenceSolution rlr_fit(const MomentSet& m, Tag reference, Tag target)
{
    const double c = m.cov(reference, target);
    if (c == 0.0) throw Error(ErrorCode::ZeroCovariance, "Cov(I,N) = 0");
    require_positive_variance(m, target);
    const double vn = m.var(target);
    auto s = make(ReferenceKind::RLR, m, reference, target, vn / c);
    s.err_var[index(reference)] = m.var(reference) - c * c / vn;
    s.err_var[index(target)] = 0.0;
    s.sigma_t2 = m.var(reference) - s.err_var[index(reference)];
    return s;
}

double variance_match(const MomentSet& m, Tag reference, Tag target)
{
    require_positive_variance(m, reference);
    return std::sqrt(m.var(target) / m.var(reference));
}

ReferenceSolution vm_fit(const MomentSet& m, Tag reference, Tag target)
{
    const double beta = variance_match(m, reference, target);
    if (!(beta > 0.0)) throw Error(ErrorCode::DegenerateVariance, "Var(N) = 0");
    auto s = make(ReferenceKind::VM, m, reference, target, beta);
    s.sigma_t2 = m.cov(reference, target) / beta;
    s.err_var[index(reference)] = m.var(reference) - s.sigma_t2;
    s.err_var[index(target)] = m.var(target) - beta * beta * s.sigma_t2;
    return s;
}

TripletMoments triplet(const MomentSet& m, Tag first, Tag second, Tag third, Component c)
{
    const std::array<Tag, 3> tags{first, second, third};
    TripletMoments t;
    for (int a = 0; a < 3; ++a) {
        t.mean[a] = m.mean_of(tags[a]);
        for (int b = 0; b < 3; ++b) t.cov(a, b) = m.cov(tags[a], tags[b], c);
    }
    return t;
}

std::array<ReferenceSolution, 3> triple_collocation_fit(const TripletMoments& m3)
{
    const double c12 = m3.cov(0, 1);
    const double c13 = m3.cov(0, 2);
    const double c23 = m3.cov(1, 2);
    if (c12 == 0.0 || c13 == 0.0 || c23 == 0.0) {
        throw Error(ErrorCode::ZeroCovariance, "triple collocation needs nonzero pairwise covariances");
    }
    const double sigma_t2 = c12 * c13 / c23;
    if (!(sigma_t2 > 0.0)) {
        throw Error(ErrorCode::SignInconsistency, "negative true variance from covariance signs");
    }
    const std::array<double, 3> slope{1.0, c23 / c13, c23 / c12};

    std::array<double, kTagCount> err{};
    err.fill(std::numeric_limits<double>::quiet_NaN());
    for (int k = 0; k < 3; ++k) err[k] = m3.cov(k, k) - slope[k] * slope[k] * sigma_t2;

    std::array<ReferenceSolution, 3> out;
    for (int k = 0; k < 3; ++k) {
        ReferenceSolution& s = out[k];
        s.kind = ReferenceKind::TC;
        s.reference = Tag::I;
        s.target = kAllTags[k];
        s.slope = slope[k];
        s.intercept = m3.mean[k] - slope[k] * m3.mean[0];
        s.sigma_t2 = sigma_t2;
        s.err_var = err;
    }
    return out;
}

}  // namespace infers
