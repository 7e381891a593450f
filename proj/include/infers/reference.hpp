#pragma once

#include <array>
#include <limits>

#include <Eigen/Core>

#include "infers/moments.hpp"

namespace infers {

enum class ReferenceKind { OLR, RLR, VM, TC };

// Closed-form errors-in-variables solution of `target = intercept + slope * t + error`
// against `reference = t + error`.  Error variances of samples the method
// does not estimate are NaN.
struct ReferenceSolution {
    ReferenceKind kind = ReferenceKind::OLR;
    Tag reference = Tag::I;
    Tag target = Tag::N;
    double slope = std::numeric_limits<double>::quiet_NaN();
    Velocity intercept{};
    double sigma_t2 = std::numeric_limits<double>::quiet_NaN();
    std::array<double, kTagCount> err_var{
        std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN(),
        std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN(),
        std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};

    double err_var_of(Tag t) const { return err_var[index(t)]; }
};

// Ordinary regression of N on I: all error is assigned to N.
ReferenceSolution olr_fit(const MomentSet& m, Tag reference = Tag::I, Tag target = Tag::N);
// Reverse regression: all error is assigned to I.
ReferenceSolution rlr_fit(const MomentSet& m, Tag reference = Tag::I, Tag target = Tag::N);

// Variance-matched slope sqrt(Var(target) / Var(reference)) on the joint
// (complex) variances, so one slope serves both components.
double variance_match(const MomentSet& m, Tag reference = Tag::I, Tag target = Tag::N);
// The errors-in-variables solution at the variance-matched slope.
ReferenceSolution vm_fit(const MomentSet& m, Tag reference = Tag::I, Tag target = Tag::N);

// Second moments of three collocated datasets.
struct TripletMoments {
    std::array<Velocity, 3> mean{};
    Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
};

TripletMoments triplet(const MomentSet& m, Tag first, Tag second, Tag third,
                       Component c = Component::Joint);

// Just-identified triple collocation with dataset 0 as the calibration
// reference.  Element k describes dataset k (slope, intercept); all three
// share sigma_t2 and the err_var entries (stored at indices 0..2).
std::array<ReferenceSolution, 3> triple_collocation_fit(const TripletMoments& m3);

}  // namespace infers
