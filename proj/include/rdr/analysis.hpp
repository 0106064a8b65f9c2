#pragma once

#include <cmath>
#include <functional>
#include <sstream>

#include "rdr/operators.hpp"
#include "rdr/random.hpp"

namespace rdr {

/// Almost-averagedness certificate: violation eps and averaging constant
/// alpha of the quadratic contraction inequality.
struct AveragedProfile {
    double eps;
    double alpha;
};

/// Certificate of the lambda-reflector (1+lambda)T - lambda id of an
/// operator that is almost averaged with (eps, alpha).  Requires
/// alpha <= 1/(1+lambda).
inline AveragedProfile reflector_profile(double eps, double alpha, double lambda) {
    if (eps < 0.0 || lambda < 0.0 || lambda > 1.0)
        throw InvalidParams("reflector_profile: eps >= 0 and lambda in [0,1]");
    if (!(alpha > 0.0) || alpha > 1.0 / (1.0 + lambda))
        throw OutOfDomain("reflector_profile: need 0 < alpha <= 1/(1+lambda)");
    const double alpha_r = 1.0 / (1.0 + (1.0 + lambda) * ((1.0 - alpha) / alpha - lambda));
    return {(1.0 + lambda) * eps, alpha_r};
}

/// Certificate of T_lambda built from two (eps, alpha)-averaged operators.
inline AveragedProfile tlambda_profile(double eps, double alpha, double lambda) {
    if (eps < 0.0 || lambda < 0.0 || lambda > 1.0)
        throw InvalidParams("tlambda_profile: eps >= 0 and lambda in [0,1]");
    if (!(alpha > 0.0) || alpha > 1.0 / (1.0 + lambda))
        throw OutOfDomain("tlambda_profile: need 0 < alpha <= 1/(1+lambda)");
    const double eps_t = 2.0 * eps + (1.0 + lambda) * eps * eps;
    const double alpha_t =
        1.0 / ((1.0 + lambda) *
               (1.0 + 0.5 * (1.0 + lambda) * ((1.0 - alpha) / alpha - lambda)));
    return {eps_t, alpha_t};
}

/// Certificate of T_lambda for feasibility over two (eps, delta)-regular
/// sets: violation eps_tilde and averaging constant 2/(3+lambda).
inline AveragedProfile feasibility_profile(double eps, double lambda) {
    if (eps < 0.0 || lambda < 0.0 || lambda > 1.0)
        throw InvalidParams("feasibility_profile: eps >= 0 and lambda in [0,1]");
    const double p = 2.0 * eps + 2.0 * eps * eps; // projector violation
    const double eps_t = 2.0 * p + (1.0 + lambda) * p * p;
    return {eps_t, 2.0 / (3.0 + lambda)};
}

/// Metric-subregularity constant guaranteed by transversality with
/// constant theta: (1-theta) sqrt(1+theta) / (sqrt(2) max{1, lambda + sqrt(1-theta^2)}).
inline double kappa_from_theta(double theta, double lambda) {
    if (!(theta >= 0.0 && theta < 1.0)) throw OutOfDomain("kappa_from_theta: theta in [0,1)");
    if (lambda < 0.0 || lambda > 1.0) throw InvalidParams("kappa_from_theta: lambda in [0,1]");
    const double num = (1.0 - theta) * std::sqrt(1.0 + theta);
    const double den =
        std::sqrt(2.0) * std::max(1.0, lambda + std::sqrt(1.0 - theta * theta));
    return num / den;
}

/// Subtransversality constant sqrt((1-theta)/2) implied by transversality.
inline double subtransversality_constant(double theta) {
    if (!(theta >= 0.0 && theta < 1.0))
        throw OutOfDomain("subtransversality_constant: theta in [0,1)");
    return std::sqrt((1.0 - theta) / 2.0);
}

/// Linear rate c = sqrt(1 + eps - (1-alpha) kappa^2 / alpha).  Invalid
/// exactly when the radicand reaches 1, i.e. when kappa fails the
/// sufficiently-large condition kappa > sqrt(eps alpha / (1-alpha)).  A
/// negative radicand means the contraction is stronger than the estimate
/// needs; the rate clamps to 0 there.
struct RatePrediction {
    double radicand;
    std::optional<double> rate; // engaged iff radicand < 1
};

inline RatePrediction predicted_rate(const AveragedProfile& profile, double kappa) {
    if (!(kappa > 0.0)) throw InvalidParams("predicted_rate: kappa must be positive");
    const double radicand =
        1.0 + profile.eps - (1.0 - profile.alpha) * kappa * kappa / profile.alpha;
    if (radicand >= 1.0) return {radicand, std::nullopt};
    return {radicand, std::sqrt(std::max(0.0, radicand))};
}

/// Radius of the ball on which the feasibility certificate is valid, given
/// the sets' regularity radius delta.
inline double neighborhood_radius(double eps, double lambda, double delta) {
    if (!(delta > 0.0) || eps < 0.0 || lambda < 0.0 || lambda > 1.0)
        throw InvalidParams("neighborhood_radius: delta > 0, eps >= 0, lambda in [0,1]");
    const double p = 2.0 * eps + 2.0 * eps * eps;
    return delta / (2.0 * (1.0 + eps) * std::sqrt(1.0 + (1.0 + lambda) * p));
}

/// Every derived convergence constant for one (eps, alpha, lambda, theta)
/// configuration, with the rate of the feasibility instantiation.
struct ConstantsReport {
    double lambda;
    double eps;
    double alpha;
    AveragedProfile reflector;
    AveragedProfile tlambda;
    AveragedProfile feasibility;
    double theta;
    double kappa;
    double subtransversality;
    double rate_radicand;
    std::optional<double> rate;
    double delta;
    double delta_prime;

    static ConstantsReport compute(double eps, double alpha, double lambda, double theta,
                                   double delta = 1.0) {
        ConstantsReport r{};
        r.lambda = lambda;
        r.eps = eps;
        r.alpha = alpha;
        r.reflector = reflector_profile(eps, alpha, lambda);
        r.tlambda = tlambda_profile(eps, alpha, lambda);
        r.feasibility = feasibility_profile(eps, lambda);
        r.theta = theta;
        r.kappa = kappa_from_theta(theta, lambda);
        r.subtransversality = subtransversality_constant(theta);
        RatePrediction p = predicted_rate(r.feasibility, r.kappa);
        r.rate_radicand = p.radicand;
        r.rate = p.rate;
        r.delta = delta;
        r.delta_prime = neighborhood_radius(eps, lambda, delta);
        return r;
    }

    /// Flat key-value block with stable key names, one "key = value" per line.
    std::string to_kv_text() const {
        std::ostringstream os;
        os.precision(17);
        os << "lambda = " << lambda << '\n'
           << "eps = " << eps << '\n'
           << "alpha = " << alpha << '\n'
           << "reflector_eps = " << reflector.eps << '\n'
           << "reflector_alpha = " << reflector.alpha << '\n'
           << "tlambda_eps = " << tlambda.eps << '\n'
           << "tlambda_alpha = " << tlambda.alpha << '\n'
           << "feasibility_eps = " << feasibility.eps << '\n'
           << "feasibility_alpha = " << feasibility.alpha << '\n'
           << "theta = " << theta << '\n'
           << "kappa = " << kappa << '\n'
           << "subtransversality = " << subtransversality << '\n'
           << "rate_radicand = " << rate_radicand << '\n';
        os << "rate = ";
        if (rate)
            os << *rate;
        else
            os << "invalid";
        os << '\n'
           << "rate_valid = " << (rate ? "true" : "false") << '\n'
           << "delta = " << delta << '\n'
           << "delta_prime = " << delta_prime << '\n';
        return os.str();
    }
};

// ---------------------------------------------------------------------------
// Empirical estimators
// ---------------------------------------------------------------------------

namespace detail {

// direction space of an affine variant, as orthonormal columns
inline Matrix direction_basis(const SetSpec& S) {
    if (S.is<SetSpec::AffineSystem>())
        return kernel_basis(S.as<SetSpec::AffineSystem>().pinv->matrix());
    if (S.is<SetSpec::LineThroughOrigin>()) {
        Matrix d(S.dim(), 1);
        d.col(0) = S.as<SetSpec::LineThroughOrigin>().u;
        return d;
    }
    if (S.is<SetSpec::AffineLine>()) {
        Matrix d(S.dim(), 1);
        d.col(0) = S.as<SetSpec::AffineLine>().u;
        return d;
    }
    if (S.is<SetSpec::PointList>() && S.as<SetSpec::PointList>().points.size() == 1)
        return Matrix(S.dim(), 0);
    throw NotAffine("direction_basis: real affine variant required");
}

inline RealVec anchor_point(const SetSpec& S) {
    if (S.is<SetSpec::AffineSystem>()) {
        const auto& a = S.as<SetSpec::AffineSystem>();
        return a.pinv->apply(a.b);
    }
    if (S.is<SetSpec::LineThroughOrigin>())
        return RealVec::Zero(S.dim());
    if (S.is<SetSpec::AffineLine>()) return S.as<SetSpec::AffineLine>().p;
    if (S.is<SetSpec::PointList>() && S.as<SetSpec::PointList>().points.size() == 1)
        return S.as<SetSpec::PointList>().points.front().reals();
    throw NotAffine("anchor_point: real affine variant required");
}

// full-row-rank row description {x : M x = b} of a real affine variant
inline std::pair<Matrix, RealVec> affine_rows(const SetSpec& S) {
    Matrix dirs = direction_basis(S);
    Matrix rows = kernel_basis(Matrix(dirs.transpose())); // normals: n x (n-k)
    Matrix M = rows.transpose();
    RealVec b = M * anchor_point(S);
    return {M, b};
}

} // namespace detail

/// Transversality constant of two intersecting affine sets relative to
/// aff(A u B): the largest cosine between unit normals of A and B inside
/// that affine hull, computed from singular values.
inline double friedrichs_cosine(const SetSpec& A, const SetSpec& B) {
    if (A.dim() != B.dim()) throw DimensionMismatch("friedrichs_cosine: dimension mismatch");
    Matrix dA = detail::direction_basis(A);
    Matrix dB = detail::direction_basis(B);
    RealVec a0 = detail::anchor_point(A);
    RealVec b0 = detail::anchor_point(B);

    Matrix span(A.dim(), dA.cols() + dB.cols() + 1);
    span.leftCols(dA.cols()) = dA;
    span.middleCols(dA.cols(), dB.cols()) = dB;
    span.col(dA.cols() + dB.cols()) = a0 - b0;
    Matrix L = orthonormal_columns(span); // basis of the hull's direction, n x d

    // normals of each set inside the hull, in hull coordinates
    Matrix nA = kernel_basis(Matrix(dA.transpose() * L)); // d x kA
    Matrix nB = kernel_basis(Matrix(dB.transpose() * L));
    if (nA.cols() == 0 || nB.cols() == 0)
        throw DegenerateNormals("friedrichs_cosine: no nonzero normals within the hull");

    Eigen::JacobiSVD<Matrix> svd(Matrix(nA.transpose() * nB));
    const double s = svd.singularValues().size() > 0 ? svd.singularValues()(0) : 0.0;
    return std::min(1.0, std::max(0.0, s));
}

/// Minimal full-row-rank affine description of the intersection of two real
/// affine variants.  Throws NotAffine for other variants, NoSamples when the
/// two sets do not meet.
inline SetSpec affine_intersection(const SetSpec& A, const SetSpec& B) {
    auto [MA, bA] = detail::affine_rows(A);
    auto [MB, bB] = detail::affine_rows(B);
    const Index n = A.dim();
    Matrix M(MA.rows() + MB.rows(), n);
    M.topRows(MA.rows()) = MA;
    M.bottomRows(MB.rows()) = MB;
    RealVec b(bA.size() + bB.size());
    b << bA, bB;

    // consistent least-squares witness
    RealVec x0 = M.bdcSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).solve(b);
    if ((M * x0 - b).norm() > 1e-8 * (1.0 + b.norm()))
        throw NoSamples("affine_intersection: sets do not intersect");

    // reduce to a full-row-rank description via the row space
    Matrix rowspace = orthonormal_columns(Matrix(M.transpose())); // n x r
    if (rowspace.cols() == 0) {
        // intersection is the whole space; describe via a trivial always-true row
        Matrix I1 = Matrix::Zero(1, n);
        I1(0, 0) = 1.0;
        return SetSpec::affine_system(I1, RealVec(I1 * x0));
    }
    Matrix Mr = rowspace.transpose();
    return SetSpec::affine_system(Mr, RealVec(Mr * x0));
}

/// Ball or annulus sampling region for the subregularity estimator.
struct SamplingRegion {
    Point center;
    double outer_radius;
    double inner_radius = 0.0;
};

struct KappaEstimate {
    double kappa;
    Point argmin;
    double dist_at_argmin;
    int samples_used;
};

/// Empirical metric-subregularity constant: the minimum of
/// ||x - Tx|| / dist(x, solution set) over seeded samples from the region.
/// Samples closer than 1e-12 to the solution set are discarded.
inline KappaEstimate estimate_kappa(const OperatorSpec& op,
                                    const std::function<double(const Point&)>& dist_to_solution,
                                    const SamplingRegion& region, int samples,
                                    std::uint64_t seed) {
    if (samples < 1) throw InvalidParams("estimate_kappa: need samples >= 1");
    if (!(region.outer_radius > 0.0) || region.inner_radius < 0.0 ||
        region.inner_radius >= region.outer_radius)
        throw InvalidParams("estimate_kappa: need 0 <= inner < outer radius");

    std::optional<KappaEstimate> best;
    int used = 0;
    for (int i = 0; i < samples; ++i) {
        Point offset = uniform_ball_point(region.center.dim(), region.outer_radius,
                                          derive_seed(seed, static_cast<std::uint64_t>(i)));
        if (offset.norm() < region.inner_radius) continue; // annulus rejection
        Point x = region.center + (region.center.is_complex() ? offset.to_complex() : offset);
        const double d = dist_to_solution(x);
        if (d < 1e-12) continue;
        const double ratio = dist(x, step(op, x)) / d;
        ++used;
        if (!best || ratio < best->kappa) best = KappaEstimate{ratio, x, d, 0};
    }
    if (!best) throw NoSamples("estimate_kappa: no usable samples in region");
    best->samples_used = used;
    return *best;
}

/// Tail-window log-linear fit of a positive decaying sequence; the
/// exponentiated slope is the contraction factor per iteration.
struct RateEstimate {
    double factor;
    Index window_begin; // indices into the fitted sequence
    Index window_end;   // one past the last fitted element
    double fit_residual; // rms residual of the log-linear fit
};

inline RateEstimate estimate_rate_from_values(const std::vector<double>& values,
                                              double tail_fraction = 0.5) {
    if (!(tail_fraction > 0.0) || tail_fraction > 1.0)
        throw InvalidParams("estimate_rate: tail fraction in (0,1]");
    // usable prefix: entries above the floor
    Index usable = 0;
    while (usable < static_cast<Index>(values.size()) &&
           values[static_cast<std::size_t>(usable)] > 1e-13)
        ++usable;
    if (usable < 10) throw InsufficientData("estimate_rate: need >= 10 values above 1e-13");
    const Index begin = usable - std::max<Index>(5, static_cast<Index>(std::ceil(
                                    static_cast<double>(usable) * tail_fraction)));
    const Index b = std::max<Index>(0, begin);

    // least squares log(v_k) = a + r k
    const Index count = usable - b;
    double sk = 0, sy = 0, skk = 0, sky = 0;
    for (Index k = b; k < usable; ++k) {
        const double y = std::log(values[static_cast<std::size_t>(k)]);
        sk += static_cast<double>(k);
        sy += y;
        skk += static_cast<double>(k) * static_cast<double>(k);
        sky += static_cast<double>(k) * y;
    }
    const double nr = static_cast<double>(count);
    const double denom = nr * skk - sk * sk;
    if (denom == 0.0) throw InsufficientData("estimate_rate: degenerate window");
    const double slope = (nr * sky - sk * sy) / denom;
    const double intercept = (sy - slope * sk) / nr;
    double ss = 0.0;
    for (Index k = b; k < usable; ++k) {
        const double y = std::log(values[static_cast<std::size_t>(k)]);
        const double e = y - (intercept + slope * static_cast<double>(k));
        ss += e * e;
    }
    return {std::exp(slope), b, usable, std::sqrt(ss / nr)};
}

/// Gap vector between two convex sets: the limit of b_k - a_k under
/// alternating projections.  Zero exactly when the sets meet.
inline Point estimate_gap_vector(const SetSpec& A, const SetSpec& B, long max_iters,
                                 std::uint64_t seed) {
    if (!A.is_convex() || !B.is_convex())
        throw NonConvexInput("estimate_gap_vector: convex variants required");
    if (max_iters < 1) throw InvalidParams("estimate_gap_vector: need max_iters >= 1");
    Point x = A.complex_ambient() ? gaussian_cplx_point(A.dim(), seed)
                                  : gaussian_point(A.dim(), seed);
    for (long k = 0; k < max_iters; ++k) {
        Point next = project(A, project(B, x));
        const double change = dist(next, x);
        x = next;
        if (change < 1e-13) break;
    }
    return project(B, x) - x;
}

/// Affine description of Fix T_lambda = E - (lambda/(1-lambda)) g for convex
/// inconsistent feasibility, with E = A n (B - g).  Real affine variants only.
inline SetSpec fixed_point_set_inconsistent(const SetSpec& A, const SetSpec& B, double lambda,
                                            long gap_iters = 100000,
                                            std::uint64_t seed = 0) {
    if (lambda >= 1.0) throw LambdaOne("fixed_point_set_inconsistent: lambda must be < 1");
    if (lambda < 0.0) throw InvalidParams("fixed_point_set_inconsistent: lambda in [0,1)");
    if (!A.is_convex() || !B.is_convex())
        throw NonConvexInput("fixed_point_set_inconsistent: convex variants required");

    Point g = estimate_gap_vector(A, B, gap_iters, seed);
    auto [MA, bA] = detail::affine_rows(A);
    auto [MB, bB] = detail::affine_rows(B);

    const Index n = A.dim();
    Matrix M(MA.rows() + MB.rows(), n);
    M.topRows(MA.rows()) = MA;
    M.bottomRows(MB.rows()) = MB;
    RealVec b(bA.size() + bB.size());
    b << bA, bB - MB * g.reals(); // rows of B - g

    RealVec x0 = M.bdcSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).solve(b);
    if ((M * x0 - b).norm() > 1e-7 * (1.0 + b.norm()))
        throw NoSamples("fixed_point_set_inconsistent: E = A n (B - g) looks empty");

    const double mu = lambda / (1.0 - lambda);
    Matrix rowspace = orthonormal_columns(Matrix(M.transpose()));
    if (rowspace.cols() == 0) {
        Matrix I1 = Matrix::Zero(1, n);
        I1(0, 0) = 1.0;
        RealVec shifted = x0 - mu * g.reals();
        return SetSpec::affine_system(I1, RealVec(I1 * shifted));
    }
    Matrix Mr = rowspace.transpose();
    RealVec br = Mr * x0 - mu * (Mr * g.reals());
    return SetSpec::affine_system(Mr, br);
}

} // namespace rdr
