#pragma once

#include "rdr/problems.hpp"

namespace rdr {

/// One verification suite outcome: counts plus a note on the first failure.
struct CheckResult {
    std::string name;
    long passed = 0;
    long failed = 0;
    std::string detail;

    bool ok() const { return failed == 0; }

    void expect(bool cond, const std::string& note) {
        if (cond) {
            ++passed;
        } else {
            ++failed;
            if (detail.empty()) detail = note;
        }
    }
};

namespace checks {

inline std::vector<std::pair<SetSpec, SetSpec>> verification_pairs() {
    Matrix M(2, 4);
    M << 1, 2, 0, -1, 0, 1, 1, 1;
    RealVec b(2);
    b << 1, 2;
    SetSpec aff = SetSpec::affine_system(M, b);
    RealVec u1(4), u2(4), p(4);
    u1 << 1, 1, 0, 0;
    u2 << 0, 1, 1, 0;
    p << 1, 0, 0, 0;
    SetSpec line = SetSpec::line_through_origin(u1);
    SetSpec aline = SetSpec::affine_line(p, u2);
    SetSpec sp = SetSpec::sparsity(4, 2);
    std::vector<std::pair<SetSpec, SetSpec>> pairs;
    pairs.emplace_back(aff, sp);
    pairs.emplace_back(sp, aff);
    pairs.emplace_back(line, aline);
    pairs.emplace_back(aff, line);
    return pairs;
}

/// Composition identity (1+lambda) T_lambda - lambda id = R_A o R_B, the
/// affine convex-combination identity, and the exact lambda endpoints.
inline CheckResult identity_suite(int trials = 1000, std::uint64_t seed = 1) {
    CheckResult res;
    res.name = "identity";
    auto pairs = verification_pairs();
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> lam_dist(0.0, 1.0);
    for (int t = 0; t < trials; ++t) {
        const auto& [A, B] = pairs[static_cast<std::size_t>(t) % pairs.size()];
        const double lam = lam_dist(gen);
        Point x = gaussian_point(A.dim(), derive_seed(seed, static_cast<std::uint64_t>(t)));
        auto op = OperatorSpec::t_lambda(A, B, lam);
        Point lhs = (1.0 + lam) * step(op, x) - lam * x;
        res.expect(dist(lhs, composed_reflector_step(op, x)) <= 1e-10,
                   "composition identity violated");
        if (A.is_affine()) {
            res.expect(dist(convex_combination_step(A, B, lam, x), step(op, x)) <= 1e-10,
                       "affine convex combination violated");
        }
        res.expect(step(OperatorSpec::t_lambda(A, B, 0.0), x) ==
                       project(A, project(B, x)),
                   "lambda=0 is not alternating projections");
        Point pb = project(B, x);
        res.expect(step(OperatorSpec::t_lambda(A, B, 1.0), x) ==
                       project(A, 2.0 * pb - x) - 1.0 * (pb - x),
                   "lambda=1 is not the DR step");
    }
    return res;
}

/// Averagedness inequality with profile (0, 2/(3+lambda)) on convex pairs.
inline CheckResult averagedness_suite(int samples = 10000, std::uint64_t seed = 2) {
    CheckResult res;
    res.name = "averagedness";
    const double angles[] = {std::numbers::pi / 6.0, std::numbers::pi / 3.0,
                             std::numbers::pi / 2.0};
    for (double lam : {0.0, 0.5, 1.0}) {
        const double ratio = (1.0 - 2.0 / (3.0 + lam)) / (2.0 / (3.0 + lam));
        for (double angle : angles) {
            auto inst = gen_geometry(GeometryKind::LinesAtAngle, angle);
            auto op = OperatorSpec::t_lambda(inst.A, inst.B, lam);
            Point z = Point::zeros(2);
            const int per = samples / (3 * 3);
            for (int i = 0; i < per; ++i) {
                Point x = gaussian_point(
                    2, derive_seed(seed, static_cast<std::uint64_t>(i) * 31 +
                                             static_cast<std::uint64_t>(angle * 100) +
                                             static_cast<std::uint64_t>(lam * 10)));
                Point xp = step(op, x);
                const double slack = (x - z).squared_norm() -
                                     ratio * (xp - x).squared_norm() -
                                     (xp - z).squared_norm();
                res.expect(slack >= -1e-9, "averagedness inequality violated");
            }
        }
    }
    return res;
}

/// Empirical subregularity constant dominates the transversality bound.
inline CheckResult kappa_bound_suite(int samples = 1000, std::uint64_t seed = 3) {
    CheckResult res;
    res.name = "kappa_bound";
    for (double angle :
         {std::numbers::pi / 6.0, std::numbers::pi / 4.0, std::numbers::pi / 3.0}) {
        auto inst = gen_geometry(GeometryKind::LinesAtAngle, angle);
        const double theta_bar = friedrichs_cosine(inst.A, inst.B);
        auto oracle = solution_distance_oracle(inst);
        for (double lam : {0.0, 0.5, 1.0}) {
            auto op = OperatorSpec::t_lambda(inst.A, inst.B, lam);
            auto est = estimate_kappa(op, oracle, {Point::zeros(2), 0.1}, samples, seed);
            res.expect(est.kappa >= kappa_from_theta(theta_bar + 0.01, lam) - 1e-9,
                       "kappa estimate under the transversality bound");
        }
    }
    return res;
}

/// Fix T_lambda = E - lambda/(1-lambda) g on inconsistent parallel lines.
inline CheckResult fixed_point_suite(int starts = 20, std::uint64_t seed = 4) {
    CheckResult res;
    res.name = "fixed_point_set";
    auto inst = gen_geometry(GeometryKind::ParallelLines, 1.0);
    for (double lam : {0.0, 0.25, 0.5, 0.75}) {
        auto op = OperatorSpec::t_lambda(inst.A, inst.B, lam);
        const double y_expected = -lam / (1.0 - lam);
        for (int i = 0; i < starts; ++i) {
            Point x0 = gaussian_point(2, derive_seed(seed, static_cast<std::uint64_t>(i)));
            auto trace = run(op, x0, {.tol = 1e-10, .max_iter = 5000}, {}, 0);
            res.expect(trace.stop_reason == StopReason::Tolerance,
                       "iteration failed to reach tolerance");
            const double y = trace.final_iterate->reals()[1];
            res.expect(std::abs(y - y_expected) <= 1e-7,
                       "limit point off the predicted fixed-point line");
        }
        SetSpec fix = fixed_point_set_inconsistent(inst.A, inst.B, lam);
        Point z = project(fix, gaussian_point(2, derive_seed(seed, 99)));
        res.expect(dist(z, step(op, z)) <= 1e-8, "described fixed point not fixed");
    }
    return res;
}

} // namespace checks

inline std::vector<CheckResult> run_all_checks() {
    return {checks::identity_suite(), checks::averagedness_suite(),
            checks::kappa_bound_suite(), checks::fixed_point_suite()};
}

} // namespace rdr
