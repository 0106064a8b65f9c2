#pragma once

#include <algorithm>
#include <memory>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "rdr/dft.hpp"
#include "rdr/linalg.hpp"
#include "rdr/point.hpp"

namespace rdr {

inline constexpr double kMembershipTol = 1e-9;

/// Declarative constraint set with an exact projector.  Immutable; the
/// affine variant owns a factorization cache built at construction.
class SetSpec {
public:
    struct AffineSystem {
        std::shared_ptr<const PseudoInverse> pinv; // holds M, full row rank
        RealVec b;
    };
    struct LineThroughOrigin {
        RealVec u; // unit
    };
    struct AffineLine {
        RealVec p;
        RealVec u; // unit
    };
    struct Sparsity {
        Index n;
        Index s;
    };
    struct RealSparsity { // complex ambient, real s-sparse target
        Index n;
        Index s;
    };
    struct FourierData {
        Index n;
        std::vector<Index> indices; // sorted, distinct, subset of [0, n)
        CplxVec values;             // one per index
    };
    struct PointList {
        std::vector<Point> points; // all same kind and dimension
    };

    using Variant =
        std::variant<AffineSystem, LineThroughOrigin, AffineLine, Sparsity, RealSparsity,
                     FourierData, PointList>;

    static SetSpec affine_system(Matrix M, RealVec b) {
        if (M.rows() != b.size())
            throw DimensionMismatch("affine_system: rows(M) != size(b)");
        auto pinv = std::make_shared<const PseudoInverse>(std::move(M));
        const Index n = pinv->matrix().cols();
        return SetSpec(AffineSystem{std::move(pinv), std::move(b)}, n, false);
    }

    static SetSpec line_through_origin(RealVec u) {
        const double nu = u.norm();
        if (nu == 0.0 || !u.allFinite())
            throw InvalidParams("line_through_origin: direction must be nonzero finite");
        const Index n = u.size();
        return SetSpec(LineThroughOrigin{RealVec(u / nu)}, n, false);
    }

    static SetSpec affine_line(RealVec p, RealVec u) {
        if (p.size() != u.size()) throw DimensionMismatch("affine_line: dim(p) != dim(u)");
        const double nu = u.norm();
        if (nu == 0.0 || !u.allFinite() || !p.allFinite())
            throw InvalidParams("affine_line: direction must be nonzero finite");
        const Index n = u.size();
        return SetSpec(AffineLine{std::move(p), RealVec(u / nu)}, n, false);
    }

    static SetSpec sparsity(Index n, Index s) {
        if (n < 1 || s < 1 || s > n) throw InvalidParams("sparsity: need 1 <= s <= n");
        return SetSpec(Sparsity{n, s}, n, false);
    }

    static SetSpec real_sparsity(Index n, Index s) {
        if (n < 1 || s < 1 || s > n) throw InvalidParams("real_sparsity: need 1 <= s <= n");
        return SetSpec(RealSparsity{n, s}, n, true);
    }

    static SetSpec fourier_data(Index n, std::vector<Index> indices, CplxVec values) {
        if (n < 1) throw InvalidParams("fourier_data: need n >= 1");
        if (static_cast<Index>(indices.size()) != values.size())
            throw DimensionMismatch("fourier_data: |J| != |b_J|");
        if (!values.allFinite()) throw NonFinite("fourier_data: non-finite datum");
        std::vector<Index> sorted = indices;
        std::sort(sorted.begin(), sorted.end());
        if (!sorted.empty() && (sorted.front() < 0 || sorted.back() >= n))
            throw InvalidParams("fourier_data: index out of range");
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
            throw InvalidParams("fourier_data: duplicate index");
        if (sorted != indices) {
            // keep (index, value) pairs aligned under the sort
            CplxVec v(values.size());
            std::vector<std::size_t> order(indices.size());
            std::iota(order.begin(), order.end(), std::size_t{0});
            std::sort(order.begin(), order.end(),
                      [&](std::size_t a, std::size_t b) { return indices[a] < indices[b]; });
            for (std::size_t i = 0; i < order.size(); ++i) v[static_cast<Index>(i)] = values[static_cast<Index>(order[i])];
            return SetSpec(FourierData{n, std::move(sorted), std::move(v)}, n, true);
        }
        return SetSpec(FourierData{n, std::move(sorted), std::move(values)}, n, true);
    }

    static SetSpec point_list(std::vector<Point> points) {
        Index n = 0;
        bool cplx = false;
        if (!points.empty()) {
            n = points.front().dim();
            cplx = points.front().is_complex();
            for (const auto& p : points)
                if (p.dim() != n || p.is_complex() != cplx)
                    throw DimensionMismatch("point_list: inhomogeneous points");
        }
        return SetSpec(PointList{std::move(points)}, n, cplx);
    }

    const Variant& variant() const { return v_; }
    Index dim() const { return n_; }
    bool complex_ambient() const { return complex_; }

    template <class T>
    bool is() const {
        return std::holds_alternative<T>(v_);
    }
    template <class T>
    const T& as() const {
        return std::get<T>(v_);
    }

    /// Projector of the affine family (exact convex-combination identities
    /// apply only to these).
    bool is_affine() const {
        return is<AffineSystem>() || is<LineThroughOrigin>() || is<AffineLine>() ||
               is<FourierData>() || (is<PointList>() && as<PointList>().points.size() == 1);
    }

    bool is_convex() const {
        if (is<Sparsity>() || is<RealSparsity>()) return false;
        if (is<PointList>()) return as<PointList>().points.size() <= 1;
        return true;
    }

    std::string kind_name() const {
        if (is<AffineSystem>()) return "affine_system";
        if (is<LineThroughOrigin>()) return "line_through_origin";
        if (is<AffineLine>()) return "affine_line";
        if (is<Sparsity>()) return "sparsity";
        if (is<RealSparsity>()) return "real_sparsity";
        if (is<FourierData>()) return "fourier_data";
        return "point_list";
    }

private:
    SetSpec(Variant v, Index n, bool cplx) : v_(std::move(v)), n_(n), complex_(cplx) {}

    Variant v_;
    Index n_;
    bool complex_;
};

namespace detail {

// Indices of the s largest magnitudes; stable order = (desc magnitude, asc index).
inline std::vector<Index> top_magnitude_indices(const RealVec& mag, Index s) {
    std::vector<Index> idx(static_cast<std::size_t>(mag.size()));
    std::iota(idx.begin(), idx.end(), Index{0});
    std::stable_sort(idx.begin(), idx.end(),
                     [&](Index a, Index b) { return mag[a] > mag[b]; });
    idx.resize(static_cast<std::size_t>(s));
    return idx;
}

inline void check_real_ambient(const SetSpec& S, const Point& x, const char* who) {
    if (S.is<SetSpec::PointList>() && S.as<SetSpec::PointList>().points.empty())
        throw rdr::EmptySet(std::string(who) + ": empty point list");
    if (x.dim() != S.dim()) throw DimensionMismatch(std::string(who) + ": dimension mismatch");
    if (x.is_complex() != S.complex_ambient())
        throw ScalarKindMismatch(std::string(who) + ": ambient scalar kind mismatch");
}

} // namespace detail

inline Point project(const SetSpec& S, const Point& x) {
    using AS = SetSpec::AffineSystem;
    using LO = SetSpec::LineThroughOrigin;
    using AL = SetSpec::AffineLine;
    using SP = SetSpec::Sparsity;
    using RS = SetSpec::RealSparsity;
    using FD = SetSpec::FourierData;
    using PL = SetSpec::PointList;

    detail::check_real_ambient(S, x, "project");

    if (S.is<AS>()) {
        const auto& a = S.as<AS>();
        const RealVec& v = x.reals();
        RealVec residual = a.pinv->matrix() * v - a.b;
        return Point(RealVec(v - a.pinv->apply(residual)));
    }
    if (S.is<LO>()) {
        const auto& l = S.as<LO>();
        return Point(RealVec(l.u * l.u.dot(x.reals())));
    }
    if (S.is<AL>()) {
        const auto& l = S.as<AL>();
        return Point(RealVec(l.p + l.u * l.u.dot(x.reals() - l.p)));
    }
    if (S.is<SP>()) {
        const auto& sp = S.as<SP>();
        const RealVec& v = x.reals();
        auto keep = detail::top_magnitude_indices(v.cwiseAbs(), sp.s);
        RealVec out = RealVec::Zero(sp.n);
        for (Index k : keep) out[k] = v[k];
        return Point(std::move(out));
    }
    if (S.is<RS>()) {
        const auto& sp = S.as<RS>();
        const CplxVec& v = x.cplx();
        RealVec re = v.real();
        auto keep = detail::top_magnitude_indices(re.cwiseAbs(), sp.s);
        CplxVec out = CplxVec::Zero(sp.n);
        for (Index k : keep) out[k] = Complex(re[k], 0.0);
        return Point(std::move(out));
    }
    if (S.is<FD>()) {
        const auto& f = S.as<FD>();
        CplxVec spectrum = dft(x.cplx(), DftDirection::Forward);
        for (std::size_t i = 0; i < f.indices.size(); ++i)
            spectrum[f.indices[i]] = f.values[static_cast<Index>(i)];
        return Point(dft(spectrum, DftDirection::Inverse));
    }
    const auto& pl = S.as<PL>();
    if (pl.points.empty()) throw rdr::EmptySet("project: empty point list");
    std::size_t best = 0;
    double best_d = dist(x, pl.points[0]);
    for (std::size_t i = 1; i < pl.points.size(); ++i) {
        const double d = dist(x, pl.points[i]);
        if (d < best_d) { // strict: ties keep the lowest index
            best = i;
            best_d = d;
        }
    }
    return pl.points[best];
}

inline double distance(const SetSpec& S, const Point& x) {
    return dist(x, project(S, x));
}

inline bool contains(const SetSpec& S, const Point& x, double tol = kMembershipTol) {
    return distance(S, x) <= tol;
}

/// All s-element supports attaining the maximal kept energy, for tie
/// enumeration in brute-force tests.  Ambient dimension capped at 20.
inline std::vector<std::vector<Index>> enumerate_sparsity_supports(const RealVec& x, Index s,
                                                                   double tie_tol = 1e-12) {
    const Index n = x.size();
    if (n > 20) throw InvalidParams("enumerate_sparsity_supports: n capped at 20");
    if (s < 1 || s > n) throw InvalidParams("enumerate_sparsity_supports: need 1 <= s <= n");
    std::vector<Index> comb(static_cast<std::size_t>(s));
    std::iota(comb.begin(), comb.end(), Index{0});
    double best = -1.0;
    std::vector<std::vector<Index>> winners;
    while (true) {
        double energy = 0.0;
        for (Index k : comb) energy += x[k] * x[k];
        if (energy > best + tie_tol) {
            best = energy;
            winners.assign(1, comb);
        } else if (energy > best - tie_tol) {
            winners.push_back(comb);
        }
        // next combination
        Index i = s - 1;
        while (i >= 0 && comb[static_cast<std::size_t>(i)] == n - s + i) --i;
        if (i < 0) break;
        ++comb[static_cast<std::size_t>(i)];
        for (Index j = i + 1; j < s; ++j)
            comb[static_cast<std::size_t>(j)] = comb[static_cast<std::size_t>(j - 1)] + 1;
    }
    return winners;
}

/// Prox catalog term: a set indicator or the l1 norm, with stepsize tau.
class ProxTerm {
public:
    static ProxTerm indicator(SetSpec S, double tau = 1.0) {
        check_tau(tau);
        return ProxTerm(std::move(S), tau);
    }
    static ProxTerm l1_norm(double tau) {
        check_tau(tau);
        return ProxTerm(std::nullopt, tau);
    }

    bool is_indicator() const { return set_.has_value(); }
    const SetSpec& set() const {
        if (!set_) throw InvalidParams("ProxTerm: l1 term has no set");
        return *set_;
    }
    double tau() const { return tau_; }

private:
    ProxTerm(std::optional<SetSpec> S, double tau) : set_(std::move(S)), tau_(tau) {}
    static void check_tau(double tau) {
        if (!(tau > 0.0)) throw InvalidStepsize("ProxTerm: stepsize must be positive");
    }

    std::optional<SetSpec> set_;
    double tau_;
};

/// Componentwise soft threshold; complex entries shrink in magnitude with
/// phase kept.
inline Point soft_threshold(const Point& x, double tau) {
    if (!(tau > 0.0)) throw InvalidStepsize("soft_threshold: stepsize must be positive");
    if (x.is_complex()) {
        CplxVec out = x.cplx();
        for (Index i = 0; i < out.size(); ++i) {
            const double m = std::abs(out[i]);
            out[i] = (m > tau) ? out[i] * ((m - tau) / m) : Complex(0.0, 0.0);
        }
        return Point(std::move(out));
    }
    RealVec out = x.reals();
    for (Index i = 0; i < out.size(); ++i) {
        const double m = std::abs(out[i]);
        out[i] = (m > tau) ? (out[i] > 0 ? m - tau : tau - m) : 0.0;
    }
    return Point(std::move(out));
}

inline Point prox(const ProxTerm& term, const Point& x) {
    if (term.is_indicator()) return project(term.set(), x); // tau-independent
    return soft_threshold(x, term.tau());
}

/// Analytic (eps, delta)-regularity violation at z in S, when the catalog
/// knows it: 0 for every convex variant; 0 for the sparsity variants at
/// full-support z once delta is below the smallest nonzero magnitude
/// (locally a coordinate subspace); 0 for point lists once delta is below
/// the gap to the nearest other point.  Absent otherwise.
inline std::optional<double> regularity_violation(const SetSpec& S, const Point& z,
                                                  double delta) {
    if (!(delta > 0.0)) throw InvalidParams("regularity_violation: delta must be positive");
    if (!contains(S, z)) throw NotOnSet("regularity_violation: z is not on the set");

    if (S.is_convex()) return 0.0;

    if (S.is<SetSpec::Sparsity>() || S.is<SetSpec::RealSparsity>()) {
        const Index s = S.is<SetSpec::Sparsity>() ? S.as<SetSpec::Sparsity>().s
                                                  : S.as<SetSpec::RealSparsity>().s;
        const RealVec v = S.is<SetSpec::Sparsity>() ? z.reals() : RealVec(z.cplx().real());
        Index support = 0;
        double min_nonzero = std::numeric_limits<double>::infinity();
        for (Index i = 0; i < v.size(); ++i) {
            if (std::abs(v[i]) > kMembershipTol) {
                ++support;
                min_nonzero = std::min(min_nonzero, std::abs(v[i]));
            }
        }
        if (support == s && delta < min_nonzero) return 0.0;
        return std::nullopt;
    }

    const auto& pl = S.as<SetSpec::PointList>();
    double gap = std::numeric_limits<double>::infinity();
    std::size_t at = 0;
    double at_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < pl.points.size(); ++i) {
        const double d = dist(z, pl.points[i]);
        if (d < at_d) {
            at = i;
            at_d = d;
        }
    }
    for (std::size_t i = 0; i < pl.points.size(); ++i)
        if (i != at) gap = std::min(gap, dist(pl.points[at], pl.points[i]));
    if (delta < gap) return 0.0;
    return std::nullopt;
}

} // namespace rdr
