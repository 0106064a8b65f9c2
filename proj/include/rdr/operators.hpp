#pragma once

#include "rdr/sets.hpp"

namespace rdr {

/// lambda-reflector (1+lambda) P_S - lambda id.  lambda=0 is the projector,
/// lambda=1 the classical reflection.
inline Point reflect(const SetSpec& S, double lambda, const Point& x) {
    if (lambda < 0.0 || lambda > 1.0) throw InvalidParams("reflect: lambda in [0,1]");
    return (1.0 + lambda) * project(S, x) - lambda * x;
}

/// Fixed-point map over two sets or two prox terms.  The inner operator
/// (B, or f2) is applied first; the order is part of the definition.
class OperatorSpec {
public:
    struct TLambda {
        SetSpec A; // outer
        SetSpec B; // inner
        double lambda;
    };
    struct Raar {
        SetSpec A;
        SetSpec B;
        double beta;
    };
    struct ProxTLambda {
        ProxTerm f1; // outer
        ProxTerm f2; // inner
        double lambda;
    };

    static OperatorSpec t_lambda(SetSpec A, SetSpec B, double lambda) {
        if (lambda < 0.0 || lambda > 1.0) throw InvalidParams("t_lambda: lambda in [0,1]");
        check_pair(A, B);
        return OperatorSpec(TLambda{std::move(A), std::move(B), lambda});
    }

    static OperatorSpec raar(SetSpec A, SetSpec B, double beta) {
        if (!(beta > 0.0 && beta < 1.0)) throw InvalidParams("raar: beta in (0,1)");
        check_pair(A, B);
        return OperatorSpec(Raar{std::move(A), std::move(B), beta});
    }

    static OperatorSpec prox_t_lambda(ProxTerm f1, ProxTerm f2, double lambda) {
        if (lambda < 0.0 || lambda > 1.0)
            throw InvalidParams("prox_t_lambda: lambda in [0,1]");
        return OperatorSpec(ProxTLambda{std::move(f1), std::move(f2), lambda});
    }

    template <class T>
    bool is() const {
        return std::holds_alternative<T>(v_);
    }
    template <class T>
    const T& as() const {
        return std::get<T>(v_);
    }

    bool is_alternating_projections() const {
        return is<TLambda>() && as<TLambda>().lambda == 0.0;
    }
    bool is_douglas_rachford() const {
        return is<TLambda>() && as<TLambda>().lambda == 1.0;
    }

    bool binds_sets() const { return !is<ProxTLambda>(); }

    const SetSpec& outer_set() const {
        if (is<TLambda>()) return as<TLambda>().A;
        if (is<Raar>()) return as<Raar>().A;
        throw InvalidParams("OperatorSpec: prox operator binds no sets");
    }

    const SetSpec& inner_set() const {
        if (is<TLambda>()) return as<TLambda>().B;
        if (is<Raar>()) return as<Raar>().B;
        throw InvalidParams("OperatorSpec: prox operator binds no sets");
    }

    std::string describe() const {
        char buf[64];
        if (is<TLambda>()) {
            std::snprintf(buf, sizeof buf, "t_lambda(lambda=%g)", as<TLambda>().lambda);
        } else if (is<Raar>()) {
            std::snprintf(buf, sizeof buf, "raar(beta=%g)", as<Raar>().beta);
        } else {
            std::snprintf(buf, sizeof buf, "prox_t_lambda(lambda=%g)",
                          as<ProxTLambda>().lambda);
        }
        return buf;
    }

    /// The lambda=1 operator on the same pair, used by warm-up.
    OperatorSpec douglas_rachford_variant() const {
        if (is<TLambda>()) {
            const auto& t = as<TLambda>();
            return t_lambda(t.A, t.B, 1.0);
        }
        if (is<Raar>()) {
            const auto& r = as<Raar>();
            return t_lambda(r.A, r.B, 1.0);
        }
        const auto& p = as<ProxTLambda>();
        return prox_t_lambda(p.f1, p.f2, 1.0);
    }

private:
    using Variant = std::variant<TLambda, Raar, ProxTLambda>;
    explicit OperatorSpec(Variant v) : v_(std::move(v)) {}

    static void check_pair(const SetSpec& A, const SetSpec& B) {
        if (A.dim() != B.dim())
            throw DimensionMismatch("OperatorSpec: set dimensions differ");
        if (A.complex_ambient() != B.complex_ambient())
            throw ScalarKindMismatch("OperatorSpec: set ambient kinds differ");
    }

    Variant v_;
};

namespace detail {

inline Point prox_inner(const OperatorSpec::ProxTLambda& op, const Point& x) {
    return prox(op.f2, x);
}

} // namespace detail

/// One application of the operator.  One projection onto the inner set per
/// step: P_B x is reused for the reflector argument and the -lambda(P_B x - x)
/// term.
inline Point step(const OperatorSpec& op, const Point& x) {
    if (op.is<OperatorSpec::TLambda>()) {
        const auto& t = op.as<OperatorSpec::TLambda>();
        const double lam = t.lambda;
        Point pb = project(t.B, x);
        Point y = (1.0 + lam) * pb - lam * x;
        return project(t.A, y) - lam * (pb - x);
    }
    if (op.is<OperatorSpec::Raar>()) {
        const auto& r = op.as<OperatorSpec::Raar>();
        Point pb = project(r.B, x);
        Point pa = project(r.A, 2.0 * pb - x);
        return r.beta * pa + (1.0 - 2.0 * r.beta) * pb + r.beta * x;
    }
    const auto& p = op.as<OperatorSpec::ProxTLambda>();
    const double lam = p.lambda;
    Point t2 = detail::prox_inner(p, x);
    Point y = (1.0 + lam) * t2 - lam * x;
    return prox(p.f1, y) - lam * (t2 - x);
}

/// R_{P_A,lambda} o R_{P_B,lambda}; equals (1+lambda) step - lambda id.
inline Point composed_reflector_step(const OperatorSpec& op, const Point& x) {
    if (!op.is<OperatorSpec::TLambda>())
        throw InvalidParams("composed_reflector_step: t_lambda operator required");
    const auto& t = op.as<OperatorSpec::TLambda>();
    return reflect(t.A, t.lambda, reflect(t.B, t.lambda, x));
}

/// (1-lambda) T_0 x + lambda T_1 x.  Coincides with step exactly when the
/// outer projector is affine.
inline Point convex_combination_step(const SetSpec& A, const SetSpec& B, double lambda,
                                     const Point& x) {
    if (!A.is_affine())
        throw NotAffine("convex_combination_step: outer set must be affine");
    Point ap = step(OperatorSpec::t_lambda(A, B, 0.0), x);
    Point dr = step(OperatorSpec::t_lambda(A, B, 1.0), x);
    return (1.0 - lambda) * ap + lambda * dr;
}

} // namespace rdr
