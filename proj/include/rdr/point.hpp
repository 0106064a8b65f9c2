#pragma once

#include <Eigen/Dense>
#include <complex>
#include <variant>

#include "rdr/errors.hpp"

namespace rdr {

using Complex = std::complex<double>;
using RealVec = Eigen::VectorXd;
using CplxVec = Eigen::VectorXcd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

/// Ambient iterate: a finite-dimensional real or complex vector.
/// Real and complex points never mix silently; promotion is explicit
/// via to_complex().  Entries are validated finite on construction.
class Point {
public:
    explicit Point(RealVec v) : data_(std::move(v)) { validate(); }
    explicit Point(CplxVec v) : data_(std::move(v)) { validate(); }

    static Point zeros(Index n, bool complex_ambient = false) {
        if (n <= 0) throw InvalidParams("Point: dimension must be positive");
        if (complex_ambient) return Point(CplxVec(CplxVec::Zero(n)));
        return Point(RealVec(RealVec::Zero(n)));
    }

    Index dim() const {
        return std::visit([](const auto& v) { return v.size(); }, data_);
    }

    bool is_complex() const { return std::holds_alternative<CplxVec>(data_); }

    const RealVec& reals() const {
        if (is_complex()) throw ScalarKindMismatch("Point: complex point has no real view");
        return std::get<RealVec>(data_);
    }

    const CplxVec& cplx() const {
        if (!is_complex()) throw ScalarKindMismatch("Point: real point has no complex view");
        return std::get<CplxVec>(data_);
    }

    /// Explicit promotion to the complex ambient space.
    Point to_complex() const {
        if (is_complex()) return *this;
        return Point(CplxVec(reals().cast<Complex>()));
    }

    /// Componentwise real parts, as a real point.
    Point real_part() const {
        if (!is_complex()) return *this;
        return Point(RealVec(cplx().real()));
    }

    double norm() const {
        return std::visit([](const auto& v) { return v.norm(); }, data_);
    }

    double squared_norm() const {
        return std::visit([](const auto& v) { return v.squaredNorm(); }, data_);
    }

    double inf_norm() const {
        return std::visit([](const auto& v) { return v.template lpNorm<Eigen::Infinity>(); }, data_);
    }

    friend Point operator+(const Point& a, const Point& b) {
        check_compatible(a, b);
        if (a.is_complex()) return Point(CplxVec(a.cplx() + b.cplx()));
        return Point(RealVec(a.reals() + b.reals()));
    }

    friend Point operator-(const Point& a, const Point& b) {
        check_compatible(a, b);
        if (a.is_complex()) return Point(CplxVec(a.cplx() - b.cplx()));
        return Point(RealVec(a.reals() - b.reals()));
    }

    friend Point operator*(double s, const Point& a) {
        if (a.is_complex()) return Point(CplxVec(s * a.cplx()));
        return Point(RealVec(s * a.reals()));
    }

    friend double dist(const Point& a, const Point& b) { return (a - b).norm(); }

    /// Real inner product Re<a, b>; the Euclidean structure used throughout.
    friend double inner_real(const Point& a, const Point& b) {
        check_compatible(a, b);
        if (a.is_complex()) return a.cplx().dot(b.cplx()).real();
        return a.reals().dot(b.reals());
    }

    friend bool operator==(const Point& a, const Point& b) {
        if (a.is_complex() != b.is_complex() || a.dim() != b.dim()) return false;
        if (a.is_complex()) return a.cplx() == b.cplx();
        return a.reals() == b.reals();
    }

    /// Number of entries with magnitude strictly above atol.
    Index count_nonzeros(double atol = 0.0) const {
        return std::visit(
            [atol](const auto& v) {
                Index c = 0;
                for (Index i = 0; i < v.size(); ++i)
                    if (std::abs(v[i]) > atol) ++c;
                return c;
            },
            data_);
    }

private:
    void validate() const {
        bool ok = std::visit([](const auto& v) { return v.allFinite(); }, data_);
        if (!ok) throw NonFinite("Point: non-finite entry");
        if (dim() <= 0) throw InvalidParams("Point: dimension must be positive");
    }

    static void check_compatible(const Point& a, const Point& b) {
        if (a.is_complex() != b.is_complex())
            throw ScalarKindMismatch("Point: real/complex mix requires explicit promotion");
        if (a.dim() != b.dim()) throw DimensionMismatch("Point: dimension mismatch");
    }

    std::variant<RealVec, CplxVec> data_;
};

} // namespace rdr
