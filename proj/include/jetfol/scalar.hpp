#pragma once

#include <complex>
#include <cstdint>
#include <gmpxx.h>
#include <stdexcept>
#include <string>

namespace jetfol {

struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Exact scalar: element of Q(i), stored as a pair of arbitrary-precision
/// rationals. All arithmetic is exact; there is no implicit rounding anywhere.
struct GaussianRational {
    mpq_class re, im;

    GaussianRational() : re(0), im(0) {}
    GaussianRational(long v) : re(v), im(0) {}
    GaussianRational(mpq_class r) : re(std::move(r)), im(0) {}
    GaussianRational(mpq_class r, mpq_class i) : re(std::move(r)), im(std::move(i)) {}

    static GaussianRational fraction(long num, long den)
    {
        if (den == 0)
            throw error("GaussianRational: zero denominator");
        mpq_class q(num, den);
        q.canonicalize();
        return GaussianRational(q);
    }

    bool is_zero() const { return sgn(re) == 0 && sgn(im) == 0; }

    GaussianRational conj() const { return {re, -im}; }

    /// |z|^2 as a rational.
    mpq_class norm() const { return re * re + im * im; }

    GaussianRational inverse() const
    {
        if (is_zero())
            throw error("GaussianRational: division by zero");
        mpq_class n = norm();
        return {re / n, -im / n};
    }

    std::complex<double> to_complex() const { return {re.get_d(), im.get_d()}; }

    std::string str() const
    {
        if (sgn(im) == 0)
            return re.get_str();
        return re.get_str() + (sgn(im) >= 0 ? "+" : "") + im.get_str() + "i";
    }

    friend GaussianRational operator+(const GaussianRational& a, const GaussianRational& b)
    {
        return {a.re + b.re, a.im + b.im};
    }
    friend GaussianRational operator-(const GaussianRational& a, const GaussianRational& b)
    {
        return {a.re - b.re, a.im - b.im};
    }
    friend GaussianRational operator-(const GaussianRational& a) { return {-a.re, -a.im}; }
    friend GaussianRational operator*(const GaussianRational& a, const GaussianRational& b)
    {
        return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
    }
    friend GaussianRational operator/(const GaussianRational& a, const GaussianRational& b)
    {
        return a * b.inverse();
    }
    GaussianRational& operator+=(const GaussianRational& b) { return *this = *this + b; }
    GaussianRational& operator-=(const GaussianRational& b) { return *this = *this - b; }
    GaussianRational& operator*=(const GaussianRational& b) { return *this = *this * b; }
    GaussianRational& operator/=(const GaussianRational& b) { return *this = *this / b; }
    friend bool operator==(const GaussianRational& a, const GaussianRational& b)
    {
        return a.re == b.re && a.im == b.im;
    }
    friend bool operator!=(const GaussianRational& a, const GaussianRational& b) { return !(a == b); }
};

/// Uniform access to the two coefficient fields (exact and floating).
template <class K> struct field_traits;

template <> struct field_traits<GaussianRational> {
    static constexpr bool exact = true;
    static GaussianRational zero() { return {}; }
    static GaussianRational one() { return {1}; }
    static GaussianRational from_int(long v) { return {v}; }
    static GaussianRational from_fraction(long n, long d) { return GaussianRational::fraction(n, d); }
    static bool is_zero(const GaussianRational& x) { return x.is_zero(); }
    static std::complex<double> to_complex(const GaussianRational& x) { return x.to_complex(); }
    static double pivot_size(const GaussianRational& x) { return x.is_zero() ? 0.0 : 1.0; }
    static std::string str(const GaussianRational& x) { return x.str(); }
};

template <> struct field_traits<std::complex<double>> {
    static constexpr bool exact = false;
    static std::complex<double> zero() { return {}; }
    static std::complex<double> one() { return {1.0, 0.0}; }
    static std::complex<double> from_int(long v) { return {double(v), 0.0}; }
    static std::complex<double> from_fraction(long n, long d) { return {double(n) / double(d), 0.0}; }
    static bool is_zero(const std::complex<double>& x) { return x == std::complex<double>{}; }
    static std::complex<double> to_complex(const std::complex<double>& x) { return x; }
    static double pivot_size(const std::complex<double>& x) { return std::abs(x); }
    static std::string str(const std::complex<double>& x)
    {
        return "(" + std::to_string(x.real()) + "," + std::to_string(x.imag()) + ")";
    }
};

} // namespace jetfol
