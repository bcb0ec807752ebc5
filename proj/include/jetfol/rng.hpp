#pragma once

#include "scalar.hpp"

#include <cstdint>

namespace jetfol {

/// splitmix64 stream. Hand-rolled so that seeded runs reproduce bit-for-bit
/// on every platform, independent of the standard library.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next()
    {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    /// Uniform integer in [0, bound), bound >= 1.
    std::uint64_t below(std::uint64_t bound)
    {
        return std::uint64_t((static_cast<unsigned __int128>(next()) * bound) >> 64);
    }

    /// Uniform integer in [lo, hi], inclusive.
    long range(long lo, long hi) { return lo + long(below(std::uint64_t(hi - lo + 1))); }

    /// Rational with numerator in [-9,9] and denominator in [1,9].
    mpq_class rational()
    {
        mpq_class q(range(-9, 9), range(1, 9));
        q.canonicalize();
        return q;
    }

    mpq_class nonzero_rational()
    {
        for (;;) {
            mpq_class q = rational();
            if (sgn(q) != 0)
                return q;
        }
    }

    /// Rational from a wide range, for samples that must stay clear of
    /// proper subvarieties (numerator in [-999, 999], denominator in [1, 99]).
    mpq_class wide_rational()
    {
        mpq_class q(range(-999, 999), range(1, 99));
        q.canonicalize();
        return q;
    }

    mpq_class wide_nonzero_rational()
    {
        for (;;) {
            mpq_class q = wide_rational();
            if (sgn(q) != 0)
                return q;
        }
    }

    GaussianRational scalar() { return {rational()}; }
    GaussianRational nonzero_scalar() { return {nonzero_rational()}; }

    double uniform() { return double(next() >> 11) * 0x1.0p-53; }

    /// Complex double in the square [-1,1] x [-1,1]i.
    std::complex<double> complex_box() { return {2.0 * uniform() - 1.0, 2.0 * uniform() - 1.0}; }

  private:
    std::uint64_t state_;
};

} // namespace jetfol
