#pragma once

#include "multi_index.hpp"
#include "scalar.hpp"

#include <complex>
#include <span>
#include <sstream>
#include <vector>

namespace jetfol {

/// Dense multivariate power series truncated at a total degree. The `order`
/// is the highest total degree the series is valid through; every arithmetic
/// operation records the valid order of its result (min of the operands for
/// ring operations, one less per differentiation).
template <class K> class TruncatedSeries {
  public:
    using traits = field_traits<K>;

    TruncatedSeries() : nvars_(1), order_(0), c_(1, traits::zero()) {}

    TruncatedSeries(int nvars, int order)
        : nvars_(nvars), order_(order),
          c_(std::size_t(monomial_count(nvars, order)), traits::zero())
    {
        if (nvars < 1 || nvars > kMaxVars || order < 0)
            throw error("TruncatedSeries: bad dimensions");
    }

    static TruncatedSeries zero(int nvars, int order) { return TruncatedSeries(nvars, order); }

    static TruncatedSeries constant(int nvars, int order, K v)
    {
        TruncatedSeries s(nvars, order);
        s.c_[0] = std::move(v);
        return s;
    }

    /// The coordinate function x_var.
    static TruncatedSeries variable(int nvars, int order, int var)
    {
        return monomial(nvars, order, MultiIndex::unit(nvars, var), traits::one());
    }

    static TruncatedSeries monomial(int nvars, int order, const MultiIndex& m, K v)
    {
        TruncatedSeries s(nvars, order);
        if (m.degree() > order)
            throw error("TruncatedSeries: monomial degree above truncation order");
        s.c_[std::size_t(s.table().position(m))] = std::move(v);
        return s;
    }

    int num_vars() const { return nvars_; }
    int order() const { return order_; }
    const IndexTable& table() const { return index_table(nvars_, order_); }

    const K& coeff_at(int pos) const { return c_[std::size_t(pos)]; }

    const K& coeff(const MultiIndex& m) const
    {
        if (m.degree() > order_)
            throw error("TruncatedSeries: coefficient above truncation order");
        return c_[std::size_t(table().position(m))];
    }

    void set_coeff(const MultiIndex& m, K v)
    {
        if (m.degree() > order_)
            throw error("TruncatedSeries: coefficient above truncation order");
        c_[std::size_t(table().position(m))] = std::move(v);
    }

    void add_coeff(const MultiIndex& m, const K& v)
    {
        c_[std::size_t(table().position(m))] += v;
    }

    const K& constant_term() const { return c_[0]; }

    bool is_zero() const
    {
        for (const K& v : c_)
            if (!traits::is_zero(v))
                return false;
        return true;
    }

    /// Largest total degree with a nonzero coefficient; -1 for the zero series.
    int top_degree() const
    {
        const IndexTable& t = table();
        for (int p = t.count() - 1; p >= 0; --p)
            if (!traits::is_zero(c_[std::size_t(p)]))
                return t.at(p).degree();
        return -1;
    }

    /// Copy with the truncation order lowered to new_order.
    TruncatedSeries truncated(int new_order) const
    {
        if (new_order >= order_)
            return *this;
        TruncatedSeries r(nvars_, new_order);
        for (int p = 0; p < r.table().count(); ++p)
            r.c_[std::size_t(p)] = c_[std::size_t(p)];
        return r;
    }

    friend TruncatedSeries operator+(const TruncatedSeries& a, const TruncatedSeries& b)
    {
        return a.combined(b, false);
    }
    friend TruncatedSeries operator-(const TruncatedSeries& a, const TruncatedSeries& b)
    {
        return a.combined(b, true);
    }
    friend TruncatedSeries operator-(const TruncatedSeries& a)
    {
        TruncatedSeries r = a;
        for (K& v : r.c_)
            v = -v;
        return r;
    }

    TruncatedSeries& operator+=(const TruncatedSeries& b) { return *this = *this + b; }
    TruncatedSeries& operator-=(const TruncatedSeries& b) { return *this = *this - b; }
    TruncatedSeries& operator*=(const TruncatedSeries& b) { return *this = *this * b; }

    friend TruncatedSeries operator*(const TruncatedSeries& a, const TruncatedSeries& b)
    {
        if (a.nvars_ != b.nvars_)
            throw error("series_mul: variable-count mismatch");
        int ord = std::min(a.order_, b.order_);
        TruncatedSeries r(a.nvars_, ord);
        const IndexTable& ta = a.table();
        const IndexTable& tb = b.table();
        const IndexTable& tr = r.table();
        for (int pa = 0; pa < ta.count(); ++pa) {
            if (traits::is_zero(a.c_[std::size_t(pa)]))
                continue;
            const MultiIndex& ia = ta.at(pa);
            int da = ia.degree();
            if (da > ord)
                break;
            for (int pb = 0; pb < tb.count(); ++pb) {
                if (traits::is_zero(b.c_[std::size_t(pb)]))
                    continue;
                const MultiIndex& ib = tb.at(pb);
                if (da + ib.degree() > ord)
                    break;
                r.c_[std::size_t(tr.position(ia.plus(ib)))] +=
                    a.c_[std::size_t(pa)] * b.c_[std::size_t(pb)];
            }
        }
        return r;
    }

    friend TruncatedSeries operator*(const K& s, const TruncatedSeries& a)
    {
        TruncatedSeries r = a;
        for (K& v : r.c_)
            v = s * v;
        return r;
    }

    /// Coefficients compared through the smaller of the two truncation
    /// orders; beyond its recorded order a series carries no information.
    friend bool operator==(const TruncatedSeries& a, const TruncatedSeries& b)
    {
        if (a.nvars_ != b.nvars_)
            return false;
        int count = monomial_count(a.nvars_, std::min(a.order_, b.order_));
        for (int p = 0; p < count; ++p)
            if (!(a.c_[std::size_t(p)] == b.c_[std::size_t(p)]))
                return false;
        return true;
    }

    /// Formal partial derivative; the result is valid through order - 1.
    TruncatedSeries diff(int var) const
    {
        if (var < 0 || var >= nvars_)
            throw error("series_diff: variable index out of range");
        int ord = order_ > 0 ? order_ - 1 : 0;
        TruncatedSeries r(nvars_, ord);
        if (order_ == 0)
            return r;
        const IndexTable& t = table();
        const IndexTable& tr = r.table();
        for (int p = 0; p < t.count(); ++p) {
            if (traits::is_zero(c_[std::size_t(p)]))
                continue;
            const MultiIndex& m = t.at(p);
            int k = m[var];
            if (k == 0)
                continue;
            MultiIndex down = m.minus(MultiIndex::unit(nvars_, var));
            r.c_[std::size_t(tr.position(down))] += traits::from_int(k) * c_[std::size_t(p)];
        }
        return r;
    }

    /// Substitution f(g_1, ..., g_n). Every g_i must vanish at the origin so
    /// that the truncated composite is well defined.
    TruncatedSeries compose(std::span<const TruncatedSeries> args) const
    {
        if (int(args.size()) != nvars_)
            throw error("series_compose: wrong number of substituted series");
        int m = args[0].nvars_;
        int ord = order_;
        for (const TruncatedSeries& g : args) {
            if (g.nvars_ != m)
                throw error("series_compose: substituted series variable mismatch");
            if (!traits::is_zero(g.constant_term()))
                throw error("series_compose: substituted series has nonzero constant term");
            ord = std::min(ord, g.order_);
        }
        TruncatedSeries r(m, ord);
        r.c_[0] = c_[0];
        const IndexTable& t = table();
        // powers[p] = g^{i(p)}, built from a lower neighbour; valuation >= |i|.
        std::vector<TruncatedSeries> powers(std::size_t(t.count()));
        std::vector<char> have(std::size_t(t.count()), 0);
        powers[0] = constant(m, ord, traits::one());
        have[0] = 1;
        for (int p = 1; p < t.count(); ++p) {
            const MultiIndex& mi = t.at(p);
            if (mi.degree() > ord)
                break;
            int var = 0;
            while (mi[var] == 0)
                ++var;
            int prev = t.position(mi.minus(MultiIndex::unit(nvars_, var)));
            powers[std::size_t(p)] = powers[std::size_t(prev)] * args[std::size_t(var)];
            have[std::size_t(p)] = 1;
            if (!traits::is_zero(c_[std::size_t(p)]))
                r += c_[std::size_t(p)] * powers[std::size_t(p)];
        }
        return r;
    }

    TruncatedSeries compose(const std::vector<TruncatedSeries>& args) const
    {
        return compose(std::span<const TruncatedSeries>(args.data(), args.size()));
    }

    /// Multiplicative inverse; requires an invertible constant term.
    TruncatedSeries reciprocal() const
    {
        if (traits::is_zero(c_[0]))
            throw error("series reciprocal: zero constant term");
        K inv0 = traits::one() / c_[0];
        TruncatedSeries r(nvars_, order_);
        const IndexTable& t = table();
        r.c_[0] = inv0;
        for (int p = 1; p < t.count(); ++p) {
            const MultiIndex& mi = t.at(p);
            K acc = traits::zero();
            for (int q = 1; q <= p; ++q) {
                if (traits::is_zero(c_[std::size_t(q)]))
                    continue;
                const MultiIndex& mj = t.at(q);
                if (!mj.leq(mi))
                    continue;
                acc += c_[std::size_t(q)] * r.c_[std::size_t(t.position(mi.minus(mj)))];
            }
            r.c_[std::size_t(p)] = -(inv0 * acc);
        }
        return r;
    }

    template <class C> C evaluate(std::span<const C> point) const
    {
        if (int(point.size()) != nvars_)
            throw error("series evaluate: wrong point dimension");
        const IndexTable& t = table();
        C acc{};
        for (int p = 0; p < t.count(); ++p) {
            if (traits::is_zero(c_[std::size_t(p)]))
                continue;
            const MultiIndex& m = t.at(p);
            C term = traits::to_complex(c_[std::size_t(p)]);
            for (int v = 0; v < nvars_; ++v)
                for (int k = 0; k < m[v]; ++k)
                    term *= point[std::size_t(v)];
            acc += term;
        }
        return acc;
    }

    std::string str() const
    {
        std::ostringstream os;
        const IndexTable& t = table();
        bool first = true;
        for (int p = 0; p < t.count(); ++p) {
            if (traits::is_zero(c_[std::size_t(p)]))
                continue;
            if (!first)
                os << " + ";
            first = false;
            os << traits::str(c_[std::size_t(p)]);
            const MultiIndex& m = t.at(p);
            for (int v = 0; v < nvars_; ++v)
                if (m[v] > 0) {
                    os << "*x" << v + 1;
                    if (m[v] > 1)
                        os << "^" << m[v];
                }
        }
        if (first)
            os << "0";
        return os.str();
    }

  private:
    TruncatedSeries combined(const TruncatedSeries& b, bool negate) const
    {
        if (nvars_ != b.nvars_)
            throw error("series add: variable-count mismatch");
        int ord = std::min(order_, b.order_);
        TruncatedSeries r(nvars_, ord);
        int count = r.table().count();
        for (int p = 0; p < count; ++p)
            r.c_[std::size_t(p)] =
                negate ? c_[std::size_t(p)] - b.c_[std::size_t(p)] : c_[std::size_t(p)] + b.c_[std::size_t(p)];
        return r;
    }

    int nvars_;
    int order_;
    std::vector<K> c_;
};

/// Compositional inverse of a tuple of series fixing the origin with
/// invertible linear part: returns h with g(h(x)) = x through the shared
/// truncation order.
template <class K>
std::vector<TruncatedSeries<K>> invert_map(const std::vector<TruncatedSeries<K>>& g);

} // namespace jetfol
