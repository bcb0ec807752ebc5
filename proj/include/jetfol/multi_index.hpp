#pragma once

#include "scalar.hpp"

#include <array>
#include <cstdint>
#include <map>
#include <mutex>
#include <vector>

namespace jetfol {

inline constexpr int kMaxVars = 8;

/// Exponent vector of a monomial. Compared in graded-lex order: total degree
/// first, then lexicographically on the entries.
struct MultiIndex {
    std::array<std::uint8_t, kMaxVars> e{};
    std::uint8_t n = 0;

    MultiIndex() = default;
    explicit MultiIndex(int nvars) : n(std::uint8_t(nvars)) {}

    int size() const { return n; }
    int operator[](int i) const { return e[std::size_t(i)]; }
    void set(int i, int v) { e[std::size_t(i)] = std::uint8_t(v); }

    int degree() const
    {
        int s = 0;
        for (int i = 0; i < n; ++i)
            s += e[std::size_t(i)];
        return s;
    }

    static MultiIndex unit(int nvars, int var)
    {
        MultiIndex m(nvars);
        m.set(var, 1);
        return m;
    }

    MultiIndex plus(const MultiIndex& o) const
    {
        MultiIndex r(n);
        for (int i = 0; i < n; ++i)
            r.e[std::size_t(i)] = std::uint8_t(e[std::size_t(i)] + o.e[std::size_t(i)]);
        return r;
    }

    /// Componentwise difference; caller guarantees o <= *this.
    MultiIndex minus(const MultiIndex& o) const
    {
        MultiIndex r(n);
        for (int i = 0; i < n; ++i)
            r.e[std::size_t(i)] = std::uint8_t(e[std::size_t(i)] - o.e[std::size_t(i)]);
        return r;
    }

    bool leq(const MultiIndex& o) const
    {
        for (int i = 0; i < n; ++i)
            if (e[std::size_t(i)] > o.e[std::size_t(i)])
                return false;
        return true;
    }

    /// i! = prod_k (i_k)!
    long long factorial() const
    {
        long long f = 1;
        for (int i = 0; i < n; ++i)
            for (int v = 2; v <= e[std::size_t(i)]; ++v)
                f *= v;
        return f;
    }

    /// binom(*this, j) = prod_k C(i_k, j_k); zero unless j <= *this.
    long long binom(const MultiIndex& j) const
    {
        long long b = 1;
        for (int k = 0; k < n; ++k) {
            int ik = e[std::size_t(k)], jk = j.e[std::size_t(k)];
            if (jk > ik)
                return 0;
            long long c = 1;
            for (int t = 0; t < jk; ++t)
                c = c * (ik - t) / (t + 1);
            b *= c;
        }
        return b;
    }

    bool operator==(const MultiIndex& o) const
    {
        if (n != o.n)
            return false;
        for (int i = 0; i < n; ++i)
            if (e[std::size_t(i)] != o.e[std::size_t(i)])
                return false;
        return true;
    }

    /// Graded-lex order.
    bool operator<(const MultiIndex& o) const
    {
        int da = degree(), db = o.degree();
        if (da != db)
            return da < db;
        for (int i = 0; i < n; ++i)
            if (e[std::size_t(i)] != o.e[std::size_t(i)])
                return e[std::size_t(i)] < o.e[std::size_t(i)];
        return false;
    }
};

namespace detail {

inline long long binom_ll(int n, int k)
{
    if (k < 0 || k > n)
        return 0;
    long long r = 1;
    for (int t = 0; t < k; ++t)
        r = r * (n - t) / (t + 1);
    return r;
}

} // namespace detail

/// Number of monomials in `nvars` variables of total degree <= deg.
inline int monomial_count(int nvars, int deg)
{
    return int(detail::binom_ll(deg + nvars, nvars));
}

/// All multi-indices in `nvars` variables of degree <= order, in graded-lex
/// order, together with O(nvars) rank lookup.
class IndexTable {
  public:
    IndexTable(int nvars, int order) : nvars_(nvars), order_(order)
    {
        list_.reserve(std::size_t(monomial_count(nvars, order)));
        MultiIndex m(nvars);
        for (int d = 0; d <= order; ++d)
            enumerate(m, 0, d);
    }

    int nvars() const { return nvars_; }
    int order() const { return order_; }
    int count() const { return int(list_.size()); }
    const MultiIndex& at(int pos) const { return list_[std::size_t(pos)]; }
    const std::vector<MultiIndex>& all() const { return list_; }

    /// Graded-lex rank; valid for degree(m) <= order.
    int position(const MultiIndex& m) const
    {
        int d = m.degree();
        long long rank = detail::binom_ll(d - 1 + nvars_, nvars_);
        int rem = d;
        for (int k = 0; k + 1 < nvars_; ++k) {
            int mvars = nvars_ - k - 1;
            for (int v = 0; v < m[k]; ++v)
                rank += detail::binom_ll(rem - v + mvars - 1, mvars - 1);
            rem -= m[k];
        }
        return int(rank);
    }

  private:
    void enumerate(MultiIndex& m, int var, int remaining)
    {
        if (var == nvars_ - 1) {
            m.set(var, remaining);
            list_.push_back(m);
            return;
        }
        for (int v = 0; v <= remaining; ++v) {
            m.set(var, v);
            enumerate(m, var + 1, remaining - v);
        }
        m.set(var, 0);
    }

    int nvars_;
    int order_;
    std::vector<MultiIndex> list_;
};

/// Shared table registry. Tables are immutable once built.
inline const IndexTable& index_table(int nvars, int order)
{
    static std::map<std::pair<int, int>, IndexTable> cache;
    static std::mutex mu;
    std::lock_guard<std::mutex> lock(mu);
    auto key = std::make_pair(nvars, order);
    auto it = cache.find(key);
    if (it == cache.end())
        it = cache.emplace(key, IndexTable(nvars, order)).first;
    return it->second;
}

} // namespace jetfol
