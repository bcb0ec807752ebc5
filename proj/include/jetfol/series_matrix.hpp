#pragma once

#include "linalg.hpp"
#include "series.hpp"

namespace jetfol {

/// Rectangular matrix of truncated series sharing variable count and order.
template <class K> struct SeriesMatrix {
    using Series = TruncatedSeries<K>;
    using traits = field_traits<K>;

    int rows = 0, cols = 0;
    std::vector<Series> e;

    SeriesMatrix() = default;
    SeriesMatrix(int r, int c, int nvars, int order)
        : rows(r), cols(c), e(std::size_t(r) * std::size_t(c), Series::zero(nvars, order))
    {
    }

    static SeriesMatrix identity(int n, int nvars, int order)
    {
        SeriesMatrix m(n, n, nvars, order);
        for (int i = 0; i < n; ++i)
            m(i, i) = Series::constant(nvars, order, traits::one());
        return m;
    }

    /// Lift a constant matrix into the series ring.
    static SeriesMatrix constant(const Mat<K>& m, int nvars, int order)
    {
        SeriesMatrix r(m.rows, m.cols, nvars, order);
        for (int i = 0; i < m.rows; ++i)
            for (int j = 0; j < m.cols; ++j)
                r(i, j) = Series::constant(nvars, order, m(i, j));
        return r;
    }

    Series& operator()(int i, int j) { return e[std::size_t(i) * std::size_t(cols) + std::size_t(j)]; }
    const Series& operator()(int i, int j) const
    {
        return e[std::size_t(i) * std::size_t(cols) + std::size_t(j)];
    }

    int num_vars() const { return e.empty() ? 0 : e[0].num_vars(); }
    int order() const
    {
        int o = e.empty() ? 0 : e[0].order();
        for (const Series& s : e)
            o = std::min(o, s.order());
        return o;
    }

    bool is_zero() const
    {
        for (const Series& s : e)
            if (!s.is_zero())
                return false;
        return true;
    }

    /// Constant term as a plain matrix.
    Mat<K> at_origin() const
    {
        Mat<K> m(rows, cols);
        for (int i = 0; i < rows; ++i)
            for (int j = 0; j < cols; ++j)
                m(i, j) = (*this)(i, j).constant_term();
        return m;
    }

    SeriesMatrix transpose() const
    {
        SeriesMatrix t(cols, rows, num_vars(), order());
        for (int i = 0; i < rows; ++i)
            for (int j = 0; j < cols; ++j)
                t(j, i) = (*this)(i, j);
        return t;
    }

    Series trace() const
    {
        Series s = Series::zero(num_vars(), order());
        for (int i = 0; i < rows && i < cols; ++i)
            s += (*this)(i, i);
        return s;
    }

    SeriesMatrix map(auto&& f) const
    {
        SeriesMatrix r = *this;
        for (Series& s : r.e)
            s = f(s);
        return r;
    }

    SeriesMatrix diff(int var) const
    {
        return map([&](const Series& s) { return s.diff(var); });
    }

    friend SeriesMatrix operator+(const SeriesMatrix& x, const SeriesMatrix& y)
    {
        SeriesMatrix r = x;
        for (std::size_t i = 0; i < r.e.size(); ++i)
            r.e[i] = r.e[i] + y.e[i];
        return r;
    }

    friend SeriesMatrix operator-(const SeriesMatrix& x, const SeriesMatrix& y)
    {
        SeriesMatrix r = x;
        for (std::size_t i = 0; i < r.e.size(); ++i)
            r.e[i] = r.e[i] - y.e[i];
        return r;
    }

    friend SeriesMatrix operator-(const SeriesMatrix& x)
    {
        SeriesMatrix r = x;
        for (auto& s : r.e)
            s = -s;
        return r;
    }

    friend SeriesMatrix operator*(const SeriesMatrix& x, const SeriesMatrix& y)
    {
        if (x.cols != y.rows)
            throw error("SeriesMatrix: dimension mismatch in product");
        SeriesMatrix r(x.rows, y.cols, x.num_vars(), std::min(x.order(), y.order()));
        for (int i = 0; i < x.rows; ++i)
            for (int k = 0; k < x.cols; ++k) {
                if (x(i, k).is_zero())
                    continue;
                for (int j = 0; j < y.cols; ++j) {
                    if (y(k, j).is_zero())
                        continue;
                    r(i, j) += x(i, k) * y(k, j);
                }
            }
        return r;
    }

    friend SeriesMatrix operator*(const Series& s, const SeriesMatrix& x)
    {
        SeriesMatrix r = x;
        for (auto& v : r.e)
            v = s * v;
        return r;
    }

    friend bool operator==(const SeriesMatrix& x, const SeriesMatrix& y)
    {
        if (x.rows != y.rows || x.cols != y.cols)
            return false;
        for (std::size_t i = 0; i < x.e.size(); ++i)
            if (!(x.e[i] == y.e[i]))
                return false;
        return true;
    }

    std::vector<Series> apply(const std::vector<Series>& v) const
    {
        if (int(v.size()) != cols)
            throw error("SeriesMatrix: apply dimension mismatch");
        std::vector<Series> r(std::size_t(rows), Series::zero(num_vars(), order()));
        for (int i = 0; i < rows; ++i)
            for (int j = 0; j < cols; ++j)
                if (!(*this)(i, j).is_zero() && !v[std::size_t(j)].is_zero())
                    r[std::size_t(i)] += (*this)(i, j) * v[std::size_t(j)];
        return r;
    }

    /// Entrywise evaluation at a complex point.
    Mat<std::complex<double>> evaluate(std::span<const std::complex<double>> point) const
    {
        Mat<std::complex<double>> m(rows, cols);
        for (int i = 0; i < rows; ++i)
            for (int j = 0; j < cols; ++j)
                m(i, j) = (*this)(i, j).template evaluate<std::complex<double>>(point);
        return m;
    }

    /// Inverse of a square series matrix whose constant term is invertible:
    /// Neumann series against the constant-term inverse.
    SeriesMatrix inverse() const
    {
        if (rows != cols)
            throw error("SeriesMatrix: inverse of non-square matrix");
        Mat<K> inv0 = jetfol::inverse(at_origin());
        int nv = num_vars(), ord = order();
        SeriesMatrix n = SeriesMatrix::constant(inv0, nv, ord) * (*this) -
                         SeriesMatrix::identity(rows, nv, ord);
        SeriesMatrix acc = SeriesMatrix::identity(rows, nv, ord);
        SeriesMatrix pw = SeriesMatrix::identity(rows, nv, ord);
        for (int m = 1; m <= ord; ++m) {
            pw = pw * n;
            if (pw.is_zero())
                break;
            acc = (m % 2 == 1) ? acc - pw : acc + pw;
        }
        return acc * SeriesMatrix::constant(inv0, nv, ord);
    }
};

template <class K>
std::vector<TruncatedSeries<K>> invert_map(const std::vector<TruncatedSeries<K>>& g)
{
    using Series = TruncatedSeries<K>;
    using traits = field_traits<K>;
    int n = int(g.size());
    if (n == 0)
        throw error("invert_map: empty tuple");
    int nv = g[0].num_vars();
    if (nv != n)
        throw error("invert_map: tuple length must equal the variable count");
    int ord = g[0].order();
    for (const Series& gi : g) {
        ord = std::min(ord, gi.order());
        if (!traits::is_zero(gi.constant_term()))
            throw error("invert_map: map does not fix the origin");
    }
    Mat<K> jac(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            jac(i, j) = g[std::size_t(i)].coeff(MultiIndex::unit(n, j));
    Mat<K> jinv = inverse(jac); // throws on a singular Jacobian

    // Seed with the linear inverse, then remove the degree-m defect of
    // g(h(x)) - x one degree at a time.
    std::vector<Series> h(std::size_t(n), Series::zero(n, ord));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (!traits::is_zero(jinv(i, j)))
                h[std::size_t(i)] += jinv(i, j) * Series::variable(n, ord, j);
    for (int m = 2; m <= ord; ++m) {
        std::vector<Series> defect(std::size_t(n), Series::zero(n, ord));
        bool any = false;
        for (int i = 0; i < n; ++i) {
            defect[std::size_t(i)] = g[std::size_t(i)].compose(h) - Series::variable(n, ord, i);
            if (!defect[std::size_t(i)].is_zero())
                any = true;
        }
        if (!any)
            break;
        for (int i = 0; i < n; ++i) {
            Series corr = Series::zero(n, ord);
            for (int j = 0; j < n; ++j)
                if (!traits::is_zero(jinv(i, j)))
                    corr += jinv(i, j) * defect[std::size_t(j)];
            h[std::size_t(i)] -= corr;
        }
    }
    return h;
}

} // namespace jetfol
