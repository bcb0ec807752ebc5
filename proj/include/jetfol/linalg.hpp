#pragma once

#include "scalar.hpp"

#include <vector>

namespace jetfol {

/// Dense matrix over a field. Small sizes only; used for exact rank and
/// nullspace computations and for the floating LU solves of the numeric
/// layer. Pivoting is by magnitude in floating mode and by first nonzero
/// entry in exact mode.
template <class K> struct Mat {
    using traits = field_traits<K>;

    int rows = 0, cols = 0;
    std::vector<K> a;

    Mat() = default;
    Mat(int r, int c) : rows(r), cols(c), a(std::size_t(r) * std::size_t(c), traits::zero()) {}

    static Mat identity(int n)
    {
        Mat m(n, n);
        for (int i = 0; i < n; ++i)
            m(i, i) = traits::one();
        return m;
    }

    K& operator()(int i, int j) { return a[std::size_t(i) * std::size_t(cols) + std::size_t(j)]; }
    const K& operator()(int i, int j) const
    {
        return a[std::size_t(i) * std::size_t(cols) + std::size_t(j)];
    }

    Mat transpose() const
    {
        Mat t(cols, rows);
        for (int i = 0; i < rows; ++i)
            for (int j = 0; j < cols; ++j)
                t(j, i) = (*this)(i, j);
        return t;
    }

    K trace() const
    {
        K s = traits::zero();
        for (int i = 0; i < rows && i < cols; ++i)
            s += (*this)(i, i);
        return s;
    }

    friend Mat operator*(const Mat& x, const Mat& y)
    {
        if (x.cols != y.rows)
            throw error("Mat: dimension mismatch in product");
        Mat r(x.rows, y.cols);
        for (int i = 0; i < x.rows; ++i)
            for (int k = 0; k < x.cols; ++k) {
                const K& v = x(i, k);
                if (traits::is_zero(v))
                    continue;
                for (int j = 0; j < y.cols; ++j)
                    r(i, j) += v * y(k, j);
            }
        return r;
    }

    friend Mat operator+(const Mat& x, const Mat& y)
    {
        Mat r = x;
        for (std::size_t i = 0; i < r.a.size(); ++i)
            r.a[i] += y.a[i];
        return r;
    }

    friend Mat operator-(const Mat& x, const Mat& y)
    {
        Mat r = x;
        for (std::size_t i = 0; i < r.a.size(); ++i)
            r.a[i] -= y.a[i];
        return r;
    }

    friend Mat operator*(const K& s, const Mat& x)
    {
        Mat r = x;
        for (K& v : r.a)
            v = s * v;
        return r;
    }

    friend bool operator==(const Mat& x, const Mat& y)
    {
        if (x.rows != y.rows || x.cols != y.cols)
            return false;
        for (std::size_t i = 0; i < x.a.size(); ++i)
            if (!(x.a[i] == y.a[i]))
                return false;
        return true;
    }

    std::vector<K> apply(const std::vector<K>& v) const
    {
        if (int(v.size()) != cols)
            throw error("Mat: dimension mismatch in apply");
        std::vector<K> r(std::size_t(rows), traits::zero());
        for (int i = 0; i < rows; ++i)
            for (int j = 0; j < cols; ++j)
                r[std::size_t(i)] += (*this)(i, j) * v[std::size_t(j)];
        return r;
    }
};

namespace detail {

template <class K> int pick_pivot(const Mat<K>& m, int col, int from_row)
{
    using traits = field_traits<K>;
    int best = -1;
    double best_size = 0.0;
    for (int i = from_row; i < m.rows; ++i) {
        double s = traits::pivot_size(m(i, col));
        if (s > best_size) {
            best_size = s;
            best = i;
            if constexpr (traits::exact)
                break; // first nonzero pivot suffices in exact arithmetic
        }
    }
    return best;
}

} // namespace detail

/// Row-reduce in place; returns pivot column list (i.e. the rank profile).
template <class K> std::vector<int> row_reduce(Mat<K>& m)
{
    using traits = field_traits<K>;
    std::vector<int> pivots;
    int row = 0;
    for (int col = 0; col < m.cols && row < m.rows; ++col) {
        int p = detail::pick_pivot(m, col, row);
        if (p < 0)
            continue;
        if (p != row)
            for (int j = 0; j < m.cols; ++j)
                std::swap(m(p, j), m(row, j));
        K inv = traits::one() / m(row, col);
        for (int j = col; j < m.cols; ++j)
            m(row, j) = inv * m(row, j);
        for (int i = 0; i < m.rows; ++i) {
            if (i == row || traits::is_zero(m(i, col)))
                continue;
            K f = m(i, col);
            for (int j = col; j < m.cols; ++j)
                m(i, j) -= f * m(row, j);
        }
        pivots.push_back(col);
        ++row;
    }
    return pivots;
}

template <class K> int rank(Mat<K> m) { return int(row_reduce(m).size()); }

/// Basis of the right nullspace, one vector per non-pivot column.
template <class K> std::vector<std::vector<K>> nullspace(Mat<K> m)
{
    using traits = field_traits<K>;
    std::vector<int> pivots = row_reduce(m);
    std::vector<char> is_pivot(std::size_t(m.cols), 0);
    for (std::size_t r = 0; r < pivots.size(); ++r)
        is_pivot[std::size_t(pivots[r])] = 1;
    std::vector<std::vector<K>> basis;
    for (int free_col = 0; free_col < m.cols; ++free_col) {
        if (is_pivot[std::size_t(free_col)])
            continue;
        std::vector<K> v(std::size_t(m.cols), traits::zero());
        v[std::size_t(free_col)] = traits::one();
        for (std::size_t r = 0; r < pivots.size(); ++r)
            v[std::size_t(pivots[r])] = -m(int(r), free_col);
        basis.push_back(std::move(v));
    }
    return basis;
}

template <class K> int nullity(const Mat<K>& m) { return m.cols - rank(m); }

template <class K> Mat<K> inverse(const Mat<K>& m)
{
    if (m.rows != m.cols)
        throw error("Mat: inverse of non-square matrix");
    Mat<K> aug(m.rows, 2 * m.cols);
    for (int i = 0; i < m.rows; ++i) {
        for (int j = 0; j < m.cols; ++j)
            aug(i, j) = m(i, j);
        aug(i, m.cols + i) = field_traits<K>::one();
    }
    std::vector<int> pivots = row_reduce(aug);
    if (int(pivots.size()) != m.rows || pivots.back() >= m.cols)
        throw error("Mat: singular matrix");
    for (int j = 0; j < m.rows; ++j)
        if (pivots[std::size_t(j)] != j)
            throw error("Mat: singular matrix");
    Mat<K> inv(m.rows, m.cols);
    for (int i = 0; i < m.rows; ++i)
        for (int j = 0; j < m.cols; ++j)
            inv(i, j) = aug(i, m.cols + j);
    return inv;
}

/// Solve m x = b for square m.
template <class K> std::vector<K> solve(const Mat<K>& m, const std::vector<K>& b)
{
    if (m.rows != m.cols || int(b.size()) != m.rows)
        throw error("Mat: solve dimension mismatch");
    Mat<K> aug(m.rows, m.cols + 1);
    for (int i = 0; i < m.rows; ++i) {
        for (int j = 0; j < m.cols; ++j)
            aug(i, j) = m(i, j);
        aug(i, m.cols) = b[std::size_t(i)];
    }
    std::vector<int> pivots = row_reduce(aug);
    if (int(pivots.size()) != m.rows || pivots.back() >= m.cols)
        throw error("Mat: singular system");
    std::vector<K> x(std::size_t(m.cols), field_traits<K>::zero());
    for (int i = 0; i < m.rows; ++i)
        x[std::size_t(pivots[std::size_t(i)])] = aug(i, m.cols);
    return x;
}

} // namespace jetfol
