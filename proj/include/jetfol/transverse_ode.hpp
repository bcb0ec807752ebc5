#pragma once

#include "series_matrix.hpp"

namespace jetfol {

/// Monic system of transverse linear differential equations of order k in
/// one transverse variable:
///   d^k f_l / dx^k + sum_{i<k, j} a_{ijl}(x) d^i f_j / dx^i = 0.
/// Coefficients are stored as one r x r matrix per derivative order i, with
/// (coeff[i])_{lj} = a_{ijl}; the leading order is normalized away.
template <class K> struct TransverseEquation {
    using Series = TruncatedSeries<K>;

    int order = 1; // k
    int rank = 1;  // r
    std::vector<SeriesMatrix<K>> coeff; // size k, each r x r in one variable

    TransverseEquation() = default;
    TransverseEquation(int k, int r, std::vector<SeriesMatrix<K>> c)
        : order(k), rank(r), coeff(std::move(c))
    {
        if (order < 1 || rank < 1)
            throw error("TransverseEquation: order and rank must be positive");
        if (int(coeff.size()) != order)
            throw error("TransverseEquation: need one coefficient matrix per order below k");
        for (const auto& m : coeff)
            if (m.rows != rank || m.cols != rank || m.num_vars() != 1)
                throw error("TransverseEquation: coefficient shape mismatch");
    }

    /// Scalar second-order equation f'' + a f' + b f = 0.
    static TransverseEquation second_order(const Series& a, const Series& b)
    {
        int ord = std::min(a.order(), b.order());
        SeriesMatrix<K> m0(1, 1, 1, ord), m1(1, 1, 1, ord);
        m0(0, 0) = b;
        m1(0, 0) = a;
        return TransverseEquation(2, 1, {m0, m1});
    }

    /// First-order system f' = m f, stored as the monic system f' - m f = 0.
    static TransverseEquation first_order_system(const SeriesMatrix<K>& m)
    {
        return TransverseEquation(1, m.rows, {-m});
    }

    int series_order() const
    {
        int o = coeff[0].order();
        for (const auto& m : coeff)
            o = std::min(o, m.order());
        return o;
    }

    /// Jet index (i, j) -> flat position, i major then section index.
    int jet_index(int i, int j) const { return i * rank + j; }
};

/// Unique solution with prescribed derivatives at the origin:
/// init[i * r + j] = d^i f_j(0) for 0 <= i < k. Linear in the initial data.
template <class K>
std::vector<TruncatedSeries<K>> solve_ode(const TransverseEquation<K>& eq,
                                          const std::vector<K>& init)
{
    using Series = TruncatedSeries<K>;
    using traits = field_traits<K>;
    int k = eq.order, r = eq.rank;
    if (int(init.size()) != k * r)
        throw error("solve_ode: initial data must have k * r entries");
    int ord = eq.series_order() + k;

    // factorials up to ord
    std::vector<K> fact(std::size_t(ord + 1), traits::one());
    for (int m = 1; m <= ord; ++m)
        fact[std::size_t(m)] = fact[std::size_t(m - 1)] * traits::from_int(m);

    // c[l][m] = Taylor coefficient of f_l at x^m
    std::vector<std::vector<K>> c(std::size_t(r), std::vector<K>(std::size_t(ord + 1), traits::zero()));
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < r; ++j)
            c[std::size_t(j)][std::size_t(i)] =
                init[std::size_t(eq.jet_index(i, j))] / fact[std::size_t(i)];

    MultiIndex mono(1);
    for (int m = 0; m + k <= ord; ++m) {
        // coefficient of x^m in sum_{i,j} a_{ijl} d^i f_j, for each l
        for (int l = 0; l < r; ++l) {
            K rhs = traits::zero();
            for (int i = 0; i < k; ++i)
                for (int j = 0; j < r; ++j) {
                    const Series& a = eq.coeff[std::size_t(i)](l, j);
                    for (int s = 0; s <= m && s <= a.order(); ++s) {
                        mono.set(0, s);
                        const K& av = a.coeff(mono);
                        if (traits::is_zero(av))
                            continue;
                        int t = m - s; // x^t coefficient of d^i f_j
                        rhs += av * c[std::size_t(j)][std::size_t(t + i)] *
                               (fact[std::size_t(t + i)] / fact[std::size_t(t)]);
                    }
                }
            // d^k f_l coefficient of x^m is -rhs
            c[std::size_t(l)][std::size_t(m + k)] =
                -(rhs * fact[std::size_t(m)]) / fact[std::size_t(m + k)];
        }
    }

    std::vector<Series> out;
    for (int l = 0; l < r; ++l) {
        Series f(1, ord);
        for (int m = 0; m <= ord; ++m) {
            mono.set(0, m);
            f.set_coeff(mono, c[std::size_t(l)][std::size_t(m)]);
        }
        out.push_back(std::move(f));
    }
    return out;
}

/// Basis of the solution space: the tuple whose initial-jet matrix is the
/// identity. The solution space has dimension exactly k * r at the level of
/// initial data.
template <class K>
std::vector<std::vector<TruncatedSeries<K>>> fundamental_basis(const TransverseEquation<K>& eq)
{
    using traits = field_traits<K>;
    int m = eq.order * eq.rank;
    std::vector<std::vector<TruncatedSeries<K>>> basis;
    basis.reserve(std::size_t(m));
    for (int col = 0; col < m; ++col) {
        std::vector<K> init(std::size_t(m), traits::zero());
        init[std::size_t(col)] = traits::one();
        basis.push_back(solve_ode(eq, init));
    }
    return basis;
}

/// Jet vector (f_j, f_j', ..., f_j^{(k-1)}) of a solution tuple, flattened
/// with the derivative order major.
template <class K>
std::vector<TruncatedSeries<K>> solution_jet_vector(const TransverseEquation<K>& eq,
                                                    const std::vector<TruncatedSeries<K>>& f)
{
    std::vector<TruncatedSeries<K>> v;
    v.reserve(std::size_t(eq.order * eq.rank));
    for (int i = 0; i < eq.order; ++i)
        for (int j = 0; j < eq.rank; ++j) {
            TruncatedSeries<K> d = f[std::size_t(j)];
            for (int t = 0; t < i; ++t)
                d = d.diff(0);
            v.push_back(std::move(d));
        }
    return v;
}

/// Connection induced on (k-1)-jets by a transverse equation. Two
/// presentations of one object:
///  - companion(): jet vectors v of solutions satisfy v' = companion() v;
///  - matrix(): the classical connection display, equal to companion() with
///    the super-diagonal identity blocks negated (for k=2, r=1 and
///    coefficients (a, b) this is [[0, -1], [-b, -a]]).
/// Both share the trace -sum_j a_{(k-1)jj}, the logarithmic derivative of
/// the Wronskian.
template <class K> struct ExtensionConnection {
    int size = 0;                  // k * r
    SeriesMatrix<K> display;       // classical presentation
    SeriesMatrix<K> companion_mat; // v' = companion_mat v on solution jets

    const SeriesMatrix<K>& matrix() const { return display; }
    const SeriesMatrix<K>& companion() const { return companion_mat; }
    TruncatedSeries<K> trace() const { return display.trace(); }
};

template <class K> ExtensionConnection<K> induced_extension(const TransverseEquation<K>& eq)
{
    using traits = field_traits<K>;
    int k = eq.order, r = eq.rank;
    int m = k * r;
    int ord = eq.series_order();
    ExtensionConnection<K> ext;
    ext.size = m;
    ext.display = SeriesMatrix<K>(m, m, 1, ord);
    ext.companion_mat = SeriesMatrix<K>(m, m, 1, ord);
    for (int i = 0; i + 1 < k; ++i)
        for (int j = 0; j < r; ++j) {
            int row = eq.jet_index(i, j), col = eq.jet_index(i + 1, j);
            ext.display(row, col) = TruncatedSeries<K>::constant(1, ord, -traits::one());
            ext.companion_mat(row, col) = TruncatedSeries<K>::constant(1, ord, traits::one());
        }
    for (int i = 0; i < k; ++i)
        for (int l = 0; l < r; ++l)
            for (int j = 0; j < r; ++j) {
                int row = eq.jet_index(k - 1, l), col = eq.jet_index(i, j);
                ext.display(row, col) = ext.display(row, col) - eq.coeff[std::size_t(i)](l, j);
                ext.companion_mat(row, col) =
                    ext.companion_mat(row, col) - eq.coeff[std::size_t(i)](l, j);
            }
    return ext;
}

/// Residual of the kernel property: v' - companion v for the jet vector of a
/// solution tuple; identically zero for genuine solutions.
template <class K>
std::vector<TruncatedSeries<K>> extension_kernel_residual(const TransverseEquation<K>& eq,
                                                          const ExtensionConnection<K>& ext,
                                                          const std::vector<TruncatedSeries<K>>& f)
{
    std::vector<TruncatedSeries<K>> v = solution_jet_vector(eq, f);
    std::vector<TruncatedSeries<K>> cv = ext.companion_mat.apply(v);
    std::vector<TruncatedSeries<K>> out;
    for (std::size_t i = 0; i < v.size(); ++i)
        out.push_back(v[i].diff(0) - cv[i]);
    return out;
}

/// Schwarzian derivative Theta(f) = (f' f'''/6 - (f''/2)^2) / (f')^2, valid
/// through order T - 3. Vanishes exactly on Moebius germs.
template <class K> TruncatedSeries<K> schwarzian(const TruncatedSeries<K>& f)
{
    using traits = field_traits<K>;
    if (f.num_vars() != 1)
        throw error("schwarzian: expects a one-variable series");
    TruncatedSeries<K> d1 = f.diff(0);
    if (traits::is_zero(d1.constant_term()))
        throw error("schwarzian: critical germ (f'(0) = 0)");
    TruncatedSeries<K> d2 = d1.diff(0);
    TruncatedSeries<K> d3 = d2.diff(0);
    K sixth = traits::from_fraction(1, 6);
    K half = traits::from_fraction(1, 2);
    TruncatedSeries<K> num = d1 * (sixth * d3) - (half * d2) * (half * d2);
    TruncatedSeries<K> inv = d1.reciprocal();
    return num * inv * inv;
}

/// Schwarzian of the projective ratio of two germs with independent 1-jets.
template <class K>
TruncatedSeries<K> schwarzian_ratio(const TruncatedSeries<K>& f1, const TruncatedSeries<K>& f2)
{
    using traits = field_traits<K>;
    K det = f1.constant_term() * f2.diff(0).constant_term() -
            f2.constant_term() * f1.diff(0).constant_term();
    if (traits::is_zero(det))
        throw error("schwarzian_ratio: 1-jets are linearly dependent");
    // Theta is Moebius-invariant, so swapping the pair when f2 vanishes at
    // the origin computes the same germ up to an automorphism of the line.
    if (!traits::is_zero(f2.constant_term()))
        return schwarzian(f1 * f2.reciprocal());
    return schwarzian(f2 * f1.reciprocal());
}

/// Affine/Schwarzian data of a projective structure: the connection
/// coefficient a and the Schwarzian coefficient c of the charts.
template <class K> struct ProjectiveDatum {
    TruncatedSeries<K> a;
    TruncatedSeries<K> c;
};

/// c = b/3 - (a^2 + 2a')/12 for the equation f'' + a f' + b f = 0.
template <class K>
ProjectiveDatum<K> ode_to_projective(const TruncatedSeries<K>& a, const TruncatedSeries<K>& b)
{
    using traits = field_traits<K>;
    K third = traits::from_fraction(1, 3);
    K twelfth = traits::from_fraction(1, 12);
    TruncatedSeries<K> c =
        third * b - twelfth * (a * a + traits::from_int(2) * a.diff(0));
    return {a, c};
}

/// Exact inverse of ode_to_projective: b = 3c + (a^2 + 2a')/4.
template <class K>
TruncatedSeries<K> projective_to_ode(const TruncatedSeries<K>& a, const TruncatedSeries<K>& c)
{
    using traits = field_traits<K>;
    K quarter = traits::from_fraction(1, 4);
    return traits::from_int(3) * c + quarter * (a * a + traits::from_int(2) * a.diff(0));
}

/// Cocycle defect Theta(f1 o f2) - Theta(f1) o f2 * (f2')^2 - Theta(f2);
/// identically zero through the valid order.
template <class K>
TruncatedSeries<K> cocycle_defect(const TruncatedSeries<K>& f1, const TruncatedSeries<K>& f2)
{
    using traits = field_traits<K>;
    if (!traits::is_zero(f2.constant_term()))
        throw error("cocycle_defect: inner germ must fix the origin");
    TruncatedSeries<K> comp = f1.compose({f2});
    TruncatedSeries<K> d2 = f2.diff(0);
    TruncatedSeries<K> lhs = schwarzian(comp);
    TruncatedSeries<K> pulled = schwarzian(f1).compose({f2}) * d2 * d2;
    return lhs - pulled - schwarzian(f2);
}

} // namespace jetfol
