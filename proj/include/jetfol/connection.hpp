#pragma once

#include "series_matrix.hpp"

namespace jetfol {

/// Foliated chart: the first q coordinates are transverse, the remaining d
/// are tangent to the leaves. The Pfaffian systems below differentiate along
/// the tangent coordinates only.
struct FoliationChart {
    int q = 1; // transverse dimension
    int d = 1; // tangent (leaf) dimension

    FoliationChart() = default;
    FoliationChart(int q_, int d_) : q(q_), d(d_)
    {
        if (q < 0)
            throw error("FoliationChart: negative transverse dimension");
        if (d < 1)
            throw error("FoliationChart: tangent dimension must be at least one");
        if (q + d > kMaxVars)
            throw error("FoliationChart: too many variables");
    }

    int num_vars() const { return q + d; }
    int y_var(int k) const { return q + k; } // chart index of the k-th tangent coordinate

    bool operator==(const FoliationChart& o) const { return q == o.q && d == o.d; }
};

/// Vector field with polynomial (truncated series) components.
template <class K> using PolyVectorField = std::vector<TruncatedSeries<K>>;

/// [v, w] = v(w) - w(v), valid through order T-1.
template <class K>
PolyVectorField<K> lie_bracket(const PolyVectorField<K>& v, const PolyVectorField<K>& w)
{
    using Series = TruncatedSeries<K>;
    if (v.size() != w.size() || v.empty())
        throw error("lie_bracket: component count mismatch");
    int n = int(v.size());
    if (v[0].num_vars() != n || w[0].num_vars() != n)
        throw error("lie_bracket: component count must equal the variable count");
    int ord = v[0].order();
    for (const Series& s : v)
        ord = std::min(ord, s.order());
    for (const Series& s : w)
        ord = std::min(ord, s.order());
    PolyVectorField<K> r(std::size_t(n), Series::zero(n, ord > 0 ? ord - 1 : 0));
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            if (!v[std::size_t(i)].is_zero())
                r[std::size_t(j)] += v[std::size_t(i)] * w[std::size_t(j)].diff(i);
            if (!w[std::size_t(i)].is_zero())
                r[std::size_t(j)] -= w[std::size_t(i)] * v[std::size_t(j)].diff(i);
        }
    return r;
}

/// Partial connection on a trivialized rank-r bundle over a foliated chart:
/// one r x r coefficient matrix per tangent coordinate. A section with
/// coefficient vector f is flat iff df/dy_k = A_k f for every k.
template <class K> struct ConnectionPatch {
    FoliationChart chart;
    int rank = 0;
    std::vector<SeriesMatrix<K>> a; // size d

    ConnectionPatch() = default;
    ConnectionPatch(FoliationChart c, int r, std::vector<SeriesMatrix<K>> mats)
        : chart(c), rank(r), a(std::move(mats))
    {
        if (rank < 1)
            throw error("ConnectionPatch: rank must be positive");
        if (int(a.size()) != chart.d)
            throw error("ConnectionPatch: need one matrix per tangent coordinate");
        for (const auto& m : a)
            if (m.rows != r || m.cols != r || m.num_vars() != chart.num_vars())
                throw error("ConnectionPatch: matrix shape mismatch");
    }

    int order() const
    {
        int o = a.empty() ? 0 : a[0].order();
        for (const auto& m : a)
            o = std::min(o, m.order());
        return o;
    }
};

/// Integrability defect, one matrix per tangent pair (i < j):
///   defect_{ij} = dA_j/dy_i - dA_i/dy_j - (A_i A_j - A_j A_i).
/// The patch is flat iff every entry vanishes through order T-1.
template <class K>
std::vector<SeriesMatrix<K>> flatness_defect(const ConnectionPatch<K>& p)
{
    std::vector<SeriesMatrix<K>> out;
    for (int i = 0; i < p.chart.d; ++i)
        for (int j = i + 1; j < p.chart.d; ++j) {
            SeriesMatrix<K> dji = p.a[std::size_t(j)].diff(p.chart.y_var(i));
            SeriesMatrix<K> dij = p.a[std::size_t(i)].diff(p.chart.y_var(j));
            SeriesMatrix<K> comm = p.a[std::size_t(i)] * p.a[std::size_t(j)] -
                                   p.a[std::size_t(j)] * p.a[std::size_t(i)];
            out.push_back(dji - dij - comm);
        }
    return out;
}

template <class K> bool is_flat(const ConnectionPatch<K>& p)
{
    for (const auto& m : flatness_defect(p))
        if (!m.is_zero())
            return false;
    return true;
}

/// Unique solution of df/dy_k = A_k f with f(x, 0) = g(x), built one
/// y-degree at a time; the flatness of the patch makes the levels
/// consistent. g must not involve the tangent coordinates.
template <class K>
std::vector<TruncatedSeries<K>> solve_pfaffian(const ConnectionPatch<K>& p,
                                               const std::vector<TruncatedSeries<K>>& g)
{
    using Series = TruncatedSeries<K>;
    using traits = field_traits<K>;
    if (int(g.size()) != p.rank)
        throw error("solve_pfaffian: initial data size mismatch");
    if (!is_flat(p))
        throw error("solve_pfaffian: patch is not flat at the checked order");
    int nv = p.chart.num_vars();
    int ord = p.order() + 1;
    for (const Series& gi : g) {
        if (gi.num_vars() != nv)
            throw error("solve_pfaffian: initial data must live in the chart ring");
        ord = std::min(ord, gi.order());
        const IndexTable& t = gi.table();
        for (int pos = 0; pos < t.count(); ++pos) {
            if (traits::is_zero(gi.coeff_at(pos)))
                continue;
            for (int k = 0; k < p.chart.d; ++k)
                if (t.at(pos)[p.chart.y_var(k)] != 0)
                    throw error("solve_pfaffian: initial data depends on a tangent coordinate");
        }
    }

    std::vector<Series> f;
    f.reserve(g.size());
    for (const Series& gi : g)
        f.push_back(gi.truncated(ord));

    auto y_degree = [&](const MultiIndex& m) {
        int s = 0;
        for (int k = 0; k < p.chart.d; ++k)
            s += m[p.chart.y_var(k)];
        return s;
    };

    const IndexTable& t = index_table(nv, ord);
    for (int level = 1; level <= ord; ++level) {
        // rhs products use only y-degrees below the current level
        std::vector<std::vector<Series>> rhs(std::size_t(p.chart.d));
        for (int k = 0; k < p.chart.d; ++k)
            rhs[std::size_t(k)] = p.a[std::size_t(k)].apply(f);
        for (int pos = 0; pos < t.count(); ++pos) {
            const MultiIndex& m = t.at(pos);
            if (y_degree(m) != level)
                continue;
            int k = 0;
            while (m[p.chart.y_var(k)] == 0)
                ++k;
            int yv = p.chart.y_var(k);
            MultiIndex down = m.minus(MultiIndex::unit(nv, yv));
            K mult = traits::one() / traits::from_int(m[yv]);
            for (int i = 0; i < p.rank; ++i) {
                const Series& r = rhs[std::size_t(k)][std::size_t(i)];
                if (down.degree() > r.order())
                    continue;
                f[std::size_t(i)].set_coeff(m, mult * r.coeff(down));
            }
        }
    }
    return f;
}

/// Fundamental flat frame: F with dF/dy_k = A_k F and F(x, 0) = Id. Columns
/// form a basis of flat sections.
template <class K> SeriesMatrix<K> flat_frame(const ConnectionPatch<K>& p)
{
    using Series = TruncatedSeries<K>;
    using traits = field_traits<K>;
    int nv = p.chart.num_vars();
    int ord = p.order() + 1;
    SeriesMatrix<K> frame(p.rank, p.rank, nv, ord);
    for (int col = 0; col < p.rank; ++col) {
        std::vector<Series> g(std::size_t(p.rank), Series::zero(nv, ord));
        g[std::size_t(col)] = Series::constant(nv, ord, traits::one());
        std::vector<Series> f = solve_pfaffian(p, g);
        for (int row = 0; row < p.rank; ++row)
            frame(row, col) = f[std::size_t(row)];
    }
    return frame;
}

/// Fixture generator: the connection with matrices (dG/dy_k) G^{-1} is flat
/// by construction and has flat frame G G(x,0)^{-1}.
template <class K>
ConnectionPatch<K> gauge_connection(const SeriesMatrix<K>& gauge, const FoliationChart& chart)
{
    if (gauge.rows != gauge.cols)
        throw error("gauge_connection: gauge matrix must be square");
    if (gauge.num_vars() != chart.num_vars())
        throw error("gauge_connection: gauge matrix does not live on the chart");
    SeriesMatrix<K> inv = gauge.inverse(); // throws when singular at the origin
    std::vector<SeriesMatrix<K>> mats;
    for (int k = 0; k < chart.d; ++k)
        mats.push_back(gauge.diff(chart.y_var(k)) * inv);
    return ConnectionPatch<K>(chart, gauge.rows, std::move(mats));
}

/// Bott connection in explicit frames: matrices of nabla_{v_a} pi(w_b) =
/// pi([v_a, w_b]) expressed in the normal frame modulo the tangent frame.
/// The tangent frame must be adapted to the chart (y-components equal to the
/// coordinate fields).
///
/// The entries are connection-form coefficients: nabla_{v_a} pi(w_b) =
/// sum_c (A_a)_{cb} pi(w_c). Flat-section coefficient vectors therefore obey
/// df/dy_a = -A_a f; `system_patch` performs that sign conversion, after
/// which the Pfaffian machinery (solve_pfaffian, flat_frame, transverse
/// jets) applies. For commuting form matrices both conventions are flat.
template <class K>
ConnectionPatch<K> bott_patch(const std::vector<PolyVectorField<K>>& tangent_frame,
                              const std::vector<PolyVectorField<K>>& normal_frame,
                              const FoliationChart& chart)
{
    using Series = TruncatedSeries<K>;
    using traits = field_traits<K>;
    int nv = chart.num_vars();
    if (chart.q < 1)
        throw error("bott_patch: chart has no transverse directions");
    if (int(tangent_frame.size()) != chart.d || int(normal_frame.size()) != chart.q)
        throw error("bott_patch: frame sizes must match the chart dimensions");
    for (int a = 0; a < chart.d; ++a) {
        const auto& v = tangent_frame[std::size_t(a)];
        if (int(v.size()) != nv)
            throw error("bott_patch: field component count mismatch");
        for (int b = 0; b < chart.d; ++b) {
            Series expect = Series::constant(nv, v[0].order(), a == b ? traits::one() : traits::zero());
            if (!(v[std::size_t(chart.y_var(b))] == expect))
                throw error("bott_patch: tangent frame is not adapted to the chart fibration");
        }
    }

    int ord = tangent_frame[0][0].order();
    for (const auto& fld : tangent_frame)
        for (const auto& c : fld)
            ord = std::min(ord, c.order());
    for (const auto& fld : normal_frame)
        for (const auto& c : fld)
            ord = std::min(ord, c.order());

    // columns: normal frame first, tangent frame after
    SeriesMatrix<K> cols(nv, nv, nv, ord);
    for (int b = 0; b < chart.q; ++b)
        for (int i = 0; i < nv; ++i)
            cols(i, b) = normal_frame[std::size_t(b)][std::size_t(i)];
    for (int a = 0; a < chart.d; ++a)
        for (int i = 0; i < nv; ++i)
            cols(i, chart.q + a) = tangent_frame[std::size_t(a)][std::size_t(i)];
    SeriesMatrix<K> cols_inv = cols.inverse(); // frames dependent at origin -> singular

    // involutivity: tangent brackets must stay in the tangent span
    for (int a = 0; a < chart.d; ++a)
        for (int b = a + 1; b < chart.d; ++b) {
            PolyVectorField<K> br =
                lie_bracket(tangent_frame[std::size_t(a)], tangent_frame[std::size_t(b)]);
            std::vector<Series> u = cols_inv.apply(br);
            for (int c = 0; c < chart.q; ++c)
                if (!u[std::size_t(c)].is_zero())
                    throw error("bott_patch: tangent frame is not involutive");
        }

    std::vector<SeriesMatrix<K>> mats(std::size_t(chart.d),
                                      SeriesMatrix<K>(chart.q, chart.q, nv, ord - 1));
    for (int a = 0; a < chart.d; ++a)
        for (int b = 0; b < chart.q; ++b) {
            PolyVectorField<K> br =
                lie_bracket(tangent_frame[std::size_t(a)], normal_frame[std::size_t(b)]);
            std::vector<Series> u = cols_inv.apply(br);
            for (int c = 0; c < chart.q; ++c)
                mats[std::size_t(a)](c, b) = u[std::size_t(c)];
        }
    return ConnectionPatch<K>(chart, chart.q, std::move(mats));
}

/// Convert connection-form coefficient matrices into the system convention
/// df/dy_k = A_k f used by the Pfaffian solver.
template <class K> ConnectionPatch<K> system_patch(const ConnectionPatch<K>& form)
{
    std::vector<SeriesMatrix<K>> mats;
    for (const auto& m : form.a)
        mats.push_back(-m);
    return ConnectionPatch<K>(form.chart, form.rank, std::move(mats));
}

/// Tensor product of connections: A tensor Id + Id tensor A'.
template <class K>
ConnectionPatch<K> tensor_patch(const ConnectionPatch<K>& p, const ConnectionPatch<K>& p2)
{
    if (!(p.chart == p2.chart))
        throw error("tensor_patch: chart mismatch");
    int r = p.rank, s = p2.rank;
    int nv = p.chart.num_vars();
    int ord = std::min(p.order(), p2.order());
    std::vector<SeriesMatrix<K>> mats;
    for (int k = 0; k < p.chart.d; ++k) {
        SeriesMatrix<K> m(r * s, r * s, nv, ord);
        for (int i = 0; i < r; ++i)
            for (int j = 0; j < r; ++j)
                for (int u = 0; u < s; ++u)
                    for (int v = 0; v < s; ++v) {
                        TruncatedSeries<K> e = TruncatedSeries<K>::zero(nv, ord);
                        if (u == v)
                            e += p.a[std::size_t(k)](i, j);
                        if (i == j)
                            e += p2.a[std::size_t(k)](u, v);
                        m(i * s + u, j * s + v) = e;
                    }
        mats.push_back(std::move(m));
    }
    return ConnectionPatch<K>(p.chart, r * s, std::move(mats));
}

/// Dual connection: matrices -A^T.
template <class K> ConnectionPatch<K> dual_patch(const ConnectionPatch<K>& p)
{
    std::vector<SeriesMatrix<K>> mats;
    for (const auto& m : p.a)
        mats.push_back(-m.transpose());
    return ConnectionPatch<K>(p.chart, p.rank, std::move(mats));
}

/// Determinant connection on the top exterior power: rank one, entries
/// trace(A_k).
template <class K> ConnectionPatch<K> det_patch(const ConnectionPatch<K>& p)
{
    std::vector<SeriesMatrix<K>> mats;
    for (const auto& m : p.a) {
        SeriesMatrix<K> d(1, 1, m.num_vars(), m.order());
        d(0, 0) = m.trace();
        mats.push_back(std::move(d));
    }
    return ConnectionPatch<K>(p.chart, 1, std::move(mats));
}

/// Connection induced on transverse k-jets, in the coefficient trivialization
/// indexed by (transverse multi-index, section index): block entry
/// [(i, j), (i', l)] is the divided transverse derivative of (A_m)_{jl} at
/// i - i'. Flat sections are exactly the jet-coefficient vectors of flat
/// sections of the input patch.
template <class K>
ConnectionPatch<K> transverse_jet_patch(const ConnectionPatch<K>& p, int k)
{
    using Series = TruncatedSeries<K>;
    using traits = field_traits<K>;
    if (k < 0)
        throw error("transverse_jet_patch: negative jet order");
    if (p.chart.q < 1)
        throw error("transverse_jet_patch: chart has no transverse directions");
    if (!is_flat(p))
        throw error("transverse_jet_patch: input patch is not flat at the checked order");
    int nv = p.chart.num_vars();
    const IndexTable& jt = index_table(p.chart.q, k);
    int nidx = jt.count();
    int big = p.rank * nidx;
    int ord = p.order();

    std::vector<SeriesMatrix<K>> mats(std::size_t(p.chart.d),
                                      SeriesMatrix<K>(big, big, nv, ord));
    // cache divided transverse derivatives of each A_m up to total degree k
    for (int m = 0; m < p.chart.d; ++m) {
        std::vector<SeriesMatrix<K>> deriv(std::size_t(nidx), p.a[std::size_t(m)]);
        for (int pos = 1; pos < nidx; ++pos) {
            const MultiIndex& mi = jt.at(pos);
            int var = 0;
            while (mi[var] == 0)
                ++var;
            int prev = jt.position(mi.minus(MultiIndex::unit(p.chart.q, var)));
            deriv[std::size_t(pos)] = deriv[std::size_t(prev)].diff(var);
        }
        for (int pi = 0; pi < nidx; ++pi) {
            const MultiIndex& i = jt.at(pi);
            for (int pj = 0; pj < nidx; ++pj) {
                const MultiIndex& ip = jt.at(pj);
                if (!ip.leq(i))
                    continue;
                MultiIndex diff = i.minus(ip);
                int dpos = jt.position(diff);
                K inv_fact = traits::one() / traits::from_int(long(diff.factorial()));
                for (int row = 0; row < p.rank; ++row)
                    for (int col = 0; col < p.rank; ++col) {
                        const Series& s = deriv[std::size_t(dpos)](row, col);
                        if (s.is_zero())
                            continue;
                        mats[std::size_t(m)](pi * p.rank + row, pj * p.rank + col) =
                            inv_fact * s;
                    }
            }
        }
    }
    return ConnectionPatch<K>(p.chart, big, std::move(mats));
}

/// Coefficient vector of the transverse k-jet of a section given by chart
/// coefficients f: entry (i, j) = (1/i!) d^i f_j / dx^i. For flat f these are
/// flat sections of transverse_jet_patch(p, k).
template <class K>
std::vector<TruncatedSeries<K>> transverse_jet_coefficients(const std::vector<TruncatedSeries<K>>& f,
                                                            const FoliationChart& chart, int k)
{
    using Series = TruncatedSeries<K>;
    using traits = field_traits<K>;
    const IndexTable& jt = index_table(chart.q, k);
    int r = int(f.size());
    std::vector<Series> out;
    out.reserve(std::size_t(jt.count() * r));
    std::vector<std::vector<Series>> deriv(std::size_t(jt.count()), f);
    for (int pos = 0; pos < jt.count(); ++pos) {
        const MultiIndex& mi = jt.at(pos);
        if (pos > 0) {
            int var = 0;
            while (mi[var] == 0)
                ++var;
            int prev = jt.position(mi.minus(MultiIndex::unit(chart.q, var)));
            deriv[std::size_t(pos)].clear();
            for (const Series& s : deriv[std::size_t(prev)])
                deriv[std::size_t(pos)].push_back(s.diff(var));
        }
        K inv_fact = traits::one() / traits::from_int(long(mi.factorial()));
        for (int j = 0; j < r; ++j)
            out.push_back(inv_fact * deriv[std::size_t(pos)][std::size_t(j)]);
    }
    return out;
}

} // namespace jetfol
