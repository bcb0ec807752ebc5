#pragma once

#include "series_matrix.hpp"

namespace jetfol {

/// The two natural bases of the truncated jet ring on a chart:
/// monomial jets d^k(x^i), and zeta monomials z^i with z_j the jet of x_j
/// minus x_j itself.
enum class JetBasis { monomial_jet, zeta };

/// Jet ring of order k on a chart with `nvars` base coordinates. Jet
/// monomials range over the first `jet_vars` coordinates only; jet_vars ==
/// nvars gives the full jet ring, jet_vars == q < nvars the transverse jets
/// of a foliated chart whose leaves are cut out by the first q coordinates.
struct JetRing {
    int nvars = 1;
    int jet_vars = 1;
    int order = 0;

    bool operator==(const JetRing& o) const
    {
        return nvars == o.nvars && jet_vars == o.jet_vars && order == o.order;
    }

    const IndexTable& jet_table() const { return index_table(jet_vars, order); }
};

/// Element of a jet ring: one series coefficient (a function of the base
/// point) per jet monomial of degree <= k, so a single element represents a
/// local section of the jet sheaf rather than a fiber point.
template <class K> struct JetElement {
    using Series = TruncatedSeries<K>;

    JetRing ring;
    JetBasis basis = JetBasis::zeta;
    std::vector<Series> coeff;

    JetElement() = default;
    JetElement(JetRing r, JetBasis b, int series_order)
        : ring(r), basis(b),
          coeff(std::size_t(r.jet_table().count()), Series::zero(r.nvars, series_order))
    {
    }

    int series_order() const
    {
        int o = coeff.empty() ? 0 : coeff[0].order();
        for (const Series& s : coeff)
            o = std::min(o, s.order());
        return o;
    }

    const Series& at(const MultiIndex& m) const
    {
        return coeff[std::size_t(ring.jet_table().position(m))];
    }
    Series& at(const MultiIndex& m) { return coeff[std::size_t(ring.jet_table().position(m))]; }

    bool is_zero() const
    {
        for (const Series& s : coeff)
            if (!s.is_zero())
                return false;
        return true;
    }

    friend JetElement operator+(const JetElement& a, const JetElement& b)
    {
        if (!(a.ring == b.ring) || a.basis != b.basis)
            throw error("JetElement: ring or basis mismatch");
        JetElement r = a;
        for (std::size_t i = 0; i < r.coeff.size(); ++i)
            r.coeff[i] = r.coeff[i] + b.coeff[i];
        return r;
    }

    friend JetElement operator-(const JetElement& a, const JetElement& b)
    {
        if (!(a.ring == b.ring) || a.basis != b.basis)
            throw error("JetElement: ring or basis mismatch");
        JetElement r = a;
        for (std::size_t i = 0; i < r.coeff.size(); ++i)
            r.coeff[i] = r.coeff[i] - b.coeff[i];
        return r;
    }

    friend bool operator==(const JetElement& a, const JetElement& b)
    {
        if (!(a.ring == b.ring) || a.basis != b.basis || a.coeff.size() != b.coeff.size())
            return false;
        for (std::size_t i = 0; i < a.coeff.size(); ++i)
            if (!(a.coeff[i] == b.coeff[i]))
                return false;
        return true;
    }
};

/// k-jet of a function: in the zeta basis the coefficient of z^i is the
/// divided derivative (1/i!) d^|i| f / dx^i, with i supported on the jet
/// variables.
template <class K>
JetElement<K> jet_of_function(const TruncatedSeries<K>& f, int k, int jet_vars)
{
    using traits = field_traits<K>;
    if (k < 0)
        throw error("jet_of_function: negative jet order");
    if (jet_vars < 1 || jet_vars > f.num_vars())
        throw error("jet_of_function: bad transverse variable count");
    JetRing ring{f.num_vars(), jet_vars, k};
    JetElement<K> e(ring, JetBasis::zeta, f.order());
    const IndexTable& jt = ring.jet_table();
    std::vector<TruncatedSeries<K>> derivs(std::size_t(jt.count()), f);
    for (int p = 0; p < jt.count(); ++p) {
        const MultiIndex& m = jt.at(p);
        if (p > 0) {
            int var = 0;
            while (m[var] == 0)
                ++var;
            int prev = jt.position(m.minus(MultiIndex::unit(jet_vars, var)));
            derivs[std::size_t(p)] = derivs[std::size_t(prev)].diff(var);
        }
        K inv_fact = traits::one() / traits::from_int(long(m.factorial()));
        e.coeff[std::size_t(p)] = inv_fact * derivs[std::size_t(p)];
    }
    return e;
}

/// Change of basis: d^k(x^i) = sum_{j<=i} binom(i,j) x^{i-j} z^j and its
/// signed inverse. The two change matrices are exact mutual inverses.
template <class K> JetElement<K> basis_change(const JetElement<K>& e, JetBasis target)
{
    using traits = field_traits<K>;
    using Series = TruncatedSeries<K>;
    if (e.basis == target)
        return e;
    bool to_zeta = (target == JetBasis::zeta);
    JetElement<K> r(e.ring, target, e.series_order());
    const IndexTable& jt = e.ring.jet_table();
    int nv = e.ring.nvars;
    int so = e.series_order();
    for (int pi = 0; pi < jt.count(); ++pi) {
        if (e.coeff[std::size_t(pi)].is_zero())
            continue;
        const MultiIndex& mi = jt.at(pi);
        for (int pj = 0; pj < jt.count(); ++pj) {
            const MultiIndex& mj = jt.at(pj);
            if (!mj.leq(mi))
                continue;
            long long b = mi.binom(mj);
            K c = traits::from_int(long(b));
            if (!to_zeta && (mi.degree() - mj.degree()) % 2 == 1)
                c = -c;
            MultiIndex diff = mi.minus(mj);
            // jet variables are the leading base coordinates
            MultiIndex full(nv);
            for (int v = 0; v < e.ring.jet_vars; ++v)
                full.set(v, diff[v]);
            if (full.degree() > so)
                continue;
            Series mono = Series::monomial(nv, so, full, c);
            r.coeff[std::size_t(pj)] += mono * e.coeff[std::size_t(pi)];
        }
    }
    return r;
}

/// Ring product; zeta monomials of degree above the jet order vanish.
template <class K> JetElement<K> jet_mul(const JetElement<K>& a, const JetElement<K>& b)
{
    if (!(a.ring == b.ring))
        throw error("jet_mul: ring mismatch");
    JetElement<K> az = basis_change(a, JetBasis::zeta);
    JetElement<K> bz = basis_change(b, JetBasis::zeta);
    int so = std::min(az.series_order(), bz.series_order());
    JetElement<K> r(a.ring, JetBasis::zeta, so);
    const IndexTable& jt = a.ring.jet_table();
    for (int pa = 0; pa < jt.count(); ++pa) {
        if (az.coeff[std::size_t(pa)].is_zero())
            continue;
        const MultiIndex& ia = jt.at(pa);
        for (int pb = 0; pb < jt.count(); ++pb) {
            if (bz.coeff[std::size_t(pb)].is_zero())
                continue;
            const MultiIndex& ib = jt.at(pb);
            if (ia.degree() + ib.degree() > a.ring.order)
                continue; // truncation ideal
            r.coeff[std::size_t(jt.position(ia.plus(ib)))] +=
                az.coeff[std::size_t(pa)] * bz.coeff[std::size_t(pb)];
        }
    }
    if (a.basis == JetBasis::monomial_jet && b.basis == JetBasis::monomial_jet)
        return basis_change(r, JetBasis::monomial_jet);
    return r;
}

/// Projection J^k -> J^{k-1}: drops the top zeta degree.
template <class K> JetElement<K> truncate_jet(const JetElement<K>& e)
{
    if (e.ring.order < 1)
        throw error("truncate_jet: jet order is already zero");
    JetElement<K> ez = basis_change(e, JetBasis::zeta);
    JetRing down{e.ring.nvars, e.ring.jet_vars, e.ring.order - 1};
    JetElement<K> r(down, JetBasis::zeta, ez.series_order());
    const IndexTable& jt = down.jet_table();
    for (int p = 0; p < jt.count(); ++p)
        r.coeff[std::size_t(p)] = ez.coeff[std::size_t(p)];
    if (e.basis == JetBasis::monomial_jet)
        return basis_change(r, JetBasis::monomial_jet);
    return r;
}

/// Inclusion Sym^k -> J^k: the symbol df_1 ... df_k maps to the product of
/// the (d^k f_i - f_i), which lands in top zeta degree; composing with the
/// projection gives zero.
template <class K>
JetElement<K> inject_symbol(const std::vector<TruncatedSeries<K>>& fs, int k, int jet_vars)
{
    using Series = TruncatedSeries<K>;
    using traits = field_traits<K>;
    if (int(fs.size()) != k || k < 1)
        throw error("inject_symbol: need exactly k factor functions");
    int nv = fs[0].num_vars();
    JetRing ring{nv, jet_vars, k};
    JetElement<K> acc(ring, JetBasis::zeta, fs[0].order());
    acc.coeff[0] = Series::constant(nv, fs[0].order(), traits::one());
    for (const Series& f : fs) {
        JetElement<K> jf = jet_of_function(f, k, jet_vars);
        jf.coeff[0] = jf.coeff[0] - f; // d^k(f) - f kills the degree-zero part
        acc = jet_mul(acc, jf);
    }
    return acc;
}

/// First prolongation of the pushforward of an origin-fixing diffeomorphism,
/// in the natural jet coordinates (x, z, w): z transforms by the Jacobian and
/// w by a bilinear expression in the partials of phi and of its compositional
/// inverse. Rows of w-blocks are indexed by the pair (j1, j2) flattened as
/// j1 * n + j2.
template <class K> struct ProlongedMap {
    using Series = TruncatedSeries<K>;

    std::vector<Series> base;  // phi itself
    SeriesMatrix<K> linear;    // z'_j = sum_i d(phi_j)/dx_i z_i
    SeriesMatrix<K> w_from_w;  // (n^2) x (n^2)
    SeriesMatrix<K> w_from_z;  // (n^2) x n

    int dim() const { return int(base.size()); }

    /// Transport of the 1-jet of a polynomial vector field v: returns the
    /// (z, w) data of prolong(v) pulled to the source chart, i.e. the value
    /// of the prolonged map on (x, v(x), dv(x)).
    std::pair<std::vector<Series>, SeriesMatrix<K>>
    apply_to_field(const std::vector<Series>& v) const
    {
        int n = dim();
        std::vector<Series> z = linear.apply(v);
        SeriesMatrix<K> dv(n, n, v[0].num_vars(), v[0].order() - 1);
        for (int j1 = 0; j1 < n; ++j1)
            for (int j2 = 0; j2 < n; ++j2)
                dv(j1, j2) = v[std::size_t(j2)].diff(j1);
        std::vector<Series> wflat(std::size_t(n * n));
        for (int r = 0; r < n * n; ++r) {
            Series acc = Series::zero(v[0].num_vars(), v[0].order() - 1);
            for (int c = 0; c < n * n; ++c)
                if (!w_from_w(r, c).is_zero())
                    acc += w_from_w(r, c) * dv(c / n, c % n);
            for (int c = 0; c < n; ++c)
                if (!w_from_z(r, c).is_zero())
                    acc += w_from_z(r, c) * v[std::size_t(c)];
            wflat[std::size_t(r)] = acc;
        }
        SeriesMatrix<K> w(n, n, v[0].num_vars(), v[0].order() - 1);
        for (int j1 = 0; j1 < n; ++j1)
            for (int j2 = 0; j2 < n; ++j2)
                w(j1, j2) = wflat[std::size_t(j1 * n + j2)];
        return {std::move(z), std::move(w)};
    }

    /// Value of the fiber blocks at the origin, as plain matrices.
    struct FiberBlocks {
        Mat<K> a;   // n x n
        Mat<K> ww;  // n^2 x n^2
        Mat<K> wz;  // n^2 x n
    };

    FiberBlocks at_origin() const
    {
        return {linear.at_origin(), w_from_w.at_origin(), w_from_z.at_origin()};
    }
};

template <class K> ProlongedMap<K> prolong_map_1(const std::vector<TruncatedSeries<K>>& phi)
{
    using Series = TruncatedSeries<K>;
    using traits = field_traits<K>;
    int n = int(phi.size());
    if (n == 0 || phi[0].num_vars() != n)
        throw error("prolong_map_1: tuple length must equal the variable count");
    int ord = phi[0].order();
    for (const Series& p : phi) {
        ord = std::min(ord, p.order());
        if (!traits::is_zero(p.constant_term()))
            throw error("prolong_map_1: map does not fix the origin");
    }
    if (ord < 2)
        throw error("prolong_map_1: needs series order >= 2");

    ProlongedMap<K> pm;
    pm.base = phi;
    pm.linear = SeriesMatrix<K>(n, n, n, ord - 1);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i)
            pm.linear(j, i) = phi[std::size_t(j)].diff(i);

    // partials of the compositional inverse, composed back with phi
    std::vector<Series> inv = invert_map(phi);
    SeriesMatrix<K> jinv(n, n, n, ord - 1);
    for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j)
            jinv(k, j) = inv[std::size_t(k)].diff(j).compose(phi);

    pm.w_from_w = SeriesMatrix<K>(n * n, n * n, n, ord - 1);
    for (int j1 = 0; j1 < n; ++j1)
        for (int j2 = 0; j2 < n; ++j2)
            for (int i1 = 0; i1 < n; ++i1)
                for (int i2 = 0; i2 < n; ++i2)
                    pm.w_from_w(j1 * n + j2, i1 * n + i2) = jinv(i1, j1) * pm.linear(j2, i2);

    pm.w_from_z = SeriesMatrix<K>(n * n, n, n, ord - 2 >= 0 ? ord - 2 : 0);
    for (int j1 = 0; j1 < n; ++j1)
        for (int j2 = 0; j2 < n; ++j2)
            for (int i = 0; i < n; ++i) {
                Series acc = Series::zero(n, ord - 2 >= 0 ? ord - 2 : 0);
                for (int k = 0; k < n; ++k)
                    acc += jinv(k, j1) * phi[std::size_t(j2)].diff(k).diff(i);
                pm.w_from_z(j1 * n + j2, i) = acc;
            }
    return pm;
}

/// Composition as maps on (x, z, w): prolongation is functorial.
template <class K>
ProlongedMap<K> compose(const ProlongedMap<K>& outer, const ProlongedMap<K>& inner)
{
    int n = inner.dim();
    if (outer.dim() != n)
        throw error("ProlongedMap compose: dimension mismatch");
    auto comp = [&](const SeriesMatrix<K>& m) {
        SeriesMatrix<K> r = m;
        for (auto& s : r.e)
            s = s.compose(inner.base);
        return r;
    };
    ProlongedMap<K> pm;
    pm.base.reserve(std::size_t(n));
    for (int i = 0; i < n; ++i)
        pm.base.push_back(outer.base[std::size_t(i)].compose(inner.base));
    pm.linear = comp(outer.linear) * inner.linear;
    pm.w_from_w = comp(outer.w_from_w) * inner.w_from_w;
    // z' = L_inner z, w' = Ww w + Wz z, then the outer w-blocks act on (z', w')
    SeriesMatrix<K> lifted = comp(outer.w_from_z) * inner.linear;
    pm.w_from_z = comp(outer.w_from_w) * inner.w_from_z + lifted;
    return pm;
}

} // namespace jetfol
