#pragma once

#include "jets.hpp"
#include "linalg.hpp"

namespace jetfol {

/// Element of PSL(n+1) acting on the affine chart of projective n-space
/// around p = (1 : 0 : ... : 0). Matrices are normalized so the top-left
/// entry is one whenever it is nonzero (otherwise the first nonzero entry
/// is scaled to one). Isotropy elements of p have vanishing first column
/// below the corner and decompose into an n x n block A and the row vector
/// B = (m_01, ..., m_0n).
template <class K> struct GroupElement {
    using traits = field_traits<K>;

    Mat<K> m; // (n+1) x (n+1)

    GroupElement() = default;
    explicit GroupElement(Mat<K> mat) : m(std::move(mat))
    {
        if (m.rows != m.cols || m.rows < 2)
            throw error("GroupElement: need a square matrix of size at least 2");
        normalize();
    }

    int n() const { return m.rows - 1; }

    static GroupElement identity(int n) { return GroupElement(Mat<K>::identity(n + 1)); }

    /// Translation-type element moving the chart origin to y.
    static GroupElement translation(const std::vector<K>& y)
    {
        int n = int(y.size());
        Mat<K> t = Mat<K>::identity(n + 1);
        for (int i = 0; i < n; ++i)
            t(i + 1, 0) = y[std::size_t(i)];
        return GroupElement(std::move(t));
    }

    /// Isotropy element of the origin from its blocks.
    static GroupElement from_blocks(const Mat<K>& a, const std::vector<K>& b)
    {
        int n = a.rows;
        if (a.cols != n || int(b.size()) != n)
            throw error("GroupElement: block size mismatch");
        Mat<K> m(n + 1, n + 1);
        m(0, 0) = traits::one();
        for (int j = 0; j < n; ++j)
            m(0, j + 1) = b[std::size_t(j)];
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                m(i + 1, j + 1) = a(i, j);
        return GroupElement(std::move(m));
    }

    void normalize()
    {
        if (traits::pivot_size(m(0, 0)) > 0) {
            scale_by(traits::one() / m(0, 0));
            return;
        }
        for (int i = 0; i < m.rows; ++i)
            for (int j = 0; j < m.cols; ++j)
                if (traits::pivot_size(m(i, j)) > 0) {
                    scale_by(traits::one() / m(i, j));
                    return;
                }
        throw error("GroupElement: zero matrix");
    }

    bool is_isotropy() const
    {
        for (int i = 1; i < m.rows; ++i) {
            if constexpr (traits::exact) {
                if (!traits::is_zero(m(i, 0)))
                    return false;
            } else {
                if (traits::pivot_size(m(i, 0)) > 1e-9)
                    return false;
            }
        }
        return traits::pivot_size(m(0, 0)) > 0;
    }

    Mat<K> block_a() const
    {
        Mat<K> a(n(), n());
        for (int i = 0; i < n(); ++i)
            for (int j = 0; j < n(); ++j)
                a(i, j) = m(i + 1, j + 1);
        return a;
    }

    std::vector<K> block_b() const
    {
        std::vector<K> b;
        b.resize(std::size_t(n()));
        for (int j = 0; j < n(); ++j)
            b[std::size_t(j)] = m(0, j + 1);
        return b;
    }

    GroupElement inverse() const { return GroupElement(jetfol::inverse(m)); }

    friend GroupElement operator*(const GroupElement& x, const GroupElement& y)
    {
        return GroupElement(x.m * y.m);
    }

  private:
    void scale_by(const K& s)
    {
        for (K& v : m.a)
            v = s * v;
    }
};

/// Point of the second prolongation in the affine jet coordinates (y, Z, W).
template <class K> struct ProlongPoint {
    std::vector<K> y;
    std::vector<K> z;
    Mat<K> w;

    int n() const { return int(y.size()); }

    bool z_is_zero() const
    {
        for (const K& v : z)
            if (!field_traits<K>::is_zero(v))
                return false;
        return true;
    }
};

/// Action on the affine chart: y -> (first-row-free part) / (1 + B y).
template <class K>
std::vector<K> affine_action(const GroupElement<K>& g, const std::vector<K>& y)
{
    using traits = field_traits<K>;
    int n = g.n();
    if (int(y.size()) != n)
        throw error("affine_action: dimension mismatch");
    K den = g.m(0, 0);
    for (int j = 0; j < n; ++j)
        den += g.m(0, j + 1) * y[std::size_t(j)];
    if (traits::pivot_size(den) <= 0)
        throw error("affine_action: point leaves the affine chart");
    std::vector<K> out(std::size_t(n), traits::zero());
    for (int i = 0; i < n; ++i) {
        K num = g.m(i + 1, 0);
        for (int j = 0; j < n; ++j)
            num += g.m(i + 1, j + 1) * y[std::size_t(j)];
        out[std::size_t(i)] = num / den;
    }
    return out;
}

/// Power-series germ of the chart action of an origin-fixing element.
template <class K>
std::vector<TruncatedSeries<K>> affine_action_series(const GroupElement<K>& g, int order)
{
    using Series = TruncatedSeries<K>;
    using traits = field_traits<K>;
    int n = g.n();
    for (int i = 1; i <= n; ++i)
        if (traits::exact && !traits::is_zero(g.m(i, 0)))
            throw error("affine_action_series: element does not fix the origin");
    Series den = Series::constant(n, order, g.m(0, 0));
    for (int j = 0; j < n; ++j)
        den += g.m(0, j + 1) * Series::variable(n, order, j);
    Series inv_den = den.reciprocal();
    std::vector<Series> out;
    for (int i = 0; i < n; ++i) {
        Series num = Series::zero(n, order);
        for (int j = 0; j < n; ++j)
            num += g.m(i + 1, j + 1) * Series::variable(n, order, j);
        out.push_back(num * inv_den);
    }
    return out;
}

/// Fiber action of an isotropy element on the jet coordinates over the fixed
/// point: (Z, W) -> (A Z, (A^T)^{-1} W A^T - (B Z) Id - (A^T)^{-1} B (A Z)^T).
template <class K>
std::pair<std::vector<K>, Mat<K>> fiber_action(const Mat<K>& a, const std::vector<K>& b,
                                               const std::vector<K>& z, const Mat<K>& w)
{
    using traits = field_traits<K>;
    int n = a.rows;
    Mat<K> at = a.transpose();
    Mat<K> ati = inverse(at); // singular A rejected here
    std::vector<K> az = a.apply(z);
    K btz = traits::zero();
    for (int i = 0; i < n; ++i)
        btz += b[std::size_t(i)] * z[std::size_t(i)];
    Mat<K> out = ati * w * at;
    for (int i = 0; i < n; ++i)
        out(i, i) -= btz;
    std::vector<K> atib = ati.apply(b);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            out(i, j) -= atib[std::size_t(i)] * az[std::size_t(j)];
    return {std::move(az), std::move(out)};
}

template <class K>
std::pair<std::vector<K>, Mat<K>> fiber_action(const GroupElement<K>& h, const std::vector<K>& z,
                                               const Mat<K>& w)
{
    if (!h.is_isotropy())
        throw error("fiber_action: element does not fix the chart origin");
    return fiber_action(h.block_a(), h.block_b(), z, w);
}

/// Full prolonged action on (y, Z, W): the base moves by the chart action and
/// the fiber data by the isotropy part of the translation conjugate.
template <class K>
ProlongPoint<K> prolonged_action(const GroupElement<K>& g, const ProlongPoint<K>& pt)
{
    std::vector<K> y2 = affine_action(g, pt.y);
    GroupElement<K> h =
        GroupElement<K>::translation(y2).inverse() * g * GroupElement<K>::translation(pt.y);
    auto [z2, w2] = fiber_action(h.block_a(), h.block_b(), pt.z, pt.w);
    return {std::move(y2), std::move(z2), std::move(w2)};
}

/// Jet-calculus route to the same action: expand the origin-fixed germ of the
/// conjugated element, take the first prolongation of its pushforward, and
/// evaluate the fiber blocks at the origin. Exact cross-check for the fast
/// path above.
template <class K>
ProlongPoint<K> prolonged_action_jet_oracle(const GroupElement<K>& g, const ProlongPoint<K>& pt,
                                            int series_order = 3)
{
    int n = g.n();
    std::vector<K> y2 = affine_action(g, pt.y);
    GroupElement<K> h =
        GroupElement<K>::translation(y2).inverse() * g * GroupElement<K>::translation(pt.y);
    std::vector<TruncatedSeries<K>> germ = affine_action_series(h, series_order);
    ProlongedMap<K> pm = prolong_map_1(germ);
    auto blocks = pm.at_origin();
    std::vector<K> z2 = blocks.a.apply(pt.z);
    // flatten W row-major, apply the (w,z) blocks, reshape
    std::vector<K> wflat(std::size_t(n * n));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            wflat[std::size_t(i * n + j)] = pt.w(i, j);
    std::vector<K> w2flat = blocks.ww.apply(wflat);
    std::vector<K> wz = blocks.wz.apply(pt.z);
    Mat<K> w2(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            w2(i, j) = w2flat[std::size_t(i * n + j)] + wz[std::size_t(i * n + j)];
    return {std::move(y2), std::move(z2), std::move(w2)};
}

/// Result of the linearized isotropy computation at a fiber point.
template <class K> struct IsotropyNullspace {
    int dimension = 0;
    /// Basis vectors packed as (X row-major, B).
    std::vector<std::vector<K>> basis;
};

/// Isotropy elements near the identity over the fixed base point solve the
/// linear homogeneous system (with A = Id + X)
///   X Z = 0,   B Z^T = W X^T - X^T W
/// in (X, B). Dimension zero certifies that the stabilizer of (Z, W) is
/// trivial; Z = 0 always yields positive dimension.
template <class K>
IsotropyNullspace<K> isotropy_nullspace(const std::vector<K>& z, const Mat<K>& w)
{
    int n = int(z.size());
    if (w.rows != n || w.cols != n)
        throw error("isotropy_nullspace: dimension mismatch");
    int cols = n * n + n; // unknowns: X (row-major), then B
    Mat<K> sys(n + n * n, cols);
    // X Z = 0
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            sys(i, i * n + j) = z[std::size_t(j)];
    // B Z^T - W X^T + X^T W = 0, row (a, b)
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            int row = n + a * n + b;
            sys(row, n * n + a) = z[std::size_t(b)];
            for (int c = 0; c < n; ++c) {
                sys(row, b * n + c) -= w(a, c);  // -(W X^T)_{ab}
                sys(row, c * n + a) += w(c, b);  // +(X^T W)_{ab}
            }
        }
    IsotropyNullspace<K> out;
    out.basis = nullspace(sys);
    out.dimension = int(out.basis.size());
    return out;
}

/// Trace identity for the unsimplified fixed-point equation: the trace of
///   (A^T)^{-1} W A^T - (B Z) Id - (A^T)^{-1} B (A Z)^T - W
/// equals -(n+1) B Z identically; the conjugation part is traceless.
template <class K> struct TraceIdentity {
    K residual_trace;       // trace of the displayed difference
    K conjugation_residual; // trace((A^T)^{-1} W A^T) - trace(W)
    K b_dot_z;
};

template <class K>
TraceIdentity<K> trace_identity_residual(const Mat<K>& a, const std::vector<K>& b,
                                         const std::vector<K>& z, const Mat<K>& w)
{
    using traits = field_traits<K>;
    auto [az, w2] = fiber_action(a, b, z, w);
    (void)az;
    K btz = traits::zero();
    for (std::size_t i = 0; i < b.size(); ++i)
        btz += b[i] * z[i];
    Mat<K> at = a.transpose();
    Mat<K> conj = inverse(at) * w * at;
    return {(w2 - w).trace(), conj.trace() - w.trace(), btz};
}

/// Solution fiber of the simplified isotropy system over a diagonalized
/// point: A = diag(1, lambda_2, ..., lambda_n) with distinct entries away
/// from 1, B = (0, b_2, ..., b_n), Z = e_1. The W solutions have first
/// column b_i / (1 - lambda_i), free diagonal, zeros elsewhere; the fiber
/// dimension is exactly n.
template <class K> struct DiagonalFiber {
    Mat<K> particular;                          // the forced entries
    std::vector<std::pair<int, int>> free_slots; // diagonal positions
    int dimension = 0;
};

template <class K>
DiagonalFiber<K> diagonal_isotropy_fiber(const std::vector<K>& lambdas, const std::vector<K>& b)
{
    using traits = field_traits<K>;
    int n = int(lambdas.size()) + 1;
    if (b.size() != lambdas.size())
        throw error("diagonal_isotropy_fiber: need one b entry per eigenvalue");
    for (std::size_t i = 0; i < lambdas.size(); ++i) {
        if (traits::is_zero(lambdas[i] - traits::one()))
            throw error("diagonal_isotropy_fiber: eigenvalue equal to one");
        for (std::size_t j = i + 1; j < lambdas.size(); ++j)
            if (traits::is_zero(lambdas[i] - lambdas[j]))
                throw error("diagonal_isotropy_fiber: repeated eigenvalues");
    }
    DiagonalFiber<K> out;
    out.particular = Mat<K>(n, n);
    for (int i = 1; i < n; ++i)
        out.particular(i, 0) =
            b[std::size_t(i - 1)] / (traits::one() - lambdas[std::size_t(i - 1)]);
    for (int i = 0; i < n; ++i)
        out.free_slots.emplace_back(i, i);
    out.dimension = n;
    return out;
}

/// Tangent dimension of the incidence variety
///   { (A, B, Z, W) : A Z = Z, B Z^T = W A^T - A^T W }
/// at a point with Z != 0, computed transversally to the two scalings
/// (B, Z) -> (B/s, s Z) and (B, W) -> (t B, t W) that preserve the
/// equations. Exact rank computation; the point must satisfy the equations.
template <class K>
int incidence_tangent_dim(const Mat<K>& a, const std::vector<K>& b, const std::vector<K>& z,
                          const Mat<K>& w)
{
    using traits = field_traits<K>;
    int n = int(z.size());
    if (n < 2)
        throw error("incidence_tangent_dim: needs dimension at least two");

    // membership check
    std::vector<K> az = a.apply(z);
    for (int i = 0; i < n; ++i)
        if (!traits::is_zero(az[std::size_t(i)] - z[std::size_t(i)]))
            throw error("incidence_tangent_dim: point is not on the incidence variety");
    Mat<K> rhs = w * a.transpose() - a.transpose() * w;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (!traits::is_zero(b[std::size_t(i)] * z[std::size_t(j)] - rhs(i, j)))
                throw error("incidence_tangent_dim: point is not on the incidence variety");

    // variables: dA (n^2), dB (n), dZ (n), dW (n^2)
    int va = 0, vb = n * n, vz = n * n + n, vw = n * n + 2 * n;
    int cols = 2 * n * n + 2 * n;
    Mat<K> sys(n + n * n + 2, cols);
    // dA Z + (A - Id) dZ = 0
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            sys(i, va + i * n + j) = z[std::size_t(j)];
            sys(i, vz + j) = a(i, j) - (i == j ? traits::one() : traits::zero());
        }
    }
    // dB Z^T + B dZ^T - dW A^T - W dA^T + dA^T W + A^T dW = 0, row (p, r)
    for (int p = 0; p < n; ++p)
        for (int r = 0; r < n; ++r) {
            int row = n + p * n + r;
            sys(row, vb + p) += z[std::size_t(r)];
            sys(row, vz + r) += b[std::size_t(p)];
            for (int c = 0; c < n; ++c) {
                sys(row, vw + p * n + c) -= a(r, c);   // -(dW A^T)
                sys(row, va + r * n + c) -= w(p, c);   // -(W dA^T)
                sys(row, va + c * n + p) += w(c, r);   // +(dA^T W)
                sys(row, vw + c * n + r) += a(c, p);   // +(A^T dW)
            }
        }

    // normalization rows transverse to the two scaling directions
    int iz = -1;
    for (int i = 0; i < n; ++i)
        if (traits::pivot_size(z[std::size_t(i)]) > 0) {
            iz = i;
            break;
        }
    if (iz < 0)
        throw error("incidence_tangent_dim: Z must be nonzero");
    sys(n + n * n, vz + iz) = traits::one();
    int iw_row = -1, iw_col = -1, ib = -1;
    for (int i = 0; i < n && iw_row < 0; ++i)
        for (int j = 0; j < n; ++j)
            if (traits::pivot_size(w(i, j)) > 0) {
                iw_row = i;
                iw_col = j;
                break;
            }
    if (iw_row >= 0) {
        sys(n + n * n + 1, vw + iw_row * n + iw_col) = traits::one();
    } else {
        for (int i = 0; i < n; ++i)
            if (traits::pivot_size(b[std::size_t(i)]) > 0) {
                ib = i;
                break;
            }
        if (ib < 0)
            throw error("incidence_tangent_dim: fiber scaling direction vanishes");
        sys(n + n * n + 1, vb + ib) = traits::one();
    }
    return nullity(sys);
}

} // namespace jetfol
