#pragma once

#include "projective_group.hpp"
#include "rng.hpp"

#include <cmath>
#include <limits>
#include <optional>

namespace jetfol {

/// Raised where the birational orbit-map inverse degenerates: Newton refuses
/// to converge or its Jacobian is numerically singular. The pole divisor is
/// represented implicitly as the set of points reported this way.
struct pole_locus_error : error {
    using error::error;
};

using Cplx = std::complex<double>;
using CMat = Mat<Cplx>;
using CVec = std::vector<Cplx>;
using CPoint = ProlongPoint<Cplx>;
using CGroup = GroupElement<Cplx>;

inline double mat_norm(const CMat& m)
{
    double s = 0.0;
    for (const Cplx& v : m.a)
        s = std::max(s, std::abs(v));
    return s;
}

inline CVec zero_cvec(int n)
{
    CVec v;
    v.resize(std::size_t(n));
    return v;
}

inline double vec_norm(const CVec& v)
{
    double s = 0.0;
    for (const Cplx& x : v)
        s = std::max(s, std::abs(x));
    return s;
}

/// Basis of sl(N): off-diagonal units first, then the diagonal differences.
inline std::vector<CMat> sl_basis(int big_n)
{
    std::vector<CMat> basis;
    for (int i = 0; i < big_n; ++i)
        for (int j = 0; j < big_n; ++j) {
            if (i == j)
                continue;
            CMat e(big_n, big_n);
            e(i, j) = 1.0;
            basis.push_back(std::move(e));
        }
    for (int k = 0; k + 1 < big_n; ++k) {
        CMat e(big_n, big_n);
        e(k, k) = 1.0;
        e(k + 1, k + 1) = -1.0;
        basis.push_back(std::move(e));
    }
    return basis;
}

/// Matrix exponential by scaling and squaring; the Taylor tail is cut once
/// terms drop below 1e-18 relative to the accumulated sum.
inline CMat expm(const CMat& x)
{
    int n = x.rows;
    double norm = 0.0;
    for (int i = 0; i < n; ++i) {
        double row = 0.0;
        for (int j = 0; j < n; ++j)
            row += std::abs(x(i, j));
        norm = std::max(norm, row);
    }
    int squarings = 0;
    while (norm > 0.5) {
        norm /= 2.0;
        ++squarings;
    }
    CMat scaled = x;
    double factor = std::ldexp(1.0, -squarings);
    for (Cplx& v : scaled.a)
        v *= factor;
    CMat acc = CMat::identity(n);
    CMat term = CMat::identity(n);
    for (int k = 1; k <= 40; ++k) {
        term = term * scaled;
        for (Cplx& v : term.a)
            v /= double(k);
        acc = acc + term;
        if (mat_norm(term) < 1e-18)
            break;
    }
    for (int s = 0; s < squarings; ++s)
        acc = acc * acc;
    return acc;
}

inline CVec point_coords(const CPoint& p)
{
    int n = p.n();
    CVec c;
    c.reserve(std::size_t(n + n + n * n));
    for (const Cplx& v : p.y)
        c.push_back(v);
    for (const Cplx& v : p.z)
        c.push_back(v);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            c.push_back(p.w(i, j));
    return c;
}

inline CPoint coords_point(const CVec& c, int n)
{
    CPoint p;
    p.y.assign(c.begin(), c.begin() + n);
    p.z.assign(c.begin() + n, c.begin() + 2 * n);
    p.w = CMat(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            p.w(i, j) = c[std::size_t(2 * n + i * n + j)];
    return p;
}

inline double point_distance(const CPoint& a, const CPoint& b)
{
    CVec ca = point_coords(a), cb = point_coords(b);
    double s = 0.0;
    for (std::size_t i = 0; i < ca.size(); ++i)
        s = std::max(s, std::abs(ca[i] - cb[i]));
    return s;
}

struct OrbitOptions {
    double fd_step = 1e-6;
    double newton_tol = 1e-12;
    int max_iterations = 80;
};

/// Columns are d/dt (g exp(t E_a)) . q at t = 0, by central differences.
inline CMat orbit_jacobian(const CGroup& g, const CPoint& q, double h)
{
    int n = q.n();
    int dim = n * n + 2 * n;
    std::vector<CMat> basis = sl_basis(n + 1);
    CMat jac(dim, dim);
    for (int col = 0; col < dim; ++col) {
        CMat step = basis[std::size_t(col)];
        for (Cplx& v : step.a)
            v *= h;
        CGroup gp(g.m * expm(step));
        for (Cplx& v : step.a)
            v = -v;
        CGroup gm(g.m * expm(step));
        CVec plus = point_coords(prolonged_action(gp, q));
        CVec minus = point_coords(prolonged_action(gm, q));
        for (int row = 0; row < dim; ++row)
            jac(row, col) = (plus[std::size_t(row)] - minus[std::size_t(row)]) / (2.0 * h);
    }
    return jac;
}

/// Numerically invert the orbit map g -> g . q at the target x: damped
/// Newton from the translation matching the base points. Failure to converge
/// is reported as membership in the pole locus.
inline CGroup orbit_invert(const CPoint& q, const CPoint& x, const OrbitOptions& opts = {})
{
    int n = q.n();
    int dim = n * n + 2 * n;
    std::vector<CMat> basis = sl_basis(n + 1);
    CGroup g = CGroup::translation(x.y) * CGroup::translation(q.y).inverse();
    try {
        for (int iter = 0; iter < opts.max_iterations; ++iter) {
            CVec cur = point_coords(prolonged_action(g, q));
            CVec target = point_coords(x);
            CVec resid = zero_cvec(dim);
            double rnorm = 0.0;
            for (int i = 0; i < dim; ++i) {
                resid[std::size_t(i)] = target[std::size_t(i)] - cur[std::size_t(i)];
                rnorm = std::max(rnorm, std::abs(resid[std::size_t(i)]));
            }
            if (rnorm < opts.newton_tol) {
                // points in the orbit closure can be reached only by letting
                // the group element degenerate; treat that as a pole hit
                CMat ginv = inverse(g.m);
                if (mat_norm(ginv) * mat_norm(g.m) > 1e8)
                    throw pole_locus_error("orbit_invert: degenerate solution");
                return g;
            }
            CMat jac = orbit_jacobian(g, q, opts.fd_step);
            CVec delta = solve(jac, resid);
            // backtracking on the residual norm
            double scale = 1.0;
            for (int half = 0; half < 12; ++half) {
                CMat step(n + 1, n + 1);
                for (int a = 0; a < dim; ++a) {
                    if (std::abs(delta[std::size_t(a)]) == 0.0)
                        continue;
                    CMat contrib = basis[std::size_t(a)];
                    for (Cplx& v : contrib.a)
                        v *= scale * delta[std::size_t(a)];
                    step = step + contrib;
                }
                CGroup trial(g.m * expm(step));
                double tnorm;
                try {
                    tnorm = point_distance(prolonged_action(trial, q), x);
                } catch (const error&) {
                    scale /= 2.0;
                    continue;
                }
                if (tnorm < rnorm) {
                    g = trial;
                    break;
                }
                scale /= 2.0;
                if (half == 11)
                    throw pole_locus_error("orbit_invert: no descent direction");
            }
        }
    } catch (const pole_locus_error&) {
        throw;
    } catch (const error&) {
        throw pole_locus_error("orbit_invert: iteration left the chart");
    }
    throw pole_locus_error("orbit_invert: Newton did not converge");
}

/// The pulled-back Maurer-Cartan form of the orbit through q: at a point x
/// off the pole locus, value(x, v) is the unique traceless xi with
/// d/dt (g exp(t xi)) . q = v at g = orbit_invert(q, x). Linear in v.
struct MaurerCartanForm {
    CPoint base;
    OrbitOptions opts;

    explicit MaurerCartanForm(CPoint q, OrbitOptions o = {}) : base(std::move(q)), opts(o) {}

    int n() const { return base.n(); }

    CGroup group_at(const CPoint& x) const { return orbit_invert(base, x, opts); }

    CMat value_at_group(const CGroup& g, const CVec& v) const
    {
        CMat jac = orbit_jacobian(g, base, opts.fd_step);
        CVec xi = solve(jac, v);
        std::vector<CMat> basis = sl_basis(n() + 1);
        CMat out(n() + 1, n() + 1);
        for (std::size_t a = 0; a < basis.size(); ++a)
            for (std::size_t e = 0; e < out.a.size(); ++e)
                out.a[e] += xi[a] * basis[a].a[e];
        return out;
    }

    CMat value(const CPoint& x, const CVec& v) const { return value_at_group(group_at(x), v); }

    /// All coordinate-direction values at once (one inversion, one Jacobian).
    std::vector<CMat> coordinate_values(const CPoint& x) const
    {
        CGroup g = group_at(x);
        CMat jac = orbit_jacobian(g, base, opts.fd_step);
        CMat jinv = inverse(jac);
        std::vector<CMat> basis = sl_basis(n() + 1);
        int dim = n() * n() + 2 * n();
        std::vector<CMat> out;
        out.reserve(std::size_t(dim));
        for (int dir = 0; dir < dim; ++dir) {
            CMat m(n() + 1, n() + 1);
            for (std::size_t a = 0; a < basis.size(); ++a)
                for (std::size_t e = 0; e < m.a.size(); ++e)
                    m.a[e] += jinv(int(a), dir) * basis[a].a[e];
            out.push_back(std::move(m));
        }
        return out;
    }

    bool is_pole(const CPoint& x) const
    {
        try {
            (void)group_at(x);
            return false;
        } catch (const pole_locus_error&) {
            return true;
        }
    }
};

inline CMat ad(const CGroup& g, const CMat& xi) { return g.m * xi * inverse(g.m); }

/// Size of the g/h component: the isotropy algebra of the chart origin is
/// cut out by the vanishing of the first column below the corner.
inline double h_vertical_residual(const CMat& xi)
{
    double s = 0.0;
    for (int i = 1; i < xi.rows; ++i)
        s = std::max(s, std::abs(xi(i, 0)));
    return s;
}

struct FormDiagnostics {
    double flatness_max = 0.0;
    double invariance_max = 0.0;
    double verticality_max = 0.0;
    double step = 0.0;
    int samples = 0;
};

/// Sample a point of the orbit near the reference by acting with exp of a
/// random small algebra element.
inline CPoint sample_orbit_point(const MaurerCartanForm& form, Rng& rng, double spread = 0.4)
{
    int n = form.n();
    std::vector<CMat> basis = sl_basis(n + 1);
    for (;;) {
        CMat xi(n + 1, n + 1);
        for (const CMat& e : basis) {
            Cplx c = spread * rng.complex_box();
            for (std::size_t k = 0; k < xi.a.size(); ++k)
                xi.a[k] += c * e.a[k];
        }
        try {
            CPoint x = prolonged_action(CGroup(expm(xi)), form.base);
            if (!form.is_pole(x))
                return x;
        } catch (const error&) {
        }
    }
}

/// Residual report for the structural identities of the form: flatness
/// d Omega + 1/2 [Omega, Omega] = 0 by central differences at the given
/// step, invariance under the prolonged action, and verticality of the
/// values on fiber directions.
inline FormDiagnostics form_diagnostics(const MaurerCartanForm& form, Rng& rng, int samples,
                                        double step = 1e-4)
{
    int n = form.n();
    int dim = n * n + 2 * n;
    FormDiagnostics out;
    out.step = step;
    out.samples = samples;

    for (int s = 0; s < samples; ++s) {
        CPoint x = sample_orbit_point(form, rng);
        CVec xc = point_coords(x);

        // flatness: partial_i Omega_j - partial_j Omega_i + [Omega_i, Omega_j]
        std::vector<CMat> at_x = form.coordinate_values(x);
        std::vector<std::vector<CMat>> shifted_plus, shifted_minus;
        shifted_plus.reserve(std::size_t(dim));
        shifted_minus.reserve(std::size_t(dim));
        bool pole_hit = false;
        for (int dir = 0; dir < dim && !pole_hit; ++dir) {
            CVec cp = xc, cm = xc;
            cp[std::size_t(dir)] += step;
            cm[std::size_t(dir)] -= step;
            try {
                shifted_plus.push_back(form.coordinate_values(coords_point(cp, n)));
                shifted_minus.push_back(form.coordinate_values(coords_point(cm, n)));
            } catch (const pole_locus_error&) {
                pole_hit = true;
            }
        }
        if (pole_hit) {
            --s;
            continue;
        }
        for (int i = 0; i < dim; ++i)
            for (int j = i + 1; j < dim; ++j) {
                CMat di_oj = shifted_plus[std::size_t(i)][std::size_t(j)] -
                             shifted_minus[std::size_t(i)][std::size_t(j)];
                CMat dj_oi = shifted_plus[std::size_t(j)][std::size_t(i)] -
                             shifted_minus[std::size_t(j)][std::size_t(i)];
                for (Cplx& v : di_oj.a)
                    v /= 2.0 * step;
                for (Cplx& v : dj_oi.a)
                    v /= 2.0 * step;
                CMat bracket = at_x[std::size_t(i)] * at_x[std::size_t(j)] -
                               at_x[std::size_t(j)] * at_x[std::size_t(i)];
                out.flatness_max = std::max(out.flatness_max, mat_norm(di_oj - dj_oi + bracket));
            }

        // invariance under a random group element
        try {
            CMat xi(n + 1, n + 1);
            std::vector<CMat> basis = sl_basis(n + 1);
            for (const CMat& e : basis) {
                Cplx c = 0.3 * rng.complex_box();
                for (std::size_t k = 0; k < xi.a.size(); ++k)
                    xi.a[k] += c * e.a[k];
            }
            CGroup g(expm(xi));
            CPoint gx = prolonged_action(g, x);
            CVec v = zero_cvec(dim);
            for (int k = 0; k < dim; ++k)
                v[std::size_t(k)] = rng.complex_box();
            // push v forward by central differences of the action
            double h = 1e-6;
            CVec cp = xc, cm = xc;
            for (int k = 0; k < dim; ++k) {
                cp[std::size_t(k)] = xc[std::size_t(k)] + h * v[std::size_t(k)];
                cm[std::size_t(k)] = xc[std::size_t(k)] - h * v[std::size_t(k)];
            }
            CVec ap = point_coords(prolonged_action(g, coords_point(cp, n)));
            CVec am = point_coords(prolonged_action(g, coords_point(cm, n)));
            CVec pushed = zero_cvec(dim);
            for (int k = 0; k < dim; ++k)
                pushed[std::size_t(k)] = (ap[std::size_t(k)] - am[std::size_t(k)]) / (2.0 * h);
            CMat lhs = form.value(gx, pushed);
            CMat rhs = form.value(x, v);
            out.invariance_max = std::max(out.invariance_max, mat_norm(lhs - rhs));
        } catch (const pole_locus_error&) {
            // skip the invariance sample at poles, keep the rest
        }

        // verticality on fiber directions
        for (int k = n; k < dim; ++k) {
            CVec v = zero_cvec(dim);
            v[std::size_t(k)] = 1.0;
            CMat xi = form.value(x, v);
            out.verticality_max = std::max(out.verticality_max, h_vertical_residual(xi));
        }
    }
    return out;
}

} // namespace jetfol
