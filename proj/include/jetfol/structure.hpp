#pragma once

#include "maurer_cartan.hpp"
#include "series.hpp"

namespace jetfol {

/// Codimension-one projective chart data: a submersion germ phi(x) in the
/// transverse variable, kept as an exact series together with enough
/// derivatives for the second prolongation.
struct ProjectiveChart {
    using Series = TruncatedSeries<GaussianRational>;

    Series phi;   // one-variable series, phi'(0) != 0
    Series d1, d2, d3;

    explicit ProjectiveChart(Series map) : phi(std::move(map))
    {
        if (phi.num_vars() != 1)
            throw error("ProjectiveChart: expects a one-variable series");
        d1 = phi.diff(0);
        d2 = d1.diff(0);
        d3 = d2.diff(0);
        if (field_traits<GaussianRational>::is_zero(d1.constant_term()))
            throw error("ProjectiveChart: map is critical at the origin");
    }

    /// Second prolongation of the chart: (x, z, w) -> (phi, phi' z, w + z phi''/phi').
    CPoint prolong(Cplx x, Cplx z, Cplx w) const
    {
        CVec pt = {x};
        Cplx p0 = phi.evaluate<Cplx>(pt);
        Cplx p1 = d1.evaluate<Cplx>(pt);
        Cplx p2 = d2.evaluate<Cplx>(pt);
        if (std::abs(p1) < 1e-12)
            throw error("ProjectiveChart: critical point in the sample range");
        CPoint out;
        out.y = {p0};
        out.z = {p1 * z};
        out.w = CMat(1, 1);
        out.w(0, 0) = w + z * p2 / p1;
        return out;
    }

    /// Differential of the prolonged chart at (x, z, w) on the foliated
    /// chart directions (x, y, z, w); the leaf direction is annihilated.
    CMat prolong_diff(Cplx x, Cplx z, Cplx /*w*/) const
    {
        CVec pt = {x};
        Cplx p1 = d1.evaluate<Cplx>(pt);
        Cplx p2 = d2.evaluate<Cplx>(pt);
        Cplx p3 = d3.evaluate<Cplx>(pt);
        Cplx u = p2 / p1;                 // phi''/phi'
        Cplx du = p3 / p1 - u * u;        // (phi''/phi')'
        CMat d(3, 4);
        d(0, 0) = p1;
        d(1, 0) = p2 * z;
        d(1, 2) = p1;
        d(2, 0) = du * z;
        d(2, 2) = u;
        d(2, 3) = 1.0;
        return d;
    }
};

/// Section of the second prolongation over a foliated two-dimensional chart
/// (one transverse, one leaf variable): (x, y) -> (x, y, z(x, y), w(x, y)).
struct ProlongationSection {
    using Series = TruncatedSeries<GaussianRational>;

    Series z, w; // two-variable series

    ProlongationSection(Series zs, Series ws) : z(std::move(zs)), w(std::move(ws))
    {
        if (z.num_vars() != 2 || w.num_vars() != 2)
            throw error("ProlongationSection: expects two-variable series");
    }

    /// The jet of the unit normal frame: z = 1, w = 0.
    static ProlongationSection unit(int order)
    {
        return {Series::constant(2, order, GaussianRational(1)), Series::zero(2, order)};
    }
};

struct StructureReport {
    double chart_compat_max = 0.0;   // prolonged charts vs. prolonged overlap action
    double overlap_form_max = 0.0;   // pulled-back forms across charts
    double section_flatness = 0.0;   // flatness of the section pullback
    double kernel_tangent_max = 0.0; // g/h component on leaf directions
    double kernel_transverse_min = 0.0;
    double step = 0.0;
    int samples = 0;
};

/// Sample the prolonged-chart pullbacks of the orbit form: chart overlap
/// agreement, and (when a section is given) the induced data on the base.
/// Sampling stays in a small polydisk so that truncated chart series are
/// accurate well below the reported residuals.
inline StructureReport prolong_structure_pullback(
    const std::vector<ProjectiveChart>& charts,
    const std::vector<std::tuple<int, int, CGroup>>& overlaps, const MaurerCartanForm& form,
    const std::optional<ProlongationSection>& section, Rng& rng, int samples,
    double fd_step = 1e-5)
{
    if (form.n() != 1)
        throw error("prolong_structure_pullback: implemented for one transverse dimension");
    StructureReport rep;
    rep.samples = samples;
    rep.step = fd_step;

    auto sample_box = [&](double radius) {
        return Cplx(radius * (2.0 * rng.uniform() - 1.0), radius * (2.0 * rng.uniform() - 1.0));
    };

    auto pullback = [&](const ProjectiveChart& chart, Cplx x, Cplx z, Cplx w,
                        const CVec& v4) -> CMat {
        CPoint image = chart.prolong(x, z, w);
        CMat d = chart.prolong_diff(x, z, w);
        CVec v3(3);
        for (int r = 0; r < 3; ++r) {
            Cplx acc = 0.0;
            for (int c = 0; c < 4; ++c)
                acc += d(r, c) * v4[std::size_t(c)];
            v3[std::size_t(r)] = acc;
        }
        return form.value(image, v3);
    };

    // chart compatibility and overlap agreement of the forms
    for (const auto& [i, j, g] : overlaps) {
        const ProjectiveChart& ci = charts[std::size_t(i)];
        const ProjectiveChart& cj = charts[std::size_t(j)];
        for (int s = 0; s < samples; ++s) {
            Cplx x = sample_box(0.1);
            Cplx z = 1.0 + sample_box(0.2);
            Cplx w = sample_box(0.5);
            CPoint pi = ci.prolong(x, z, w);
            CPoint pj = cj.prolong(x, z, w);
            try {
                rep.chart_compat_max =
                    std::max(rep.chart_compat_max, point_distance(pi, prolonged_action(g, pj)));
                for (int dir = 0; dir < 4; ++dir) {
                    CVec v(4);
                    v[std::size_t(dir)] = 1.0;
                    CMat oi = pullback(ci, x, z, w, v);
                    CMat oj = pullback(cj, x, z, w, v);
                    rep.overlap_form_max = std::max(rep.overlap_form_max, mat_norm(oi - oj));
                }
            } catch (const pole_locus_error&) {
                --s;
            }
        }
    }

    if (!section)
        return rep;

    const ProjectiveChart& chart = charts.at(0);
    const ProlongationSection& sec = *section;
    auto section_values = [&](Cplx x, Cplx y) -> std::pair<CMat, CMat> {
        // Gamma(d/dx), Gamma(d/dy) of the pulled-back form at (x, y)
        CVec pt = {x, y};
        Cplx zs = sec.z.evaluate<Cplx>(pt);
        Cplx ws = sec.w.evaluate<Cplx>(pt);
        CVec vx = {1.0, 0.0, sec.z.diff(0).evaluate<Cplx>(pt), sec.w.diff(0).evaluate<Cplx>(pt)};
        CVec vy = {0.0, 1.0, sec.z.diff(1).evaluate<Cplx>(pt), sec.w.diff(1).evaluate<Cplx>(pt)};
        return {pullback(chart, x, zs, ws, vx), pullback(chart, x, zs, ws, vy)};
    };

    rep.kernel_transverse_min = std::numeric_limits<double>::infinity();
    for (int s = 0; s < samples; ++s) {
        Cplx x = sample_box(0.1);
        Cplx y = sample_box(0.1);
        try {
            auto [gx, gy] = section_values(x, y);
            rep.kernel_tangent_max = std::max(rep.kernel_tangent_max, h_vertical_residual(gy));
            rep.kernel_transverse_min =
                std::min(rep.kernel_transverse_min, h_vertical_residual(gx));

            // flatness of the section pullback by central differences
            auto [gxp, gyp] = section_values(x + fd_step, y);
            auto [gxm, gym] = section_values(x - fd_step, y);
            auto [hxp, hyp] = section_values(x, y + fd_step);
            auto [hxm, hym] = section_values(x, y - fd_step);
            (void)gxp;
            (void)gxm;
            (void)hyp;
            (void)hym;
            CMat dx_gy = gyp - gym;   // d/dx Gamma_y
            CMat dy_gx = hxp - hxm;   // d/dy Gamma_x
            for (Cplx& v : dx_gy.a)
                v /= 2.0 * fd_step;
            for (Cplx& v : dy_gx.a)
                v /= 2.0 * fd_step;
            auto [g0x, g0y] = section_values(x, y);
            CMat bracket = g0x * g0y - g0y * g0x;
            rep.section_flatness =
                std::max(rep.section_flatness, mat_norm(dx_gy - dy_gx + bracket));
        } catch (const pole_locus_error&) {
            --s;
        }
    }
    return rep;
}

} // namespace jetfol
