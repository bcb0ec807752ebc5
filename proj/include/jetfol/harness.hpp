#pragma once

#include "connection.hpp"
#include "jets.hpp"
#include "structure.hpp"
#include "transverse_ode.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>

namespace jetfol::harness {

using K = GaussianRational;
using Series = TruncatedSeries<K>;
using SMat = SeriesMatrix<K>;

enum class ScalarMode { exact, floating };

inline const std::vector<std::string>& suite_names()
{
    static const std::vector<std::string> names = {
        "jets",     "pfaffian",      "schwarzian",        "projective",
        "isotropy", "maurer-cartan", "prolong-structure", "all"};
    return names;
}

/// Parameters of a verification run. Everything that influences a check is
/// recorded here so that a report is reproducible from its own header.
struct Scenario {
    std::string suite = "all";
    std::uint64_t seed = 42;
    int order = 10;    // series truncation order T
    int dim = 2;       // projective dimension n for the group suites
    int q = 1;         // transverse dimension of foliated charts
    int d = 2;         // tangent dimension of foliated charts
    int rank = 3;      // largest bundle rank for Pfaffian fixtures
    int ode_order = 2; // transverse equation order
    int trials = 50;
    double tolerance = 1e-9;
    ScalarMode mode = ScalarMode::exact;

    void validate() const
    {
        auto in = [](const std::string& s, const std::vector<std::string>& v) {
            return std::find(v.begin(), v.end(), s) != v.end();
        };
        if (!in(suite, suite_names())) {
            std::string msg = "unknown suite '" + suite + "'; valid suites:";
            for (const auto& s : suite_names())
                msg += " " + s;
            throw error(msg);
        }
        if (order < 4 || order > 16)
            throw error("scenario: order must be between 4 and 16");
        if (dim < 1 || dim > 4)
            throw error("scenario: dim must be between 1 and 4");
        if (q < 1 || q > 2 || d < 1 || d > 2)
            throw error("scenario: chart dimensions must be 1 or 2");
        if (rank < 1 || rank > 3)
            throw error("scenario: rank must be between 1 and 3");
        if (ode_order < 1 || ode_order > 3)
            throw error("scenario: ode_order must be between 1 and 3");
        if (trials < 1 || trials > 10000)
            throw error("scenario: trials must be between 1 and 10000");
        if (!(tolerance > 0))
            throw error("scenario: tolerance must be positive");
    }
};

struct CheckRecord {
    std::string name;
    std::string anchor; // the mathematical identity being verified
    std::string status; // pass | fail | skip
    bool exact = false; // exact verdict (no residual measured)
    double residual = 0.0;
    long long elapsed_ms = 0;
    std::string note;
};

struct Report {
    Scenario scenario;
    std::vector<CheckRecord> checks;

    int count(const std::string& status) const
    {
        int c = 0;
        for (const auto& r : checks)
            if (r.status == status)
                ++c;
        return c;
    }
    bool all_passed() const { return count("fail") == 0; }
};

namespace detail {

class Runner {
  public:
    explicit Runner(const Scenario& s) : scenario_(s) {}

    /// Exact verdict check: the callable returns true on success.
    void exact_check(const std::string& name, const std::string& anchor,
                     const std::function<bool()>& body)
    {
        CheckRecord rec;
        rec.name = name;
        rec.anchor = anchor;
        rec.exact = true;
        auto start = std::chrono::steady_clock::now();
        try {
            rec.status = body() ? "pass" : "fail";
        } catch (const std::exception& e) {
            rec.status = "fail";
            rec.note = e.what();
        }
        rec.elapsed_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                             std::chrono::steady_clock::now() - start)
                             .count();
        records_.push_back(std::move(rec));
    }

    /// Residual check: the callable returns a measured residual compared
    /// against the given tolerance.
    void residual_check(const std::string& name, const std::string& anchor, double tol,
                        const std::function<double()>& body)
    {
        CheckRecord rec;
        rec.name = name;
        rec.anchor = anchor;
        rec.exact = false;
        auto start = std::chrono::steady_clock::now();
        try {
            rec.residual = body();
            rec.status = rec.residual < tol ? "pass" : "fail";
        } catch (const std::exception& e) {
            rec.status = "fail";
            rec.residual = std::numeric_limits<double>::infinity();
            rec.note = e.what();
        }
        rec.elapsed_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                             std::chrono::steady_clock::now() - start)
                             .count();
        records_.push_back(std::move(rec));
    }

    const Scenario& scenario() const { return scenario_; }
    std::vector<CheckRecord> take() { return std::move(records_); }

  private:
    Scenario scenario_;
    std::vector<CheckRecord> records_;
};

inline Series random_series(Rng& rng, int nvars, int order, int max_degree)
{
    Series s(nvars, order);
    const IndexTable& t = s.table();
    for (int p = 0; p < t.count(); ++p) {
        if (t.at(p).degree() > max_degree)
            break;
        s.set_coeff(t.at(p), rng.scalar());
    }
    return s;
}

inline SMat random_gauge(Rng& rng, int r, int nvars, int order, int max_degree)
{
    for (;;) {
        SMat g(r, r, nvars, order);
        for (int i = 0; i < r; ++i)
            for (int j = 0; j < r; ++j)
                g(i, j) = random_series(rng, nvars, order, max_degree);
        try {
            (void)inverse(g.at_origin());
            return g;
        } catch (const error&) {
        }
    }
}

inline Mat<K> random_matrix(Rng& rng, int r, int c)
{
    Mat<K> m(r, c);
    for (auto& v : m.a)
        v = rng.scalar();
    return m;
}

inline Mat<K> random_invertible(Rng& rng, int n)
{
    for (;;) {
        Mat<K> m = random_matrix(rng, n, n);
        try {
            (void)inverse(m);
            return m;
        } catch (const error&) {
        }
    }
}

inline std::vector<K> random_vector(Rng& rng, int n)
{
    std::vector<K> v;
    v.resize(std::size_t(n));
    for (auto& x : v)
        x = rng.scalar();
    return v;
}

inline std::vector<K> random_nonzero_vector(Rng& rng, int n)
{
    for (;;) {
        std::vector<K> v = random_vector(rng, n);
        for (const auto& x : v)
            if (!x.is_zero())
                return v;
    }
}

inline Mat<K> wide_random_matrix(Rng& rng, int r, int c)
{
    Mat<K> m(r, c);
    for (auto& v : m.a)
        v = K(rng.wide_rational());
    return m;
}

inline std::vector<K> wide_random_nonzero_vector(Rng& rng, int n)
{
    std::vector<K> v;
    v.resize(std::size_t(n));
    for (;;) {
        bool nonzero = false;
        for (auto& x : v) {
            x = K(rng.wide_rational());
            if (!x.is_zero())
                nonzero = true;
        }
        if (nonzero)
            return v;
    }
}

inline Series moebius_series(long al, long be, long ga, long de, int order)
{
    Series num = Series::constant(1, order, K(be)) + K(al) * Series::variable(1, order, 0);
    Series den = Series::constant(1, order, K(de)) + K(ga) * Series::variable(1, order, 0);
    return num * den.reciprocal();
}

inline Series exp_series(int order)
{
    Series s(1, order);
    MultiIndex m(1);
    long long fact = 1;
    for (int k = 0; k <= order; ++k) {
        if (k > 0)
            fact *= k;
        m.set(0, k);
        s.set_coeff(m, GaussianRational::fraction(1, fact));
    }
    return s;
}

inline Series sin_series(int order)
{
    Series s(1, order);
    MultiIndex m(1);
    long long fact = 1;
    for (int k = 0; k <= order; ++k) {
        if (k > 0)
            fact *= k;
        if (k % 2 == 1) {
            m.set(0, k);
            s.set_coeff(m, GaussianRational::fraction(k % 4 == 1 ? 1 : -1, fact));
        }
    }
    return s;
}

inline Series cos_series(int order)
{
    Series s(1, order);
    MultiIndex m(1);
    long long fact = 1;
    for (int k = 0; k <= order; ++k) {
        if (k > 0)
            fact *= k;
        if (k % 2 == 0) {
            m.set(0, k);
            s.set_coeff(m, GaussianRational::fraction(k % 4 == 0 ? 1 : -1, fact));
        }
    }
    return s;
}

inline CPoint certified_reference_point(int n)
{
    std::vector<K> z;
    z.resize(std::size_t(n));
    z[0] = K(1);
    Mat<K> w(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            w(i, j) = K(i * n + j + 1);
    if (isotropy_nullspace<K>(z, w).dimension != 0)
        throw error("reference point failed its isotropy certificate");
    CPoint q;
    q.y.assign(std::size_t(n), 0.0);
    q.z.resize(std::size_t(n));
    for (int i = 0; i < n; ++i)
        q.z[std::size_t(i)] = z[std::size_t(i)].to_complex();
    q.w = CMat(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            q.w(i, j) = w(i, j).to_complex();
    return q;
}

inline CGroup random_small_cgroup(Rng& rng, int n, double spread)
{
    CMat xi(n + 1, n + 1);
    for (const CMat& e : sl_basis(n + 1)) {
        Cplx c = spread * rng.complex_box();
        for (std::size_t k = 0; k < xi.a.size(); ++k)
            xi.a[k] += c * e.a[k];
    }
    return CGroup(expm(xi));
}

// ---------------------------------------------------------------------------
// suite: jets
// ---------------------------------------------------------------------------

inline void run_jets(Runner& r)
{
    const Scenario& s = r.scenario();

    r.exact_check("jets/basis-matrices-inverse",
                  "change of basis between monomial jets and zeta monomials is invertible, "
                  "k <= 5, n <= 3",
                  [&] {
                      for (int n = 1; n <= 3; ++n)
                          for (int k = 1; k <= 5; ++k) {
                              const IndexTable& t = index_table(n, k);
                              int N = t.count();
                              SMat fwd(N, N, n, 2 * k), bwd(N, N, n, 2 * k);
                              for (int ci = 0; ci < N; ++ci) {
                                  const MultiIndex& i = t.at(ci);
                                  for (int rj = 0; rj < N; ++rj) {
                                      const MultiIndex& j = t.at(rj);
                                      if (!j.leq(i))
                                          continue;
                                      long long bb = i.binom(j);
                                      MultiIndex diff = i.minus(j);
                                      fwd(rj, ci) = Series::monomial(n, 2 * k, diff, K(bb));
                                      K c = K(((i.degree() - j.degree()) % 2 == 1) ? -bb : bb);
                                      bwd(rj, ci) = Series::monomial(n, 2 * k, diff, c);
                                  }
                              }
                              if (!(fwd * bwd == SMat::identity(N, n, 2 * k)))
                                  return false;
                              if (!(bwd * fwd == SMat::identity(N, n, 2 * k)))
                                  return false;
                          }
                      return true;
                  });

    r.exact_check("jets/second-jet-of-square",
                  "jet of x^2 at order two is x^2 + 2x z + z^2", [&] {
                      Series f = Series::monomial(1, 6, MultiIndex::unit(1, 0).plus(
                                                            MultiIndex::unit(1, 0)),
                                                  K(1));
                      JetElement<K> e = jet_of_function(f, 2, 1);
                      MultiIndex m0(1), m1 = MultiIndex::unit(1, 0);
                      MultiIndex m2 = m1.plus(m1);
                      return e.at(m0) == f && e.at(m1) == K(2) * Series::variable(1, 5, 0) &&
                             e.at(m2) == Series::constant(1, 4, K(1));
                  });

    r.exact_check("jets/jet-map-multiplicative",
                  "d^k(f) d^k(g) = d^k(f g) on seeded random pairs", [&] {
                      Rng rng(s.seed);
                      for (int trial = 0; trial < s.trials; ++trial) {
                          Series f = random_series(rng, 2, 6, 5);
                          Series g = random_series(rng, 2, 6, 5);
                          JetElement<K> lhs =
                              jet_mul(jet_of_function(f, 2, 2), jet_of_function(g, 2, 2));
                          if (!(lhs == jet_of_function(f * g, 2, 2)))
                              return false;
                      }
                      return true;
                  });

    r.exact_check("jets/basis-roundtrip",
                  "expressing an element in the other basis and back is the identity", [&] {
                      Rng rng(s.seed + 1);
                      for (int trial = 0; trial < 5; ++trial) {
                          JetRing ring{2, 2, 3};
                          JetElement<K> e(ring, JetBasis::zeta, 5);
                          for (auto& c : e.coeff)
                              c = random_series(rng, 2, 5, 4);
                          JetElement<K> round = basis_change(
                              basis_change(e, JetBasis::monomial_jet), JetBasis::zeta);
                          if (!(round == e))
                              return false;
                      }
                      return true;
                  });

    r.exact_check("jets/symbol-sequence-exact",
                  "symbol inclusion followed by truncation vanishes; symbols span the kernel",
                  [&] {
                      Rng rng(s.seed + 2);
                      for (int trial = 0; trial < 3; ++trial) {
                          Series f = random_series(rng, 2, 6, 4);
                          Series g = random_series(rng, 2, 6, 4);
                          if (!truncate_jet(inject_symbol<K>({f, g}, 2, 2)).is_zero())
                              return false;
                      }
                      const IndexTable& t = index_table(2, 2);
                      std::vector<JetElement<K>> images;
                      for (int a = 0; a < 2; ++a)
                          for (int b = a; b < 2; ++b)
                              images.push_back(inject_symbol<K>(
                                  {Series::variable(2, 6, a), Series::variable(2, 6, b)}, 2, 2));
                      Mat<K> m(int(images.size()), t.count());
                      for (std::size_t row = 0; row < images.size(); ++row)
                          for (int c = 0; c < t.count(); ++c)
                              m(int(row), c) = images[row].coeff[std::size_t(c)].constant_term();
                      return rank(m) == t.count() - index_table(2, 1).count();
                  });

    r.exact_check("jets/prolongation-transport",
                  "the prolonged pushforward transports 1-jets of vector fields", [&] {
                      Rng rng(s.seed + 3);
                      int n = 2;
                      for (int trial = 0; trial < 3; ++trial) {
                          std::vector<Series> phi;
                          for (int i = 0; i < n; ++i) {
                              Series p = Series::variable(n, 6, i);
                              const IndexTable& t = index_table(n, 6);
                              for (int pos = 0; pos < t.count(); ++pos)
                                  if (t.at(pos).degree() == 2)
                                      p.set_coeff(t.at(pos), rng.scalar());
                              phi.push_back(p);
                          }
                          ProlongedMap<K> pm = prolong_map_1(phi);
                          std::vector<Series> v;
                          for (int i = 0; i < n; ++i)
                              v.push_back(random_series(rng, n, 6, 3));
                          auto [z, w] = pm.apply_to_field(v);
                          std::vector<Series> inv = invert_map(phi);
                          for (int j = 0; j < n; ++j) {
                              Series acc = Series::zero(n, 5);
                              for (int i = 0; i < n; ++i)
                                  acc += phi[std::size_t(j)].diff(i) * v[std::size_t(i)];
                              Series push = acc.compose(inv);
                              if (!(z[std::size_t(j)] == push.compose(phi)))
                                  return false;
                              for (int j1 = 0; j1 < n; ++j1) {
                                  // w rows carry the derivative index
                                  if (!(w(j1, j) == push.diff(j1).compose(phi)))
                                      return false;
                              }
                          }
                      }
                      return true;
                  });

    r.exact_check("jets/prolongation-functorial",
                  "prolongation turns composition of diffeomorphisms into composition of maps",
                  [&] {
                      Rng rng(s.seed + 4);
                      int n = 2;
                      auto sample = [&] {
                          std::vector<Series> phi;
                          for (int i = 0; i < n; ++i) {
                              Series p = Series::variable(n, 6, i);
                              const IndexTable& t = index_table(n, 6);
                              for (int pos = 0; pos < t.count(); ++pos)
                                  if (t.at(pos).degree() == 2)
                                      p.set_coeff(t.at(pos), rng.scalar());
                              phi.push_back(p);
                          }
                          return phi;
                      };
                      std::vector<Series> phi = sample(), psi = sample();
                      ProlongedMap<K> ab = compose(prolong_map_1(phi), prolong_map_1(psi));
                      std::vector<Series> comp;
                      for (int i = 0; i < n; ++i)
                          comp.push_back(phi[std::size_t(i)].compose(psi));
                      ProlongedMap<K> direct = prolong_map_1(comp);
                      return ab.linear == direct.linear && ab.w_from_w == direct.w_from_w &&
                             ab.w_from_z == direct.w_from_z;
                  });
}

// ---------------------------------------------------------------------------
// suite: pfaffian
// ---------------------------------------------------------------------------

inline void run_pfaffian(Runner& r)
{
    const Scenario& s = r.scenario();

    // shared sweep over gauge-generated systems, consumed by three checks
    struct SweepResult {
        bool defect_zero = true;
        bool residual_zero = true;
        bool gauge_formula = true;
    };
    auto sweep = std::make_shared<std::optional<SweepResult>>();
    auto run_sweep = [&, sweep]() -> SweepResult {
        if (sweep->has_value())
            return **sweep;
        SweepResult out;
        Rng rng(s.seed);
        int T = 8;
        for (int trial = 0; trial < s.trials; ++trial) {
            int rank = 1 + int(rng.below(std::uint64_t(s.rank)));
            int d = 1 + int(rng.below(std::uint64_t(s.d)));
            FoliationChart chart(1, d);
            int nv = chart.num_vars();
            SMat g = random_gauge(rng, rank, nv, T, 2);
            ConnectionPatch<K> p = gauge_connection(g, chart);
            for (const auto& m : flatness_defect(p))
                if (!m.is_zero())
                    out.defect_zero = false;
            SMat frame = flat_frame(p);
            for (int k = 0; k < chart.d; ++k) {
                SMat resid = frame.diff(chart.y_var(k)) - p.a[std::size_t(k)] * frame;
                if (!resid.is_zero())
                    out.residual_zero = false;
            }
            // G restricted to the leaf through the origin
            SMat g0(rank, rank, nv, T);
            for (int i = 0; i < rank; ++i)
                for (int j = 0; j < rank; ++j) {
                    const Series& e = g(i, j);
                    const IndexTable& t = e.table();
                    for (int pos = 0; pos < t.count(); ++pos) {
                        const MultiIndex& m = t.at(pos);
                        bool pure_x = true;
                        for (int k = 0; k < d; ++k)
                            if (m[chart.y_var(k)] != 0)
                                pure_x = false;
                        if (pure_x)
                            g0(i, j).set_coeff(m, e.coeff_at(pos));
                    }
                }
            if (!(frame == g * g0.inverse()))
                out.gauge_formula = false;
        }
        *sweep = out;
        return out;
    };

    r.exact_check("pfaffian/gauge-defect-zero",
                  "dA_j/dy_i - dA_i/dy_j = [A_i, A_j] for gauge-generated systems",
                  [&] { return run_sweep().defect_zero; });
    r.exact_check("pfaffian/flat-frame-residual",
                  "the fundamental frame satisfies dF/dy_k = A_k F with zero residual",
                  [&] { return run_sweep().residual_zero; });
    r.exact_check("pfaffian/flat-frame-gauge-formula",
                  "uniqueness with fixed initial data: F = G G(x,0)^{-1}",
                  [&] { return run_sweep().gauge_formula; });

    r.exact_check("pfaffian/solution-unique-linear",
                  "solutions are unique and linear in the initial data", [&] {
                      Rng rng(s.seed + 1);
                      FoliationChart chart(1, 2);
                      SMat g = random_gauge(rng, 2, 3, 7, 2);
                      ConnectionPatch<K> p = gauge_connection(g, chart);
                      auto embed = [&](const Series& s1) {
                          Series e(3, 7);
                          const IndexTable& t = s1.table();
                          for (int pos = 0; pos < t.count(); ++pos) {
                              MultiIndex m(3);
                              m.set(0, t.at(pos)[0]);
                              if (m.degree() <= 7)
                                  e.set_coeff(m, s1.coeff_at(pos));
                          }
                          return e;
                      };
                      std::vector<Series> ga = {embed(random_series(rng, 1, 7, 3)),
                                                embed(random_series(rng, 1, 7, 3))};
                      std::vector<Series> gb = {embed(random_series(rng, 1, 7, 3)),
                                                embed(random_series(rng, 1, 7, 3))};
                      auto fa = solve_pfaffian(p, ga);
                      auto fa2 = solve_pfaffian(p, ga);
                      auto fb = solve_pfaffian(p, gb);
                      auto fsum = solve_pfaffian(p, {ga[0] + gb[0], ga[1] + gb[1]});
                      for (int i = 0; i < 2; ++i) {
                          if (!(fa[std::size_t(i)] == fa2[std::size_t(i)]))
                              return false;
                          if (!(fsum[std::size_t(i)] == fa[std::size_t(i)] + fb[std::size_t(i)]))
                              return false;
                      }
                      return true;
                  });

    r.exact_check("pfaffian/bott-involutive-flat",
                  "the normal-bundle connection of an involutive adapted frame is integrable",
                  [&] {
                      Rng rng(s.seed + 2);
                      // rank one with two leaf directions
                      FoliationChart chart(1, 2);
                      int nv = 3;
                      std::vector<PolyVectorField<K>> tangent;
                      for (int a = 0; a < 2; ++a) {
                          PolyVectorField<K> v(std::size_t(nv), Series::zero(nv, 5));
                          v[std::size_t(chart.y_var(a))] = Series::constant(nv, 5, K(1));
                          tangent.push_back(v);
                      }
                      PolyVectorField<K> w(std::size_t(nv), Series::zero(nv, 5));
                      w[0] = Series::constant(nv, 5, K(1)) +
                             random_series(rng, nv, 5, 2) * Series::variable(nv, 5, 0);
                      ConnectionPatch<K> p = bott_patch<K>(tangent, {w}, chart);
                      if (!is_flat(p) || !is_flat(system_patch(p)))
                          return false;
                      // two transverse directions through the system convention
                      FoliationChart chart2(2, 2);
                      int nv2 = 4;
                      std::vector<PolyVectorField<K>> tangent2;
                      for (int a = 0; a < 2; ++a) {
                          PolyVectorField<K> v(std::size_t(nv2), Series::zero(nv2, 5));
                          v[std::size_t(chart2.y_var(a))] = Series::constant(nv2, 5, K(1));
                          tangent2.push_back(v);
                      }
                      std::vector<PolyVectorField<K>> normal2;
                      for (int b = 0; b < 2; ++b) {
                          PolyVectorField<K> ww(std::size_t(nv2), Series::zero(nv2, 5));
                          for (int i = 0; i < 2; ++i)
                              ww[std::size_t(i)] = random_series(rng, nv2, 5, 2);
                          ww[std::size_t(b)] += Series::constant(nv2, 5, K(1));
                          normal2.push_back(ww);
                      }
                      return is_flat(system_patch(bott_patch<K>(tangent2, normal2, chart2)));
                  });

    r.exact_check("pfaffian/jet-patch-flat-sections",
                  "divided-derivative coefficients of flat sections are flat for the jet "
                  "connection",
                  [&] {
                      Rng rng(s.seed + 3);
                      FoliationChart chart(1, 1);
                      SMat g = random_gauge(rng, 2, 2, 7, 2);
                      ConnectionPatch<K> p = gauge_connection(g, chart);
                      ConnectionPatch<K> jp = transverse_jet_patch(p, 2);
                      if (!is_flat(jp))
                          return false;
                      Series init1 = Series::constant(2, 7, K(1)) + Series::variable(2, 7, 0);
                      Series init2 = Series::variable(2, 7, 0) * Series::variable(2, 7, 0);
                      auto f = solve_pfaffian(p, {init1, init2});
                      auto jets = transverse_jet_coefficients(f, chart, 2);
                      for (int k = 0; k < chart.d; ++k) {
                          auto rhs = jp.a[std::size_t(k)].apply(jets);
                          for (std::size_t i = 0; i < jets.size(); ++i)
                              if (!(jets[i].diff(chart.y_var(k)) - rhs[i]).is_zero())
                                  return false;
                      }
                      // block truncation reproduces the lower-order connection
                      ConnectionPatch<K> j1 = transverse_jet_patch(p, 1);
                      for (int i = 0; i < j1.rank; ++i)
                          for (int j = 0; j < j1.rank; ++j)
                              if (!(jp.a[0](i, j) == j1.a[0](i, j)))
                                  return false;
                      return true;
                  });

    r.exact_check("pfaffian/jet-patch-determinant",
                  "trace bookkeeping: det of the k-jet patch of a rank-one input is the "
                  "dual (k+1)-st tensor power of its conormal patch",
                  [&] {
                      Rng rng(s.seed + 4);
                      FoliationChart chart(1, 1);
                      SMat g = random_gauge(rng, 1, 2, 6, 2);
                      ConnectionPatch<K> bott = gauge_connection(g, chart);
                      ConnectionPatch<K> conormal = dual_patch(bott);
                      for (int k = 1; k <= 2; ++k) {
                          ConnectionPatch<K> det = det_patch(transverse_jet_patch(bott, k));
                          if (!(det.a[0](0, 0) == K(-(k + 1)) * conormal.a[0](0, 0)))
                              return false;
                      }
                      return true;
                  });

    r.exact_check("pfaffian/patch-operations",
                  "dual of dual is the identity; tensor of gauges is the gauge of the "
                  "Kronecker product",
                  [&] {
                      Rng rng(s.seed + 5);
                      FoliationChart chart(1, 1);
                      SMat g = random_gauge(rng, 2, 2, 6, 2);
                      SMat h = random_gauge(rng, 2, 2, 6, 2);
                      ConnectionPatch<K> p = gauge_connection(g, chart);
                      ConnectionPatch<K> p2 = gauge_connection(h, chart);
                      if (!(dual_patch(dual_patch(p)).a[0] == p.a[0]))
                          return false;
                      SMat kron(4, 4, 2, 6);
                      for (int i = 0; i < 2; ++i)
                          for (int j = 0; j < 2; ++j)
                              for (int u = 0; u < 2; ++u)
                                  for (int v = 0; v < 2; ++v)
                                      kron(i * 2 + u, j * 2 + v) = g(i, j) * h(u, v);
                      return tensor_patch(p, p2).a[0] == gauge_connection(kron, chart).a[0];
                  });
}

// ---------------------------------------------------------------------------
// suite: schwarzian
// ---------------------------------------------------------------------------

inline void run_schwarzian(Runner& r)
{
    const Scenario& s = r.scenario();

    r.exact_check("schwarzian/moebius-vanishing",
                  "Theta((ax+b)/(cx+d)) = 0 through order 12", [&] {
                      Rng rng(s.seed);
                      int T = 15;
                      for (int trial = 0; trial < 10; ++trial) {
                          long al = rng.range(-9, 9), be = rng.range(-9, 9);
                          long ga = rng.range(-9, 9), de = rng.range(1, 9);
                          if (al * de - be * ga == 0) {
                              --trial;
                              continue;
                          }
                          if (!schwarzian(moebius_series(al, be, ga, de, T)).is_zero())
                              return false;
                      }
                      return true;
                  });

    r.exact_check("schwarzian/exponential-constant", "Theta(exp) = -1/12", [&] {
        return schwarzian(exp_series(15)) ==
               Series::constant(1, 12, GaussianRational::fraction(-1, 12));
    });

    r.exact_check("schwarzian/tangent-third", "Theta(sin : cos) = 1/3 through order 8", [&] {
        return schwarzian_ratio(sin_series(12), cos_series(12)) ==
               Series::constant(1, 8, GaussianRational::fraction(1, 3));
    });

    r.exact_check("schwarzian/cocycle-defect",
                  "Theta(f o g) = Theta(f) o g (g')^2 + Theta(g) on seeded germ pairs", [&] {
                      Rng rng(s.seed + 1);
                      int T = s.order;
                      const IndexTable& t = index_table(1, T);
                      for (int trial = 0; trial < s.trials; ++trial) {
                          Series g1 = Series::variable(1, T, 0), g2 = Series::variable(1, T, 0);
                          for (int pos = 2; pos <= std::min(4, t.count() - 1); ++pos) {
                              g1.set_coeff(t.at(pos), rng.scalar());
                              g2.set_coeff(t.at(pos), rng.scalar());
                          }
                          g1.set_coeff(t.at(1), rng.nonzero_scalar());
                          if (!cocycle_defect(g1, g2).truncated(T - 5).is_zero())
                              return false;
                      }
                      return true;
                  });

    r.exact_check("schwarzian/moebius-composition-invariance",
                  "Theta(m o f) = Theta(f) for a moebius m fixing the origin", [&] {
                      Rng rng(s.seed + 2);
                      int T = 14;
                      Series m = moebius_series(3, 0, 1, 2, T);
                      Series f = Series::variable(1, T, 0);
                      const IndexTable& t = index_table(1, T);
                      for (int pos = 2; pos <= 4; ++pos)
                          f.set_coeff(t.at(pos), rng.scalar());
                      return schwarzian(m.compose({f})) == schwarzian(f);
                  });
}

// ---------------------------------------------------------------------------
// suite: projective
// ---------------------------------------------------------------------------

inline void run_projective(Runner& r)
{
    const Scenario& s = r.scenario();
    int T = s.order;

    r.exact_check("projective/bijection-roundtrip",
                  "c = b/3 - (a^2 + 2a')/12 and b = 3c + (a^2 + 2a')/4 invert each other",
                  [&] {
                      Rng rng(s.seed);
                      for (int trial = 0; trial < s.trials; ++trial) {
                          Series a = random_series(rng, 1, T, 5);
                          Series b = random_series(rng, 1, T, 5);
                          Series c = random_series(rng, 1, T, 5);
                          if (!(projective_to_ode(a, ode_to_projective(a, b).c) == b))
                              return false;
                          if (!(ode_to_projective(a, projective_to_ode(a, c)).c == c))
                              return false;
                      }
                      return true;
                  });

    r.exact_check("projective/solution-ratio-datum",
                  "Theta of a fundamental pair of f'' + a f' + b f = 0 equals "
                  "b/3 - (a^2 + 2a')/12",
                  [&] {
                      Rng rng(s.seed + 1);
                      for (int trial = 0; trial < s.trials; ++trial) {
                          Series a = random_series(rng, 1, T, 4);
                          Series b = random_series(rng, 1, T, 4);
                          TransverseEquation<K> e = TransverseEquation<K>::second_order(a, b);
                          auto basis = fundamental_basis(e);
                          Series theta = schwarzian_ratio(basis[0][0], basis[1][0]);
                          if (!(theta.truncated(T - 3) == ode_to_projective(a, b).c))
                              return false;
                      }
                      return true;
                  });

    r.exact_check("projective/extension-display",
                  "the induced jet connection displays as [[0, -1], [-b, -a]] with trace -a",
                  [&] {
                      Rng rng(s.seed + 2);
                      Series a = random_series(rng, 1, T, 4);
                      Series b = random_series(rng, 1, T, 4);
                      ExtensionConnection<K> ext =
                          induced_extension(TransverseEquation<K>::second_order(a, b));
                      return ext.matrix()(0, 0).is_zero() &&
                             ext.matrix()(0, 1) == Series::constant(1, T, K(-1)) &&
                             ext.matrix()(1, 0) == -b && ext.matrix()(1, 1) == -a &&
                             ext.trace() == -a;
                  });

    r.exact_check("projective/extension-kernel",
                  "jet vectors of solutions are horizontal for the companion form", [&] {
                      Rng rng(s.seed + 3);
                      for (int trial = 0; trial < 5; ++trial) {
                          Series a = random_series(rng, 1, T, 4);
                          Series b = random_series(rng, 1, T, 4);
                          TransverseEquation<K> e = TransverseEquation<K>::second_order(a, b);
                          ExtensionConnection<K> ext = induced_extension(e);
                          for (const auto& sol : fundamental_basis(e))
                              for (const auto& resid : extension_kernel_residual(e, ext, sol))
                                  if (!resid.is_zero())
                                      return false;
                      }
                      return true;
                  });

    r.exact_check("projective/fundamental-identity-jets",
                  "the initial-jet matrix of the fundamental basis is the identity", [&] {
                      Rng rng(s.seed + 4);
                      SMat m(2, 2, 1, T);
                      for (int i = 0; i < 2; ++i)
                          for (int j = 0; j < 2; ++j)
                              m(i, j) = random_series(rng, 1, T, 3);
                      TransverseEquation<K> sys = TransverseEquation<K>::first_order_system(m);
                      auto fb = fundamental_basis(sys);
                      for (int col = 0; col < 2; ++col) {
                          auto v = solution_jet_vector(sys, fb[std::size_t(col)]);
                          for (int row = 0; row < 2; ++row)
                              if (!(v[std::size_t(row)].constant_term() ==
                                    (row == col ? K(1) : K(0))))
                                  return false;
                      }
                      return true;
                  });

    r.exact_check("projective/extension-higher-order",
                  "display blocks and kernel property for the scenario's equation order",
                  [&] {
                      Rng rng(s.seed + 6);
                      int k = s.ode_order;
                      std::vector<SMat> coeffs;
                      for (int i = 0; i < k; ++i) {
                          SMat m(1, 1, 1, T);
                          m(0, 0) = random_series(rng, 1, T, 3);
                          coeffs.push_back(std::move(m));
                      }
                      TransverseEquation<K> e(k, 1, coeffs);
                      ExtensionConnection<K> ext = induced_extension(e);
                      for (int i = 0; i + 1 < k; ++i)
                          if (!(ext.matrix()(i, i + 1) == Series::constant(1, T, K(-1))))
                              return false;
                      for (int i = 0; i < k; ++i)
                          if (!(ext.matrix()(k - 1, i) == -coeffs[std::size_t(i)](0, 0)))
                              return false;
                      if (!(ext.trace() == -coeffs[std::size_t(k - 1)](0, 0)))
                          return false;
                      for (const auto& sol : fundamental_basis(e))
                          for (const auto& resid : extension_kernel_residual(e, ext, sol))
                              if (!resid.is_zero())
                                  return false;
                      return true;
                  });

    r.exact_check("projective/moebius-invariant-ratio",
                  "Theta(f1 : f2) is unchanged under invertible linear substitutions", [&] {
                      Rng rng(s.seed + 5);
                      Series a = random_series(rng, 1, T, 3);
                      Series b = random_series(rng, 1, T, 3);
                      auto basis =
                          fundamental_basis(TransverseEquation<K>::second_order(a, b));
                      const Series& f1 = basis[0][0];
                      const Series& f2 = basis[1][0];
                      Series base = schwarzian_ratio(f1, f2);
                      Series g1 = K(2) * f1 + K(3) * f2;
                      Series g2 = f1 + K(2) * f2;
                      return schwarzian_ratio(g1, g2) == base;
                  });
}

// ---------------------------------------------------------------------------
// suite: isotropy (exact group layer)
// ---------------------------------------------------------------------------

inline void run_isotropy(Runner& r)
{
    const Scenario& s = r.scenario();

    r.exact_check("isotropy/one-dimensional-hand-case",
                  "the stabilizer system at z != 0 has only the trivial solution; z = 0 "
                  "leaves two parameters",
                  [&] {
                      Mat<K> w(1, 1);
                      w(0, 0) = K(5);
                      if (isotropy_nullspace<K>({K(2)}, w).dimension != 0)
                          return false;
                      return isotropy_nullspace<K>({K(0)}, w).dimension == 2;
                  });

    r.exact_check("isotropy/generic-point-trivial",
                  "seeded rational (Z != 0, W) have trivial linearized stabilizer", [&] {
                      Rng rng(s.seed);
                      int n = std::max(2, s.dim);
                      for (int trial = 0; trial < s.trials; ++trial) {
                          auto z = wide_random_nonzero_vector(rng, n);
                          Mat<K> w = wide_random_matrix(rng, n, n);
                          if (isotropy_nullspace<K>(z, w).dimension != 0)
                              return false;
                      }
                      return true;
                  });

    r.exact_check("isotropy/zero-section-degenerate",
                  "Z = 0 always admits non-trivial stabilizer directions", [&] {
                      Rng rng(s.seed + 1);
                      for (int n = 1; n <= 3; ++n) {
                          Mat<K> w = random_matrix(rng, n, n);
                          std::vector<K> z;
                          z.resize(std::size_t(n));
                          if (isotropy_nullspace<K>(z, w).dimension <= 0)
                              return false;
                      }
                      return true;
                  });

    r.exact_check("isotropy/conjugation-invariance",
                  "stabilizer dimension is preserved by the fiber action", [&] {
                      Rng rng(s.seed + 2);
                      int n = 2;
                      for (int trial = 0; trial < 5; ++trial) {
                          auto z = random_nonzero_vector(rng, n);
                          Mat<K> w = random_matrix(rng, n, n);
                          int d0 = isotropy_nullspace<K>(z, w).dimension;
                          std::vector<K> b = random_vector(rng, n);
                          GroupElement<K> h =
                              GroupElement<K>::from_blocks(random_invertible(rng, n), b);
                          auto [z2, w2] = fiber_action(h, z, w);
                          if (isotropy_nullspace<K>(z2, w2).dimension != d0)
                              return false;
                      }
                      return true;
                  });

    r.exact_check("isotropy/trace-identity",
                  "tr of the fixed-point defect equals -(n+1) B.Z; conjugation is traceless",
                  [&] {
                      Rng rng(s.seed + 3);
                      for (int n = 1; n <= 3; ++n)
                          for (int trial = 0; trial < 5; ++trial) {
                              Mat<K> a = random_invertible(rng, n);
                              auto b = random_vector(rng, n);
                              auto z = random_vector(rng, n);
                              Mat<K> w = random_matrix(rng, n, n);
                              TraceIdentity<K> t = trace_identity_residual(a, b, z, w);
                              if (!t.conjugation_residual.is_zero())
                                  return false;
                              if (!(t.residual_trace == K(-(n + 1)) * t.b_dot_z))
                                  return false;
                          }
                      return true;
                  });

    r.exact_check("isotropy/diagonal-fiber",
                  "w_{i1} = b_i / (1 - lambda_i), free diagonal, fiber dimension n", [&] {
                      Rng rng(s.seed + 4);
                      for (int n = 1; n <= 3; ++n) {
                          std::vector<K> lams, b;
                          for (int i = 2; i <= n; ++i) {
                              lams.push_back(GaussianRational::fraction(2 * i - 1, 2));
                              b.push_back(rng.scalar());
                          }
                          DiagonalFiber<K> fib = diagonal_isotropy_fiber<K>(lams, b);
                          if (fib.dimension != n)
                              return false;
                          for (int i = 1; i < n; ++i) {
                              K expect = b[std::size_t(i - 1)] /
                                         (K(1) - lams[std::size_t(i - 1)]);
                              if (!(fib.particular(i, 0) == expect))
                                  return false;
                          }
                          Mat<K> a(n, n);
                          a(0, 0) = K(1);
                          for (int i = 1; i < n; ++i)
                              a(i, i) = lams[std::size_t(i - 1)];
                          std::vector<K> bfull;
                          bfull.resize(std::size_t(n));
                          for (int i = 1; i < n; ++i)
                              bfull[std::size_t(i)] = b[std::size_t(i - 1)];
                          std::vector<K> z;
                          z.resize(std::size_t(n));
                          z[0] = K(1);
                          Mat<K> w = fib.particular;
                          for (auto [i, j] : fib.free_slots)
                              w(i, j) = rng.scalar();
                          Mat<K> rhs = w * a.transpose() - a.transpose() * w;
                          for (int i = 0; i < n; ++i)
                              for (int j = 0; j < n; ++j)
                                  if (!(rhs(i, j) ==
                                        bfull[std::size_t(i)] * z[std::size_t(j)]))
                                      return false;
                      }
                      return true;
                  });

    r.exact_check("isotropy/incidence-dimension",
                  "the incidence variety has tangent dimension n^2 + 2n - 3 at diagonal "
                  "fiber points",
                  [&] {
                      Rng rng(s.seed + 5);
                      for (int n = 2; n <= 3; ++n) {
                          std::vector<K> lams, b;
                          for (int i = 2; i <= n; ++i) {
                              lams.push_back(GaussianRational::fraction(2 * i + 1, 3));
                              b.push_back(rng.nonzero_scalar());
                          }
                          DiagonalFiber<K> fib = diagonal_isotropy_fiber<K>(lams, b);
                          Mat<K> a(n, n);
                          a(0, 0) = K(1);
                          for (int i = 1; i < n; ++i)
                              a(i, i) = lams[std::size_t(i - 1)];
                          std::vector<K> bfull;
                          bfull.resize(std::size_t(n));
                          for (int i = 1; i < n; ++i)
                              bfull[std::size_t(i)] = b[std::size_t(i - 1)];
                          std::vector<K> z;
                          z.resize(std::size_t(n));
                          z[0] = K(1);
                          Mat<K> w = fib.particular;
                          for (auto [i, j] : fib.free_slots)
                              w(i, j) = rng.nonzero_scalar();
                          if (incidence_tangent_dim(a, bfull, z, w) != n * n + 2 * n - 3)
                              return false;
                      }
                      return true;
                  });

    r.exact_check("isotropy/action-fastpath-oracle",
                  "the fiber fast path of the prolonged action equals the jet-calculus "
                  "oracle exactly",
                  [&] {
                      Rng rng(s.seed + 6);
                      for (int n = 1; n <= 2; ++n) {
                          int done = 0;
                          while (done < 4) {
                              try {
                                  GroupElement<K> g(random_invertible(rng, n + 1));
                                  ProlongPoint<K> x{random_vector(rng, n),
                                                    random_nonzero_vector(rng, n),
                                                    random_matrix(rng, n, n)};
                                  ProlongPoint<K> fast = prolonged_action(g, x);
                                  ProlongPoint<K> slow = prolonged_action_jet_oracle(g, x);
                                  if (!(fast.y == slow.y && fast.z == slow.z &&
                                        fast.w == slow.w))
                                      return false;
                                  ++done;
                              } catch (const error&) {
                              }
                          }
                      }
                      return true;
                  });

    r.exact_check("isotropy/action-composition-exact",
                  "the prolonged action respects the group law on rational inputs", [&] {
                      Rng rng(s.seed + 7);
                      for (int n = 1; n <= 2; ++n) {
                          int done = 0;
                          while (done < 5) {
                              try {
                                  GroupElement<K> g1(random_invertible(rng, n + 1));
                                  GroupElement<K> g2(random_invertible(rng, n + 1));
                                  ProlongPoint<K> x{random_vector(rng, n),
                                                    random_vector(rng, n),
                                                    random_matrix(rng, n, n)};
                                  ProlongPoint<K> lhs =
                                      prolonged_action(g2, prolonged_action(g1, x));
                                  ProlongPoint<K> rhs = prolonged_action(g2 * g1, x);
                                  if (!(lhs.y == rhs.y && lhs.z == rhs.z && lhs.w == rhs.w))
                                      return false;
                                  ++done;
                              } catch (const error&) {
                              }
                          }
                      }
                      return true;
                  });

    r.residual_check("isotropy/action-composition-float",
                     "group law of the prolonged action over seeded floating samples",
                     s.tolerance, [&] {
                         Rng rng(s.seed + 8);
                         double worst = 0.0;
                         int nmax = std::min(s.dim, 3);
                         int per_dim = std::max(1, s.trials / std::max(1, nmax));
                         for (int n = 1; n <= nmax; ++n) {
                             int done = 0;
                             while (done < per_dim) {
                                 try {
                                     CGroup g1 = random_small_cgroup(rng, n, 0.3);
                                     CGroup g2 = random_small_cgroup(rng, n, 0.3);
                                     CPoint x;
                                     x.y.resize(std::size_t(n));
                                     x.z.resize(std::size_t(n));
                                     for (int i = 0; i < n; ++i) {
                                         x.y[std::size_t(i)] = 0.3 * rng.complex_box();
                                         x.z[std::size_t(i)] = rng.complex_box();
                                     }
                                     x.z[0] += 1.0;
                                     x.w = CMat(n, n);
                                     for (auto& v : x.w.a)
                                         v = rng.complex_box();
                                     CPoint lhs =
                                         prolonged_action(g2, prolonged_action(g1, x));
                                     CPoint rhs = prolonged_action(g2 * g1, x);
                                     worst = std::max(worst, point_distance(lhs, rhs));
                                     ++done;
                                 } catch (const error&) {
                                 }
                             }
                         }
                         return worst;
                     });
}

// ---------------------------------------------------------------------------
// suite: maurer-cartan (floating)
// ---------------------------------------------------------------------------

inline void run_maurer_cartan(Runner& r)
{
    const Scenario& s = r.scenario();
    int n = 1;

    r.residual_check("maurer-cartan/orbit-roundtrip",
                     "the inverse of the orbit map reproduces group elements and points",
                     1e-8, [&] {
                         Rng rng(s.seed);
                         CPoint q = certified_reference_point(n);
                         double worst = 0.0;
                         int done = 0;
                         while (done < s.trials) {
                             try {
                                 CGroup g = random_small_cgroup(rng, n, 0.3);
                                 CPoint x = prolonged_action(g, q);
                                 CGroup back = orbit_invert(q, x);
                                 worst = std::max(
                                     worst, point_distance(prolonged_action(back, q), x));
                                 double gd = 0.0;
                                 for (std::size_t i = 0; i < g.m.a.size(); ++i)
                                     gd = std::max(gd, std::abs(g.m.a[i] - back.m.a[i]));
                                 worst = std::max(worst, gd);
                                 ++done;
                             } catch (const pole_locus_error&) {
                             }
                         }
                         return worst;
                     });

    r.exact_check("maurer-cartan/pole-locus",
                  "degenerate fiber data is reported as part of the pole locus", [&] {
                      CPoint q = certified_reference_point(n);
                      MaurerCartanForm form(q);
                      CPoint bad = q;
                      for (auto& v : bad.z)
                          v = 0.0;
                      return form.is_pole(bad);
                  });

    r.residual_check("maurer-cartan/linearity",
                     "the form is linear in the tangent argument", 1e-10, [&] {
                         Rng rng(s.seed + 1);
                         CPoint q = certified_reference_point(n);
                         MaurerCartanForm form(q);
                         CPoint x = sample_orbit_point(form, rng);
                         int dim = n * n + 2 * n;
                         CVec v1 = zero_cvec(dim), v2 = zero_cvec(dim);
                         for (int k = 0; k < dim; ++k) {
                             v1[std::size_t(k)] = rng.complex_box();
                             v2[std::size_t(k)] = rng.complex_box();
                         }
                         Cplx al = {0.7, -0.2};
                         CVec combo = zero_cvec(dim);
                         for (int k = 0; k < dim; ++k)
                             combo[std::size_t(k)] =
                                 al * v1[std::size_t(k)] + v2[std::size_t(k)];
                         CMat lhs = form.value(x, combo);
                         CMat rhs = form.value(x, v1);
                         for (Cplx& c : rhs.a)
                             c *= al;
                         rhs = rhs + form.value(x, v2);
                         return mat_norm(lhs - rhs);
                     });

    r.residual_check("maurer-cartan/ad-equivariance",
                     "moving the reference point conjugates the form by Ad", 1e-8, [&] {
                         Rng rng(s.seed + 2);
                         CPoint q = certified_reference_point(n);
                         MaurerCartanForm form(q);
                         double worst = 0.0;
                         for (int trial = 0; trial < 5; ++trial) {
                             CPoint x = sample_orbit_point(form, rng);
                             CGroup mover = random_small_cgroup(rng, n, 0.3);
                             MaurerCartanForm moved(prolonged_action(mover, q));
                             int dim = n * n + 2 * n;
                             CVec v = zero_cvec(dim);
                             for (int k = 0; k < dim; ++k)
                                 v[std::size_t(k)] = rng.complex_box();
                             CMat lhs = moved.value(x, v);
                             CMat rhs = ad(mover, form.value(x, v));
                             worst = std::max(worst, mat_norm(lhs - rhs));
                         }
                         return worst;
                     });

    r.residual_check("maurer-cartan/verticality",
                     "fiber directions take values in the isotropy algebra of the chart "
                     "origin",
                     1e-8, [&] {
                         Rng rng(s.seed + 3);
                         CPoint q = certified_reference_point(n);
                         MaurerCartanForm form(q);
                         double worst = 0.0;
                         for (int trial = 0; trial < 5; ++trial) {
                             CPoint x = sample_orbit_point(form, rng);
                             int dim = n * n + 2 * n;
                             for (int k = n; k < dim; ++k) {
                                 CVec v = zero_cvec(dim);
                                 v[std::size_t(k)] = 1.0;
                                 worst = std::max(worst,
                                                  h_vertical_residual(form.value(x, v)));
                             }
                         }
                         return worst;
                     });

    r.residual_check("maurer-cartan/flatness",
                     "d Omega + 1/2 [Omega, Omega] = 0 by central differences at step 1e-4",
                     1e-4, [&] {
                         Rng rng(s.seed + 4);
                         CPoint q = certified_reference_point(n);
                         MaurerCartanForm form(q);
                         FormDiagnostics diag = form_diagnostics(form, rng, 20, 1e-4);
                         return diag.flatness_max;
                     });

    r.residual_check("maurer-cartan/invariance",
                     "the form is invariant under the prolonged action", 1e-8, [&] {
                         Rng rng(s.seed + 5);
                         CPoint q = certified_reference_point(n);
                         MaurerCartanForm form(q);
                         FormDiagnostics diag = form_diagnostics(form, rng, 5, 1e-4);
                         return diag.invariance_max;
                     });
}

// ---------------------------------------------------------------------------
// suite: prolong-structure (floating)
// ---------------------------------------------------------------------------

inline void run_prolong_structure(Runner& r)
{
    const Scenario& s = r.scenario();
    int T = 16;

    auto make_report = [&](bool identity_overlap, int samples) {
        Rng rng(s.seed);
        CPoint q = certified_reference_point(1);
        MaurerCartanForm form(q);
        ProjectiveChart id_chart(Series::variable(1, T, 0));
        if (identity_overlap) {
            std::vector<ProjectiveChart> charts = {id_chart, id_chart};
            std::vector<std::tuple<int, int, CGroup>> overlaps = {
                {0, 1, CGroup::identity(1)}};
            return prolong_structure_pullback(charts, overlaps, form, std::nullopt, rng,
                                              samples);
        }
        ProjectiveChart mo_chart(moebius_series(2, 0, 1, 3, T));
        CMat c(2, 2);
        c(0, 0) = 3.0;
        c(0, 1) = 1.0;
        c(1, 1) = 2.0;
        CGroup overlap(c);
        std::vector<ProjectiveChart> charts = {mo_chart, id_chart};
        std::vector<std::tuple<int, int, CGroup>> overlaps = {{0, 1, overlap}};
        return prolong_structure_pullback(charts, overlaps, form,
                                          ProlongationSection::unit(6), rng, samples);
    };

    r.residual_check("prolong-structure/chart-compatibility",
                     "prolonged charts are intertwined by the prolonged overlap action",
                     1e-9, [&] { return make_report(false, 10).chart_compat_max; });

    r.residual_check("prolong-structure/overlap-agreement",
                     "pulled-back forms agree on chart overlaps", 1e-8,
                     [&] { return make_report(false, 10).overlap_form_max; });

    r.residual_check("prolong-structure/identity-overlap",
                     "identical charts give identical pullbacks", 1e-10,
                     [&] { return make_report(true, 5).overlap_form_max; });

    r.residual_check("prolong-structure/section-kernel-tangent",
                     "the section pullback annihilates leaf directions modulo the isotropy "
                     "algebra",
                     1e-8, [&] { return make_report(false, 20).kernel_tangent_max; });

    r.exact_check("prolong-structure/section-kernel-transverse",
                  "the section pullback separates transverse directions", [&] {
                      return make_report(false, 10).kernel_transverse_min > 1e-3;
                  });

    r.residual_check("prolong-structure/section-flatness",
                     "the section pullback satisfies the flatness equation", 1e-4,
                     [&] { return make_report(false, 10).section_flatness; });
}

} // namespace detail

/// Execute the named suite (or all of them) deterministically for the
/// scenario's seed. Records are sorted by check name so that assembly order
/// never shows in a report.
inline Report run_suite(const Scenario& s)
{
    s.validate();
    detail::Runner runner(s);
    bool all = s.suite == "all";
    if (all || s.suite == "jets")
        detail::run_jets(runner);
    if (all || s.suite == "pfaffian")
        detail::run_pfaffian(runner);
    if (all || s.suite == "schwarzian")
        detail::run_schwarzian(runner);
    if (all || s.suite == "projective")
        detail::run_projective(runner);
    if (all || s.suite == "isotropy")
        detail::run_isotropy(runner);
    if (all || s.suite == "maurer-cartan")
        detail::run_maurer_cartan(runner);
    if (all || s.suite == "prolong-structure")
        detail::run_prolong_structure(runner);
    Report rep;
    rep.scenario = s;
    rep.checks = runner.take();
    std::sort(rep.checks.begin(), rep.checks.end(),
              [](const CheckRecord& a, const CheckRecord& b) { return a.name < b.name; });
    return rep;
}

inline std::string mode_name(ScalarMode m) { return m == ScalarMode::exact ? "exact" : "float"; }

/// JSON report. In exact mode, per-check timings are reported as zero so that
/// identical scenarios produce byte-identical documents.
inline nlohmann::ordered_json report_json(const Report& rep)
{
    nlohmann::ordered_json j;
    j["schema"] = "jetfol-verify-report/1";
    j["suite"] = rep.scenario.suite;
    j["seed"] = rep.scenario.seed;
    j["mode"] = mode_name(rep.scenario.mode);
    nlohmann::ordered_json params;
    params["order"] = rep.scenario.order;
    params["dim"] = rep.scenario.dim;
    params["q"] = rep.scenario.q;
    params["d"] = rep.scenario.d;
    params["rank"] = rep.scenario.rank;
    params["ode_order"] = rep.scenario.ode_order;
    params["trials"] = rep.scenario.trials;
    params["tolerance"] = rep.scenario.tolerance;
    j["parameters"] = params;
    nlohmann::ordered_json checks = nlohmann::ordered_json::array();
    bool suppress_timing = rep.scenario.mode == ScalarMode::exact;
    for (const CheckRecord& c : rep.checks) {
        nlohmann::ordered_json e;
        e["name"] = c.name;
        e["anchor"] = c.anchor;
        e["status"] = c.status;
        if (c.exact)
            e["residual"] = nullptr;
        else
            e["residual"] = c.residual;
        e["elapsed_ms"] = suppress_timing ? 0 : c.elapsed_ms;
        e["note"] = c.note;
        checks.push_back(std::move(e));
    }
    j["checks"] = std::move(checks);
    nlohmann::ordered_json totals;
    totals["pass"] = rep.count("pass");
    totals["fail"] = rep.count("fail");
    totals["skip"] = rep.count("skip");
    j["totals"] = totals;
    return j;
}

inline std::string report_text(const Report& rep)
{
    std::ostringstream os;
    os << "suite: " << rep.scenario.suite << "   seed: " << rep.scenario.seed
       << "   mode: " << mode_name(rep.scenario.mode) << "\n";
    os << "order=" << rep.scenario.order << " dim=" << rep.scenario.dim
       << " q=" << rep.scenario.q << " d=" << rep.scenario.d << " rank=" << rep.scenario.rank
       << " ode_order=" << rep.scenario.ode_order << " trials=" << rep.scenario.trials
       << " tolerance=" << rep.scenario.tolerance << "\n\n";
    std::size_t name_w = 4;
    for (const auto& c : rep.checks)
        name_w = std::max(name_w, c.name.size());
    os << std::left;
    for (const CheckRecord& c : rep.checks) {
        os.width(int(name_w) + 2);
        os << c.name;
        os.width(6);
        os << c.status;
        os.width(14);
        if (c.exact)
            os << "exact";
        else {
            std::ostringstream rs;
            rs.precision(3);
            rs << std::scientific << c.residual;
            os << rs.str();
        }
        os.width(8);
        os << (std::to_string(c.elapsed_ms) + "ms");
        os << "  " << c.anchor;
        if (!c.note.empty())
            os << "  [" << c.note << "]";
        os << "\n";
    }
    os << "\ntotals: pass=" << rep.count("pass") << " fail=" << rep.count("fail")
       << " skip=" << rep.count("skip") << "\n";
    return os.str();
}

inline void emit_report(const Report& rep, const std::string& format, const std::string& path)
{
    std::string payload;
    if (format == "json")
        payload = report_json(rep).dump(2) + "\n";
    else if (format == "text")
        payload = report_text(rep);
    else
        throw error("emit_report: format must be text or json");
    if (path.empty() || path == "-") {
        std::fputs(payload.c_str(), stdout);
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw error("emit_report: cannot open output path " + path);
    out << payload;
    if (!out)
        throw error("emit_report: write failed for " + path);
}

} // namespace jetfol::harness
