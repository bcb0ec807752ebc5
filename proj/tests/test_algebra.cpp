#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <jetfol/rng.hpp>
#include <jetfol/series_matrix.hpp>

using namespace jetfol;
using K = GaussianRational;
using S = TruncatedSeries<K>;

namespace {

K q(long n, long d = 1) { return GaussianRational::fraction(n, d); }

S random_series(Rng& rng, int nvars, int order, int max_degree)
{
    S s(nvars, order);
    const IndexTable& t = s.table();
    for (int p = 0; p < t.count(); ++p) {
        if (t.at(p).degree() > max_degree)
            break;
        s.set_coeff(t.at(p), rng.scalar());
    }
    return s;
}

} // namespace

TEST_CASE("multi-index tables: positions agree with enumeration")
{
    for (int n = 1; n <= 4; ++n)
        for (int d = 0; d <= 6; ++d) {
            const IndexTable& t = index_table(n, d);
            CHECK(t.count() == monomial_count(n, d));
            for (int p = 0; p < t.count(); ++p)
                CHECK(t.position(t.at(p)) == p);
        }
}

TEST_CASE("multi-index combinatorics")
{
    MultiIndex i(2);
    i.set(0, 3);
    i.set(1, 2);
    CHECK(i.degree() == 5);
    CHECK(i.factorial() == 12);
    MultiIndex j(2);
    j.set(0, 1);
    j.set(1, 1);
    CHECK(i.binom(j) == 6);
    CHECK(j.leq(i));
    CHECK(!i.leq(j));
}

TEST_CASE("series product: (1+x)(1-x) = 1-x^2 and identity")
{
    S one_plus = S::constant(1, 6, q(1)) + S::variable(1, 6, 0);
    S one_minus = S::constant(1, 6, q(1)) - S::variable(1, 6, 0);
    S prod = one_plus * one_minus;
    S expect = S::constant(1, 6, q(1));
    MultiIndex m2(1);
    m2.set(0, 2);
    expect.set_coeff(m2, q(-1));
    CHECK(prod == expect);

    Rng rng(3);
    S f = random_series(rng, 2, 5, 5);
    S one = S::constant(2, 5, q(1));
    CHECK(one * f == f);
}

TEST_CASE("series product: (x+x^2)^2 at T=4")
{
    S g = S::variable(1, 4, 0);
    MultiIndex m2(1);
    m2.set(0, 2);
    g.set_coeff(m2, q(1));
    S sq = g * g;
    S expect(1, 4);
    MultiIndex m(1);
    m.set(0, 2);
    expect.set_coeff(m, q(1));
    m.set(0, 3);
    expect.set_coeff(m, q(2));
    m.set(0, 4);
    expect.set_coeff(m, q(1));
    CHECK(sq == expect);
}

TEST_CASE("series diff: power rule, constants, mixed variables")
{
    S x3 = S::monomial(1, 5, [] { MultiIndex m(1); m.set(0, 3); return m; }(), q(1));
    S d = x3.diff(0);
    S expect = S::monomial(1, 4, [] { MultiIndex m(1); m.set(0, 2); return m; }(), q(3));
    CHECK(d == expect);

    CHECK(S::constant(1, 5, q(7)).diff(0).is_zero());

    // d(x1 x2^2)/dx2 = 2 x1 x2
    MultiIndex m(2);
    m.set(0, 1);
    m.set(1, 2);
    S f = S::monomial(2, 6, m, q(1));
    MultiIndex e(2);
    e.set(0, 1);
    e.set(1, 1);
    CHECK(f.diff(1) == S::monomial(2, 5, e, q(2)));

    CHECK_THROWS_AS(f.diff(2), error);
}

TEST_CASE("series compose: matches direct expansion and geometric series")
{
    // f = y^2 composed with g = x + x^2
    S f = S::monomial(1, 4, [] { MultiIndex m(1); m.set(0, 2); return m; }(), q(1));
    S g = S::variable(1, 4, 0) +
          S::monomial(1, 4, [] { MultiIndex m(1); m.set(0, 2); return m; }(), q(1));
    CHECK(f.compose({g}) == g * g);

    // identity substitution
    Rng rng(11);
    S h = random_series(rng, 2, 5, 5);
    std::vector<S> id = {S::variable(2, 5, 0), S::variable(2, 5, 1)};
    CHECK(h.compose(id) == h);

    // 1/(1-y) o x at T=3: built from the geometric series coefficients
    S geo(1, 3);
    for (int k = 0; k <= 3; ++k) {
        MultiIndex m(1);
        m.set(0, k);
        geo.set_coeff(m, q(1));
    }
    S x = S::variable(1, 3, 0);
    CHECK(geo.compose({x}) == geo);

    S bad = S::constant(1, 3, q(1));
    CHECK_THROWS_AS(geo.compose({bad}), error);
}

TEST_CASE("invert_map: one-variable catalog values")
{
    // g = x -> x
    std::vector<S> idm = {S::variable(1, 4, 0)};
    CHECK(invert_map(idm)[0] == idm[0]);

    // g = x + x^2 -> x - x^2 + 2x^3 - 5x^4
    S g = S::variable(1, 4, 0) +
          S::monomial(1, 4, [] { MultiIndex m(1); m.set(0, 2); return m; }(), q(1));
    S h = invert_map(std::vector<S>{g})[0];
    S expect(1, 4);
    MultiIndex m(1);
    m.set(0, 1);
    expect.set_coeff(m, q(1));
    m.set(0, 2);
    expect.set_coeff(m, q(-1));
    m.set(0, 3);
    expect.set_coeff(m, q(2));
    m.set(0, 4);
    expect.set_coeff(m, q(-5));
    CHECK(h == expect);

    // g = 2x -> x/2
    S two_x = q(2) * S::variable(1, 4, 0);
    CHECK(invert_map(std::vector<S>{two_x})[0] == q(1, 2) * S::variable(1, 4, 0));

    // singular Jacobian
    S sing = S::monomial(1, 4, [] { MultiIndex mm(1); mm.set(0, 2); return mm; }(), q(1));
    CHECK_THROWS_AS(invert_map(std::vector<S>{sing}), error);
}

TEST_CASE("invert_map round trip in two variables")
{
    Rng rng(42);
    for (int trial = 0; trial < 5; ++trial) {
        std::vector<S> g;
        for (int i = 0; i < 2; ++i) {
            S gi(2, 6);
            const IndexTable& t = gi.table();
            for (int p = 0; p < t.count(); ++p) {
                int deg = t.at(p).degree();
                if (deg < 1 || deg > 2)
                    continue;
                gi.set_coeff(t.at(p), rng.scalar());
            }
            g.push_back(gi);
        }
        // force an invertible linear part
        g[0].set_coeff(MultiIndex::unit(2, 0), q(1));
        g[1].set_coeff(MultiIndex::unit(2, 1), q(1));
        g[0].set_coeff(MultiIndex::unit(2, 1), q(0));
        g[1].set_coeff(MultiIndex::unit(2, 0), q(0));

        std::vector<S> h = invert_map(g);
        std::vector<S> id = {S::variable(2, 6, 0), S::variable(2, 6, 1)};
        for (int i = 0; i < 2; ++i) {
            CHECK(g[std::size_t(i)].compose(h) == id[std::size_t(i)]);
            CHECK(h[std::size_t(i)].compose(g) == id[std::size_t(i)]);
        }
    }
}

TEST_CASE("exact ring laws and Leibniz on seeded random series")
{
    Rng rng(2024);
    for (int trial = 0; trial < 10; ++trial) {
        S a = random_series(rng, 2, 6, 6);
        S b = random_series(rng, 2, 6, 6);
        S c = random_series(rng, 2, 6, 6);
        CHECK((a * b) * c == a * (b * c));
        CHECK(a * (b + c) == a * b + a * c);
        CHECK(a * b == b * a);
        // Leibniz through order T-1
        CHECK((a * b).diff(0) == a.diff(0) * b + a * b.diff(0));
    }
}

TEST_CASE("composition associativity")
{
    Rng rng(7);
    for (int trial = 0; trial < 5; ++trial) {
        S f = random_series(rng, 1, 6, 6);
        S g = random_series(rng, 1, 6, 6);
        S h = random_series(rng, 1, 6, 6);
        g.set_coeff(MultiIndex(1), q(0));
        h.set_coeff(MultiIndex(1), q(0));
        S lhs = f.compose({g.compose({h})});
        S rhs = f.compose({g}).compose({h});
        CHECK(lhs == rhs);
    }
}

TEST_CASE("series reciprocal")
{
    S f = S::constant(1, 8, q(1)) - S::variable(1, 8, 0);
    S r = f.reciprocal();
    S geo(1, 8);
    for (int k = 0; k <= 8; ++k) {
        MultiIndex m(1);
        m.set(0, k);
        geo.set_coeff(m, q(1));
    }
    CHECK(r == geo);

    Rng rng(5);
    S g = random_series(rng, 2, 5, 5);
    g.set_coeff(MultiIndex(2), q(3, 2));
    CHECK(g * g.reciprocal() == S::constant(2, 5, q(1)));
}

TEST_CASE("series matrix inverse and exact linear algebra")
{
    Rng rng(99);
    SeriesMatrix<K> m(2, 2, 2, 5);
    m(0, 0) = S::constant(2, 5, q(1)) + random_series(rng, 2, 5, 2);
    m(0, 1) = random_series(rng, 2, 5, 2);
    m(1, 0) = random_series(rng, 2, 5, 2);
    m(1, 1) = S::constant(2, 5, q(2)) + random_series(rng, 2, 5, 2);
    m(0, 0).set_coeff(MultiIndex(2), q(1));
    m(0, 1).set_coeff(MultiIndex(2), q(0));
    m(1, 0).set_coeff(MultiIndex(2), q(0));
    m(1, 1).set_coeff(MultiIndex(2), q(2));
    SeriesMatrix<K> inv = m.inverse();
    CHECK(m * inv == SeriesMatrix<K>::identity(2, 2, 5));
    CHECK(inv * m == SeriesMatrix<K>::identity(2, 2, 5));

    Mat<K> a(2, 3);
    a(0, 0) = q(1);
    a(0, 1) = q(2);
    a(0, 2) = q(3);
    a(1, 0) = q(2);
    a(1, 1) = q(4);
    a(1, 2) = q(6);
    CHECK(rank(a) == 1);
    auto ns = nullspace(a);
    CHECK(ns.size() == 2);
    for (const auto& v : ns) {
        K r0 = a(0, 0) * v[0] + a(0, 1) * v[1] + a(0, 2) * v[2];
        CHECK(r0.is_zero());
    }
}

TEST_CASE("complex linear solve")
{
    using C = std::complex<double>;
    Mat<C> m(2, 2);
    m(0, 0) = {2.0, 0.0};
    m(0, 1) = {1.0, 1.0};
    m(1, 0) = {0.0, -1.0};
    m(1, 1) = {3.0, 0.0};
    std::vector<C> b = {{1.0, 0.0}, {0.0, 2.0}};
    auto x = solve(m, b);
    std::vector<C> r = m.apply(x);
    CHECK(std::abs(r[0] - b[0]) < 1e-12);
    CHECK(std::abs(r[1] - b[1]) < 1e-12);
}
