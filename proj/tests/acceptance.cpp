// Acceptance suite: one line per criterion, nonzero exit on any failure.
// Usage: acceptance [path-to-verify-cli]

#include <jetfol/harness.hpp>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>

using namespace jetfol;
using namespace jetfol::harness;
using namespace jetfol::harness::detail;

namespace {

int failures = 0;

void criterion(const std::string& label, double time_limit_s,
               const std::function<bool(std::string&)>& body)
{
    std::string detail_msg;
    auto start = std::chrono::steady_clock::now();
    bool ok = false;
    try {
        ok = body(detail_msg);
    } catch (const std::exception& e) {
        detail_msg = e.what();
    }
    double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    bool in_time = elapsed < time_limit_s;
    if (!in_time)
        detail_msg += (detail_msg.empty() ? "" : "; ") + std::string("over time limit");
    bool pass = ok && in_time;
    if (!pass)
        ++failures;
    std::printf("[%s] %s (%.2fs/%.0fs)%s%s\n", pass ? "PASS" : "FAIL", label.c_str(), elapsed,
                time_limit_s, detail_msg.empty() ? "" : ": ", detail_msg.c_str());
    std::fflush(stdout);
}

bool files_equal(const std::string& a, const std::string& b)
{
    std::ifstream fa(a, std::ios::binary), fb(b, std::ios::binary);
    if (!fa || !fb)
        return false;
    std::ostringstream sa, sb;
    sa << fa.rdbuf();
    sb << fb.rdbuf();
    return sa.str() == sb.str() && !sa.str().empty();
}

} // namespace

int main(int argc, char** argv)
{
    const std::string cli = argc > 1 ? argv[1] : "";

    criterion("1 jet-algebra: exact basis inverses, jet of x^2, multiplicativity", 5.0,
              [](std::string& msg) {
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
                                  bwd(rj, ci) = Series::monomial(
                                      n, 2 * k, diff,
                                      K(((i.degree() - j.degree()) % 2 == 1) ? -bb : bb));
                              }
                          }
                          if (!(fwd * bwd == SMat::identity(N, n, 2 * k)) ||
                              !(bwd * fwd == SMat::identity(N, n, 2 * k))) {
                              msg = "basis matrices fail to invert";
                              return false;
                          }
                      }

                  MultiIndex two(1);
                  two.set(0, 2);
                  Series f = Series::monomial(1, 6, two, K(1));
                  JetElement<K> e = jet_of_function(f, 2, 1);
                  MultiIndex m0(1), m1 = MultiIndex::unit(1, 0);
                  if (!(e.at(m0) == f && e.at(m1) == K(2) * Series::variable(1, 5, 0) &&
                        e.at(two) == Series::constant(1, 4, K(1)))) {
                      msg = "second jet of x^2 mismatch";
                      return false;
                  }

                  Rng rng(2026);
                  for (int trial = 0; trial < 100; ++trial) {
                      Series a = random_series(rng, 2, 6, 5);
                      Series b = random_series(rng, 2, 6, 5);
                      JetElement<K> lhs =
                          jet_mul(jet_of_function(a, 2, 2), jet_of_function(b, 2, 2));
                      if (!(lhs == jet_of_function(a * b, 2, 2))) {
                          msg = "jet map not multiplicative";
                          return false;
                      }
                  }
                  return true;
              });

    criterion("2 pfaffian: 50 gauge systems flat, frame residual zero, gauge formula", 30.0,
              [](std::string& msg) {
                  Rng rng(99);
                  int T = 8;
                  for (int trial = 0; trial < 50; ++trial) {
                      int rank = 1 + int(rng.below(3));
                      int d = 1 + int(rng.below(2));
                      FoliationChart chart(1, d);
                      int nv = chart.num_vars();
                      SMat g = random_gauge(rng, rank, nv, T, 2);
                      ConnectionPatch<K> p = gauge_connection(g, chart);
                      for (const auto& m : flatness_defect(p))
                          if (!m.is_zero()) {
                              msg = "nonzero flatness defect";
                              return false;
                          }
                      SMat frame = flat_frame(p);
                      for (int k = 0; k < chart.d; ++k) {
                          SMat resid = frame.diff(chart.y_var(k)) - p.a[std::size_t(k)] * frame;
                          if (resid.order() < 7 || !resid.is_zero()) {
                              msg = "frame residual not zero through order 7";
                              return false;
                          }
                      }
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
                      if (!(frame == g * g0.inverse())) {
                          msg = "frame differs from G G(x,0)^{-1}";
                          return false;
                      }
                  }
                  return true;
              });

    criterion("3 schwarzian: moebius zero, cocycle, exp, tangent", 10.0, [](std::string& msg) {
        Rng rng(3);
        for (int trial = 0; trial < 10; ++trial) {
            long al = rng.range(-9, 9), be = rng.range(-9, 9);
            long ga = rng.range(-9, 9), de = rng.range(1, 9);
            if (al * de - be * ga == 0) {
                --trial;
                continue;
            }
            Series th = schwarzian(moebius_series(al, be, ga, de, 15));
            if (th.order() < 12 || !th.is_zero()) {
                msg = "moebius schwarzian not zero through order 12";
                return false;
            }
        }
        int T = 10;
        const IndexTable& t = index_table(1, T);
        for (int trial = 0; trial < 50; ++trial) {
            Series g1 = Series::variable(1, T, 0), g2 = Series::variable(1, T, 0);
            for (int pos = 2; pos <= 4; ++pos) {
                g1.set_coeff(t.at(pos), rng.scalar());
                g2.set_coeff(t.at(pos), rng.scalar());
            }
            g1.set_coeff(t.at(1), rng.nonzero_scalar());
            if (!cocycle_defect(g1, g2).truncated(T - 5).is_zero()) {
                msg = "cocycle defect nonzero";
                return false;
            }
        }
        if (!(schwarzian(exp_series(15)) ==
              Series::constant(1, 12, GaussianRational::fraction(-1, 12)))) {
            msg = "schwarzian of exp differs from -1/12";
            return false;
        }
        Series ratio = schwarzian_ratio(sin_series(12), cos_series(12));
        if (ratio.order() < 8 ||
            !(ratio == Series::constant(1, 8, GaussianRational::fraction(1, 3)))) {
            msg = "schwarzian of sin:cos differs from 1/3 through order 8";
            return false;
        }
        return true;
    });

    criterion("4 projective: exact bijection, ratio consistency, display matrix", 20.0,
              [](std::string& msg) {
                  Rng rng(4);
                  int T = 10;
                  for (int trial = 0; trial < 50; ++trial) {
                      Series a = random_series(rng, 1, T, 5);
                      Series b = random_series(rng, 1, T, 5);
                      Series c = random_series(rng, 1, T, 5);
                      if (!(projective_to_ode(a, ode_to_projective(a, b).c) == b) ||
                          !(ode_to_projective(a, projective_to_ode(a, c)).c == c)) {
                          msg = "bijection round trip not exact";
                          return false;
                      }
                  }
                  for (int trial = 0; trial < 50; ++trial) {
                      Series a = random_series(rng, 1, T, 4);
                      Series b = random_series(rng, 1, T, 4);
                      TransverseEquation<K> e = TransverseEquation<K>::second_order(a, b);
                      auto basis = fundamental_basis(e);
                      Series theta = schwarzian_ratio(basis[0][0], basis[1][0]);
                      if (!(theta.truncated(T - 3) == ode_to_projective(a, b).c)) {
                          msg = "solution ratio misses the projective datum";
                          return false;
                      }
                  }
                  Series a = random_series(rng, 1, T, 4);
                  Series b = random_series(rng, 1, T, 4);
                  ExtensionConnection<K> ext =
                      induced_extension(TransverseEquation<K>::second_order(a, b));
                  if (!(ext.matrix()(0, 0).is_zero() &&
                        ext.matrix()(0, 1) == Series::constant(1, T, K(-1)) &&
                        ext.matrix()(1, 0) == -b && ext.matrix()(1, 1) == -a &&
                        ext.trace() == -a)) {
                      msg = "extension display matrix mismatch";
                      return false;
                  }
                  return true;
              });

    criterion("5 isotropy: hand case, 200 exact trials each at n = 2 and 3", 60.0,
              [](std::string& msg) {
                  Mat<K> w1(1, 1);
                  w1(0, 0) = K(5);
                  if (isotropy_nullspace<K>({K(2)}, w1).dimension != 0 ||
                      isotropy_nullspace<K>({K(0)}, w1).dimension != 2) {
                      msg = "one-dimensional hand case failed";
                      return false;
                  }
                  Rng rng(5);
                  for (int n = 2; n <= 3; ++n) {
                      for (int trial = 0; trial < 200; ++trial) {
                          auto z = wide_random_nonzero_vector(rng, n);
                          Mat<K> w = wide_random_matrix(rng, n, n);
                          if (isotropy_nullspace<K>(z, w).dimension != 0) {
                              msg = "nontrivial stabilizer at a generic point";
                              return false;
                          }
                      }
                      std::vector<K> z0;
                      z0.resize(std::size_t(n));
                      Mat<K> w = random_matrix(rng, n, n);
                      if (isotropy_nullspace<K>(z0, w).dimension <= 0) {
                          msg = "zero section unexpectedly rigid";
                          return false;
                      }
                  }
                  return true;
              });

    criterion("6 incidence: diagonal fibers and tangent dimension n^2+2n-3", 30.0,
              [](std::string& msg) {
                  Rng rng(6);
                  for (int n = 1; n <= 3; ++n) {
                      std::vector<K> lams, b;
                      for (int i = 2; i <= n; ++i) {
                          lams.push_back(GaussianRational::fraction(2 * i - 1, 2));
                          b.push_back(rng.nonzero_scalar());
                      }
                      DiagonalFiber<K> fib = diagonal_isotropy_fiber<K>(lams, b);
                      if (fib.dimension != n) {
                          msg = "fiber dimension differs from n";
                          return false;
                      }
                      for (int i = 1; i < n; ++i)
                          if (!(fib.particular(i, 0) ==
                                b[std::size_t(i - 1)] / (K(1) - lams[std::size_t(i - 1)]))) {
                              msg = "forced fiber entries mismatch";
                              return false;
                          }
                      if (n < 2)
                          continue;
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
                      if (incidence_tangent_dim(a, bfull, z, w) != n * n + 2 * n - 3) {
                          msg = "incidence tangent dimension mismatch";
                          return false;
                      }
                  }
                  return true;
              });

    criterion("7 prolonged action: composition within 1e-9 and exact, oracle agreement",
              30.0, [](std::string& msg) {
                  Rng rng(7);
                  double worst = 0.0;
                  for (int n = 1; n <= 3; ++n) {
                      int done = 0;
                      while (done < 34) {
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
                              CPoint lhs = prolonged_action(g2, prolonged_action(g1, x));
                              CPoint rhs = prolonged_action(g2 * g1, x);
                              worst = std::max(worst, point_distance(lhs, rhs));
                              ++done;
                          } catch (const error&) {
                          }
                      }
                  }
                  if (!(worst < 1e-9)) {
                      msg = "floating composition above 1e-9";
                      return false;
                  }
                  for (int n = 1; n <= 2; ++n) {
                      int done = 0;
                      while (done < 10) {
                          try {
                              GroupElement<K> g1(random_invertible(rng, n + 1));
                              GroupElement<K> g2(random_invertible(rng, n + 1));
                              ProlongPoint<K> x{random_vector(rng, n), random_vector(rng, n),
                                                random_matrix(rng, n, n)};
                              ProlongPoint<K> lhs =
                                  prolonged_action(g2, prolonged_action(g1, x));
                              ProlongPoint<K> rhs = prolonged_action(g2 * g1, x);
                              if (!(lhs.y == rhs.y && lhs.z == rhs.z && lhs.w == rhs.w)) {
                                  msg = "exact composition mismatch";
                                  return false;
                              }
                              ProlongPoint<K> fast = prolonged_action(g1, x);
                              ProlongPoint<K> slow = prolonged_action_jet_oracle(g1, x);
                              if (!(fast.y == slow.y && fast.z == slow.z && fast.w == slow.w)) {
                                  msg = "fast path differs from the jet oracle";
                                  return false;
                              }
                              ++done;
                          } catch (const error&) {
                          }
                      }
                  }
                  return true;
              });

    criterion("8 maurer-cartan: flatness 1e-4, equivariance/verticality 1e-8, "
              "round trip 1e-8 over 50 trials",
              60.0, [](std::string& msg) {
                  Rng rng(8);
                  CPoint q = certified_reference_point(1);
                  MaurerCartanForm form(q);

                  FormDiagnostics diag = form_diagnostics(form, rng, 20, 1e-4);
                  if (!(diag.flatness_max < 1e-4)) {
                      msg = "flatness residual above 1e-4";
                      return false;
                  }
                  if (!(diag.invariance_max < 1e-8)) {
                      msg = "invariance residual above 1e-8";
                      return false;
                  }
                  if (!(diag.verticality_max < 1e-8)) {
                      msg = "verticality residual above 1e-8";
                      return false;
                  }

                  double worst_ad = 0.0;
                  for (int trial = 0; trial < 5; ++trial) {
                      CPoint x = sample_orbit_point(form, rng);
                      CGroup mover = random_small_cgroup(rng, 1, 0.3);
                      MaurerCartanForm moved(prolonged_action(mover, q));
                      CVec v = zero_cvec(3);
                      for (int k = 0; k < 3; ++k)
                          v[std::size_t(k)] = rng.complex_box();
                      worst_ad = std::max(
                          worst_ad, mat_norm(moved.value(x, v) - ad(mover, form.value(x, v))));
                  }
                  if (!(worst_ad < 1e-8)) {
                      msg = "Ad-equivariance residual above 1e-8";
                      return false;
                  }

                  double worst_rt = 0.0;
                  int done = 0;
                  while (done < 50) {
                      try {
                          CGroup g = random_small_cgroup(rng, 1, 0.3);
                          CPoint x = prolonged_action(g, q);
                          CGroup back = orbit_invert(q, x);
                          worst_rt = std::max(worst_rt,
                                              point_distance(prolonged_action(back, q), x));
                          double gd = 0.0;
                          for (std::size_t i = 0; i < g.m.a.size(); ++i)
                              gd = std::max(gd, std::abs(g.m.a[i] - back.m.a[i]));
                          worst_rt = std::max(worst_rt, gd);
                          ++done;
                      } catch (const pole_locus_error&) {
                      }
                  }
                  if (!(worst_rt < 1e-8)) {
                      msg = "orbit round trip above 1e-8";
                      return false;
                  }
                  return true;
              });

    criterion("9 structure prolongation: overlap 1e-8, section kernel 1e-8 at 20 points",
              60.0, [](std::string& msg) {
                  Rng rng(9);
                  CPoint q = certified_reference_point(1);
                  MaurerCartanForm form(q);
                  int T = 16;
                  ProjectiveChart id_chart(Series::variable(1, T, 0));
                  ProjectiveChart mo_chart(moebius_series(2, 0, 1, 3, T));
                  CMat c(2, 2);
                  c(0, 0) = 3.0;
                  c(0, 1) = 1.0;
                  c(1, 1) = 2.0;
                  std::vector<ProjectiveChart> charts = {mo_chart, id_chart};
                  std::vector<std::tuple<int, int, CGroup>> overlaps = {{0, 1, CGroup(c)}};
                  StructureReport rep = prolong_structure_pullback(
                      charts, overlaps, form, ProlongationSection::unit(6), rng, 20);
                  if (!(rep.overlap_form_max < 1e-8)) {
                      msg = "overlap residual above 1e-8";
                      return false;
                  }
                  if (!(rep.kernel_tangent_max < 1e-8)) {
                      msg = "kernel residual above 1e-8 on leaf directions";
                      return false;
                  }
                  if (!(rep.kernel_transverse_min > 1e-3)) {
                      msg = "transverse directions not separated";
                      return false;
                  }
                  return true;
              });

    if (cli.empty()) {
        std::printf("[SKIP] 10 harness determinism: no CLI path supplied\n");
    } else {
        criterion("10 harness determinism: byte-identical reports, exit 0", 120.0,
                  [&](std::string& msg) {
                      std::string p1 = "acceptance_run1.json";
                      std::string p2 = "acceptance_run2.json";
                      std::string base =
                          "\"" + cli + "\" all --mode exact --seed 42 --format json --out ";
                      int rc1 = std::system((base + p1).c_str());
                      int rc2 = std::system((base + p2).c_str());
                      bool same = files_equal(p1, p2);
                      std::remove(p1.c_str());
                      std::remove(p2.c_str());
                      if (rc1 != 0 || rc2 != 0) {
                          msg = "verify exited nonzero";
                          return false;
                      }
                      if (!same) {
                          msg = "reports differ between runs";
                          return false;
                      }
                      return true;
                  });
    }

    if (failures == 0)
        std::printf("acceptance: all criteria satisfied\n");
    else
        std::printf("acceptance: %d criterion(s) failed\n", failures);
    return failures == 0 ? 0 : 1;
}
