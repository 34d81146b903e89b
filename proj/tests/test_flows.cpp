#include <catch2/catch_amalgamated.hpp>

#include "flowlab/flows.hpp"

using namespace flowlab;

namespace {

Vec pt3(double a, double b, double c) {
  Vec p(3);
  p << a, b, c;
  return p;
}

// flat 3-torus, trivial dilaton
AmbientFamily flat_torus_ambient() {
  AmbientFamily a;
  a.n = 3;
  a.chart = Chart::free_space(3);
  a.chart.ranges = {{0.0, 2.0 * kPi}, {0.0, 2.0 * kPi}, {0.0, 2.0 * kPi}};
  a.chart.periodic = {true, true, true};
  a.g = MetricField::euclidean(3);
  a.w = ScalarField::constant(0.0);
  return a;
}

}  // namespace

TEST_CASE("spectral series reproduce band-limited profiles") {
  // cosine series on an even-staggered grid
  Grid1D gc{32, 0.0, kPi, false};
  Vec s(gc.N);
  auto fc = [](double th) { return std::cos(th) + 0.3 * std::cos(3 * th); };
  for (int i = 0; i < gc.N; ++i) s[i] = fc(gc.node(i));
  Vec c = cosine_coeffs(s, kPi);
  CHECK(std::abs(cosine_eval(c, kPi, 0.7) - fc(0.7)) < 1e-12);
  CHECK(std::abs(cosine_eval(c, kPi, 0.7, 1) - (-std::sin(0.7) - 0.9 * std::sin(2.1))) < 1e-11);
  CHECK(std::abs(cosine_eval(c, kPi, 0.7, 2) - (-std::cos(0.7) - 2.7 * std::cos(2.1))) < 1e-10);

  // full trigonometric series on a periodic grid
  Grid1D gp{24, 0.0, 2.0 * kPi, true};
  Vec sp(gp.N);
  auto fp = [](double x) { return 0.5 + std::sin(x) - 0.25 * std::cos(2 * x); };
  auto fp1 = [](double x) { return std::cos(x) + 0.5 * std::sin(2 * x); };
  for (int i = 0; i < gp.N; ++i) sp[i] = fp(gp.node(i));
  TrigCoeffs tc = trig_coeffs(sp, 2.0 * kPi);
  CHECK(std::abs(trig_eval(tc, 1.3) - fp(1.3)) < 1e-12);
  CHECK(std::abs(trig_eval(tc, 1.3, 1) - fp1(1.3)) < 1e-12);
  CHECK(std::abs(trig_eval(tc, 1.3, 2) - (-std::sin(1.3) + std::cos(2.6))) < 1e-11);

  // Catmull-Rom time interpolation reproduces quadratics away from the ends
  std::vector<double> times;
  std::vector<Vec> snaps;
  for (int k = 0; k <= 10; ++k) {
    double t = 0.1 * k;
    times.push_back(t);
    Vec v(1);
    v << 2.0 + t - 3.0 * t * t;
    snaps.push_back(v);
  }
  double t = 0.437;
  CHECK(std::abs(TimeInterp::eval(times, snaps, t)[0] - (2.0 + t - 3.0 * t * t)) < 1e-12);
}

TEST_CASE("right-hand sides on closed-form ambients") {
  SECTION("flat space is a fixed point") {
    AmbientFamily amb = flat_euclidean_ambient(3);
    AmbientRhs r = extended_ricci_rhs(amb, pt3(0.3, -1.1, 0.7), 0.0);
    CHECK(r.dg.cwiseAbs().maxCoeff() == 0.0);  // exact derivatives, w constant
    CHECK(r.dw == 0.0);
  }

  SECTION("shrinking round sphere satisfies its scale ODE") {
    AmbientFamily amb = shrinking_round_sphere_ambient(3);
    Vec p = pt3(1.2, 0.9, 2.0);
    double t = 0.05;
    AmbientRhs r = extended_ricci_rhs(amb, p, t);
    // d/dt [(1 - 4t) g_1] = -4 g_1
    Mat g1 = amb.g(p, t) / (1.0 - 4.0 * t);
    CHECK((r.dg + 4.0 * g1).cwiseAbs().maxCoeff() < 1e-7);
  }

  SECTION("flat product with dilaton matches the hand-computed RHS") {
    double w_amp = 0.5;
    AmbientFamily amb = flat_cross_dilaton_ambient(w_amp);
    Vec p = pt3(0.8, 0.0, 0.0);
    double q = 1.0 + 0.3 * std::cos(p[0]);
    double q1 = -0.3 * std::sin(p[0]);
    double w1 = w_amp * std::cos(p[0]);
    double w2 = -w_amp * std::sin(p[0]);
    AmbientRhs r = extended_ricci_rhs(amb, p, 0.0);
    // metric is flat, so dg = 2 alpha dw (x) dw
    CHECK(std::abs(r.dg(0, 0) - 2.0 * amb.alpha() * w1 * w1) < 1e-8);
    CHECK(std::abs(r.dg(1, 1)) < 1e-8);
    CHECK(std::abs(r.dw - (w2 / q - q1 * w1 / (2 * q * q))) < 1e-8);
  }

  SECTION("modified flow preserves the weighted measure pointwise") {
    // tr(dg)/2 = df must hold identically along the modified flow
    AmbientFamily amb = warped_interval_torus_ambient(2.0, 0.25, 0.15, 0.4);
    amb.f.eval = [](const Vec& p, double) { return 0.3 * std::sin(p[0]) + 0.1 * std::cos(p[1]); };
    amb.has_f = true;
    for (double r0 : {0.4, 1.7, 3.0}) {
      Vec p = pt3(r0, 0.5, 1.0);
      AmbientRhs r = perelman_modified_rhs(amb, p, 0.0);
      Mat ginv = invert_metric(amb.g(p, 0.0));
      double trace_rate = (ginv * r.dg).trace();
      CHECK(std::abs(0.5 * trace_rate - r.df) < 1e-6);
    }
  }
}

TEST_CASE("round sphere shrinks at the closed-form rate") {
  double r0 = 1.0, t_end = 0.2 * r0 * r0 / 4.0;
  auto t0 = std::chrono::steady_clock::now();
  SphereMcfTrajectory traj =
      run_sphere_mcf([&](double) { return r0; }, 0.0, t_end, 1e-5, 256, 50);
  double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  REQUIRE_FALSE(traj.blown_up);

  double exact = std::sqrt(r0 * r0 - 4.0 * t_end);
  const Vec& rho = traj.rho.back();
  CHECK(std::abs(rho.mean() - exact) / exact < 1e-4);
  CHECK(rho.maxCoeff() - rho.minCoeff() < 1e-10);  // stays round
  // interpolated profile at an interior time
  double tm = 0.6 * t_end;
  CHECK(std::abs(traj.profile(1.1, tm) - std::sqrt(r0 * r0 - 4.0 * tm)) < 1e-6);
  CHECK(elapsed < 30.0);
}

TEST_CASE("sphere flow converges at fourth order in dt") {
  double r0 = 1.0, t_end = 0.02;
  double exact = std::sqrt(r0 * r0 - 4.0 * t_end);
  auto err = [&](double dt) {
    SphereMcfTrajectory traj = run_sphere_mcf([&](double) { return r0; }, 0.0, t_end, dt, 8);
    return std::abs(traj.rho.back().mean() - exact);
  };
  double e1 = err(4e-3), e2 = err(2e-3), e3 = err(1e-3);
  CHECK(std::log2(e1 / e2) > 3.5);
  CHECK(std::log2(e2 / e3) > 3.5);
}

TEST_CASE("zonal perturbations of the sphere relax") {
  auto rho0 = [](double th) {
    double c = std::cos(th);
    return 1.0 + 0.05 * 0.5 * (3 * c * c - 1);  // l = 2 zonal mode
  };
  SphereMcfTrajectory traj = run_sphere_mcf(rho0, 0.0, 0.02, 5e-5, 64, 10);
  REQUIRE_FALSE(traj.blown_up);
  auto spread = [](const Vec& r) { return r.maxCoeff() - r.minCoeff(); };
  CHECK(spread(traj.rho.back()) < spread(traj.rho.front()));
}

TEST_CASE("flow past the singular time is flagged") {
  SphereMcfTrajectory traj = run_sphere_mcf([](double) { return 0.3; }, 0.0, 0.05, 1e-4, 16);
  CHECK(traj.blown_up);
}

TEST_CASE("graph flow over the flat torus damps linear modes at the heat rate") {
  AmbientFamily amb = flat_torus_ambient();
  double amp = 1e-3, t_end = 0.3;
  GraphMcfTrajectory traj = run_graph_mcf(
      amb, [&](double x, double) { return amp * std::sin(x); }, 0.0, t_end, 5e-3, 32, 8, 6);
  REQUIRE_FALSE(traj.blown_up);
  double got = traj.height(kPi / 2.0, 1.0, t_end);
  CHECK(std::abs(got / (amp * std::exp(-t_end)) - 1.0) < 1e-3);

  // a constant graph is a fixed point
  GraphMcfTrajectory flat = run_graph_mcf(
      amb, [](double, double) { return 0.7; }, 0.0, 0.05, 5e-3, 8, 8);
  CHECK(std::abs(flat.u.back().maxCoeff() - 0.7) < 1e-12);
  CHECK(std::abs(flat.u.back().minCoeff() - 0.7) < 1e-12);
}

TEST_CASE("graph flow in a curved ambient moves by its mean curvature") {
  AmbientFamily amb = flat_cross_dilaton_ambient(0.0);
  auto u0 = [](double x, double y) { return 0.05 * std::sin(x) * std::cos(y); };
  GraphMcfTrajectory traj = run_graph_mcf(amb, u0, 0.0, 0.05, 2.5e-3, 24, 24);
  REQUIRE_FALSE(traj.blown_up);

  Immersion fam = traj.surface_family();
  double tm = 0.025;
  for (auto [x, y] : {std::pair{0.9, 2.1}, std::pair{4.0, 5.3}}) {
    InducedPackage pkg = induced_package(fam, amb.g, amb.chart, x, y, tm);
    Vec vel(3);
    for (int c = 0; c < 3; ++c)
      vel[c] = fd_time([&](double t) { return fam.embed(x, y, t)[c]; }, tm, 2.5e-3);
    CHECK(std::abs(vel.dot(pkg.e0_low) - pkg.H) < 1e-3);
  }
}

TEST_CASE("warped flow is consistent with its right-hand side") {
  AmbientFamily init = warped_interval_torus_ambient(2.0, 0.25, 0.15, 0.4);
  double t_end = 0.02;
  WarpedRfTrajectory traj = run_warped_ricci_flow(init, 0.0, t_end, 64);
  REQUIRE_FALSE(traj.blown_up);

  // reflection symmetry about r = pi/2 is preserved
  for (double s : {0.3, 0.8, 1.4})
    for (int k : {0, 1, 2})
      CHECK(std::abs(traj.field(k, kPi / 2 + s, t_end) - traj.field(k, kPi / 2 - s, t_end)) <
            1e-9);

  // time derivative of the stored fields matches the continuum RHS
  AmbientFamily amb = traj.ambient_family();
  double tm = 0.5 * t_end, ht = t_end / 10.0;
  for (double r0 : {0.9, 2.0, 4.4}) {
    Vec p = pt3(r0, 0.0, 0.0);
    AmbientRhs rhs = extended_ricci_rhs(amb, p, tm);
    double da = fd_time([&](double t) { return traj.field(0, r0, t); }, tm, ht);
    double db = fd_time([&](double t) { return traj.field(1, r0, t); }, tm, ht);
    double dw = fd_time([&](double t) { return traj.field(2, r0, t); }, tm, ht);
    CHECK(std::abs(da - rhs.dg(0, 0)) < 1e-3);
    CHECK(std::abs(db - rhs.dg(1, 1)) < 1e-3);
    CHECK(std::abs(dw - rhs.dw) < 1e-3);
  }
}

TEST_CASE("backward heat solve reproduces the spreading kernel") {
  // du/dt = -u_xx on a static interval, closed-form Gaussian data
  double sigma_b = 0.5, t_a = 0.0, t_b = 0.25;
  auto exact = [&](double x, double t) {
    double s = sigma_b + (t_b - t);
    return std::exp(-x * x / (4 * s)) / std::sqrt(4 * kPi * s);
  };
  HeatGeometry geom;
  geom.x_lo = [](double) { return -4.0; };
  geom.x_hi = [](double) { return 4.0; };
  geom.op = [](double, double, double, double, double uxx) { return uxx; };
  geom.mu = [](double, double) { return 1.0; };
  HeatBc lo, hi;
  lo.kind = hi.kind = HeatBc::DirichletExact;
  lo.dirichlet = [&](double t) { return exact(-4.0, t); };
  hi.dirichlet = [&](double t) { return exact(4.0, t); };
  HeatTrajectory traj = solve_conjugate_heat_backward(
      geom, lo, hi, [&](double x) { return exact(x, t_b); }, t_a, t_b, 128, 5e-4, 25);
  REQUIRE_FALSE(traj.aborted);

  double h = 8.0 / 128;
  double worst = 0;
  for (int i = 0; i <= 128; ++i)
    worst = std::max(worst, std::abs(traj.u.front()[i] - exact(-4.0 + i * h, t_a)));
  CHECK(worst < 1e-4);
  // interpolated evaluation off the grid and between snapshots
  CHECK(std::abs(traj.eval(0.37, 0.1) - exact(0.37, 0.1)) < 1e-4);
}

TEST_CASE("steady soliton profile is transported exactly") {
  // u = e^{z - t} solves du/dt = -u_zz; Robin u_z = u at z = 0 is exact
  double t_a = 0.0, t_b = 0.3;
  HeatGeometry geom;
  geom.x_lo = [](double) { return 0.0; };
  geom.x_hi = [](double) { return 1.0; };
  geom.op = [](double, double, double, double, double uxx) { return uxx; };
  geom.mu = [](double, double) { return 1.0; };
  HeatBc lo, hi;
  lo.kind = HeatBc::Robin;
  lo.robin_beta = [](double) { return 1.0; };
  hi.kind = HeatBc::DirichletExact;
  hi.dirichlet = [&](double t) { return std::exp(1.0 - t); };
  HeatTrajectory traj = solve_conjugate_heat_backward(
      geom, lo, hi, [&](double z) { return std::exp(z - t_b); }, t_a, t_b, 64, 1e-4, 300);
  REQUIRE_FALSE(traj.aborted);
  double worst = 0;
  for (int i = 0; i <= 64; ++i)
    worst = std::max(worst, std::abs(traj.u.front()[i] - std::exp(i / 64.0 - t_a)));
  CHECK(worst < 1e-4);
}

TEST_CASE("conjugate heat preserves the u integral on a closed manifold") {
  AmbientFamily init = warped_interval_torus_ambient(2.0, 0.25, 0.15, 0.4);
  double t_a = 0.0, t_b = 0.02;
  WarpedRfTrajectory rf = run_warped_ricci_flow(init, t_a, t_b, 96);
  REQUIRE_FALSE(rf.blown_up);
  double alpha = init.alpha();

  HeatGeometry geom;
  geom.x_lo = [](double) { return 0.0; };
  geom.x_hi = [](double) { return 2.0 * kPi; };
  geom.op = [&](double r, double t, double u, double ur, double urr) {
    double a = rf.field(0, r, t), a1 = rf.field(0, r, t, 1);
    double b = rf.field(1, r, t), b1 = rf.field(1, r, t, 1);
    double w1 = rf.field(2, r, t, 1);
    AmbientFamily amb = rf.ambient_family();
    double R = curvature_package(amb.g, amb.chart, pt3(r, 0, 0), t).scalar;
    double lap = urr / a + ur * (b1 / (a * b) - a1 / (2 * a * a));
    double V = R - alpha * w1 * w1 / a;
    return lap - V * u;
  };
  geom.mu = [&](double r, double t) {
    return std::sqrt(rf.field(0, r, t)) * rf.field(1, r, t);
  };
  HeatBc per;
  per.kind = HeatBc::Periodic;
  int N = 96;
  HeatTrajectory traj = solve_conjugate_heat_backward(
      geom, per, per, [](double r) { return 1.0 + 0.2 * std::sin(r); }, t_a, t_b, N, 2.5e-4, 8);
  REQUIRE_FALSE(traj.aborted);

  auto mass = [&](size_t s) {
    double t = traj.times[s], h = 2.0 * kPi / N, acc = 0;
    for (int i = 0; i < N; ++i) acc += traj.u[s][i] * geom.mu(i * h, t) * h;
    return acc;
  };
  double m0 = mass(0), m1 = mass(traj.u.size() - 1);
  CHECK(std::abs(m0 / m1 - 1.0) < 1e-6);
}

TEST_CASE("heat solve aborts when positivity is lost") {
  HeatGeometry geom;
  geom.x_lo = [](double) { return 0.0; };
  geom.x_hi = [](double) { return 1.0; };
  // large undamped potential drives the backward solve through zero
  geom.op = [](double x, double, double u, double, double uxx) {
    return uxx - 80.0 * std::cos(8 * x) * u;
  };
  geom.mu = [](double, double) { return 1.0; };
  HeatBc even;
  even.kind = HeatBc::Even;
  HeatTrajectory traj = solve_conjugate_heat_backward(
      geom, even, even, [](double x) { return 1e-3 + x * 0.0; }, 0.0, 1.0, 32, 2e-4);
  CHECK(traj.aborted);
}
