#include "flowlab/curvature.hpp"

#include <catch2/catch_amalgamated.hpp>

using namespace flowlab;

namespace {

Vec pt3(double a, double b, double c) {
  Vec p(3);
  p << a, b, c;
  return p;
}

// Warped interval x torus metric dr^2 + phi(r)^2 (dx^2 + dy^2), phi = 2 + sin r.
MetricField warped_metric() {
  MetricField g;
  g.eval = [](const Vec& p, double) {
    double phi = 2.0 + std::sin(p[0]);
    Mat m = Mat::Zero(3, 3);
    m(0, 0) = 1.0;
    m(1, 1) = phi * phi;
    m(2, 2) = phi * phi;
    return m;
  };
  return g;
}

Chart warped_chart() {
  Chart c = Chart::free_space(3);
  c.periodic = {false, true, true};
  c.ranges = {{-10.0, 10.0}, {0.0, 1.0}, {0.0, 1.0}};
  return c;
}

// Hand-derived oracle for the warped ansatz (independent of the FD machinery):
// nonzero Christoffels:  G^0_11 = G^0_22 = -phi phi',  G^1_01 = G^2_02 = phi'/phi
// nonzero curvature:     R_0101 = R_0202 = -phi phi'',  R_1212 = -phi^2 phi'^2
// Ricci:                 diag(-2 phi''/phi, -(phi phi'' + phi'^2) twice)
// scalar:                -2 (2 phi phi'' + phi'^2) / phi^2
struct WarpedOracle {
  double phi, dphi, ddphi;
  explicit WarpedOracle(double r)
      : phi(2.0 + std::sin(r)), dphi(std::cos(r)), ddphi(-std::sin(r)) {}
  double gamma(int c, int a, int b) const {
    if (c == 0 && a == b && a > 0) return -phi * dphi;
    if (c > 0 && ((a == 0 && b == c) || (b == 0 && a == c))) return dphi / phi;
    return 0.0;
  }
  double riem(int a, int b, int c, int x) const {
    auto asym = [&](int i, int j, double v) {
      // fills the (i,j,i,j) pattern with full Riemann symmetries
      if (a == i && b == j && c == i && x == j) return v;
      if (a == j && b == i && c == j && x == i) return v;
      if (a == i && b == j && c == j && x == i) return -v;
      if (a == j && b == i && c == i && x == j) return -v;
      return 0.0;
    };
    double v = 0;
    v += asym(0, 1, -phi * ddphi);
    v += asym(0, 2, -phi * ddphi);
    v += asym(1, 2, -phi * phi * dphi * dphi);
    return v;
  }
  double ric(int a, int b) const {
    if (a != b) return 0.0;
    if (a == 0) return -2.0 * ddphi / phi;
    return -(phi * ddphi + dphi * dphi);
  }
  double scalar() const { return -2.0 * (2.0 * phi * ddphi + dphi * dphi) / (phi * phi); }
};

MetricField round_sphere_metric(int n, double radius = 1.0) {
  // geodesic polar angles (psi_1 .. psi_{n}), metric of S^n(radius):
  // g_kk = radius^2 * prod_{j<k} sin^2 psi_j
  MetricField g;
  g.eval = [n, radius](const Vec& p, double) {
    Mat m = Mat::Zero(n, n);
    double w = radius * radius;
    for (int k = 0; k < n; ++k) {
      m(k, k) = w;
      w *= sq(std::sin(p[k]));
    }
    return m;
  };
  return g;
}

}  // namespace

TEST_CASE("fd_derivative basics") {
  FdPolicy pol;
  Vec p1(1);
  p1 << 0.7;

  SECTION("second derivative of x^2 is exactly 2") {
    auto f = [](const Vec& q) { return q[0] * q[0]; };
    CHECK(fd_partial_free(f, p1, {2}, pol) == Catch::Approx(2.0).margin(1e-10));
  }
  SECTION("derivatives of a constant vanish") {
    auto f = [](const Vec&) { return 4.25; };
    CHECK(fd_partial_free(f, p1, {1}, pol) == Catch::Approx(0.0).margin(1e-12));
    CHECK(fd_partial_free(f, p1, {3}, pol) == Catch::Approx(0.0).margin(1e-9));
  }
  SECTION("d/dx sin x at 0 with order-4 stencil, h = 1e-2") {
    auto f = [](const Vec& q) { return std::sin(q[0]); };
    Stencil s = centered_stencil(1, 4);
    double h = 1e-2, acc = 0;
    for (std::size_t k = 0; k < s.offsets.size(); ++k) acc += s.weights[k] * f(Vec::Constant(1, s.offsets[k] * h));
    CHECK(acc / h == Catch::Approx(1.0).margin(1e-8));
  }
  SECTION("one-sided fallback at a range end is flagged and accurate") {
    auto f = [](const Vec& q) { return std::exp(q[0]); };
    std::vector<std::pair<double, double>> rng = {{0.0, 1.0}};
    std::vector<bool> per = {false};
    FdMeta meta;
    Vec p0(1);
    p0 << 0.0;
    double d = fd_partial(f, p0, {1}, pol, rng, per, &meta);
    CHECK(meta.one_sided);
    CHECK(d == Catch::Approx(1.0).margin(1e-9));
  }
  SECTION("mixed partial of x^2 y") {
    Vec p(2);
    p << 1.3, -0.4;
    auto f = [](const Vec& q) { return q[0] * q[0] * q[1]; };
    CHECK(fd_partial_free(f, p, {2, 1}, pol) == Catch::Approx(2.0).margin(1e-8));
  }
}

TEST_CASE("curvature_package: flat space") {
  Chart c = Chart::free_space(3);
  MetricField g = MetricField::euclidean(3);
  CurvaturePackage pkg = curvature_package(g, c, pt3(0.3, -1.0, 2.0), 0.0);
  CHECK(pkg.gamma.max_abs() == Catch::Approx(0.0).margin(1e-12));
  CHECK(pkg.riem.max_abs() == Catch::Approx(0.0).margin(1e-12));
  CHECK(pkg.ric.cwiseAbs().maxCoeff() == Catch::Approx(0.0).margin(1e-12));
  CHECK(pkg.scalar == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("curvature_package: unit round sphere pins the sign convention") {
  for (int n : {3, 4}) {
    Chart c = Chart::free_space(n);
    MetricField g = round_sphere_metric(n);
    Vec p = Vec::Constant(n, 1.1);
    p[n - 1] = 0.4;
    CurvaturePackage pkg = curvature_package(g, c, p, 0.0);
    Mat expect = double(n - 1) * pkg.g;
    CHECK((pkg.ric - expect).cwiseAbs().maxCoeff() < 1e-8 * expect.cwiseAbs().maxCoeff());
    CHECK(pkg.scalar == Catch::Approx(double(n) * (n - 1)).epsilon(1e-8));
  }
}

TEST_CASE("curvature_package: degenerate metric rejected") {
  Chart c = Chart::free_space(3);
  MetricField g;
  g.eval = [](const Vec&, double) { return Mat(Mat::Zero(3, 3)); };
  CHECK_THROWS_AS(curvature_package(g, c, pt3(0, 0, 0), 0.0), Error);
}

TEST_CASE("curvature_package: warped interval x torus vs symbolic oracle") {
  Chart c = warped_chart();
  MetricField g = warped_metric();
  for (double r : {0.37, 1.9, -0.8}) {
    Vec p = pt3(r, 0.21, 0.66);
    CurvaturePackage pkg = curvature_package(g, c, p, 0.0);
    WarpedOracle o(r);
    double scale = std::max(1.0, pkg.riem.max_abs());
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) {
        for (int cc = 0; cc < 3; ++cc) {
          CHECK(pkg.gamma(a, b, cc) == Catch::Approx(o.gamma(a, b, cc)).margin(1e-8));
          for (int x = 0; x < 3; ++x)
            CHECK(pkg.riem(a, b, cc, x) == Catch::Approx(o.riem(a, b, cc, x)).margin(1e-6 * scale));
        }
        CHECK(pkg.ric(a, b) == Catch::Approx(o.ric(a, b)).margin(1e-7));
      }
    CHECK(pkg.scalar == Catch::Approx(o.scalar()).epsilon(1e-7));
  }
}

TEST_CASE("riemann symmetries and first Bianchi on scenario metrics") {
  struct Case {
    Chart chart;
    MetricField g;
    Vec p;
  };
  std::vector<Case> cases;
  cases.push_back({Chart::free_space(3), MetricField::euclidean(3), pt3(0.1, 0.2, 0.3)});
  cases.push_back({warped_chart(), warped_metric(), pt3(0.9, 0.4, 0.1)});
  cases.push_back({Chart::free_space(3), round_sphere_metric(3), pt3(1.2, 0.8, 0.3)});
  for (const auto& cs : cases) {
    CurvaturePackage pkg = curvature_package(cs.g, cs.chart, cs.p, 0.0);
    int n = pkg.dim();
    double scale = std::max(1.0, pkg.riem.max_abs());
    double anti1 = 0, anti2 = 0, pair = 0, bianchi1 = 0;
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        for (int c = 0; c < n; ++c)
          for (int x = 0; x < n; ++x) {
            anti1 = std::max(anti1, std::abs(pkg.riem(a, b, c, x) + pkg.riem(b, a, c, x)));
            anti2 = std::max(anti2, std::abs(pkg.riem(a, b, c, x) + pkg.riem(a, b, x, c)));
            pair = std::max(pair, std::abs(pkg.riem(a, b, c, x) - pkg.riem(c, x, a, b)));
            bianchi1 = std::max(bianchi1, std::abs(pkg.riem(a, b, c, x) + pkg.riem(b, c, a, x) +
                                                 pkg.riem(c, a, b, x)));
          }
    CHECK(anti1 / scale < 1e-8);
    CHECK(anti2 / scale < 1e-8);
    CHECK(pair / scale < 1e-8);
    CHECK(bianchi1 / scale < 1e-8);
    CHECK((pkg.g_inv * pkg.g - Mat::Identity(n, n)).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("curvature transforms tensorially under a diagonal rescaling") {
  Chart c = warped_chart();
  MetricField g = warped_metric();
  const double s0 = 2.0, s12 = 0.5;  // x^0 -> x^0 / s0, x^i -> x^i / s12
  MetricField gs;
  gs.eval = [g, s0, s12](const Vec& q, double t) {
    Vec p = q;
    p[0] *= s0;
    p[1] *= s12;
    p[2] *= s12;
    Mat m = g.eval(p, t);
    Mat J = Mat::Zero(3, 3);
    J(0, 0) = s0;
    J(1, 1) = s12;
    J(2, 2) = s12;
    return Mat(J.transpose() * m * J);
  };
  Chart cs = c;
  cs.ranges = {{-5.0, 5.0}, {0.0, 2.0}, {0.0, 2.0}};
  Vec p = pt3(0.9, 0.4, 0.1);
  Vec q = pt3(0.9 / s0, 0.4 / s12, 0.1 / s12);
  CurvaturePackage a = curvature_package(g, c, p, 0.0);
  CurvaturePackage b = curvature_package(gs, cs, q, 0.0);
  double jac[3] = {s0, s12, s12};
  double scale = std::max(1.0, a.riem.max_abs());
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      CHECK(b.ric(i, j) == Catch::Approx(a.ric(i, j) * jac[i] * jac[j]).margin(1e-7));
      for (int k = 0; k < 3; ++k)
        for (int l = 0; l < 3; ++l)
          CHECK(b.riem(i, j, k, l) ==
                Catch::Approx(a.riem(i, j, k, l) * jac[i] * jac[j] * jac[k] * jac[l])
                    .margin(1e-6 * scale));
    }
  CHECK(b.scalar == Catch::Approx(a.scalar).epsilon(1e-7));
}

TEST_CASE("differential_ops closed forms") {
  Chart c = Chart::free_space(3);
  MetricField g = MetricField::euclidean(3);

  SECTION("f = |x|^2/2: hessian = id, laplacian = n") {
    ScalarField f;
    f.eval = [](const Vec& p, double) { return 0.5 * p.squaredNorm(); };
    DiffOps d = differential_ops(f, g, c, pt3(0.3, -0.4, 1.0), 0.0);
    CHECK((d.hess - Mat::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-9);
    CHECK(d.lap == Catch::Approx(3.0).margin(1e-9));
  }
  SECTION("linear f: zero hessian, constant |grad|^2") {
    Vec L = pt3(1.0, 2.0, -0.5);
    ScalarField f;
    f.eval = [L](const Vec& p, double) { return L.dot(p); };
    DiffOps d = differential_ops(f, g, c, pt3(0.0, 0.7, -0.2), 0.0);
    CHECK(d.hess.cwiseAbs().maxCoeff() < 1e-9);
    CHECK(d.grad_sq == Catch::Approx(L.squaredNorm()).margin(1e-10));
  }
  SECTION("gaussian-shrinker potential f = |x|^2/(4 tau)") {
    double tau = 0.7;
    ScalarField f;
    f.eval = [tau](const Vec& p, double) { return p.squaredNorm() / (4.0 * tau); };
    Vec p = pt3(0.5, -1.0, 0.25);
    DiffOps d = differential_ops(f, g, c, p, 0.0);
    CHECK(d.lap == Catch::Approx(3.0 / (2.0 * tau)).margin(1e-9));
    CHECK(d.grad_sq == Catch::Approx(p.squaredNorm() / (4.0 * tau * tau)).margin(1e-9));
  }
}

TEST_CASE("lie_derivative_metric") {
  Chart c = Chart::free_space(3);
  MetricField g = MetricField::euclidean(3);

  SECTION("L_{grad f} g = 2 hess f") {
    ScalarField f;
    f.eval = [](const Vec& p, double) { return std::sin(p[0]) * p[1] + 0.3 * p[2] * p[2]; };
    Vec p = pt3(0.4, 0.9, -0.3);
    VectorField X;
    X.eval = [&](const Vec& q, double t) {
      FdPolicy pol;
      Vec d(3);
      for (int a = 0; a < 3; ++a) d[a] = fd_axis([&](const Vec& r) { return f.eval(r, t); }, q, a, 1, pol);
      return d;  // flat metric: grad = partials
    };
    Mat L = lie_derivative_metric(g, X, c, p, 0.0, c.fd_policy());
    DiffOps d = differential_ops(f, g, c, p, 0.0);
    CHECK((L - 2.0 * d.hess).cwiseAbs().maxCoeff() < 1e-6);
  }
  SECTION("zero field gives zero") {
    VectorField X;
    X.eval = [](const Vec&, double) { return Vec(Vec::Zero(3)); };
    Mat L = lie_derivative_metric(g, X, c, pt3(1, 2, 3), 0.0, c.fd_policy());
    CHECK(L.cwiseAbs().maxCoeff() < 1e-12);
  }
  SECTION("rotation field is Killing in the flat plane slice") {
    VectorField X;
    X.eval = [](const Vec& p, double) {
      Vec v(3);
      v << -p[1], p[0], 0.0;
      return v;
    };
    Mat L = lie_derivative_metric(g, X, c, pt3(0.6, -0.2, 0.0), 0.0, c.fd_policy());
    CHECK(L.cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("bianchi_residual") {
  SECTION("flat and constant-curvature give ~0") {
    Chart c = Chart::free_space(3);
    Vec r1 = bianchi_residual(MetricField::euclidean(3), c, pt3(0.2, 0.5, -1.0), 0.0);
    CHECK(r1.cwiseAbs().maxCoeff() < 1e-10);
    Vec r2 = bianchi_residual(round_sphere_metric(3), c, pt3(1.2, 0.8, 0.3), 0.0);
    CHECK(r2.cwiseAbs().maxCoeff() < 1e-6);
  }
  SECTION("warped metric residual small and convergent under refinement") {
    Chart c = warped_chart();
    MetricField g = warped_metric();
    Vec p = pt3(0.9, 0.4, 0.1);
    FdPolicy pol = c.fd_policy(4);
    Vec r = bianchi_residual(g, c, p, 0.0, pol);
    CHECK(r.cwiseAbs().maxCoeff() < 1e-5);
  }
}
