#include "flowlab/scenarios.hpp"

#include <catch2/catch_amalgamated.hpp>

using namespace flowlab;

namespace {

Vec pt3(double a, double b, double c) {
  Vec p(3);
  p << a, b, c;
  return p;
}

Vec pt2(double a, double b) {
  Vec p(2);
  p << a, b;
  return p;
}

// d/dt of the embedding at fixed parameters
Vec embed_velocity(const Immersion& s, double u0, double u1, double t) {
  Vec v(3);
  for (int c = 0; c < 3; ++c)
    v[c] = fd_time([&](double tt) { return s.embed(u0, u1, tt)[c]; }, t, 1e-5, 4);
  return v;
}

}  // namespace

TEST_CASE("catalog presets all build and have unique names") {
  std::vector<std::string> seen;
  for (const ScenarioSpec& spec : scenario_catalog()) {
    CHECK(std::find(seen.begin(), seen.end(), spec.name) == seen.end());
    seen.push_back(spec.name);
    Scenario sc = build_scenario(spec);
    CHECK(sc.t_b > sc.t_a);
    if (sc.has_surface) {
      InducedPackage pkg = induced_package(sc.surface, sc.ambient.g, sc.ambient.chart,
                                           sc.grid.u0.nodes[2], sc.grid.u1.nodes[3], sc.t_a);
      CHECK(pkg.area_weight > 0);
    }
  }
  CHECK_THROWS_AS(build_named("no-such-scenario"), Error);
}

TEST_CASE("potential families satisfy df/dt = |grad f|^2") {
  Chart chart = Chart::free_space(3);
  MetricField g = MetricField::euclidean(3);
  for (auto kind : {std::string("gaussian"), std::string("linear")}) {
    ScalarField f = kind == "gaussian" ? gaussian_shrinker_potential(1.0)
                                       : linear_translator_potential(-1.0, 2);
    for (auto p : {pt3(0.3, -0.7, 0.4), pt3(1.2, 0.1, -0.5)}) {
      for (double t : {0.0, 0.3}) {
        double dfdt = fd_time([&](double tt) { return f.eval(p, tt); }, t, 1e-4, 4);
        DiffOps d = differential_ops(f, g, chart, p, t);
        CHECK(dfdt == Catch::Approx(d.grad_sq).margin(1e-8));
      }
    }
  }
}

TEST_CASE("gaussian shrinker solves the gradient soliton equation") {
  // Ric + Hess(f) - alpha dw dw = g / (2 tau) with Ric = 0, w const
  Scenario sc = build_named("huisken-shrinker");
  double tau0 = 1.0;
  for (double t : {0.0, 0.4}) {
    double tau = tau0 - t;
    for (auto p : {pt3(0.2, 0.5, -0.3), pt3(-1.0, 0.2, 0.7)}) {
      DiffOps d = differential_ops(sc.ambient.f, sc.ambient.g, sc.ambient.chart, p, t);
      Mat res = d.hess - Mat::Identity(3, 3) / (2.0 * tau);
      CHECK(res.cwiseAbs().maxCoeff() < 1e-9);
    }
  }
}

TEST_CASE("huisken shrinker sphere is a mean curvature soliton") {
  Scenario sc = build_named("huisken-shrinker");
  for (double t : {0.0, 0.3}) {
    for (auto [th, ph] : {std::pair{0.8, 0.5}, {2.2, 3.9}}) {
      InducedPackage pkg =
          induced_package(sc.surface, sc.ambient.g, sc.ambient.chart, th, ph, t);
      DiffOps d = differential_ops(sc.ambient.f, sc.ambient.g, sc.ambient.chart, pkg.x, t);
      double e0f = d.grad.dot(pkg.e0_low);
      CHECK(pkg.H + e0f == Catch::Approx(0.0).margin(1e-10));
    }
  }
}

TEST_CASE("closed-form surfaces move by mean curvature flow") {
  SECTION("shrinking sphere in flat space") {
    Scenario sc = build_named("shrinking-sphere");
    for (double t : {0.0, 0.04}) {
      for (auto [th, ph] : {std::pair{0.8, 0.5}, {1.9, 2.6}}) {
        InducedPackage pkg =
            induced_package(sc.surface, sc.ambient.g, sc.ambient.chart, th, ph, t);
        Vec vel = embed_velocity(sc.surface, th, ph, t);
        CHECK((vel - pkg.H * pkg.e0).cwiseAbs().maxCoeff() < 1e-7);
      }
    }
  }
  SECTION("latitude sphere in shrinking round S^3") {
    Scenario sc = build_named("latitude-sphere");
    for (double t : {0.0, 0.03}) {
      for (auto [th, ph] : {std::pair{0.9, 0.4}, {1.8, 3.0}}) {
        InducedPackage pkg =
            induced_package(sc.surface, sc.ambient.g, sc.ambient.chart, th, ph, t);
        Vec vel = embed_velocity(sc.surface, th, ph, t);
        CHECK((vel - pkg.H * pkg.e0).cwiseAbs().maxCoeff() < 1e-6);
      }
    }
  }
  SECTION("bowl translator: normal velocity is H, tangential drift is vertical") {
    Scenario sc = build_named("bowl-translator");
    for (auto [rho, ph] : {std::pair{0.7, 1.1}, {2.5, 4.0}}) {
      InducedPackage pkg =
          induced_package(sc.surface, sc.ambient.g, sc.ambient.chart, rho, ph, 0.2);
      Vec vel = embed_velocity(sc.surface, rho, ph, 0.2);
      CHECK((vel - pt3(0, 0, 1)).cwiseAbs().maxCoeff() < 1e-9);  // translation by e_z
      CHECK(vel.dot(pkg.e0_low) == Catch::Approx(pkg.H).margin(1e-9));
    }
  }
}

TEST_CASE("bowl translator identities") {
  Scenario sc = build_named("bowl-translator");
  const BowlProfile& prof = bowl_profile();

  SECTION("profile solves the translator ODE to high accuracy") {
    for (double rho : {0.05, 0.4, 1.3, 3.1, 5.5}) {
      double res = prof.curvature(rho) / (1.0 + sq(prof.slope(rho))) + prof.slope(rho) / rho - 1.0;
      CHECK(std::abs(res) < 1e-9);
    }
    CHECK(prof.height(0.01) == Catch::Approx(0.01 * 0.01 / 4.0).margin(1e-9));
  }
  SECTION("H equals the vertical component of the normal") {
    for (auto [rho, ph] : {std::pair{0.6, 0.3}, {1.9, 2.2}, {3.4, 5.0}}) {
      InducedPackage pkg =
          induced_package(sc.surface, sc.ambient.g, sc.ambient.chart, rho, ph, 0.0);
      CHECK(pkg.H == Catch::Approx(pkg.e0[2]).margin(1e-10));
      CHECK(pkg.H == Catch::Approx(1.0 / std::sqrt(1.0 + sq(prof.slope(rho)))).margin(1e-9));
    }
  }
  SECTION("bowl is f-minimal for the linear potential") {
    for (auto [rho, ph] : {std::pair{0.6, 0.3}, {2.8, 1.5}}) {
      for (double t : {0.0, 0.25}) {
        InducedPackage pkg =
            induced_package(sc.surface, sc.ambient.g, sc.ambient.chart, rho, ph, t);
        DiffOps d = differential_ops(sc.ambient.f, sc.ambient.g, sc.ambient.chart, pkg.x, t);
        CHECK(pkg.H + d.grad.dot(pkg.e0_low) == Catch::Approx(0.0).margin(1e-9));
      }
    }
  }
}

TEST_CASE("shrinking round sphere ambient solves Ricci flow") {
  Scenario sc = build_named("latitude-sphere");
  for (double t : {0.0, 0.03}) {
    for (auto p : {pt3(1.0, 0.9, 0.3), pt3(1.8, 2.1, 4.4)}) {
      Mat dg(3, 3);
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b)
          dg(a, b) =
              fd_time([&](double tt) { return sc.ambient.g.eval(p, tt)(a, b); }, t, 1e-5, 4);
      CurvaturePackage pkg = curvature_package(sc.ambient.g, sc.ambient.chart, p, t);
      CHECK((dg + 2.0 * pkg.ric).cwiseAbs().maxCoeff() < 1e-7);
    }
  }
}

TEST_CASE("warped scenario boundary slices satisfy the boundary conditions") {
  Scenario sc = build_named("warped-interval-torus");
  double rho_m = sc.spec.get("rho_minus", 0), rho_p = sc.spec.get("rho_plus", 0);
  for (auto [rho, sign] : {std::pair{rho_m, +1.0}, {rho_p, -1.0}}) {
    Immersion slice = boundary_slice_surface(rho, sign);
    InducedPackage pkg = induced_package(slice, sc.ambient.g, sc.ambient.chart, 0.7, 1.9, 0.0);
    CHECK(std::abs(pkg.H) < 1e-9);  // phi'(rho) = 0 by symmetry
    DiffOps dw = differential_ops(sc.ambient.w, sc.ambient.g, sc.ambient.chart, pkg.x, 0.0);
    CHECK(std::abs(dw.grad.dot(pkg.e0_low)) < 1e-9);  // e0 w = 0
  }
}

TEST_CASE("flat-cross ambient is flat with an active dilaton") {
  Scenario sc = build_named("torus-graph");
  for (auto p : {pt3(0.4, 1.1, 5.0), pt3(2.7, 3.3, 0.2)}) {
    CurvaturePackage pkg = curvature_package(sc.ambient.g, sc.ambient.chart, p, 0.0);
    CHECK(pkg.ric.cwiseAbs().maxCoeff() < 1e-7);
    DiffOps dw = differential_ops(sc.ambient.w, sc.ambient.g, sc.ambient.chart, p, 0.0);
    CHECK(dw.grad_sq > 1e-3);  // dilaton really varies
  }
}

TEST_CASE("perturbations are deterministic and vanish at eps = 0") {
  ScenarioSpec base = find_scenario_spec("shrinking-sphere");
  ScenarioSpec p0 = perturb_scenario(base, 0.0, 2);
  Scenario a = build_scenario(base), b = build_scenario(p0);
  for (auto [th, ph] : {std::pair{0.8, 0.5}, {2.2, 3.9}})
    CHECK((a.surface.embed(th, ph, 0.01) - b.surface.embed(th, ph, 0.01)).norm() < 1e-15);

  ScenarioSpec p1 = perturb_scenario(base, 1e-2, 2);
  ScenarioSpec p2 = perturb_scenario(base, 1e-2, 2);
  Scenario c = build_scenario(p1), d = build_scenario(p2);
  CHECK((c.surface.embed(0.8, 0.5, 0.0) - d.surface.embed(0.8, 0.5, 0.0)).norm() == 0.0);
  CHECK((c.surface.embed(0.8, 0.5, 0.0) - a.surface.embed(0.8, 0.5, 0.0)).norm() > 1e-4);
}
