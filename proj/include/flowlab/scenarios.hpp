#pragma once

#include <map>
#include <memory>

#include "flowlab/surface.hpp"

namespace flowlab {

inline double legendre_p(int m, double x) {
  double p0 = 1.0, p1 = x;
  if (m == 0) return p0;
  for (int k = 2; k <= m; ++k) {
    double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
    p0 = p1;
    p1 = p2;
  }
  return p1;
}

// --- bowl translator profile -------------------------------------------------
// Rotationally symmetric graph z = b(rho) translating vertically at unit speed:
//   b''/(1 + b'^2) + b'/rho = 1,  b(0) = b'(0) = 0.
// Integrated once with RK4 at small fixed step and stored densely; evaluation
// by cubic Hermite interpolation (interpolation error far below 1e-10).
class BowlProfile {
 public:
  explicit BowlProfile(double rho_max = 8.0, double h = 1e-3) : h_(h) {
    auto slope_rhs = [](double rho, double p) { return (1.0 - p / rho) * (1.0 + p * p); };
    // series start: p = rho/2 + rho^3/32 + O(rho^5)
    double rho = 1e-3;
    double p = rho / 2.0 + std::pow(rho, 3) / 32.0;
    double b = rho * rho / 4.0 + std::pow(rho, 4) / 128.0;
    rho0_ = rho;
    rho_.push_back(rho);
    b_.push_back(b);
    p_.push_back(p);
    while (rho < rho_max) {
      double k1p = slope_rhs(rho, p);
      double k1b = p;
      double k2p = slope_rhs(rho + h / 2, p + h / 2 * k1p);
      double k2b = p + h / 2 * k1p;
      double k3p = slope_rhs(rho + h / 2, p + h / 2 * k2p);
      double k3b = p + h / 2 * k2p;
      double k4p = slope_rhs(rho + h, p + h * k3p);
      double k4b = p + h * k3p;
      p += h / 6 * (k1p + 2 * k2p + 2 * k3p + k4p);
      b += h / 6 * (k1b + 2 * k2b + 2 * k3b + k4b);
      rho += h;
      rho_.push_back(rho);
      b_.push_back(b);
      p_.push_back(p);
    }
  }

  double height(double rho) const { return eval(rho).first; }
  double slope(double rho) const { return eval(rho).second; }
  double curvature(double rho) const {  // b''
    auto [b, p] = eval(rho);
    (void)b;
    return (1.0 - p / rho) * (1.0 + p * p);
  }
  double rho_max() const { return rho_.back(); }

 private:
  std::pair<double, double> eval(double rho) const {  // (b, b')
    if (rho < rho0_) {  // series near the axis
      return {rho * rho / 4.0 + std::pow(rho, 4) / 128.0,
              rho / 2.0 + std::pow(rho, 3) / 32.0};
    }
    require(rho <= rho_.back() + 1e-12, "bowl profile sampled outside stored range");
    size_t i = std::min(size_t((rho - rho0_) / h_), rho_.size() - 2);
    double s = (rho - rho_[i]) / h_;
    double h00 = (1 + 2 * s) * sq(1 - s), h10 = s * sq(1 - s);
    double h01 = s * s * (3 - 2 * s), h11 = s * s * (s - 1);
    double b = h00 * b_[i] + h10 * h_ * p_[i] + h01 * b_[i + 1] + h11 * h_ * p_[i + 1];
    auto dd = [&](size_t k) { return (1.0 - p_[k] / rho_[k]) * (1.0 + p_[k] * p_[k]); };
    double p = h00 * p_[i] + h10 * h_ * dd(i) + h01 * p_[i + 1] + h11 * h_ * dd(i + 1);
    return {b, p};
  }

  double h_, rho0_;
  std::vector<double> rho_, b_, p_;
};

inline const BowlProfile& bowl_profile() {
  static BowlProfile prof;
  return prof;
}

// --- scenario specification --------------------------------------------------

struct ScenarioSpec {
  std::string name;  // preset id
  std::string ambient_kind = "flat-euclidean";
  std::string potential_kind = "zero";
  std::string dilaton_kind = "constant";
  std::string surface_kind = "round-sphere";
  std::map<std::string, double> params;

  double get(const std::string& key, double fallback) const {
    auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
  }
};

struct SolitonMeta {
  bool is_soliton = false;
  std::string soliton_case = "none";  // steady | shrinking | expanding
  double c = 0;
  bool closed_form = false;
};

struct AmbientFamily {
  Chart chart;
  MetricField g;
  ScalarField w;
  ScalarField f;  // potential f-bar (valid when has_f)
  bool has_f = false;
  int n = 3;
  double alpha() const { return alpha_n(n); }
};

struct Scenario {
  ScenarioSpec spec;
  AmbientFamily ambient;
  Immersion surface;
  bool has_surface = false;
  ParamGrid2 grid;
  SolitonMeta soliton;
  double t_a = 0, t_b = 0;
};

// --- ambient builders ---------------------------------------------------------

inline AmbientFamily flat_euclidean_ambient(int n) {
  AmbientFamily a;
  a.n = n;
  a.chart = Chart::free_space(n);
  a.g = MetricField::euclidean(n);
  a.w = ScalarField::constant(0.0);
  return a;
}

// g(t) = (1 - 2(n-1) t) g_{S^n(1)}: the exact Ricci-flow shrinking round sphere
inline AmbientFamily shrinking_round_sphere_ambient(int n) {
  AmbientFamily a;
  a.n = n;
  a.chart = Chart::free_space(n);
  for (int k = 0; k < n - 1; ++k) a.chart.ranges[k] = {1e-3, kPi - 1e-3};
  a.chart.ranges[n - 1] = {0.0, 2.0 * kPi};
  a.chart.periodic.assign(n, false);
  a.chart.periodic[n - 1] = true;
  a.g.eval = [n](const Vec& p, double t) {
    double sigma = 1.0 - 2.0 * (n - 1) * t;
    require(sigma > 0, "shrinking sphere past its singular time");
    Mat m = Mat::Zero(n, n);
    double wgt = sigma;
    for (int k = 0; k < n; ++k) {
      m(k, k) = wgt;
      wgt *= sq(std::sin(p[k]));
    }
    return m;
  };
  a.w = ScalarField::constant(0.0);
  return a;
}

// Warped product on the 3-torus: g = dr^2 + phi0(r)^2 (dx^2 + dy^2) at t = 0.
// Profiles are drawn from span{1, sin r, cos 2r}: every member is symmetric
// about r = pi/2 and r = 3pi/2, so slices there satisfy phi' = 0 (H = 0) and
// w' = 0 exactly -- the boundary conditions H + e0 f = 0, e0 w = 0 of the
// boundary theorems hold for all time by reflection symmetry.
inline AmbientFamily warped_interval_torus_ambient(double phi_c0, double phi_c1, double phi_c2,
                                                   double w_amp) {
  AmbientFamily a;
  a.n = 3;
  a.chart = Chart::free_space(3);
  a.chart.ranges = {{0.0, 2.0 * kPi}, {0.0, 2.0 * kPi}, {0.0, 2.0 * kPi}};
  a.chart.periodic = {true, true, true};
  // k-th derivative of phi (k = 0 includes the constant term)
  auto phi_d = [=](double r, int k) {
    double v = phi_c1 * std::sin(r + k * kPi / 2.0) +
               phi_c2 * std::pow(2.0, k) * std::cos(2.0 * r + k * kPi / 2.0);
    return k == 0 ? v + phi_c0 : v;
  };
  a.g.eval = [=](const Vec& p, double) {
    double phi = phi_d(p[0], 0);
    require(phi > 0, "warped profile must stay positive");
    Mat m = Mat::Zero(3, 3);
    m(0, 0) = 1.0;
    m(1, 1) = phi * phi;
    m(2, 2) = phi * phi;
    return m;
  };
  a.g.exact_deriv = [=](const Vec& p, double t, const MultiIndex& mi) {
    int k = total_order(mi);
    if (k != mi[0]) return Mat(Mat::Zero(3, 3));
    if (k == 0) return a.g.eval(p, t);
    double d = 0;  // Leibniz rule for (phi^2)^(k)
    for (int j = 0; j <= k; ++j) {
      double binom = 1;
      for (int m = 0; m < j; ++m) binom = binom * (k - m) / (m + 1);
      d += binom * phi_d(p[0], j) * phi_d(p[0], k - j);
    }
    Mat m = Mat::Zero(3, 3);
    m(1, 1) = m(2, 2) = d;
    return m;
  };
  a.w.eval = [=](const Vec& p, double) { return w_amp * std::cos(2.0 * p[0]); };
  a.w.exact_deriv = [=](const Vec& p, double, const MultiIndex& mi) {
    int k = total_order(mi);
    if (k != mi[0]) return 0.0;
    return w_amp * std::pow(2.0, k) * std::cos(2.0 * p[0] + k * kPi / 2.0);
  };
  return a;
}

// Flat product q0(x) dx^2 + dy^2 + dz^2 (flat for any q0 > 0) with a periodic
// dilaton: the minimal ambient in which the alpha_n coupling is active.
inline AmbientFamily flat_cross_dilaton_ambient(double w_amp) {
  AmbientFamily a;
  a.n = 3;
  a.chart = Chart::free_space(3);
  a.chart.ranges = {{0.0, 2.0 * kPi}, {0.0, 2.0 * kPi}, {0.0, 2.0 * kPi}};
  a.chart.periodic = {true, true, true};
  a.g.eval = [](const Vec& p, double) {
    Mat m = Mat::Identity(3, 3);
    m(0, 0) = 1.0 + 0.3 * std::cos(p[0]);
    return m;
  };
  a.g.exact_deriv = [](const Vec& p, double t, const MultiIndex& mi) {
    int k = total_order(mi);
    Mat m = Mat::Zero(3, 3);
    if (k != mi[0]) return m;
    if (k == 0) {
      m = Mat::Identity(3, 3);
      m(0, 0) = 1.0 + 0.3 * std::cos(p[0]);
    } else {
      m(0, 0) = 0.3 * std::cos(p[0] + k * kPi / 2.0);
    }
    return m;
  };
  a.w.eval = [w_amp](const Vec& p, double) { return w_amp * std::sin(p[0]); };
  a.w.exact_deriv = [w_amp](const Vec& p, double, const MultiIndex& mi) {
    int k = total_order(mi);
    if (k != mi[0]) return 0.0;
    return w_amp * std::sin(p[0] + k * kPi / 2.0);
  };
  return a;
}

// --- potentials ----------------------------------------------------------------

// f-bar = |x|^2 / (4 tau), tau = tau0 - t: satisfies del f / del t = |grad f|^2
inline ScalarField gaussian_shrinker_potential(double tau0) {
  ScalarField f;
  f.eval = [tau0](const Vec& p, double t) {
    double tau = tau0 - t;
    require(tau > 0, "gaussian shrinker past its singular time");
    return p.squaredNorm() / (4.0 * tau);
  };
  return f;
}

// f-bar = l x_n + l^2 t: the transported linear potential of a translator
inline ScalarField linear_translator_potential(double slope, int axis) {
  ScalarField f;
  f.eval = [slope, axis](const Vec& p, double t) { return slope * p[axis] + slope * slope * t; };
  return f;
}

// --- surface builders -----------------------------------------------------------

// Sphere of radius r(t) about the origin, inward normal. shrink_rate = 2(n-1)
// gives the exact MCF solution r(t) = sqrt(r0^2 - 2(n-1) t); 0 keeps it static.
// eps/mode add a zonal Legendre perturbation rho(theta) = r(t)(1 + eps P_m(cos theta)).
inline Immersion sphere_surface(double r0, double shrink_rate, double eps = 0.0, int mode = 2) {
  Immersion s;
  s.ranges = {{{0.0, kPi}, {0.0, 2.0 * kPi}}};
  s.periodic = {false, true};
  auto radius = [r0, shrink_rate](double t) {
    double r2 = r0 * r0 - shrink_rate * t;
    require(r2 > 0, "sphere past its singular time");
    return std::sqrt(r2);
  };
  s.embed = [=](double th, double ph, double t) {
    double rho = radius(t) * (1.0 + eps * legendre_p(mode, std::cos(th)));
    Vec x(3);
    x << rho * std::sin(th) * std::cos(ph), rho * std::sin(th) * std::sin(ph),
        rho * std::cos(th);
    return x;
  };
  if (eps == 0.0) {
    s.exact_jet = [=](double th, double ph, double t) {
      double r = radius(t);
      double st = std::sin(th), ct = std::cos(th), sp = std::sin(ph), cp = std::cos(ph);
      EmbedJet j;
      auto v3 = [](double a, double b, double c) {
        Vec v(3);
        v << a, b, c;
        return v;
      };
      j.x = r * v3(st * cp, st * sp, ct);
      j.du[0] = r * v3(ct * cp, ct * sp, -st);
      j.du[1] = r * v3(-st * sp, st * cp, 0.0);
      j.d2[0][0] = -r * v3(st * cp, st * sp, ct);
      j.d2[0][1] = j.d2[1][0] = r * v3(-ct * sp, ct * cp, 0.0);
      j.d2[1][1] = r * v3(-st * cp, -st * sp, 0.0);
      return j;
    };
  }
  s.normal_ref = [](double th, double ph, double) {
    Vec v(3);
    v << -std::sin(th) * std::cos(ph), -std::sin(th) * std::sin(ph), -std::cos(th);
    return v;  // inward
  };
  return s;
}

// Bowl translator z = b(rho) + t, upward normal (H = <e0, e_z> > 0).
inline Immersion bowl_surface(double rho_max) {
  const BowlProfile& prof = bowl_profile();
  require(rho_max <= prof.rho_max(), "bowl parameter range exceeds stored profile");
  Immersion s;
  s.ranges = {{{0.0, rho_max}, {0.0, 2.0 * kPi}}};
  s.periodic = {false, true};
  s.embed = [&prof](double rho, double ph, double t) {
    Vec x(3);
    x << rho * std::cos(ph), rho * std::sin(ph), prof.height(rho) + t;
    return x;
  };
  s.exact_jet = [&prof](double rho, double ph, double t) {
    double c = std::cos(ph), sn = std::sin(ph);
    double b = prof.height(rho), bp = prof.slope(rho), bpp = prof.curvature(rho);
    EmbedJet j;
    auto v3 = [](double a, double b2, double c2) {
      Vec v(3);
      v << a, b2, c2;
      return v;
    };
    j.x = v3(rho * c, rho * sn, b + t);
    j.du[0] = v3(c, sn, bp);
    j.du[1] = v3(-rho * sn, rho * c, 0.0);
    j.d2[0][0] = v3(0, 0, bpp);
    j.d2[0][1] = j.d2[1][0] = v3(-sn, c, 0.0);
    j.d2[1][1] = v3(-rho * c, -rho * sn, 0.0);
    return j;
  };
  s.normal_ref = [](double, double, double) {
    Vec v(3);
    v << 0, 0, 1;
    return v;
  };
  return s;
}

// Latitude sphere psi = psi(t) inside the shrinking round S^3; MCF gives the
// closed form cos psi(t) = cos(psi0) / sqrt(1 - 4t).
inline Immersion latitude_sphere_surface(double psi0) {
  Immersion s;
  s.ranges = {{{1e-3, kPi - 1e-3}, {0.0, 2.0 * kPi}}};
  s.periodic = {false, true};
  auto psi_of_t = [psi0](double t) {
    double sigma = 1.0 - 4.0 * t;
    require(sigma > 0, "ambient sphere past its singular time");
    double c = std::cos(psi0) / std::sqrt(sigma);
    require(std::abs(c) < 1.0, "latitude sphere reached the pole");
    return std::acos(c);
  };
  s.embed = [=](double th, double ph, double t) {
    Vec x(3);
    x << psi_of_t(t), th, ph;
    return x;
  };
  s.normal_ref = [psi0](double, double, double) {
    Vec v(3);
    v << (psi0 < kPi / 2 ? -1.0 : 1.0), 0, 0;  // toward the nearer pole
    return v;
  };
  return s;
}

// Graph z = u0(x, y) over the flat 2-torus.
inline Immersion torus_graph_surface(double amp, int mode) {
  Immersion s;
  s.ranges = {{{0.0, 2.0 * kPi}, {0.0, 2.0 * kPi}}};
  s.periodic = {true, true};
  s.embed = [amp, mode](double u, double v, double) {
    Vec x(3);
    x << u, v, amp * std::sin(mode * u) * std::cos(v);
    return x;
  };
  s.normal_ref = [](double, double, double) {
    Vec v(3);
    v << 0, 0, 1;
    return v;
  };
  return s;
}

// The torus slice r = rho0 inside a warped product, reference toward +r or -r.
inline Immersion boundary_slice_surface(double rho0, double inward_sign) {
  Immersion s;
  s.ranges = {{{0.0, 2.0 * kPi}, {0.0, 2.0 * kPi}}};
  s.periodic = {true, true};
  s.embed = [rho0](double x, double y, double) {
    Vec p(3);
    p << rho0, x, y;
    return p;
  };
  s.normal_ref = [inward_sign](double, double, double) {
    Vec v(3);
    v << inward_sign, 0, 0;
    return v;
  };
  return s;
}

// --- presets -------------------------------------------------------------------

inline std::vector<ScenarioSpec> scenario_catalog() {
  std::vector<ScenarioSpec> out;
  {
    ScenarioSpec s;
    s.name = "shrinking-sphere";
    s.ambient_kind = "flat-euclidean";
    s.surface_kind = "round-sphere";
    s.params = {{"n", 3}, {"r0", 1.0}, {"t_b", 0.05}};
    out.push_back(s);
  }
  {
    ScenarioSpec s;
    s.name = "huisken-shrinker";
    s.ambient_kind = "flat-euclidean";
    s.potential_kind = "gaussian-shrinker";
    s.surface_kind = "round-sphere";
    s.params = {{"n", 3}, {"tau0", 1.0}, {"t_b", 0.5}};
    out.push_back(s);
  }
  {
    ScenarioSpec s;
    s.name = "perturbed-sphere";
    s.ambient_kind = "flat-euclidean";
    s.potential_kind = "gaussian-shrinker";
    s.surface_kind = "perturbed-sphere";
    s.params = {{"n", 3}, {"tau0", 1.0}, {"eps", 1e-2}, {"mode", 2}, {"t_b", 0.2}};
    out.push_back(s);
  }
  {
    ScenarioSpec s;
    s.name = "bowl-translator";
    s.ambient_kind = "flat-euclidean";
    s.potential_kind = "linear-translator";
    s.surface_kind = "bowl-translator";
    s.params = {{"n", 3}, {"slope", -1.0}, {"axis", 2}, {"rho_max", 4.0}, {"t_b", 0.5}};
    out.push_back(s);
  }
  {
    ScenarioSpec s;
    s.name = "latitude-sphere";
    s.ambient_kind = "shrinking-round-sphere";
    s.surface_kind = "latitude-sphere";
    s.params = {{"n", 3}, {"psi0", 1.1}, {"t_b", 0.05}};
    out.push_back(s);
  }
  {
    ScenarioSpec s;
    s.name = "torus-graph";
    s.ambient_kind = "flat-torus-cross-interval";
    s.dilaton_kind = "linear-periodic";
    s.surface_kind = "torus-graph";
    s.params = {{"n", 3}, {"w_amp", 0.5}, {"amp", 0.2}, {"mode", 1}, {"t_b", 0.1}};
    out.push_back(s);
  }
  {
    ScenarioSpec s;
    s.name = "warped-interval-torus";
    s.ambient_kind = "warped-interval-torus";
    s.dilaton_kind = "profile-on-interval";
    s.surface_kind = "boundary-slice";
    s.params = {{"n", 3},     {"phi_c0", 2.0},   {"phi_c1", 0.25}, {"phi_c2", 0.15},
                {"w_amp", 0.4}, {"rho_minus", kPi / 2}, {"rho_plus", 3 * kPi / 2},
                {"t_b", 0.05}};
    out.push_back(s);
  }
  return out;
}

inline Scenario build_scenario(const ScenarioSpec& spec) {
  Scenario sc;
  sc.spec = spec;
  int n = int(spec.get("n", 3));
  require(n >= 3, "scenario dimension must be >= 3");
  sc.t_a = spec.get("t_a", 0.0);
  sc.t_b = spec.get("t_b", 0.05);

  // ambient
  if (spec.ambient_kind == "flat-euclidean") {
    sc.ambient = flat_euclidean_ambient(n);
  } else if (spec.ambient_kind == "shrinking-round-sphere") {
    sc.ambient = shrinking_round_sphere_ambient(n);
    require(sc.t_b < 1.0 / (2.0 * (n - 1)), "time window crosses the singular time");
  } else if (spec.ambient_kind == "warped-interval-torus") {
    require(n == 3, "warped scenario is three-dimensional");
    sc.ambient = warped_interval_torus_ambient(spec.get("phi_c0", 2.0), spec.get("phi_c1", 0.25),
                                               spec.get("phi_c2", 0.15), spec.get("w_amp", 0.4));
  } else if (spec.ambient_kind == "flat-torus-cross-interval") {
    require(n == 3, "flat-cross scenario is three-dimensional");
    sc.ambient = flat_cross_dilaton_ambient(spec.get("w_amp", 0.5));
  } else {
    throw Error("unknown ambient kind: " + spec.ambient_kind);
  }

  // potential
  if (spec.potential_kind == "zero") {
    sc.ambient.f = ScalarField::constant(0.0);
    sc.ambient.has_f = false;
  } else if (spec.potential_kind == "gaussian-shrinker") {
    require(spec.ambient_kind == "flat-euclidean", "gaussian potential needs a flat ambient");
    sc.ambient.f = gaussian_shrinker_potential(spec.get("tau0", 1.0));
    sc.ambient.has_f = true;
  } else if (spec.potential_kind == "linear-translator") {
    require(spec.ambient_kind == "flat-euclidean", "linear potential needs a flat ambient");
    sc.ambient.f = linear_translator_potential(spec.get("slope", -1.0), int(spec.get("axis", 2)));
    sc.ambient.has_f = true;
  } else {
    throw Error("unknown potential kind: " + spec.potential_kind);
  }

  // surface
  int n_u0 = int(spec.get("grid_u0", 24)), n_u1 = int(spec.get("grid_u1", 48));
  if (spec.surface_kind == "round-sphere" || spec.surface_kind == "perturbed-sphere") {
    require(spec.ambient_kind == "flat-euclidean", "sphere surface needs a flat ambient");
    double r0 = spec.get("r0", spec.potential_kind == "gaussian-shrinker"
                                   ? std::sqrt(2.0 * (n - 1) * spec.get("tau0", 1.0))
                                   : 1.0);
    double eps = spec.surface_kind == "perturbed-sphere" ? spec.get("eps", 1e-2) : 0.0;
    double shrink = spec.get("static_surface", 0.0) > 0 ? 0.0 : 2.0 * (n - 1);
    sc.surface = sphere_surface(r0, shrink, eps, int(spec.get("mode", 2)));
    sc.grid = {AxisRule::gauss_polar(n_u0), AxisRule::periodic_uniform(0, 2 * kPi, n_u1)};
    sc.has_surface = true;
  } else if (spec.surface_kind == "bowl-translator") {
    require(spec.potential_kind != "gaussian-shrinker", "bowl pairs with the linear potential");
    sc.surface = bowl_surface(spec.get("rho_max", 4.0));
    sc.grid = {AxisRule::gauss(0.0, spec.get("rho_max", 4.0), std::max(n_u0, 32)),
               AxisRule::periodic_uniform(0, 2 * kPi, n_u1)};
    sc.has_surface = true;
  } else if (spec.surface_kind == "latitude-sphere") {
    require(spec.ambient_kind == "shrinking-round-sphere", "latitude sphere lives in S^3");
    sc.surface = latitude_sphere_surface(spec.get("psi0", 1.1));
    sc.grid = {AxisRule::gauss_polar(n_u0), AxisRule::periodic_uniform(0, 2 * kPi, n_u1)};
    sc.has_surface = true;
  } else if (spec.surface_kind == "torus-graph") {
    require(spec.ambient_kind == "flat-torus-cross-interval", "graph lives over the flat torus");
    sc.surface = torus_graph_surface(spec.get("amp", 0.2), int(spec.get("mode", 1)));
    sc.grid = {AxisRule::periodic_uniform(0, 2 * kPi, std::max(n_u0, 32)),
               AxisRule::periodic_uniform(0, 2 * kPi, std::max(n_u1, 32))};
    sc.has_surface = true;
  } else if (spec.surface_kind == "boundary-slice") {
    require(spec.ambient_kind == "warped-interval-torus", "slice lives in the warped product");
    sc.surface = boundary_slice_surface(spec.get("rho_minus", kPi / 2), +1.0);
    sc.grid = {AxisRule::periodic_uniform(0, 2 * kPi, n_u0),
               AxisRule::periodic_uniform(0, 2 * kPi, n_u1)};
    sc.has_surface = true;
  } else if (spec.surface_kind == "none") {
    sc.has_surface = false;
  } else {
    throw Error("unknown surface kind: " + spec.surface_kind);
  }

  // soliton structure
  if (spec.potential_kind == "gaussian-shrinker" && spec.surface_kind != "perturbed-sphere") {
    sc.soliton = {true, "shrinking", -1.0, true};
  } else if (spec.potential_kind == "linear-translator" &&
             spec.surface_kind == "bowl-translator") {
    sc.soliton = {true, "steady", 0.0, true};
  }
  return sc;
}

inline ScenarioSpec find_scenario_spec(const std::string& name) {
  for (const ScenarioSpec& s : scenario_catalog())
    if (s.name == name) return s;
  throw Error("unknown scenario: " + name);
}

inline Scenario build_named(const std::string& name) {
  return build_scenario(find_scenario_spec(name));
}

// deterministic smooth perturbation: bumps the surface amplitude parameters
inline ScenarioSpec perturb_scenario(const ScenarioSpec& spec, double eps, int mode) {
  ScenarioSpec out = spec;
  if (spec.surface_kind == "round-sphere" || spec.surface_kind == "perturbed-sphere") {
    out.surface_kind = "perturbed-sphere";
    out.params["eps"] = eps;
    out.params["mode"] = double(mode);
  } else if (spec.surface_kind == "torus-graph") {
    out.params["amp"] = spec.get("amp", 0.2) + eps;
    out.params["mode"] = double(mode);
  } else if (spec.ambient_kind == "warped-interval-torus") {
    out.params["phi_c2"] = spec.get("phi_c2", 0.15) + eps;
  } else {
    throw Error("scenario has no perturbable handle: " + spec.name);
  }
  return out;
}

}  // namespace flowlab
