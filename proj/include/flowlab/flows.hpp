#pragma once

#include "flowlab/scenarios.hpp"

namespace flowlab {

// --- pointwise right-hand sides ----------------------------------------------

struct AmbientRhs {
  Mat dg;
  double dw = 0;
  double df = 0;
};

// extended Ricci flow: dg = -2 Ric + 2 alpha dw (x) dw, dw/dt = Lap w
inline AmbientRhs extended_ricci_rhs(const AmbientFamily& amb, const Vec& p, double t) {
  CurvaturePackage pkg = curvature_package(amb.g, amb.chart, p, t);
  DiffOps dw = differential_ops(amb.w, amb.g, amb.chart, p, t);
  AmbientRhs r;
  r.dg = -2.0 * pkg.ric;
  if (dw.df.cwiseAbs().maxCoeff() > 0)  // w constant -> exactly the Ricci flow RHS
    r.dg += 2.0 * amb.alpha() * dw.df * dw.df.transpose();
  r.dw = dw.lap;
  return r;
}

// Perelman's modified extended Ricci flow (gradient gauge)
inline AmbientRhs perelman_modified_rhs(const AmbientFamily& amb, const Vec& p, double t) {
  require(amb.has_f, "modified flow needs a potential");
  CurvaturePackage pkg = curvature_package(amb.g, amb.chart, p, t);
  DiffOps dw = differential_ops(amb.w, amb.g, amb.chart, p, t);
  DiffOps df = differential_ops(amb.f, amb.g, amb.chart, p, t);
  AmbientRhs r;
  r.dg = -2.0 * (pkg.ric + df.hess);
  if (dw.df.cwiseAbs().maxCoeff() > 0) r.dg += 2.0 * amb.alpha() * dw.df * dw.df.transpose();
  r.dw = dw.lap - df.grad.dot(dw.df);
  r.df = -df.lap - pkg.scalar + amb.alpha() * dw.grad_sq;
  return r;
}

// mean curvature flow velocity H e0 at a parameter point
inline Vec mcf_velocity(const Immersion& imm, const AmbientFamily& amb, double u0, double u1,
                        double t) {
  InducedPackage pkg = induced_package(imm, amb.g, amb.chart, u0, u1, t);
  return pkg.H * pkg.e0;
}

// --- 1d grids and spectral series ---------------------------------------------

// Uniform 1D grid with 4th-order differencing. Two layouts:
//   Periodic      : nodes i h, i = 0..N-1, wraparound
//   EvenStaggered : nodes (i+1/2) h on [lo,hi], even reflection at both ends
struct Grid1D {
  int N = 0;
  double lo = 0, hi = 0;
  bool periodic = true;

  double h() const { return (hi - lo) / N; }
  double node(int i) const { return periodic ? lo + i * h() : lo + (i + 0.5) * h(); }

  double at(const Vec& f, int i) const {
    if (periodic) return f[((i % N) + N) % N];
    if (i < 0) i = -1 - i;         // mirror about lo
    if (i >= N) i = 2 * N - 1 - i; // mirror about hi
    return f[i];
  }

  Vec d1(const Vec& f) const {
    Vec out(N);
    double s = 1.0 / (12.0 * h());
    for (int i = 0; i < N; ++i)
      out[i] = s * (at(f, i - 2) - 8 * at(f, i - 1) + 8 * at(f, i + 1) - at(f, i + 2));
    return out;
  }
  Vec d2(const Vec& f) const {
    Vec out(N);
    double s = 1.0 / (12.0 * sq(h()));
    for (int i = 0; i < N; ++i)
      out[i] = s * (-at(f, i - 2) + 16 * at(f, i - 1) - 30 * f[i] + 16 * at(f, i + 1) -
                    at(f, i + 2));
    return out;
  }
};

// cosine series fitted to even-staggered samples on [0, L] (DCT-II)
inline Vec cosine_coeffs(const Vec& samples, double L) {
  const int N = int(samples.size());
  Vec c = Vec::Zero(N);
  for (int k = 0; k < N; ++k) {
    double s = 0;
    for (int i = 0; i < N; ++i) s += samples[i] * std::cos(k * kPi * (i + 0.5) / N);
    c[k] = (k == 0 ? 1.0 : 2.0) * s / N;
  }
  return c;
}

inline double cosine_eval(const Vec& c, double L, double x, int deriv = 0) {
  double acc = 0;
  for (int k = 0; k < int(c.size()); ++k) {
    double m = k * kPi / L;
    double ph = m * x + deriv * kPi / 2.0;  // each derivative shifts the phase
    acc += c[k] * std::pow(m, deriv) * std::cos(ph);
  }
  return acc;
}

// full trigonometric series on a periodic grid (naive real DFT)
struct TrigCoeffs {
  Vec a, b;  // cos / sin coefficients, k = 0..N/2
  double L = 2 * kPi;
};

inline TrigCoeffs trig_coeffs(const Vec& samples, double L) {
  const int N = int(samples.size());
  const int K = N / 2;
  TrigCoeffs tc;
  tc.L = L;
  tc.a = Vec::Zero(K + 1);
  tc.b = Vec::Zero(K + 1);
  for (int k = 0; k <= K; ++k) {
    double ca = 0, cb = 0;
    for (int i = 0; i < N; ++i) {
      double th = 2.0 * kPi * k * i / N;
      ca += samples[i] * std::cos(th);
      cb += samples[i] * std::sin(th);
    }
    double norm = (k == 0 || 2 * k == N) ? 1.0 : 2.0;
    tc.a[k] = norm * ca / N;
    tc.b[k] = norm * cb / N;
  }
  return tc;
}

inline double trig_eval(const TrigCoeffs& tc, double x, int deriv = 0) {
  double acc = 0;
  for (int k = 0; k < int(tc.a.size()); ++k) {
    double m = 2.0 * kPi * k / tc.L;
    double ph = m * x;
    double amp = std::pow(m, deriv);
    // d/dx [a cos + b sin] rotates the pair
    double ca = tc.a[k], cb = tc.b[k];
    switch (deriv % 4) {
      case 0: acc += amp * (ca * std::cos(ph) + cb * std::sin(ph)); break;
      case 1: acc += amp * (-ca * std::sin(ph) + cb * std::cos(ph)); break;
      case 2: acc += amp * (-ca * std::cos(ph) - cb * std::sin(ph)); break;
      default: acc += amp * (ca * std::sin(ph) - cb * std::cos(ph)); break;
    }
  }
  return acc;
}

// --- time interpolation ---------------------------------------------------------

// Catmull-Rom cubic over uniformly spaced snapshots (clamped at the ends).
struct TimeInterp {
  static void weights(const std::vector<double>& times, double t, int idx[4], double w[4]) {
    const int n = int(times.size());
    require(n >= 2, "trajectory too short for interpolation");
    double dt = times[1] - times[0];
    double s = (t - times[0]) / dt;
    int i = std::clamp(int(std::floor(s)), 0, n - 2);
    double u = s - i;
    idx[0] = std::max(i - 1, 0);
    idx[1] = i;
    idx[2] = i + 1;
    idx[3] = std::min(i + 2, n - 1);
    // Catmull-Rom basis (falls back to the clamped stencil at the ends)
    w[0] = 0.5 * (-u + 2 * u * u - u * u * u);
    w[1] = 0.5 * (2 - 5 * u * u + 3 * u * u * u);
    w[2] = 0.5 * (u + 4 * u * u - 3 * u * u * u);
    w[3] = 0.5 * (-u * u + u * u * u);
  }

  static Vec eval(const std::vector<double>& times, const std::vector<Vec>& snaps, double t) {
    int idx[4];
    double w[4];
    weights(times, t, idx, w);
    return w[0] * snaps[idx[0]] + w[1] * snaps[idx[1]] + w[2] * snaps[idx[2]] +
           w[3] * snaps[idx[3]];
  }
};

// --- generic RK4 over vector-of-profiles states ----------------------------------

using ProfileState = std::vector<Vec>;

inline ProfileState axpy(const ProfileState& y, double a, const ProfileState& d) {
  ProfileState out = y;
  for (size_t k = 0; k < y.size(); ++k) out[k] += a * d[k];
  return out;
}

template <typename Rhs>
ProfileState rk4_step(const ProfileState& y, double t, double dt, const Rhs& rhs) {
  ProfileState k1 = rhs(y, t);
  ProfileState k2 = rhs(axpy(y, dt / 2, k1), t + dt / 2);
  ProfileState k3 = rhs(axpy(y, dt / 2, k2), t + dt / 2);
  ProfileState k4 = rhs(axpy(y, dt, k3), t + dt);
  ProfileState out = y;
  for (size_t k = 0; k < y.size(); ++k)
    out[k] += dt / 6.0 * (k1[k] + 2 * k2[k] + 2 * k3[k] + k4[k]);
  return out;
}

inline bool state_blown_up(const ProfileState& y, double threshold = 1e8) {
  for (const Vec& v : y)
    if (!v.allFinite() || v.cwiseAbs().maxCoeff() > threshold) return true;
  return false;
}

// --- fast induced package for flat R^3 (solver inner loop) ----------------------

inline InducedPackage induced_package_flat3(const EmbedJet& jet, const Vec& ref) {
  InducedPackage s;
  s.x = jet.x;
  s.T = Mat::Zero(3, 2);
  s.T.col(0) = jet.du[0];
  s.T.col(1) = jet.du[1];
  s.g2 = s.T.transpose() * s.T;
  require(s.g2.determinant() > 0, "degenerate induced metric");
  s.g2_inv = invert_metric(s.g2);
  s.area_weight = std::sqrt(s.g2.determinant());
  Vec n3(3);
  n3 << jet.du[0][1] * jet.du[1][2] - jet.du[0][2] * jet.du[1][1],
      jet.du[0][2] * jet.du[1][0] - jet.du[0][0] * jet.du[1][2],
      jet.du[0][0] * jet.du[1][1] - jet.du[0][1] * jet.du[1][0];
  n3.normalize();
  if (n3.dot(ref) < 0) n3 = -n3;
  s.e0 = n3;
  s.e0_low = n3;
  s.A = Mat::Zero(2, 2);
  for (int i = 0; i < 2; ++i)
    for (int j = i; j < 2; ++j) s.A(i, j) = s.A(j, i) = jet.d2[i][j].dot(n3);
  s.H = (s.g2_inv * s.A).trace();
  return s;
}

// --- mean curvature flow of a radial profile rho(theta, t) -----------------------

// Axisymmetric surface r = rho(theta) about the origin in flat R^3, inward
// normal; covers spheres and zonal perturbations. Even-staggered grid on
// [0, pi] (pole regularity by reflection).
struct SphereMcfTrajectory {
  Grid1D grid;
  std::vector<double> times;
  std::vector<Vec> rho;        // profile snapshots
  Mat rho_coeffs;              // cosine coefficients per snapshot (row = snapshot)
  bool blown_up = false;

  void finalize() {
    rho_coeffs = Mat::Zero(int(rho.size()), grid.N);
    for (size_t s = 0; s < rho.size(); ++s)
      rho_coeffs.row(int(s)) = cosine_coeffs(rho[s], kPi).transpose();
  }

  // rho and theta-derivatives at arbitrary (theta, t) from the stored series
  double profile(double theta, double t, int deriv = 0) const {
    int idx[4];
    double w[4];
    TimeInterp::weights(times, t, idx, w);
    Vec c = w[0] * rho_coeffs.row(idx[0]) + w[1] * rho_coeffs.row(idx[1]) +
            w[2] * rho_coeffs.row(idx[2]) + w[3] * rho_coeffs.row(idx[3]);
    return cosine_eval(c, kPi, theta, deriv);
  }

  // time-dependent immersion backed by the stored trajectory
  Immersion surface_family() const {
    const SphereMcfTrajectory* self = this;
    Immersion s;
    s.ranges = {{{0.0, kPi}, {0.0, 2.0 * kPi}}};
    s.periodic = {false, true};
    s.embed = [self](double th, double ph, double t) {
      double r = self->profile(th, t);
      Vec x(3);
      x << r * std::sin(th) * std::cos(ph), r * std::sin(th) * std::sin(ph), r * std::cos(th);
      return x;
    };
    s.exact_jet = [self](double th, double ph, double t) {
      double r = self->profile(th, t), r1 = self->profile(th, t, 1), r2 = self->profile(th, t, 2);
      return radial_jet(th, ph, r, r1, r2);
    };
    s.normal_ref = [](double th, double ph, double) {
      Vec v(3);
      v << -std::sin(th) * std::cos(ph), -std::sin(th) * std::sin(ph), -std::cos(th);
      return v;
    };
    return s;
  }

  // embedding jet of r = rho(theta) at phi, given rho and two derivatives
  static EmbedJet radial_jet(double th, double ph, double r, double r1, double r2) {
    double st = std::sin(th), ct = std::cos(th), sp = std::sin(ph), cp = std::cos(ph);
    Vec u(3), ut(3), up(3), utt(3), utp(3), upp(3);
    u << st * cp, st * sp, ct;
    ut << ct * cp, ct * sp, -st;
    up << -st * sp, st * cp, 0;
    utt = -u;
    utp << -ct * sp, ct * cp, 0;
    upp << -st * cp, -st * sp, 0;
    EmbedJet j;
    j.x = r * u;
    j.du[0] = r1 * u + r * ut;
    j.du[1] = r * up;
    j.d2[0][0] = r2 * u + 2 * r1 * ut + r * utt;
    j.d2[0][1] = j.d2[1][0] = r1 * up + r * utp;
    j.d2[1][1] = r * upp;
    return j;
  }
};

inline SphereMcfTrajectory run_sphere_mcf(std::function<double(double)> rho0, double t_a,
                                          double t_b, double dt, int N, int store_stride = 1) {
  SphereMcfTrajectory traj;
  traj.grid = {N, 0.0, kPi, false};
  Vec rho(N);
  for (int i = 0; i < N; ++i) rho[i] = rho0(traj.grid.node(i));

  auto rhs = [&traj](const ProfileState& y, double) -> ProfileState {
    const Vec& r = y[0];
    Vec r1 = traj.grid.d1(r), r2 = traj.grid.d2(r);
    Vec out(traj.grid.N);
    for (int i = 0; i < traj.grid.N; ++i) {
      double th = traj.grid.node(i);
      EmbedJet jet = SphereMcfTrajectory::radial_jet(th, 0.0, r[i], r1[i], r2[i]);
      Vec u(3);
      u << std::sin(th), 0.0, std::cos(th);
      InducedPackage pkg = induced_package_flat3(jet, Vec(-u));
      // fixed-parameter motion d rho/dt u must have normal part H e0
      out[i] = pkg.H / u.dot(pkg.e0);
    }
    return {out};
  };

  ProfileState y = {rho};
  double t = t_a;
  int step = 0;
  traj.times.push_back(t);
  traj.rho.push_back(rho);
  int n_steps = int(std::llround((t_b - t_a) / dt));
  for (step = 0; step < n_steps; ++step) {
    try {
      y = rk4_step(y, t, dt, rhs);
    } catch (const Error&) {
      traj.blown_up = true;
      break;
    }
    t = t_a + (step + 1) * dt;
    if (state_blown_up(y) || y[0].minCoeff() <= 0) {  // radial graph needs rho > 0
      traj.blown_up = true;
      break;
    }
    if ((step + 1) % store_stride == 0 || step + 1 == n_steps) {
      traj.times.push_back(t);
      traj.rho.push_back(y[0]);
    }
  }
  traj.finalize();
  return traj;
}

// --- mean curvature flow of a graph over the flat 2-torus ------------------------

// z = u(x, y, t) in an ambient q(x) dx^2 + dy^2 + dz^2 (analytic metric).
struct GraphMcfTrajectory {
  int N = 0, M = 0;  // grid in x, y
  std::vector<double> times;
  std::vector<Mat> u;  // snapshots, u(i, j) at (x_i, y_j)
  bool blown_up = false;

  double hx() const { return 2.0 * kPi / N; }
  double hy() const { return 2.0 * kPi / M; }

  // bicubic-in-time, trigonometric-in-space interpolation of u and derivatives
  double height(double x, double y, double t, int dx = 0, int dy = 0) const {
    int idx[4];
    double w[4];
    TimeInterp::weights(times, t, idx, w);
    double acc = 0;
    for (int s = 0; s < 4; ++s) acc += w[s] * trig_eval2(u[idx[s]], x, y, dx, dy);
    return acc;
  }

  double trig_eval2(const Mat& grid, double x, double y, int dx, int dy) const {
    // interpolate rows in x first, then the column samples in y
    Vec col(M);
    for (int j = 0; j < M; ++j) {
      Vec row(N);
      for (int i = 0; i < N; ++i) row[i] = grid(i, j);
      col[j] = trig_eval(trig_coeffs(row, 2 * kPi), x, dx);
    }
    return trig_eval(trig_coeffs(col, 2 * kPi), y, dy);
  }

  Immersion surface_family() const {
    const GraphMcfTrajectory* self = this;
    Immersion s;
    s.ranges = {{{0.0, 2.0 * kPi}, {0.0, 2.0 * kPi}}};
    s.periodic = {true, true};
    s.embed = [self](double x, double y, double t) {
      Vec p(3);
      p << x, y, self->height(x, y, t);
      return p;
    };
    s.exact_jet = [self](double x, double y, double t) {
      EmbedJet j;
      auto v3 = [](double a, double b, double c) {
        Vec v(3);
        v << a, b, c;
        return v;
      };
      j.x = v3(x, y, self->height(x, y, t));
      j.du[0] = v3(1, 0, self->height(x, y, t, 1, 0));
      j.du[1] = v3(0, 1, self->height(x, y, t, 0, 1));
      j.d2[0][0] = v3(0, 0, self->height(x, y, t, 2, 0));
      j.d2[0][1] = j.d2[1][0] = v3(0, 0, self->height(x, y, t, 1, 1));
      j.d2[1][1] = v3(0, 0, self->height(x, y, t, 0, 2));
      return j;
    };
    s.normal_ref = [](double, double, double) {
      Vec v(3);
      v << 0, 0, 1;
      return v;
    };
    return s;
  }
};

inline GraphMcfTrajectory run_graph_mcf(const AmbientFamily& amb,
                                        std::function<double(double, double)> u0, double t_a,
                                        double t_b, double dt, int N, int M,
                                        int store_stride = 1) {
  GraphMcfTrajectory traj;
  traj.N = N;
  traj.M = M;
  Grid1D gx{N, 0.0, 2.0 * kPi, true}, gy{M, 0.0, 2.0 * kPi, true};
  Mat u(N, M);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < M; ++j) u(i, j) = u0(gx.node(i), gy.node(j));

  FdPolicy amb_pol = amb.chart.fd_policy();
  auto rhs = [&](const ProfileState& y, double t) -> ProfileState {
    Eigen::Map<const Mat> um(y[0].data(), N, M);
    Mat U = um;
    // 4th-order periodic differences in both directions
    auto D = [&](const Mat& f, int axis, int order) {
      Mat out(N, M);
      Grid1D& g = axis == 0 ? gx : gy;
      for (int i = 0; i < N; ++i)
        for (int j = 0; j < M; ++j) {
          auto a = [&](int k) { return axis == 0 ? f(((k % N) + N) % N, j) : f(i, ((k % M) + M) % M); };
          int c = axis == 0 ? i : j;
          if (order == 1)
            out(i, j) = (a(c - 2) - 8 * a(c - 1) + 8 * a(c + 1) - a(c + 2)) / (12 * g.h());
          else
            out(i, j) = (-a(c - 2) + 16 * a(c - 1) - 30 * a(c) + 16 * a(c + 1) - a(c + 2)) /
                        (12 * sq(g.h()));
        }
      return out;
    };
    Mat ux = D(U, 0, 1), uy = D(U, 1, 1), uxx = D(U, 0, 2), uyy = D(U, 1, 2);
    Mat uxy = D(ux, 1, 1);

    Vec out(N * M);
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < M; ++j) {
        EmbedJet jet;
        auto v3 = [](double a, double b, double c) {
          Vec v(3);
          v << a, b, c;
          return v;
        };
        jet.x = v3(gx.node(i), gy.node(j), U(i, j));
        jet.du[0] = v3(1, 0, ux(i, j));
        jet.du[1] = v3(0, 1, uy(i, j));
        jet.d2[0][0] = v3(0, 0, uxx(i, j));
        jet.d2[0][1] = jet.d2[1][0] = v3(0, 0, uxy(i, j));
        jet.d2[1][1] = v3(0, 0, uyy(i, j));
        MetricJet gj = metric_jet(amb.g, amb.chart, jet.x, t, amb_pol);
        Mat ginv = invert_metric(gj.g);
        Vec ref = v3(0, 0, 1);
        InducedPackage pkg =
            induced_package_from_jet(jet, gj.g, christoffel_from_jet(gj, ginv), ref);
        // vertical motion: du/dt g(e_z, e0) = H
        out[i + j * N] = pkg.H / pkg.e0_low[2];  // column-major, matching the Map
      }
    return {out};
  };

  ProfileState y = {Vec(Eigen::Map<const Vec>(u.data(), N * M))};
  double t = t_a;
  traj.times.push_back(t);
  traj.u.push_back(u);
  int n_steps = int(std::llround((t_b - t_a) / dt));
  for (int step = 0; step < n_steps; ++step) {
    try {
      y = rk4_step(y, t, dt, rhs);
    } catch (const Error&) {
      traj.blown_up = true;
      break;
    }
    t = t_a + (step + 1) * dt;
    if (state_blown_up(y)) {
      traj.blown_up = true;
      break;
    }
    if ((step + 1) % store_stride == 0 || step + 1 == n_steps)
      traj.times.push_back(t), traj.u.push_back(Mat(Eigen::Map<const Mat>(y[0].data(), N, M)));
  }
  return traj;
}

// --- extended Ricci flow of a warped profile --------------------------------------

// g = a(r,t) dr^2 + b(r,t) (dx^2 + dy^2), w = w(r,t), everything 2pi-periodic.
struct WarpedRfTrajectory {
  Grid1D grid;
  std::vector<double> times;
  std::vector<std::array<Vec, 3>> snaps;  // a, b, w
  std::vector<std::array<TrigCoeffs, 3>> coeffs;
  bool blown_up = false;

  void finalize() {
    coeffs.clear();
    for (const auto& s : snaps)
      coeffs.push_back({trig_coeffs(s[0], 2 * kPi), trig_coeffs(s[1], 2 * kPi),
                        trig_coeffs(s[2], 2 * kPi)});
  }

  double field(int k, double r, double t, int deriv = 0) const {
    int idx[4];
    double w[4];
    TimeInterp::weights(times, t, idx, w);
    double acc = 0;
    for (int s = 0; s < 4; ++s) acc += w[s] * trig_eval(coeffs[idx[s]][k], r, deriv);
    return acc;
  }

  // ambient family backed by the trajectory (spectral spatial derivatives)
  AmbientFamily ambient_family() const {
    const WarpedRfTrajectory* self = this;
    AmbientFamily amb;
    amb.n = 3;
    amb.chart = Chart::free_space(3);
    amb.chart.ranges = {{0.0, 2.0 * kPi}, {0.0, 2.0 * kPi}, {0.0, 2.0 * kPi}};
    amb.chart.periodic = {true, true, true};
    amb.g.eval = [self](const Vec& p, double t) {
      Mat m = Mat::Zero(3, 3);
      m(0, 0) = self->field(0, p[0], t);
      m(1, 1) = m(2, 2) = self->field(1, p[0], t);
      return m;
    };
    amb.g.exact_deriv = [self](const Vec& p, double t, const MultiIndex& mi) {
      Mat m = Mat::Zero(3, 3);
      if (total_order(mi) != mi[0]) return m;  // only r-derivatives survive
      m(0, 0) = self->field(0, p[0], t, mi[0]);
      m(1, 1) = m(2, 2) = self->field(1, p[0], t, mi[0]);
      return m;
    };
    amb.w.eval = [self](const Vec& p, double t) { return self->field(2, p[0], t); };
    amb.w.exact_deriv = [self](const Vec& p, double t, const MultiIndex& mi) {
      if (total_order(mi) != mi[0]) return 0.0;
      return self->field(2, p[0], t, mi[0]);
    };
    return amb;
  }
};

inline WarpedRfTrajectory run_warped_ricci_flow(const AmbientFamily& init, double t_a, double t_b,
                                                int N, double cfl = 0.2, int store_stride = 1) {
  WarpedRfTrajectory traj;
  traj.grid = {N, 0.0, 2.0 * kPi, true};
  double alpha = init.alpha();
  Vec a(N), b(N), w(N);
  for (int i = 0; i < N; ++i) {
    Vec p(3);
    p << traj.grid.node(i), 0.0, 0.0;
    Mat g0 = init.g.eval(p, t_a);
    a[i] = g0(0, 0);
    b[i] = g0(1, 1);
    w[i] = init.w.eval(p, t_a);
  }

  auto rhs = [&traj, alpha](const ProfileState& y, double) -> ProfileState {
    const Vec &A = y[0], &B = y[1], &W = y[2];
    Vec A1 = traj.grid.d1(A), A2 = traj.grid.d2(A);
    Vec B1 = traj.grid.d1(B), B2 = traj.grid.d2(B);
    Vec W1 = traj.grid.d1(W), W2 = traj.grid.d2(W);
    int N = traj.grid.N;
    Vec da(N), db(N), dw(N);
    for (int i = 0; i < N; ++i) {
      MetricJet j;
      j.g = Mat::Zero(3, 3);
      j.g.diagonal() << A[i], B[i], B[i];
      j.d1.assign(3, Mat::Zero(3, 3));
      j.d1[0].diagonal() << A1[i], B1[i], B1[i];
      j.d2.assign(3, std::vector<Mat>(3, Mat::Zero(3, 3)));
      j.d2[0][0].diagonal() << A2[i], B2[i], B2[i];
      CurvaturePackage pkg = curvature_from_jet(j);
      ScalarJet wj;
      wj.v = W[i];
      wj.d1 = Vec::Zero(3);
      wj.d1[0] = W1[i];
      wj.d2 = Mat::Zero(3, 3);
      wj.d2(0, 0) = W2[i];
      DiffOps dops = diff_ops_from_jets(wj, pkg.g_inv, pkg.gamma);
      da[i] = -2.0 * pkg.ric(0, 0) + 2.0 * alpha * W1[i] * W1[i];
      db[i] = -2.0 * pkg.ric(1, 1);
      dw[i] = dops.lap;
    }
    return {da, db, dw};
  };

  double dt = cfl * sq(traj.grid.h()) * std::min(1.0, a.minCoeff());
  int n_steps = std::max(1, int(std::ceil((t_b - t_a) / dt)));
  dt = (t_b - t_a) / n_steps;

  ProfileState y = {a, b, w};
  double t = t_a;
  traj.times.push_back(t);
  traj.snaps.push_back({a, b, w});
  for (int step = 0; step < n_steps; ++step) {
    try {
      y = rk4_step(y, t, dt, rhs);
    } catch (const Error&) {
      traj.blown_up = true;
      break;
    }
    t = t_a + (step + 1) * dt;
    if (state_blown_up(y)) {
      traj.blown_up = true;
      break;
    }
    if ((step + 1) % store_stride == 0 || step + 1 == n_steps) {
      traj.times.push_back(t);
      traj.snaps.push_back({y[0], y[1], y[2]});
    }
  }
  traj.finalize();
  return traj;
}

// --- backward conjugate heat equation ---------------------------------------------

// One-dimensional reduction
//   du/dt = -(Lu)  with  Lu = Lap u - V u   (conjugate heat: V = R - alpha |grad w|^2)
// solved backward from terminal data at t_b (forward parabolic in s = t_b - t),
// on a possibly moving interval [x_lo(t), x_hi(t)] (ALE remap to a fixed grid).
struct HeatBc {
  enum Kind { Periodic, Even, DirichletExact, Robin } kind = Even;
  std::function<double(double)> dirichlet;            // value(t) at the boundary
  std::function<double(double)> robin_beta;           // u_x = beta(t) u at the boundary
};

struct HeatGeometry {
  std::function<double(double)> x_lo, x_hi;  // interval at time t
  // spatial operator Lu given (x, t, u, u_x, u_xx) -> Lap u - V u
  std::function<double(double, double, double, double, double)> op;
  // measure weight: integral of u dV = integral of u mu(x, t) dx
  std::function<double(double, double)> mu;
};

struct HeatTrajectory {
  int N = 0;  // nodes 0..N (node-at-endpoint layout) or 0..N-1 when periodic
  bool periodic = false;
  std::vector<double> times;   // increasing
  std::vector<Vec> u;          // snapshot per time
  std::vector<double> lo, hi;  // interval per time
  bool aborted = false;        // positivity loss / blow-up
  std::string abort_reason;

  // value at physical x, time t (cubic in t, local polynomial in x)
  double eval(double x, double t) const {
    int idx[4];
    double w[4];
    TimeInterp::weights(times, t, idx, w);
    double acc = 0;
    for (int s = 0; s < 4; ++s) {
      double L = hi[idx[s]] - lo[idx[s]];
      double xi = (x - lo[idx[s]]) / L;
      acc += w[s] * sample(u[idx[s]], xi);
    }
    return acc;
  }

  double sample(const Vec& us, double xi) const {
    int n = int(us.size());
    double s = xi * N;
    int i = std::clamp(int(std::floor(s)) - 1, 0, n - 4);
    double x0 = i;
    // cubic Lagrange through nodes i..i+3
    double acc = 0;
    for (int k = 0; k < 4; ++k) {
      double wk = 1;
      for (int m = 0; m < 4; ++m)
        if (m != k) wk *= (s - (x0 + m)) / ((x0 + k) - (x0 + m));
      acc += wk * us[std::min(i + k, n - 1)];
    }
    return acc;
  }
};

inline HeatTrajectory solve_conjugate_heat_backward(const HeatGeometry& geom, HeatBc bc_lo,
                                                    HeatBc bc_hi,
                                                    std::function<double(double)> terminal,
                                                    double t_a, double t_b, int N, double dt,
                                                    int store_stride = 1) {
  HeatTrajectory traj;
  traj.N = N;
  traj.periodic = bc_lo.kind == HeatBc::Periodic;
  require(!traj.periodic || bc_hi.kind == HeatBc::Periodic, "mixed periodic endpoints");
  const int n_nodes = traj.periodic ? N : N + 1;

  auto nodes_x = [&](double t, Vec& x, double& L) {
    double lo = geom.x_lo(t), hi = geom.x_hi(t);
    L = hi - lo;
    x.resize(n_nodes);
    for (int i = 0; i < n_nodes; ++i) x[i] = lo + L * double(i) / N;
  };

  // ghost filling on the padded array [g2 g1 | u_0 .. u_n | g1 g2]
  auto padded = [&](const Vec& u, double t, double L) {
    Vec p(n_nodes + 4);
    p.segment(2, n_nodes) = u;
    double h = L / N;
    auto fill = [&](const HeatBc& bc, bool at_lo) {
      int b = at_lo ? 2 : n_nodes + 1;       // boundary node index in p
      int dir = at_lo ? 1 : -1;              // toward the interior
      if (bc.kind == HeatBc::Periodic) return;
      if (bc.kind == HeatBc::Even) {
        p[b - dir] = p[b + dir];
        p[b - 2 * dir] = p[b + 2 * dir];
        return;
      }
      if (bc.kind == HeatBc::DirichletExact) p[b] = bc.dirichlet(t);
      // cubic through the boundary condition and three interior nodes:
      // q(s) on s = 0, 1, 2 (nodes) with q'(0) = c0 (scaled slope at boundary)
      double u0 = p[b], u1 = p[b + dir], u2 = p[b + 2 * dir];
      double c0 = 0.0;
      if (bc.kind == HeatBc::Robin) c0 = dir * h * bc.robin_beta(t) * u0;
      else c0 = (-3 * u0 + 4 * u1 - u2) / 2.0;  // one-sided slope (extrapolation)
      // cubic q(s) = u0 + c0 s + A s^2 + B s^3 with q(1) = u1, q(2) = u2
      double B = (u2 - 4 * u1 + 3 * u0 + 2 * c0) / 4.0;
      double A = (u1 - u0 - c0) - B;
      auto q = [&](double s) { return u0 + c0 * s + A * s * s + B * s * s * s; };
      p[b - dir] = q(-1.0);
      p[b - 2 * dir] = q(-2.0);
    };
    if (traj.periodic) {
      p[0] = u[n_nodes - 2];
      p[1] = u[n_nodes - 1];
      p[n_nodes + 2] = u[0];
      p[n_nodes + 3] = u[1];
    } else {
      fill(bc_lo, true);
      fill(bc_hi, false);
    }
    return p;
  };

  auto rhs = [&](const ProfileState& y, double s) -> ProfileState {
    double t = t_b - s;
    Vec x;
    double L;
    nodes_x(t, x, L);
    double h = L / N;
    Vec u = y[0];
    if (!traj.periodic) {
      if (bc_lo.kind == HeatBc::DirichletExact) u[0] = bc_lo.dirichlet(t);
      if (bc_hi.kind == HeatBc::DirichletExact) u[n_nodes - 1] = bc_hi.dirichlet(t);
    }
    Vec p = padded(u, t, L);
    // endpoint velocities in s (ALE): d/ds of x(xi) = -d/dt
    double eps_t = 1e-6;
    double vlo = -(geom.x_lo(t + eps_t) - geom.x_lo(t - eps_t)) / (2 * eps_t);
    double vhi = -(geom.x_hi(t + eps_t) - geom.x_hi(t - eps_t)) / (2 * eps_t);
    Vec out(n_nodes);
    for (int i = 0; i < n_nodes; ++i) {
      int c = i + 2;
      double ux = (p[c - 2] - 8 * p[c - 1] + 8 * p[c + 1] - p[c + 2]) / (12 * h);
      double uxx = (-p[c - 2] + 16 * p[c - 1] - 30 * p[c] + 16 * p[c + 1] - p[c + 2]) /
                   (12 * h * h);
      double adv = (vlo + (vhi - vlo) * double(i) / N) * ux;  // mesh motion
      out[i] = geom.op(x[i], t, p[c], ux, uxx) + adv;
    }
    if (!traj.periodic) {
      if (bc_lo.kind == HeatBc::DirichletExact) out[0] = 0;
      if (bc_hi.kind == HeatBc::DirichletExact) out[n_nodes - 1] = 0;
    }
    return {out};
  };

  // terminal data
  Vec x;
  double L;
  nodes_x(t_b, x, L);
  Vec u(n_nodes);
  for (int i = 0; i < n_nodes; ++i) u[i] = terminal(x[i]);

  HeatTrajectory out = traj;
  int n_steps = std::max(1, int(std::ceil((t_b - t_a) / dt)));
  dt = (t_b - t_a) / n_steps;
  ProfileState y = {u};
  // march in s, record with time increasing for the interpolator
  std::vector<double> times_desc{t_b};
  std::vector<Vec> snaps_desc{u};
  std::vector<double> lo_desc{geom.x_lo(t_b)}, hi_desc{geom.x_hi(t_b)};
  for (int step = 0; step < n_steps; ++step) {
    double s = step * dt;
    try {
      y = rk4_step(y, s, dt, rhs);
    } catch (const Error&) {
      out.aborted = true;
      out.abort_reason = "operator evaluation failed";
      break;
    }
    double t = t_b - (step + 1) * dt;
    if (!traj.periodic) {
      if (bc_lo.kind == HeatBc::DirichletExact) y[0][0] = bc_lo.dirichlet(t);
      if (bc_hi.kind == HeatBc::DirichletExact) y[0][n_nodes - 1] = bc_hi.dirichlet(t);
    }
    if (state_blown_up(y) || y[0].minCoeff() <= 0) {
      out.aborted = true;
      out.abort_reason = y[0].allFinite() ? "positivity lost" : "blow-up";
      break;
    }
    if ((step + 1) % store_stride == 0 || step + 1 == n_steps) {
      times_desc.push_back(t);
      snaps_desc.push_back(y[0]);
      lo_desc.push_back(geom.x_lo(t));
      hi_desc.push_back(geom.x_hi(t));
    }
  }
  for (size_t i = times_desc.size(); i-- > 0;) {
    out.times.push_back(times_desc[i]);
    out.u.push_back(snaps_desc[i]);
    out.lo.push_back(lo_desc[i]);
    out.hi.push_back(hi_desc[i]);
  }
  return out;
}

}  // namespace flowlab
