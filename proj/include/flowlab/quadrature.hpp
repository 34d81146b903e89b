#pragma once

#include "flowlab/core.hpp"

namespace flowlab {

// Gauss-Legendre nodes/weights on [-1,1] by Newton iteration on P_n.
inline void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  nodes.assign(n, 0.0);
  weights.assign(n, 0.0);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double pp = 0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      pp = n * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    nodes[i] = -x;
    nodes[n - 1 - i] = x;
    weights[i] = 2.0 / ((1.0 - x * x) * pp * pp);
    weights[n - 1 - i] = weights[i];
  }
}

// One parameter axis of a structured grid: quadrature nodes + weights.
struct AxisRule {
  std::vector<double> nodes;
  std::vector<double> weights;
  bool periodic = false;
  double lo = 0, hi = 0;

  int size() const { return int(nodes.size()); }

  static AxisRule gauss(double a, double b, int n) {
    AxisRule r;
    r.lo = a;
    r.hi = b;
    std::vector<double> x, w;
    gauss_legendre(n, x, w);
    for (int i = 0; i < n; ++i) {
      r.nodes.push_back(0.5 * (a + b) + 0.5 * (b - a) * x[i]);
      r.weights.push_back(0.5 * (b - a) * w[i]);
    }
    return r;
  }

  // trapezoid rule on a periodic axis (spectrally accurate for smooth data)
  static AxisRule periodic_uniform(double a, double b, int n) {
    AxisRule r;
    r.lo = a;
    r.hi = b;
    r.periodic = true;
    double h = (b - a) / n;
    for (int i = 0; i < n; ++i) {
      r.nodes.push_back(a + i * h);
      r.weights.push_back(h);
    }
    return r;
  }

  // composite midpoint on a non-periodic axis (used by profile grids)
  static AxisRule midpoint(double a, double b, int n) {
    AxisRule r;
    r.lo = a;
    r.hi = b;
    double h = (b - a) / n;
    for (int i = 0; i < n; ++i) {
      r.nodes.push_back(a + (i + 0.5) * h);
      r.weights.push_back(h);
    }
    return r;
  }

  // Polar-angle rule: Gauss in mu = cos(theta); spectrally accurate for
  // integrands that are smooth on the sphere.
  static AxisRule gauss_polar(int n) {
    AxisRule r;
    r.lo = 0.0;
    r.hi = kPi;
    std::vector<double> x, w;
    gauss_legendre(n, x, w);
    for (int i = n - 1; i >= 0; --i) {  // theta increasing
      double theta = std::acos(x[i]);
      r.nodes.push_back(theta);
      r.weights.push_back(w[i] / std::sin(theta));
    }
    return r;
  }
};

// Structured 2-parameter grid.
struct ParamGrid2 {
  AxisRule u0, u1;
  int size() const { return u0.size() * u1.size(); }

  template <typename F>
  double integrate(const F& f) const {  // f(i,j) includes the area weight
    double s = 0;
    for (int i = 0; i < u0.size(); ++i)
      for (int j = 0; j < u1.size(); ++j) s += u0.weights[i] * u1.weights[j] * f(i, j);
    return s;
  }
};

}  // namespace flowlab
