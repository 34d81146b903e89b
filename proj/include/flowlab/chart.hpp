#pragma once

#include "flowlab/core.hpp"
#include "flowlab/fd.hpp"

namespace flowlab {

// Coordinate chart on which all ambient fields live. If boundary_axis is set,
// the lower end of that axis' range defines the boundary with inward direction
// +x^0 along that axis.
struct Chart {
  int dim = 3;
  std::vector<std::pair<double, double>> ranges;  // may be infinite
  std::vector<bool> periodic;
  std::optional<int> boundary_axis;

  static Chart free_space(int n) {
    require(n >= 3, "chart dimension must be >= 3");
    Chart c;
    c.dim = n;
    double inf = std::numeric_limits<double>::infinity();
    c.ranges.assign(n, {-inf, inf});
    c.periodic.assign(n, false);
    return c;
  }

  void validate() const {
    require(dim >= 3, "chart dimension must be >= 3");
    require(int(ranges.size()) == dim && int(periodic.size()) == dim,
            "chart ranges/periodic size mismatch");
    if (boundary_axis) require(*boundary_axis >= 0 && *boundary_axis < dim, "bad boundary axis");
  }

  double length_scale(int axis) const {
    double lo = ranges[axis].first, hi = ranges[axis].second;
    if (std::isfinite(lo) && std::isfinite(hi)) return hi - lo;
    return 1.0;
  }

  FdPolicy fd_policy(int order = 4) const {
    FdPolicy p;
    p.order = order;
    double s = 1.0;
    for (int a = 0; a < dim; ++a) s = std::min(s, length_scale(a));
    p.scale = s;
    return p;
  }
};

// Scalar field on a chart: analytic callable with an optional closed-form
// partial-derivative oracle. When the oracle is absent all derivatives come
// from nested central stencils on the callable.
struct ScalarField {
  std::function<double(const Vec&, double)> eval;
  std::function<double(const Vec&, double, const MultiIndex&)> exact_deriv;  // optional

  double operator()(const Vec& p, double t) const { return eval(p, t); }

  static ScalarField constant(double c) {
    ScalarField f;
    f.eval = [c](const Vec&, double) { return c; };
    f.exact_deriv = [c](const Vec&, double, const MultiIndex& mi) {
      return total_order(mi) == 0 ? c : 0.0;
    };
    return f;
  }
};

// Symmetric 2-tensor field (metrics, perturbation modes).
struct MetricField {
  std::function<Mat(const Vec&, double)> eval;
  std::function<Mat(const Vec&, double, const MultiIndex&)> exact_deriv;  // optional

  Mat operator()(const Vec& p, double t) const { return eval(p, t); }

  static MetricField euclidean(int n) {
    MetricField g;
    g.eval = [n](const Vec&, double) { return Mat::Identity(n, n); };
    g.exact_deriv = [n](const Vec&, double, const MultiIndex& mi) {
      return total_order(mi) == 0 ? Mat(Mat::Identity(n, n)) : Mat(Mat::Zero(n, n));
    };
    return g;
  }
};

struct VectorField {
  std::function<Vec(const Vec&, double)> eval;  // contravariant components
  Vec operator()(const Vec& p, double t) const { return eval(p, t); }
};

// --- pointwise jets -------------------------------------------------------

// value + first/second partial derivatives of a scalar at a point
struct ScalarJet {
  double v = 0;
  Vec d1;   // d1[a]   = del_a f
  Mat d2;   // d2(a,b) = del_a del_b f
};

// value + first/second partials of every metric component at a point
struct MetricJet {
  Mat g;
  std::vector<Mat> d1;               // d1[a](b,c)   = del_a g_bc
  std::vector<std::vector<Mat>> d2;  // d2[a][b](c,d) = del_a del_b g_cd
  int dim() const { return int(g.rows()); }
};

namespace detail {

inline MultiIndex axis_mi(int n, int a, int b = -1) {
  MultiIndex mi(n, 0);
  mi[a] += 1;
  if (b >= 0) mi[b] += 1;
  return mi;
}

}  // namespace detail

inline double scalar_partial(const ScalarField& f, const Chart& chart, const Vec& p, double t,
                             const MultiIndex& mi, const FdPolicy& pol, FdMeta* meta = nullptr) {
  if (f.exact_deriv) return f.exact_deriv(p, t, mi);
  auto g = [&](const Vec& q) { return f.eval(q, t); };
  return fd_partial(g, p, mi, pol, chart.ranges, chart.periodic, meta);
}

inline Mat metric_partial(const MetricField& g, const Chart& chart, const Vec& p, double t,
                          const MultiIndex& mi, const FdPolicy& pol, FdMeta* meta = nullptr) {
  if (g.exact_deriv) return g.exact_deriv(p, t, mi);
  const int n = chart.dim;
  Mat out = Mat::Zero(n, n);
  for (int b = 0; b < n; ++b)
    for (int c = b; c < n; ++c) {
      auto comp = [&](const Vec& q) { return g.eval(q, t)(b, c); };
      double v = fd_partial(comp, p, mi, pol, chart.ranges, chart.periodic, meta);
      out(b, c) = v;
      out(c, b) = v;
    }
  return out;
}

inline ScalarJet scalar_jet(const ScalarField& f, const Chart& chart, const Vec& p, double t,
                            const FdPolicy& pol) {
  const int n = chart.dim;
  ScalarJet j;
  j.v = f.eval(p, t);
  j.d1 = Vec::Zero(n);
  j.d2 = Mat::Zero(n, n);
  for (int a = 0; a < n; ++a) {
    j.d1[a] = scalar_partial(f, chart, p, t, detail::axis_mi(n, a), pol);
    for (int b = a; b < n; ++b) {
      double v = scalar_partial(f, chart, p, t, detail::axis_mi(n, a, b), pol);
      j.d2(a, b) = v;
      j.d2(b, a) = v;
    }
  }
  return j;
}

inline MetricJet metric_jet(const MetricField& g, const Chart& chart, const Vec& p, double t,
                            const FdPolicy& pol) {
  const int n = chart.dim;
  MetricJet j;
  j.g = g.eval(p, t);
  j.d1.assign(n, Mat::Zero(n, n));
  j.d2.assign(n, std::vector<Mat>(n, Mat::Zero(n, n)));
  for (int a = 0; a < n; ++a) {
    j.d1[a] = metric_partial(g, chart, p, t, detail::axis_mi(n, a), pol);
    for (int b = a; b < n; ++b) {
      Mat v = metric_partial(g, chart, p, t, detail::axis_mi(n, a, b), pol);
      j.d2[a][b] = v;
      j.d2[b][a] = v;
    }
  }
  return j;
}

}  // namespace flowlab
