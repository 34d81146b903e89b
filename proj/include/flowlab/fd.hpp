#pragma once

#include "flowlab/core.hpp"

#include <array>

namespace flowlab {

// Fornberg weights: coefficients of the d-th derivative at x0 from samples at
// the given nodes. Exact for polynomials up to degree nodes.size()-1.
inline std::vector<double> fornberg_weights(double x0, const std::vector<double>& nodes, int d) {
  const int nn = int(nodes.size());
  require(d < nn, "fornberg: need more nodes than derivative order");
  // c[k][j]: weight of node j for k-th derivative
  std::vector<std::vector<double>> c(d + 1, std::vector<double>(nn, 0.0));
  double c1 = 1.0;
  double c4 = nodes[0] - x0;
  c[0][0] = 1.0;
  for (int i = 1; i < nn; ++i) {
    int mn = std::min(i, d);
    double c2 = 1.0;
    double c5 = c4;
    c4 = nodes[i] - x0;
    for (int j = 0; j < i; ++j) {
      double c3 = nodes[i] - nodes[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k)
          c[k][i] = c1 * (k * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
        c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
      }
      for (int k = mn; k >= 1; --k)
        c[k][j] = (c4 * c[k][j] - k * c[k - 1][j]) / c3;
      c[0][j] = c4 * c[0][j] / c3;
    }
    c1 = c2;
  }
  return c[d];
}

// One 1-D stencil: node offsets (in units of h) and weights (to be divided by h^d).
struct Stencil {
  std::vector<double> offsets;
  std::vector<double> weights;    // per-node, already includes 1/h^d after scale()
  bool one_sided = false;
};

// centered stencil of accuracy `order` for derivative `d`
inline Stencil centered_stencil(int d, int order) {
  int half = (d + order - 1) / 2;  // smallest half-width with accuracy >= order
  std::vector<double> nodes;
  for (int k = -half; k <= half; ++k) nodes.push_back(double(k));
  Stencil s;
  s.offsets = nodes;
  s.weights = fornberg_weights(0.0, nodes, d);
  return s;
}

// one-sided stencil (nodes on {0, dir, 2 dir, ...}) with the same formal accuracy
inline Stencil one_sided_stencil(int d, int order, int dir) {
  int m = d + order;  // node count for accuracy `order`
  std::vector<double> nodes;
  for (int k = 0; k < m; ++k) nodes.push_back(double(dir * k));
  Stencil s;
  s.offsets = nodes;
  s.weights = fornberg_weights(0.0, nodes, d);
  s.one_sided = true;
  return s;
}

// Per-axis finite-difference policy. Fields are analytic callables, so the step
// balances truncation against roundoff for the total derivative order.
struct FdPolicy {
  int order = 4;              // stencil accuracy (2 or 4)
  double scale = 1.0;         // coordinate length scale
  double noise_floor = kEps;  // absolute noise of the evaluated quantity

  double step(int deriv_order) const {
    // h ~ (noise / |f|)^(1/(d+order)) balances eps/h^d against h^order
    double e = std::max(noise_floor, kEps);
    return scale * std::pow(e, 1.0 / (deriv_order + order));
  }
};

struct FdMeta {
  bool one_sided = false;  // some stencil hit a non-periodic range end
};

// aggregate derivative order per axis, total <= 3
using MultiIndex = std::vector<int>;

inline int total_order(const MultiIndex& mi) {
  int s = 0;
  for (int v : mi) s += v;
  return s;
}

namespace detail {

// Axis sample info: clamps the stencil inside [lo,hi] for non-periodic axes.
struct AxisPlan {
  Stencil st;
  double h;
};

inline AxisPlan plan_axis(int d, const FdPolicy& pol, double x, double lo, double hi,
                          bool periodic, FdMeta* meta) {
  AxisPlan p;
  p.h = pol.step(d);
  p.st = centered_stencil(d, pol.order);
  if (!periodic && std::isfinite(lo) && std::isfinite(hi)) {
    double half = p.st.offsets.back() * p.h;
    if (x - half < lo || x + half > hi) {
      int dir = (x - lo < hi - x) ? +1 : -1;
      p.st = one_sided_stencil(d, pol.order, dir);
      if (meta) meta->one_sided = true;
      // shrink h if even the one-sided stencil would escape
      double extent = std::abs(p.st.offsets.back()) * p.h;
      double room = (dir > 0) ? (hi - x) : (x - lo);
      if (extent > room && room > 0) p.h = room / std::abs(p.st.offsets.back());
    }
  }
  return p;
}

// Recursive nested application of per-axis stencils.
template <typename F>
double fd_nested(const F& f, Vec pt, const MultiIndex& mi, int axis, const FdPolicy& pol,
                 const std::vector<std::pair<double, double>>& ranges,
                 const std::vector<bool>& periodic, FdMeta* meta) {
  while (axis < int(mi.size()) && mi[axis] == 0) ++axis;
  if (axis >= int(mi.size())) return f(pt);
  AxisPlan p = plan_axis(mi[axis], pol, pt[axis], ranges[axis].first, ranges[axis].second,
                         periodic[axis], meta);
  double acc = 0.0;
  Vec q = pt;
  for (std::size_t k = 0; k < p.st.offsets.size(); ++k) {
    q[axis] = pt[axis] + p.st.offsets[k] * p.h;
    acc += p.st.weights[k] * fd_nested(f, q, mi, axis + 1, pol, ranges, periodic, meta);
  }
  return acc / std::pow(p.h, mi[axis]);
}

}  // namespace detail

// Partial derivative of a scalar callable f(pt) with per-axis orders `mi`.
template <typename F>
double fd_partial(const F& f, const Vec& pt, const MultiIndex& mi, const FdPolicy& pol,
                  const std::vector<std::pair<double, double>>& ranges,
                  const std::vector<bool>& periodic, FdMeta* meta = nullptr) {
  require(total_order(mi) <= 3, "fd_partial: total derivative order must be <= 3");
  if (total_order(mi) == 0) return f(pt);
  return detail::fd_nested(f, pt, mi, 0, pol, ranges, periodic, meta);
}

// Unbounded-domain convenience (all axes treated as unconstrained).
template <typename F>
double fd_partial_free(const F& f, const Vec& pt, const MultiIndex& mi, const FdPolicy& pol) {
  static const double inf = std::numeric_limits<double>::infinity();
  std::vector<std::pair<double, double>> ranges(mi.size(), {-inf, inf});
  std::vector<bool> periodic(mi.size(), false);
  return fd_partial(f, pt, mi, pol, ranges, periodic, nullptr);
}

// derivative along a single axis
template <typename F>
double fd_axis(const F& f, const Vec& pt, int axis, int d, const FdPolicy& pol) {
  MultiIndex mi(pt.size(), 0);
  mi[axis] = d;
  return fd_partial_free(f, pt, mi, pol);
}

// centered derivative in a single real variable (used for time differencing)
template <typename F>
double fd_time(const F& f, double t, double h, int order = 4) {
  Stencil s = centered_stencil(1, order);
  double acc = 0;
  for (std::size_t k = 0; k < s.offsets.size(); ++k) acc += s.weights[k] * f(t + s.offsets[k] * h);
  return acc / h;
}

}  // namespace flowlab
