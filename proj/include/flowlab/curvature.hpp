#pragma once

#include "flowlab/chart.hpp"

namespace flowlab {

// Curvature data of a metric at one point, in the conventions
//   R(d_a, d_b) d_c = nabla_b nabla_a d_c - nabla_a nabla_b d_c,
//   R_{abcx} = g(R(d_a, d_b) d_c, d_x),   Ric_{bc} = g^{ax} R_{bacx},
// which make the unit round sphere satisfy Ric = (n-1) g.
struct CurvaturePackage {
  Mat g;
  Mat g_inv;
  Tensor3 gamma;  // gamma(c,a,b) = Gamma^c_ab
  Tensor4 riem;   // riem(a,b,c,x) = R_{abcx}
  Tensor4 dgamma; // dgamma(e,c,a,b) = del_e Gamma^c_ab (kept for derived ops)
  Mat ric;
  double scalar = 0;
  int dim() const { return int(g.rows()); }
};

inline Mat invert_metric(const Mat& g) {
  Eigen::FullPivLU<Mat> lu(g);
  require(lu.isInvertible(), "degenerate metric");
  return lu.inverse();
}

// Christoffel symbols from a metric jet.
inline Tensor3 christoffel_from_jet(const MetricJet& j, const Mat& g_inv) {
  const int n = j.dim();
  Tensor3 G(n);
  for (int c = 0; c < n; ++c)
    for (int a = 0; a < n; ++a)
      for (int b = a; b < n; ++b) {
        double s = 0;
        for (int d = 0; d < n; ++d)
          s += g_inv(c, d) * (j.d1[a](d, b) + j.d1[b](d, a) - j.d1[d](a, b));
        G(c, a, b) = 0.5 * s;
        G(c, b, a) = G(c, a, b);
      }
  return G;
}

// Full curvature package from the metric 2-jet at a point.
inline CurvaturePackage curvature_from_jet(const MetricJet& j) {
  const int n = j.dim();
  CurvaturePackage pkg;
  pkg.g = j.g;
  pkg.g_inv = invert_metric(j.g);
  pkg.gamma = christoffel_from_jet(j, pkg.g_inv);

  // del_e g^{cd} = -g^{cm} g^{dn} del_e g_mn
  std::vector<Mat> dginv(n);
  for (int e = 0; e < n; ++e) dginv[e] = -pkg.g_inv * j.d1[e] * pkg.g_inv;

  pkg.dgamma = Tensor4(n);
  for (int e = 0; e < n; ++e)
    for (int c = 0; c < n; ++c)
      for (int a = 0; a < n; ++a)
        for (int b = a; b < n; ++b) {
          double s = 0;
          for (int d = 0; d < n; ++d) {
            s += dginv[e](c, d) * (j.d1[a](d, b) + j.d1[b](d, a) - j.d1[d](a, b));
            s += pkg.g_inv(c, d) * (j.d2[e][a](d, b) + j.d2[e][b](d, a) - j.d2[e][d](a, b));
          }
          pkg.dgamma(e, c, a, b) = 0.5 * s;
          pkg.dgamma(e, c, b, a) = pkg.dgamma(e, c, a, b);
        }

  // R^z_abc = del_b Gamma^z_ac - del_a Gamma^z_bc + Gamma^m_ac Gamma^z_bm - Gamma^m_bc Gamma^z_am
  Tensor4 up(n);
  for (int z = 0; z < n; ++z)
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        for (int c = 0; c < n; ++c) {
          double s = pkg.dgamma(b, z, a, c) - pkg.dgamma(a, z, b, c);
          for (int m = 0; m < n; ++m)
            s += pkg.gamma(m, a, c) * pkg.gamma(z, b, m) - pkg.gamma(m, b, c) * pkg.gamma(z, a, m);
          up(z, a, b, c) = s;
        }
  pkg.riem = Tensor4(n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c)
        for (int x = 0; x < n; ++x) {
          double s = 0;
          for (int z = 0; z < n; ++z) s += j.g(z, x) * up(z, a, b, c);
          pkg.riem(a, b, c, x) = s;
        }

  pkg.ric = Mat::Zero(n, n);
  for (int b = 0; b < n; ++b)
    for (int c = 0; c < n; ++c) {
      double s = 0;
      for (int a = 0; a < n; ++a)
        for (int x = 0; x < n; ++x) s += pkg.g_inv(a, x) * pkg.riem(b, a, c, x);
      pkg.ric(b, c) = s;
    }
  pkg.scalar = (pkg.g_inv * pkg.ric).trace();
  return pkg;
}

inline CurvaturePackage curvature_package(const MetricField& g, const Chart& chart, const Vec& p,
                                          double t, const FdPolicy& pol) {
  return curvature_from_jet(metric_jet(g, chart, p, t, pol));
}

inline CurvaturePackage curvature_package(const MetricField& g, const Chart& chart, const Vec& p,
                                          double t) {
  return curvature_package(g, chart, p, t, chart.fd_policy());
}

// --- differential operators ------------------------------------------------

struct DiffOps {
  Vec grad;       // nabla^a f
  Vec df;         // del_a f
  Mat hess;       // nabla_a nabla_b f
  double lap = 0;        // Delta f
  double grad_sq = 0;    // |nabla f|^2
};

inline DiffOps diff_ops_from_jets(const ScalarJet& fj, const Mat& g_inv, const Tensor3& gamma) {
  const int n = int(fj.d1.size());
  DiffOps d;
  d.df = fj.d1;
  d.grad = g_inv * fj.d1;
  d.hess = Mat::Zero(n, n);
  for (int a = 0; a < n; ++a)
    for (int b = a; b < n; ++b) {
      double s = fj.d2(a, b);
      for (int c = 0; c < n; ++c) s -= gamma(c, a, b) * fj.d1[c];
      d.hess(a, b) = s;
      d.hess(b, a) = s;
    }
  d.lap = (g_inv * d.hess).trace();
  d.grad_sq = d.df.dot(d.grad);
  return d;
}

inline DiffOps differential_ops(const ScalarField& f, const MetricField& g, const Chart& chart,
                                const Vec& p, double t, const FdPolicy& pol) {
  MetricJet gj = metric_jet(g, chart, p, t, pol);
  Mat g_inv = invert_metric(gj.g);
  Tensor3 gamma = christoffel_from_jet(gj, g_inv);
  return diff_ops_from_jets(scalar_jet(f, chart, p, t, pol), g_inv, gamma);
}

inline DiffOps differential_ops(const ScalarField& f, const MetricField& g, const Chart& chart,
                                const Vec& p, double t) {
  return differential_ops(f, g, chart, p, t, chart.fd_policy());
}

// (L_X g)_ab = nabla_a X_b + nabla_b X_a with X_b = g_bc X^c
inline Mat lie_derivative_metric(const MetricField& g, const VectorField& X, const Chart& chart,
                                 const Vec& p, double t, const FdPolicy& pol) {
  const int n = chart.dim;
  MetricJet gj = metric_jet(g, chart, p, t, pol);
  Mat g_inv = invert_metric(gj.g);
  Tensor3 gamma = christoffel_from_jet(gj, g_inv);
  Vec Xlow = gj.g * X.eval(p, t);
  // del_a X_b of the lowered field by direct differencing
  Mat dX = Mat::Zero(n, n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      auto comp = [&](const Vec& q) { return (g.eval(q, t) * X.eval(q, t))[b]; };
      MultiIndex mi(n, 0);
      mi[a] = 1;
      dX(a, b) = fd_partial(comp, p, mi, pol, chart.ranges, chart.periodic, nullptr);
    }
  Mat L = Mat::Zero(n, n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      double cov_ab = dX(a, b), cov_ba = dX(b, a);
      for (int c = 0; c < n; ++c) {
        cov_ab -= gamma(c, a, b) * Xlow[c];
        cov_ba -= gamma(c, b, a) * Xlow[c];
      }
      L(a, b) = cov_ab + cov_ba;
    }
  return L;
}

// --- derivatives of curvature ---------------------------------------------

// FD policy for differencing quantities that are themselves FD-computed:
// larger step to sit above their noise floor.
inline FdPolicy nested_policy(const FdPolicy& base, double noise = 1e-10) {
  FdPolicy p = base;
  p.noise_floor = noise;
  return p;
}

// nabla_e Ric_bc
inline Tensor3 cov_deriv_ricci(const MetricField& g, const Chart& chart, const Vec& p, double t,
                               const FdPolicy& pol) {
  const int n = chart.dim;
  CurvaturePackage pkg = curvature_package(g, chart, p, t, pol);
  FdPolicy outer = nested_policy(pol);
  Tensor3 out(n);
  for (int e = 0; e < n; ++e) {
    MultiIndex mi(n, 0);
    mi[e] = 1;
    for (int b = 0; b < n; ++b)
      for (int c = b; c < n; ++c) {
        auto comp = [&](const Vec& q) { return curvature_package(g, chart, q, t, pol).ric(b, c); };
        double v = fd_partial(comp, p, mi, outer, chart.ranges, chart.periodic, nullptr);
        for (int m = 0; m < n; ++m)
          v -= pkg.gamma(m, e, b) * pkg.ric(m, c) + pkg.gamma(m, e, c) * pkg.ric(b, m);
        out(e, b, c) = v;
        out(e, c, b) = v;
      }
  }
  return out;
}

// nabla_e R (covector)
inline Vec cov_deriv_scalar_curvature(const MetricField& g, const Chart& chart, const Vec& p,
                                      double t, const FdPolicy& pol) {
  const int n = chart.dim;
  FdPolicy outer = nested_policy(pol);
  Vec out(n);
  for (int e = 0; e < n; ++e) {
    MultiIndex mi(n, 0);
    mi[e] = 1;
    auto comp = [&](const Vec& q) { return curvature_package(g, chart, q, t, pol).scalar; };
    out[e] = fd_partial(comp, p, mi, outer, chart.ranges, chart.periodic, nullptr);
  }
  return out;
}

// nabla_e R_abcx along a single direction e (full covariant derivative slice)
inline Tensor4 cov_deriv_riemann_dir(const MetricField& g, const Chart& chart, const Vec& p,
                                     double t, int e, const FdPolicy& pol) {
  const int n = chart.dim;
  CurvaturePackage pkg = curvature_package(g, chart, p, t, pol);
  FdPolicy outer = nested_policy(pol);
  MultiIndex mi(n, 0);
  mi[e] = 1;
  Tensor4 out(n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c)
        for (int x = 0; x < n; ++x) {
          auto comp = [&](const Vec& q) {
            return curvature_package(g, chart, q, t, pol).riem(a, b, c, x);
          };
          double v = fd_partial(comp, p, mi, outer, chart.ranges, chart.periodic, nullptr);
          for (int m = 0; m < n; ++m) {
            v -= pkg.gamma(m, e, a) * pkg.riem(m, b, c, x);
            v -= pkg.gamma(m, e, b) * pkg.riem(a, m, c, x);
            v -= pkg.gamma(m, e, c) * pkg.riem(a, b, m, x);
            v -= pkg.gamma(m, e, x) * pkg.riem(a, b, c, m);
          }
          out(a, b, c, x) = v;
        }
  return out;
}

// Directional versions: nabla_X along an arbitrary vector X, computed as a
// single 1D line difference (one stencil per component set).
namespace detail {
template <typename F>
double line_diff(const F& f, const FdPolicy& pol) {  // d/ds f(s) at s = 0
  Stencil st = centered_stencil(1, pol.order);
  double h = pol.step(1);
  double acc = 0;
  for (size_t i = 0; i < st.offsets.size(); ++i) acc += st.weights[i] * f(st.offsets[i] * h);
  return acc / h;
}
}  // namespace detail

// (nabla_X Ric)_bc
inline Mat cov_deriv_ricci_vec(const MetricField& g, const Chart& chart, const Vec& p, double t,
                               const Vec& X, const FdPolicy& pol) {
  const int n = chart.dim;
  CurvaturePackage pkg = curvature_package(g, chart, p, t, pol);
  FdPolicy outer = nested_policy(pol);
  Mat out = Mat::Zero(n, n);
  for (int b = 0; b < n; ++b)
    for (int c = b; c < n; ++c) {
      double v = detail::line_diff(
          [&](double s) { return curvature_package(g, chart, p + s * X, t, pol).ric(b, c); },
          outer);
      for (int m = 0; m < n; ++m)
        for (int e = 0; e < n; ++e)
          v -= X[e] * (pkg.gamma(m, e, b) * pkg.ric(m, c) + pkg.gamma(m, e, c) * pkg.ric(b, m));
      out(b, c) = v;
      out(c, b) = v;
    }
  return out;
}

// nabla_X R
inline double cov_deriv_scalar_vec(const MetricField& g, const Chart& chart, const Vec& p,
                                   double t, const Vec& X, const FdPolicy& pol) {
  FdPolicy outer = nested_policy(pol);
  return detail::line_diff(
      [&](double s) { return curvature_package(g, chart, p + s * X, t, pol).scalar; }, outer);
}

// (nabla_X Riem)_abcx
inline Tensor4 cov_deriv_riemann_vec(const MetricField& g, const Chart& chart, const Vec& p,
                                     double t, const Vec& X, const FdPolicy& pol) {
  const int n = chart.dim;
  CurvaturePackage pkg = curvature_package(g, chart, p, t, pol);
  FdPolicy outer = nested_policy(pol);

  // sample packages once along the line, then difference every component
  Stencil st = centered_stencil(1, outer.order);
  double h = outer.step(1);
  std::vector<CurvaturePackage> line;
  for (int off : st.offsets) line.push_back(curvature_package(g, chart, p + (off * h) * X, t, pol));

  Tensor4 out(n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c)
        for (int x = 0; x < n; ++x) {
          double v = 0;
          for (size_t i = 0; i < line.size(); ++i) v += st.weights[i] * line[i].riem(a, b, c, x);
          v /= h;
          for (int m = 0; m < n; ++m)
            for (int e = 0; e < n; ++e)
              v -= X[e] * (pkg.gamma(m, e, a) * pkg.riem(m, b, c, x) +
                           pkg.gamma(m, e, b) * pkg.riem(a, m, c, x) +
                           pkg.gamma(m, e, c) * pkg.riem(a, b, m, x) +
                           pkg.gamma(m, e, x) * pkg.riem(a, b, c, m));
          out(a, b, c, x) = v;
        }
  return out;
}

// contracted second Bianchi residual: nabla^a Ric_ab - (1/2) nabla_b R
inline Vec bianchi_residual(const MetricField& g, const Chart& chart, const Vec& p, double t,
                            const FdPolicy& pol) {
  const int n = chart.dim;
  CurvaturePackage pkg = curvature_package(g, chart, p, t, pol);
  Tensor3 dric = cov_deriv_ricci(g, chart, p, t, pol);
  Vec dR = cov_deriv_scalar_curvature(g, chart, p, t, pol);
  Vec res(n);
  for (int b = 0; b < n; ++b) {
    double s = 0;
    for (int a = 0; a < n; ++a)
      for (int x = 0; x < n; ++x) s += pkg.g_inv(a, x) * dric(a, x, b);
    res[b] = s - 0.5 * dR[b];
  }
  return res;
}

inline Vec bianchi_residual(const MetricField& g, const Chart& chart, const Vec& p, double t) {
  return bianchi_residual(g, chart, p, t, chart.fd_policy());
}

}  // namespace flowlab
