#pragma once

#include "flowlab/curvature.hpp"
#include "flowlab/quadrature.hpp"

namespace flowlab {

// 2-jet of an immersion x(u0, u1) into the ambient chart.
struct EmbedJet {
  Vec x;
  std::array<Vec, 2> du;                 // du[i]     = del_i x
  std::array<std::array<Vec, 2>, 2> d2;  // d2[i][j]  = del_i del_j x
};

// Parametrized surface in an ambient chart. `normal_ref` picks the normal
// orientation: e0 is the unit normal with g(e0, normal_ref) > 0.
struct Immersion {
  std::function<Vec(double, double, double)> embed;      // (u0, u1, t) -> point
  std::function<EmbedJet(double, double, double)> exact_jet;  // optional
  std::array<std::pair<double, double>, 2> ranges{
      {{-std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()},
       {-std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()}}};
  std::array<bool, 2> periodic{false, false};
  std::function<Vec(double, double, double)> normal_ref;
  double param_scale = 1.0;

  FdPolicy fd_policy(int order = 4) const {
    FdPolicy p;
    p.order = order;
    p.scale = param_scale;
    return p;
  }

  // parameter space as a 2d chart (for intrinsic operators)
  Chart param_chart() const {
    Chart c;
    c.dim = 2;
    c.ranges = {ranges[0], ranges[1]};
    c.periodic = {periodic[0], periodic[1]};
    return c;
  }
};

inline EmbedJet immersion_jet(const Immersion& imm, double u0, double u1, double t,
                              const FdPolicy& pol) {
  if (imm.exact_jet) return imm.exact_jet(u0, u1, t);
  std::vector<std::pair<double, double>> rg = {imm.ranges[0], imm.ranges[1]};
  std::vector<bool> per = {imm.periodic[0], imm.periodic[1]};
  Vec p(2);
  p << u0, u1;
  EmbedJet j;
  j.x = imm.embed(u0, u1, t);
  const int n = int(j.x.size());
  for (int i = 0; i < 2; ++i) j.du[i] = Vec::Zero(n);
  for (int i = 0; i < 2; ++i)
    for (int k = i; k < 2; ++k) j.d2[i][k] = j.d2[k][i] = Vec::Zero(n);
  for (int c = 0; c < n; ++c) {
    auto comp = [&](const Vec& q) { return imm.embed(q[0], q[1], t)[c]; };
    for (int i = 0; i < 2; ++i) {
      MultiIndex mi(2, 0);
      mi[i] = 1;
      j.du[i][c] = fd_partial(comp, p, mi, pol, rg, per, nullptr);
      for (int k = i; k < 2; ++k) {
        MultiIndex m2(2, 0);
        m2[i] += 1;
        m2[k] += 1;
        double v = fd_partial(comp, p, m2, pol, rg, per, nullptr);
        j.d2[i][k][c] = v;
        j.d2[k][i][c] = v;
      }
    }
  }
  return j;
}

// First and second fundamental forms (and friends) at one parameter point.
struct InducedPackage {
  Vec x;
  Mat T;        // columns = tangent vectors del_i x (ambient components)
  Mat g2;       // induced metric g_ij = g(T_i, T_j)
  Mat g2_inv;
  Vec e0;       // unit normal, contravariant
  Vec e0_low;   // g_ab e0^b
  Mat A;        // A_ij = g(nabla_{T_i} T_j, e0)
  double H = 0;          // g^ij A_ij
  double area_weight = 0;  // sqrt(det g2)
};

inline InducedPackage induced_package_from_jet(const EmbedJet& jet, const Mat& g_amb,
                                               const Tensor3& gamma_amb, const Vec& ref) {
  const int n = int(jet.x.size());
  InducedPackage s;
  s.x = jet.x;
  s.T = Mat::Zero(n, 2);
  s.T.col(0) = jet.du[0];
  s.T.col(1) = jet.du[1];

  s.g2 = s.T.transpose() * g_amb * s.T;
  require(s.g2.determinant() > 0, "degenerate induced metric");
  s.g2_inv = invert_metric(s.g2);
  s.area_weight = std::sqrt(s.g2.determinant());

  // normal: kernel of the 2 x n system g(T_i, v) = 0
  Mat M = s.T.transpose() * g_amb;
  Eigen::FullPivLU<Mat> lu(M);
  require(lu.dimensionOfKernel() == n - 2, "immersion normal space is not a line");
  Vec v = lu.kernel().col(0);
  double norm2 = v.dot(g_amb * v);
  require(norm2 > 0, "normal has non-positive length");
  v /= std::sqrt(norm2);
  if (v.dot(g_amb * ref) < 0) v = -v;
  s.e0 = v;
  s.e0_low = g_amb * v;

  s.A = Mat::Zero(2, 2);
  for (int i = 0; i < 2; ++i)
    for (int j = i; j < 2; ++j) {
      Vec acc = jet.d2[i][j];
      for (int c = 0; c < n; ++c) {
        double s2 = 0;
        for (int a = 0; a < n; ++a)
          for (int b = 0; b < n; ++b) s2 += gamma_amb(c, a, b) * jet.du[i][a] * jet.du[j][b];
        acc[c] += s2;
      }
      double aij = acc.dot(s.e0_low);
      s.A(i, j) = aij;
      s.A(j, i) = aij;
    }
  s.H = (s.g2_inv * s.A).trace();
  return s;
}

inline InducedPackage induced_package(const Immersion& imm, const MetricField& g,
                                      const Chart& chart, double u0, double u1, double t,
                                      const FdPolicy& pol_param, const FdPolicy& pol_amb) {
  EmbedJet jet = immersion_jet(imm, u0, u1, t, pol_param);
  MetricJet gj = metric_jet(g, chart, jet.x, t, pol_amb);
  Mat g_inv = invert_metric(gj.g);
  Tensor3 gamma = christoffel_from_jet(gj, g_inv);
  return induced_package_from_jet(jet, gj.g, gamma, imm.normal_ref(u0, u1, t));
}

inline InducedPackage induced_package(const Immersion& imm, const MetricField& g,
                                      const Chart& chart, double u0, double u1, double t) {
  return induced_package(imm, g, chart, u0, u1, t, imm.fd_policy(), chart.fd_policy());
}

// --- integration ------------------------------------------------------------

// integral over the surface of f(pkg, u0, u1); f should NOT include the area
// element, it is supplied here.
template <typename F>
double integrate_surface(const Immersion& imm, const ParamGrid2& grid, const MetricField& g,
                         const Chart& chart, double t, const F& f) {
  FdPolicy pp = imm.fd_policy();
  FdPolicy pa = chart.fd_policy();
  return grid.integrate([&](int i, int j) {
    double u0 = grid.u0.nodes[i], u1 = grid.u1.nodes[j];
    InducedPackage pkg = induced_package(imm, g, chart, u0, u1, t, pp, pa);
    return f(pkg, u0, u1) * pkg.area_weight;
  });
}

inline double surface_area(const Immersion& imm, const ParamGrid2& grid, const MetricField& g,
                           const Chart& chart, double t) {
  return integrate_surface(imm, grid, g, chart, t,
                           [](const InducedPackage&, double, double) { return 1.0; });
}

// --- intrinsic operators ----------------------------------------------------

// the induced metric as a field over parameter space
inline MetricField induced_metric_field(const Immersion& imm, const MetricField& g,
                                        const Chart& chart, const FdPolicy& pol_param,
                                        const FdPolicy& pol_amb) {
  MetricField g2;
  g2.eval = [=, &imm, &g, &chart](const Vec& u, double t) {
    return induced_package(imm, g, chart, u[0], u[1], t, pol_param, pol_amb).g2;
  };
  return g2;
}

// intrinsic gradient/Hessian/Laplacian of a scalar defined on parameter space
inline DiffOps surface_diff_ops(const ScalarField& phi, const Immersion& imm, const MetricField& g,
                                const Chart& chart, const Vec& u, double t, const FdPolicy& pol) {
  MetricField g2 = induced_metric_field(imm, g, chart, imm.fd_policy(), chart.fd_policy());
  Chart pc = imm.param_chart();
  MetricJet gj = metric_jet(g2, pc, u, t, nested_policy(pol));
  Mat g_inv = invert_metric(gj.g);
  Tensor3 gamma = christoffel_from_jet(gj, g_inv);
  return diff_ops_from_jets(scalar_jet(phi, pc, u, t, pol), g_inv, gamma);
}

// intrinsic Christoffel symbols of the induced metric at u
inline Tensor3 surface_christoffel(const Immersion& imm, const MetricField& g, const Chart& chart,
                                   const Vec& u, double t, const FdPolicy& pol) {
  MetricField g2 = induced_metric_field(imm, g, chart, imm.fd_policy(), chart.fd_policy());
  Chart pc = imm.param_chart();
  MetricJet gj = metric_jet(g2, pc, u, t, nested_policy(pol));
  return christoffel_from_jet(gj, invert_metric(gj.g));
}

// intrinsic covariant derivative of a symmetric 2-tensor field on parameters
template <typename FMat>  // FMat: (const Vec& u, double t) -> Mat (2x2 symmetric)
Tensor3 surface_cov_deriv_sym2(const FMat& F, const Tensor3& gamma2, const Immersion& imm,
                               const Vec& u, double t, const FdPolicy& pol) {
  Chart pc = imm.param_chart();
  Mat F0 = F(u, t);
  Tensor3 out(2);
  for (int k = 0; k < 2; ++k) {
    MultiIndex mi(2, 0);
    mi[k] = 1;
    for (int i = 0; i < 2; ++i)
      for (int j = i; j < 2; ++j) {
        auto comp = [&](const Vec& q) { return F(q, t)(i, j); };
        double v = fd_partial(comp, u, mi, pol, pc.ranges, pc.periodic, nullptr);
        for (int m = 0; m < 2; ++m)
          v -= gamma2(m, k, i) * F0(m, j) + gamma2(m, k, j) * F0(i, m);
        out(k, i, j) = v;
        out(k, j, i) = v;
      }
  }
  return out;
}

// the second fundamental form as a field over parameter space
inline std::function<Mat(const Vec&, double)> second_form_field(const Immersion& imm,
                                                                const MetricField& g,
                                                                const Chart& chart,
                                                                const FdPolicy& pol_param,
                                                                const FdPolicy& pol_amb) {
  return [=, &imm, &g, &chart](const Vec& u, double t) {
    return induced_package(imm, g, chart, u[0], u[1], t, pol_param, pol_amb).A;
  };
}

// nabla-hat_k A_ij
inline Tensor3 surface_cov_deriv_A(const Immersion& imm, const MetricField& g, const Chart& chart,
                                   const Vec& u, double t, const FdPolicy& pol) {
  Tensor3 gamma2 = surface_christoffel(imm, g, chart, u, t, pol);
  auto Af = second_form_field(imm, g, chart, imm.fd_policy(), chart.fd_policy());
  return surface_cov_deriv_sym2(Af, gamma2, imm, u, t, nested_policy(pol));
}

// (Laplace-hat A)_ij = g^kl nabla-hat_k nabla-hat_l A_ij
inline Mat surface_laplace_A(const Immersion& imm, const MetricField& g, const Chart& chart,
                             const Vec& u, double t, const FdPolicy& pol) {
  Chart pc = imm.param_chart();
  InducedPackage pkg = induced_package(imm, g, chart, u[0], u[1], t, imm.fd_policy(),
                                       chart.fd_policy());
  Tensor3 gamma2 = surface_christoffel(imm, g, chart, u, t, pol);
  Tensor3 dA = surface_cov_deriv_A(imm, g, chart, u, t, pol);

  // second covariant derivative: difference the nabla-hat A field itself
  FdPolicy outer = nested_policy(pol, 1e-8);
  Mat lap = Mat::Zero(2, 2);
  for (int l = 0; l < 2; ++l) {
    MultiIndex mi(2, 0);
    mi[l] = 1;
    for (int k = 0; k < 2; ++k)
      for (int i = 0; i < 2; ++i)
        for (int j = i; j < 2; ++j) {
          auto comp = [&](const Vec& q) {
            return surface_cov_deriv_A(imm, g, chart, q, t, pol)(k, i, j);
          };
          double v = fd_partial(comp, u, mi, outer, pc.ranges, pc.periodic, nullptr);
          for (int m = 0; m < 2; ++m)
            v -= gamma2(m, l, k) * dA(m, i, j) + gamma2(m, l, i) * dA(k, m, j) +
                 gamma2(m, l, j) * dA(k, i, m);
          // v = nabla_l nabla_k A_ij; contract with g^lk
          lap(i, j) += pkg.g2_inv(l, k) * v;
          if (j > i) lap(j, i) = lap(i, j);
        }
  }
  for (int i = 0; i < 2; ++i)
    for (int j = i + 1; j < 2; ++j) lap(j, i) = lap(i, j);
  return lap;
}

// --- structure equation residuals -------------------------------------------

// Gauss equation residual: K_intrinsic - (sectional ambient + det A / det g2).
// For a 2-surface: R-hat_1212 = R_1212(ambient, tangents) + A_11 A_22 - A_12^2.
inline double gauss_residual(const Immersion& imm, const MetricField& g, const Chart& chart,
                             const Vec& u, double t, const FdPolicy& pol) {
  InducedPackage pkg = induced_package(imm, g, chart, u[0], u[1], t, imm.fd_policy(),
                                       chart.fd_policy());
  CurvaturePackage amb = curvature_package(g, chart, pkg.x, t, chart.fd_policy());

  MetricField g2 = induced_metric_field(imm, g, chart, imm.fd_policy(), chart.fd_policy());
  Chart pc = imm.param_chart();
  MetricJet gj = metric_jet(g2, pc, u, t, nested_policy(pol));
  CurvaturePackage intr = curvature_from_jet(gj);

  double amb_sect = 0;  // R_abcx T_0^a T_1^b T_0^c T_1^x
  const int n = chart.dim;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c)
        for (int x = 0; x < n; ++x)
          amb_sect += amb.riem(a, b, c, x) * pkg.T(a, 0) * pkg.T(b, 1) * pkg.T(c, 0) * pkg.T(x, 1);
  double rhs = amb_sect + pkg.A(0, 0) * pkg.A(1, 1) - pkg.A(0, 1) * pkg.A(0, 1);
  return intr.riem(0, 1, 0, 1) - rhs;
}

// Codazzi residual: R_{0jik} - (nabla-hat_i A_jk - nabla-hat_k A_ij),
// with R_{0jik} = Riem(e0, T_j, T_i, T_k).
inline Tensor3 codazzi_residual(const Immersion& imm, const MetricField& g, const Chart& chart,
                                const Vec& u, double t, const FdPolicy& pol) {
  InducedPackage pkg = induced_package(imm, g, chart, u[0], u[1], t, imm.fd_policy(),
                                       chart.fd_policy());
  CurvaturePackage amb = curvature_package(g, chart, pkg.x, t, chart.fd_policy());
  Tensor3 dA = surface_cov_deriv_A(imm, g, chart, u, t, pol);

  const int n = chart.dim;
  Tensor3 res(2);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k) {
        double r = 0;
        for (int a = 0; a < n; ++a)
          for (int b = 0; b < n; ++b)
            for (int c = 0; c < n; ++c)
              for (int x = 0; x < n; ++x)
                r += amb.riem(a, b, c, x) * pkg.e0[a] * pkg.T(b, j) * pkg.T(c, i) * pkg.T(x, k);
        res(i, j, k) = r - (dA(i, j, k) - dA(k, i, j));
      }
  return res;
}

// ambient curvature components contracted against the surface frame
struct FrameCurvature {
  Mat ric_tt;      // R_ij          = Ric(T_i, T_j)
  Vec ric_t0;      // R_{i0}        = Ric(T_i, e0)
  double ric_00 = 0;   // R_00
  double scalar = 0;   // R
  Mat riem_0t0t;   // R_{0i0j}      = Riem(e0, T_i, e0, T_j)
  Tensor4 riem_tttt;  // R_{kilj}   = Riem(T_k, T_i, T_l, T_j)
};

inline FrameCurvature frame_curvature(const CurvaturePackage& amb, const InducedPackage& pkg) {
  const int n = amb.dim();
  FrameCurvature fc;
  fc.ric_tt = pkg.T.transpose() * amb.ric * pkg.T;
  fc.ric_t0 = pkg.T.transpose() * amb.ric * pkg.e0;
  fc.ric_00 = pkg.e0.dot(amb.ric * pkg.e0);
  fc.scalar = amb.scalar;
  fc.riem_0t0t = Mat::Zero(2, 2);
  fc.riem_tttt = Tensor4(2);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      double s = 0;
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
          for (int c = 0; c < n; ++c)
            for (int x = 0; x < n; ++x)
              s += amb.riem(a, b, c, x) * pkg.e0[a] * pkg.T(b, i) * pkg.e0[c] * pkg.T(x, j);
      fc.riem_0t0t(i, j) = s;
    }
  for (int k = 0; k < 2; ++k)
    for (int i = 0; i < 2; ++i)
      for (int l = 0; l < 2; ++l)
        for (int j = 0; j < 2; ++j) {
          double s = 0;
          for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b)
              for (int c = 0; c < n; ++c)
                for (int x = 0; x < n; ++x)
                  s += amb.riem(a, b, c, x) * pkg.T(a, k) * pkg.T(b, i) * pkg.T(c, l) *
                       pkg.T(x, j);
          fc.riem_tttt(k, i, l, j) = s;
        }
  return fc;
}

// Simons-type identity residual:
//   nabla-hat_i nabla-hat_j H
//     - [ (Lap-hat A)_ij + nabla-hat_i R_j0 + nabla-hat_j R_i0 - nabla_0 R_ij
//         + A^k_i R_{0k0j} + A^k_j R_{0k0i} - A_ij R_00 + 2 A^{kl} R_{kilj}
//         - H R_{0i0j} - H A^k_i A_jk + |A|^2 A_ij + nabla_0 R_{0i0j} ]
inline Mat simons_residual(const Immersion& imm, const MetricField& g, const Chart& chart,
                           const Vec& u, double t, const FdPolicy& pol) {
  const int n = chart.dim;
  FdPolicy pa = chart.fd_policy();
  InducedPackage pkg = induced_package(imm, g, chart, u[0], u[1], t, imm.fd_policy(), pa);
  CurvaturePackage amb = curvature_package(g, chart, pkg.x, t, pa);
  FrameCurvature fc = frame_curvature(amb, pkg);

  // intrinsic Hessian of H
  ScalarField Hf;
  Hf.eval = [&](const Vec& q, double tt) {
    return induced_package(imm, g, chart, q[0], q[1], tt, imm.fd_policy(), pa).H;
  };
  Mat hessH = surface_diff_ops(Hf, imm, g, chart, u, t, nested_policy(pol)).hess;

  Mat lapA = surface_laplace_A(imm, g, chart, u, t, pol);

  // nabla-hat_i of the covector S_j = Ric(T_j, e0)
  Tensor3 gamma2 = surface_christoffel(imm, g, chart, u, t, pol);
  auto Sf = [&](const Vec& q, double tt) -> Vec {
    InducedPackage pq = induced_package(imm, g, chart, q[0], q[1], tt, imm.fd_policy(), pa);
    CurvaturePackage aq = curvature_package(g, chart, pq.x, tt, pa);
    return pq.T.transpose() * aq.ric * pq.e0;
  };
  Chart pc = imm.param_chart();
  FdPolicy outer = nested_policy(pol);
  Mat dS = Mat::Zero(2, 2);  // dS(i,j) = nabla-hat_i S_j
  for (int i = 0; i < 2; ++i) {
    MultiIndex mi(2, 0);
    mi[i] = 1;
    for (int j = 0; j < 2; ++j) {
      auto comp = [&](const Vec& q) { return Sf(q, t)[j]; };
      double v = fd_partial(comp, u, mi, outer, pc.ranges, pc.periodic, nullptr);
      Vec S0 = Sf(u, t);
      for (int m = 0; m < 2; ++m) v -= gamma2(m, i, j) * S0[m];
      dS(i, j) = v;
    }
  }

  // ambient normal-direction derivatives
  Mat dric = cov_deriv_ricci_vec(g, chart, pkg.x, t, pkg.e0, pa);  // (nabla_0 Ric)_ab
  Tensor4 driem = cov_deriv_riemann_vec(g, chart, pkg.x, t, pkg.e0, pa);
  Mat d0R_tt = pkg.T.transpose() * dric * pkg.T;  // nabla_0 R_ij
  Mat d0R_0t0t = Mat::Zero(2, 2);                 // nabla_0 R_{0i0j}
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      double s = 0;
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
          for (int c = 0; c < n; ++c)
            for (int x = 0; x < n; ++x)
              s += driem(a, b, c, x) * pkg.e0[a] * pkg.T(b, i) * pkg.e0[c] * pkg.T(x, j);
      d0R_0t0t(i, j) = s;
    }

  Mat Aup = pkg.g2_inv * pkg.A;  // A^k_i = g^km A_mi  (Aup(k,i))
  Mat Auu = pkg.g2_inv * pkg.A * pkg.g2_inv;  // A^{kl}
  double A2 = (Auu.transpose() * pkg.A).trace();  // A^{kl} A_kl

  Mat res = Mat::Zero(2, 2);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      double rhs = lapA(i, j) + dS(i, j) + dS(j, i) - d0R_tt(i, j);
      for (int k = 0; k < 2; ++k) {
        rhs += Aup(k, i) * fc.riem_0t0t(k, j) + Aup(k, j) * fc.riem_0t0t(k, i);
        rhs -= pkg.H * Aup(k, i) * pkg.A(j, k);
      }
      rhs -= pkg.A(i, j) * fc.ric_00;
      for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l) rhs += 2.0 * Auu(k, l) * fc.riem_tttt(k, i, l, j);
      rhs -= pkg.H * fc.riem_0t0t(i, j);
      rhs += A2 * pkg.A(i, j);
      rhs += d0R_0t0t(i, j);
      res(i, j) = hessH(i, j) - rhs;
    }
  return res;
}

}  // namespace flowlab
