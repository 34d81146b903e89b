#pragma once

#include <map>
#include <ostream>

#include "flowlab/flows.hpp"
#include "flowlab/quadrature.hpp"

namespace flowlab {

// --- weighted curvature quantities ----------------------------------------------

struct WeightedQuantities {
  double R_inf = 0;  // R + 2 Lap f - |grad f|^2
  double H_inf = 0;  // H + e0 f (boundary only; 0 when no package given)
};

inline WeightedQuantities weighted_quantities(const AmbientFamily& amb, const Vec& p, double t,
                                              const InducedPackage* pkg = nullptr) {
  require(amb.has_f, "weighted quantities need a potential");
  CurvaturePackage cp = curvature_package(amb.g, amb.chart, p, t);
  DiffOps df = differential_ops(amb.f, amb.g, amb.chart, p, t);
  WeightedQuantities q;
  q.R_inf = cp.scalar + 2.0 * df.lap - df.grad_sq;
  if (pkg) q.H_inf = pkg->H + df.df.dot(pkg->e0);
  return q;
}

// defect of the modified-flow equations at a point:
//   S = Ric + Hess f - alpha dw (x) dw,  theta = Lap w - <grad w, grad f>
struct FlowDefect {
  Mat S;
  double theta = 0;
  Mat g, g_inv;
};

inline FlowDefect flow_defect(const AmbientFamily& amb, const Vec& p, double t) {
  require(amb.has_f, "flow defect needs a potential");
  CurvaturePackage cp = curvature_package(amb.g, amb.chart, p, t);
  DiffOps df = differential_ops(amb.f, amb.g, amb.chart, p, t);
  DiffOps dw = differential_ops(amb.w, amb.g, amb.chart, p, t);
  FlowDefect d;
  d.S = cp.ric + df.hess - amb.alpha() * dw.df * dw.df.transpose();
  d.theta = dw.lap - dw.df.dot(df.grad);
  d.g = cp.g;
  d.g_inv = cp.g_inv;
  return d;
}

// |S|^2 = g^{ac} g^{bd} S_ab S_cd for a symmetric 2-tensor
inline double tensor_norm2(const Mat& S, const Mat& g_inv) {
  return (g_inv * S * g_inv * S).trace();
}

// --- quadrature domains -----------------------------------------------------------

// interior quadrature: chart points + parameter weights; the integrator
// multiplies by sqrt(det g) at each point
struct DomainQuad {
  std::vector<Vec> pts;
  std::vector<double> wts;
};

inline DomainQuad box_domain(const AxisRule& a0, const AxisRule& a1, const AxisRule& a2) {
  DomainQuad d;
  for (int i = 0; i < a0.size(); ++i)
    for (int j = 0; j < a1.size(); ++j)
      for (int k = 0; k < a2.size(); ++k) {
        Vec p(3);
        p << a0.nodes[i], a1.nodes[j], a2.nodes[k];
        d.pts.push_back(p);
        d.wts.push_back(a0.weights[i] * a1.weights[j] * a2.weights[k]);
      }
  return d;
}

// round ball about the origin in Cartesian coordinates (spherical product rule;
// the r^2 sin(theta) Jacobian is folded into the weights)
inline DomainQuad ball_domain(double radius, int nr, int nth, int nph) {
  DomainQuad d;
  AxisRule ar = AxisRule::gauss(0.0, radius, nr);
  AxisRule ath = AxisRule::gauss(0.0, kPi, nth);
  AxisRule aph = AxisRule::periodic_uniform(0.0, 2.0 * kPi, nph);
  for (int i = 0; i < nr; ++i)
    for (int j = 0; j < nth; ++j)
      for (int k = 0; k < nph; ++k) {
        double r = ar.nodes[i], th = ath.nodes[j], ph = aph.nodes[k];
        Vec p(3);
        p << r * std::sin(th) * std::cos(ph), r * std::sin(th) * std::sin(ph),
            r * std::cos(th);
        d.pts.push_back(p);
        d.wts.push_back(ar.weights[i] * ath.weights[j] * aph.weights[k] * r * r *
                        std::sin(th));
      }
  return d;
}

// --- ambient state: fields + interior quadrature + boundary patches ---------------

struct BoundaryPatch {
  Immersion imm;
  ParamGrid2 grid;
};

struct AmbientState {
  AmbientFamily amb;
  DomainQuad domain;
  std::vector<BoundaryPatch> boundary;
};

// --- functional reports ------------------------------------------------------------

struct QuadSamples {
  std::vector<Vec> pts;       // chart / parameter coordinates
  std::vector<double> wts;    // quadrature weight including the measure
  std::vector<double> vals;   // integrand values

  void push(const Vec& p, double w, double v) {
    pts.push_back(p);
    wts.push_back(w);
    vals.push_back(v);
  }
  double total() const {
    double s = 0;
    for (size_t k = 0; k < wts.size(); ++k) s += wts[k] * vals[k];
    return s;
  }
};

struct FunctionalReport {
  double value = 0;
  QuadSamples interior, boundary;
  std::map<std::string, double> decomposition;

  double resummed() const { return interior.total() + boundary.total(); }

  void write_csv(std::ostream& os) const {
    os.precision(17);
    os << "region,c0,c1,c2,weight,integrand\n";
    auto dump = [&](const char* tag, const QuadSamples& q) {
      for (size_t k = 0; k < q.pts.size(); ++k) {
        os << tag;
        for (int c = 0; c < 3; ++c) os << ',' << (c < q.pts[k].size() ? q.pts[k][c] : 0.0);
        os << ',' << q.wts[k] << ',' << q.vals[k] << '\n';
      }
    };
    dump("interior", interior);
    dump("boundary", boundary);
  }
};

// sum of F over the interior quadrature, measure included in the weights
template <typename F>
void accumulate_interior(const AmbientState& st, double t, QuadSamples& out, const F& f) {
  for (size_t k = 0; k < st.domain.pts.size(); ++k) {
    const Vec& p = st.domain.pts[k];
    double dvol = std::sqrt(st.amb.g(p, t).determinant());
    out.push(p, st.domain.wts[k] * dvol, f(p));
  }
}

// sum of F over all boundary patches; F sees the induced package
template <typename F>
void accumulate_boundary(const AmbientState& st, double t, QuadSamples& out, const F& f) {
  for (const BoundaryPatch& b : st.boundary)
    for (int i = 0; i < b.grid.u0.size(); ++i)
      for (int j = 0; j < b.grid.u1.size(); ++j) {
        double u0 = b.grid.u0.nodes[i], u1 = b.grid.u1.nodes[j];
        InducedPackage pkg = induced_package(b.imm, st.amb.g, st.amb.chart, u0, u1, t);
        Vec u(2);
        u << u0, u1;
        out.push(u, b.grid.u0.weights[i] * b.grid.u1.weights[j] * pkg.area_weight,
                 f(pkg, u0, u1));
      }
}

// --- the weighted action ------------------------------------------------------------

// I = int (R_inf - alpha |grad w|^2) e^-f dV + 2 int H_inf e^-f dA
inline FunctionalReport action_I(const AmbientState& st, double t) {
  require(!st.boundary.empty(), "action needs a boundary immersion");
  require(st.amb.has_f, "action needs a potential");
  const double alpha = st.amb.alpha();
  FunctionalReport rep;
  double lott = 0, dilaton = 0;  // I = I_infty - alpha I_1
  size_t k = 0;
  accumulate_interior(st, t, rep.interior, [&](const Vec& p) {
    WeightedQuantities q = weighted_quantities(st.amb, p, t);
    DiffOps dw = differential_ops(st.amb.w, st.amb.g, st.amb.chart, p, t);
    double ef = std::exp(-st.amb.f(p, t));
    double wk = st.domain.wts[k++] * std::sqrt(st.amb.g(p, t).determinant());
    lott += wk * q.R_inf * ef;
    dilaton += wk * dw.grad_sq * ef;
    return (q.R_inf - alpha * dw.grad_sq) * ef;
  });
  accumulate_boundary(st, t, rep.boundary, [&](const InducedPackage& pkg, double, double) {
    WeightedQuantities q = weighted_quantities(st.amb, pkg.x, t, &pkg);
    return 2.0 * q.H_inf * std::exp(-st.amb.f(pkg.x, t));
  });
  lott += rep.boundary.total();
  rep.value = rep.interior.total() + rep.boundary.total();
  rep.decomposition["lott_I_infty"] = lott;
  rep.decomposition["dilaton_I1"] = dilaton;
  return rep;
}

// --- first variation ------------------------------------------------------------------

// delta I for a measure-preserving variation (v, h, theta) with v/2 - h = 0
inline FunctionalReport variation_delta_I(const AmbientState& st, double t,
                                          const std::function<Mat(const Vec&, double)>& v,
                                          const std::function<double(const Vec&, double)>& h,
                                          const std::function<double(const Vec&, double)>& theta) {
  require(!st.boundary.empty(), "variation needs a boundary immersion");
  require(st.amb.has_f, "variation needs a potential");
  const double alpha = st.amb.alpha();
  FunctionalReport rep;
  double scale = 0;
  accumulate_interior(st, t, rep.interior, [&](const Vec& p) {
    Mat vv = v(p, t);
    FlowDefect d = flow_defect(st.amb, p, t);
    double trace = (d.g_inv * vv).trace();
    scale = std::max(scale, vv.cwiseAbs().maxCoeff());
    require(std::abs(0.5 * trace - h(p, t)) <= 1e-9 * std::max(1.0, scale),
            "measure not preserved");
    Mat v_up = d.g_inv * vv * d.g_inv;  // v^{ab}
    // v^{ab}(alpha grad_a w grad_b w - Ric_ab - Hess_ab f) + 2 alpha theta (Lap w - <gw,gf>)
    double interior = (v_up * (-d.S)).trace() + 2.0 * alpha * theta(p, t) * d.theta;
    return interior * std::exp(-st.amb.f(p, t));
  });
  accumulate_boundary(st, t, rep.boundary, [&](const InducedPackage& pkg, double, double) {
    Mat vv = v(pkg.x, t);
    double trace = (invert_metric(st.amb.g(pkg.x, t)) * vv).trace();
    require(std::abs(0.5 * trace - h(pkg.x, t)) <= 1e-9 * std::max(1.0, scale),
            "measure not preserved");
    // frame components: v_ij on tangents, v_00 on the unit normal
    Mat v_tt = pkg.T.transpose() * vv * pkg.T;
    Mat v_up = pkg.g2_inv * v_tt * pkg.g2_inv;  // v^{ij}
    double v00 = pkg.e0.dot(vv * pkg.e0);
    ScalarJet fj = scalar_jet(st.amb.f, st.amb.chart, pkg.x, t, st.amb.chart.fd_policy());
    double e0f = fj.d1.dot(pkg.e0);
    ScalarJet wj = scalar_jet(st.amb.w, st.amb.chart, pkg.x, t, st.amb.chart.fd_policy());
    double e0w = wj.d1.dot(pkg.e0);
    double b = -((v_up * pkg.A).trace() + v00 * (pkg.H + e0f)) +
               2.0 * alpha * theta(pkg.x, t) * e0w;
    return b * std::exp(-st.amb.f(pkg.x, t));
  });
  rep.value = rep.interior.total() + rep.boundary.total();
  return rep;
}

// --- boundary geometry bundle for the dI/dt and Harnack integrands ---------------------

struct BoundaryData {
  InducedPackage pkg;
  FrameCurvature fc;
  Vec grad_f_low, grad_f_up;  // frame components of the tangential gradient
  Vec grad_w_low, grad_w_up;
  Vec grad_H_low, grad_H_up;  // from differencing H over the parameters
  double e0f = 0, e0w = 0;
  double lap_H = 0;           // intrinsic Laplacian of H
  double div_ric_t0 = 0;      // hat-div of the vector field R^{0i}
  double nabla0_R = 0;        // e0-directional covariant derivative of R
  double nabla0_R00 = 0;      // (cov deriv of Ric along e0)(e0, e0)
};

inline BoundaryData boundary_data(const AmbientFamily& amb, const Immersion& imm, double u0,
                                  double u1, double t, bool with_lap_and_div = false) {
  BoundaryData bd;
  bd.pkg = induced_package(imm, amb.g, amb.chart, u0, u1, t);
  CurvaturePackage cp = curvature_package(amb.g, amb.chart, bd.pkg.x, t);
  bd.fc = frame_curvature(cp, bd.pkg);

  FdPolicy pa = amb.chart.fd_policy();
  ScalarJet wj = scalar_jet(amb.w, amb.chart, bd.pkg.x, t, pa);
  bd.grad_w_low = bd.pkg.T.transpose() * wj.d1;
  bd.grad_w_up = bd.pkg.g2_inv * bd.grad_w_low;
  bd.e0w = wj.d1.dot(bd.pkg.e0);
  if (amb.has_f) {
    ScalarJet fj = scalar_jet(amb.f, amb.chart, bd.pkg.x, t, pa);
    bd.grad_f_low = bd.pkg.T.transpose() * fj.d1;
    bd.grad_f_up = bd.pkg.g2_inv * bd.grad_f_low;
    bd.e0f = fj.d1.dot(bd.pkg.e0);
  } else {
    bd.grad_f_low = bd.grad_f_up = Vec::Zero(2);
  }

  // mean curvature as a field over the parameters
  ScalarField Hfield;
  Hfield.eval = [&amb, &imm](const Vec& u, double tt) {
    return induced_package(imm, amb.g, amb.chart, u[0], u[1], tt).H;
  };
  Vec u(2);
  u << u0, u1;
  FdPolicy pp = nested_policy(imm.fd_policy(), 1e-8);
  ScalarJet hj = scalar_jet(Hfield, imm.param_chart(), u, t, pp);
  bd.grad_H_low = hj.d1;
  bd.grad_H_up = bd.pkg.g2_inv * hj.d1;

  bd.nabla0_R = cov_deriv_scalar_vec(amb.g, amb.chart, bd.pkg.x, t, bd.pkg.e0, pa);
  Mat dric0 = cov_deriv_ricci_vec(amb.g, amb.chart, bd.pkg.x, t, bd.pkg.e0, pa);
  bd.nabla0_R00 = bd.pkg.e0.dot(dric0 * bd.pkg.e0);

  if (with_lap_and_div) {
    bd.lap_H = surface_diff_ops(Hfield, imm, amb.g, amb.chart, u, t, pp).lap;
    // hat-div of V^i = g2^{ij} Ric(e0, T_j): (1/sqrt g2) d_i (sqrt g2 V^i)
    FdPolicy pd = nested_policy(imm.fd_policy(), 1e-8);
    double acc = 0;
    for (int i = 0; i < 2; ++i) {
      MultiIndex mi(2, 0);
      mi[i] = 1;
      auto comp = [&](const Vec& q) {
        InducedPackage pq = induced_package(imm, amb.g, amb.chart, q[0], q[1], t);
        CurvaturePackage cq = curvature_package(amb.g, amb.chart, pq.x, t);
        Vec ric_t0 = pq.T.transpose() * (cq.ric * pq.e0);
        return pq.area_weight * (pq.g2_inv * ric_t0)[i];
      };
      acc += fd_partial_free(comp, u, mi, pd);
    }
    bd.div_ric_t0 = acc / bd.pkg.area_weight;
  }
  return bd;
}

// --- time derivative of the action -------------------------------------------------------

enum class DIForm { A, B, C };

// how the caller supplies H(t) at fixed boundary parameters
struct FlowContext {
  enum Gauge { Modified, Mcf } gauge = Mcf;
  std::function<double(double, double, double)> H_of;  // (u0, u1, t)
  double dt_eval = 1e-3;
};

// interior integrand of dI/dt (same for all forms)
inline double dI_dt_interior_integrand(const AmbientFamily& amb, const Vec& p, double t) {
  FlowDefect d = flow_defect(amb, p, t);
  return 2.0 * (tensor_norm2(d.S, d.g_inv) + amb.alpha() * sq(d.theta)) *
         std::exp(-amb.f(p, t));
}

inline FunctionalReport dI_dt_integrands(const AmbientState& st, DIForm form, double t,
                                         const FlowContext* flow = nullptr) {
  require(!st.boundary.empty(), "dI/dt needs a boundary immersion");
  require(st.amb.has_f, "dI/dt needs a potential");
  require(form == DIForm::A || flow != nullptr, "dH/dt needs a flow trajectory");
  const double alpha = st.amb.alpha();
  FunctionalReport rep;
  accumulate_interior(st, t, rep.interior, [&](const Vec& p) {
    return dI_dt_interior_integrand(st.amb, p, t);
  });

  double bc_residual = 0;
  for (const BoundaryPatch& b : st.boundary)
    for (int i = 0; i < b.grid.u0.size(); ++i)
      for (int j = 0; j < b.grid.u1.size(); ++j) {
        double u0 = b.grid.u0.nodes[i], u1 = b.grid.u1.nodes[j];
        BoundaryData bd = boundary_data(st.amb, b.imm, u0, u1, t, form == DIForm::A);
        bc_residual = std::max(bc_residual,
                               std::max(std::abs(bd.pkg.H + bd.e0f), std::abs(bd.e0w)));
        double fH = bd.grad_f_up.dot(bd.grad_H_low);
        double Aff = bd.grad_f_up.dot(bd.pkg.A * bd.grad_f_up);
        double Aww = bd.grad_w_up.dot(bd.pkg.A * bd.grad_w_up);
        double ric0f = (bd.pkg.g2_inv * bd.fc.ric_t0).dot(bd.grad_f_low);
        double integrand = 0;
        if (form == DIForm::A) {
          double AA = (bd.pkg.g2_inv * bd.pkg.A * bd.pkg.g2_inv * bd.pkg.A).trace();
          double Aric = (bd.pkg.g2_inv * bd.pkg.A * bd.pkg.g2_inv * bd.fc.ric_tt).trace();
          integrand = bd.lap_H - 2.0 * fH + Aff + AA * bd.pkg.H + Aric + 2.0 * ric0f -
                      bd.div_ric_t0 - alpha * Aww;
        } else {
          double dH = fd_time([&](double tt) { return flow->H_of(u0, u1, tt); }, t,
                              flow->dt_eval);
          // measured gauge -> the gauge each form is stated in:
          //   dH_modified = dH_mcf - <grad-hat f, grad-hat H>
          double dH_mod = flow->gauge == FlowContext::Modified ? dH : dH - fH;
          double dH_mcf = flow->gauge == FlowContext::Mcf ? dH : dH + fH;
          double common = Aff + 2.0 * ric0f - 0.5 * bd.nabla0_R - bd.pkg.H * bd.fc.ric_00 +
                          alpha * Aww;
          integrand = form == DIForm::B ? dH_mod - fH + common : dH_mcf - 2.0 * fH + common;
        }
        Vec u(2);
        u << u0, u1;
        rep.boundary.push(u, b.grid.u0.weights[i] * b.grid.u1.weights[j] * bd.pkg.area_weight,
                          2.0 * integrand * std::exp(-st.amb.f(bd.pkg.x, t)));
      }
  rep.value = rep.interior.total() + rep.boundary.total();
  rep.decomposition["interior"] = rep.interior.total();
  rep.decomposition["boundary"] = rep.boundary.total();
  rep.decomposition["bc_residual"] = bc_residual;
  return rep;
}

// --- Harnack expression --------------------------------------------------------------------

// Z(V) = dH/dt + 2 <V, grad-hat H> + A(V, V) in the MCF gauge, plus the
// background terms 2 R^{0i} grad-hat_i f - 1/2 nabla_0 R - H R_00
// + alpha A(grad-hat w, grad-hat w) when extended.
// The immersion family may carry any tangential reparametrization: the
// measured dH/dt is corrected by the tangential part of the velocity.
inline double harnack_Z(const Immersion& fam, const AmbientFamily& amb, double u0, double u1,
                        double t, const Vec& V_ambient, bool extended, double dt_eval) {
  BoundaryData bd = boundary_data(amb, fam, u0, u1, t, false);
  const InducedPackage& pkg = bd.pkg;

  double dH_param = fd_time([&](double tt) {
    return induced_package(fam, amb.g, amb.chart, u0, u1, tt).H;
  }, t, dt_eval);
  Vec vel(pkg.x.size());
  for (int c = 0; c < vel.size(); ++c)
    vel[c] = fd_time([&](double tt) { return fam.embed(u0, u1, tt)[c]; }, t, dt_eval);
  Vec vel_tan = vel - vel.dot(pkg.e0_low) * pkg.e0;
  // parameter components of a tangential ambient vector
  auto frame_up = [&](const Vec& X) -> Vec {
    return pkg.g2_inv * (pkg.T.transpose() * (amb.g(pkg.x, t) * X));
  };
  Vec c_vel = frame_up(vel_tan);
  double dH_mcf = dH_param - c_vel.dot(bd.grad_H_low);

  Vec cV = frame_up(V_ambient);
  double Z = dH_mcf + 2.0 * cV.dot(bd.grad_H_low) + cV.dot(pkg.A * cV);
  if (extended) {
    double ric0f = (pkg.g2_inv * bd.fc.ric_t0).dot(bd.grad_f_low);
    double Aww = bd.grad_w_up.dot(pkg.A * bd.grad_w_up);
    Z += 2.0 * ric0f - 0.5 * bd.nabla0_R - pkg.H * bd.fc.ric_00 + alpha_n(amb.n) * Aww;
  }
  return Z;
}

// tangential gradient of the potential as an ambient vector (for V = -grad-hat f)
inline Vec tangential_gradient(const AmbientFamily& amb, const ScalarField& phi,
                               const InducedPackage& pkg, double t) {
  ScalarJet j = scalar_jet(phi, amb.chart, pkg.x, t, amb.chart.fd_policy());
  Vec low = pkg.T.transpose() * j.d1;
  return pkg.T * (pkg.g2_inv * low);
}

// --- Huisken quantity ---------------------------------------------------------------------

inline double huisken_quantity(const Immersion& imm, const AmbientFamily& amb,
                               const ParamGrid2& grid, const std::string& soliton_case,
                               double tau, double t) {
  require(amb.has_f, "Huisken quantity needs a potential");
  double q = integrate_surface(imm, grid, amb.g, amb.chart, t,
                               [&](const InducedPackage& pkg, double, double) {
                                 return std::exp(-amb.f(pkg.x, t));
                               });
  if (soliton_case == "steady") return q;
  require(tau > 0, "scaled soliton case needs tau > 0");
  return std::pow(tau, -(amb.n - 1) / 2.0) * q;
}

// rate of the area element along the flow: d(dA)/dt = -(R^i_i + H^2 - alpha |gw|^2) dA
inline double area_element_rate(const AmbientFamily& amb, const BoundaryData& bd) {
  double ric_trace = (bd.pkg.g2_inv * bd.fc.ric_tt).trace();
  double gw2 = bd.grad_w_up.dot(bd.grad_w_low);
  return -(ric_trace + sq(bd.pkg.H) - alpha_n(amb.n) * gw2);
}

// --- soliton residuals ----------------------------------------------------------------------

struct SolitonResiduals {
  double ambient_eq1 = 0;     // |Ric + Hess fb - alpha dw dw - s g|
  double ambient_eq2 = 0;     // |Lap w - <grad fb, grad w>|
  double surface_H = 0;       // |H + e0 fb|
  double restricted_eq1 = 0;  // |R_ij + hat-Hess fb + H A - alpha hat-grad w (x) hat-grad w - s g|
  double restricted_eq2 = 0;  // |R_i0 - hat-grad H + A . hat-grad fb - alpha e0w hat-grad w|
  double translator_eq1 = 0;  // flat case, f = -fb: |hat-Hess f - H A|
  double translator_eq2 = 0;  // |hat-grad H + A . hat-grad f|
};

// s is the soliton constant c/(2t) evaluated at the scenario time
// (0 steady, 1/(2 tau) shrinking with tau the time to the singularity)
inline SolitonResiduals soliton_residuals(const AmbientFamily& amb, const Immersion* imm,
                                          const ParamGrid2* grid, double s, double t) {
  require(amb.has_f, "soliton residuals need a potential");
  SolitonResiduals out;
  // ambient equations sampled at interior-ish points along the surface (or origin)
  auto ambient_at = [&](const Vec& p) {
    FlowDefect d = flow_defect(amb, p, t);
    out.ambient_eq1 = std::max(out.ambient_eq1, (d.S - s * d.g).cwiseAbs().maxCoeff());
    out.ambient_eq2 = std::max(out.ambient_eq2, std::abs(d.theta));
  };
  if (!imm) {
    ambient_at(Vec::Zero(amb.chart.dim));
    return out;
  }

  FdPolicy pp = nested_policy(imm->fd_policy(), 1e-8);
  for (int i = 0; i < grid->u0.size(); ++i)
    for (int j = 0; j < grid->u1.size(); ++j) {
      double u0 = grid->u0.nodes[i], u1 = grid->u1.nodes[j];
      BoundaryData bd = boundary_data(amb, *imm, u0, u1, t, false);
      ambient_at(bd.pkg.x);
      out.surface_H = std::max(out.surface_H, std::abs(bd.pkg.H + bd.e0f));

      Vec u(2);
      u << u0, u1;
      ScalarField fpull;
      fpull.eval = [&](const Vec& q, double tt) { return amb.f(imm->embed(q[0], q[1], tt), tt); };
      DiffOps fops = surface_diff_ops(fpull, *imm, amb.g, amb.chart, u, t, pp);
      Mat r1 = bd.fc.ric_tt + fops.hess + bd.pkg.H * bd.pkg.A -
               amb.alpha() * bd.grad_w_low * bd.grad_w_low.transpose() - s * bd.pkg.g2;
      out.restricted_eq1 = std::max(out.restricted_eq1, r1.cwiseAbs().maxCoeff());

      Vec r2 = bd.fc.ric_t0 - bd.grad_H_low + bd.pkg.A * bd.grad_f_up -
               amb.alpha() * bd.e0w * bd.grad_w_low;
      out.restricted_eq2 = std::max(out.restricted_eq2, r2.cwiseAbs().maxCoeff());

      // translator form (flat ambient, f = -fb)
      Mat t1 = -fops.hess - bd.pkg.H * bd.pkg.A;
      out.translator_eq1 = std::max(out.translator_eq1, t1.cwiseAbs().maxCoeff());
      Vec t2 = bd.grad_H_low - bd.pkg.A * bd.grad_f_up;
      out.translator_eq2 = std::max(out.translator_eq2, t2.cwiseAbs().maxCoeff());
    }
  return out;
}

// --- entropy functionals ----------------------------------------------------------------------

enum class EntropyVariant { Ecker, Extended };

inline FunctionalReport entropy_W(const AmbientState& st, EntropyVariant variant, double tau,
                                  double t) {
  require(tau > 0, "entropy needs tau > 0");
  require(st.amb.has_f, "entropy needs a potential");
  const int n = st.amb.n;
  const double alpha = st.amb.alpha();
  const double norm = std::pow(4.0 * kPi * tau, -n / 2.0);
  FunctionalReport rep;
  accumulate_interior(st, t, rep.interior, [&](const Vec& p) {
    double f = st.amb.f(p, t);
    double v = norm * std::exp(-f);
    if (variant == EntropyVariant::Ecker) {
      DiffOps df = differential_ops(st.amb.f, st.amb.g, st.amb.chart, p, t);
      return (tau * df.grad_sq + f - n) * v;
    }
    WeightedQuantities q = weighted_quantities(st.amb, p, t);
    DiffOps dw = differential_ops(st.amb.w, st.amb.g, st.amb.chart, p, t);
    return (tau * (q.R_inf - alpha * dw.grad_sq) + f - n) * v;
  });
  accumulate_boundary(st, t, rep.boundary, [&](const InducedPackage& pkg, double, double) {
    double v = norm * std::exp(-st.amb.f(pkg.x, t));
    if (variant == EntropyVariant::Ecker) return 2.0 * tau * pkg.H * v;
    WeightedQuantities q = weighted_quantities(st.amb, pkg.x, t, &pkg);
    return 2.0 * q.H_inf * v;
  });
  rep.value = rep.interior.total() + rep.boundary.total();
  return rep;
}

// interior integrand of dW/dt for the extended entropy on a closed manifold
inline double entropy_rate_integrand(const AmbientFamily& amb, const Vec& p, double tau,
                                     double t) {
  FlowDefect d = flow_defect(amb, p, t);
  Mat shifted = d.S - d.g / (2.0 * tau);
  double v = std::pow(4.0 * kPi * tau, -amb.n / 2.0) * std::exp(-amb.f(p, t));
  return 2.0 * tau * (tensor_norm2(shifted, d.g_inv) + amb.alpha() * sq(d.theta)) * v;
}

// --- field arithmetic for perturbations ---------------------------------------------------------

inline MetricField metric_plus(const MetricField& g, double eps, const MetricField& v) {
  MetricField out;
  out.eval = [=](const Vec& p, double t) { return Mat(g.eval(p, t) + eps * v.eval(p, t)); };
  if (g.exact_deriv && v.exact_deriv)
    out.exact_deriv = [=](const Vec& p, double t, const MultiIndex& mi) {
      return Mat(g.exact_deriv(p, t, mi) + eps * v.exact_deriv(p, t, mi));
    };
  return out;
}

inline ScalarField scalar_plus(const ScalarField& f, double eps, const ScalarField& h) {
  ScalarField out;
  out.eval = [=](const Vec& p, double t) { return f.eval(p, t) + eps * h.eval(p, t); };
  if (f.exact_deriv && h.exact_deriv)
    out.exact_deriv = [=](const Vec& p, double t, const MultiIndex& mi) {
      return f.exact_deriv(p, t, mi) + eps * h.exact_deriv(p, t, mi);
    };
  return out;
}

}  // namespace flowlab
