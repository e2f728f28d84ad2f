#include "sipfv/flux.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace sipfv {

Prim prim_from_cons(const EosModel& eos, double eps, const double Q[5]) {
  Prim w;
  w.rho = Q[0];
  if (!(w.rho > 0.0)) throw std::runtime_error("prim_from_cons: non-positive density");
  for (int d = 0; d < 3; ++d) w.u[d] = Q[1 + d] / w.rho;
  const double kin = 0.5 * (Q[1] * w.u[0] + Q[2] * w.u[1] + Q[3] * w.u[2]);
  const double rho_e = Q[4] - eps * kin;
  w.e = rho_e / w.rho;
  if (eos.kind() == EosKind::ideal)
    w.p = (eos.gamma() - 1.0) * rho_e;
  else
    w.p = eos.pressure_from_e(w.e, w.rho);
  return w;
}

void physical_flux(int dir, const Prim& w, double eps, const double gradu[3][3],
                   const double gradT[3], double mu, double lambda_th, bool with_heat,
                   double out[5]) {
  const double ud = w.u[dir];
  const double k = 0.5 * (w.u[0] * w.u[0] + w.u[1] * w.u[1] + w.u[2] * w.u[2]);
  out[0] = w.rho * ud;
  out[1] = w.rho * ud * w.u[0];
  out[2] = w.rho * ud * w.u[1];
  out[3] = w.rho * ud * w.u[2];
  out[4] = eps * w.rho * k * ud;

  if (mu > 0.0) {
    const double divu = gradu[0][0] + gradu[1][1] + gradu[2][2];
    double sig[3];  // sigma_{dir,a}
    for (int a = 0; a < 3; ++a)
      sig[a] = mu * (gradu[dir][a] + gradu[a][dir]) - (a == dir ? 2.0 / 3.0 * mu * divu : 0.0);
    for (int a = 0; a < 3; ++a) out[1 + a] -= sig[a];
    double sdotu = sig[0] * w.u[0] + sig[1] * w.u[1] + sig[2] * w.u[2];
    out[4] -= eps * sdotu;
    if (with_heat) out[4] -= lambda_th * gradT[dir];
  }
}

void rusanov_face_flux(const EosModel& eos, double eps, int dir, const double QL[5],
                       const double QR[5], const double gradu[3][3], const double gradT[3],
                       double mu, double lambda_th, bool with_heat, int M, double delta,
                       double Pr, double out[5]) {
  const Prim wl = prim_from_cons(eos, eps, QL);
  const Prim wr = prim_from_cons(eos, eps, QR);
  double fl[5], fr[5];
  physical_flux(dir, wl, eps, gradu, gradT, mu, lambda_th, with_heat, fl);
  physical_flux(dir, wr, eps, gradu, gradT, mu, lambda_th, with_heat, fr);

  const double a = std::max(std::abs(wl.u[dir]), std::abs(wr.u[dir]));
  double diss = a;
  if (mu > 0.0) {
    const double lv = std::max(viscous_eigenvalue(mu, wl.rho, eos.gamma(), Pr),
                               viscous_eigenvalue(mu, wr.rho, eos.gamma(), Pr));
    const double eta = (2.0 * M + 1.0) / (delta * std::sqrt(M_PI / 2.0));
    diss += 2.0 * eta * lv;
  }
  for (int v = 0; v < 5; ++v)
    out[v] = 0.5 * (fl[v] + fr[v]) - 0.5 * diss * (QR[v] - QL[v]);
}

namespace {

struct FaceCtx {
  const Grid* g;
  const State* s;
  const PolyState* ps;
  const ReconData* rd;
  const EosModel* eos;
  const TransportParams* tp;
  double eps;
  bool with_heat;
};

// conserved-variable gradients at a trace node, averaged over both sides
void trace_gradients(const FaceCtx& c, int dir, std::size_t cl, std::size_t cr, int a,
                     int b, double gradQ[3][5]) {
  const NodalBasis& bas = c.rd->basis;
  const int n1 = bas.M + 1;
  const PolyState& ps = *c.ps;
  const int t1 = (dir + 1) % 3, t2 = (dir + 2) % 3;

  auto didx = [&](int pn, int pa, int pb) {
    int ijk[3];
    ijk[dir] = pn;
    ijk[t1] = pa;
    ijk[t2] = pb;
    return ps.didx(ijk[0], ijk[1], ijk[2]);
  };

  for (int v = 0; v < 5; ++v) {
    // normal derivative: trace of d/dxi at xi=1 (left cell) and xi=0 (right)
    double gl = 0.0, gr = 0.0;
    for (int p = 0; p < n1; ++p) {
      gl += bas.deriv(p, 1.0) * ps.at(v, cl, didx(p, a, b));
      gr += bas.deriv(p, 0.0) * ps.at(v, cr, didx(p, a, b));
    }
    gradQ[dir][v] = 0.5 * (gl + gr) / c.g->delta(dir);

    // transverse derivatives from the nodal differentiation matrix
    double tl1 = 0.0, tr1 = 0.0, tl2 = 0.0, tr2 = 0.0;
    for (int m = 0; m < n1; ++m) {
      tl1 += bas.D[a * n1 + m] * ps.at(v, cl, didx(n1 - 1, m, b));
      tr1 += bas.D[a * n1 + m] * ps.at(v, cr, didx(0, m, b));
      tl2 += bas.D[b * n1 + m] * ps.at(v, cl, didx(n1 - 1, a, m));
      tr2 += bas.D[b * n1 + m] * ps.at(v, cr, didx(0, a, m));
    }
    gradQ[t1][v] = 0.5 * (tl1 + tr1) / c.g->delta(t1);
    gradQ[t2][v] = 0.5 * (tl2 + tr2) / c.g->delta(t2);
  }
}

// first-order face gradients: two-point normal difference, transverse from
// averaged central differences of the cell means
void face_gradients_m0(const FaceCtx& c, int dir, const int il[3], const int ir[3],
                       double gradQ[3][5]) {
  const State& s = *c.s;
  const Field* f[5] = {&s.rho, &s.rhou, &s.rhov, &s.rhow, &s.rhoE};
  for (int v = 0; v < 5; ++v) {
    gradQ[dir][v] = ((*f[v])(ir[0], ir[1], ir[2]) - (*f[v])(il[0], il[1], il[2])) /
                    c.g->delta(dir);
    for (int t = 0; t < 3; ++t) {
      if (t == dir) continue;
      int lp[3] = {il[0], il[1], il[2]}, lm[3] = {il[0], il[1], il[2]};
      int rp[3] = {ir[0], ir[1], ir[2]}, rm[3] = {ir[0], ir[1], ir[2]};
      lp[t] += 1; lm[t] -= 1; rp[t] += 1; rm[t] -= 1;
      const double gl = ((*f[v])(lp[0], lp[1], lp[2]) - (*f[v])(lm[0], lm[1], lm[2])) /
                        (2.0 * c.g->delta(t));
      const double gr = ((*f[v])(rp[0], rp[1], rp[2]) - (*f[v])(rm[0], rm[1], rm[2])) /
                        (2.0 * c.g->delta(t));
      gradQ[t][v] = 0.5 * (gl + gr);
    }
  }
}

// velocity and temperature gradients from conserved-variable gradients at a
// face state (chain rule at the averaged face values)
void chain_gradients(const FaceCtx& c, const double Qf[5], const double gradQ[3][5],
                     double gradu[3][3], double gradT[3], bool need_T) {
  const EosModel& eos = *c.eos;
  const double rho = Qf[0];
  double u[3] = {Qf[1] / rho, Qf[2] / rho, Qf[3] / rho};
  for (int d = 0; d < 3; ++d)
    for (int a = 0; a < 3; ++a)
      gradu[d][a] = (gradQ[d][1 + a] - u[a] * gradQ[d][0]) / rho;
  gradT[0] = gradT[1] = gradT[2] = 0.0;
  if (!need_T) return;

  const double kin = 0.5 * (Qf[1] * u[0] + Qf[2] * u[1] + Qf[3] * u[2]);
  const double rho_e = Qf[4] - c.eps * kin;
  if (eos.kind() == EosKind::ideal) {
    const double gm1 = eos.gamma() - 1.0;
    const double p = gm1 * rho_e;
    const double T = p / (eos.R() * rho);
    for (int d = 0; d < 3; ++d) {
      double dkin = 0.0;
      for (int a = 0; a < 3; ++a) dkin += u[a] * gradQ[d][1 + a];
      dkin -= 0.5 * (u[0] * u[0] + u[1] * u[1] + u[2] * u[2]) * gradQ[d][0];
      const double dp = gm1 * (gradQ[d][4] - c.eps * dkin);
      gradT[d] = dp / (eos.R() * rho) - T * gradQ[d][0] / rho;
    }
  } else {
    // T = T(e, rho); de, drho from the conserved gradients
    const double e = rho_e / rho;
    const double T = eos.temperature_from_energy(e, rho);
    const double de_dT = eos.cubic_de_dT(T, rho);
    // dE/drho at fixed T: differentiate cubic_energy in rho numerically
    const double hr = 1e-6 * rho;
    const double de_drho =
        (eos.cubic_energy(T, rho + hr) - eos.cubic_energy(T, rho - hr)) / (2 * hr);
    for (int d = 0; d < 3; ++d) {
      double dkin = 0.0;
      for (int a = 0; a < 3; ++a) dkin += u[a] * gradQ[d][1 + a];
      dkin -= 0.5 * (u[0] * u[0] + u[1] * u[1] + u[2] * u[2]) * gradQ[d][0];
      const double drho_e = gradQ[d][4] - c.eps * dkin;
      const double de = (drho_e - e * gradQ[d][0]) / rho;
      gradT[d] = (de - de_drho * gradQ[d][0]) / de_dT;
    }
  }
}

}  // namespace

void explicit_divergence(const State& s, const PolyState& ps, const ReconData& rd,
                         const EosModel& eos, const TransportParams& tp, double eps,
                         bool include_heat_flux, std::array<Field, 5>& out) {
  const Grid& g = s.grid();
  const int M = rd.basis.M;
  const int n1 = M + 1;
  const bool visc = tp.viscous();
  const double cp = eos.cp();

  for (int v = 0; v < 5; ++v) out[v].fill(0.0);

  FaceCtx ctx{&g, &s, &ps, &rd, &eos, &tp, eps, include_heat_flux && visc};

  // face-flux buffer for one direction, contracted with the flux matrix
  std::vector<double> fbuf;

  for (int dir = 0; dir < 3; ++dir) {
    const int nf[3] = {g.nx() + (dir == 0), g.ny() + (dir == 1), g.nz() + (dir == 2)};
    const std::size_t nfaces = std::size_t(nf[0]) * nf[1] * nf[2];
    fbuf.assign(nfaces * 5, 0.0);
    const double delta = g.delta(dir);
    const int t1 = (dir + 1) % 3, t2 = (dir + 2) % 3;

#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (int fk = 0; fk < nf[2]; ++fk) {
      for (int fj = 0; fj < nf[1]; ++fj)
        for (int fi = 0; fi < nf[0]; ++fi) {
          int il[3] = {fi, fj, fk}, ir[3] = {fi, fj, fk};
          il[dir] -= 1;
          const std::size_t cl = g.idx(il[0], il[1], il[2]);
          const std::size_t cr = g.idx(ir[0], ir[1], ir[2]);
          const std::size_t fidx = (std::size_t(fk) * nf[1] + fj) * nf[0] + fi;
          double* F = &fbuf[fidx * 5];

          double mu_face = 0.0, lam_face = 0.0;
          double gradu[3][3] = {{0}}, gradT[3] = {0};

          if (M == 0) {
            double QL[5], QR[5];
            for (int v = 0; v < 5; ++v) {
              QL[v] = ps.at(v, cl, 0);
              QR[v] = ps.at(v, cr, 0);
            }
            if (visc) {
              double gradQ[3][5];
              face_gradients_m0(ctx, dir, il, ir, gradQ);
              double Qf[5];
              for (int v = 0; v < 5; ++v) Qf[v] = 0.5 * (QL[v] + QR[v]);
              const Prim wf = prim_from_cons(eos, eps, Qf);
              mu_face = tp.sutherland.constant()
                            ? tp.sutherland.mu0
                            : sutherland_viscosity(eos.temperature(wf.p, wf.rho), tp.sutherland);
              lam_face = tp.lambda_th(mu_face, cp);
              chain_gradients(ctx, Qf, gradQ, gradu, gradT, ctx.with_heat);
            }
            rusanov_face_flux(eos, eps, dir, QL, QR, gradu, gradT, mu_face, lam_face,
                              ctx.with_heat, M, delta, tp.Pr, F);
          } else {
            // quadrature-free: contract nodal fluxes with the flux matrix
            for (int b = 0; b < n1; ++b)
              for (int a = 0; a < n1; ++a) {
                int dl[3], drr[3];
                dl[dir] = n1 - 1; drr[dir] = 0;
                dl[t1] = a; drr[t1] = a;
                dl[t2] = b; drr[t2] = b;
                double QL[5], QR[5];
                for (int v = 0; v < 5; ++v) {
                  QL[v] = ps.at(v, cl, ps.didx(dl[0], dl[1], dl[2]));
                  QR[v] = ps.at(v, cr, ps.didx(drr[0], drr[1], drr[2]));
                }
                if (visc) {
                  double gradQ[3][5];
                  trace_gradients(ctx, dir, cl, cr, a, b, gradQ);
                  double Qf[5];
                  for (int v = 0; v < 5; ++v) Qf[v] = 0.5 * (QL[v] + QR[v]);
                  const Prim wf = prim_from_cons(eos, eps, Qf);
                  mu_face = tp.sutherland.constant()
                                ? tp.sutherland.mu0
                                : sutherland_viscosity(eos.temperature(wf.p, wf.rho),
                                                       tp.sutherland);
                  lam_face = tp.lambda_th(mu_face, cp);
                  chain_gradients(ctx, Qf, gradQ, gradu, gradT, ctx.with_heat);
                }
                double fn[5];
                rusanov_face_flux(eos, eps, dir, QL, QR, gradu, gradT, mu_face, lam_face,
                                  ctx.with_heat, M, delta, tp.Pr, fn);
                const double wab = rd.basis.F[a] * rd.basis.F[b];
                for (int v = 0; v < 5; ++v) F[v] += wab * fn[v];
              }
          }
        }
    }

    // difference the face fluxes into the cells
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (int k = 0; k < g.nz(); ++k)
      for (int j = 0; j < g.ny(); ++j)
        for (int i = 0; i < g.nx(); ++i) {
          int lo[3] = {i, j, k}, hi[3] = {i, j, k};
          hi[dir] += 1;
          const std::size_t fl = (std::size_t(lo[2]) * nf[1] + lo[1]) * nf[0] + lo[0];
          const std::size_t fh = (std::size_t(hi[2]) * nf[1] + hi[1]) * nf[0] + hi[0];
          for (int v = 0; v < 5; ++v)
            out[v](i, j, k) += (fbuf[fh * 5 + v] - fbuf[fl * 5 + v]) / delta;
        }
  }
}

}  // namespace sipfv
