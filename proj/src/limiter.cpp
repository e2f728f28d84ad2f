#include "sipfv/limiter.hpp"

#include <algorithm>
#include <cmath>

namespace sipfv {

void divergence_u(const State& s, Field& out) {
  const Grid& g = s.grid();
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (int k = 0; k < g.nz(); ++k)
    for (int j = 0; j < g.ny(); ++j)
      for (int i = 0; i < g.nx(); ++i) {
        const double ux = s.rhou(i + 1, j, k) / s.rho(i + 1, j, k) -
                          s.rhou(i - 1, j, k) / s.rho(i - 1, j, k);
        const double vy = s.rhov(i, j + 1, k) / s.rho(i, j + 1, k) -
                          s.rhov(i, j - 1, k) / s.rho(i, j - 1, k);
        const double wz = s.rhow(i, j, k + 1) / s.rho(i, j, k + 1) -
                          s.rhow(i, j, k - 1) / s.rho(i, j, k - 1);
        out(i, j, k) = ux / g.dx() + vy / g.dy() + wz / g.dz();
      }
}

double flattener(const State& s, const EosModel& eos, double eps, double k1, Field& chi) {
  const Grid& g = s.grid();
  Field divu(g);
  divergence_u(s, divu);

  // sound speed per cell, rescaled by 1/sqrt(eps); valid one ghost layer deep
  Field cs(g);
  const double sq_eps = std::sqrt(eps);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (int k = -1; k < g.nz() + 1; ++k)
    for (int j = -1; j < g.ny() + 1; ++j)
      for (int i = -1; i < g.nx() + 1; ++i) {
        double Q[5] = {s.rho(i, j, k), s.rhou(i, j, k), s.rhov(i, j, k),
                       s.rhow(i, j, k), s.rhoE(i, j, k)};
        const double kin = 0.5 * (Q[1] * Q[1] + Q[2] * Q[2] + Q[3] * Q[3]) / Q[0];
        const double rho_e = Q[4] - eps * kin;
        double p;
        if (eos.kind() == EosKind::ideal)
          p = (eos.gamma() - 1.0) * rho_e;
        else
          p = eos.pressure_from_e(rho_e / Q[0], Q[0]);
        cs(i, j, k) = eos.sound_speed(p, Q[0]) / sq_eps;
      }

  Field raw(g);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (int k = 0; k < g.nz(); ++k)
    for (int j = 0; j < g.ny(); ++j)
      for (int i = 0; i < g.nx(); ++i) {
        double cmin = cs(i, j, k);
        cmin = std::min(cmin, cs(i - 1, j, k));
        cmin = std::min(cmin, cs(i + 1, j, k));
        cmin = std::min(cmin, cs(i, j - 1, k));
        cmin = std::min(cmin, cs(i, j + 1, k));
        cmin = std::min(cmin, cs(i, j, k - 1));
        cmin = std::min(cmin, cs(i, j, k + 1));
        const double d = divu(i, j, k);
        raw(i, j, k) =
            std::min(1.0, std::max(0.0, -(d + k1 * cmin) / (k1 * cmin)));
      }

  // pre-shock extension: one max-propagation sweep onto compressing cells
  double chimax = 0.0;
  for (int k = 0; k < g.nz(); ++k)
    for (int j = 0; j < g.ny(); ++j)
      for (int i = 0; i < g.nx(); ++i) {
        double c = raw(i, j, k);
        if (divu(i, j, k) < 0.0) {
          auto nb = [&](int a, int b, int cc) {
            if (a < 0 || a >= g.nx() || b < 0 || b >= g.ny() || cc < 0 || cc >= g.nz())
              return 0.0;
            return raw(a, b, cc);
          };
          c = std::max({c, nb(i - 1, j, k), nb(i + 1, j, k), nb(i, j - 1, k),
                        nb(i, j + 1, k), nb(i, j, k - 1), nb(i, j, k + 1)});
        }
        chi(i, j, k) = c;
        chimax = std::max(chimax, c);
      }
  return chimax;
}

double blend(State& high, const State& low, const Field& chi, const EosModel& eos,
             double eps) {
  const Grid& g = high.grid();
  double defect = 0.0;
  for (int k = 0; k < g.nz(); ++k)
    for (int j = 0; j < g.ny(); ++j)
      for (int i = 0; i < g.nx(); ++i) {
        const double c = chi(i, j, k);
        if (c == 0.0) continue;
        defect += c * (low.rho(i, j, k) - high.rho(i, j, k));
        high.rho(i, j, k) = c * low.rho(i, j, k) + (1.0 - c) * high.rho(i, j, k);
        high.rhou(i, j, k) = c * low.rhou(i, j, k) + (1.0 - c) * high.rhou(i, j, k);
        high.rhov(i, j, k) = c * low.rhov(i, j, k) + (1.0 - c) * high.rhov(i, j, k);
        high.rhow(i, j, k) = c * low.rhow(i, j, k) + (1.0 - c) * high.rhow(i, j, k);
        high.rhoE(i, j, k) = c * low.rhoE(i, j, k) + (1.0 - c) * high.rhoE(i, j, k);
        // pressure cache re-derived from the blended conserved state
        const double kin = 0.5 *
                           (high.rhou(i, j, k) * high.rhou(i, j, k) +
                            high.rhov(i, j, k) * high.rhov(i, j, k) +
                            high.rhow(i, j, k) * high.rhow(i, j, k)) /
                           high.rho(i, j, k);
        const double rho_e = high.rhoE(i, j, k) - eps * kin;
        high.p(i, j, k) = (eos.kind() == EosKind::ideal)
                              ? (eos.gamma() - 1.0) * rho_e
                              : eos.pressure_from_e(rho_e / high.rho(i, j, k),
                                                    high.rho(i, j, k));
      }
  return defect * g.cell_volume();
}

}  // namespace sipfv
