#pragma once

#include <array>

#include "sipfv/eos.hpp"
#include "sipfv/grid.hpp"
#include "sipfv/recon.hpp"

namespace sipfv {

// Primitive mirror of a conserved vector under the rescaled energy
// rhoE = rho e + eps * rho |u|^2 / 2.
struct Prim {
  double rho = 0, u[3] = {0, 0, 0}, p = 0, e = 0;
};

Prim prim_from_cons(const EosModel& eos, double eps, const double Q[5]);

struct TransportParams {
  SutherlandParams sutherland;
  double Pr = 0.75;
  bool viscous() const { return sutherland.mu0 > 0.0; }
  double lambda_th(double mu, double cp) const { return mu * cp / Pr; }
};

// max eigenvalue of the viscous sub-system
inline double viscous_eigenvalue(double mu, double rho, double gamma, double Pr) {
  if (mu <= 0.0) return 0.0;
  const double a = 4.0 / 3.0 * mu / rho;
  const double b = gamma * mu / (Pr * rho);
  return a > b ? a : b;
}

// Explicit split flux in direction dir: convective (rho u_d; rho u_d u;
// eps rho k u_d) minus viscous (0; sigma_d.; eps (sigma u)_d + lambda dT_d).
// Pressure and enthalpy transport are excluded (implicit part).
void physical_flux(int dir, const Prim& w, double eps, const double gradu[3][3],
                   const double gradT[3], double mu, double lambda_th, bool with_heat,
                   double out[5]);

// Rusanov flux with material-speed dissipation a = max(|u_d|_L, |u_d|_R) and
// the viscous penalty 2 eta lambda_v, eta = (2M+1)/(Delta sqrt(pi/2)).
void rusanov_face_flux(const EosModel& eos, double eps, int dir, const double QL[5],
                       const double QR[5], const double gradu[3][3], const double gradT[3],
                       double mu, double lambda_th, bool with_heat, int M, double delta,
                       double Pr, double out[5]);

// Quadrature-free finite volume divergence of the explicit fluxes:
// out[v] = (1/|C|) sum_faces F_l f_hat contributions, so that
// m* = m_base - dt_eff * out. Heat flux is included only when
// include_heat_flux is set (ideal gas moves it to the pressure system).
void explicit_divergence(const State& s, const PolyState& ps, const ReconData& rd,
                         const EosModel& eos, const TransportParams& tp, double eps,
                         bool include_heat_flux, std::array<Field, 5>& out);

}  // namespace sipfv
