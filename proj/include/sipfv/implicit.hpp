#pragma once

#include <Eigen/Dense>
#include <array>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "sipfv/eos.hpp"
#include "sipfv/grid.hpp"

namespace sipfv {

enum class PrecondKind { none, jacobi, fdm };
PrecondKind precond_from_string(const std::string& s);

struct ImplicitConfig {
  int fd_order = 4;  // 2 | 4
  double linsolve_tol = 1e-12;
  double linsolve_abstol = 1e-14;
  int linsolve_maxiter = 1000;
  int gmres_restart = 60;
  PrecondKind precond = PrecondKind::none;
  double newton_tol = 1e-10;
  int newton_maxiter = 50;
  bool implicit_heat_flux = true;
};

// --- compact finite difference operators -----------------------------------

// central first derivative, order 2 or 4; ghosts of p must be filled
void grad_p_fd(const Field& p, int dir, int order, Field& out);

// d/dx (h dp/dx) with the compact Lagrange stencils; accumulates into out
void div_h_grad_p_dir(const Field& h, const Field& p, int dir, int order, Field& out);

// sum over the three directions (out is overwritten)
void div_h_grad_p(const Field& h, const Field& p, int order, Field& out);

// central divergence of the product field h*q in one direction; accumulates
void div_central_dir(const Field& h, const Field& q, int dir, int order, Field& out);

// --- pressure system --------------------------------------------------------

struct SolveStats {
  int lin_iters = 0;      // total Krylov iterations
  int newton_iters = 0;   // outer Newton iterations (1 for the linear path)
  double residual = 0.0;  // final linear residual
  bool converged = false;
};

// 1D eigendecompositions of the constant-coefficient compact operator, used
// by the tensor-product (fast diagonalization) preconditioner
struct FdmCache {
  struct Entry {
    Eigen::MatrixXd V;
    Eigen::VectorXd lam;
  };
  std::map<std::tuple<int, int, int, int, long long>, Entry> entries;
  const Entry& get(int n, int order, FaceBc lo, FaceBc hi, double delta);
};

// Coefficients and fields of the discrete pressure wave equation
//   eps*rho_new*e(p) - eps*(dt/2) u_adv . grad p - dt^2 div(h grad p)
//     - eps*dt div(lambda grad(p/(R rho_new))) = eps * b.
// All referenced fields must outlive the solve and have filled ghosts.
struct PressureSystem {
  const Grid* g = nullptr;
  const BcSpec* bc = nullptr;
  const EosModel* eos = nullptr;
  double eps = 1.0;
  double dt_eff = 0.0;
  const Field* rho_new = nullptr;
  const Field* h = nullptr;
  const Field* u_adv[3] = {nullptr, nullptr, nullptr};
  bool heat_on = false;
  const Field* lambda_f = nullptr;  // thermal conductivity (per cell)
  const Field* Tcoef = nullptr;     // 1/(R rho_new)
  ImplicitConfig cfg;
  FdmCache* fdm = nullptr;

  // linear part R(p) (everything except the EOS term); dirichlet ghosts of
  // p_work are zeroed, so this is the homogeneous operator
  void apply_R(Field& p_work, Field& out) const;
  // full operator diag .* p + R(p) where diag holds d(eps rho e)/dp per cell
  void apply_system(const Field& diag, Field& p_work, Field& out) const;
  // affine boundary contribution: R applied to the frozen dirichlet ghosts
  // with zero interior (empty result when no dirichlet faces are present)
  void boundary_shift(const Field& p_frozen_ghosts, Field& out) const;
};

// b_i = (rhoE)*_i - eps/2 u_adv.(rhou)*_i - dt_eff div(h (rhou)*)_i
void assemble_pressure_rhs(const PressureSystem& sys, const Field& rhoE_star,
                           const std::array<const Field*, 3>& rhou_star, Field& b);

// Linear solve (ideal gas). p carries the warm start and frozen dirichlet
// ghosts on entry; on exit it holds the solution with refreshed ghosts.
SolveStats solve_pressure_linear(const PressureSystem& sys, const Field& b, Field& p);

// Nested Newton for a nonlinear EOS (also valid for the ideal gas, where it
// converges in one step).
SolveStats solve_pressure_nonlinear(const PressureSystem& sys, const Field& b, Field& p);

// h_i = rho_old_i h_eos(p_old_i, rho_old_i) / rho_new_i
void conservative_enthalpy(const EosModel& eos, const Field& rho_old, const Field& p_old,
                           const Field& rho_new, Field& h);

// (rhou)_d^{n+1} = (rhou)*_d - dt_eff/eps * grad_d p
void update_momentum(const Field& rhou_star, const Field& p, double eps, double dt_eff,
                     int dir, int order, Field& out);

// Thermodynamically compatible form (rhoE = rho e(p) + eps/2 u_adv.(rhou))
void update_energy_eos(const EosModel& eos, const Field& rho_new, const Field& p,
                       const std::array<const Field*, 3>& u_adv,
                       const std::array<const Field*, 3>& rhou_new, double eps, Field& out);

// Conservative flux form (rhoE)* - dt div(h (rhou)^{n+1}) [+ dt div(lambda
// grad T^{n+1}) when the heat flux is implicit]
void update_energy_flux(const PressureSystem& sys, const Field& rhoE_star,
                        const std::array<const Field*, 3>& rhou_new, const Field& p,
                        Field& out);

}  // namespace sipfv
