#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "sipfv/grid.hpp"

namespace sipfv {

// Gauss-Legendre nodes/weights on [0,1], n = 1..5 points.
void gauss_legendre_01(int n, std::vector<double>& nodes, std::vector<double>& weights);

// Lagrange nodal basis of degree M on the Gauss-Lobatto points of [0,1].
struct NodalBasis {
  int M = 0;
  std::vector<double> nodes;              // M+1 points in [0,1]
  std::vector<double> F;                  // integrals of each psi over [0,1]
  std::vector<std::vector<double>> coef;  // monomial coefficients per psi
  std::vector<double> D;                  // D[a*(M+1)+b] = psi_b'(node_a)

  double eval(int l, double xi) const;
  double deriv(int l, double xi, int order = 1) const;
};

NodalBasis build_basis(int M);

// Precomputed reconstruction data for one degree: central / one-sided stencil
// matrices (stencil cell averages -> nodal DOFs), oscillation matrix and the
// CWENO linear weights lambda_0 = 200/202, lambda_1 = lambda_2 = 1/202.
struct ReconData {
  NodalBasis basis;
  int L = 0;                   // central stencil half width
  std::vector<double> C0;      // (M+1) x (2L+1)
  std::vector<double> S1, S2;  // (M+1) x 2, prolonged to the degree-M nodes
  std::vector<double> Sigma;   // (M+1)^2
  double lam0 = 1.0, lam1 = 0.0, lam2 = 0.0;
  double eps = 1e-14;
  int r = 4;

  int nstencil() const { return 2 * L + 1; }
  int ndof1d() const { return basis.M + 1; }
};

ReconData build_recon_matrices(int M);

// sigma_s = Sigma_lm w_l w_m for DOFs on the degree-M basis
double oscillation_indicator(const ReconData& rd, const double* w);

// One 1D CWENO reconstruction: q points at the 2L+1 central-stencil cell
// averages (q[L] is the cell under reconstruction), out receives M+1 nodal
// DOFs.
void cweno_1d(const ReconData& rd, const double* q, double* out);

// Tensor-product nodal DOFs of the reconstructed conserved variables, stored
// for interior cells plus one ghost layer (needed for boundary face fluxes).
struct PolyState {
  const Grid* g = nullptr;
  int M = 0;
  int ndof = 1;  // (M+1)^3
  std::array<std::vector<double>, 5> dofs;

  int n1() const { return M + 1; }
  int didx(int p, int q, int r) const { return (r * (M + 1) + q) * (M + 1) + p; }
  double& at(int var, std::size_t cell, int d) { return dofs[var][cell * ndof + d]; }
  double at(int var, std::size_t cell, int d) const { return dofs[var][cell * ndof + d]; }

  // evaluate variable at reference coordinates (xi, eta, zeta) of a cell
  double eval(const NodalBasis& basis, int var, std::size_t cell, double xi, double eta,
              double zeta) const;
};

// Dimension-by-dimension sweep x -> y -> z. Ghosts of s must be filled.
void reconstruct_state_3d(const State& s, const ReconData& rd, PolyState& out);

// Convenience: cell average of the tensor polynomial (used by conservation
// checks): sum_pqr F_p F_q F_r w_pqr.
double poly_cell_average(const ReconData& rd, const PolyState& ps, int var, std::size_t cell);

}  // namespace sipfv
