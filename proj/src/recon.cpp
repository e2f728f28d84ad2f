#include "sipfv/recon.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

namespace sipfv {

void gauss_legendre_01(int n, std::vector<double>& x, std::vector<double>& w) {
  // nodes/weights on [-1,1], mapped to [0,1]
  static const double x2[] = {-1.0 / std::sqrt(3.0), 1.0 / std::sqrt(3.0)};
  static const double x3[] = {-std::sqrt(3.0 / 5.0), 0.0, std::sqrt(3.0 / 5.0)};
  static const double w3[] = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
  static const double a4 = std::sqrt(3.0 / 7.0 - 2.0 / 7.0 * std::sqrt(6.0 / 5.0));
  static const double b4 = std::sqrt(3.0 / 7.0 + 2.0 / 7.0 * std::sqrt(6.0 / 5.0));
  static const double wa4 = (18.0 + std::sqrt(30.0)) / 36.0;
  static const double wb4 = (18.0 - std::sqrt(30.0)) / 36.0;
  static const double a5 = 1.0 / 3.0 * std::sqrt(5.0 - 2.0 * std::sqrt(10.0 / 7.0));
  static const double b5 = 1.0 / 3.0 * std::sqrt(5.0 + 2.0 * std::sqrt(10.0 / 7.0));
  static const double wa5 = (322.0 + 13.0 * std::sqrt(70.0)) / 900.0;
  static const double wb5 = (322.0 - 13.0 * std::sqrt(70.0)) / 900.0;

  std::vector<double> xr, wr;
  switch (n) {
    case 1: xr = {0.0}; wr = {2.0}; break;
    case 2: xr = {x2[0], x2[1]}; wr = {1.0, 1.0}; break;
    case 3: xr = {x3[0], x3[1], x3[2]}; wr = {w3[0], w3[1], w3[2]}; break;
    case 4: xr = {-b4, -a4, a4, b4}; wr = {wb4, wa4, wa4, wb4}; break;
    case 5: xr = {-b5, -a5, 0.0, a5, b5}; wr = {wb5, wa5, 128.0 / 225.0, wa5, wb5}; break;
    default: throw std::invalid_argument("gauss_legendre_01: n must be 1..5");
  }
  x.resize(n);
  w.resize(n);
  for (int i = 0; i < n; ++i) {
    x[i] = 0.5 * (xr[i] + 1.0);
    w[i] = 0.5 * wr[i];
  }
}

double NodalBasis::eval(int l, double xi) const {
  double v = 0.0;
  for (int k = int(coef[l].size()) - 1; k >= 0; --k) v = v * xi + coef[l][k];
  return v;
}

double NodalBasis::deriv(int l, double xi, int order) const {
  const int n = int(coef[l].size());
  double v = 0.0;
  for (int k = n - 1; k >= order; --k) {
    double c = coef[l][k];
    for (int a = 0; a < order; ++a) c *= (k - a);
    v = v * xi + c;
  }
  return v;
}

NodalBasis build_basis(int M) {
  if (M < 0 || M > 2) throw std::invalid_argument("build_basis: supported degrees are 0..2");
  NodalBasis b;
  b.M = M;
  if (M == 0)
    b.nodes = {0.5};
  else if (M == 1)
    b.nodes = {0.0, 1.0};
  else
    b.nodes = {0.0, 0.5, 1.0};

  const int n = M + 1;
  // Lagrange basis in monomial form via Vandermonde inverse
  Eigen::MatrixXd V(n, n);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) V(i, k) = std::pow(b.nodes[i], k);
  Eigen::MatrixXd Vi = V.inverse();
  b.coef.assign(n, std::vector<double>(n, 0.0));
  for (int l = 0; l < n; ++l)
    for (int k = 0; k < n; ++k) b.coef[l][k] = Vi(k, l);

  b.F.resize(n);
  for (int l = 0; l < n; ++l) {
    double s = 0.0;
    for (int k = 0; k < n; ++k) s += b.coef[l][k] / (k + 1);
    b.F[l] = s;
  }
  b.D.resize(n * n);
  for (int a = 0; a < n; ++a)
    for (int l = 0; l < n; ++l) b.D[a * n + l] = b.deriv(l, b.nodes[a]);
  return b;
}

namespace {

// integral of basis function l over the shifted unit interval [d, d+1]
double basis_integral(const NodalBasis& b, int l, double d) {
  double s = 0.0;
  for (int k = 0; k < int(b.coef[l].size()); ++k)
    s += b.coef[l][k] / (k + 1) * (std::pow(d + 1.0, k + 1) - std::pow(d, k + 1));
  return s;
}

// Constrained least squares: minimize ||A w - q|| subject to exact integral
// conservation on the center cell (row c of A). Realized by eliminating one
// DOF through the constraint. Returns the matrix mapping q -> w.
Eigen::MatrixXd clsq_matrix(const Eigen::MatrixXd& A, int c) {
  const int ns = int(A.rows()), nd = int(A.cols());
  Eigen::RowVectorXd ac = A.row(c);
  int piv = 0;
  for (int p = 1; p < nd; ++p)
    if (std::abs(ac(p)) > std::abs(ac(piv))) piv = p;

  // reduced system over the remaining DOFs and rows
  Eigen::MatrixXd Ar(ns - 1, nd - 1);
  Eigen::MatrixXd Br(ns - 1, ns);  // rhs contribution of each q entry
  int rr = 0;
  for (int d = 0; d < ns; ++d) {
    if (d == c) continue;
    int cc = 0;
    for (int p = 0; p < nd; ++p) {
      if (p == piv) continue;
      Ar(rr, cc) = A(d, p) - A(d, piv) * ac(p) / ac(piv);
      ++cc;
    }
    Br.row(rr).setZero();
    Br(rr, d) = 1.0;
    Br(rr, c) = -A(d, piv) / ac(piv);
    ++rr;
  }
  Eigen::MatrixXd Wr;
  if (ns - 1 == nd - 1)
    Wr = Ar.fullPivLu().solve(Br);
  else
    Wr = (Ar.transpose() * Ar).ldlt().solve(Ar.transpose() * Br);

  // back-substitute the pivot DOF
  Eigen::MatrixXd W(nd, ns);
  int cc = 0;
  for (int p = 0; p < nd; ++p) {
    if (p == piv) continue;
    W.row(p) = Wr.row(cc++);
  }
  Eigen::RowVectorXd wpiv = Eigen::RowVectorXd::Zero(ns);
  wpiv(c) = 1.0 / ac(piv);
  for (int p = 0; p < nd; ++p) {
    if (p == piv) continue;
    wpiv -= ac(p) / ac(piv) * W.row(p);
  }
  W.row(piv) = wpiv;
  return W;
}

}  // namespace

ReconData build_recon_matrices(int M) {
  ReconData rd;
  rd.basis = build_basis(M);
  const int nd = M + 1;
  rd.L = (M % 2 == 0) ? M / 2 : (M + 1) / 2;
  const int ns = 2 * rd.L + 1;

  const double lam_raw0 = 200.0, lam_raw1 = 1.0, lam_raw2 = 1.0;
  const double lam_sum = lam_raw0 + lam_raw1 + lam_raw2;
  rd.lam0 = lam_raw0 / lam_sum;
  rd.lam1 = lam_raw1 / lam_sum;
  rd.lam2 = lam_raw2 / lam_sum;

  // central stencil matrix
  {
    Eigen::MatrixXd A(ns, nd);
    for (int s = 0; s < ns; ++s)
      for (int p = 0; p < nd; ++p) A(s, p) = basis_integral(rd.basis, p, double(s - rd.L));
    Eigen::MatrixXd W = (M == 0) ? Eigen::MatrixXd::Ones(1, 1) : clsq_matrix(A, rd.L);
    rd.C0.resize(nd * ns);
    for (int p = 0; p < nd; ++p)
      for (int s = 0; s < ns; ++s) rd.C0[p * ns + s] = W(p, s);
  }

  if (M >= 1) {
    // one-sided degree-1 polynomials, built on the M=1 basis and prolonged to
    // the degree-M nodes by evaluation
    NodalBasis lin = build_basis(1);
    Eigen::MatrixXd P(nd, 2);
    for (int a = 0; a < nd; ++a) {
      P(a, 0) = lin.eval(0, rd.basis.nodes[a]);
      P(a, 1) = lin.eval(1, rd.basis.nodes[a]);
    }
    auto side = [&](double off) {
      Eigen::MatrixXd A(2, 2);
      for (int s = 0; s < 2; ++s)
        for (int p = 0; p < 2; ++p) A(s, p) = basis_integral(lin, p, off + s);
      Eigen::MatrixXd W = P * A.inverse();
      return W;
    };
    Eigen::MatrixXd W1 = side(-1.0), W2 = side(0.0);
    rd.S1.resize(nd * 2);
    rd.S2.resize(nd * 2);
    for (int p = 0; p < nd; ++p)
      for (int s = 0; s < 2; ++s) {
        rd.S1[p * 2 + s] = W1(p, s);
        rd.S2[p * 2 + s] = W2(p, s);
      }
  }

  // oscillation matrix Sigma_lm = sum_alpha int psi_l^(a) psi_m^(a)
  rd.Sigma.assign(nd * nd, 0.0);
  if (M >= 1) {
    std::vector<double> qx, qw;
    gauss_legendre_01(5, qx, qw);
    for (int alpha = 1; alpha <= M; ++alpha)
      for (int l = 0; l < nd; ++l)
        for (int m = 0; m < nd; ++m) {
          double s = 0.0;
          for (std::size_t q = 0; q < qx.size(); ++q)
            s += qw[q] * rd.basis.deriv(l, qx[q], alpha) * rd.basis.deriv(m, qx[q], alpha);
          rd.Sigma[l * nd + m] += s;
        }
  }
  return rd;
}

double oscillation_indicator(const ReconData& rd, const double* w) {
  const int nd = rd.ndof1d();
  double s = 0.0;
  for (int l = 0; l < nd; ++l) {
    double row = 0.0;
    for (int m = 0; m < nd; ++m) row += rd.Sigma[l * nd + m] * w[m];
    s += w[l] * row;
  }
  return s;
}

void cweno_1d(const ReconData& rd, const double* q, double* out) {
  const int M = rd.basis.M;
  const int nd = M + 1;
  if (M == 0) {
    out[0] = q[0];
    return;
  }
  const int ns = rd.nstencil();
  const int L = rd.L;
  double w0[3], w1[3], w2[3], wt0[3];
  for (int p = 0; p < nd; ++p) {
    double s = 0.0;
    for (int c = 0; c < ns; ++c) s += rd.C0[p * ns + c] * q[c];
    w0[p] = s;
    w1[p] = rd.S1[p * 2] * q[L - 1] + rd.S1[p * 2 + 1] * q[L];
    w2[p] = rd.S2[p * 2] * q[L] + rd.S2[p * 2 + 1] * q[L + 1];
    wt0[p] = (w0[p] - rd.lam1 * w1[p] - rd.lam2 * w2[p]) / rd.lam0;
  }
  const double sig0 = oscillation_indicator(rd, w0);
  const double d1 = w1[nd - 1] - w1[0], d2 = w2[nd - 1] - w2[0];
  const double sig1 = d1 * d1, sig2 = d2 * d2;

  auto wgt = [&](double lam, double sig) {
    double d = sig + rd.eps;
    double d2_ = d * d;
    return lam / (d2_ * d2_);
  };
  double om0 = wgt(rd.lam0, sig0), om1 = wgt(rd.lam1, sig1), om2 = wgt(rd.lam2, sig2);
  const double osum = om0 + om1 + om2;
  om0 /= osum;
  om1 /= osum;
  om2 /= osum;
  for (int p = 0; p < nd; ++p) out[p] = om0 * wt0[p] + om1 * w1[p] + om2 * w2[p];
}

double PolyState::eval(const NodalBasis& basis, int var, std::size_t cell, double xi,
                       double eta, double zeta) const {
  const int n1_ = M + 1;
  double px[3], py[3], pz[3];
  for (int a = 0; a < n1_; ++a) {
    px[a] = basis.eval(a, xi);
    py[a] = basis.eval(a, eta);
    pz[a] = basis.eval(a, zeta);
  }
  double s = 0.0;
  for (int r = 0; r < n1_; ++r)
    for (int q = 0; q < n1_; ++q)
      for (int p = 0; p < n1_; ++p)
        s += at(var, cell, didx(p, q, r)) * px[p] * py[q] * pz[r];
  return s;
}

void reconstruct_state_3d(const State& s, const ReconData& rd, PolyState& out) {
  const Grid& g = s.grid();
  const int M = rd.basis.M;
  const int n1 = M + 1;
  const int L = rd.L;
  const int ng = g.ng();
  const int nx = g.nx(), ny = g.ny(), nz = g.nz();

  out.g = &g;
  out.M = M;
  out.ndof = n1 * n1 * n1;
  const std::size_t ntot = g.total_count();
  for (int v = 0; v < 5; ++v) out.dofs[v].assign(ntot * out.ndof, 0.0);

  const Field* fields[5] = {&s.rho, &s.rhou, &s.rhov, &s.rhow, &s.rhoE};

  // required halos per stage (inner box grows toward the data)
  const int hz2 = std::min(ng, L + 2), hy2 = std::min(ng, L + 2);
  const int h1 = 1;  // final halo carried through

  // stage buffers: x-dofs and xy-dofs over the full ghosted box
  std::vector<double> xd(ntot * n1), yd(ntot * n1 * n1);

  for (int v = 0; v < 5; ++v) {
    const Field& f = *fields[v];
    // x sweep
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (int k = -hz2; k < nz + hz2; ++k) {
      double q[5], dof[3];
      for (int j = -hy2; j < ny + hy2; ++j)
        for (int i = -h1; i < nx + h1; ++i) {
          for (int c = 0; c < 2 * L + 1; ++c) q[c] = f(i + c - L, j, k);
          cweno_1d(rd, q, dof);
          const std::size_t cell = g.idx(i, j, k);
          for (int p = 0; p < n1; ++p) xd[cell * n1 + p] = dof[p];
        }
    }
    // y sweep
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (int k = -hz2; k < nz + hz2; ++k) {
      double q[5], dof[3];
      for (int j = -h1; j < ny + h1; ++j)
        for (int i = -h1; i < nx + h1; ++i) {
          const std::size_t cell = g.idx(i, j, k);
          for (int p = 0; p < n1; ++p) {
            for (int c = 0; c < 2 * L + 1; ++c)
              q[c] = xd[g.idx(i, j + c - L, k) * n1 + p];
            cweno_1d(rd, q, dof);
            for (int qq = 0; qq < n1; ++qq) yd[(cell * n1 + qq) * n1 + p] = dof[qq];
          }
        }
    }
    // z sweep
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (int k = -h1; k < nz + h1; ++k) {
      double q[5], dof[3];
      for (int j = -h1; j < ny + h1; ++j)
        for (int i = -h1; i < nx + h1; ++i) {
          const std::size_t cell = g.idx(i, j, k);
          for (int p = 0; p < n1; ++p)
            for (int qq = 0; qq < n1; ++qq) {
              for (int c = 0; c < 2 * L + 1; ++c)
                q[c] = yd[(g.idx(i, j, k + c - L) * n1 + qq) * n1 + p];
              cweno_1d(rd, q, dof);
              for (int rr = 0; rr < n1; ++rr)
                out.at(v, cell, out.didx(p, qq, rr)) = dof[rr];
            }
        }
    }
  }
}

double poly_cell_average(const ReconData& rd, const PolyState& ps, int var, std::size_t cell) {
  const int n1 = rd.ndof1d();
  double s = 0.0;
  for (int r = 0; r < n1; ++r)
    for (int q = 0; q < n1; ++q)
      for (int p = 0; p < n1; ++p)
        s += rd.basis.F[p] * rd.basis.F[q] * rd.basis.F[r] *
             ps.at(var, cell, ps.didx(p, q, r));
  return s;
}

}  // namespace sipfv
