#include "sipfv/implicit.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <stdexcept>

namespace sipfv {

PrecondKind precond_from_string(const std::string& s) {
  if (s == "none") return PrecondKind::none;
  if (s == "jacobi") return PrecondKind::jacobi;
  if (s == "fdm") return PrecondKind::fdm;
  throw std::invalid_argument("unknown preconditioner: " + s);
}

namespace {

// compact d/dx(h dp/dx) stencils: row = offset of h, col = offset of p
const double M2[3][3] = {{0.75, -1.0, 0.25}, {0, 0, 0}, {0.25, -1.0, 0.75}};
const double M4[5][5] = {
    {-25.0 / 144, 1.0 / 3, -0.25, 1.0 / 9, -1.0 / 48},
    {1.0 / 6, 5.0 / 9, -1.0, 1.0 / 3, -1.0 / 18},
    {0, 0, 0, 0, 0},
    {-1.0 / 18, 1.0 / 3, -1.0, 5.0 / 9, 1.0 / 6},
    {-1.0 / 48, 1.0 / 9, -0.25, 1.0 / 3, -25.0 / 144}};

}  // namespace

void grad_p_fd(const Field& p, int dir, int order, Field& out) {
  const Grid& g = p.grid();
  const std::size_t st = g.stride(dir);
  const double d = g.delta(dir);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (int k = 0; k < g.nz(); ++k)
    for (int j = 0; j < g.ny(); ++j)
      for (int i = 0; i < g.nx(); ++i) {
        const std::size_t c = g.idx(i, j, k);
        if (order == 2)
          out[c] = (p[c + st] - p[c - st]) / (2.0 * d);
        else
          out[c] = (-p[c + 2 * st] + 8.0 * p[c + st] - 8.0 * p[c - st] + p[c - 2 * st]) /
                   (12.0 * d);
      }
}

void div_h_grad_p_dir(const Field& h, const Field& p, int dir, int order, Field& out) {
  const Grid& g = p.grid();
  const std::size_t st = g.stride(dir);
  const double inv_d2 = 1.0 / (g.delta(dir) * g.delta(dir));
  const int w = (order == 2) ? 1 : 2;
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (int k = 0; k < g.nz(); ++k)
    for (int j = 0; j < g.ny(); ++j)
      for (int i = 0; i < g.nx(); ++i) {
        const std::size_t c = g.idx(i, j, k);
        double acc = 0.0;
        for (int a = -w; a <= w; ++a) {
          const double hv = h[c + a * std::ptrdiff_t(st)];
          if (hv == 0.0) continue;
          double row = 0.0;
          for (int b = -w; b <= w; ++b) {
            const double m = (order == 2) ? M2[a + 1][b + 1] : M4[a + 2][b + 2];
            if (m != 0.0) row += m * p[c + b * std::ptrdiff_t(st)];
          }
          acc += hv * row;
        }
        out[c] += inv_d2 * acc;
      }
}

void div_h_grad_p(const Field& h, const Field& p, int order, Field& out) {
  out.fill(0.0);
  for (int dir = 0; dir < 3; ++dir) div_h_grad_p_dir(h, p, dir, order, out);
}

void div_central_dir(const Field& h, const Field& q, int dir, int order, Field& out) {
  const Grid& g = q.grid();
  const std::size_t st = g.stride(dir);
  const double d = g.delta(dir);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (int k = 0; k < g.nz(); ++k)
    for (int j = 0; j < g.ny(); ++j)
      for (int i = 0; i < g.nx(); ++i) {
        const std::size_t c = g.idx(i, j, k);
        if (order == 2)
          out[c] += (h[c + st] * q[c + st] - h[c - st] * q[c - st]) / (2.0 * d);
        else
          out[c] += (-h[c + 2 * st] * q[c + 2 * st] + 8.0 * h[c + st] * q[c + st] -
                     8.0 * h[c - st] * q[c - st] + h[c - 2 * st] * q[c - 2 * st]) /
                    (12.0 * d);
      }
}

// --- pressure operator -------------------------------------------------------

void PressureSystem::apply_R(Field& p_work, Field& out) const {
  fill_ghosts(p_work, *bc, DirichletMode::zero);
  const Grid& gr = *g;
  out.fill(0.0);
  for (int dir = 0; dir < 3; ++dir) div_h_grad_p_dir(*h, p_work, dir, cfg.fd_order, out);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (int k = 0; k < gr.nz(); ++k)
    for (int j = 0; j < gr.ny(); ++j)
      for (int i = 0; i < gr.nx(); ++i) {
        const std::size_t c = gr.idx(i, j, k);
        out[c] *= -dt_eff * dt_eff;
      }

  // advective part -eps*(dt/2) u . grad p
  Field gp(gr);
  for (int dir = 0; dir < 3; ++dir) {
    grad_p_fd(p_work, dir, cfg.fd_order, gp);
    const Field& ua = *u_adv[dir];
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (int k = 0; k < gr.nz(); ++k)
      for (int j = 0; j < gr.ny(); ++j)
        for (int i = 0; i < gr.nx(); ++i) {
          const std::size_t c = gr.idx(i, j, k);
          out[c] -= eps * 0.5 * dt_eff * ua[c] * gp[c];
        }
  }

  if (heat_on) {
    // -eps*dt * div(lambda grad(T)), T = p / (R rho_new) handled via Tcoef
    Field T(gr);
    const Field& tc = *Tcoef;
    const double* pw = p_work.data();
    double* Tv = T.data();
    for (std::size_t n = 0; n < T.size(); ++n) Tv[n] = tc[n] * pw[n];
    Field lt(gr);
    div_h_grad_p(*lambda_f, T, cfg.fd_order, lt);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (int k = 0; k < gr.nz(); ++k)
      for (int j = 0; j < gr.ny(); ++j)
        for (int i = 0; i < gr.nx(); ++i) {
          const std::size_t c = gr.idx(i, j, k);
          out[c] -= eps * dt_eff * lt[c];
        }
  }
}

void PressureSystem::apply_system(const Field& diag, Field& p_work, Field& out) const {
  // snapshot interior before ghost filling mutates nothing interior-side
  apply_R(p_work, out);
  const Grid& gr = *g;
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (int k = 0; k < gr.nz(); ++k)
    for (int j = 0; j < gr.ny(); ++j)
      for (int i = 0; i < gr.nx(); ++i) {
        const std::size_t c = gr.idx(i, j, k);
        out[c] += diag[c] * p_work[c];
      }
}

void PressureSystem::boundary_shift(const Field& p_frozen_ghosts, Field& out) const {
  bool has_dirichlet = false;
  for (int f = 0; f < 6; ++f)
    if (bc->face[f] == FaceBc::dirichlet) has_dirichlet = true;
  if (!has_dirichlet) {
    out.fill(0.0);
    return;
  }
  Field pz = p_frozen_ghosts;  // keep ghosts, zero the interior
  const Grid& gr = *g;
  for (int k = 0; k < gr.nz(); ++k)
    for (int j = 0; j < gr.ny(); ++j)
      for (int i = 0; i < gr.nx(); ++i) pz(i, j, k) = 0.0;
  // periodic/outflow ghost entries rebuilt from the zero interior so only the
  // frozen dirichlet ghosts contribute
  fill_ghosts(pz, *bc, DirichletMode::keep);
  Field out2(gr);
  out2.fill(0.0);
  for (int dir = 0; dir < 3; ++dir) div_h_grad_p_dir(*h, pz, dir, cfg.fd_order, out2);
  Field gp(gr);
  for (int k = 0; k < gr.nz(); ++k)
    for (int j = 0; j < gr.ny(); ++j)
      for (int i = 0; i < gr.nx(); ++i) {
        const std::size_t c = gr.idx(i, j, k);
        out[c] = -dt_eff * dt_eff * out2[c];
      }
  for (int dir = 0; dir < 3; ++dir) {
    grad_p_fd(pz, dir, cfg.fd_order, gp);
    const Field& ua = *u_adv[dir];
    for (int k = 0; k < gr.nz(); ++k)
      for (int j = 0; j < gr.ny(); ++j)
        for (int i = 0; i < gr.nx(); ++i) {
          const std::size_t c = gr.idx(i, j, k);
          out[c] -= eps * 0.5 * dt_eff * ua[c] * gp[c];
        }
  }
  if (heat_on) {
    Field T(gr);
    for (std::size_t n = 0; n < T.size(); ++n) T[n] = (*Tcoef)[n] * pz[n];
    Field lt(gr);
    div_h_grad_p(*lambda_f, T, cfg.fd_order, lt);
    for (int k = 0; k < gr.nz(); ++k)
      for (int j = 0; j < gr.ny(); ++j)
        for (int i = 0; i < gr.nx(); ++i) {
          const std::size_t c = gr.idx(i, j, k);
          out[c] -= eps * dt_eff * lt[c];
        }
  }
}

void assemble_pressure_rhs(const PressureSystem& sys, const Field& rhoE_star,
                           const std::array<const Field*, 3>& rhou_star, Field& b) {
  const Grid& g = *sys.g;
  Field dv(g);
  dv.fill(0.0);
  for (int dir = 0; dir < 3; ++dir)
    div_central_dir(*sys.h, *rhou_star[dir], dir, sys.cfg.fd_order, dv);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (int k = 0; k < g.nz(); ++k)
    for (int j = 0; j < g.ny(); ++j)
      for (int i = 0; i < g.nx(); ++i) {
        const std::size_t c = g.idx(i, j, k);
        double adv = 0.0;
        for (int d = 0; d < 3; ++d) adv += (*sys.u_adv[d])[c] * (*rhou_star[d])[c];
        b[c] = rhoE_star[c] - sys.eps * 0.5 * adv - sys.dt_eff * dv[c];
      }
}

// --- Krylov machinery --------------------------------------------------------

namespace {

std::size_t interior_size(const Grid& g) { return g.interior_count(); }

void field_to_vec(const Field& f, std::vector<double>& v) {
  const Grid& g = f.grid();
  std::size_t n = 0;
  for (int k = 0; k < g.nz(); ++k)
    for (int j = 0; j < g.ny(); ++j)
      for (int i = 0; i < g.nx(); ++i) v[n++] = f(i, j, k);
}

void vec_to_field(const std::vector<double>& v, Field& f) {
  const Grid& g = f.grid();
  std::size_t n = 0;
  for (int k = 0; k < g.nz(); ++k)
    for (int j = 0; j < g.ny(); ++j)
      for (int i = 0; i < g.nx(); ++i) f(i, j, k) = v[n++];
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t n = 0; n < a.size(); ++n) s += a[n] * b[n];
  return s;
}

double nrm2(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

struct Preconditioner {
  PrecondKind kind = PrecondKind::none;
  // jacobi
  std::vector<double> inv_diag;
  // fdm
  const FdmCache::Entry* ex = nullptr;
  const FdmCache::Entry* ey = nullptr;
  const FdmCache::Entry* ez = nullptr;
  double d0 = 1.0, c2 = 0.0;
  int nx = 0, ny = 0, nz = 0;

  void apply(const std::vector<double>& r, std::vector<double>& z) const {
    if (kind == PrecondKind::none) {
      z = r;
      return;
    }
    if (kind == PrecondKind::jacobi) {
      for (std::size_t n = 0; n < r.size(); ++n) z[n] = r[n] * inv_diag[n];
      return;
    }
    // tensor-product fast diagonalization on the constant-coefficient part
    z = r;
    using Mat = Eigen::Map<Eigen::MatrixXd>;
    {
      Mat Z(z.data(), nx, std::ptrdiff_t(ny) * nz);
      Z = ex->V.transpose() * Z;
    }
    for (int k = 0; k < nz; ++k) {
      Mat Zk(z.data() + std::size_t(k) * nx * ny, nx, ny);
      Zk = Zk * ey->V;
    }
    {
      Mat Z(z.data(), std::ptrdiff_t(nx) * ny, nz);
      Z = Z * ez->V;
    }
    std::size_t n = 0;
    for (int k = 0; k < nz; ++k)
      for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
          const double den = d0 - c2 * (ex->lam(i) + ey->lam(j) + ez->lam(k));
          z[n++] /= den;
        }
    {
      Mat Z(z.data(), std::ptrdiff_t(nx) * ny, nz);
      Z = Z * ez->V.transpose();
    }
    for (int k = 0; k < nz; ++k) {
      Mat Zk(z.data() + std::size_t(k) * nx * ny, nx, ny);
      Zk = Zk * ey->V.transpose();
    }
    {
      Mat Z(z.data(), nx, std::ptrdiff_t(ny) * nz);
      Z = ex->V * Z;
    }
  }
};

// restarted GMRES with right preconditioning; x holds the warm start
template <class Op>
SolveStats gmres(const Op& A, const Preconditioner& P, const std::vector<double>& b,
                 std::vector<double>& x, double rtol, double atol, int maxiter,
                 int restart) {
  SolveStats st;
  const std::size_t n = b.size();
  const double bnorm = nrm2(b);
  const double thresh = std::max(rtol * bnorm, atol);

  std::vector<double> r(n), w(n), z(n);
  A(x, r);
  for (std::size_t q = 0; q < n; ++q) r[q] = b[q] - r[q];
  double rnorm = nrm2(r);
  st.residual = rnorm;
  if (rnorm <= thresh) {
    st.converged = true;
    return st;
  }

  const int m = restart;
  std::vector<std::vector<double>> V(m + 1, std::vector<double>(n));
  std::vector<double> H((m + 1) * m, 0.0), cs(m), sn(m), gvec(m + 1);

  while (st.lin_iters < maxiter) {
    std::fill(H.begin(), H.end(), 0.0);
    for (std::size_t q = 0; q < n; ++q) V[0][q] = r[q] / rnorm;
    std::fill(gvec.begin(), gvec.end(), 0.0);
    gvec[0] = rnorm;
    int j = 0;
    for (; j < m && st.lin_iters < maxiter; ++j) {
      ++st.lin_iters;
      P.apply(V[j], z);
      A(z, w);
      for (int q = 0; q <= j; ++q) {
        const double hij = dot(w, V[q]);
        H[q * m + j] = hij;
        for (std::size_t t = 0; t < n; ++t) w[t] -= hij * V[q][t];
      }
      const double hlast = nrm2(w);
      H[(j + 1) * m + j] = hlast;
      if (hlast > 0.0)
        for (std::size_t t = 0; t < n; ++t) V[j + 1][t] = w[t] / hlast;
      // apply accumulated rotations
      for (int q = 0; q < j; ++q) {
        const double t1 = cs[q] * H[q * m + j] + sn[q] * H[(q + 1) * m + j];
        const double t2 = -sn[q] * H[q * m + j] + cs[q] * H[(q + 1) * m + j];
        H[q * m + j] = t1;
        H[(q + 1) * m + j] = t2;
      }
      const double denom = std::hypot(H[j * m + j], H[(j + 1) * m + j]);
      cs[j] = H[j * m + j] / denom;
      sn[j] = H[(j + 1) * m + j] / denom;
      H[j * m + j] = denom;
      H[(j + 1) * m + j] = 0.0;
      gvec[j + 1] = -sn[j] * gvec[j];
      gvec[j] = cs[j] * gvec[j];
      rnorm = std::abs(gvec[j + 1]);
      if (rnorm <= thresh) {
        ++j;
        break;
      }
    }
    // back substitution and update
    std::vector<double> y(j);
    for (int q = j - 1; q >= 0; --q) {
      double s = gvec[q];
      for (int t = q + 1; t < j; ++t) s -= H[q * m + t] * y[t];
      y[q] = s / H[q * m + q];
    }
    std::vector<double> corr(n, 0.0);
    for (int q = 0; q < j; ++q)
      for (std::size_t t = 0; t < n; ++t) corr[t] += y[q] * V[q][t];
    P.apply(corr, z);
    for (std::size_t t = 0; t < n; ++t) x[t] += z[t];

    A(x, r);
    for (std::size_t q = 0; q < n; ++q) r[q] = b[q] - r[q];
    rnorm = nrm2(r);
    st.residual = rnorm;
    if (rnorm <= thresh) {
      st.converged = true;
      return st;
    }
  }
  st.residual = rnorm;
  return st;
}

void build_jacobi(const PressureSystem& sys, const Field& diag, std::vector<double>& inv) {
  const Grid& g = *sys.g;
  inv.assign(interior_size(g), 1.0);
  std::size_t n = 0;
  for (int k = 0; k < g.nz(); ++k)
    for (int j = 0; j < g.ny(); ++j)
      for (int i = 0; i < g.nx(); ++i) {
        const std::size_t c = g.idx(i, j, k);
        double d = diag[c];
        for (int dir = 0; dir < 3; ++dir) {
          const std::size_t st = g.stride(dir);
          const double inv_d2 = 1.0 / (g.delta(dir) * g.delta(dir));
          const int w = (sys.cfg.fd_order == 2) ? 1 : 2;
          double acc = 0.0;
          for (int a = -w; a <= w; ++a) {
            const double m = (sys.cfg.fd_order == 2) ? M2[a + 1][1] : M4[a + 2][2];
            acc += (*sys.h)[c + a * std::ptrdiff_t(st)] * m;
          }
          d -= sys.dt_eff * sys.dt_eff * inv_d2 * acc;
        }
        inv[n++] = (d != 0.0) ? 1.0 / d : 1.0;
      }
}

void build_fdm(const PressureSystem& sys, const Field& diag, Preconditioner& P) {
  const Grid& g = *sys.g;
  P.nx = g.nx();
  P.ny = g.ny();
  P.nz = g.nz();
  P.ex = &sys.fdm->get(g.nx(), sys.cfg.fd_order, sys.bc->face[0], sys.bc->face[1], g.dx());
  P.ey = &sys.fdm->get(g.ny(), sys.cfg.fd_order, sys.bc->face[2], sys.bc->face[3], g.dy());
  P.ez = &sys.fdm->get(g.nz(), sys.cfg.fd_order, sys.bc->face[4], sys.bc->face[5], g.dz());

  double dsum = 0.0, hsum = 0.0, heatsum = 0.0;
  std::size_t cnt = 0;
  for (int k = 0; k < g.nz(); ++k)
    for (int j = 0; j < g.ny(); ++j)
      for (int i = 0; i < g.nx(); ++i) {
        const std::size_t c = g.idx(i, j, k);
        dsum += diag[c];
        hsum += (*sys.h)[c];
        if (sys.heat_on) heatsum += (*sys.lambda_f)[c] * (*sys.Tcoef)[c];
        ++cnt;
      }
  P.d0 = dsum / cnt;
  P.c2 = sys.dt_eff * sys.dt_eff * hsum / cnt;
  if (sys.heat_on) P.c2 += sys.eps * sys.dt_eff * heatsum / cnt;
}

SolveStats solve_linearized(const PressureSystem& sys, const Field& diag,
                            const std::vector<double>& rhs, Field& x_field) {
  const Grid& g = *sys.g;
  const std::size_t n = interior_size(g);

  Preconditioner P;
  P.kind = sys.cfg.precond;
  if (P.kind == PrecondKind::jacobi) build_jacobi(sys, diag, P.inv_diag);
  if (P.kind == PrecondKind::fdm) {
    if (!sys.fdm) throw std::logic_error("fdm preconditioner requires a cache");
    build_fdm(sys, diag, P);
  }

  Field pw(g), Ap(g);
  auto A = [&](const std::vector<double>& v, std::vector<double>& out) {
    vec_to_field(v, pw);
    sys.apply_system(diag, pw, Ap);
    field_to_vec(Ap, out);
  };

  std::vector<double> x(n);
  field_to_vec(x_field, x);
  SolveStats st = gmres(A, P, rhs, x, sys.cfg.linsolve_tol, sys.cfg.linsolve_abstol,
                        sys.cfg.linsolve_maxiter, sys.cfg.gmres_restart);
  if (!st.converged)
    throw std::runtime_error("pressure solve: GMRES stalled, residual " +
                             std::to_string(st.residual) + " after " +
                             std::to_string(st.lin_iters) + " iterations");
  vec_to_field(x, x_field);
  return st;
}

}  // namespace

const FdmCache::Entry& FdmCache::get(int n, int order, FaceBc lo, FaceBc hi, double delta) {
  long long dbits;
  static_assert(sizeof(double) == sizeof(long long));
  std::memcpy(&dbits, &delta, sizeof(double));
  auto key = std::make_tuple(n, order, int(lo), int(hi), dbits);
  auto it = entries.find(key);
  if (it != entries.end()) return it->second;

  // 1D constant-coefficient compact operator with boundary closure
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(n, n);
  const int w = (order == 2) ? 1 : 2;
  for (int i = 0; i < n; ++i)
    for (int a = -w; a <= w; ++a)
      for (int bb = -w; bb <= w; ++bb) {
        const double m = (order == 2) ? M2[a + 1][bb + 1] : M4[a + 2][bb + 2];
        if (m == 0.0) continue;
        int jj = i + bb;
        if (jj < 0) {
          if (lo == FaceBc::periodic)
            jj = (jj % n + n) % n;
          else if (lo == FaceBc::outflow)
            jj = 0;
          else
            continue;
        } else if (jj >= n) {
          if (hi == FaceBc::periodic)
            jj = jj % n;
          else if (hi == FaceBc::outflow)
            jj = n - 1;
          else
            continue;
        }
        B(i, jj) += m;  // h == 1: row weights sum over the h offsets
      }
  B /= delta * delta;
  Eigen::MatrixXd Bs = 0.5 * (B + B.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Bs);
  Entry e;
  e.V = es.eigenvectors();
  e.lam = es.eigenvalues();
  auto [pos, ok] = entries.emplace(key, std::move(e));
  (void)ok;
  return pos->second;
}

SolveStats solve_pressure_linear(const PressureSystem& sys, const Field& b, Field& p) {
  const Grid& g = *sys.g;
  if (sys.eos->kind() != EosKind::ideal)
    throw std::logic_error("solve_pressure_linear requires the ideal gas EOS");
  const std::size_t n = interior_size(g);

  Field diag(g);
  const double de = sys.eps / (sys.eos->gamma() - 1.0);
  diag.fill(de);

  Field shift(g);
  sys.boundary_shift(p, shift);

  std::vector<double> rhs(n);
  {
    Field tmp(g);
    for (int k = 0; k < g.nz(); ++k)
      for (int j = 0; j < g.ny(); ++j)
        for (int i = 0; i < g.nx(); ++i)
          tmp(i, j, k) = sys.eps * b(i, j, k) - shift(i, j, k);
    field_to_vec(tmp, rhs);
  }

  SolveStats st = solve_linearized(sys, diag, rhs, p);
  st.newton_iters = 1;
  fill_ghosts(p, *sys.bc, DirichletMode::keep);
  return st;
}

SolveStats solve_pressure_nonlinear(const PressureSystem& sys, const Field& b, Field& p) {
  const Grid& g = *sys.g;
  const EosModel& eos = *sys.eos;
  const std::size_t n = interior_size(g);
  SolveStats total;

  Field shift(g);
  sys.boundary_shift(p, shift);

  Field diag(g), Rp(g), pw(g), dp(g);
  std::vector<double> gvec(n);

  for (int it = 0; it < sys.cfg.newton_maxiter; ++it) {
    ++total.newton_iters;
    // residual g(p) = eps*rho*e(p) + R p - eps*b (+ boundary shift)
    pw = p;
    sys.apply_R(pw, Rp);
    for (int k = 0; k < g.nz(); ++k)
      for (int j = 0; j < g.ny(); ++j)
        for (int i = 0; i < g.nx(); ++i) {
          const std::size_t c = g.idx(i, j, k);
          const double rho = (*sys.rho_new)[c];
          const double re = eos.rho_e(p[c], rho);
          Rp[c] = sys.eps * re + Rp[c] + shift[c] - sys.eps * b[c];
          diag[c] = sys.eps * rho * eos.de_dp(p[c], rho);
        }
    field_to_vec(Rp, gvec);

    dp.fill(0.0);
    SolveStats st = solve_linearized(sys, diag, gvec, dp);
    total.lin_iters += st.lin_iters;
    total.residual = st.residual;

    // p <- p - dp with step damping into the admissible set
    double relax = 1.0;
    for (int half = 0; half <= 20; ++half) {
      bool ok = true;
      for (int k = 0; k < g.nz() && ok; ++k)
        for (int j = 0; j < g.ny() && ok; ++j)
          for (int i = 0; i < g.nx() && ok; ++i) {
            const std::size_t c = g.idx(i, j, k);
            if (!eos.admissible(p[c] - relax * dp[c], (*sys.rho_new)[c])) ok = false;
          }
      if (ok) break;
      relax *= 0.5;
      if (half == 20)
        throw std::runtime_error("pressure Newton: no admissible step after 20 halvings");
    }
    double dpmax = 0.0;
    for (int k = 0; k < g.nz(); ++k)
      for (int j = 0; j < g.ny(); ++j)
        for (int i = 0; i < g.nx(); ++i) {
          const std::size_t c = g.idx(i, j, k);
          p[c] -= relax * dp[c];
          dpmax = std::max(dpmax, std::abs(relax * dp[c]));
        }
    if (dpmax < sys.cfg.newton_tol) {
      total.converged = true;
      fill_ghosts(p, *sys.bc, DirichletMode::keep);
      return total;
    }
  }
  throw std::runtime_error("pressure Newton did not converge in " +
                           std::to_string(sys.cfg.newton_maxiter) + " iterations");
}

void conservative_enthalpy(const EosModel& eos, const Field& rho_old, const Field& p_old,
                           const Field& rho_new, Field& h) {
  const Grid& g = h.grid();
  const int ng = g.ng();
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (int k = -ng; k < g.nz() + ng; ++k)
    for (int j = -ng; j < g.ny() + ng; ++j)
      for (int i = -ng; i < g.nx() + ng; ++i) {
        const std::size_t c = g.idx(i, j, k);
        if (!(rho_new[c] > 0.0))
          throw std::runtime_error("conservative_enthalpy: non-positive updated density");
        h[c] = rho_old[c] * eos.enthalpy(p_old[c], rho_old[c]) / rho_new[c];
      }
}

void update_momentum(const Field& rhou_star, const Field& p, double eps, double dt_eff,
                     int dir, int order, Field& out) {
  const Grid& g = p.grid();
  Field gp(g);
  grad_p_fd(p, dir, order, gp);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (int k = 0; k < g.nz(); ++k)
    for (int j = 0; j < g.ny(); ++j)
      for (int i = 0; i < g.nx(); ++i) {
        const std::size_t c = g.idx(i, j, k);
        out[c] = rhou_star[c] - dt_eff / eps * gp[c];
      }
}

void update_energy_eos(const EosModel& eos, const Field& rho_new, const Field& p,
                       const std::array<const Field*, 3>& u_adv,
                       const std::array<const Field*, 3>& rhou_new, double eps, Field& out) {
  const Grid& g = p.grid();
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (int k = 0; k < g.nz(); ++k)
    for (int j = 0; j < g.ny(); ++j)
      for (int i = 0; i < g.nx(); ++i) {
        const std::size_t c = g.idx(i, j, k);
        const double re = eos.rho_e(p[c], rho_new[c]);
        if (re < 0.0)
          throw std::runtime_error("update_energy: negative internal energy");
        double kin = 0.0;
        for (int d = 0; d < 3; ++d) kin += (*u_adv[d])[c] * (*rhou_new[d])[c];
        out[c] = re + eps * 0.5 * kin;
      }
}

void update_energy_flux(const PressureSystem& sys, const Field& rhoE_star,
                        const std::array<const Field*, 3>& rhou_new, const Field& p,
                        Field& out) {
  const Grid& g = *sys.g;
  Field dv(g);
  dv.fill(0.0);
  for (int dir = 0; dir < 3; ++dir)
    div_central_dir(*sys.h, *rhou_new[dir], dir, sys.cfg.fd_order, dv);

  Field heat(g);
  if (sys.heat_on) {
    Field T(g);
    for (std::size_t c = 0; c < T.size(); ++c) T[c] = (*sys.Tcoef)[c] * p[c];
    div_h_grad_p(*sys.lambda_f, T, sys.cfg.fd_order, heat);
  } else {
    heat.fill(0.0);
  }
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (int k = 0; k < g.nz(); ++k)
    for (int j = 0; j < g.ny(); ++j)
      for (int i = 0; i < g.nx(); ++i) {
        const std::size_t c = g.idx(i, j, k);
        out[c] = rhoE_star[c] - sys.dt_eff * dv[c] + sys.dt_eff * heat[c];
      }
}

}  // namespace sipfv
