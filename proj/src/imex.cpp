#include "sipfv/imex.hpp"

#include <cmath>
#include <stdexcept>

namespace sipfv {

void ButcherPair::validate() const {
  const double tol = 1e-6;
  double bsum = 0.0;
  for (int i = 0; i < s; ++i) bsum += b[i];
  if (std::abs(bsum - 1.0) > tol) throw std::logic_error("tableau: weights must sum to 1");
  for (int i = 0; i < s; ++i) {
    double re = 0.0, ri = 0.0;
    for (int j = 0; j < s; ++j) {
      if (j >= i && ae(i, j) != 0.0)
        throw std::logic_error("tableau: explicit matrix must be strictly lower triangular");
      if (j > i && ai(i, j) != 0.0)
        throw std::logic_error("tableau: implicit matrix must be lower triangular");
      re += ae(i, j);
      ri += ai(i, j);
    }
    if (std::abs(re - ce[i]) > tol || std::abs(ri - ci[i]) > tol)
      throw std::logic_error("tableau: row sums do not match abscissae");
  }
}

ButcherPair tableau(const std::string& name) {
  ButcherPair t;
  t.name = name;
  if (name == "sp111") {
    t.s = 1;
    t.Ae = {0.0};
    t.Ai = {1.0};
    t.b = {1.0};
    t.ce = {0.0};
    t.ci = {1.0};
    t.stiffly_accurate = true;
  } else if (name == "sassp332") {
    t.s = 3;
    t.Ae = {0, 0, 0, 0.5, 0, 0, 0.5, 0.5, 0};
    t.Ai = {0.25, 0, 0, 0, 0.25, 0, 1.0 / 3, 1.0 / 3, 1.0 / 3};
    t.b = {1.0 / 3, 1.0 / 3, 1.0 / 3};
    t.ce = {0, 0.5, 1.0};
    t.ci = {0.25, 0.25, 1.0};
    t.stiffly_accurate = true;
  } else if (name == "sadirk343") {
    const double d = 0.435866;
    t.s = 4;
    t.Ae = {0,        0,         0,         0,  //
            d,        0,         0,         0,  //
            1.437745, -0.719812, 0,         0,  //
            0.916993, 0.5,       -0.416993, 0};
    // implicit (4,4) entry is delta: the printed 0.416993 fails both the
    // row-sum check and stiff accuracy
    t.Ai = {d, 0,        0,         0,  //
            0, d,        0,         0,  //
            0, 0.282066, d,         0,  //
            0, 1.208496, -0.644363, d};
    t.b = {0, 1.208496, -0.644363, d};
    t.ce = {0, d, 0.717933, 1.0};
    t.ci = {d, d, 0.717933, 1.0};
    t.stiffly_accurate = true;
  } else if (name == "ssp433") {
    const double a = 0.241694, d = 0.060424, e = 0.129153;
    t.s = 4;
    t.Ae = {0, 0,    0,    0,  //
            0, 0,    0,    0,  //
            0, 1.0,  0,    0,  //
            0, 0.25, 0.25, 0};
    t.Ai = {a,  0,       0,                 0,  //
            -a, a,       0,                 0,  //
            0,  1.0 - a, a,                 0,  //
            d,  e,       0.5 - d - e - a,   a};
    t.b = {0, 1.0 / 6, 1.0 / 6, 2.0 / 3};
    t.ce = {0, 0, 1.0, 0.5};
    t.ci = {a, 0, 1.0, 0.5};
    t.stiffly_accurate = false;
  } else {
    throw std::invalid_argument("unknown IMEX tableau: " + name);
  }
  t.validate();
  return t;
}

double compute_dt(const State& s, const EosModel& eos, const TransportParams& tp,
                  double eps, double cfl, double dt_max) {
  if (!(cfl > 0.0 && cfl < 1.0)) throw std::invalid_argument("CFL must lie in (0,1)");
  const Grid& g = s.grid();
  double worst = 0.0;
  const bool visc = tp.viscous();
  const bool mu_const = tp.sutherland.constant();
  const double invd2 = 1.0 / (g.dx() * g.dx()) + 1.0 / (g.dy() * g.dy()) +
                       1.0 / (g.dz() * g.dz());
  for (int k = 0; k < g.nz(); ++k)
    for (int j = 0; j < g.ny(); ++j)
      for (int i = 0; i < g.nx(); ++i) {
        const std::size_t c = g.idx(i, j, k);
        const double rho = s.rho[c];
        double br = std::abs(s.rhou[c] / rho) / g.dx() +
                    std::abs(s.rhov[c] / rho) / g.dy() +
                    std::abs(s.rhow[c] / rho) / g.dz();
        if (visc) {
          double mu = tp.sutherland.mu0;
          if (!mu_const) {
            double Q[5] = {s.rho[c], s.rhou[c], s.rhov[c], s.rhow[c], s.rhoE[c]};
            const Prim w = prim_from_cons(eos, eps, Q);
            mu = sutherland_viscosity(eos.temperature(w.p, w.rho), tp.sutherland);
          }
          br += viscous_eigenvalue(mu, rho, eos.gamma(), tp.Pr) * invd2;
        }
        if (br > worst) worst = br;
      }
  if (worst <= 0.0) return dt_max;
  return std::min(cfl / worst, dt_max);
}

namespace {

double pressure_of(const EosModel& eos, double eps, double rho, double mx, double my,
                   double mz, double rhoE) {
  const double kin = 0.5 * (mx * mx + my * my + mz * mz) / rho;
  const double rho_e = rhoE - eps * kin;
  if (eos.kind() == EosKind::ideal) return (eos.gamma() - 1.0) * rho_e;
  return eos.pressure_from_e(rho_e / rho, rho);
}

void axpy_state(State& out, double coeff, const std::array<Field, 5>& k) {
  Field* of[5] = {&out.rho, &out.rhou, &out.rhov, &out.rhow, &out.rhoE};
  for (int v = 0; v < 5; ++v) {
    double* o = of[v]->data();
    const double* kk = k[v].data();
    const std::size_t n = of[v]->size();
    for (std::size_t q = 0; q < n; ++q) o[q] += coeff * kk[q];
  }
}

}  // namespace

Stepper::Stepper(const Grid& g, const BcSpec& bc, PhysicsConfig phys, NumericsConfig num)
    : g_(&g), bc_(bc), phys_(std::move(phys)), num_(std::move(num)) {
  bc_.validate();
  num_.pair.validate();
  rd_ = build_recon_matrices(num_.M);
  for (int v = 0; v < 5; ++v) Ldiv_[v] = Field(g);
  h_ = Field(g);
  Tcoef_ = Field(g);
  lam_ = Field(g);
  pE_ = Field(g);
  b_ = Field(g);
  psol_ = Field(g);
  p_carry_ = Field(g);
  for (int d = 0; d < 3; ++d) uadv_[d] = Field(g);
  QE_ = State(g);
  Qbase_ = State(g);
  Qs_ = State(g);
  k_.resize(num_.pair.s);
  for (auto& kk : k_)
    for (int v = 0; v < 5; ++v) kk[v] = Field(g);
}

bool Stepper::heat_implicit() const {
  return num_.imp.implicit_heat_flux && phys_.eos.kind() == EosKind::ideal &&
         phys_.tp.viscous();
}

void Stepper::recover_pressure(const State& q, Field& p) const {
  const Grid& g = *g_;
  const int ng = g.ng();
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (int k = -ng; k < g.nz() + ng; ++k)
    for (int j = -ng; j < g.ny() + ng; ++j)
      for (int i = -ng; i < g.nx() + ng; ++i) {
        const std::size_t c = g.idx(i, j, k);
        if (!(q.rho[c] > 0.0))
          throw std::runtime_error("stage state has non-positive density");
        p[c] = pressure_of(phys_.eos, phys_.eps, q.rho[c], q.rhou[c], q.rhov[c],
                           q.rhow[c], q.rhoE[c]);
      }
}

void Stepper::stage_implicit(const State& QE, const Field& pE, const State& Qbase,
                             double dt_eff, State& Qs) {
  const Grid& g = *g_;
  const EosModel& eos = phys_.eos;
  const bool heat = heat_implicit();

  reconstruct_state_3d(QE, rd_, poly_);
  explicit_divergence(QE, poly_, rd_, eos, phys_.tp, phys_.eps, !heat, Ldiv_);

  // starred states: explicit update from the implicit base
  Qs = Qbase;
  Field* sf[5] = {&Qs.rho, &Qs.rhou, &Qs.rhov, &Qs.rhow, &Qs.rhoE};
  const Field* bf[5] = {&Qbase.rho, &Qbase.rhou, &Qbase.rhov, &Qbase.rhow, &Qbase.rhoE};
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (int k = 0; k < g.nz(); ++k)
    for (int j = 0; j < g.ny(); ++j)
      for (int i = 0; i < g.nx(); ++i) {
        const std::size_t c = g.idx(i, j, k);
        for (int v = 0; v < 5; ++v)
          (*sf[v])[c] = (*bf[v])[c] - dt_eff * Ldiv_[v][c];
      }
  for (int v = 0; v < 5; ++v) fill_ghosts(*sf[v], bc_);

  // coefficient fields (valid over the whole ghosted box)
  const int ng = g.ng();
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (int k = -ng; k < g.nz() + ng; ++k)
    for (int j = -ng; j < g.ny() + ng; ++j)
      for (int i = -ng; i < g.nx() + ng; ++i) {
        const std::size_t c = g.idx(i, j, k);
        const double rE = QE.rho[c];
        uadv_[0][c] = QE.rhou[c] / rE;
        uadv_[1][c] = QE.rhov[c] / rE;
        uadv_[2][c] = QE.rhow[c] / rE;
        if (!(Qs.rho[c] > 0.0))
          throw std::runtime_error("explicit update produced non-positive density");
        h_[c] = rE * eos.enthalpy(pE[c], rE) / Qs.rho[c];
        if (heat) {
          Tcoef_[c] = 1.0 / (eos.R() * Qs.rho[c]);
          const double TE = pE[c] / (eos.R() * rE);
          const double mu = sutherland_viscosity(TE, phys_.tp.sutherland);
          lam_[c] = phys_.tp.lambda_th(mu, eos.cp());
        }
      }

  PressureSystem sys;
  sys.g = &g;
  sys.bc = &bc_;
  sys.eos = &eos;
  sys.eps = phys_.eps;
  sys.dt_eff = dt_eff;
  sys.rho_new = &Qs.rho;
  sys.h = &h_;
  for (int d = 0; d < 3; ++d) sys.u_adv[d] = &uadv_[d];
  sys.heat_on = heat;
  sys.lambda_f = &lam_;
  sys.Tcoef = &Tcoef_;
  sys.cfg = num_.imp;
  sys.fdm = &fdm_;

  assemble_pressure_rhs(sys, Qs.rhoE, {&Qs.rhou, &Qs.rhov, &Qs.rhow}, b_);

  psol_ = p_carry_;  // warm start; ghosts carry the frozen boundary pressure
  SolveStats st = (eos.kind() == EosKind::ideal) ? solve_pressure_linear(sys, b_, psol_)
                                                 : solve_pressure_nonlinear(sys, b_, psol_);
  stats_.solves += 1;
  stats_.lin_iters += st.lin_iters;
  stats_.newton_iters += st.newton_iters;
  stats_.newton_max = std::max(stats_.newton_max, st.newton_iters);
  if (st.newton_iters <= 4) stats_.newton_le4 += 1;

  for (int d = 0; d < 3; ++d) {
    update_momentum(Qs.mom(d), psol_, phys_.eps, dt_eff, d, num_.imp.fd_order, Qs.mom(d));
    fill_ghosts(Qs.mom(d), bc_);
  }

  if (num_.energy == EnergyUpdate::flux) {
    update_energy_flux(sys, Qs.rhoE, {&Qs.rhou, &Qs.rhov, &Qs.rhow}, psol_, Qs.rhoE);
  } else {
    update_energy_eos(eos, Qs.rho, psol_, {&uadv_[0], &uadv_[1], &uadv_[2]},
                      {&Qs.rhou, &Qs.rhov, &Qs.rhow}, phys_.eps, Qs.rhoE);
  }
  fill_ghosts(Qs.rhoE, bc_);
  Qs.p = psol_;
  p_carry_ = psol_;
}

void Stepper::stage_explicit(const State& QE, const Field& pE, const State& Qbase,
                             std::array<Field, 5>& k) {
  // k = H(QE, Qbase): flux divergence of QE plus pressure/enthalpy terms of
  // Qbase evaluated with the central operators
  const Grid& g = *g_;
  const EosModel& eos = phys_.eos;
  const bool heat = heat_implicit();

  reconstruct_state_3d(QE, rd_, poly_);
  explicit_divergence(QE, poly_, rd_, eos, phys_.tp, phys_.eps, !heat, Ldiv_);

  Field pb(g);
  recover_pressure(Qbase, pb);

  Field hb(g);
  const int ng = g.ng();
  for (int k2 = -ng; k2 < g.nz() + ng; ++k2)
    for (int j = -ng; j < g.ny() + ng; ++j)
      for (int i = -ng; i < g.nx() + ng; ++i) {
        const std::size_t c = g.idx(i, j, k2);
        hb[c] = eos.enthalpy(pb[c], Qbase.rho[c]);
      }

  Field gp(g), dv(g);
  dv.fill(0.0);
  for (int d = 0; d < 3; ++d)
    div_central_dir(hb, Qbase.mom(d), d, num_.imp.fd_order, dv);

  for (int v = 0; v < 5; ++v) {
    double* kv = k[v].data();
    const std::size_t n = k[v].size();
    for (std::size_t q = 0; q < n; ++q) kv[q] = 0.0;
  }
  for (int k2 = 0; k2 < g.nz(); ++k2)
    for (int j = 0; j < g.ny(); ++j)
      for (int i = 0; i < g.nx(); ++i) {
        const std::size_t c = g.idx(i, j, k2);
        k[0][c] = -Ldiv_[0][c];
        k[4][c] = -Ldiv_[4][c] - dv[c];
      }
  for (int d = 0; d < 3; ++d) {
    grad_p_fd(pb, d, num_.imp.fd_order, gp);
    for (int k2 = 0; k2 < g.nz(); ++k2)
      for (int j = 0; j < g.ny(); ++j)
        for (int i = 0; i < g.nx(); ++i) {
          const std::size_t c = g.idx(i, j, k2);
          k[1 + d][c] = -Ldiv_[1 + d][c] - gp[c] / phys_.eps;
        }
  }
  if (heat) {
    Field T(g), lt(g);
    for (std::size_t c = 0; c < T.size(); ++c) {
      T[c] = pb[c] / (eos.R() * Qbase.rho[c]);
      const double mu = sutherland_viscosity(T[c], phys_.tp.sutherland);
      lam_[c] = phys_.tp.lambda_th(mu, eos.cp());
    }
    div_h_grad_p(lam_, T, num_.imp.fd_order, lt);
    for (int k2 = 0; k2 < g.nz(); ++k2)
      for (int j = 0; j < g.ny(); ++j)
        for (int i = 0; i < g.nx(); ++i) {
          const std::size_t c = g.idx(i, j, k2);
          k[4][c] += lt[c];
        }
  }
  (void)pE;
}

void Stepper::step(State& s, double dt) {
  const Grid& g = *g_;
  const ButcherPair& pr = num_.pair;
  fill_ghosts(s, bc_);
  p_carry_ = s.p;

  for (int i = 0; i < pr.s; ++i) {
    QE_ = s;
    Qbase_ = s;
    for (int j = 0; j < i; ++j) {
      if (pr.ae(i, j) != 0.0) axpy_state(QE_, dt * pr.ae(i, j), k_[j]);
      if (pr.ai(i, j) != 0.0) axpy_state(Qbase_, dt * pr.ai(i, j), k_[j]);
    }
    if (i > 0) {
      fill_ghosts(QE_, bc_);
      fill_ghosts(Qbase_, bc_);
      recover_pressure(QE_, pE_);
    } else {
      pE_ = s.p;
    }

    const double aii = pr.ai(i, i);
    if (aii == 0.0) {
      try {
        stage_explicit(QE_, pE_, Qbase_, k_[i]);
      } catch (const std::exception& e) {
        throw std::runtime_error("IMEX stage " + std::to_string(i + 1) + ": " + e.what());
      }
    } else {
      const double dt_eff = aii * dt;
      try {
        stage_implicit(QE_, pE_, Qbase_, dt_eff, Qs_);
      } catch (const std::exception& e) {
        throw std::runtime_error("IMEX stage " + std::to_string(i + 1) + ": " + e.what());
      }
      // back out the stage flux k_i = (Q_s - Q_base)/dt_eff over the full box
      const Field* sf[5] = {&Qs_.rho, &Qs_.rhou, &Qs_.rhov, &Qs_.rhow, &Qs_.rhoE};
      const Field* bf[5] = {&Qbase_.rho, &Qbase_.rhou, &Qbase_.rhov, &Qbase_.rhow,
                            &Qbase_.rhoE};
      for (int v = 0; v < 5; ++v) {
        double* kv = k_[i][v].data();
        const double* sv = sf[v]->data();
        const double* bv = bf[v]->data();
        const std::size_t n = k_[i][v].size();
        for (std::size_t q = 0; q < n; ++q) kv[q] = (sv[q] - bv[q]) / dt_eff;
      }
    }
  }

  if (pr.stiffly_accurate) {
    // last stage state is the solution; reuse it bit-exactly
    s = Qs_;
  } else {
    for (int i = 0; i < pr.s; ++i)
      if (pr.b[i] != 0.0) axpy_state(s, dt * pr.b[i], k_[i]);
    fill_ghosts(s, bc_);
    // pressure cache must match the combined state
    Field pnew = s.p;
    recover_pressure(s, pnew);
    for (int k2 = 0; k2 < g.nz(); ++k2)
      for (int j = 0; j < g.ny(); ++j)
        for (int i = 0; i < g.nx(); ++i) s.p(i, j, k2) = pnew(i, j, k2);
    fill_ghosts(s.p, bc_);
  }
}

}  // namespace sipfv
