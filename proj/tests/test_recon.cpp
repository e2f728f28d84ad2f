#include <doctest.h>

#include <cmath>
#include <vector>

#include "sipfv/recon.hpp"

using namespace sipfv;

TEST_CASE("nodal bases on Gauss-Lobatto points") {
  SUBCASE("M=0") {
    NodalBasis b = build_basis(0);
    REQUIRE(b.nodes.size() == 1);
    CHECK(b.F[0] == doctest::Approx(1.0).epsilon(1e-14));
  }
  SUBCASE("M=1: trapezoid weights") {
    NodalBasis b = build_basis(1);
    CHECK(b.nodes[0] == 0.0);
    CHECK(b.nodes[1] == 1.0);
    CHECK(b.F[0] == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(b.F[1] == doctest::Approx(0.5).epsilon(1e-14));
  }
  SUBCASE("M=2: Simpson weights") {
    NodalBasis b = build_basis(2);
    CHECK(b.nodes[1] == 0.5);
    CHECK(b.F[0] == doctest::Approx(1.0 / 6).epsilon(1e-13));
    CHECK(b.F[1] == doctest::Approx(2.0 / 3).epsilon(1e-13));
    CHECK(b.F[2] == doctest::Approx(1.0 / 6).epsilon(1e-13));
  }
  SUBCASE("Lagrange property and partition of unity") {
    for (int M = 0; M <= 2; ++M) {
      NodalBasis b = build_basis(M);
      for (int l = 0; l <= M; ++l)
        for (int k = 0; k <= M; ++k)
          CHECK(b.eval(l, b.nodes[k]) == doctest::Approx(l == k ? 1.0 : 0.0).epsilon(1e-13));
      double fs = 0.0;
      for (double f : b.F) fs += f;
      CHECK(fs == doctest::Approx(1.0).epsilon(1e-13));
    }
  }
  CHECK_THROWS(build_basis(3));
}

TEST_CASE("oscillation matrices") {
  SUBCASE("M=1 closed form") {
    ReconData rd = build_recon_matrices(1);
    CHECK(rd.Sigma[0] == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(rd.Sigma[1] == doctest::Approx(-1.0).epsilon(1e-13));
    CHECK(rd.Sigma[2] == doctest::Approx(-1.0).epsilon(1e-13));
    CHECK(rd.Sigma[3] == doctest::Approx(1.0).epsilon(1e-13));
  }
  SUBCASE("constants are annihilated") {
    for (int M = 1; M <= 2; ++M) {
      ReconData rd = build_recon_matrices(M);
      double w[3] = {3.7, 3.7, 3.7};
      CHECK(oscillation_indicator(rd, w) == doctest::Approx(0.0).epsilon(1e-12));
    }
  }
  SUBCASE("M=2 nodal values of xi give sigma = 1") {
    ReconData rd = build_recon_matrices(2);
    double w[3] = {0.0, 0.5, 1.0};
    CHECK(oscillation_indicator(rd, w) == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("reconstruction matrices reproduce polynomials from cell averages") {
  SUBCASE("constants, any degree") {
    for (int M = 0; M <= 2; ++M) {
      ReconData rd = build_recon_matrices(M);
      double q[3] = {2.5, 2.5, 2.5}, out[3];
      cweno_1d(rd, q, out);
      for (int p = 0; p <= M; ++p) CHECK(out[p] == doctest::Approx(2.5).epsilon(1e-13));
    }
  }
  SUBCASE("M=2: averages of x reproduce point values") {
    ReconData rd = build_recon_matrices(2);
    // w(x) = xi on the reference cell: averages -1/2, 1/2, 3/2
    double q[3] = {-0.5, 0.5, 1.5}, out[3];
    cweno_1d(rd, q, out);
    CHECK(out[0] == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(out[1] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(out[2] == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("M=2: central matrix reproduces averages of x^2 exactly") {
    ReconData rd = build_recon_matrices(2);
    // averages of xi^2 over [-1,0],[0,1],[1,2]: 1/3, 1/3, 7/3
    const double q[3] = {1.0 / 3, 1.0 / 3, 7.0 / 3};
    const double expect[3] = {0.0, 0.25, 1.0};
    for (int p = 0; p < 3; ++p) {
      double s = 0.0;
      for (int c = 0; c < 3; ++c) s += rd.C0[p * 3 + c] * q[c];
      CHECK(s == doctest::Approx(expect[p]).epsilon(5e-12));
    }
  }
  SUBCASE("M=1 constrained least squares matrix") {
    ReconData rd = build_recon_matrices(1);
    // hand elimination gives w = [(q0 + 4q1 - q2)/4, (-q0 + 4q1 + q2)/4]
    CHECK(rd.C0[0] == doctest::Approx(0.25).epsilon(1e-13));
    CHECK(rd.C0[1] == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(rd.C0[2] == doctest::Approx(-0.25).epsilon(1e-13));
    CHECK(rd.C0[3] == doctest::Approx(-0.25).epsilon(1e-13));
    CHECK(rd.C0[4] == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(rd.C0[5] == doctest::Approx(0.25).epsilon(1e-13));
  }
}

namespace {

// independent scalar evaluation of the CWENO formulas for M=2, using
// hand-derived stencil matrices (3x3 solves by Cramer's rule)
void cweno_oracle_m2(const double q[3], double out[3]) {
  const double A[3][3] = {{19.0 / 6, -10.0 / 3, 7.0 / 6},
                          {1.0 / 6, 2.0 / 3, 1.0 / 6},
                          {7.0 / 6, -10.0 / 3, 19.0 / 6}};
  auto det3 = [](const double m[3][3]) {
    return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
           m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
           m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
  };
  const double dA = det3(A);
  double w0[3];
  for (int c = 0; c < 3; ++c) {
    double Ac[3][3];
    for (int r = 0; r < 3; ++r)
      for (int s = 0; s < 3; ++s) Ac[r][s] = (s == c) ? q[r] : A[r][s];
    w0[c] = det3(Ac) / dA;
  }
  // one-sided linear polynomials at nodes {0, 1/2, 1}
  const double a1 = 0.5 * (q[0] + q[1]), b1 = 0.5 * (-q[0] + 3 * q[1]);
  const double a2 = 0.5 * (3 * q[1] - q[2]), b2 = 0.5 * (q[1] + q[2]);
  const double w1[3] = {a1, 0.5 * (a1 + b1), b1};
  const double w2[3] = {a2, 0.5 * (a2 + b2), b2};
  const double lam0 = 200.0 / 202, lam1 = 1.0 / 202, lam2 = 1.0 / 202;
  double wt0[3];
  for (int p = 0; p < 3; ++p) wt0[p] = (w0[p] - lam1 * w1[p] - lam2 * w2[p]) / lam0;
  const double S[3][3] = {{55.0 / 3, -104.0 / 3, 49.0 / 3},
                          {-104.0 / 3, 208.0 / 3, -104.0 / 3},
                          {49.0 / 3, -104.0 / 3, 55.0 / 3}};
  double sig0 = 0.0;
  for (int l = 0; l < 3; ++l)
    for (int m = 0; m < 3; ++m) sig0 += S[l][m] * w0[l] * w0[m];
  const double sig1 = (b1 - a1) * (b1 - a1), sig2 = (b2 - a2) * (b2 - a2);
  const double eps = 1e-14;
  auto wt = [&](double lam, double s) { return lam / std::pow(s + eps, 4); };
  double om0 = wt(lam0, sig0), om1 = wt(lam1, sig1), om2 = wt(lam2, sig2);
  const double os = om0 + om1 + om2;
  om0 /= os; om1 /= os; om2 /= os;
  for (int p = 0; p < 3; ++p) out[p] = om0 * wt0[p] + om1 * w1[p] + om2 * w2[p];
}

}  // namespace

TEST_CASE("cweno matches an independent scalar evaluation on step data") {
  ReconData rd = build_recon_matrices(2);
  const double q[3] = {0.0, 0.0, 1.0};
  double out[3], ref[3];
  cweno_1d(rd, q, out);
  cweno_oracle_m2(q, ref);
  for (int p = 0; p < 3; ++p) CHECK(out[p] == doctest::Approx(ref[p]).epsilon(1e-10));
  // reconstructed values stay within the data range
  for (int p = 0; p < 3; ++p) {
    CHECK(out[p] >= -1e-10);
    CHECK(out[p] <= 1.0 + 1e-10);
  }
}

TEST_CASE("essentially non-oscillatory on monotone steps") {
  ReconData rd = build_recon_matrices(2);
  const double steps[][3] = {{0, 0, 1}, {0, 1, 1}, {1, 1, 0}, {1, 0, 0}, {-2, -2, 5}};
  for (auto& q : steps) {
    double lo = std::min({q[0], q[1], q[2]}), hi = std::max({q[0], q[1], q[2]});
    double out[3];
    cweno_1d(rd, q, out);
    for (int p = 0; p < 3; ++p) {
      CHECK(out[p] >= lo - 1e-8);
      CHECK(out[p] <= hi + 1e-8);
    }
  }
}

TEST_CASE("smooth reconstruction attains design order") {
  for (int M = 1; M <= 2; ++M) {
    ReconData rd = build_recon_matrices(M);
    auto max_node_err = [&](int n) {
      const double dx = 1.0 / n;
      std::vector<double> avg(n);
      for (int i = 0; i < n; ++i) {
        const double xl = i * dx, xr = (i + 1) * dx;
        avg[i] = (std::cos(2 * M_PI * xl) - std::cos(2 * M_PI * xr)) / (2 * M_PI * dx);
      }
      double err = 0.0;
      double q[3], out[3];
      for (int i = 0; i < n; ++i) {
        for (int c = 0; c < rd.nstencil(); ++c)
          q[c] = avg[((i + c - rd.L) % n + n) % n];
        cweno_1d(rd, q, out);
        for (int p = 0; p <= M; ++p) {
          const double x = (i + rd.basis.nodes[p]) * dx;
          err = std::max(err, std::abs(out[p] - std::sin(2 * M_PI * x)));
        }
      }
      return err;
    };
    const double e1 = max_node_err(40), e2 = max_node_err(80);
    const double order = std::log2(e1 / e2);
    CHECK(order >= M + 0.8);
  }
}

TEST_CASE("3d reconstruction: uniform, separable, conservation") {
  GridSpec gs;
  gs.nx = 6; gs.ny = 5; gs.nz = 4;
  gs.ghost = 3;
  Grid g(gs);
  BcSpec bc;  // periodic everywhere

  SUBCASE("uniform state reproduces itself, M=2") {
    State s(g);
    s.rho.fill(1.7);
    s.rhou.fill(0.3);
    s.rhov.fill(-0.2);
    s.rhow.fill(0.0);
    s.rhoE.fill(2.0);
    fill_ghosts(s, bc);
    ReconData rd = build_recon_matrices(2);
    PolyState ps;
    reconstruct_state_3d(s, rd, ps);
    for (int d = 0; d < ps.ndof; ++d) {
      CHECK(ps.at(0, g.idx(2, 2, 2), d) == doctest::Approx(1.7).epsilon(1e-13));
      CHECK(ps.at(4, g.idx(0, 0, 0), d) == doctest::Approx(2.0).epsilon(1e-13));
    }
  }

  SUBCASE("M=0 returns the cell averages") {
    State s(g);
    for (int k = 0; k < 4; ++k)
      for (int j = 0; j < 5; ++j)
        for (int i = 0; i < 6; ++i) s.rho(i, j, k) = 1.0 + 0.01 * (i + 7 * j + 13 * k);
    s.rhoE.fill(1.0);
    s.rhou.fill(0.0); s.rhov.fill(0.0); s.rhow.fill(0.0);
    fill_ghosts(s, bc);
    ReconData rd = build_recon_matrices(0);
    PolyState ps;
    reconstruct_state_3d(s, rd, ps);
    for (int k = 0; k < 4; ++k)
      for (int j = 0; j < 5; ++j)
        for (int i = 0; i < 6; ++i)
          CHECK(ps.at(0, g.idx(i, j, k), 0) == s.rho(i, j, k));
  }
}

TEST_CASE("3d separable linear field is reproduced exactly") {
  GridSpec gs;
  gs.x_min = 0; gs.x_max = 1; gs.y_min = 0; gs.y_max = 1;
  gs.nx = 5; gs.ny = 5; gs.nz = 3;
  gs.ghost = 3;
  Grid g(gs);
  BcSpec bc;
  bc.face = {FaceBc::outflow, FaceBc::outflow, FaceBc::outflow,
             FaceBc::outflow, FaceBc::periodic, FaceBc::periodic};
  State s(g);
  // f(x) g(y) with f, g linear: cell average = f(xc) g(yc) on uniform grids
  auto f = [](double x) { return 2.0 + 3.0 * x; };
  auto h = [](double y) { return 1.0 - 0.5 * y; };
  const int ng = g.ng();
  for (int k = -ng; k < g.nz() + ng; ++k)
    for (int j = -ng; j < g.ny() + ng; ++j)
      for (int i = -ng; i < g.nx() + ng; ++i) {
        s.rho(i, j, k) = f(g.xc(i)) * h(g.yc(j));
        s.rhoE(i, j, k) = 1.0;
      }
  ReconData rd = build_recon_matrices(2);
  PolyState ps;
  reconstruct_state_3d(s, rd, ps);
  // interior cell, away from the one-sided boundary influence
  const std::size_t cell = g.idx(2, 2, 1);
  for (int q = 0; q < 3; ++q)
    for (int p = 0; p < 3; ++p) {
      const double x = g.xf(2) + rd.basis.nodes[p] * g.dx();
      const double y = g.yf(2) + rd.basis.nodes[q] * g.dy();
      CHECK(ps.at(0, cell, ps.didx(p, q, 1)) ==
            doctest::Approx(f(x) * h(y)).epsilon(1e-11));
    }
}

TEST_CASE("per-cell conservation of the tensor polynomial") {
  GridSpec gs;
  gs.nx = 6; gs.ny = 6; gs.nz = 4;
  gs.ghost = 3;
  Grid g(gs);
  BcSpec bc;
  State s(g);
  for (int k = 0; k < 4; ++k)
    for (int j = 0; j < 6; ++j)
      for (int i = 0; i < 6; ++i) {
        s.rho(i, j, k) = 1.0 + 0.3 * std::sin(i + 2 * j) * std::cos(k);
        s.rhou(i, j, k) = 0.1 * std::cos(i * j + k);
        s.rhoE(i, j, k) = 2.0 + 0.2 * std::sin(3 * i - k);
      }
  fill_ghosts(s, bc);
  for (int M = 1; M <= 2; ++M) {
    ReconData rd = build_recon_matrices(M);
    PolyState ps;
    reconstruct_state_3d(s, rd, ps);
    const Field* fields[5] = {&s.rho, &s.rhou, &s.rhov, &s.rhow, &s.rhoE};
    for (int k = 0; k < 4; ++k)
      for (int j = 0; j < 6; ++j)
        for (int i = 0; i < 6; ++i)
          for (int v = 0; v < 5; ++v) {
            const double avg = poly_cell_average(rd, ps, v, g.idx(i, j, k));
            CHECK(avg == doctest::Approx((*fields[v])(i, j, k)).epsilon(1e-12));
          }
  }
}
