#include "sipfv/grid.hpp"

#include <stdexcept>

namespace sipfv {

Grid::Grid(const GridSpec& spec) : spec_(spec) {
  if (spec.nx < 1 || spec.ny < 1 || spec.nz < 1)
    throw std::invalid_argument("grid: cell counts must be >= 1");
  if (!(spec.x_max > spec.x_min) || !(spec.y_max > spec.y_min) ||
      !(spec.z_max > spec.z_min))
    throw std::invalid_argument("grid: domain extents must be positive");
  if (spec.ghost < 2) throw std::invalid_argument("grid: ghost width must be >= 2");
  dx_ = (spec.x_max - spec.x_min) / spec.nx;
  dy_ = (spec.y_max - spec.y_min) / spec.ny;
  dz_ = (spec.z_max - spec.z_min) / spec.nz;
}

FaceBc face_bc_from_string(const std::string& s) {
  if (s == "periodic") return FaceBc::periodic;
  if (s == "dirichlet" || s == "inflow") return FaceBc::dirichlet;
  if (s == "outflow" || s == "neumann") return FaceBc::outflow;
  throw std::invalid_argument("unknown boundary kind: " + s);
}

std::string to_string(FaceBc bc) {
  switch (bc) {
    case FaceBc::periodic: return "periodic";
    case FaceBc::dirichlet: return "dirichlet";
    default: return "outflow";
  }
}

void BcSpec::validate() const {
  for (int d = 0; d < 3; ++d) {
    bool lo = face[2 * d] == FaceBc::periodic;
    bool hi = face[2 * d + 1] == FaceBc::periodic;
    if (lo != hi)
      throw std::invalid_argument("periodic boundary must be declared on both faces of direction " +
                                  std::to_string(d));
  }
}

namespace {

// Fill ghosts one direction at a time; later passes sweep the already-filled
// ghost range of earlier directions so corners come out consistent.
void fill_dir(Field& f, const BcSpec& bc, DirichletMode dm, int dir) {
  const Grid& g = f.grid();
  const int ng = g.ng();
  const int n = g.ncells(dir);
  const FaceBc lo = bc.face[2 * dir], hi = bc.face[2 * dir + 1];

  auto wrap = [n](int i) { return ((i % n) + n) % n; };

  // iteration box: directions already processed include ghosts
  int ilo[3], ihi[3];
  for (int d = 0; d < 3; ++d) {
    if (d < dir) { ilo[d] = -ng; ihi[d] = g.ncells(d) + ng; }
    else { ilo[d] = 0; ihi[d] = g.ncells(d); }
  }

  auto set = [&](int c[3], double val) { f(c[0], c[1], c[2]) = val; };
  auto get = [&](int c[3]) { return f(c[0], c[1], c[2]); };

  int c[3], src[3];
  for (int a = ilo[(dir + 1) % 3]; a < ihi[(dir + 1) % 3]; ++a)
    for (int b = ilo[(dir + 2) % 3]; b < ihi[(dir + 2) % 3]; ++b)
      for (int gcell = 1; gcell <= ng; ++gcell) {
        c[(dir + 1) % 3] = a;
        c[(dir + 2) % 3] = b;
        src[(dir + 1) % 3] = a;
        src[(dir + 2) % 3] = b;
        // low side
        c[dir] = -gcell;
        if (lo == FaceBc::periodic) {
          src[dir] = wrap(-gcell);
          set(c, get(src));
        } else if (lo == FaceBc::outflow) {
          src[dir] = 0;
          set(c, get(src));
        } else if (dm == DirichletMode::zero) {
          set(c, 0.0);
        }
        // high side
        c[dir] = n - 1 + gcell;
        if (hi == FaceBc::periodic) {
          src[dir] = wrap(n - 1 + gcell);
          set(c, get(src));
        } else if (hi == FaceBc::outflow) {
          src[dir] = n - 1;
          set(c, get(src));
        } else if (dm == DirichletMode::zero) {
          set(c, 0.0);
        }
      }
}

}  // namespace

void fill_ghosts(Field& f, const BcSpec& bc, DirichletMode dm) {
  for (int dir = 0; dir < 3; ++dir) fill_dir(f, bc, dm, dir);
}

void fill_ghosts(State& s, const BcSpec& bc) {
  fill_ghosts(s.rho, bc);
  fill_ghosts(s.rhou, bc);
  fill_ghosts(s.rhov, bc);
  fill_ghosts(s.rhow, bc);
  fill_ghosts(s.rhoE, bc);
  fill_ghosts(s.p, bc);
}

}  // namespace sipfv
