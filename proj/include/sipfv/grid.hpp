#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

namespace sipfv {

struct GridSpec {
  double x_min = 0.0, x_max = 1.0;
  double y_min = 0.0, y_max = 1.0;
  double z_min = 0.0, z_max = 1.0;
  int nx = 1, ny = 1, nz = 1;
  int ghost = 2;
};

// Uniform Cartesian grid with a ghost layer on every side. Interior cells are
// addressed with 0-based (i,j,k); ghosts use negative indices / >= n.
class Grid {
 public:
  Grid() = default;
  explicit Grid(const GridSpec& spec);

  const GridSpec& spec() const { return spec_; }
  int nx() const { return spec_.nx; }
  int ny() const { return spec_.ny; }
  int nz() const { return spec_.nz; }
  int ng() const { return spec_.ghost; }
  double dx() const { return dx_; }
  double dy() const { return dy_; }
  double dz() const { return dz_; }
  double delta(int dir) const { return dir == 0 ? dx_ : (dir == 1 ? dy_ : dz_); }
  int ncells(int dir) const { return dir == 0 ? spec_.nx : (dir == 1 ? spec_.ny : spec_.nz); }
  double cell_volume() const { return dx_ * dy_ * dz_; }
  std::size_t interior_count() const {
    return std::size_t(spec_.nx) * spec_.ny * spec_.nz;
  }

  // cell centers, 0-based interior index
  double xc(int i) const { return spec_.x_min + (i + 0.5) * dx_; }
  double yc(int j) const { return spec_.y_min + (j + 0.5) * dy_; }
  double zc(int k) const { return spec_.z_min + (k + 0.5) * dz_; }
  // face coordinate to the left of cell i
  double xf(int i) const { return spec_.x_min + i * dx_; }
  double yf(int j) const { return spec_.y_min + j * dy_; }
  double zf(int k) const { return spec_.z_min + k * dz_; }

  int nxg() const { return spec_.nx + 2 * spec_.ghost; }
  int nyg() const { return spec_.ny + 2 * spec_.ghost; }
  int nzg() const { return spec_.nz + 2 * spec_.ghost; }
  std::size_t total_count() const { return std::size_t(nxg()) * nyg() * nzg(); }

  std::size_t idx(int i, int j, int k) const {
    return (std::size_t(k + spec_.ghost) * nyg() + (j + spec_.ghost)) * nxg() +
           (i + spec_.ghost);
  }
  std::size_t stride(int dir) const {
    return dir == 0 ? 1 : (dir == 1 ? std::size_t(nxg()) : std::size_t(nxg()) * nyg());
  }

 private:
  GridSpec spec_;
  double dx_ = 0, dy_ = 0, dz_ = 0;
};

// Per-cell scalar values over interior + ghost cells.
class Field {
 public:
  Field() = default;
  explicit Field(const Grid& g, double init = 0.0)
      : g_(&g), v_(g.total_count(), init) {}

  const Grid& grid() const { return *g_; }
  double& operator()(int i, int j, int k) { return v_[g_->idx(i, j, k)]; }
  double operator()(int i, int j, int k) const { return v_[g_->idx(i, j, k)]; }
  double& operator[](std::size_t n) { return v_[n]; }
  double operator[](std::size_t n) const { return v_[n]; }
  double* data() { return v_.data(); }
  const double* data() const { return v_.data(); }
  std::size_t size() const { return v_.size(); }

  void fill(double val) { v_.assign(v_.size(), val); }

 private:
  const Grid* g_ = nullptr;
  std::vector<double> v_;
};

enum class FaceBc { periodic, dirichlet, outflow };

FaceBc face_bc_from_string(const std::string& s);
std::string to_string(FaceBc bc);

// Boundary kinds per face: [xlo, xhi, ylo, yhi, zlo, zhi].
// Dirichlet ghosts hold frozen values written at initialization; fill_ghosts
// leaves them untouched.
struct BcSpec {
  std::array<FaceBc, 6> face{FaceBc::periodic, FaceBc::periodic, FaceBc::periodic,
                             FaceBc::periodic, FaceBc::periodic, FaceBc::periodic};
  void validate() const;  // periodic must pair up
  bool periodic_dir(int dir) const { return face[2 * dir] == FaceBc::periodic; }
  bool all_periodic() const {
    return periodic_dir(0) && periodic_dir(1) && periodic_dir(2);
  }
};

// How Dirichlet ghosts are treated when filling a scalar field.
enum class DirichletMode { keep, zero };

void fill_ghosts(Field& f, const BcSpec& bc, DirichletMode dm = DirichletMode::keep);

// Conserved fields on a grid plus the cached pressure from the last implicit
// solve (kept bit-exact across steps so constant-pressure states are preserved
// to round-off).
struct State {
  Field rho, rhou, rhov, rhow, rhoE;
  Field p;

  State() = default;
  explicit State(const Grid& g)
      : rho(g), rhou(g), rhov(g), rhow(g), rhoE(g), p(g) {}

  const Grid& grid() const { return rho.grid(); }
  Field& mom(int dir) { return dir == 0 ? rhou : (dir == 1 ? rhov : rhow); }
  const Field& mom(int dir) const { return dir == 0 ? rhou : (dir == 1 ? rhov : rhow); }
};

void fill_ghosts(State& s, const BcSpec& bc);

}  // namespace sipfv
