#pragma once

#include <array>
#include <string>
#include <vector>

#include "sipfv/flux.hpp"
#include "sipfv/implicit.hpp"
#include "sipfv/recon.hpp"

namespace sipfv {

// Double Butcher tableau of a semi-implicit IMEX scheme with shared weights.
struct ButcherPair {
  std::string name;
  int s = 1;
  std::vector<double> Ae, Ai;  // s x s, row major
  std::vector<double> b, ce, ci;
  bool stiffly_accurate = false;

  double ae(int i, int j) const { return Ae[i * s + j]; }
  double ai(int i, int j) const { return Ai[i * s + j]; }
  void validate() const;
};

ButcherPair tableau(const std::string& name);

struct PhysicsConfig {
  EosModel eos;
  TransportParams tp;
  double eps = 1.0;
};

enum class EnergyUpdate { flux, eos };

struct NumericsConfig {
  int M = 2;
  ButcherPair pair;
  ImplicitConfig imp;
  double cfl = 0.9;
  double dt_max = 1e30;
  EnergyUpdate energy = EnergyUpdate::flux;
};

// material-velocity CFL condition with viscous eigenvalues, no sound speed
double compute_dt(const State& s, const EosModel& eos, const TransportParams& tp,
                  double eps, double cfl, double dt_max);

struct StepperStats {
  long solves = 0;
  long lin_iters = 0;
  long newton_iters = 0;
  int newton_max = 0;
  long newton_le4 = 0;  // solves converged in <= 4 Newton iterations
  void reset() { *this = StepperStats{}; }
};

// Semi-implicit IMEX driver. Owns the reconstruction data and all stage
// workspaces; the State carries the pressure of the last implicit solve.
class Stepper {
 public:
  Stepper(const Grid& g, const BcSpec& bc, PhysicsConfig phys, NumericsConfig num);

  void step(State& s, double dt);
  const StepperStats& stats() const { return stats_; }
  StepperStats& stats() { return stats_; }
  const NumericsConfig& numerics() const { return num_; }
  const PhysicsConfig& physics() const { return phys_; }
  const ReconData& recon_data() const { return rd_; }
  const BcSpec& bc() const { return bc_; }

  // reconstruction of an arbitrary state with this stepper's degree
  void reconstruct(const State& s, PolyState& out) { reconstruct_state_3d(s, rd_, out); }

 private:
  void stage_implicit(const State& QE, const Field& pE, const State& Qbase, double dt_eff,
                      State& Qs);
  void stage_explicit(const State& QE, const Field& pE, const State& Qbase,
                      std::array<Field, 5>& k);
  void recover_pressure(const State& q, Field& p) const;
  bool heat_implicit() const;

  const Grid* g_;
  BcSpec bc_;
  PhysicsConfig phys_;
  NumericsConfig num_;
  ReconData rd_;
  FdmCache fdm_;
  StepperStats stats_;

  PolyState poly_;
  std::array<Field, 5> Ldiv_;
  Field h_, Tcoef_, lam_, pE_, b_, psol_, p_carry_;
  std::array<Field, 3> uadv_;
  State QE_, Qbase_, Qs_;
  std::vector<std::array<Field, 5>> k_;
};

}  // namespace sipfv
