#pragma once

#include "sipfv/eos.hpp"
#include "sipfv/grid.hpp"

namespace sipfv {

// Velocity divergence with the wide central stencil
// (u_{i+1}-u_{i-1})/dx + ... (no 1/2 factor; it only feeds the flattener
// threshold). Ghosts of s must be filled.
void divergence_u(const State& s, Field& out);

// A-priori shock detector chi in [0,1]:
// chi = min(1, max(0, -(div u + k1 c_min)/(k1 c_min))) with c_min the minimum
// sound speed over the cell and its face neighbors, followed by one
// max-propagation pass onto compressing neighbors. Returns max(chi).
double flattener(const State& s, const EosModel& eos, double eps, double k1, Field& chi);

// Convex blend Q = chi*Q_low + (1-chi)*Q_high written into high (cells with
// chi == 0 are left untouched). Returns the conservation defect diagnostic
// sum(chi*(Q_low - Q_high)) of the density component, scaled by cell volume.
double blend(State& high, const State& low, const Field& chi, const EosModel& eos,
             double eps);

}  // namespace sipfv
