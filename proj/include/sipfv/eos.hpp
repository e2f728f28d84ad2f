#pragma once

#include <string>

namespace sipfv {

struct SutherlandParams {
  double mu0 = 0.0;
  double T0 = 1.0;
  double beta = 1.0;
  double s = 0.0;
  bool constant() const { return beta == 1.0 && s == 0.0; }
};

double sutherland_viscosity(double T, const SutherlandParams& p);

enum class EosKind { ideal, redlich_kwong };

// Thermodynamic closure. Ideal gas: e = p/((gamma-1) rho). The cubic family
// p(T,rho) = R T/(v-b) - a(T)/((v-b r1)(v-b r2)) with v = 1/rho is fixed to
// Redlich-Kwong parameters r1 = 0, r2 = -1, a(T) = 1/(2 sqrt(T)); the
// corresponding caloric law is e = cv T + (a - T a')/b * U(v,b,r1,r2).
class EosModel {
 public:
  EosModel() = default;
  EosModel(EosKind kind, double gamma, double R, double b = 0.0);

  EosKind kind() const { return kind_; }
  double gamma() const { return gamma_; }
  double R() const { return R_; }
  double cv() const { return cv_; }
  double cp() const { return cp_; }
  double covolume() const { return b_; }

  // e(p, rho)
  double internal_energy(double p, double rho) const;
  // rho * e(p, rho); for the ideal gas this is p/(gamma-1) and never touches
  // rho, which keeps uniform-pressure states bit-exact.
  double rho_e(double p, double rho) const;
  double pressure_from_e(double e, double rho) const;
  double enthalpy(double p, double rho) const;
  double temperature(double p, double rho) const;
  double sound_speed(double p, double rho) const;

  // cubic EOS primitives
  double cubic_pressure(double T, double rho) const;
  double cubic_dp_dT(double T, double rho) const;
  double cubic_energy(double T, double rho) const;
  double cubic_de_dT(double T, double rho) const;
  double temperature_from_pressure(double p, double rho) const;
  double temperature_from_energy(double e, double rho) const;

  // d e(p, rho) / dp at fixed rho (analytic chain rule for the cubic EOS)
  double de_dp(double p, double rho) const;

  // true if (p, rho) maps to an admissible thermodynamic state
  bool admissible(double p, double rho) const;

 private:
  EosKind kind_ = EosKind::ideal;
  double gamma_ = 1.4;
  double R_ = 0.4;
  double cv_ = 1.0;
  double cp_ = 1.4;
  double b_ = 0.0;  // co-volume
  static constexpr double r1_ = 0.0;
  static constexpr double r2_ = -1.0;
  static constexpr double T_floor_ = 1e-12;

  double attraction(double T) const;        // a(T)
  double attraction_dT(double T) const;     // a'(T)
  double attraction_d2T(double T) const;    // a''(T)
  double U_over_b(double v) const;          // U(v,b,r1,r2)/b, with the b->0 limit -1/v
};

EosKind eos_kind_from_string(const std::string& s);

}  // namespace sipfv
