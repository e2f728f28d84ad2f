#include "sipfv/eos.hpp"

#include <cmath>
#include <stdexcept>

namespace sipfv {

double sutherland_viscosity(double T, const SutherlandParams& p) {
  if (T <= 0.0) throw std::invalid_argument("sutherland: T must be positive");
  if (p.constant()) return p.mu0;
  return p.mu0 * std::pow(T / p.T0, p.beta) * (p.T0 + p.s) / (T + p.s);
}

EosKind eos_kind_from_string(const std::string& s) {
  if (s == "ideal") return EosKind::ideal;
  if (s == "redlich_kwong") return EosKind::redlich_kwong;
  throw std::invalid_argument("unknown eos: " + s);
}

EosModel::EosModel(EosKind kind, double gamma, double R, double b)
    : kind_(kind), gamma_(gamma), R_(R), b_(b) {
  if (!(gamma > 1.0)) throw std::invalid_argument("eos: gamma must exceed 1");
  if (!(R > 0.0)) throw std::invalid_argument("eos: R must be positive");
  if (b < 0.0) throw std::invalid_argument("eos: co-volume must be >= 0");
  cv_ = R_ / (gamma_ - 1.0);
  cp_ = gamma_ * cv_;
}

double EosModel::attraction(double T) const { return 0.5 / std::sqrt(T); }
double EosModel::attraction_dT(double T) const { return -0.25 / (T * std::sqrt(T)); }
double EosModel::attraction_d2T(double T) const { return 0.375 / (T * T * std::sqrt(T)); }

double EosModel::U_over_b(double v) const {
  // U = ln((v - b r1)/(v - b r2)) / (r1 - r2); for RK parameters this is
  // ln(v/(v+b)), and U/b -> -1/v as b -> 0.
  if (b_ == 0.0) return -1.0 / v;
  return std::log(v / (v + b_)) / b_;
}

double EosModel::cubic_pressure(double T, double rho) const {
  if (!(T > 0.0) || !(rho > 0.0))
    throw std::invalid_argument("cubic_pressure: need T > 0, rho > 0");
  const double v = 1.0 / rho;
  if (v <= b_) throw std::invalid_argument("cubic_pressure: specific volume below co-volume");
  return R_ * T / (v - b_) - attraction(T) / ((v - b_ * r1_) * (v - b_ * r2_));
}

double EosModel::cubic_dp_dT(double T, double rho) const {
  const double v = 1.0 / rho;
  return R_ / (v - b_) - attraction_dT(T) / ((v - b_ * r1_) * (v - b_ * r2_));
}

double EosModel::cubic_energy(double T, double rho) const {
  const double v = 1.0 / rho;
  const double aTa = attraction(T) - T * attraction_dT(T);
  return cv_ * T + aTa * U_over_b(v);
}

double EosModel::cubic_de_dT(double T, double rho) const {
  const double v = 1.0 / rho;
  return cv_ - T * attraction_d2T(T) * U_over_b(v);
}

double EosModel::temperature_from_pressure(double p, double rho) const {
  if (kind_ == EosKind::ideal) return p / (R_ * rho);
  double T = std::max(p / (R_ * rho), T_floor_);
  for (int it = 0; it < 100; ++it) {
    const double f = cubic_pressure(T, rho) - p;
    if (std::abs(f) <= 1e-12 * std::max(1.0, std::abs(p))) return T;
    const double df = cubic_dp_dT(T, rho);
    double Tn = T - f / df;
    if (Tn < T_floor_) Tn = 0.5 * (T + T_floor_);
    T = Tn;
  }
  throw std::runtime_error("temperature_from_pressure: Newton did not converge");
}

double EosModel::temperature_from_energy(double e, double rho) const {
  if (kind_ == EosKind::ideal) return e / cv_;
  double T = std::max(e / cv_, T_floor_);
  for (int it = 0; it < 100; ++it) {
    const double f = cubic_energy(T, rho) - e;
    if (std::abs(f) <= 1e-13 * std::max(1.0, std::abs(e))) return T;
    const double df = cubic_de_dT(T, rho);
    double Tn = T - f / df;
    if (Tn < T_floor_) Tn = 0.5 * (T + T_floor_);
    T = Tn;
  }
  throw std::runtime_error("temperature_from_energy: Newton did not converge");
}

double EosModel::internal_energy(double p, double rho) const {
  if (!(rho > 0.0)) throw std::invalid_argument("internal_energy: rho must be positive");
  if (kind_ == EosKind::ideal) return p / ((gamma_ - 1.0) * rho);
  const double T = temperature_from_pressure(p, rho);
  return cubic_energy(T, rho);
}

double EosModel::rho_e(double p, double rho) const {
  if (kind_ == EosKind::ideal) return p / (gamma_ - 1.0);
  return rho * internal_energy(p, rho);
}

double EosModel::pressure_from_e(double e, double rho) const {
  if (kind_ == EosKind::ideal) return (gamma_ - 1.0) * rho * e;
  const double T = temperature_from_energy(e, rho);
  return cubic_pressure(T, rho);
}

double EosModel::enthalpy(double p, double rho) const {
  return internal_energy(p, rho) + p / rho;
}

double EosModel::temperature(double p, double rho) const {
  return temperature_from_pressure(p, rho);
}

double EosModel::de_dp(double p, double rho) const {
  if (kind_ == EosKind::ideal) return 1.0 / ((gamma_ - 1.0) * rho);
  const double T = temperature_from_pressure(p, rho);
  return cubic_de_dT(T, rho) / cubic_dp_dT(T, rho);
}

double EosModel::sound_speed(double p, double rho) const {
  if (!(rho > 0.0)) throw std::invalid_argument("sound_speed: rho must be positive");
  if (kind_ == EosKind::ideal) {
    if (!(p > 0.0)) throw std::invalid_argument("sound_speed: p must be positive");
    return std::sqrt(gamma_ * p / rho);
  }
  // c^2 = dp/drho|_e + (p/rho^2) dp/de|_rho, finite differences on the
  // (e, rho) -> p map. Diagnostics only.
  const double e = internal_energy(p, rho);
  const double hr = 1e-6 * rho, he = 1e-6 * std::max(std::abs(e), 1e-8);
  const double dpdr = (pressure_from_e(e, rho + hr) - pressure_from_e(e, rho - hr)) / (2 * hr);
  const double dpde = (pressure_from_e(e + he, rho) - pressure_from_e(e - he, rho)) / (2 * he);
  const double c2 = dpdr + p / (rho * rho) * dpde;
  if (!(c2 > 0.0)) throw std::runtime_error("sound_speed: non-positive c^2");
  return std::sqrt(c2);
}

bool EosModel::admissible(double p, double rho) const {
  if (!(rho > 0.0)) return false;
  if (1.0 / rho <= b_) return false;
  if (kind_ == EosKind::ideal) return p >= 0.0;
  try {
    const double T = temperature_from_pressure(p, rho);
    return T > 0.0 && cubic_energy(T, rho) >= 0.0;
  } catch (const std::exception&) {
    return false;
  }
}

}  // namespace sipfv
