#include "qdsim/units.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "qdsim/errors.hpp"

namespace qdsim {

UnitSystem UnitSystem::standard() { return from(20e-9, 1.08 * electron_mass); }

UnitSystem UnitSystem::from(double x0_m, double m_eff_kg, double e_charge_c) {
  if (!(x0_m > 0) || !(m_eff_kg > 0) || !(e_charge_c > 0)) {
    throw InvalidArgument("unit system requires positive x0, effective mass and charge");
  }
  UnitSystem u;
  u.x0 = x0_m;
  u.m_eff = m_eff_kg;
  u.e_charge = e_charge_c;
  u.E0 = hbar * hbar / (2.0 * m_eff_kg * x0_m * x0_m);
  u.t0 = 2.0 * std::numbers::pi * hbar / u.E0;
  u.hbar_dimensionless = hbar / (u.E0 * u.t0);
  return u;
}

namespace {

double scale_of(Quantity kind, const UnitSystem& u) {
  switch (kind) {
    case Quantity::length: return u.x0;
    case Quantity::energy: return u.E0;
    case Quantity::time: return u.t0;
  }
  throw InvalidArgument("unknown unit kind");
}

}  // namespace

double convert(double value, Quantity kind, Direction direction, const UnitSystem& units) {
  const double s = scale_of(kind, units);
  return direction == Direction::to_dimensionless ? value / s : value * s;
}

Quantity parse_quantity(std::string_view name) {
  if (name == "length") return Quantity::length;
  if (name == "energy") return Quantity::energy;
  if (name == "time") return Quantity::time;
  throw InvalidArgument("unknown unit kind '" + std::string(name) + "'");
}

UnitLabel parse_unit(std::string_view label) {
  using Q = Quantity;
  if (label == "x0") return {Q::length, 1.0, true};
  if (label == "E0") return {Q::energy, 1.0, true};
  if (label == "t0") return {Q::time, 1.0, true};
  if (label == "m") return {Q::length, 1.0, false};
  if (label == "nm") return {Q::length, 1e-9, false};
  if (label == "s") return {Q::time, 1.0, false};
  if (label == "ns") return {Q::time, 1e-9, false};
  if (label == "ps") return {Q::time, 1e-12, false};
  if (label == "J") return {Q::energy, 1.0, false};
  // eV-based labels are resolved against the unit system's charge at conversion time.
  if (label == "eV") return {Q::energy, -1.0, false};
  if (label == "meV") return {Q::energy, -1e-3, false};
  if (label == "ueV") return {Q::energy, -1e-6, false};
  throw InvalidArgument("unknown unit '" + std::string(label) + "'");
}

namespace {

double si_scale(const UnitLabel& l, const UnitSystem& units) {
  return l.si_scale < 0 ? -l.si_scale * units.e_charge : l.si_scale;
}

}  // namespace

double to_dimensionless(double value, std::string_view label, const UnitSystem& units) {
  const UnitLabel l = parse_unit(label);
  if (l.dimensionless) return value;
  return convert(value * si_scale(l, units), l.kind, Direction::to_dimensionless, units);
}

double from_dimensionless(double value, std::string_view label, const UnitSystem& units) {
  const UnitLabel l = parse_unit(label);
  if (l.dimensionless) return value;
  return convert(value, l.kind, Direction::from_dimensionless, units) / si_scale(l, units);
}

}  // namespace qdsim
