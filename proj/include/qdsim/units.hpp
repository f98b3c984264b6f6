#pragma once

#include <string_view>

namespace qdsim {

enum class Quantity { length, energy, time };
enum class Direction { to_dimensionless, from_dimensionless };

/// Dimensionless unit system of the simulator.
///
/// The length unit x0 and the effective mass fix everything else:
///   E0 = hbar^2 / (2 m x0^2),  t0 = 2 pi hbar / E0.
/// With these units the TDSE reads  i/(2 pi) dpsi/dtau = [-d^2/dxi^2 + v] psi,
/// so `hbar_dimensionless` is 1/(2 pi).
struct UnitSystem {
  double x0 = 0;        // m
  double E0 = 0;        // J
  double t0 = 0;        // s
  double m_eff = 0;     // kg
  double e_charge = 0;  // C
  double hbar_dimensionless = 0;

  static constexpr double hbar = 1.054571817e-34;  // J s
  static constexpr double electron_mass = 9.109e-31;
  static constexpr double elementary_charge = 1.602e-19;

  /// x0 = 20 nm, m* = 1.08 m_e.
  static UnitSystem standard();
  static UnitSystem from(double x0_m, double m_eff_kg, double e_charge_c = elementary_charge);

  double E0_ueV() const { return E0 / e_charge * 1e6; }
  double E0_meV() const { return E0 / e_charge * 1e3; }
};

/// SI value <-> dimensionless value. SI means m, J, s.
double convert(double value, Quantity kind, Direction direction, const UnitSystem& units);

/// Parses "length" / "energy" / "time". Unknown names throw InvalidArgument.
Quantity parse_quantity(std::string_view name);

/// A physical unit label together with its quantity and SI scale.
struct UnitLabel {
  Quantity kind;
  double si_scale;      // SI value of one unit; ignored when dimensionless
  bool dimensionless;   // x0, E0, t0
};

/// Recognised: m, nm, x0; J, eV, meV, ueV, E0; s, ns, ps, t0.
UnitLabel parse_unit(std::string_view label);

/// Converts `value` given in `label` units to simulator units.
double to_dimensionless(double value, std::string_view label, const UnitSystem& units);
double from_dimensionless(double value, std::string_view label, const UnitSystem& units);

}  // namespace qdsim
