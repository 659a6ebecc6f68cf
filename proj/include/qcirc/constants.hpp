#pragma once

// Physical constants (CODATA 2018 exact values where defined) and the unit
// conventions used throughout: capacitance in fF, inductance in nH, energies
// as E/h in GHz, flux in units of Phi0, charge in units of 2e, time in ns.

#include <cmath>

namespace qcirc {

namespace constants {

inline constexpr double h_planck = 6.62607015e-34;      // J s
inline constexpr double hbar = h_planck / (2.0 * M_PI); // J s
inline constexpr double e_charge = 1.602176634e-19;     // C
inline constexpr double k_boltzmann = 1.380649e-23;     // J/K
inline constexpr double phi0 = h_planck / (2.0 * e_charge); // Wb

// Resistance quantum h/(2e)^2, the scale of mode impedances.
inline constexpr double r_quantum = h_planck / (4.0 * e_charge * e_charge); // Ohm

} // namespace constants

/// Charging energy E_C/h in GHz for a capacitance in fF.
inline double charging_energy_ghz(double c_ff) {
    const double c_farad = c_ff * 1e-15;
    return constants::e_charge * constants::e_charge /
           (2.0 * c_farad * constants::h_planck) * 1e-9;
}

/// Inductive energy E_L/h in GHz for an inductance in nH.
inline double inductive_energy_ghz(double l_nh) {
    const double l_henry = l_nh * 1e-9;
    return constants::phi0 * constants::phi0 /
           (4.0 * M_PI * M_PI * l_henry * constants::h_planck) * 1e-9;
}

/// Josephson energy E_J/h in GHz for a critical current in A.
inline double josephson_energy_ghz(double ic_ampere) {
    return constants::phi0 * ic_ampere / (2.0 * M_PI * constants::h_planck) * 1e-9;
}

/// Josephson inductance in nH for E_J/h in GHz.
inline double josephson_inductance_nh(double ej_ghz) {
    return inductive_energy_ghz(1.0) / ej_ghz;
}

/// Capacitance in fF corresponding to a charging energy E_C/h in GHz.
inline double capacitance_from_ec(double ec_ghz) {
    return charging_energy_ghz(1.0) / ec_ghz;
}

/// Inductance in nH corresponding to an inductive energy E_L/h in GHz.
inline double inductance_from_el(double el_ghz) {
    return inductive_energy_ghz(1.0) / el_ghz;
}

enum class UnitsMode {
    exact,      // CODATA constants
    paper_units // rounded temperature conversion used by the lecture notes
};

/// kT/h in GHz for a temperature in mK. In paper_units mode the rounded
/// conversion implied by the lecture-notes arithmetic (0.8 GHz at 20 mK,
/// i.e. T/25) is used instead of the exact 0.02084 GHz/mK.
inline double thermal_freq_ghz(double t_mk, UnitsMode mode = UnitsMode::exact) {
    if (mode == UnitsMode::paper_units) return t_mk / 25.0;
    return constants::k_boltzmann * (t_mk * 1e-3) / constants::h_planck * 1e-9;
}

/// Bose-Einstein occupation at frequency nu (GHz) and temperature T (mK).
inline double thermal_occupation(double nu_ghz, double t_mk,
                                 UnitsMode mode = UnitsMode::exact) {
    if (t_mk <= 0.0) return 0.0;
    const double x = nu_ghz / thermal_freq_ghz(t_mk, mode);
    return 1.0 / std::expm1(x);
}

} // namespace qcirc
