#pragma once

// Physical constants and unit helpers. Energies are in micro-eV, times in
// nanoseconds unless a suffix says otherwise; count rates are in Hz.

namespace qdpair {

// CODATA 2018: hbar = 6.582119569e-16 eV s.
inline constexpr double kHbarUevNs = 0.6582119569;      // ueV * ns
inline constexpr double kPlanckUevNs = 4.135667696;     // h = 2*pi*hbar, ueV * ns

inline constexpr double ps_to_ns(double ps) { return ps * 1e-3; }
inline constexpr double ns_to_ps(double ns) { return ns * 1e3; }

/// Phase S*tau/hbar accumulated between |HH> and |VV> for splitting
/// `fss_uev` after a delay `tau_ns`.
inline constexpr double fss_phase(double fss_uev, double tau_ns) {
    return fss_uev * tau_ns / kHbarUevNs;
}

/// Oscillation period h/S in ns.
inline constexpr double fss_period_ns(double fss_uev) {
    return kPlanckUevNs / fss_uev;
}

/// Oscillation frequency S/h in MHz.
inline constexpr double fss_frequency_mhz(double fss_uev) {
    return fss_uev / kPlanckUevNs * 1e3;
}

}  // namespace qdpair
