#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace qdpair {

using complexd = std::complex<double>;
using JonesVector = Eigen::Vector2cd;
using JonesMatrix = Eigen::Matrix2cd;

// Polarization convention used throughout (documented once, applied
// globally):
//   H = (1, 0)           V = (0, 1)
//   D = (H + V)/sqrt2    A = (H - V)/sqrt2
//   R = (H + iV)/sqrt2   L = (H - iV)/sqrt2
// Two-qubit basis ordering is (HH, HV, VH, VV), first letter = biexciton
// photon, second = exciton photon.
enum class Pol : int { H = 0, V, D, A, R, L };

inline constexpr int kNumPol = 6;
inline constexpr int kNumChannels = 36;

inline constexpr std::array<Pol, kNumPol> all_pols() {
    return {Pol::H, Pol::V, Pol::D, Pol::A, Pol::R, Pol::L};
}

inline const char* pol_name(Pol p) {
    static constexpr const char* names[] = {"H", "V", "D", "A", "R", "L"};
    return names[static_cast<int>(p)];
}

inline Pol pol_from_name(const std::string& s) {
    for (Pol p : all_pols())
        if (s == pol_name(p)) return p;
    throw std::invalid_argument("unknown polarization label: " + s);
}

inline JonesVector jones(Pol p) {
    const double s = 1.0 / std::sqrt(2.0);
    const complexd i(0.0, 1.0);
    switch (p) {
        case Pol::H: return {1.0, 0.0};
        case Pol::V: return {0.0, 1.0};
        case Pol::D: return {s, s};
        case Pol::A: return {s, -s};
        case Pol::R: return {s, i * s};
        case Pol::L: return {s, -i * s};
    }
    throw std::invalid_argument("bad Pol");
}

/// Channels are stored in the fixed order HH, HV, HD, ..., HL, VH, ..., LL.
inline constexpr int channel_index(Pol i, Pol j) {
    return static_cast<int>(i) * kNumPol + static_cast<int>(j);
}

inline std::string channel_name(int index) {
    return std::string(pol_name(static_cast<Pol>(index / kNumPol))) +
           pol_name(static_cast<Pol>(index % kNumPol));
}

/// Basis setting of a single-arm projection: 0 = Z (H/V), 1 = X (D/A),
/// 2 = Y (R/L). The tomography likelihood normalizes counts within each of
/// the 9 two-arm setting groups.
inline constexpr int basis_setting(Pol p) {
    return static_cast<int>(p) / 2;
}

inline constexpr int setting_group(int channel) {
    const Pol i = static_cast<Pol>(channel / kNumPol);
    const Pol j = static_cast<Pol>(channel % kNumPol);
    return 3 * basis_setting(i) + basis_setting(j);
}

// --- waveplates -----------------------------------------------------------

enum class WaveplateKind { Half, Quarter };

/// Half-wave plate with fast axis at `theta` from horizontal.
inline JonesMatrix half_waveplate(double theta) {
    const double c = std::cos(2.0 * theta), s = std::sin(2.0 * theta);
    JonesMatrix m;
    m << c, s,
         s, -c;
    return m;
}

/// Quarter-wave plate with fast axis at `phi` from horizontal (unitary
/// normalization).
inline JonesMatrix quarter_waveplate(double phi) {
    const complexd i(0.0, 1.0);
    const double c2 = std::cos(phi) * std::cos(phi);
    const double s2 = std::sin(phi) * std::sin(phi);
    const complexd off = 0.5 * (1.0 - i) * std::sin(2.0 * phi);
    JonesMatrix m;
    m << c2 + i * s2, off,
         off, s2 + i * c2;
    return m;
}

inline JonesMatrix waveplate_unitary(WaveplateKind kind, double angle) {
    return kind == WaveplateKind::Half ? half_waveplate(angle)
                                       : quarter_waveplate(angle);
}

/// General waveplate U(theta, phi) = QWP(phi) * HWP(theta), the composition
/// used for local basis rotations.
inline JonesMatrix general_waveplate(double theta, double phi) {
    return quarter_waveplate(phi) * half_waveplate(theta);
}

/// Parameters of a product unitary U1(theta1, phi1) x U2(theta2, phi2).
struct LocalUnitaryParams {
    double theta1 = 0.0;
    double phi1 = 0.0;
    double theta2 = 0.0;
    double phi2 = 0.0;

    /// Angles reduced to [0, 2*pi).
    LocalUnitaryParams canonical() const {
        auto wrap = [](double a) {
            const double twopi = 2.0 * M_PI;
            double r = std::fmod(a, twopi);
            return r < 0.0 ? r + twopi : r;
        };
        return {wrap(theta1), wrap(phi1), wrap(theta2), wrap(phi2)};
    }
};

inline Eigen::Matrix4cd local_unitary(const LocalUnitaryParams& u) {
    const JonesMatrix u1 = general_waveplate(u.theta1, u.phi1);
    const JonesMatrix u2 = general_waveplate(u.theta2, u.phi2);
    Eigen::Matrix4cd out;
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
            out.block<2, 2>(2 * a, 2 * b) = u1(a, b) * u2;
    return out;
}

// --- projectors ------------------------------------------------------------

inline Eigen::Vector4cd product_ket(Pol i, Pol j) {
    const JonesVector a = jones(i), b = jones(j);
    Eigen::Vector4cd k;
    k << a(0) * b(0), a(0) * b(1), a(1) * b(0), a(1) * b(1);
    return k;
}

/// Rank-1 projector |ij><ij| onto the two-photon product state.
inline Eigen::Matrix4cd projector(Pol i, Pol j) {
    const Eigen::Vector4cd k = product_ket(i, j);
    return k * k.adjoint();
}

/// All 36 projectors in channel order; built once.
inline const std::array<Eigen::Matrix4cd, kNumChannels>& all_projectors() {
    static const std::array<Eigen::Matrix4cd, kNumChannels> table = [] {
        std::array<Eigen::Matrix4cd, kNumChannels> t;
        for (Pol i : all_pols())
            for (Pol j : all_pols())
                t[channel_index(i, j)] = projector(i, j);
        return t;
    }();
    return table;
}

}  // namespace qdpair
