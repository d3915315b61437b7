#include <catch2/catch_amalgamated.hpp>

#include "qdpair/polarization.hpp"

using namespace qdpair;
using Catch::Approx;

namespace {
// phase-insensitive ket comparison
double overlap2(const JonesVector& a, const JonesVector& b) {
    return std::norm(a.dot(b));
}
}  // namespace

TEST_CASE("Jones vectors follow the fixed convention") {
    const double s = 1.0 / std::sqrt(2.0);
    CHECK(jones(Pol::D)(0).real() == Approx(s));
    CHECK(jones(Pol::D)(1).real() == Approx(s));
    CHECK(jones(Pol::A)(1).real() == Approx(-s));
    CHECK(jones(Pol::R)(1).imag() == Approx(s));
    CHECK(jones(Pol::L)(1).imag() == Approx(-s));
    for (Pol p : all_pols()) CHECK(jones(p).norm() == Approx(1.0));
    // conjugate pairs are orthogonal
    CHECK(overlap2(jones(Pol::H), jones(Pol::V)) == Approx(0.0).margin(1e-15));
    CHECK(overlap2(jones(Pol::D), jones(Pol::A)) == Approx(0.0).margin(1e-15));
    CHECK(overlap2(jones(Pol::R), jones(Pol::L)) == Approx(0.0).margin(1e-15));
}

TEST_CASE("waveplates are unitary for arbitrary angles") {
    for (double angle : {0.0, 0.1, 0.5, 1.0, 2.2, 3.0, -0.7}) {
        for (WaveplateKind k : {WaveplateKind::Half, WaveplateKind::Quarter}) {
            const JonesMatrix u = waveplate_unitary(k, angle);
            CHECK((u.adjoint() * u - JonesMatrix::Identity()).cwiseAbs().maxCoeff() <
                  1e-12);
        }
    }
}

TEST_CASE("waveplate settings from the calibration table") {
    // QWP(0) HWP(0) leaves |H> alone
    const JonesVector h = quarter_waveplate(0.0) * half_waveplate(0.0) * jones(Pol::H);
    CHECK(overlap2(h, jones(Pol::H)) == Approx(1.0));
    // HWP at 22.5 deg turns |H> into |D>
    const JonesVector d = half_waveplate(M_PI / 8.0) * jones(Pol::H);
    CHECK(overlap2(d, jones(Pol::D)) == Approx(1.0));
    // HWP at 45 deg turns |H> into |V>
    const JonesVector v = half_waveplate(M_PI / 4.0) * jones(Pol::H);
    CHECK(overlap2(v, jones(Pol::V)) == Approx(1.0));
    // full table row for D: QWP 45 deg after HWP 22.5 deg
    const JonesVector d2 =
        quarter_waveplate(M_PI / 4.0) * half_waveplate(M_PI / 8.0) * jones(Pol::H);
    CHECK(overlap2(d2, jones(Pol::D)) == Approx(1.0));
}

TEST_CASE("projectors are rank-1, idempotent, unit trace") {
    for (Pol i : all_pols())
        for (Pol j : all_pols()) {
            const Eigen::Matrix4cd p = projector(i, j);
            CHECK(std::abs(p.trace().real() - 1.0) < 1e-12);
            CHECK((p * p - p).cwiseAbs().maxCoeff() < 1e-12);
            CHECK((p - p.adjoint()).cwiseAbs().maxCoeff() < 1e-14);
        }
}

TEST_CASE("channel order is HH, HV, ..., LL with 9 setting groups of 4") {
    CHECK(channel_index(Pol::H, Pol::H) == 0);
    CHECK(channel_index(Pol::H, Pol::L) == 5);
    CHECK(channel_index(Pol::V, Pol::H) == 6);
    CHECK(channel_index(Pol::L, Pol::L) == 35);
    CHECK(channel_name(0) == "HH");
    CHECK(channel_name(7) == "VV");
    CHECK(channel_name(35) == "LL");
    std::array<int, 9> group_sizes{};
    for (int c = 0; c < kNumChannels; ++c) group_sizes[setting_group(c)]++;
    for (int g = 0; g < 9; ++g) CHECK(group_sizes[g] == 4);
    // each setting group resolves the identity
    for (int g = 0; g < 9; ++g) {
        Eigen::Matrix4cd sum = Eigen::Matrix4cd::Zero();
        for (int c = 0; c < kNumChannels; ++c)
            if (setting_group(c) == g) sum += all_projectors()[c];
        CHECK((sum - Eigen::Matrix4cd::Identity()).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("local unitary parameters canonicalize into [0, 2pi)") {
    const LocalUnitaryParams u{-0.5, 7.0, 13.0, -6.4};
    const LocalUnitaryParams c = u.canonical();
    for (double a : {c.theta1, c.phi1, c.theta2, c.phi2}) {
        CHECK(a >= 0.0);
        CHECK(a < 2.0 * M_PI);
    }
    const Eigen::Matrix4cd m1 = local_unitary(u);
    const Eigen::Matrix4cd m2 = local_unitary(c);
    CHECK((m1 - m2).cwiseAbs().maxCoeff() < 1e-9);
}
