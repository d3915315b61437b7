#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "qdpair/quantum.hpp"
#include "support.hpp"

using namespace qdpair;
using Catch::Approx;

namespace {
DensityMatrix werner(double p) {
    return p * pure_density(bell_state(Bell::PhiPlus)) +
           (1.0 - p) * maximally_mixed();
}
}  // namespace

TEST_CASE("Bell states") {
    const double s = 1.0 / std::sqrt(2.0);
    CHECK(bell_state(Bell::PhiPlus)(0).real() == Approx(s));
    CHECK(bell_state(Bell::PhiPlus)(3).real() == Approx(s));
    CHECK(bell_state(Bell::PhiMinus)(3).real() == Approx(-s));
    CHECK(std::abs(bell_state(Bell::PhiPlus).dot(bell_state(Bell::PhiMinus))) <
          1e-15);
    for (Bell b : {Bell::PhiPlus, Bell::PhiMinus, Bell::PsiPlus, Bell::PsiMinus})
        CHECK(bell_state(b).norm() == Approx(1.0));
}

TEST_CASE("cascade state phase evolution") {
    const double s_uev = 3.226;
    // tau = 0 is Phi+
    CHECK((cascade_state(0.0, s_uev) - bell_state(Bell::PhiPlus)).norm() < 1e-12);
    // half period h/(2S) lands on Phi-
    const double half_period = 0.5 * fss_period_ns(s_uev);
    const TwoQubitState at_half = cascade_state(half_period, s_uev);
    CHECK(std::norm(at_half.dot(bell_state(Bell::PhiMinus))) == Approx(1.0));
    // quarter period: fidelity to Phi+ is cos^2(pi/4) = 1/2
    const TwoQubitState at_quarter = cascade_state(0.25 * fss_period_ns(s_uev), s_uev);
    CHECK(std::norm(bell_state(Bell::PhiPlus).dot(at_quarter)) == Approx(0.5));
    // periodicity up to a global phase
    for (double tau : {0.13, 0.61, 1.9}) {
        const TwoQubitState a = cascade_state(tau, s_uev);
        const TwoQubitState b = cascade_state(tau + fss_period_ns(s_uev), s_uev);
        CHECK(std::norm(a.dot(b)) == Approx(1.0));
    }
    // circular-basis form of the same state under our R/L convention:
    // cos(phi/2)(RL + LR) - i sin(phi/2)(RR + LL), up to a global phase
    for (double tau : {0.1, 0.35, 0.8}) {
        const double half_phase = 0.5 * fss_phase(s_uev, tau);
        TwoQubitState circ = std::cos(half_phase) * (product_ket(Pol::R, Pol::L) +
                                                     product_ket(Pol::L, Pol::R));
        circ -= complexd(0.0, 1.0) * std::sin(half_phase) *
                (product_ket(Pol::R, Pol::R) + product_ket(Pol::L, Pol::L));
        circ /= std::sqrt(2.0);
        CHECK(std::norm(circ.dot(cascade_state(tau, s_uev))) == Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("projector expectations on cascade states") {
    const double s_uev = 3.226;
    const DensityMatrix phi_plus = pure_density(bell_state(Bell::PhiPlus));
    CHECK(std::real((projector(Pol::H, Pol::V) * phi_plus).trace()) ==
          Approx(0.0).margin(1e-14));
    CHECK(std::real((projector(Pol::H, Pol::H) * phi_plus).trace()) == Approx(0.5));
    const DensityMatrix quarter =
        pure_density(cascade_state(0.25 * fss_period_ns(s_uev), s_uev));
    CHECK(std::real((projector(Pol::R, Pol::R) * quarter).trace()) == Approx(0.25));
}

TEST_CASE("concurrence on reference states") {
    CHECK(concurrence(pure_density(bell_state(Bell::PhiPlus))) == Approx(1.0));
    CHECK(concurrence(maximally_mixed()) == Approx(0.0).margin(1e-9));
    // Werner analytic oracle max(0, (3p-1)/2)
    CHECK(concurrence(werner(0.9)) == Approx(0.85).epsilon(1e-10));
    for (double p : {0.0, 0.2, 1.0 / 3.0, 0.55, 0.777, 1.0}) {
        const double expected = std::max(0.0, (3.0 * p - 1.0) / 2.0);
        CHECK(concurrence(werner(p)) == Approx(expected).margin(1e-10));
    }
}

TEST_CASE("concurrence rejects badly non-positive input") {
    DensityMatrix rho = maximally_mixed();
    rho(0, 0) = -0.1;
    rho(1, 1) = 0.35;
    CHECK_THROWS_AS(concurrence(rho), invalid_state_error);
}

TEST_CASE("pure-state fidelity") {
    const DensityMatrix phi_plus = pure_density(bell_state(Bell::PhiPlus));
    CHECK(fidelity_pure(phi_plus, bell_state(Bell::PhiPlus)) == Approx(1.0));
    CHECK(fidelity_pure(maximally_mixed(), bell_state(Bell::PsiMinus)) ==
          Approx(0.25));
    const double s_uev = 3.226;
    const DensityMatrix half =
        pure_density(cascade_state(0.5 * fss_period_ns(s_uev), s_uev));
    CHECK(fidelity_pure(half, bell_state(Bell::PhiPlus)) ==
          Approx(0.0).margin(1e-12));
    // fidelity to Phi+ follows cos^2(S tau / 2 hbar)
    for (double tau : {0.1, 0.3, 0.9, 1.7}) {
        const double expected =
            std::pow(std::cos(0.5 * fss_phase(s_uev, tau)), 2);
        CHECK(fidelity_pure(pure_density(cascade_state(tau, s_uev)),
                            bell_state(Bell::PhiPlus)) == Approx(expected));
    }
}

TEST_CASE("fidelity to the maximally entangled set") {
    CHECK(max_entangled_fidelity(pure_density(bell_state(Bell::PhiMinus))) ==
          Approx(1.0));
    CHECK(max_entangled_fidelity(maximally_mixed()) == Approx(0.25));
    std::mt19937_64 rng(7);
    for (int k = 0; k < 50; ++k) {
        const LocalUnitaryParams u = testsup::random_local_params(rng);
        const DensityMatrix rho =
            local_rotate(pure_density(bell_state(Bell::PhiPlus)), u);
        CHECK(max_entangled_fidelity(rho) == Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("local rotations preserve spectra and entanglement") {
    std::mt19937_64 rng(11);
    const DensityMatrix rho = testsup::random_density_hs(rng);
    CHECK((local_rotate(rho, {}) - rho).cwiseAbs().maxCoeff() < 1e-12);

    Eigen::SelfAdjointEigenSolver<DensityMatrix> base(rho, Eigen::EigenvaluesOnly);
    for (int k = 0; k < 200; ++k) {
        const LocalUnitaryParams u = testsup::random_local_params(rng);
        const DensityMatrix rot = local_rotate(rho, u);
        CHECK(std::abs(rot.trace().real() - 1.0) < 1e-10);
        Eigen::SelfAdjointEigenSolver<DensityMatrix> es(rot,
                                                        Eigen::EigenvaluesOnly);
        CHECK((es.eigenvalues() - base.eigenvalues()).cwiseAbs().maxCoeff() <
              1e-10);
    }
}

TEST_CASE("concurrence and F_max invariant under local rotation (1000 draws)") {
    std::mt19937_64 rng(2024);
    // a handful of base states, many rotations
    std::vector<DensityMatrix> bases;
    for (int k = 0; k < 10; ++k) bases.push_back(testsup::random_density_hs(rng));
    bases.push_back(pure_density(bell_state(Bell::PhiPlus)));
    bases.push_back(werner(0.8));
    int draws = 0;
    for (const auto& rho : bases) {
        const double c0 = concurrence(rho);
        const double f0 = max_entangled_fidelity(rho);
        for (int k = 0; k < 90; ++k) {
            const LocalUnitaryParams u = testsup::random_local_params(rng);
            const DensityMatrix rot = local_rotate(rho, u);
            CHECK(concurrence(rot) == Approx(c0).margin(1e-9));
            CHECK(max_entangled_fidelity(rot) == Approx(f0).margin(1e-9));
            ++draws;
        }
    }
    CHECK(draws >= 1000);
}

TEST_CASE("eigen-metrics stable under explicit Hermitization") {
    std::mt19937_64 rng(5);
    for (int k = 0; k < 20; ++k) {
        DensityMatrix rho = testsup::random_density_hs(rng);
        // inject a tiny anti-Hermitian perturbation below tolerance
        rho(0, 1) += complexd(0.0, 5e-12);
        const DensityMatrix sym = 0.5 * (rho + rho.adjoint());
        CHECK(concurrence(rho) == Approx(concurrence(sym)).margin(1e-9));
        CHECK(max_entangled_fidelity(rho) ==
              Approx(max_entangled_fidelity(sym)).margin(1e-9));
    }
}

TEST_CASE("relative entropy on scalar oracles") {
    std::mt19937_64 rng(3);
    const DensityMatrix rho = testsup::random_density_hs(rng);
    CHECK(quantum_rel_entropy(rho, rho) == Approx(0.0).margin(1e-9));

    Eigen::MatrixXcd ket0 = Eigen::MatrixXcd::Zero(2, 2);
    ket0(0, 0) = 1.0;
    const Eigen::MatrixXcd half = 0.5 * Eigen::MatrixXcd::Identity(2, 2);
    CHECK(quantum_rel_entropy(ket0, half) == Approx(1.0));

    Eigen::MatrixXcd diag1 = Eigen::MatrixXcd::Zero(2, 2);
    diag1(0, 0) = 0.75;
    diag1(1, 1) = 0.25;
    // direct scalar evaluation: 0.75 log2(1.5) + 0.25 log2(0.5)
    const double expected = 0.75 * std::log2(1.5) + 0.25 * std::log2(0.5);
    CHECK(quantum_rel_entropy(diag1, half) == Approx(expected).epsilon(1e-12));
    CHECK(expected == Approx(0.18872).margin(5e-6));

    // support violation: sigma misses the |1> component entirely
    CHECK_THROWS_AS(quantum_rel_entropy(half, ket0), std::domain_error);
}

TEST_CASE("validate_density accepts physical states and rejects junk") {
    std::mt19937_64 rng(17);
    for (int k = 0; k < 20; ++k)
        CHECK_NOTHROW(validate_density(testsup::random_density_hs(rng)));
    DensityMatrix bad = maximally_mixed();
    bad(2, 3) = 0.4;  // breaks Hermiticity
    CHECK_THROWS_AS(validate_density(bad), invalid_state_error);
    CHECK_THROWS_AS(validate_density(2.0 * maximally_mixed()), invalid_state_error);
}
