#include <doctest.h>

#include <cmath>
#include <random>

#include "sfdeom/model.hpp"

using namespace sfdeom;

TEST_CASE("alpha descriptors from the frequency ratio") {
    // {lambda, theta_B} -> {alpha0, alpha1, alpha2} at omega_B = 1
    auto a = alpha_from_theta(0.1, 1.0, 1.0);
    CHECK(a.alpha0 == doctest::Approx(0.1).epsilon(1e-14));
    CHECK(a.alpha1 == doctest::Approx(-std::sqrt(0.2)).epsilon(1e-14));
    CHECK(a.alpha2 == 0.0);

    a = alpha_from_theta(0.0, 0.8, 1.0);
    CHECK(a.alpha0 == 0.0);
    CHECK(a.alpha1 == 0.0);
    CHECK(a.alpha2 == doctest::Approx(-0.18).epsilon(1e-14));

    a = alpha_from_theta(0.0, 1.25, 1.0);
    CHECK(a.alpha2 == doctest::Approx(0.28125).epsilon(1e-14));

    a = alpha_from_theta(0.1, 1.25, 1.0);
    CHECK(a.alpha0 == doctest::Approx(0.15625).epsilon(1e-14));
    CHECK(a.alpha1 == doctest::Approx(-std::sqrt(0.2) * 1.5625).epsilon(1e-14));
    CHECK(a.alpha2 == doctest::Approx(0.28125).epsilon(1e-14));

    // sign(alpha2) tracks sign(theta_B - 1)
    for (double th : {0.5, 0.9, 1.0, 1.1, 2.0}) {
        const double s = alpha_from_theta(0.2, th, 1.3).alpha2;
        if (th < 1.0) CHECK(s < 0.0);
        if (th == 1.0) CHECK(s == 0.0);
        if (th > 1.0) CHECK(s > 0.0);
    }
}

TEST_CASE("psd_sqrt on random positive semidefinite matrices") {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> n;
    for (int trial = 0; trial < 100; ++trial) {
        const int d = 2 + trial % 7;
        Eigen::MatrixXcd A(d, d);
        for (int r = 0; r < d; ++r)
            for (int c = 0; c < d; ++c) A(r, c) = std::complex<double>(n(rng), n(rng));
        Eigen::MatrixXcd Q = A * A.adjoint();  // PSD by construction
        Eigen::MatrixXcd S = psd_sqrt(Q);
        CHECK((S * S - Q).cwiseAbs().maxCoeff() < 1e-10 * Q.cwiseAbs().maxCoeff());
        CHECK((S - S.adjoint()).cwiseAbs().maxCoeff() < 1e-12);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(S);
        CHECK(es.eigenvalues().minCoeff() > -1e-10);
    }
}

TEST_CASE("psd_sqrt rejects indefinite input") {
    Eigen::MatrixXcd Q = Eigen::MatrixXcd::Identity(2, 2);
    Q(1, 1) = -0.5;
    CHECK_THROWS(psd_sqrt(Q));
    // tiny negative eigenvalues are clipped rather than rejected
    Q(1, 1) = -1e-9;
    CHECK_NOTHROW(psd_sqrt(Q));
}

TEST_CASE("two-state model matrices and the dressed Hamiltonian") {
    auto [H, Q] = two_state_model(0.7, 1.0);
    CHECK(H(1, 1).real() == doctest::Approx(0.7));
    CHECK(H(0, 0) == std::complex<double>(0.0));
    CHECK(H(0, 1) == std::complex<double>(1.0));
    CHECK(H(1, 0) == std::complex<double>(1.0));
    CHECK(Q(1, 1) == std::complex<double>(1.0));
    CHECK(Q(0, 0) == std::complex<double>(0.0));

    auto model = SystemModel::make(H, Q, AlphaDescriptors{0.15625, -0.5, 0.28125});
    CHECK((model.dressed_hamiltonian() - (H + 0.15625 * Q)).cwiseAbs().maxCoeff() < 1e-15);
    // Q is a projector, so its principal square root is itself
    CHECK((model.Q_sqrt - Q).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(model.sqrt_alpha2 == std::complex<double>(std::sqrt(0.28125), 0.0));
}

TEST_CASE("sqrt(alpha2) takes the principal branch for negative alpha2") {
    auto [H, Q] = two_state_model(0.0, 1.0);
    auto model = SystemModel::make(H, Q, AlphaDescriptors{0.0, 0.0, -0.18});
    CHECK(model.sqrt_alpha2.real() == doctest::Approx(0.0));
    CHECK(model.sqrt_alpha2.imag() == doctest::Approx(std::sqrt(0.18)).epsilon(1e-14));
    CHECK(std::abs(model.sqrt_alpha2 * model.sqrt_alpha2 - std::complex<double>(-0.18, 0.0)) <
          1e-14);
}

TEST_CASE("non-Hermitian inputs are rejected") {
    Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(2, 2);
    H(0, 1) = std::complex<double>(0.0, 1.0);  // missing the conjugate partner
    auto Q = Eigen::MatrixXcd::Identity(2, 2).eval();
    CHECK_THROWS(SystemModel::make(H, Q, AlphaDescriptors{}));
}
