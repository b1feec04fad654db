// model.hpp — system Hamiltonian, dissipative-mode operator and its principal
// square root, and the {alpha0, alpha1, alpha2} coupling descriptors.

#pragma once

#include <complex>
#include <utility>

#include <Eigen/Dense>

namespace sfdeom {

struct AlphaDescriptors {
    double alpha0{0.0};
    double alpha1{0.0};
    double alpha2{0.0};
};

// alpha0 = lambda theta^2, alpha1 = -sqrt(2 lambda omega_B) theta^2,
// alpha2 = (omega_B/2)(theta^2 - 1)
AlphaDescriptors alpha_from_theta(double lambda, double theta_B, double omega_B);

// Hermitian PSD principal square root via eigendecomposition. Eigenvalues in
// [-1e-8, 0) are clipped to 0; below -1e-8 the input is rejected.
Eigen::MatrixXcd psd_sqrt(const Eigen::MatrixXcd& Q);

struct SystemModel {
    Eigen::MatrixXcd H_S;
    Eigen::MatrixXcd Q_S;
    Eigen::MatrixXcd Q_sqrt;
    double alpha0{0.0};
    double alpha1{0.0};
    double alpha2{0.0};
    std::complex<double> sqrt_alpha2{0.0};  // principal branch: i*sqrt(|a2|) for a2 < 0

    Eigen::Index dim() const { return H_S.rows(); }
    Eigen::MatrixXcd dressed_hamiltonian() const { return H_S + alpha0 * Q_S; }  // H_0

    // validates hermiticity/PSD and fills the derived members
    static SystemModel make(Eigen::MatrixXcd H_S, Eigen::MatrixXcd Q_S,
                            const AlphaDescriptors& alpha);
};

// H_S = omega10 |1><1| + V(|1><0| + |0><1|), Q_S = |1><1|
std::pair<Eigen::MatrixXcd, Eigen::MatrixXcd> two_state_model(double omega10, double V);

}  // namespace sfdeom
