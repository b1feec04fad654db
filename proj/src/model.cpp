#include "sfdeom/model.hpp"

#include <cmath>
#include <stdexcept>

namespace sfdeom {

AlphaDescriptors alpha_from_theta(double lambda, double theta_B, double omega_B) {
    if (lambda < 0.0) throw std::invalid_argument("model.lambda must be >= 0");
    if (!(theta_B > 0.0)) throw std::invalid_argument("model.theta_B must be > 0");
    if (!(omega_B > 0.0)) throw std::invalid_argument("model.omega_B must be > 0");
    double t2 = theta_B * theta_B;
    return {lambda * t2, -std::sqrt(2.0 * lambda * omega_B) * t2, 0.5 * omega_B * (t2 - 1.0)};
}

Eigen::MatrixXcd psd_sqrt(const Eigen::MatrixXcd& Q) {
    if (Q.rows() != Q.cols()) throw std::invalid_argument("psd_sqrt: matrix must be square");
    double scale = std::max(1.0, Q.norm());
    if ((Q - Q.adjoint()).norm() > 1e-12 * scale) {
        throw std::invalid_argument("psd_sqrt: matrix is not Hermitian");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(Q);
    if (es.info() != Eigen::Success) throw std::runtime_error("psd_sqrt: eigensolver failed");
    Eigen::VectorXd ev = es.eigenvalues();
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
        if (ev(i) < -1e-8) {
            throw std::invalid_argument("psd_sqrt: matrix is not positive semidefinite");
        }
        ev(i) = ev(i) > 0.0 ? std::sqrt(ev(i)) : 0.0;
    }
    return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
}

SystemModel SystemModel::make(Eigen::MatrixXcd H_S, Eigen::MatrixXcd Q_S,
                              const AlphaDescriptors& alpha) {
    if (H_S.rows() != H_S.cols() || Q_S.rows() != Q_S.cols() || H_S.rows() != Q_S.rows()) {
        throw std::invalid_argument("model: H_S and Q_S must be square with equal dimension");
    }
    double hs = std::max(1.0, H_S.norm());
    if ((H_S - H_S.adjoint()).norm() > 1e-12 * hs) {
        throw std::invalid_argument("model: H_S is not Hermitian");
    }
    SystemModel m;
    m.Q_sqrt = psd_sqrt(Q_S);  // also checks hermiticity and PSD
    m.H_S = std::move(H_S);
    m.Q_S = std::move(Q_S);
    m.alpha0 = alpha.alpha0;
    m.alpha1 = alpha.alpha1;
    m.alpha2 = alpha.alpha2;
    m.sqrt_alpha2 = alpha.alpha2 >= 0.0
                        ? std::complex<double>(std::sqrt(alpha.alpha2), 0.0)
                        : std::complex<double>(0.0, std::sqrt(-alpha.alpha2));
    return m;
}

std::pair<Eigen::MatrixXcd, Eigen::MatrixXcd> two_state_model(double omega10, double V) {
    Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(2, 2);
    H(1, 1) = omega10;
    H(0, 1) = V;
    H(1, 0) = V;
    Eigen::MatrixXcd Q = Eigen::MatrixXcd::Zero(2, 2);
    Q(1, 1) = 1.0;
    return {H, Q};
}

}  // namespace sfdeom
