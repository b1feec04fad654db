// bath.hpp — Brownian-oscillator spectral density, reference correlation
// function by quadrature, and its exponential sum-over-poles expansion.

#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace sfdeom {

using cplx = std::complex<double>;

struct BrownianOscillatorBath {
    double zeta{1.0};     // friction (energy units, k_BT = 1)
    double omega_B{1.0};  // characteristic frequency
    double beta{1.0};     // inverse temperature

    void check() const;  // throws std::invalid_argument
};

enum class PoleScheme { matsubara, pade };

PoleScheme pole_scheme_from_string(const std::string& s);
std::string to_string(PoleScheme s);

struct BathTerm {
    cplx eta;    // amplitude (energy^2)
    cplx gamma;  // decay rate (energy), Re gamma >= 0
};

// C(t) ~= sum_k eta_k exp(-gamma_k t) for t >= 0, together with the
// conjugate-pair map kbar defined by gamma_{kbar} = conj(gamma_k).
struct BathExpansion {
    std::vector<BathTerm> terms;
    std::vector<std::size_t> conj_map;
    bool oscillatory = false;  // discrete-mode oracle form, Re gamma = 0 allowed

    std::size_t size() const { return terms.size(); }
    cplx correlation(double t) const;
    // second line of the expansion: sum_k conj(eta_{kbar}) exp(-gamma_k t),
    // which must equal conj(C(t)) on t >= 0
    cplx correlation_conjugate(double t) const;
    void check() const;  // throws std::invalid_argument on broken invariants
};

// J_B(omega) = zeta*omega_B*omega / ((omega_B^2-omega^2)^2 + (zeta*omega)^2)
double eval_spectral_density(const BrownianOscillatorBath& bath, double omega);

// C(t) = (1/pi) int dw e^{-iwt} J_B(w)/(1-e^{-beta w}) by adaptive quadrature
// on [0, W] plus a closed-form rational tail. Requires t >= 0.
cplx correlation_reference(const BrownianOscillatorBath& bath, double t);

// K = 2 + n_poles exponential terms: two resonance terms plus Bose-function
// poles from the chosen sum-over-poles scheme.
BathExpansion decompose_bath(const BrownianOscillatorBath& bath, PoleScheme scheme,
                             std::size_t n_poles);

// max over the grid of |sum_k eta_k e^{-gamma_k t} - C(t)|, folding in the
// conjugate-line check as well. Pure report; throws only on empty/negative grid.
double validate_expansion(const BathExpansion& expansion, const BrownianOscillatorBath& bath,
                          std::span<const double> grid);

// Discrete-mode oracle form: x_B = sum_j c_j q_j with h_B = sum_j w_j/2 (p^2+q^2).
// Produces purely oscillatory terms (Re gamma = 0); non-production, used for
// exact-diagonalization cross-checks.
struct DiscreteMode {
    double coupling;  // c_j
    double omega;     // w_j > 0
};

BathExpansion discrete_mode_expansion(std::span<const DiscreteMode> modes, double beta);

}  // namespace sfdeom
