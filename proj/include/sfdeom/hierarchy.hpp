// hierarchy.hpp — truncated dissipaton-augmented density-operator space and
// application of the stochastic-fields-dressed generator.

#pragma once

#include <complex>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "sfdeom/bath.hpp"
#include "sfdeom/model.hpp"

namespace sfdeom {

// Multi-index set {n : n_k >= 0, sum n_k <= L} in lexicographic order, with
// precomputed neighbor tables for the n_k+/- raising and lowering moves.
struct HierarchySpace {
    static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

    std::size_t K{0};
    std::size_t L{0};
    std::size_t size{0};                // binomial(L+K, K)
    std::vector<std::uint32_t> occ;     // size*K occupations n_k
    std::vector<std::size_t> up;        // size*K ranks of n_k+, npos at the closure
    std::vector<std::size_t> down;      // size*K ranks of n_k-, npos when n_k = 0
    std::vector<std::size_t> tier1;     // ranks of the K single-occupation indices

    std::size_t rank(std::span<const std::size_t> n) const;
    std::vector<std::size_t> unrank(std::size_t index) const;

    // memory_budget bounds size * K table bytes (rejects runaway truncations)
    static HierarchySpace enumerate(std::size_t K, std::size_t L,
                                    std::size_t memory_budget = std::size_t(1) << 31);

private:
    std::vector<std::size_t> binom_;  // C(r + j, j) helper table
    std::size_t count_le(std::size_t rem, std::size_t positions) const;
};

// Flat array of `size` complex d x d matrices, ordered by rank.
struct DDOState {
    std::size_t n_matrices{0};
    std::size_t d{0};
    std::vector<std::complex<double>> data;

    DDOState() = default;
    DDOState(std::size_t n, std::size_t dim)
        : n_matrices(n), d(dim), data(n * dim * dim, std::complex<double>(0.0)) {}

    std::complex<double>* block(std::size_t i) { return data.data() + i * d * d; }
    const std::complex<double>* block(std::size_t i) const { return data.data() + i * d * d; }
    Eigen::MatrixXcd matrix(std::size_t i) const;
    void set_matrix(std::size_t i, const Eigen::MatrixXcd& m);
    // Re tr of the tier-0 matrix
    double real_trace0() const;
};

// tier-0 entry = rho0 (unit trace, Hermitian PSD), all higher tiers zero
DDOState initial_state(const HierarchySpace& space, const Eigen::MatrixXcd& rho0);

// Q~_S(xi) = a1 Q_S + (1+i) xi sqrt(a2) Q_S^{1/2};
// Q~+_S(xi') = a1 Q_S + (1-i) xi' sqrt(a2) Q_S^{1/2}
std::pair<Eigen::MatrixXcd, Eigen::MatrixXcd> build_dressed_couplings(const SystemModel& model,
                                                                      double xi,
                                                                      double xi_prime);

// Precomputed generator application and RK4 stepping for one trajectory.
// Holds per-index coefficient tables and scratch states; not shareable.
class Propagator {
public:
    Propagator(const HierarchySpace& space, const SystemModel& model, const BathExpansion& bath);

    // freeze the stochastic fields for the next step(s)
    void set_fields(double xi, double xi_prime);

    // out <- d(state)/dt under the frozen-field generator
    void apply(const DDOState& state, DDOState& out) const;

    // classic RK4 with the frozen-field generator; throws on non-finite output
    void step(DDOState& state, double dt, double t_now);

    const HierarchySpace& space() const { return *space_; }
    std::size_t dim() const { return d_; }

private:
    const HierarchySpace* space_;
    std::size_t d_;
    std::size_t K_;
    std::vector<std::complex<double>> h0_;       // d*d
    std::vector<std::complex<double>> qt_;       // d*d, field-dependent
    std::vector<std::complex<double>> qt_dag_;   // d*d, field-dependent
    std::vector<std::complex<double>> gsum_;     // size: sum_k n_k gamma_k
    std::vector<std::complex<double>> cdown_;    // size*K: n_k eta_k
    std::vector<std::complex<double>> cdown_b_;  // size*K: n_k conj(eta_{kbar})
    // couplings cached for rebuilds in set_fields
    std::vector<std::complex<double>> a1q_;      // alpha1 * Q_S
    std::vector<std::complex<double>> sq_;       // sqrt_alpha2 * Q_sqrt
    DDOState k1_, k2_, k3_, k4_, tmp_;
};

}  // namespace sfdeom
