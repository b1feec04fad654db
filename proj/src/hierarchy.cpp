#include "sfdeom/hierarchy.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace sfdeom {

using std::complex;
using std::size_t;

namespace {

// C(rem + positions, positions) without overflow surprises
size_t count_bounded(size_t rem, size_t positions) {
    unsigned __int128 acc = 1;
    for (size_t j = 1; j <= positions; ++j) {
        acc = acc * (rem + j) / j;  // exact: product of j consecutive integers
        if (acc > (unsigned __int128)1 << 62) {
            throw std::invalid_argument("hierarchy: truncated space size overflows");
        }
    }
    return static_cast<size_t>(acc);
}

void enumerate_rec(size_t K, size_t L, std::vector<std::uint32_t>& cur, size_t pos, size_t used,
                   std::vector<std::uint32_t>& occ) {
    if (pos == K) {
        occ.insert(occ.end(), cur.begin(), cur.end());
        return;
    }
    for (size_t v = 0; v + used <= L; ++v) {
        cur[pos] = static_cast<std::uint32_t>(v);
        enumerate_rec(K, L, cur, pos + 1, used + v, occ);
    }
}

}  // namespace

size_t HierarchySpace::count_le(size_t rem, size_t positions) const {
    return count_bounded(rem, positions);
}

size_t HierarchySpace::rank(std::span<const size_t> n) const {
    if (n.size() != K) throw std::invalid_argument("rank: multi-index length mismatch");
    size_t r = 0, used = 0;
    for (size_t i = 0; i < K; ++i) {
        for (size_t v = 0; v < n[i]; ++v) {
            r += count_le(L - used - v, K - i - 1);
        }
        used += n[i];
        if (used > L) throw std::invalid_argument("rank: multi-index exceeds truncation tier");
    }
    return r;
}

std::vector<size_t> HierarchySpace::unrank(size_t index) const {
    if (index >= size) throw std::invalid_argument("unrank: index out of range");
    std::vector<size_t> n(K, 0);
    size_t used = 0;
    for (size_t i = 0; i < K; ++i) {
        size_t v = 0;
        while (true) {
            size_t below = count_le(L - used - v, K - i - 1);
            if (index < below) break;
            index -= below;
            ++v;
        }
        n[i] = v;
        used += v;
    }
    return n;
}

HierarchySpace HierarchySpace::enumerate(size_t K, size_t L, size_t memory_budget) {
    if (K < 1) throw std::invalid_argument("hierarchy: K must be >= 1");
    HierarchySpace s;
    s.K = K;
    s.L = L;
    s.size = count_bounded(L, K);
    size_t table_bytes = s.size * K * (2 * sizeof(size_t) + sizeof(std::uint32_t));
    if (table_bytes > memory_budget) {
        std::ostringstream msg;
        msg << "hierarchy: C(" << (L + K) << "," << K << ") = " << s.size
            << " multi-indices exceeds the memory budget";
        throw std::invalid_argument(msg.str());
    }

    s.occ.reserve(s.size * K);
    std::vector<std::uint32_t> cur(K, 0);
    enumerate_rec(K, L, cur, 0, 0, s.occ);

    s.up.assign(s.size * K, npos);
    s.down.assign(s.size * K, npos);
    std::vector<size_t> n(K);
    for (size_t i = 0; i < s.size; ++i) {
        size_t total = 0;
        for (size_t k = 0; k < K; ++k) {
            n[k] = s.occ[i * K + k];
            total += n[k];
        }
        for (size_t k = 0; k < K; ++k) {
            if (total < L) {
                ++n[k];
                s.up[i * K + k] = s.rank(n);
                --n[k];
            }
            if (n[k] > 0) {
                --n[k];
                s.down[i * K + k] = s.rank(n);
                ++n[k];
            }
        }
    }
    s.tier1.resize(K);
    for (size_t k = 0; k < K; ++k) {
        std::vector<size_t> e(K, 0);
        if (L >= 1) {
            e[k] = 1;
            s.tier1[k] = s.rank(e);
        } else {
            s.tier1[k] = npos;
        }
    }
    return s;
}

Eigen::MatrixXcd DDOState::matrix(size_t i) const {
    Eigen::MatrixXcd m(d, d);
    const complex<double>* b = block(i);
    for (size_t r = 0; r < d; ++r)
        for (size_t c = 0; c < d; ++c) m(r, c) = b[r * d + c];
    return m;
}

void DDOState::set_matrix(size_t i, const Eigen::MatrixXcd& m) {
    complex<double>* b = block(i);
    for (size_t r = 0; r < d; ++r)
        for (size_t c = 0; c < d; ++c) b[r * d + c] = m(r, c);
}

double DDOState::real_trace0() const {
    double tr = 0.0;
    const complex<double>* b = data.data();
    for (size_t r = 0; r < d; ++r) tr += b[r * d + r].real();
    return tr;
}

DDOState initial_state(const HierarchySpace& space, const Eigen::MatrixXcd& rho0) {
    if (rho0.rows() != rho0.cols()) throw std::invalid_argument("initial_state: rho0 not square");
    if ((rho0 - rho0.adjoint()).norm() > 1e-12 * std::max(1.0, rho0.norm())) {
        throw std::invalid_argument("initial_state: rho0 is not Hermitian");
    }
    if (std::abs(rho0.trace().real() - 1.0) > 1e-10 || std::abs(rho0.trace().imag()) > 1e-10) {
        throw std::invalid_argument("initial_state: rho0 must have unit trace");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho0);
    if (es.eigenvalues().minCoeff() < -1e-10) {
        throw std::invalid_argument("initial_state: rho0 is not positive semidefinite");
    }
    DDOState state(space.size, static_cast<size_t>(rho0.rows()));
    state.set_matrix(0, rho0);
    return state;
}

std::pair<Eigen::MatrixXcd, Eigen::MatrixXcd> build_dressed_couplings(const SystemModel& model,
                                                                      double xi,
                                                                      double xi_prime) {
    Eigen::MatrixXcd base = model.alpha1 * model.Q_S;
    complex<double> cplus = complex<double>(1.0, 1.0) * xi * model.sqrt_alpha2;
    complex<double> cminus = complex<double>(1.0, -1.0) * xi_prime * model.sqrt_alpha2;
    return {base + cplus * model.Q_sqrt, base + cminus * model.Q_sqrt};
}

Propagator::Propagator(const HierarchySpace& space, const SystemModel& model,
                       const BathExpansion& bath)
    : space_(&space), d_(static_cast<size_t>(model.dim())), K_(space.K) {
    if (bath.size() != space.K) {
        throw std::invalid_argument("propagator: bath expansion size must equal hierarchy K");
    }
    auto flatten = [&](const Eigen::MatrixXcd& m, std::vector<complex<double>>& out) {
        out.resize(d_ * d_);
        for (size_t r = 0; r < d_; ++r)
            for (size_t c = 0; c < d_; ++c) out[r * d_ + c] = m(r, c);
    };
    flatten(model.dressed_hamiltonian(), h0_);
    flatten(model.alpha1 * model.Q_S, a1q_);
    flatten(model.sqrt_alpha2 * model.Q_sqrt, sq_);
    qt_ = a1q_;
    qt_dag_ = a1q_;

    gsum_.assign(space.size, 0.0);
    cdown_.assign(space.size * K_, 0.0);
    cdown_b_.assign(space.size * K_, 0.0);
    for (size_t i = 0; i < space.size; ++i) {
        for (size_t k = 0; k < K_; ++k) {
            double nk = space.occ[i * K_ + k];
            gsum_[i] += nk * bath.terms[k].gamma;
            cdown_[i * K_ + k] = nk * bath.terms[k].eta;
            cdown_b_[i * K_ + k] = nk * std::conj(bath.terms[bath.conj_map[k]].eta);
        }
    }
    k1_ = DDOState(space.size, d_);
    k2_ = k1_;
    k3_ = k1_;
    k4_ = k1_;
    tmp_ = k1_;
}

void Propagator::set_fields(double xi, double xi_prime) {
    complex<double> cp = complex<double>(1.0, 1.0) * xi;
    complex<double> cm = complex<double>(1.0, -1.0) * xi_prime;
    for (size_t i = 0; i < d_ * d_; ++i) {
        qt_[i] = a1q_[i] + cp * sq_[i];
        qt_dag_[i] = a1q_[i] + cm * sq_[i];
    }
}

void Propagator::apply(const DDOState& state, DDOState& out) const {
    const size_t npos = HierarchySpace::npos;
    const size_t size = space_->size;
    const size_t K = K_;

    if (d_ == 2) {
        const complex<double> H0 = h0_[0], H1 = h0_[1], H2 = h0_[2], H3 = h0_[3];
        const complex<double> Q0 = qt_[0], Q1 = qt_[1], Q2 = qt_[2], Q3 = qt_[3];
        const complex<double> R0 = qt_dag_[0], R1 = qt_dag_[1], R2 = qt_dag_[2],
                              R3 = qt_dag_[3];
        for (size_t i = 0; i < size; ++i) {
            const complex<double>* p = state.block(i);
            complex<double>* o = out.block(i);
            complex<double> U0 = 0, U1 = 0, U2 = 0, U3 = 0;
            complex<double> V0 = 0, V1 = 0, V2 = 0, V3 = 0;
            const size_t* up = &space_->up[i * K];
            const size_t* dn = &space_->down[i * K];
            const complex<double>* c1 = &cdown_[i * K];
            const complex<double>* c2 = &cdown_b_[i * K];
            for (size_t k = 0; k < K; ++k) {
                if (up[k] != npos) {
                    const complex<double>* q = state.block(up[k]);
                    U0 += q[0];
                    U1 += q[1];
                    U2 += q[2];
                    U3 += q[3];
                    V0 += q[0];
                    V1 += q[1];
                    V2 += q[2];
                    V3 += q[3];
                }
                if (dn[k] != npos) {
                    const complex<double>* q = state.block(dn[k]);
                    U0 += c1[k] * q[0];
                    U1 += c1[k] * q[1];
                    U2 += c1[k] * q[2];
                    U3 += c1[k] * q[3];
                    V0 += c2[k] * q[0];
                    V1 += c2[k] * q[1];
                    V2 += c2[k] * q[2];
                    V3 += c2[k] * q[3];
                }
            }
            // M = H0 p - p H0 + Qt U - V Qt_dag
            complex<double> m0 = H0 * p[0] + H1 * p[2] - (p[0] * H0 + p[1] * H2) +
                                 Q0 * U0 + Q1 * U2 - (V0 * R0 + V1 * R2);
            complex<double> m1 = H0 * p[1] + H1 * p[3] - (p[0] * H1 + p[1] * H3) +
                                 Q0 * U1 + Q1 * U3 - (V0 * R1 + V1 * R3);
            complex<double> m2 = H2 * p[0] + H3 * p[2] - (p[2] * H0 + p[3] * H2) +
                                 Q2 * U0 + Q3 * U2 - (V2 * R0 + V3 * R2);
            complex<double> m3 = H2 * p[1] + H3 * p[3] - (p[2] * H1 + p[3] * H3) +
                                 Q2 * U1 + Q3 * U3 - (V2 * R1 + V3 * R3);
            const complex<double> g = gsum_[i];
            o[0] = complex<double>(m0.imag(), -m0.real()) - g * p[0];
            o[1] = complex<double>(m1.imag(), -m1.real()) - g * p[1];
            o[2] = complex<double>(m2.imag(), -m2.real()) - g * p[2];
            o[3] = complex<double>(m3.imag(), -m3.real()) - g * p[3];
        }
        return;
    }

    const size_t dd = d_ * d_;
    std::vector<complex<double>> U(dd), V(dd), M(dd);
    for (size_t i = 0; i < size; ++i) {
        const complex<double>* p = state.block(i);
        complex<double>* o = out.block(i);
        std::fill(U.begin(), U.end(), complex<double>(0.0));
        std::fill(V.begin(), V.end(), complex<double>(0.0));
        const size_t* up = &space_->up[i * K];
        const size_t* dn = &space_->down[i * K];
        const complex<double>* c1 = &cdown_[i * K];
        const complex<double>* c2 = &cdown_b_[i * K];
        for (size_t k = 0; k < K; ++k) {
            if (up[k] != npos) {
                const complex<double>* q = state.block(up[k]);
                for (size_t e = 0; e < dd; ++e) {
                    U[e] += q[e];
                    V[e] += q[e];
                }
            }
            if (dn[k] != npos) {
                const complex<double>* q = state.block(dn[k]);
                for (size_t e = 0; e < dd; ++e) {
                    U[e] += c1[k] * q[e];
                    V[e] += c2[k] * q[e];
                }
            }
        }
        // M = H0 p - p H0 + Qt U - V Qt_dag
        for (size_t r = 0; r < d_; ++r) {
            for (size_t c = 0; c < d_; ++c) {
                complex<double> acc = 0.0;
                for (size_t e = 0; e < d_; ++e) {
                    acc += h0_[r * d_ + e] * p[e * d_ + c] - p[r * d_ + e] * h0_[e * d_ + c];
                    acc += qt_[r * d_ + e] * U[e * d_ + c] - V[r * d_ + e] * qt_dag_[e * d_ + c];
                }
                M[r * d_ + c] = acc;
            }
        }
        const complex<double> g = gsum_[i];
        for (size_t e = 0; e < dd; ++e) {
            o[e] = complex<double>(M[e].imag(), -M[e].real()) - g * p[e];
        }
    }
}

void Propagator::step(DDOState& state, double dt, double t_now) {
    if (!(dt > 0.0)) throw std::invalid_argument("step: dt must be > 0");
    const size_t n = state.data.size();
    complex<double>* y = state.data.data();

    apply(state, k1_);
    for (size_t e = 0; e < n; ++e) tmp_.data[e] = y[e] + 0.5 * dt * k1_.data[e];
    apply(tmp_, k2_);
    for (size_t e = 0; e < n; ++e) tmp_.data[e] = y[e] + 0.5 * dt * k2_.data[e];
    apply(tmp_, k3_);
    for (size_t e = 0; e < n; ++e) tmp_.data[e] = y[e] + dt * k3_.data[e];
    apply(tmp_, k4_);
    const double w = dt / 6.0;
    double max_sq = 0.0;
    for (size_t e = 0; e < n; ++e) {
        y[e] += w * (k1_.data[e] + 2.0 * (k2_.data[e] + k3_.data[e]) + k4_.data[e]);
        max_sq = std::max(max_sq, std::norm(y[e]));
    }
    if (!std::isfinite(max_sq)) {
        std::ostringstream msg;
        msg << "trajectory blow-up at t=" << t_now + dt << " (non-finite hierarchy entries)";
        throw std::runtime_error(msg.str());
    }
}

}  // namespace sfdeom
