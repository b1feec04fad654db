#include <doctest.h>

#include <cmath>
#include <numeric>

#include "sfdeom/stochastic.hpp"

using namespace sfdeom;

namespace {

struct Problem {
    SystemModel model;
    BathExpansion bath;
    HierarchySpace space;
    Eigen::MatrixXcd rho0;

    static Problem make(double lambda, double theta_B, std::size_t L) {
        auto [H, Q] = two_state_model(0.0, 1.0);
        Problem p{SystemModel::make(H, Q, alpha_from_theta(lambda, theta_B, 1.0)),
                  decompose_bath(BrownianOscillatorBath{1.0, 1.0, 1.0}, PoleScheme::pade, 1),
                  {},
                  Eigen::MatrixXcd::Zero(2, 2)};
        p.space = HierarchySpace::enumerate(p.bath.size(), L);
        p.rho0(0, 0) = 1.0;
        return p;
    }

    TrajectoryConfig config(double dt, double t_final) const {
        TrajectoryConfig c;
        c.space = &space;
        c.model = &model;
        c.bath = &bath;
        c.rho0 = rho0;
        c.dt = dt;
        c.t_final = t_final;
        c.output_stride = 10;
        c.base_seed = 99;
        return c;
    }
};

}  // namespace

TEST_CASE("raw field statistics scale as 1/sqrt(dt)") {
    TrajectoryRng rng(123, 0);
    const double dt = 0.01;
    double sum = 0.0, sumsq = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        auto f = rng.sample_raw_fields(dt);
        sum += f.xi + f.xi_prime;
        sumsq += f.xi * f.xi + f.xi_prime * f.xi_prime;
    }
    const double mean = sum / (2 * n);
    const double std = std::sqrt(sumsq / (2 * n) - mean * mean);
    CHECK(std::abs(mean) < 0.1);
    CHECK(std == doctest::Approx(10.0).epsilon(0.01));
}

TEST_CASE("field streams are reproducible and index-decorrelated") {
    TrajectoryRng a(7, 3), b(7, 3), c(7, 4), d(8, 3);
    bool same_c = true, same_d = true;
    for (int i = 0; i < 100; ++i) {
        auto fa = a.sample_raw_fields(1e-3), fb = b.sample_raw_fields(1e-3);
        auto fc = c.sample_raw_fields(1e-3), fd = d.sample_raw_fields(1e-3);
        CHECK(fa.xi == fb.xi);
        CHECK(fa.xi_prime == fb.xi_prime);
        same_c = same_c && fa.xi == fc.xi;
        same_d = same_d && fa.xi == fd.xi;
    }
    CHECK_FALSE(same_c);
    CHECK_FALSE(same_d);
}

TEST_CASE("transformed field solves its defining quadratic") {
    // (xi~ + w)^2 = xi^2 + w^2, with the branch fixed by sgn(xi), sgn(0) := +1
    for (double xi : {-3.0, -0.4, 0.0, 0.4, 7.0}) {
        for (double w : {-2.0, -0.1, 0.0, 0.5, 4.0}) {
            const double xt = girsanov_transform(xi, w);
            CHECK(std::abs((xt + w) * (xt + w) - (xi * xi + w * w)) < 1e-12);
            if (xi > 0.0 || (xi == 0.0)) CHECK(xt + w >= 0.0);
            if (xi < 0.0) CHECK(xt + w <= 0.0);
        }
    }
    CHECK(girsanov_transform(0.0, 2.0) == doctest::Approx(0.0));
    CHECK(girsanov_transform(0.0, -2.0) == doctest::Approx(4.0));
    // large-field limit: xi~ -> xi - w for positive xi
    CHECK(girsanov_transform(1e6, 3.0) == doctest::Approx(1e6 - 3.0).epsilon(1e-10));
}

TEST_CASE("drift weights match a direct trace evaluation") {
    auto p = Problem::make(0.1, 1.25, 3);
    DDOState state(p.space.size, 2);
    // populate tier 0 and tier 1 with arbitrary data
    Eigen::MatrixXcd m(2, 2);
    m << std::complex<double>(0.8, 0.0), std::complex<double>(0.1, -0.2),
        std::complex<double>(0.1, 0.2), std::complex<double>(0.2, 0.0);
    state.set_matrix(0, m);
    for (std::size_t k = 0; k < p.space.K; ++k) {
        Eigen::MatrixXcd mk(2, 2);
        mk << std::complex<double>(0.01 * k, 0.3), std::complex<double>(-0.2, 0.05),
            std::complex<double>(0.07, -0.4), std::complex<double>(0.02, 0.01 * k);
        state.set_matrix(p.space.tier1[k], mk);
    }
    const double theta = 0.8;
    auto w = girsanov_weights(state, p.space, p.model, theta);

    std::complex<double> total = 0.0;
    for (std::size_t k = 0; k < p.space.K; ++k) {
        total += (p.model.Q_sqrt * state.matrix(p.space.tier1[k])).trace();
    }
    const std::complex<double> z = p.model.sqrt_alpha2 * total / theta;
    CHECK(w.w_minus == doctest::Approx((std::complex<double>(1.0, -1.0) * z).real()).epsilon(1e-13));
    CHECK(w.w_plus == doctest::Approx((std::complex<double>(1.0, 1.0) * z).real()).epsilon(1e-13));
}

TEST_CASE("weight collapse is detected") {
    auto p = Problem::make(0.1, 1.25, 2);
    DDOState state(p.space.size, 2);
    CHECK_THROWS_WITH_AS(girsanov_weights(state, p.space, p.model, 1e-15),
                         doctest::Contains("weight collapse"), std::runtime_error);
}

TEST_CASE("norm-conserving samples have unit real trace") {
    auto p = Problem::make(0.1, 1.25, 4);
    Propagator prop(p.space, p.model, p.bath);
    for (std::uint64_t idx = 0; idx < 5; ++idx) {
        auto rec = propagate_trajectory(p.config(1e-3, 1.0), idx, prop);
        REQUIRE(rec.d == 2);
        for (std::size_t i = 0; i < rec.times.size(); ++i) {
            const auto* s = rec.samples.data() + i * 4;
            CHECK(std::abs((s[0] + s[3]).real() - 1.0) < 1e-12);
            CHECK(rec.thetas[i] > 0.0);
        }
    }
}

TEST_CASE("theta tracks its integrated-drift form") {
    // log Theta(t) = int (w- xi~ + w+ xi~') dtau up to O(dt) discretization
    auto p = Problem::make(0.1, 0.8, 4);
    Propagator prop(p.space, p.model, p.bath);
    auto c1 = p.config(1e-3, 1.0);
    auto rec1 = propagate_trajectory(c1, 0, prop);
    const double r1 = rec1.theta_log_residual.back();
    CHECK(r1 < 0.05);

    auto c2 = p.config(2.5e-4, 1.0);
    c2.output_stride = 40;
    auto rec2 = propagate_trajectory(c2, 0, prop);
    const double r2 = rec2.theta_log_residual.back();
    CHECK(r2 < 0.05);
}

TEST_CASE("forced-zero fields give a deterministic trajectory") {
    auto p = Problem::make(0.1, 1.0, 4);
    Propagator prop(p.space, p.model, p.bath);
    auto c = p.config(1e-3, 0.5);
    c.force_zero_fields = true;
    auto ra = propagate_trajectory(c, 0, prop);
    c.base_seed = 1234567;
    auto rb = propagate_trajectory(c, 99, prop);
    REQUIRE(ra.samples.size() == rb.samples.size());
    for (std::size_t i = 0; i < ra.samples.size(); ++i) CHECK(ra.samples[i] == rb.samples[i]);
}

TEST_CASE("field dump records raw and transformed fields") {
    auto p = Problem::make(0.1, 0.8, 3);
    Propagator prop(p.space, p.model, p.bath);
    auto c = p.config(1e-3, 0.05);
    c.field_dump_stride = 1;
    auto rec = propagate_trajectory(c, 0, prop);
    CHECK(rec.fields.size() == 50);
    TrajectoryRng rng(c.base_seed, 0);
    for (const auto& f : rec.fields) {
        auto raw = rng.sample_raw_fields(c.dt);
        CHECK(f.xi_raw == raw.xi);
        CHECK(f.xi_prime_raw == raw.xi_prime);
        // transform preserves the defining quadratic for some weight w
        CHECK(std::isfinite(f.xi));
        CHECK(std::isfinite(f.xi_prime));
    }
}
