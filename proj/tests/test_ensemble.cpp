#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>
#include <span>

#include "sfdeom/ensemble.hpp"

using namespace sfdeom;

namespace {

TrajectoryRecord fake_record(std::mt19937_64& rng, std::size_t n_times) {
    std::normal_distribution<double> n;
    TrajectoryRecord rec;
    rec.d = 2;
    for (std::size_t i = 0; i < n_times; ++i) {
        rec.times.push_back(0.1 * double(i));
        const double p0 = 0.5 + 0.3 * n(rng);
        rec.samples.push_back({p0, 0.0});
        rec.samples.push_back({n(rng), n(rng)});
        rec.samples.push_back({n(rng), n(rng)});
        rec.samples.push_back({1.0 - p0, 0.0});
        rec.thetas.push_back(1.0);
        rec.theta_log_residual.push_back(0.0);
    }
    return rec;
}

struct Problem {
    SystemModel model;
    BathExpansion bath;
    HierarchySpace space;
    Eigen::MatrixXcd rho0;
};

Problem make_problem(double lambda, double theta_B, std::size_t L) {
    auto [H, Q] = two_state_model(0.0, 1.0);
    Problem p{SystemModel::make(H, Q, alpha_from_theta(lambda, theta_B, 1.0)),
              decompose_bath(BrownianOscillatorBath{1.0, 1.0, 1.0}, PoleScheme::pade, 1),
              {},
              Eigen::MatrixXcd::Zero(2, 2)};
    p.space = HierarchySpace::enumerate(p.bath.size(), L);
    p.rho0(0, 0) = 1.0;
    return p;
}

EnsembleConfig make_config(const Problem& p, std::uint64_t n, double t_final) {
    EnsembleConfig c;
    c.trajectory.space = &p.space;
    c.trajectory.model = &p.model;
    c.trajectory.bath = &p.bath;
    c.trajectory.rho0 = p.rho0;
    c.trajectory.dt = 1e-3;
    c.trajectory.t_final = t_final;
    c.trajectory.output_stride = 10;
    c.trajectory.base_seed = 2024;
    c.n_trajectories = n;
    return c;
}

}  // namespace

TEST_CASE("population difference") {
    std::vector<std::complex<double>> rho{{0.7, 0.0}, {0.1, 0.2}, {0.1, -0.2}, {0.3, 0.0}};
    CHECK(population_difference(rho, 2) == doctest::Approx(0.4).epsilon(1e-14));
}

TEST_CASE("variance grid on known samples") {
    // biased (1/N) estimator: samples {+1, -1} have rms deviation 1
    std::vector<std::vector<double>> samples{{1.0, -1.0}};
    auto v = variance_grid(samples);
    CHECK(v[0] == doctest::Approx(1.0).epsilon(1e-14));

    std::mt19937_64 rng(3);
    std::normal_distribution<double> n(2.0, 1.0);
    std::vector<double> big;
    for (int i = 0; i < 100000; ++i) big.push_back(n(rng));
    v = variance_grid({big});
    CHECK(v[0] == doctest::Approx(1.0).epsilon(0.01));

    CHECK_THROWS(variance_grid({{1.0}}));
}

TEST_CASE("accumulator mean and sigma match batch formulas") {
    std::mt19937_64 rng(17);
    std::vector<TrajectoryRecord> recs;
    for (int i = 0; i < 257; ++i) recs.push_back(fake_record(rng, 5));

    EnsembleAccumulator acc(5, 2);
    for (const auto& r : recs) acc.add(r);
    CHECK(acc.count() == 257);

    for (std::size_t t = 0; t < 5; ++t) {
        std::vector<double> pops;
        std::complex<double> mean00 = 0.0;
        for (const auto& r : recs) {
            pops.push_back(population_difference(
                std::span<const std::complex<double>>(r.samples.data() + t * 4, 4), 2));
            mean00 += r.samples[t * 4];
        }
        mean00 /= double(recs.size());
        const double mean_p = std::accumulate(pops.begin(), pops.end(), 0.0) / pops.size();
        CHECK(acc.mean_population(t) == doctest::Approx(mean_p).epsilon(1e-12));
        CHECK(std::abs(acc.mean_rho(t)(0, 0) - mean00) < 1e-12);
        CHECK(acc.sigma(t) == doctest::Approx(variance_grid({pops})[0]).epsilon(1e-10));
    }
}

TEST_CASE("merging partial accumulators equals one pass") {
    std::mt19937_64 rng(29);
    std::vector<TrajectoryRecord> recs;
    for (int i = 0; i < 100; ++i) recs.push_back(fake_record(rng, 3));

    EnsembleAccumulator whole(3, 2), a(3, 2), b(3, 2), c(3, 2);
    for (int i = 0; i < 100; ++i) {
        whole.add(recs[i]);
        (i < 13 ? a : i < 50 ? b : c).add(recs[i]);
    }
    a.merge(b);
    a.merge(c);
    CHECK(a.count() == whole.count());
    for (std::size_t t = 0; t < 3; ++t) {
        CHECK(a.mean_population(t) == doctest::Approx(whole.mean_population(t)).epsilon(1e-12));
        CHECK(a.sigma(t) == doctest::Approx(whole.sigma(t)).epsilon(1e-12));
    }
    // merging an empty accumulator is a no-op
    EnsembleAccumulator empty(3, 2);
    const double before = a.mean_population(1);
    a.merge(empty);
    CHECK(a.mean_population(1) == before);
}

TEST_CASE("accumulator serialization round-trips") {
    std::mt19937_64 rng(31);
    EnsembleAccumulator acc(4, 2);
    for (int i = 0; i < 37; ++i) acc.add(fake_record(rng, 4));
    auto restored = EnsembleAccumulator::deserialize(acc.serialize());
    CHECK(restored.count() == acc.count());
    for (std::size_t t = 0; t < 4; ++t) {
        CHECK(restored.mean_population(t) == acc.mean_population(t));
        CHECK(restored.sigma(t) == acc.sigma(t));
        CHECK(restored.mean_rho(t) == acc.mean_rho(t));
    }
    CHECK_THROWS(EnsembleAccumulator::deserialize("{\"format\": \"bogus\"}"));
}

TEST_CASE("ensemble results do not depend on worker count") {
    auto p = make_problem(0.1, 1.25, 3);
    auto cfg = make_config(p, 24, 0.5);
    cfg.ladder = {8, 16};

    cfg.workers = 1;
    auto [r1, c1] = run_ensemble(cfg);
    cfg.workers = 4;
    auto [r4, c4] = run_ensemble(cfg);

    REQUIRE(r1.times.size() == r4.times.size());
    for (std::size_t i = 0; i < r1.mean_rho.size(); ++i) CHECK(r1.mean_rho[i] == r4.mean_rho[i]);
    for (std::size_t i = 0; i < r1.population.size(); ++i) {
        CHECK(r1.population[i] == r4.population[i]);
        CHECK(r1.sigma[i] == r4.sigma[i]);
    }
    for (std::size_t l = 0; l < c1.ladder.size(); ++l) {
        for (std::size_t i = 0; i < c1.times.size(); ++i) {
            CHECK(c1.population[l][i] == c4.population[l][i]);
        }
    }
}

TEST_CASE("convergence report structure") {
    auto p = make_problem(0.1, 0.8, 3);
    auto cfg = make_config(p, 20, 0.2);
    cfg.ladder = {5, 10};
    auto [res, rep] = run_ensemble(cfg);

    REQUIRE(rep.ladder.size() == 3);  // ladder entries plus N_max
    CHECK(rep.ladder.back() == 20);
    CHECK(res.n_used + res.n_discarded == 20);
    // phi of the final row is identically zero
    for (double phi : rep.phi.back()) CHECK(phi == 0.0);
    // phi of earlier rows is |P(N) - P(N_max)|
    for (std::size_t i = 0; i < rep.times.size(); ++i) {
        CHECK(rep.phi[0][i] ==
              doctest::Approx(std::abs(rep.population[0][i] - rep.population[2][i]))
                  .epsilon(1e-14));
    }
    // time grid starts at zero and ends at t_final
    CHECK(res.times.front() == 0.0);
    CHECK(res.times.back() == doctest::Approx(0.2));
}

TEST_CASE("mean density matrix is Hermitian with unit real trace") {
    auto p = make_problem(0.1, 1.25, 4);
    auto cfg = make_config(p, 50, 0.5);
    auto [res, rep] = run_ensemble(cfg);
    const std::size_t d = 2;
    for (std::size_t i = 0; i < res.times.size(); ++i) {
        Eigen::Map<const Eigen::MatrixXcd> rho(res.mean_rho.data() + i * d * d, d, d);
        CHECK((rho - rho.adjoint()).cwiseAbs().maxCoeff() < 1e-12);
        CHECK(std::abs(rho.real().trace() - 1.0) < 1e-10);
    }
}
