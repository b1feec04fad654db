// stochastic.hpp — Gaussian field sampling, Girsanov transformation for
// norm-conserving propagation, and single-trajectory driving.

#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "sfdeom/hierarchy.hpp"

namespace sfdeom {

struct FieldPair {
    double xi{0.0};
    double xi_prime{0.0};
};

struct GirsanovWeights {
    double w_minus{0.0};
    double w_plus{0.0};
};

struct ThetaTracker {
    double theta{1.0};
    double log_integral{0.0};  // accumulated (w- xi~ + w+ xi~') dtau cross-check
};

// Deterministic per-trajectory stream: seeded from (base_seed, trajectory index).
class TrajectoryRng {
public:
    TrajectoryRng(std::uint64_t base_seed, std::uint64_t trajectory_index);
    // two independent normals, mean 0, std 1/sqrt(dt)
    FieldPair sample_raw_fields(double dt);

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

// w~+- = Re{(1 +- i) sqrt(a2) sum_k tr[Q_S^{1/2} rho^(1)_k]} / theta.
// Throws on theta <= 1e-14 ("weight collapse").
GirsanovWeights girsanov_weights(const DDOState& state, const HierarchySpace& space,
                                 const SystemModel& model, double theta);

// xi~ = sgn(xi) sqrt(xi^2 + w^2) - w, with sgn(0) := +1
double girsanov_transform(double xi_raw, double w);

// tracker.theta <- Re tr of the tier-0 matrix; throws on non-positive theta
void update_theta(ThetaTracker& tracker, const DDOState& state_after_step);

struct TrajectoryError : std::runtime_error {
    TrajectoryError(std::uint64_t index, double t, const std::string& what)
        : std::runtime_error("trajectory " + std::to_string(index) + ": " + what +
                             " (t=" + std::to_string(t) + ")"),
          trajectory_index(index),
          time(t) {}
    std::uint64_t trajectory_index;
    double time;
};

struct FieldRecord {
    double t;
    double xi_raw, xi_prime_raw;
    double xi, xi_prime;  // after GT (equal to raw when GT disabled)
};

struct TrajectoryRecord {
    std::size_t d{0};
    std::vector<double> times;                       // output grid, starts at 0
    std::vector<std::complex<double>> samples;       // n_out * d*d weighted Hermitized
    std::vector<double> thetas;
    std::vector<double> theta_log_residual;          // |log theta - Eq-integral| per output
    std::vector<FieldRecord> fields;                 // only when field_dump_stride > 0
};

struct TrajectoryConfig {
    const HierarchySpace* space{nullptr};
    const SystemModel* model{nullptr};
    const BathExpansion* bath{nullptr};
    Eigen::MatrixXcd rho0;
    double dt{1e-3};
    double t_final{10.0};
    std::size_t output_stride{10};
    bool gt_enabled{true};
    bool force_zero_fields{false};  // deterministic DEOM reference path
    std::size_t field_dump_stride{0};
    std::uint64_t base_seed{0};
};

// Workflow per step: sample raw fields; (GT) weights from the current state
// and field transform; dressed couplings; RK4 step; theta update. Records the
// weighted Hermitized sample rho~_S/Theta at each output stride.
// Throws TrajectoryError on blow-up or weight collapse.
TrajectoryRecord propagate_trajectory(const TrajectoryConfig& config,
                                      std::uint64_t trajectory_index, Propagator& propagator);

}  // namespace sfdeom
