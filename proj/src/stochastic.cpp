#include "sfdeom/stochastic.hpp"

#include <cmath>
#include <stdexcept>

namespace sfdeom {

TrajectoryRng::TrajectoryRng(std::uint64_t base_seed, std::uint64_t trajectory_index) {
    std::seed_seq seq{static_cast<std::uint32_t>(base_seed), static_cast<std::uint32_t>(base_seed >> 32),
                      static_cast<std::uint32_t>(trajectory_index),
                      static_cast<std::uint32_t>(trajectory_index >> 32)};
    engine_.seed(seq);
}

FieldPair TrajectoryRng::sample_raw_fields(double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("sample_raw_fields: dt must be > 0");
    double width = 1.0 / std::sqrt(dt);
    return {width * normal_(engine_), width * normal_(engine_)};
}

GirsanovWeights girsanov_weights(const DDOState& state, const HierarchySpace& space,
                                 const SystemModel& model, double theta) {
    if (theta <= 1e-14) {
        throw std::runtime_error("weight collapse (theta <= 1e-14)");
    }
    if (model.alpha2 == 0.0) return {0.0, 0.0};
    const std::size_t d = state.d;
    std::complex<double> total = 0.0;
    for (std::size_t k = 0; k < space.K; ++k) {
        std::size_t r1 = space.tier1[k];
        if (r1 == HierarchySpace::npos) continue;
        const std::complex<double>* p = state.block(r1);
        for (std::size_t a = 0; a < d; ++a)
            for (std::size_t b = 0; b < d; ++b) total += model.Q_sqrt(a, b) * p[b * d + a];
    }
    std::complex<double> z = model.sqrt_alpha2 * total / theta;
    // w-+ = Re{(1 -+ i) z}, paired as (w-, xi) and (w+, xi')
    return {z.real() + z.imag(), z.real() - z.imag()};
}

double girsanov_transform(double xi_raw, double w) {
    double sign = xi_raw >= 0.0 ? 1.0 : -1.0;  // sgn(0) := +1
    return sign * std::sqrt(xi_raw * xi_raw + w * w) - w;
}

void update_theta(ThetaTracker& tracker, const DDOState& state_after_step) {
    double theta = state_after_step.real_trace0();
    if (!(theta > 0.0)) {
        throw std::runtime_error("weight collapse (Re tr rho~_S <= 0)");
    }
    tracker.theta = theta;
}

namespace {

void record_sample(TrajectoryRecord& rec, const DDOState& state, double t, double theta,
                   bool weighted) {
    const std::size_t d = state.d;
    const std::complex<double>* p = state.block(0);
    double scale = weighted ? 1.0 / theta : 1.0;
    rec.times.push_back(t);
    for (std::size_t r = 0; r < d; ++r) {
        for (std::size_t c = 0; c < d; ++c) {
            rec.samples.push_back(scale * 0.5 * (p[r * d + c] + std::conj(p[c * d + r])));
        }
    }
    rec.thetas.push_back(theta);
}

}  // namespace

TrajectoryRecord propagate_trajectory(const TrajectoryConfig& config,
                                      std::uint64_t trajectory_index, Propagator& propagator) {
    if (!(config.dt > 0.0)) throw std::invalid_argument("integration.dt must be > 0");
    if (!(config.t_final > 0.0)) throw std::invalid_argument("integration.t_final must be > 0");
    const auto n_steps = static_cast<std::size_t>(std::llround(config.t_final / config.dt));
    const std::size_t stride = std::max<std::size_t>(1, config.output_stride);

    TrajectoryRng rng(config.base_seed, trajectory_index);
    DDOState state = initial_state(*config.space, config.rho0);
    ThetaTracker tracker;
    TrajectoryRecord rec;
    rec.d = state.d;
    rec.times.reserve(n_steps / stride + 1);

    record_sample(rec, state, 0.0, tracker.theta, config.gt_enabled);
    rec.theta_log_residual.push_back(0.0);

    double t_now = 0.0;
    try {
        for (std::size_t step = 0; step < n_steps; ++step) {
            const double t = t_now = static_cast<double>(step) * config.dt;
            FieldPair raw = config.force_zero_fields ? FieldPair{0.0, 0.0}
                                                     : rng.sample_raw_fields(config.dt);
            FieldPair used = raw;
            GirsanovWeights w;
            if (config.gt_enabled) {
                w = girsanov_weights(state, *config.space, *config.model, tracker.theta);
                used.xi = girsanov_transform(raw.xi, w.w_minus);
                used.xi_prime = girsanov_transform(raw.xi_prime, w.w_plus);
            }
            propagator.set_fields(used.xi, used.xi_prime);
            propagator.step(state, config.dt, t);
            if (config.gt_enabled) {
                tracker.log_integral += (w.w_minus * used.xi + w.w_plus * used.xi_prime) * config.dt;
                update_theta(tracker, state);
            } else {
                tracker.theta = state.real_trace0();
            }
            if (config.field_dump_stride > 0 && step % config.field_dump_stride == 0) {
                rec.fields.push_back({t, raw.xi, raw.xi_prime, used.xi, used.xi_prime});
            }
            if ((step + 1) % stride == 0) {
                record_sample(rec, state, static_cast<double>(step + 1) * config.dt,
                              tracker.theta, config.gt_enabled);
                rec.theta_log_residual.push_back(
                    config.gt_enabled ? std::abs(std::log(tracker.theta) - tracker.log_integral)
                                      : 0.0);
            }
        }
    } catch (const std::runtime_error& e) {
        throw TrajectoryError(trajectory_index, t_now, e.what());
    }
    return rec;
}

}  // namespace sfdeom
