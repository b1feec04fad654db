// ensemble.hpp — parallel trajectory averaging with deterministic index-ordered
// reduction, plus the P / sigma / phi convergence diagnostics.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sfdeom/stochastic.hpp"

namespace sfdeom {

// population difference rho00 - rho11 (real parts); requires d >= 2
double population_difference(std::span<const std::complex<double>> rho, std::size_t d);

// biased (1/N) root-mean-square deviation per time point; N >= 2 required
std::vector<double> variance_grid(const std::vector<std::vector<double>>& samples_per_time);

// Streaming mean of the weighted Hermitized samples plus Welford moments of
// the population difference, per output time point.
class EnsembleAccumulator {
public:
    EnsembleAccumulator() = default;
    EnsembleAccumulator(std::size_t n_times, std::size_t d);

    void add(const TrajectoryRecord& rec);
    void merge(const EnsembleAccumulator& other);

    std::uint64_t count() const { return count_; }
    std::size_t n_times() const { return n_times_; }
    std::size_t dim() const { return d_; }
    // mean density matrix at a time point, symmetrized (A + A^+)/2
    Eigen::MatrixXcd mean_rho(std::size_t time_index) const;
    double mean_population(std::size_t time_index) const;
    double sigma(std::size_t time_index) const;  // biased 1/N rms deviation

    std::string serialize() const;                       // versioned JSON
    static EnsembleAccumulator deserialize(const std::string& text);

private:
    std::size_t n_times_{0};
    std::size_t d_{0};
    std::uint64_t count_{0};
    std::vector<std::complex<double>> mean_rho_;  // n_times * d*d
    std::vector<double> mean_p_;
    std::vector<double> m2_p_;
};

struct EnsembleConfig {
    TrajectoryConfig trajectory;
    std::uint64_t n_trajectories{1};
    std::vector<std::uint64_t> ladder;  // checkpoint N values, ascending
    unsigned workers{1};
};

struct EnsembleResult {
    std::vector<double> times;
    std::vector<std::complex<double>> mean_rho;  // n_times * d*d
    std::vector<double> population;              // P(N_max, t)
    std::vector<double> sigma;                   // sigma(N_max, t)
    std::uint64_t n_used{0};
    std::uint64_t n_discarded{0};
    std::vector<std::string> discard_log;
    std::vector<FieldRecord> field_dump;
};

struct ConvergenceReport {
    std::vector<std::uint64_t> ladder;  // ladder values plus N_max as last entry
    std::vector<double> times;
    std::vector<std::vector<double>> population;  // [ladder][time]
    std::vector<std::vector<double>> sigma;
    std::vector<std::vector<double>> phi;  // |P(N,t) - P(N_max,t)|
};

// Deterministic for fixed (base_seed, n_trajectories, config) regardless of
// worker count: workers produce records, reduction happens in index order.
std::pair<EnsembleResult, ConvergenceReport> run_ensemble(const EnsembleConfig& config);

}  // namespace sfdeom
