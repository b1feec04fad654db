#include "sfdeom/ensemble.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <condition_variable>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <thread>

#include <json.hpp>

namespace sfdeom {

using nlohmann::json;

double population_difference(std::span<const std::complex<double>> rho, std::size_t d) {
    if (d < 2 || rho.size() < d * d) {
        throw std::invalid_argument("population_difference: need a matrix with d >= 2");
    }
    return rho[0].real() - rho[d + 1].real();
}

std::vector<double> variance_grid(const std::vector<std::vector<double>>& samples_per_time) {
    std::vector<double> out;
    out.reserve(samples_per_time.size());
    for (const auto& samples : samples_per_time) {
        if (samples.size() < 2) {
            throw std::invalid_argument("variance_grid: need N >= 2 samples per time point");
        }
        double mean = 0.0;
        for (double s : samples) mean += s;
        mean /= static_cast<double>(samples.size());
        double acc = 0.0;
        for (double s : samples) acc += (s - mean) * (s - mean);
        out.push_back(std::sqrt(acc / static_cast<double>(samples.size())));
    }
    return out;
}

EnsembleAccumulator::EnsembleAccumulator(std::size_t n_times, std::size_t d)
    : n_times_(n_times),
      d_(d),
      mean_rho_(n_times * d * d, 0.0),
      mean_p_(n_times, 0.0),
      m2_p_(n_times, 0.0) {}

void EnsembleAccumulator::add(const TrajectoryRecord& rec) {
    if (rec.times.size() != n_times_) {
        throw std::invalid_argument("accumulator: record length mismatch");
    }
    const std::size_t dd = d_ * d_;
    ++count_;
    const double inv_n = 1.0 / static_cast<double>(count_);
    for (std::size_t j = 0; j < n_times_; ++j) {
        const std::complex<double>* x = rec.samples.data() + j * dd;
        std::complex<double>* m = mean_rho_.data() + j * dd;
        for (std::size_t e = 0; e < dd; ++e) m[e] += (x[e] - m[e]) * inv_n;
        double p = population_difference({x, dd}, d_);
        double delta = p - mean_p_[j];
        mean_p_[j] += delta * inv_n;
        m2_p_[j] += delta * (p - mean_p_[j]);
    }
}

void EnsembleAccumulator::merge(const EnsembleAccumulator& other) {
    if (other.count_ == 0) return;
    if (count_ == 0) {
        *this = other;
        return;
    }
    if (other.n_times_ != n_times_ || other.d_ != d_) {
        throw std::invalid_argument("accumulator: merge shape mismatch");
    }
    const double na = static_cast<double>(count_);
    const double nb = static_cast<double>(other.count_);
    const double n = na + nb;
    const std::size_t dd = d_ * d_;
    for (std::size_t j = 0; j < n_times_; ++j) {
        for (std::size_t e = 0; e < dd; ++e) {
            std::size_t idx = j * dd + e;
            mean_rho_[idx] += (other.mean_rho_[idx] - mean_rho_[idx]) * (nb / n);
        }
        double delta = other.mean_p_[j] - mean_p_[j];
        m2_p_[j] += other.m2_p_[j] + delta * delta * na * nb / n;
        mean_p_[j] += delta * (nb / n);
    }
    count_ += other.count_;
}

Eigen::MatrixXcd EnsembleAccumulator::mean_rho(std::size_t time_index) const {
    Eigen::MatrixXcd m(d_, d_);
    const std::complex<double>* b = mean_rho_.data() + time_index * d_ * d_;
    for (std::size_t r = 0; r < d_; ++r)
        for (std::size_t c = 0; c < d_; ++c) m(r, c) = b[r * d_ + c];
    return 0.5 * (m + m.adjoint().eval());
}

double EnsembleAccumulator::mean_population(std::size_t time_index) const {
    return mean_p_[time_index];
}

double EnsembleAccumulator::sigma(std::size_t time_index) const {
    if (count_ == 0) return 0.0;
    return std::sqrt(m2_p_[time_index] / static_cast<double>(count_));
}

std::string EnsembleAccumulator::serialize() const {
    json j;
    j["format"] = "sfdeom-accumulator";
    j["version"] = 1;
    j["n_times"] = n_times_;
    j["d"] = d_;
    j["count"] = count_;
    auto& rho = j["mean_rho"] = json::array();
    for (const auto& z : mean_rho_) rho.push_back({z.real(), z.imag()});
    j["mean_p"] = mean_p_;
    j["m2_p"] = m2_p_;
    return j.dump();
}

EnsembleAccumulator EnsembleAccumulator::deserialize(const std::string& text) {
    json j = json::parse(text);
    if (j.value("format", "") != "sfdeom-accumulator" || j.value("version", 0) != 1) {
        throw std::invalid_argument("accumulator: unrecognized checkpoint format");
    }
    EnsembleAccumulator acc(j.at("n_times").get<std::size_t>(), j.at("d").get<std::size_t>());
    acc.count_ = j.at("count").get<std::uint64_t>();
    const auto& rho = j.at("mean_rho");
    if (rho.size() != acc.mean_rho_.size()) {
        throw std::invalid_argument("accumulator: checkpoint size mismatch");
    }
    for (std::size_t i = 0; i < acc.mean_rho_.size(); ++i) {
        acc.mean_rho_[i] = {rho[i][0].get<double>(), rho[i][1].get<double>()};
    }
    acc.mean_p_ = j.at("mean_p").get<std::vector<double>>();
    acc.m2_p_ = j.at("m2_p").get<std::vector<double>>();
    if (acc.mean_p_.size() != acc.n_times_ || acc.m2_p_.size() != acc.n_times_) {
        throw std::invalid_argument("accumulator: checkpoint size mismatch");
    }
    return acc;
}

namespace {

struct Slot {
    bool discarded = false;
    std::string reason;
    TrajectoryRecord record;
};

struct LadderSnapshot {
    std::uint64_t n;
    std::vector<double> population;
    std::vector<double> sigma;
};

}  // namespace

std::pair<EnsembleResult, ConvergenceReport> run_ensemble(const EnsembleConfig& config) {
    if (config.n_trajectories < 1) {
        throw std::invalid_argument("ensemble.N must be >= 1");
    }
    const std::uint64_t n_traj = config.n_trajectories;
    const unsigned workers = std::max(1u, config.workers);

    std::vector<std::uint64_t> ladder = config.ladder;
    std::sort(ladder.begin(), ladder.end());
    ladder.erase(std::unique(ladder.begin(), ladder.end()), ladder.end());

    std::mutex mtx;
    std::condition_variable cv_done, cv_space;
    std::map<std::uint64_t, Slot> parked;
    std::atomic<std::uint64_t> next_index{0};
    const std::size_t park_limit = 4 * workers + 4;

    auto worker_fn = [&]() {
        Propagator prop(*config.trajectory.space, *config.trajectory.model,
                        *config.trajectory.bath);
        while (true) {
            std::uint64_t idx = next_index.fetch_add(1);
            if (idx >= n_traj) break;
            Slot slot;
            try {
                slot.record = propagate_trajectory(config.trajectory, idx, prop);
            } catch (const TrajectoryError& e) {
                slot.discarded = true;
                slot.reason = e.what();
            }
            std::unique_lock lock(mtx);
            cv_space.wait(lock, [&] { return parked.size() < park_limit; });
            parked.emplace(idx, std::move(slot));
            cv_done.notify_all();
        }
    };

    std::vector<std::thread> pool;
    if (workers > 1) {
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker_fn);
    }

    EnsembleAccumulator acc;
    bool acc_ready = false;
    EnsembleResult result;
    std::vector<LadderSnapshot> snapshots;
    std::size_t ladder_pos = 0;

    Propagator* serial_prop = nullptr;
    std::unique_ptr<Propagator> serial_prop_holder;
    if (workers == 1) {
        serial_prop_holder = std::make_unique<Propagator>(
            *config.trajectory.space, *config.trajectory.model, *config.trajectory.bath);
        serial_prop = serial_prop_holder.get();
    }

    for (std::uint64_t idx = 0; idx < n_traj; ++idx) {
        Slot slot;
        if (workers == 1) {
            try {
                slot.record = propagate_trajectory(config.trajectory, idx, *serial_prop);
            } catch (const TrajectoryError& e) {
                slot.discarded = true;
                slot.reason = e.what();
            }
        } else {
            std::unique_lock lock(mtx);
            cv_done.wait(lock, [&] { return parked.count(idx) > 0; });
            slot = std::move(parked.at(idx));
            parked.erase(idx);
            cv_space.notify_all();
        }
        if (slot.discarded) {
            ++result.n_discarded;
            result.discard_log.push_back(slot.reason);
        } else {
            if (!acc_ready) {
                acc = EnsembleAccumulator(slot.record.times.size(), slot.record.d);
                result.times = slot.record.times;
                acc_ready = true;
            }
            acc.add(slot.record);
            for (const auto& f : slot.record.fields) result.field_dump.push_back(f);
            while (ladder_pos < ladder.size() && acc.count() == ladder[ladder_pos]) {
                LadderSnapshot snap;
                snap.n = ladder[ladder_pos];
                for (std::size_t j = 0; j < acc.n_times(); ++j) {
                    snap.population.push_back(acc.mean_population(j));
                    snap.sigma.push_back(acc.sigma(j));
                }
                snapshots.push_back(std::move(snap));
                ++ladder_pos;
            }
        }
    }
    for (auto& th : pool) th.join();

    if (!acc_ready || acc.count() == 0) {
        throw std::runtime_error("ensemble: all trajectories were discarded");
    }

    const std::size_t dd = acc.dim() * acc.dim();
    result.n_used = acc.count();
    result.mean_rho.resize(acc.n_times() * dd);
    for (std::size_t j = 0; j < acc.n_times(); ++j) {
        Eigen::MatrixXcd m = acc.mean_rho(j);
        for (std::size_t r = 0; r < acc.dim(); ++r)
            for (std::size_t c = 0; c < acc.dim(); ++c) result.mean_rho[j * dd + r * acc.dim() + c] = m(r, c);
        result.population.push_back(acc.mean_population(j));
        result.sigma.push_back(acc.sigma(j));
    }

    ConvergenceReport report;
    report.times = result.times;
    for (const auto& snap : snapshots) {
        report.ladder.push_back(snap.n);
        report.population.push_back(snap.population);
        report.sigma.push_back(snap.sigma);
    }
    report.ladder.push_back(acc.count());
    report.population.push_back(result.population);
    report.sigma.push_back(result.sigma);
    for (const auto& pop : report.population) {
        std::vector<double> phi(pop.size());
        for (std::size_t j = 0; j < pop.size(); ++j) phi[j] = std::abs(pop[j] - result.population[j]);
        report.phi.push_back(std::move(phi));
    }
    return {std::move(result), std::move(report)};
}

}  // namespace sfdeom
