#include "sfdeom/run.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include <json.hpp>

namespace sfdeom {

namespace {

std::string fmt17(double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open output file '" + path.string() + "'");
    return out;
}

}  // namespace

BuiltProblem build_problem(const RunConfig& config) {
    config.validate();

    AlphaDescriptors alpha;
    if (config.model.alphas) {
        alpha = {(*config.model.alphas)[0], (*config.model.alphas)[1], (*config.model.alphas)[2]};
    } else {
        alpha = alpha_from_theta(config.model.lambda, config.model.theta_B, config.model.omega_B);
    }

    Eigen::MatrixXcd H_S, Q_S;
    if (config.model.H_S || config.model.Q_S) {
        if (!config.model.H_S || !config.model.Q_S) {
            throw ConfigError("'model.H_S' and 'model.Q_S' must be given together");
        }
        H_S = *config.model.H_S;
        Q_S = *config.model.Q_S;
    } else {
        std::tie(H_S, Q_S) = two_state_model(config.model.omega10, config.model.V);
    }

    BuiltProblem p;
    p.model = SystemModel::make(std::move(H_S), std::move(Q_S), alpha);

    BrownianOscillatorBath bath{config.bath.zeta, config.bath.omega_B, config.bath.beta};
    try {
        p.bath = decompose_bath(bath, config.bath.scheme, config.bath.n_poles);
    } catch (const std::exception& e) {
        throw BathError(e.what());
    }

    p.space = HierarchySpace::enumerate(p.bath.terms.size(), config.L);
    p.rho0 = Eigen::MatrixXcd::Zero(p.model.dim(), p.model.dim());
    p.rho0(0, 0) = 1.0;
    return p;
}

RunSummary run_simulation(const RunConfig& config, const std::string& out_dir) {
    const auto t_start = std::chrono::steady_clock::now();
    BuiltProblem problem = build_problem(config);

    EnsembleConfig ec;
    ec.trajectory.space = &problem.space;
    ec.trajectory.model = &problem.model;
    ec.trajectory.bath = &problem.bath;
    ec.trajectory.rho0 = problem.rho0;
    ec.trajectory.dt = config.dt;
    ec.trajectory.t_final = config.t_final;
    ec.trajectory.output_stride = config.output_stride;
    ec.trajectory.gt_enabled = config.gt;
    ec.trajectory.force_zero_fields = config.force_zero_fields;
    ec.trajectory.field_dump_stride = config.field_dump_stride;
    ec.trajectory.base_seed = config.seed;
    ec.n_trajectories = config.N;
    ec.ladder = config.ladder;
    ec.workers = config.workers;

    EnsembleResult result;
    ConvergenceReport report;
    try {
        std::tie(result, report) = run_ensemble(ec);
    } catch (const TrajectoryError&) {
        throw;
    } catch (const std::runtime_error& e) {
        throw EnsembleError(e.what());
    }

    std::filesystem::create_directories(out_dir);
    const std::filesystem::path dir(out_dir);
    const std::size_t d = problem.model.dim();

    {
        auto out = open_out(dir / "populations.csv");
        out << "t,rho00,rho11,re_rho01,im_rho01,P\n";
        for (std::size_t i = 0; i < result.times.size(); ++i) {
            const auto* rho = result.mean_rho.data() + i * d * d;
            out << fmt17(result.times[i]) << ',' << fmt17(rho[0].real()) << ','
                << fmt17(rho[d + 1].real()) << ',' << fmt17(rho[d].real()) << ','
                << fmt17(rho[d].imag()) << ',' << fmt17(result.population[i]) << '\n';
        }
    }
    {
        auto out = open_out(dir / "convergence.csv");
        out << "N,t,P,sigma,phi\n";
        for (std::size_t r = 0; r < report.ladder.size(); ++r) {
            for (std::size_t i = 0; i < report.times.size(); ++i) {
                out << report.ladder[r] << ',' << fmt17(report.times[i]) << ','
                    << fmt17(report.population[r][i]) << ',' << fmt17(report.sigma[r][i]) << ','
                    << fmt17(report.phi[r][i]) << '\n';
            }
        }
    }
    if (!result.field_dump.empty()) {
        auto out = open_out(dir / "fields.csv");
        out << "t,xi_raw,xi_prime_raw,xi,xi_prime\n";
        for (const auto& f : result.field_dump) {
            out << fmt17(f.t) << ',' << fmt17(f.xi_raw) << ',' << fmt17(f.xi_prime_raw) << ','
                << fmt17(f.xi) << ',' << fmt17(f.xi_prime) << '\n';
        }
    }

    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    {
        nlohmann::json meta;
        meta["config"] = nlohmann::json::parse(serialize_config(config));
        meta["seed"] = config.seed;
        meta["n_used"] = result.n_used;
        meta["n_discarded"] = result.n_discarded;
        meta["discard_log"] = result.discard_log;
        meta["hierarchy_size"] = problem.space.size;
        meta["n_exponential_terms"] = problem.bath.terms.size();
        meta["wall_seconds"] = wall;
        auto out = open_out(dir / "meta.json");
        out << meta.dump(2) << '\n';
    }

    RunSummary summary;
    summary.n_used = result.n_used;
    summary.n_discarded = result.n_discarded;
    summary.wall_seconds = wall;
    summary.out_dir = out_dir;
    return summary;
}

double validate_bath(const RunConfig& config, const std::string& csv_path, double t_max,
                     double t_step) {
    BrownianOscillatorBath bath{config.bath.zeta, config.bath.omega_B, config.bath.beta};
    BathExpansion expansion;
    try {
        bath.check();
        expansion = decompose_bath(bath, config.bath.scheme, config.bath.n_poles);
    } catch (const std::exception& e) {
        throw BathError(e.what());
    }

    std::ofstream csv;
    if (!csv_path.empty()) {
        const auto parent = std::filesystem::path(csv_path).parent_path();
        if (!parent.empty()) std::filesystem::create_directories(parent);
        csv.open(csv_path);
        if (!csv) throw std::runtime_error("cannot open output file '" + csv_path + "'");
        csv << "t,abs_error\n";
    }
    double max_err = 0.0;
    for (double t = 0.0; t <= t_max + 0.5 * t_step; t += t_step) {
        const cplx ref = correlation_reference(bath, t);
        const double err = std::abs(expansion.correlation(t) - ref);
        max_err = std::max(max_err, err);
        if (csv.is_open()) csv << fmt17(t) << ',' << fmt17(err) << '\n';
    }
    return max_err;
}

}  // namespace sfdeom
