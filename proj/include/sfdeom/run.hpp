// run.hpp — end-to-end orchestration: build the problem from a RunConfig, run
// the ensemble, and write populations.csv / convergence.csv / meta.json.

#pragma once

#include <string>

#include "sfdeom/config.hpp"
#include "sfdeom/ensemble.hpp"

namespace sfdeom {

struct BathError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct EnsembleError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct BuiltProblem {
    SystemModel model;
    BathExpansion bath;
    HierarchySpace space;
    Eigen::MatrixXcd rho0;  // |0><0|
};

// model + bath decomposition + hierarchy space; bath failures surface as BathError
BuiltProblem build_problem(const RunConfig& config);

struct RunSummary {
    std::uint64_t n_used{0};
    std::uint64_t n_discarded{0};
    double wall_seconds{0.0};
    std::string out_dir;
};

// Runs the full ensemble and writes populations.csv, convergence.csv and
// meta.json (plus fields.csv when field dumping is on) into out_dir.
RunSummary run_simulation(const RunConfig& config, const std::string& out_dir);

// Max |expansion - reference C(t)| over t in [0, t_max]; writes a (t, abs_error)
// CSV when csv_path is non-empty.
double validate_bath(const RunConfig& config, const std::string& csv_path, double t_max = 10.0,
                     double t_step = 0.1);

}  // namespace sfdeom
