// config.hpp — run configuration: JSON file parsing, named presets, and
// round-trippable serialization.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sfdeom/bath.hpp"

namespace sfdeom {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ModelSpec {
    // parametric form (used when matrices/alphas are not given explicitly)
    double omega10{0.0};
    double V{1.0};
    double lambda{0.1};
    double theta_B{1.0};
    double omega_B{1.0};
    // explicit overrides
    std::optional<std::array<double, 3>> alphas;  // {alpha0, alpha1, alpha2}
    std::optional<Eigen::MatrixXcd> H_S;          // given as nested [re, im] pairs
    std::optional<Eigen::MatrixXcd> Q_S;
};

struct BathSpec {
    double zeta{1.0};
    double omega_B{1.0};
    double beta{1.0};
    PoleScheme scheme{PoleScheme::pade};
    std::size_t n_poles{2};
};

struct RunConfig {
    ModelSpec model;
    BathSpec bath;
    std::size_t L{5};             // hierarchy truncation tier
    double dt{1e-3};
    double t_final{10.0};
    std::size_t output_stride{10};
    std::uint64_t N{1000};        // trajectory count
    std::vector<std::uint64_t> ladder;
    std::uint64_t seed{12345};
    unsigned workers{1};
    bool gt{true};
    std::size_t field_dump_stride{0};
    bool force_zero_fields{false};

    void validate() const;  // throws ConfigError naming the offending key
};

// presets from the five bath-coupling cases: L, minusQ, plusQ, LminusQ, LplusQ
RunConfig preset_config(const std::string& name);
std::vector<std::string> preset_names();

RunConfig parse_config_file(const std::string& path);
RunConfig parse_config_json(const std::string& text);
std::string serialize_config(const RunConfig& config);

// dotted-key override, e.g. set_config_key(c, "integration.dt", "0.001")
void set_config_key(RunConfig& config, const std::string& key, const std::string& value);

}  // namespace sfdeom
