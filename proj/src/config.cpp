#include "sfdeom/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace sfdeom {

using nlohmann::json;

namespace {

void require_known_keys(const json& obj, const std::string& prefix,
                        const std::set<std::string>& allowed) {
    for (const auto& [key, value] : obj.items()) {
        if (!allowed.count(key)) {
            throw ConfigError("unknown key '" + prefix + key + "'");
        }
    }
}

double get_num(const json& obj, const std::string& prefix, const std::string& key,
               double fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_number()) throw ConfigError("'" + prefix + key + "' must be a number");
    return obj[key].get<double>();
}

Eigen::MatrixXcd parse_matrix(const json& rows, const std::string& path) {
    if (!rows.is_array() || rows.empty()) {
        throw ConfigError("'" + path + "' must be a non-empty array of rows");
    }
    const std::size_t d = rows.size();
    Eigen::MatrixXcd m(d, d);
    for (std::size_t r = 0; r < d; ++r) {
        if (!rows[r].is_array() || rows[r].size() != d) {
            throw ConfigError("'" + path + "' must be square");
        }
        for (std::size_t c = 0; c < d; ++c) {
            const auto& cell = rows[r][c];
            if (!cell.is_array() || cell.size() != 2) {
                throw ConfigError("'" + path + "' entries must be [re, im] pairs");
            }
            m(r, c) = std::complex<double>(cell[0].get<double>(), cell[1].get<double>());
        }
    }
    return m;
}

json dump_matrix(const Eigen::MatrixXcd& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            row.push_back({m(r, c).real(), m(r, c).imag()});
        }
        rows.push_back(row);
    }
    return rows;
}

}  // namespace

void RunConfig::validate() const {
    if (!(dt > 0.0)) throw ConfigError("'integration.dt' must be > 0");
    if (!(t_final > 0.0)) throw ConfigError("'integration.t_final' must be > 0");
    if (output_stride < 1) throw ConfigError("'integration.output_stride' must be >= 1");
    if (L < 1) throw ConfigError("'hierarchy.L' must be >= 1");
    if (N < 1) throw ConfigError("'ensemble.N' must be >= 1");
    if (!(bath.zeta > 0.0)) throw ConfigError("'bath.zeta' must be > 0");
    if (!(bath.omega_B > 0.0)) throw ConfigError("'bath.omega_B' must be > 0");
    if (!(bath.beta > 0.0)) throw ConfigError("'bath.beta' must be > 0");
    if (!model.alphas) {
        if (model.lambda < 0.0) throw ConfigError("'model.lambda' must be >= 0");
        if (!(model.theta_B > 0.0)) throw ConfigError("'model.theta_B' must be > 0");
        if (!(model.omega_B > 0.0)) throw ConfigError("'model.omega_B' must be > 0");
    }
}

RunConfig preset_config(const std::string& name) {
    RunConfig c;  // omega10=0, V=omega_B=zeta=beta=1, dt=0.001 are the defaults
    if (name == "L") {
        c.model.lambda = 0.1;
        c.model.theta_B = 1.0;
    } else if (name == "minusQ") {
        c.model.lambda = 0.0;
        c.model.theta_B = 0.8;
    } else if (name == "plusQ") {
        c.model.lambda = 0.0;
        c.model.theta_B = 1.25;
    } else if (name == "LminusQ") {
        c.model.lambda = 0.1;
        c.model.theta_B = 0.8;
    } else if (name == "LplusQ") {
        c.model.lambda = 0.1;
        c.model.theta_B = 1.25;
    } else {
        throw ConfigError("unknown preset '" + name + "' (expected L, minusQ, plusQ, LminusQ, LplusQ)");
    }
    return c;
}

std::vector<std::string> preset_names() {
    return {"L", "minusQ", "plusQ", "LminusQ", "LplusQ"};
}

RunConfig parse_config_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    require_known_keys(j, "", {"model", "bath", "hierarchy", "integration", "ensemble", "flags"});

    RunConfig c;
    if (j.contains("model")) {
        const auto& m = j["model"];
        require_known_keys(m, "model.",
                           {"omega10", "V", "lambda", "theta_B", "omega_B", "alphas", "H_S", "Q_S"});
        c.model.omega10 = get_num(m, "model.", "omega10", c.model.omega10);
        c.model.V = get_num(m, "model.", "V", c.model.V);
        c.model.lambda = get_num(m, "model.", "lambda", c.model.lambda);
        c.model.theta_B = get_num(m, "model.", "theta_B", c.model.theta_B);
        c.model.omega_B = get_num(m, "model.", "omega_B", c.model.omega_B);
        if (m.contains("alphas")) {
            const auto& a = m["alphas"];
            if (!a.is_array() || a.size() != 3) {
                throw ConfigError("'model.alphas' must be [alpha0, alpha1, alpha2]");
            }
            c.model.alphas = {{a[0].get<double>(), a[1].get<double>(), a[2].get<double>()}};
        }
        if (m.contains("H_S")) c.model.H_S = parse_matrix(m["H_S"], "model.H_S");
        if (m.contains("Q_S")) c.model.Q_S = parse_matrix(m["Q_S"], "model.Q_S");
    }
    if (j.contains("bath")) {
        const auto& b = j["bath"];
        require_known_keys(b, "bath.", {"zeta", "omega_B", "beta", "scheme", "n_poles"});
        c.bath.zeta = get_num(b, "bath.", "zeta", c.bath.zeta);
        c.bath.omega_B = get_num(b, "bath.", "omega_B", c.bath.omega_B);
        c.bath.beta = get_num(b, "bath.", "beta", c.bath.beta);
        if (b.contains("scheme")) c.bath.scheme = pole_scheme_from_string(b["scheme"].get<std::string>());
        if (b.contains("n_poles")) c.bath.n_poles = b["n_poles"].get<std::size_t>();
    }
    if (j.contains("hierarchy")) {
        require_known_keys(j["hierarchy"], "hierarchy.", {"L"});
        if (j["hierarchy"].contains("L")) c.L = j["hierarchy"]["L"].get<std::size_t>();
    }
    if (j.contains("integration")) {
        const auto& i = j["integration"];
        require_known_keys(i, "integration.", {"dt", "t_final", "output_stride"});
        c.dt = get_num(i, "integration.", "dt", c.dt);
        c.t_final = get_num(i, "integration.", "t_final", c.t_final);
        if (i.contains("output_stride")) c.output_stride = i["output_stride"].get<std::size_t>();
    }
    if (j.contains("ensemble")) {
        const auto& e = j["ensemble"];
        require_known_keys(e, "ensemble.", {"N", "ladder", "seed", "workers"});
        if (e.contains("N")) c.N = e["N"].get<std::uint64_t>();
        if (e.contains("ladder")) c.ladder = e["ladder"].get<std::vector<std::uint64_t>>();
        if (e.contains("seed")) c.seed = e["seed"].get<std::uint64_t>();
        if (e.contains("workers")) c.workers = e["workers"].get<unsigned>();
    }
    if (j.contains("flags")) {
        const auto& f = j["flags"];
        require_known_keys(f, "flags.", {"gt", "field_dump_stride", "force_zero_fields"});
        if (f.contains("gt")) c.gt = f["gt"].get<bool>();
        if (f.contains("field_dump_stride")) c.field_dump_stride = f["field_dump_stride"].get<std::size_t>();
        if (f.contains("force_zero_fields")) c.force_zero_fields = f["force_zero_fields"].get<bool>();
    }
    c.validate();
    return c;
}

RunConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_json(buf.str());
}

std::string serialize_config(const RunConfig& c) {
    json j;
    j["model"] = {{"omega10", c.model.omega10}, {"V", c.model.V},       {"lambda", c.model.lambda},
                  {"theta_B", c.model.theta_B}, {"omega_B", c.model.omega_B}};
    if (c.model.alphas) {
        j["model"]["alphas"] = {(*c.model.alphas)[0], (*c.model.alphas)[1], (*c.model.alphas)[2]};
    }
    if (c.model.H_S) j["model"]["H_S"] = dump_matrix(*c.model.H_S);
    if (c.model.Q_S) j["model"]["Q_S"] = dump_matrix(*c.model.Q_S);
    j["bath"] = {{"zeta", c.bath.zeta},
                 {"omega_B", c.bath.omega_B},
                 {"beta", c.bath.beta},
                 {"scheme", to_string(c.bath.scheme)},
                 {"n_poles", c.bath.n_poles}};
    j["hierarchy"] = {{"L", c.L}};
    j["integration"] = {{"dt", c.dt}, {"t_final", c.t_final}, {"output_stride", c.output_stride}};
    j["ensemble"] = {{"N", c.N}, {"ladder", c.ladder}, {"seed", c.seed}, {"workers", c.workers}};
    j["flags"] = {{"gt", c.gt},
                  {"field_dump_stride", c.field_dump_stride},
                  {"force_zero_fields", c.force_zero_fields}};
    return j.dump(2);
}

void set_config_key(RunConfig& c, const std::string& key, const std::string& value) {
    try {
        if (key == "model.omega10") c.model.omega10 = std::stod(value);
        else if (key == "model.V") c.model.V = std::stod(value);
        else if (key == "model.lambda") c.model.lambda = std::stod(value);
        else if (key == "model.theta_B") c.model.theta_B = std::stod(value);
        else if (key == "model.omega_B") c.model.omega_B = std::stod(value);
        else if (key == "bath.zeta") c.bath.zeta = std::stod(value);
        else if (key == "bath.omega_B") c.bath.omega_B = std::stod(value);
        else if (key == "bath.beta") c.bath.beta = std::stod(value);
        else if (key == "bath.scheme") c.bath.scheme = pole_scheme_from_string(value);
        else if (key == "bath.n_poles") c.bath.n_poles = std::stoul(value);
        else if (key == "hierarchy.L") c.L = std::stoul(value);
        else if (key == "integration.dt") c.dt = std::stod(value);
        else if (key == "integration.t_final") c.t_final = std::stod(value);
        else if (key == "integration.output_stride") c.output_stride = std::stoul(value);
        else if (key == "ensemble.N") c.N = std::stoull(value);
        else if (key == "ensemble.seed") c.seed = std::stoull(value);
        else if (key == "ensemble.workers") c.workers = static_cast<unsigned>(std::stoul(value));
        else if (key == "ensemble.ladder") {
            c.ladder.clear();
            std::istringstream ss(value);
            std::string item;
            while (std::getline(ss, item, ',')) {
                if (!item.empty()) c.ladder.push_back(std::stoull(item));
            }
        } else if (key == "flags.gt") c.gt = (value == "true" || value == "1");
        else if (key == "flags.field_dump_stride") c.field_dump_stride = std::stoul(value);
        else if (key == "flags.force_zero_fields") c.force_zero_fields = (value == "true" || value == "1");
        else throw ConfigError("unknown key '" + key + "'");
    } catch (const std::invalid_argument&) {
        throw ConfigError("invalid value '" + value + "' for key '" + key + "'");
    } catch (const std::out_of_range&) {
        throw ConfigError("value '" + value + "' out of range for key '" + key + "'");
    }
}

}  // namespace sfdeom
