#include "sfdeom/sfdeom_c.h"

#include <cstring>
#include <string>

#include "sfdeom/run.hpp"

namespace {

thread_local std::string g_last_error;

int code_for_current_exception() {
    try {
        throw;
    } catch (const sfdeom::ConfigError& e) {
        g_last_error = e.what();
        return SFD_ERR_CONFIG;
    } catch (const sfdeom::BathError& e) {
        g_last_error = e.what();
        return SFD_ERR_BATH;
    } catch (const sfdeom::TrajectoryError& e) {
        g_last_error = e.what();
        return SFD_ERR_TRAJECTORY;
    } catch (const sfdeom::EnsembleError& e) {
        g_last_error = e.what();
        return SFD_ERR_ENSEMBLE;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return SFD_ERR_INTERNAL;
    } catch (...) {
        g_last_error = "unknown error";
        return SFD_ERR_INTERNAL;
    }
}

char* dup_string(const std::string& s) {
    char* out = new char[s.size() + 1];
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

}  // namespace

struct sfd_config {
    sfdeom::RunConfig cfg;
};

extern "C" {

const char* sfd_version(void) { return "0.1.0"; }

const char* sfd_last_error(void) { return g_last_error.c_str(); }

sfd_config* sfd_config_from_file(const char* path) {
    if (!path) {
        g_last_error = "null path";
        return nullptr;
    }
    try {
        return new sfd_config{sfdeom::parse_config_file(path)};
    } catch (...) {
        code_for_current_exception();
        return nullptr;
    }
}

sfd_config* sfd_config_from_json(const char* text) {
    if (!text) {
        g_last_error = "null text";
        return nullptr;
    }
    try {
        return new sfd_config{sfdeom::parse_config_json(text)};
    } catch (...) {
        code_for_current_exception();
        return nullptr;
    }
}

sfd_config* sfd_config_preset(const char* name) {
    if (!name) {
        g_last_error = "null preset name";
        return nullptr;
    }
    try {
        return new sfd_config{sfdeom::preset_config(name)};
    } catch (...) {
        code_for_current_exception();
        return nullptr;
    }
}

void sfd_config_free(sfd_config* config) { delete config; }

int sfd_config_set(sfd_config* config, const char* key, const char* value) {
    if (!config || !key || !value) {
        g_last_error = "null argument";
        return SFD_ERR_CONFIG;
    }
    try {
        sfdeom::set_config_key(config->cfg, key, value);
        return SFD_OK;
    } catch (...) {
        return code_for_current_exception();
    }
}

char* sfd_config_to_json(const sfd_config* config) {
    if (!config) {
        g_last_error = "null config";
        return nullptr;
    }
    try {
        return dup_string(sfdeom::serialize_config(config->cfg));
    } catch (...) {
        code_for_current_exception();
        return nullptr;
    }
}

void sfd_string_free(char* s) { delete[] s; }

int sfd_run(const sfd_config* config, const char* out_dir) {
    if (!config || !out_dir) {
        g_last_error = "null argument";
        return SFD_ERR_CONFIG;
    }
    try {
        sfdeom::run_simulation(config->cfg, out_dir);
        return SFD_OK;
    } catch (...) {
        return code_for_current_exception();
    }
}

int sfd_validate_bath(const sfd_config* config, const char* csv_path, double* max_abs_error) {
    if (!config) {
        g_last_error = "null config";
        return SFD_ERR_CONFIG;
    }
    try {
        const double err = sfdeom::validate_bath(config->cfg, csv_path ? csv_path : "");
        if (max_abs_error) *max_abs_error = err;
        return SFD_OK;
    } catch (...) {
        return code_for_current_exception();
    }
}

}  // extern "C"
