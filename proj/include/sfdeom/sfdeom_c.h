/* sfdeom_c.h — C interface to the stochastic-fields-dressed dissipaton engine.
 * Opaque handles + integer status codes; strings returned by the library must
 * be released with sfd_string_free. */

#ifndef SFDEOM_C_H
#define SFDEOM_C_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef struct sfd_config sfd_config;

enum sfd_status {
    SFD_OK = 0,
    SFD_ERR_INTERNAL = 1,   /* unexpected failure; see sfd_last_error */
    SFD_ERR_CONFIG = 2,     /* config parse/validation failure */
    SFD_ERR_BATH = 3,       /* bath decomposition/validation failure */
    SFD_ERR_TRAJECTORY = 4, /* trajectory blow-up */
    SFD_ERR_ENSEMBLE = 5    /* all trajectories discarded */
};

const char* sfd_version(void);

/* Message for the most recent failing call on this thread ("" if none). */
const char* sfd_last_error(void);

/* Constructors return NULL on failure (inspect sfd_last_error). */
sfd_config* sfd_config_from_file(const char* path);
sfd_config* sfd_config_from_json(const char* text);
sfd_config* sfd_config_preset(const char* name);
void sfd_config_free(sfd_config* config);

/* Dotted-key override, e.g. sfd_config_set(c, "integration.dt", "0.0005"). */
int sfd_config_set(sfd_config* config, const char* key, const char* value);

/* Serialized JSON for the current config; caller frees with sfd_string_free. */
char* sfd_config_to_json(const sfd_config* config);
void sfd_string_free(char* s);

/* Full run: writes populations.csv, convergence.csv, meta.json into out_dir. */
int sfd_run(const sfd_config* config, const char* out_dir);

/* Expansion-vs-reference bath check on t in [0, 10]. Writes a (t, abs_error)
 * CSV when csv_path is non-NULL/non-empty; stores the max error if
 * max_abs_error is non-NULL. */
int sfd_validate_bath(const sfd_config* config, const char* csv_path, double* max_abs_error);

#ifdef __cplusplus
}
#endif

#endif /* SFDEOM_C_H */
