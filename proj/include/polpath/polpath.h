// Copyright 2026 The polpath Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

/* C interface to the polpath simulator. Every object is an opaque handle
 * released with its matching *_free function. Functions return a status
 * code; on failure polpath_last_error() describes the problem (the message
 * is per thread and valid until the next call on that thread). Strings
 * handed out through char** parameters are owned by the caller and must be
 * released with polpath_string_free(). */

#ifndef POLPATH_POLPATH_H
#define POLPATH_POLPATH_H

#include <stddef.h>
#include <stdint.h>

#if defined(POLPATH_BUILDING)
#define POLPATH_API __attribute__((visibility("default")))
#else
#define POLPATH_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum polpath_status {
    POLPATH_OK = 0,
    POLPATH_ERR_INTERNAL = 1,
    POLPATH_ERR_CONFIG = 2,
    POLPATH_ERR_DOMAIN = 3,
    POLPATH_ERR_ANALYSIS = 4
} polpath_status;

typedef struct polpath_config polpath_config;
typedef struct polpath_pipeline polpath_pipeline;
typedef struct polpath_sweep polpath_sweep;
typedef struct polpath_tomography polpath_tomography;
typedef struct polpath_mbqc polpath_mbqc;

POLPATH_API const char *polpath_version(void);
POLPATH_API const char *polpath_last_error(void);
POLPATH_API void polpath_string_free(char *s);

/* Configuration */
POLPATH_API polpath_status polpath_config_default(polpath_config **out);
POLPATH_API polpath_status polpath_config_from_json(const char *json, polpath_config **out);
POLPATH_API polpath_status polpath_config_from_file(const char *path, polpath_config **out);
/* Flat override; value is JSON text or a bare string. */
POLPATH_API polpath_status polpath_config_set(polpath_config *cfg, const char *key, const char *value);
POLPATH_API polpath_status polpath_config_to_json(const polpath_config *cfg, char **out);
POLPATH_API void polpath_config_free(polpath_config *cfg);

/* Single pipeline run */
POLPATH_API polpath_status polpath_run_pipeline(const polpath_config *cfg, polpath_pipeline **out);
POLPATH_API polpath_status polpath_pipeline_post_selection_probability(const polpath_pipeline *r, double *out);
/* POLPATH_ERR_DOMAIN if the chain stopped before the analyzers. */
POLPATH_API polpath_status polpath_pipeline_coincidence_probability(const polpath_pipeline *r, double *out);
/* Names: psi_prime, singlet, cluster2, loop_state, cluster3. */
POLPATH_API polpath_status polpath_pipeline_fidelity(const polpath_pipeline *r, const char *name, double *out);
POLPATH_API polpath_status polpath_pipeline_summary_json(const polpath_pipeline *r, char **out);
POLPATH_API size_t polpath_pipeline_checkpoint_count(const polpath_pipeline *r);
POLPATH_API polpath_status polpath_pipeline_checkpoint_name(const polpath_pipeline *r, size_t index, char **out);
/* {"members":[{"weight":w,"state":{"modes":[...],"terms":[...]}}]} */
POLPATH_API polpath_status polpath_pipeline_checkpoint_json(const polpath_pipeline *r, size_t index, char **out);
POLPATH_API void polpath_pipeline_free(polpath_pipeline *r);

/* Alpha sweep: one fringe per analyzer pair */
POLPATH_API polpath_status polpath_run_sweep(const polpath_config *cfg, polpath_sweep **out);
POLPATH_API size_t polpath_sweep_count(const polpath_sweep *r);
POLPATH_API polpath_status polpath_sweep_file_name(const polpath_sweep *r, size_t index, char **out);
POLPATH_API polpath_status polpath_sweep_csv(const polpath_sweep *r, size_t index, char **out);
POLPATH_API polpath_status polpath_sweep_fit_json(const polpath_sweep *r, size_t index, char **out);
/* Largest |simulated - oracle| on the Y/Y0 scale for fringe `index`. */
POLPATH_API polpath_status polpath_sweep_max_deviation(const polpath_sweep *r, size_t index, double *out);
POLPATH_API void polpath_sweep_free(polpath_sweep *r);

/* Tomography */
typedef enum polpath_estimator { POLPATH_LINEAR = 0, POLPATH_MLE = 1 } polpath_estimator;
typedef enum polpath_target { POLPATH_SINGLET = 0, POLPATH_PSI_PRIME = 1 } polpath_target;

POLPATH_API polpath_status polpath_run_tomography(const polpath_config *cfg, polpath_tomography **out);
/* Reconstruct from a counts CSV (setting_q1,setting_q2,counts). */
POLPATH_API polpath_status polpath_tomography_from_csv(const polpath_config *cfg, const char *csv,
                                                       polpath_tomography **out);
POLPATH_API polpath_status polpath_tomography_counts_csv(const polpath_tomography *r, char **out);
/* {"re":[[..]x4],"im":[[..]x4]} */
POLPATH_API polpath_status polpath_tomography_rho_json(const polpath_tomography *r, polpath_estimator which,
                                                       char **out);
POLPATH_API polpath_status polpath_tomography_fidelity(const polpath_tomography *r, polpath_estimator which,
                                                       polpath_target target, double *out);
POLPATH_API polpath_status polpath_tomography_summary_json(const polpath_tomography *r, char **out);
POLPATH_API void polpath_tomography_free(polpath_tomography *r);

/* MBQC demonstration. m1, m2 in {0,1} force a branch; pass -1 for both to
 * list all four branches. sample != 0 draws config.mbqc_samples runs. */
POLPATH_API polpath_status polpath_run_mbqc(const polpath_config *cfg, int m1, int m2, int sample,
                                            polpath_mbqc **out);
POLPATH_API polpath_status polpath_mbqc_min_overlap(const polpath_mbqc *r, double *out);
POLPATH_API polpath_status polpath_mbqc_report_json(const polpath_mbqc *r, char **out);
POLPATH_API void polpath_mbqc_free(polpath_mbqc *r);

#ifdef __cplusplus
}
#endif

#endif
