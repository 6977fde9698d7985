/* Copyright 2026 the prsp authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *  http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/* prsp — probabilistic sparse coding and dictionary learning.
 *
 * C interface to the prsp shared library. Eight generative models (bsc,
 * tsc, dsc, gsc, mca, mmca, gmm, pmm) are trained by expectation
 * maximization over truncated posteriors, with a deterministic
 * multi-threaded E-step.
 *
 * All objects are opaque handles created and destroyed through this API.
 * Functions return PRSP_OK on success; on failure they return a status
 * code and leave a message retrievable with prsp_last_error() (per
 * thread). Output handles are written only on success.
 */

#ifndef PRSP_H
#define PRSP_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum prsp_status {
  PRSP_OK = 0,
  PRSP_ERR_CONFIG = 2,  /* invalid hyperparameters, flags or schedules */
  PRSP_ERR_DATA = 3,    /* file, format or shape problems */
  PRSP_ERR_NUMERIC = 4, /* non-finite free energy or failed factorization */
  PRSP_ERR_INTERNAL = 5
} prsp_status;

typedef struct prsp_dataset prsp_dataset; /* immutable N×D observations */
typedef struct prsp_matrix prsp_matrix;   /* generic row-major array */
typedef struct prsp_session prsp_session; /* training configuration */
typedef struct prsp_result prsp_result;   /* finished training run */
typedef struct prsp_run prsp_run;         /* run directory opened for reuse */

const char* prsp_version(void);
/* Message for the most recent failure on this thread; empty if none. */
const char* prsp_last_error(void);

/* ---- datasets ------------------------------------------------------- */

/* Loads a PRSPAR01 array file (by magic) or a headerless CSV. */
prsp_status prsp_dataset_load(const char* path, prsp_dataset** out);
prsp_status prsp_dataset_create(uint64_t rows, uint64_t cols,
                                const double* row_major, prsp_dataset** out);
prsp_status prsp_dataset_save(const prsp_dataset* data, const char* path);
uint64_t prsp_dataset_rows(const prsp_dataset* data);
uint64_t prsp_dataset_cols(const prsp_dataset* data);
const double* prsp_dataset_data(const prsp_dataset* data);
void prsp_dataset_free(prsp_dataset* data);

/* ---- matrices ------------------------------------------------------- */

prsp_status prsp_matrix_load(const char* path, prsp_matrix** out);
prsp_status prsp_matrix_save(const prsp_matrix* m, const char* path);
uint64_t prsp_matrix_rows(const prsp_matrix* m);
uint64_t prsp_matrix_cols(const prsp_matrix* m);
const double* prsp_matrix_data(const prsp_matrix* m);
void prsp_matrix_free(prsp_matrix* m);

/* ---- bars benchmark data -------------------------------------------- */

/* `mode` is "linear" or "max". `prob` <= 0 picks the default 2/(2*size).
 * `truth_out` may be NULL; otherwise it receives the size²×2·size
 * ground-truth dictionary. */
prsp_status prsp_bars_generate(uint32_t size, uint64_t n, double prob,
                               double amplitude, double noise,
                               const char* mode, uint64_t seed,
                               prsp_dataset** data_out,
                               prsp_matrix** truth_out);

/* ---- training ------------------------------------------------------- */

prsp_status prsp_session_create(prsp_session** out);
void prsp_session_free(prsp_session* s);

prsp_status prsp_session_set_model(prsp_session* s, const char* name);
prsp_status prsp_session_set_latents(prsp_session* s, uint32_t latents);
/* Defaults to hprime = latents and gamma = hprime when unset. */
prsp_status prsp_session_set_truncation(prsp_session* s, uint32_t hprime,
                                        uint32_t gamma);
/* dsc only: the latent value alphabet (must contain 0). */
prsp_status prsp_session_set_values(prsp_session* s, const double* values,
                                    uint32_t count);
prsp_status prsp_session_set_iterations(prsp_session* s, uint64_t iterations);
prsp_status prsp_session_set_seed(prsp_session* s, uint64_t seed);
/* 0 means the number of logical CPUs. */
prsp_status prsp_session_set_workers(prsp_session* s, uint32_t workers);
/* Shard boundaries for the deterministic reduction; 0 means one shard per
 * worker. Fixing shards makes results identical across worker counts. */
prsp_status prsp_session_set_shards(prsp_session* s, uint32_t shards);
/* Early-stop tolerance on the relative free-energy change; negative
 * disables (the default). */
prsp_status prsp_session_set_tolerance(prsp_session* s, double tol);
/* Piecewise-linear schedules over the fraction of the budget in [0,1]. */
prsp_status prsp_session_set_temperature(prsp_session* s,
                                         const double* positions,
                                         const double* values, uint32_t count);
prsp_status prsp_session_set_weight_noise(prsp_session* s,
                                          const double* positions,
                                          const double* values,
                                          uint32_t count);

/* Trains on `data`. When `out_dir` is non-NULL the run directory receives
 * manifest.json, free_energy.csv and the parameter arrays. `out` may be
 * NULL if only the directory output is wanted. */
prsp_status prsp_train(prsp_session* s, const prsp_dataset* data,
                       const char* out_dir, prsp_result** out);

uint64_t prsp_result_iterations(const prsp_result* r);
/* Copies the per-iteration free energies; `free_energy` must hold at least
 * prsp_result_iterations() doubles. */
prsp_status prsp_result_trace(const prsp_result* r, double* free_energy);
/* Final parameter array by name (for example "W", "sigma2", "pi"). */
prsp_status prsp_result_param(const prsp_result* r, const char* name,
                              prsp_matrix** out);
void prsp_result_free(prsp_result* r);

/* ---- trained runs --------------------------------------------------- */

prsp_status prsp_run_open(const char* dir, prsp_run** out);
const char* prsp_run_model(const prsp_run* run);
void prsp_run_free(prsp_run* run);

/* Posterior readout: `s_out` receives the N×H most probable latent
 * configurations and `p_out` their N×1 posterior masses. */
prsp_status prsp_infer(const prsp_run* run, const prsp_dataset* data,
                       uint32_t workers, prsp_matrix** s_out,
                       prsp_matrix** p_out);
/* Samples n points from the trained generative model. */
prsp_status prsp_generate(const prsp_run* run, uint64_t n, uint64_t seed,
                          prsp_dataset** out);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* PRSP_H */
