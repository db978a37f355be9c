/*
 * Copyright 2026 The rprct Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/*
 * C interface to librprct: design, simulation and analysis of randomized
 * experiments whose binary outcomes are collected through forced randomized
 * response.
 *
 * Conventions:
 *  - Every function returns an rprct_status; RPRCT_OK is 0.
 *  - On failure, rprct_last_error() returns a message for the calling thread
 *    (valid until the next failing call on that thread).
 *  - Objects are opaque handles released with the matching *_free function.
 *  - Strings returned through char** are owned by the caller and released
 *    with rprct_string_free.
 *  - Structured inputs and outputs are JSON documents (UTF-8).
 */

#ifndef RPRCT_RPRCT_H_
#define RPRCT_RPRCT_H_

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef int rprct_status;

#define RPRCT_OK 0
#define RPRCT_E_INVALID_ARGUMENT 1
#define RPRCT_E_DOMAIN 2
#define RPRCT_E_INFEASIBLE 3
#define RPRCT_E_UNIDENTIFIED 4
#define RPRCT_E_DEGENERATE 5
#define RPRCT_E_SCHEMA 6
#define RPRCT_E_IO 7
#define RPRCT_E_RANK_DEFICIENT 8
#define RPRCT_E_INTERNAL 9

typedef struct rprct_design rprct_design;
typedef struct rprct_study rprct_study;
typedef struct rprct_reports rprct_reports;

const char* rprct_version(void);
const char* rprct_last_error(void);
const char* rprct_status_name(rprct_status status);
/* 1 for data/statistical failures (degenerate data, unidentified), else 0. */
int rprct_status_is_statistical(rprct_status status);
void rprct_string_free(char* str);

/* ---- mechanism ---------------------------------------------------------- */

/* ln(2/(r + r') - 1); +inf when r + r' = 0. */
rprct_status rprct_epsilon_symmetric(double r, double r_prime, double* out);
/* Exact privacy loss of a weighted mixture of k FRR maps. */
rprct_status rprct_epsilon_general(const double* r0, const double* r1,
                                   const double* weights, size_t k,
                                   double* out);
/* Pr(privatized = 1 | y). */
rprct_status rprct_response_probability(double r0, double r1, int y,
                                        double* out);

/* ---- design ------------------------------------------------------------- */

rprct_status rprct_design_create(double delta, double frr1_r0, double frr1_r1,
                                 double frr2_r0, double frr2_r1,
                                 rprct_design** out);
/* Symmetric maps solved from a target privacy loss and gap r - r'. */
rprct_status rprct_design_from_epsilon(double epsilon, double gap, double delta,
                                       rprct_design** out);
rprct_status rprct_design_from_json(const char* json, rprct_design** out);
void rprct_design_free(rprct_design* design);

rprct_status rprct_design_epsilon(const rprct_design* design, double* out);
rprct_status rprct_design_masking_factor(const rprct_design* design,
                                         double* out);
rprct_status rprct_design_to_json(const rprct_design* design, char** out_json);
/* Epsilon variants, efficiency quote, masking factor, warnings. */
rprct_status rprct_design_report(const rprct_design* design, double tau0,
                                 double tau1, char** out_json);

rprct_status rprct_solve_frr(double epsilon, double gap, double* r,
                             double* r_prime);
rprct_status rprct_relative_efficiency(double epsilon, double delta,
                                       double tau0, double tau1,
                                       double* relative_efficiency,
                                       double* se_inflation,
                                       double* sample_size_multiplier);
rprct_status rprct_sample_size(double epsilon, double delta, double tau0,
                               double tau1, double power, double alpha,
                               double effect, uint64_t* n);

/* ---- simulation --------------------------------------------------------- */

/*
 * Runs the protocol once for the {"population", "design"} document and
 * writes <prefix>.csv, <prefix>.truth.csv and <prefix>.schema.json.
 */
rprct_status rprct_simulate(const char* config_json, uint64_t seed,
                            const char* out_prefix);

/*
 * Monte Carlo summary as JSON. options_json may be NULL or hold
 * {"methods": [...], "bootstrap": B, "alpha": a, "known_lambda": l,
 *  "working_models": "aic"|"aic_forward"|"all"|"intercept"|"zero"}.
 */
rprct_status rprct_replicate(const char* config_json, uint64_t seed,
                             size_t reps, const char* options_json,
                             char** out_json);

/*
 * Power/coverage grid. grid_json: {"kind": "effect"|"epsilon",
 * "values": [...], "gap": g}; without a positive gap each epsilon point uses
 * a third of r + r'. options_json as for rprct_replicate. The
 * design comes from design_json when non-NULL, else from the config.
 */
rprct_status rprct_power(const char* config_json, const char* design_json,
                         const char* grid_json, uint64_t seed, size_t reps,
                         const char* options_json, char** out_json);

/* ---- data and estimation ------------------------------------------------ */

/* schema_json may be NULL (default schema: s, a, y_tilde, no covariates). */
rprct_status rprct_study_read(const char* path, const char* schema_json,
                              rprct_study** out);
void rprct_study_free(rprct_study* study);
rprct_status rprct_study_rows(const rprct_study* study, size_t* out);
rprct_status rprct_study_outcome_count(const rprct_study* study, size_t* out);

/*
 * Per-outcome analysis. options_json may be NULL or hold
 * {"alpha": a, "bootstrap": B, "seed": s, "working_models": ...,
 *  "outcomes": [names]}.
 */
rprct_status rprct_estimate(const rprct_study* study,
                            const rprct_design* design,
                            const char* options_json, rprct_reports** out);
void rprct_reports_free(rprct_reports* reports);
rprct_status rprct_reports_count(const rprct_reports* reports, size_t* out);
/* format: "json", "markdown" or "csv". */
rprct_status rprct_reports_render(const rprct_reports* reports,
                                  const char* format, char** out);

#ifdef __cplusplus
}  /* extern "C" */
#endif

#endif  /* RPRCT_RPRCT_H_ */
