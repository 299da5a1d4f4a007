/* C interface to the switching linear dynamical system library.
 *
 * Every function returns an error code: 0 on success, 1 on runtime
 * failure (I/O, numerical), 2 on invalid usage (bad arguments, malformed
 * inputs). On failure rslds_last_error() returns a human-readable
 * message for the calling thread.
 */
#ifndef RSLDS_H
#define RSLDS_H

#ifdef __cplusplus
extern "C" {
#endif

#define RSLDS_OK 0
#define RSLDS_ERR_RUNTIME 1
#define RSLDS_ERR_USAGE 2

/* Message of the last failing call on this thread; never NULL. */
const char* rslds_last_error(void);

/* Opaque model handle, backed by the JSON parameter document. */
typedef struct rslds_model rslds_model;

int rslds_model_load(const char* path, rslds_model** out);
int rslds_model_free(rslds_model* model);
int rslds_model_info(const rslds_model* model, int* K, int* M, int* N);

/* Forward-simulate T steps and write a series CSV (t, z, x.., y.., mask). */
int rslds_model_simulate(const rslds_model* model, int T,
                         unsigned long long seed, const char* out_csv);

/* Synthetic data generators. `generator` is "nascar" or
 * "lorenz-bernoulli". Steps in [mask_start, mask_end) are held out
 * (pass 0, 0 for no mask). Writes into out_dir:
 *   data.csv    series with the ground-truth z and x columns
 *   model.json  generating parameters (nascar only)
 *   rho.csv     true event probabilities (lorenz-bernoulli only)
 */
int rslds_generate_data(const char* generator, int T, unsigned long long seed,
                        int mask_start, int mask_end, const char* out_dir);

/* Fit a model to a series CSV. model_name is one of
 * {slds, rslds, rslds-s, rslds-ro, rslds-sticky, rarhmm}; inference is
 * "gibbs" or "svi". The emission family is inferred from the data
 * (all-binary columns mean Bernoulli). Runs n_chains independent chains
 * with derived seeds in parallel; chain c writes into out_dir/chain<c>/:
 *   init.json       initializer output
 *   model.json      final parameter sample / variational point estimate
 *   trace.csv       per-iteration objective
 *   posterior.csv   t, z (argmax), posterior mean of x (and rho)
 */
int rslds_fit(const char* data_csv, const char* model_name,
              const char* inference, int K, int M, int n_iters, int n_chains,
              unsigned long long seed, const char* out_dir);

/* Score a fitted chain directory against a generator directory; writes
 * a metrics JSON (segmentation accuracy, duration statistics, affine
 * path error, and masked-region calibration when rho.csv exists). */
int rslds_evaluate(const char* fit_dir, const char* truth_dir,
                   const char* out_json);

/* Joint-distribution test of the Gibbs sampler; writes the KS
 * statistics of the probe statistics as JSON. */
int rslds_geweke_test(int n_samples, unsigned long long seed,
                      const char* out_json);

#ifdef __cplusplus
}
#endif

#endif /* RSLDS_H */
