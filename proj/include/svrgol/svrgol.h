/* C interface to the svrgol optimization toolkit.
 *
 * Usage: build a config handle with key=value pairs (the same keys the CLI
 * exposes as flags), then run the experiment. All functions return one of the
 * SVRGOL_* codes below; svrgol_last_error() describes the most recent failure
 * on the calling thread.
 */
#ifndef SVRGOL_SVRGOL_H
#define SVRGOL_SVRGOL_H

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define SVRGOL_API __declspec(dllexport)
#else
#define SVRGOL_API __attribute__((visibility("default")))
#endif

#define SVRGOL_OK 0
#define SVRGOL_ERR_INTERNAL 1
#define SVRGOL_ERR_USAGE 2
#define SVRGOL_ERR_IO 3
#define SVRGOL_ERR_DIVERGED 4

typedef struct svrgol_config svrgol_config;

SVRGOL_API svrgol_config* svrgol_config_new(void);
SVRGOL_API void svrgol_config_free(svrgol_config* cfg);

/* Keys: algo, learner, schedule, t1, c, kmax, nhat, eta, diameter, epsilon,
 * workers, hash_bits, seed, compensate, sparse_combine, data, test,
 * synthetic, out, budget, serial_budget, eval_every, batch, block_size,
 * timing, weights_out. Unknown keys fail with SVRGOL_ERR_USAGE. */
SVRGOL_API int svrgol_config_set(svrgol_config* cfg, const char* key,
                                 const char* value);

/* Plain-text key=value file, '#' comments. */
SVRGOL_API int svrgol_config_load_file(svrgol_config* cfg, const char* path);

/* Runs the configured experiment and writes the CSV. Returns SVRGOL_OK,
 * SVRGOL_ERR_USAGE for bad configs, SVRGOL_ERR_IO for data problems, or
 * SVRGOL_ERR_DIVERGED when the optimizer blows up (partial CSV is flushed). */
SVRGOL_API int svrgol_run_experiment(const svrgol_config* cfg);

/* Message for the last failure on this thread; empty string if none. */
SVRGOL_API const char* svrgol_last_error(void);

SVRGOL_API const char* svrgol_strerror(int code);
SVRGOL_API const char* svrgol_version(void);

#ifdef __cplusplus
}
#endif

#endif /* SVRGOL_SVRGOL_H */
