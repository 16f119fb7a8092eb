#ifndef MIXUP_MIXUP_H
#define MIXUP_MIXUP_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define MX_API __declspec(dllexport)
#else
#define MX_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum mx_status {
  MX_OK = 0,
  MX_ERR_DIMENSION = 1,
  MX_ERR_NUMERIC = 2,
  MX_ERR_VALIDATION = 3,
  MX_ERR_CONTRACT = 4,
  MX_ERR_STATE = 5,
  MX_ERR_PARAMETER = 6,
  MX_ERR_VOCABULARY = 7,
  MX_ERR_IO = 8,
  MX_ERR_INTERNAL = 9,
  MX_ERR_NULL = 10
} mx_status;

typedef struct mx_config mx_config;
typedef struct mx_run mx_run;
typedef struct mx_summary mx_summary;
typedef struct mx_model mx_model;

/* Message of the last failing call on this thread; never NULL. */
MX_API const char* mx_last_error(void);
MX_API const char* mx_status_name(mx_status status);
MX_API const char* mx_version(void);

MX_API mx_status mx_config_create(mx_config** out);
MX_API void mx_config_destroy(mx_config* config);
/* Keys follow the config-file names (learning_rate, mixup, layers, ...). */
MX_API mx_status mx_config_set(mx_config* config, const char* key, const char* value);
MX_API mx_status mx_config_load(mx_config* config, const char* path);
/* Writes the canonical key=value rendering. The string lives until the next
   call on this config. */
MX_API mx_status mx_config_dump(const mx_config* config, const char** out);

MX_API mx_status mx_train(const mx_config* config, mx_run** out);
MX_API void mx_run_destroy(mx_run* run);
/* Curves, reliability report, metadata, config and checkpoint. */
MX_API mx_status mx_run_write(const mx_run* run, const char* dir);
MX_API mx_status mx_run_epochs(const mx_run* run, size_t* out);
MX_API mx_status mx_run_best_epoch(const mx_run* run, size_t* out);
/* name: train_loss, test_loss, test_acc, test_ece, test_nll, test_mcc. */
MX_API mx_status mx_run_metric(const mx_run* run, size_t epoch, const char* name,
                               double* out);

/* seeds: n_seeds values. variants: n_variants mode names, or NULL for
   none,cls,input,manifold. out_dir may be NULL. */
MX_API mx_status mx_experiment(const mx_config* config, const uint64_t* seeds,
                               size_t n_seeds, const char* const* variants,
                               size_t n_variants, const char* out_dir,
                               mx_summary** out);
/* Input MixUp with every padding strategy and token. */
MX_API mx_status mx_pad_study(const mx_config* config, const uint64_t* seeds,
                              size_t n_seeds, const char* out_dir, mx_summary** out);
MX_API void mx_summary_destroy(mx_summary* summary);
MX_API mx_status mx_summary_write(const mx_summary* summary, const char* path,
                                  int paper_units);
MX_API mx_status mx_summary_text(const mx_summary* summary, int paper_units,
                                 const char** out);
/* metric: acc, loss, ece, mcc. se is NaN when fewer than two runs succeeded. */
MX_API mx_status mx_summary_stat(const mx_summary* summary, const char* variant,
                                 const char* metric, double* mean, double* se);

MX_API mx_status mx_model_load(const char* checkpoint, mx_model** out);
MX_API void mx_model_destroy(mx_model* model);
/* Evaluates a JSONL file with the given vocabulary and label map and writes
   a reliability report when report_path is not NULL. */
MX_API mx_status mx_evaluate_file(const mx_model* model, const char* vocab_path,
                                  const char* labels_path, const char* data_path,
                                  const char* report_path, double* accuracy);

/* kind: content or syntax. Writes train/dev/test.jsonl and labels.json. */
MX_API mx_status mx_generate_task(const char* kind, size_t size, uint64_t seed,
                                  const char* out_dir);
/* Bag-of-words probe accuracy on the dev split of a generated task. */
MX_API mx_status mx_probe_task(const char* kind, size_t size, uint64_t seed,
                               double* accuracy);

MX_API mx_status mx_gradcheck(uint64_t seed, size_t instances, double* max_error,
                              int* passed);

#ifdef __cplusplus
}
#endif

#endif
