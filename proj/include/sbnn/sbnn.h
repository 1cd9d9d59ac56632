/* C interface to the sparse Bayesian network library.
 *
 * Every fallible call returns an sbnn_status; on failure the thread-local
 * message from sbnn_last_error() describes the cause. Objects are opaque
 * handles released with the matching *_free function (NULL is accepted).
 * Non-fatal warnings raised by the most recent call on this thread are
 * available through sbnn_warning_count() / sbnn_warning().
 */
#ifndef SBNN_H
#define SBNN_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define SBNN_API __declspec(dllexport)
#else
#define SBNN_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum {
  SBNN_OK = 0,
  SBNN_ERR_INVALID_ARGUMENT = 1,
  SBNN_ERR_CONFIG = 2,
  SBNN_ERR_IO = 3,
  SBNN_ERR_NUMERICAL = 4,
  SBNN_ERR_INTERNAL = 5
} sbnn_status;

typedef enum { SBNN_RELU = 0, SBNN_TANH = 1, SBNN_IDENTITY = 2 } sbnn_activation;
typedef enum { SBNN_SGD = 0, SBNN_ADAM = 1 } sbnn_optimizer;
typedef enum { SBNN_KL_UNIFORM = 0, SBNN_KL_BLUNDELL = 1 } sbnn_kl_schedule;
typedef enum { SBNN_RULE_P = 0, SBNN_RULE_M2 = 1, SBNN_RULE_SNR = 2 } sbnn_rule;
typedef enum { SBNN_LINK_LINEAR = 0, SBNN_LINK_NONLINEAR = 1 } sbnn_link;

typedef struct sbnn_dataset sbnn_dataset;
typedef struct sbnn_scaler sbnn_scaler;
typedef struct sbnn_checkpoint sbnn_checkpoint;
typedef struct sbnn_train_log sbnn_train_log;

typedef struct {
  double pi;
  double log_tau1;
  double log_tau0;
} sbnn_prior;

/* Network shape and likelihood for a single-output regression model. */
typedef struct {
  const size_t* hidden; /* hidden layer widths */
  size_t hidden_count;
  sbnn_activation activation;
  sbnn_prior prior;
  double noise_variance;
} sbnn_model_spec;

typedef struct {
  size_t epochs;
  size_t batch_size;
  double learning_rate;
  sbnn_optimizer optimizer;
  double adam_beta1, adam_beta2, adam_eps;
  size_t mc_samples;
  sbnn_kl_schedule kl_schedule;
  uint64_t seed;
  double init_m_std;
  double init_rho;
} sbnn_train_options;

typedef struct {
  size_t n;
  size_t features;
  double alpha;
  double pi_active;
  sbnn_link link;
  uint64_t seed;
} sbnn_synthetic_spec;

typedef struct {
  size_t epoch;
  double objective;
  double train_loss;
  double wall_ms;
} sbnn_epoch_record;

typedef struct {
  double droprate;
  double sparsity;
  double test_mse;
  double test_rmse;
} sbnn_prune_row;

typedef struct {
  double keep_proportion;   /* requested share of features kept */
  double active_proportion; /* share actually kept */
  double threshold;         /* phi cut-off */
  double accuracy;          /* -1 without ground truth */
  double refit_test_mse;    /* -1 without a test set */
  double full_test_mse;     /* -1 without a test set */
} sbnn_selection;

typedef struct {
  double m;
  double sigma;
  sbnn_prior prior;
} sbnn_grad_setting;

SBNN_API const char* sbnn_version(void);
SBNN_API const char* sbnn_last_error(void);
SBNN_API size_t sbnn_warning_count(void);
SBNN_API const char* sbnn_warning(size_t index);

SBNN_API void sbnn_train_options_default(sbnn_train_options* out);
SBNN_API void sbnn_synthetic_default(sbnn_synthetic_spec* out);
/* {pi, log tau1, log tau0} = {0.5, 1, -6}, noise variance 1, relu. Hidden widths are left empty. */
SBNN_API void sbnn_model_spec_default(sbnn_model_spec* out);

/* Datasets */
SBNN_API sbnn_status sbnn_dataset_load_csv(const char* path, const char* target_column,
                                           size_t expected_rows, size_t expected_features,
                                           sbnn_dataset** out);
SBNN_API sbnn_status sbnn_dataset_two_feature(double alpha_mix, size_t n, uint64_t seed,
                                              sbnn_dataset** out);
SBNN_API sbnn_status sbnn_dataset_synthetic(const sbnn_synthetic_spec* spec, sbnn_dataset** out);
SBNN_API sbnn_status sbnn_dataset_save_csv(const sbnn_dataset* d, const char* path);
/* Ground truth as CSV: feature_index,z,beta. */
SBNN_API sbnn_status sbnn_dataset_save_truth(const sbnn_dataset* d, const char* path);
SBNN_API sbnn_status sbnn_dataset_load_truth(sbnn_dataset* d, const char* path);
SBNN_API size_t sbnn_dataset_rows(const sbnn_dataset* d);
SBNN_API size_t sbnn_dataset_features(const sbnn_dataset* d);
SBNN_API sbnn_status sbnn_dataset_split(const sbnn_dataset* d, double train_fraction,
                                        uint64_t seed, sbnn_dataset** train,
                                        sbnn_dataset** test);
SBNN_API void sbnn_dataset_free(sbnn_dataset* d);

/* Standardization fitted on training rows */
SBNN_API sbnn_status sbnn_scaler_fit(const sbnn_dataset* train, int standardize_y,
                                     sbnn_scaler** out);
SBNN_API sbnn_status sbnn_scaler_apply(const sbnn_scaler* s, const sbnn_dataset* in,
                                       sbnn_dataset** out);
SBNN_API sbnn_status sbnn_scaler_save(const sbnn_scaler* s, const char* path);
SBNN_API sbnn_status sbnn_scaler_load(const char* path, sbnn_scaler** out);
SBNN_API void sbnn_scaler_free(sbnn_scaler* s);

/* Training and checkpoints */
SBNN_API sbnn_status sbnn_train(const sbnn_model_spec* spec, const sbnn_dataset* train,
                                const sbnn_train_options* options, sbnn_checkpoint** out,
                                sbnn_train_log** log);
SBNN_API size_t sbnn_train_log_epochs(const sbnn_train_log* log);
SBNN_API sbnn_status sbnn_train_log_get(const sbnn_train_log* log, size_t index,
                                        sbnn_epoch_record* out);
SBNN_API void sbnn_train_log_free(sbnn_train_log* log);

SBNN_API sbnn_status sbnn_checkpoint_save(const sbnn_checkpoint* c, const char* path);
SBNN_API sbnn_status sbnn_checkpoint_load(const char* path, sbnn_checkpoint** out);
SBNN_API size_t sbnn_checkpoint_param_count(const sbnn_checkpoint* c);
SBNN_API size_t sbnn_checkpoint_inputs(const sbnn_checkpoint* c);
/* Copies m, rho and p (each of param_count entries); any pointer may be NULL. */
SBNN_API sbnn_status sbnn_checkpoint_params(const sbnn_checkpoint* c, double* m, double* rho,
                                            double* p);
SBNN_API void sbnn_checkpoint_free(sbnn_checkpoint* c);

/* Mean-network predictions, one per row of d; `out` holds sbnn_dataset_rows(d) values. */
SBNN_API sbnn_status sbnn_predict(const sbnn_checkpoint* c, const sbnn_dataset* d, double* out);

/* Compression */
SBNN_API sbnn_status sbnn_prune(const sbnn_checkpoint* c, sbnn_rule rule, double droprate,
                                sbnn_checkpoint** out, double* sparsity);
SBNN_API sbnn_status sbnn_mask_save(const sbnn_checkpoint* pruned, sbnn_rule rule,
                                    double droprate, const char* path);
/* Rows sorted by droprate. With a scaler, `test` is raw and errors are in original units. */
SBNN_API sbnn_status sbnn_prune_curve(const sbnn_checkpoint* c, const sbnn_dataset* test,
                                      const sbnn_scaler* scaler, sbnn_rule rule,
                                      const double* droprates, size_t count,
                                      sbnn_prune_row* rows);
SBNN_API sbnn_status sbnn_write_prune_csv(const sbnn_prune_row* rows, size_t count,
                                          const char* path);
/* psi, phi (length = inputs) and selected may be NULL. */
SBNN_API sbnn_status sbnn_importance(const sbnn_checkpoint* c, double keep_quantile,
                                     double* psi, double* phi, uint8_t* selected,
                                     double* threshold);
SBNN_API sbnn_status sbnn_importance_csv(const sbnn_checkpoint* c, double keep_quantile,
                                         const char* path);
/* Keep the top keep_proportion of features by phi, refit on masked inputs.
 * `train` is standardized. `test` may be NULL; with a scaler it is raw and the
 * test errors are in original units. The refit state is returned through
 * `refit` when non-NULL. */
SBNN_API sbnn_status sbnn_select(const sbnn_checkpoint* c, const sbnn_dataset* train,
                                 const sbnn_dataset* test, const sbnn_scaler* scaler,
                                 double keep_proportion,
                                 const sbnn_train_options* options, sbnn_selection* out,
                                 sbnn_checkpoint** refit);
/* k-fold CV over candidate keep-proportions; errors (length count) may be NULL. */
SBNN_API sbnn_status sbnn_cv_threshold(const sbnn_model_spec* spec, const sbnn_dataset* train,
                                       const sbnn_train_options* options, size_t folds,
                                       const double* proportions, size_t count, uint64_t seed,
                                       double* best, double* errors);

/* Benchmark over a manifest (name,path,target,rows,features); writes the summary CSV. */
SBNN_API sbnn_status sbnn_benchmark(const char* manifest_path, const sbnn_model_spec* spec,
                                    const sbnn_train_options* options, double train_fraction,
                                    size_t repeats, const double* droprates, size_t count,
                                    sbnn_rule rule, const char* out_csv);

/* Closed-form vs single-draw penalty gradients for each setting, as CSV. */
SBNN_API sbnn_status sbnn_gradcheck(const sbnn_grad_setting* settings, size_t count,
                                    size_t draws, uint64_t seed, const char* out_csv);

#ifdef __cplusplus
}
#endif

#endif /* SBNN_H */
