/*
 * caa — concept-space adversarial attack toolkit, public C API.
 *
 * The library trains split classifiers, an image autoencoder and an
 * activation decoder, generates adversarial samples by constrained linear
 * interpolation in four embedding spaces, and evaluates attack success and
 * transferability.
 *
 * All functions return caa_status; CAA_OK is 0. On failure,
 * caa_last_error() returns a human-readable message for the calling thread.
 * Strings returned through char** are heap-allocated; release them with
 * caa_string_free().
 */

#ifndef CAA_H
#define CAA_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#ifndef CAA_API
#define CAA_API __attribute__((visibility("default")))
#endif

typedef enum caa_status {
    CAA_OK = 0,
    CAA_ERR_INVALID_ARGUMENT = 1,
    CAA_ERR_FORMAT = 2,      /* malformed file or header */
    CAA_ERR_CORRUPTION = 3,  /* header/payload disagreement */
    CAA_ERR_CONFIG = 4,
    CAA_ERR_DEGENERATE_DATA = 5,
    CAA_ERR_PROTOCOL = 6,
    CAA_ERR_TRAINING = 7,
    CAA_ERR_INPUT = 8,
    CAA_ERR_NUMERICAL = 9,
    CAA_ERR_TYPE = 10,       /* latent-space tag mismatch */
    CAA_ERR_DEPENDENCY = 11, /* missing prerequisite artifact */
    CAA_ERR_INTEGRITY = 12,  /* hash mismatch between linked artifacts */
    CAA_ERR_IO = 13,
    CAA_ERR_INTERNAL = 14
} caa_status;

/* Opaque experiment configuration. */
typedef struct caa_config caa_config_t;
/* Opaque handle to a checkpoint on disk (metadata access). */
typedef struct caa_model caa_model_t;

CAA_API const char* caa_version(void);

/* Thread-local message describing the most recent failure. */
CAA_API const char* caa_last_error(void);

CAA_API void caa_string_free(char* s);

/* Worker threads for training/attack compute; n <= 0 picks the hardware
 * default. */
CAA_API caa_status caa_set_threads(int n);

/* ------------------------------------------------------------------ config */

/* Built-in defaults for a dataset ("mnist" | "fashion_mnist") and profile
 * ("desk" | "paper"). */
CAA_API caa_status caa_config_create(const char* dataset, const char* profile,
                                     caa_config_t** out);
CAA_API caa_status caa_config_from_json(const char* json_text, caa_config_t** out);
/* Overlays a partial JSON document onto an existing config. */
CAA_API caa_status caa_config_merge_json(caa_config_t* config, const char* json_text);
CAA_API caa_status caa_config_to_json(const caa_config_t* config, char** out_json);
CAA_API caa_status caa_config_set_seed(caa_config_t* config, uint64_t seed);
CAA_API void caa_config_destroy(caa_config_t* config);

/* ---------------------------------------------------------------- commands */

/* target: "autoencoder", "classifier:vgg11", "classifier:vgg13",
 * "classifier:resnet10", "cladec". Skips existing checkpoints unless the
 * config sets force. Returns the checkpoint path. */
CAA_API caa_status caa_train(const caa_config_t* config, const char* target,
                             char** out_checkpoint_path);

/* Runs the configured attack protocol; returns the directory holding the
 * JSON-lines records, adversarial-image blobs and the run manifest. */
CAA_API caa_status caa_attack(const caa_config_t* config, char** out_records_dir);

/* Scores records with the evaluation models and writes the results table
 * (CSV + JSON) plus the pairwise significance matrix. records_dir may be NULL
 * to mean the attack output directory for this config. Returns a small JSON
 * object naming the written files. */
CAA_API caa_status caa_evaluate(const caa_config_t* config, const char* records_dir,
                                char** out_paths_json);

/* Renders the qualitative grid PNG (originals, targets, one adversarial
 * column per variant with Yes/No annotations). records_dir/out_path may be
 * NULL for defaults. */
CAA_API caa_status caa_render_grid(const caa_config_t* config, const char* records_dir,
                                   int n_examples, const char* out_path,
                                   char** out_png_path);

/* ------------------------------------------------------------- checkpoints */

CAA_API caa_status caa_model_open(const char* checkpoint_path, caa_model_t** out);
CAA_API caa_status caa_model_metadata_json(const caa_model_t* model, char** out_json);
CAA_API void caa_model_destroy(caa_model_t* model);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* CAA_H */
