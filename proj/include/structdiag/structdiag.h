/*
 * structdiag C API.
 *
 * Opaque handles own their data; every handle returned through an out
 * parameter must be released with the matching *_free function. Strings
 * returned as `const char*` stay valid for the lifetime of the handle they
 * came from. Functions report failure through sd_status; the message for the
 * most recent failure on the calling thread is available from
 * sd_last_error().
 */
#ifndef STRUCTDIAG_STRUCTDIAG_H
#define STRUCTDIAG_STRUCTDIAG_H

#include <stddef.h>

#if defined(_WIN32)
#if defined(STRUCTDIAG_BUILDING)
#define SD_API __declspec(dllexport)
#else
#define SD_API __declspec(dllimport)
#endif
#else
#define SD_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Values 0-3 double as the CLI exit statuses. */
typedef enum sd_status {
  SD_OK = 0,
  SD_ERROR_PRECONDITION = 1,   /* analysis precondition failed */
  SD_ERROR_INPUT = 2,          /* unreadable, malformed or invalid input */
  SD_ERROR_ORACLE_MISMATCH = 3,
  SD_ERROR_INVALID_ARGUMENT = 4,
  SD_ERROR_INTERNAL = 5
} sd_status;

typedef struct sd_model sd_model;
typedef struct sd_id_set sd_id_set;
typedef struct sd_rg_list sd_rg_list;

SD_API const char* sd_version(void);
SD_API const char* sd_last_error(void);

/* Models */
SD_API sd_status sd_model_parse(const char* text, size_t length, sd_model** out);
SD_API sd_status sd_model_load(const char* path, sd_model** out);
SD_API void sd_model_free(sd_model* model);
SD_API const char* sd_model_name(const sd_model* model);
SD_API size_t sd_model_equation_count(const sd_model* model);
/* Equations in file order. */
SD_API const char* sd_model_equation_id(const sd_model* model, size_t index);
SD_API size_t sd_model_fault_count(const sd_model* model);
/* Faults in canonical (sorted) order. */
SD_API const char* sd_model_fault_id(const sd_model* model, size_t index);

/* Canonical id sets */
SD_API size_t sd_id_set_size(const sd_id_set* set);
SD_API const char* sd_id_set_member(const sd_id_set* set, size_t index);
SD_API void sd_id_set_free(sd_id_set* set);

/* Structural analyses. `op` names a built-in operator: "plus", "backsub"
 * or "lowindex". A NULL subset with count 0 means every equation. */
SD_API sd_status sd_overdetermined_part(const sd_model* model, const char* const* subset,
                                        size_t count, sd_id_set** out);
SD_API sd_status sd_mstar(const sd_model* model, const char* op, const char* const* subset,
                          size_t count, sd_id_set** out);
SD_API sd_status sd_detectable_faults(const sd_model* model, const char* op,
                                      sd_id_set** out);

/* *isolable receives 0 or 1; *witness (optional) receives the certifying
 * equation id or NULL, owned by the model. */
SD_API sd_status sd_isolable(const sd_model* model, const char* op,
                             const char* const* from_mode, size_t from_count,
                             const char* const* wrt_mode, size_t wrt_count, int* isolable,
                             const char** witness);

/* RG sets with irreducibility flags filled, canonical order. */
SD_API sd_status sd_find_rg(const sd_model* model, const char* op, sd_rg_list** out);
/* MTESs with their test supports. */
SD_API sd_status sd_find_mtes(const sd_model* model, sd_rg_list** out);

SD_API size_t sd_rg_list_size(const sd_rg_list* list);
SD_API size_t sd_rg_set_size(const sd_rg_list* list, size_t index);
SD_API const char* sd_rg_set_member(const sd_rg_list* list, size_t index, size_t member);
SD_API size_t sd_rg_signature_size(const sd_rg_list* list, size_t index);
SD_API const char* sd_rg_signature_member(const sd_rg_list* list, size_t index,
                                          size_t member);
SD_API int sd_rg_irreducible(const sd_rg_list* list, size_t index);
SD_API size_t sd_rg_redundancy(const sd_rg_list* list, size_t index);
SD_API void sd_rg_list_free(sd_rg_list* list);

/* Command execution, as driven by the structdiag tool. */
typedef struct sd_run_config {
  const char* command;        /* dm, mso, mtes, rg, irg, detect, isolate,
                                 residual, oracle-check */
  const char* model_path;
  const char* operator_name;  /* NULL: "plus" */
  const char* format;         /* NULL: "table"; also "json", "csv" */
  size_t oracle_bound;        /* 0: default (16) */
  const char* from_mode;      /* isolate: comma-separated faults, or NULL */
  const char* wrt_mode;
  const char* const* residual_sets; /* residual: comma-separated equation sets */
  size_t residual_set_count;
  const char* target_fault;   /* residual: fusion target, or NULL */
} sd_run_config;

/* Runs a command. On return *out_text and *err_text (each optional) hold
 * newly allocated strings to release with sd_string_free. The returned
 * status is the command's exit status. */
SD_API sd_status sd_run(const sd_run_config* config, char** out_text, char** err_text);
SD_API void sd_string_free(char* text);

#ifdef __cplusplus
}
#endif

#endif /* STRUCTDIAG_STRUCTDIAG_H */
