/* pairkg C API: knowledge-graph mining pipeline behind opaque handles.
 *
 * Every function that can fail returns a pairkg_status; the most recent
 * failure message is available from pairkg_last_error() (thread-local).
 * Strings returned through char** out-parameters are heap-allocated and must
 * be released with pairkg_string_free().
 */
#ifndef PAIRKG_H
#define PAIRKG_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum {
  PAIRKG_OK = 0,
  PAIRKG_ERR_USAGE = 1,   /* configuration or usage error */
  PAIRKG_ERR_PARTIAL = 2, /* finished, but some seeds/calls were skipped */
  PAIRKG_ERR_IO = 3       /* fatal I/O or internal failure */
} pairkg_status;

typedef struct pairkg_config pairkg_config;
typedef struct pairkg_annotation_session pairkg_annotation_session;

const char* pairkg_version(void);
const char* pairkg_last_error(void);
void pairkg_string_free(char* s);

pairkg_config* pairkg_config_new(void);
void pairkg_config_free(pairkg_config* config);
pairkg_status pairkg_config_load(pairkg_config* config, const char* path);

/* Keys: kg_dir, descriptions, filter_template, expand_template, backend,
 * remote_url, scorer, embedder, k, reps, parallelism, seed, out_dir,
 * cache_dir, model_id, temperature. Numeric values are passed as strings. */
pairkg_status pairkg_config_set(pairkg_config* config, const char* key,
                                const char* value);

/* Mines the given seed entities. Writes mined.jsonl, traces.jsonl and
 * summary.json into the configured out_dir. PARTIAL when seeds were skipped
 * or individual calls failed. */
pairkg_status pairkg_mine(pairkg_config* config, const char* const* seeds,
                          size_t n_seeds, char** summary_json);

/* Metrics over a mined result file; annotations_path may be NULL (accuracy is
 * then omitted from the report). */
pairkg_status pairkg_eval(pairkg_config* config, const char* result_path,
                          const char* annotations_path, char** report_json);

/* Builds the fine-tuning corpus from a result file, its trace file and the
 * annotation verdicts. split > 0 writes <out>.train.jsonl / <out>.val.jsonl. */
pairkg_status pairkg_export_sft(pairkg_config* config, const char* result_path,
                                const char* annotations_path, const char* out_path,
                                double split, char** summary_json);

/* Runs the four-variant ablation described by a simulator config file. */
pairkg_status pairkg_simulate(const char* sim_config_path, const char* out_path,
                              char** report_json);

/* Blinded annotation pass over a result file: triples come back in a seeded
 * shuffled order and records already labeled by this annotator are skipped. */
pairkg_annotation_session* pairkg_annotate_open(const char* result_path,
                                                const char* annotations_path,
                                                const char* annotator,
                                                unsigned long long shuffle_seed);

/* Writes "source\trelation\ttarget" into buffer. Returns 1 while triples
 * remain, 0 when the pass is complete. Calling it again without labeling
 * skips the previous triple. */
int pairkg_annotate_next(pairkg_annotation_session* session, char* buffer,
                         size_t capacity);

/* Labels the triple returned by the last pairkg_annotate_next call:
 * accept != 0 records Accept, 0 records Reject. */
pairkg_status pairkg_annotate_label(pairkg_annotation_session* session, int accept);

/* Flushes all labels to the annotations file and frees the session. */
pairkg_status pairkg_annotate_close(pairkg_annotation_session* session);

#ifdef __cplusplus
}
#endif

#endif /* PAIRKG_H */
