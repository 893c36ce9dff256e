#include "pairkg/pairkg.h"

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "pairkg/metrics.hpp"
#include "pairkg/normalize.hpp"
#include "pairkg/pipeline.hpp"

namespace {

thread_local std::string g_last_error;

void set_error(const std::string& message) { g_last_error = message; }

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out) std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

pairkg_status to_status(int code) {
  switch (code) {
    case 0: return PAIRKG_OK;
    case 1: return PAIRKG_ERR_USAGE;
    case 2: return PAIRKG_ERR_PARTIAL;
    default: return PAIRKG_ERR_IO;
  }
}

}  // namespace

struct pairkg_config {
  pairkg::PipelineConfig config;
};

struct pairkg_annotation_session {
  std::string annotations_path;
  std::string annotator;
  // Blinded presentation order (already shuffled, already filtered).
  std::vector<pairkg::AnnotationRecord> pending;
  std::size_t cursor = 0;          // next triple to present
  bool current_valid = false;      // a triple was presented and awaits a label
  std::vector<pairkg::AnnotationRecord> existing;
  std::vector<std::pair<std::size_t, pairkg::Label>> new_labels;  // index into pending
};

extern "C" {

const char* pairkg_version(void) { return "0.1.0"; }

const char* pairkg_last_error(void) { return g_last_error.c_str(); }

void pairkg_string_free(char* s) { std::free(s); }

pairkg_config* pairkg_config_new(void) { return new pairkg_config(); }

void pairkg_config_free(pairkg_config* config) { delete config; }

pairkg_status pairkg_config_load(pairkg_config* config, const char* path) {
  if (!config || !path) {
    set_error("null argument");
    return PAIRKG_ERR_USAGE;
  }
  try {
    config->config = pairkg::PipelineConfig::from_file(path);
    return PAIRKG_OK;
  } catch (const pairkg::ConfigError& e) {
    set_error(e.what());
    return PAIRKG_ERR_USAGE;
  } catch (const std::exception& e) {
    set_error(e.what());
    return PAIRKG_ERR_IO;
  }
}

pairkg_status pairkg_config_set(pairkg_config* config, const char* key,
                                const char* value) {
  if (!config || !key || !value) {
    set_error("null argument");
    return PAIRKG_ERR_USAGE;
  }
  auto& c = config->config;
  const std::string k = key, v = value;
  try {
    if (k == "kg_dir") c.kg_dir = v;
    else if (k == "descriptions") c.descriptions_path = v;
    else if (k == "filter_template") c.filter_template_path = v;
    else if (k == "expand_template") c.expand_template_path = v;
    else if (k == "backend") c.backend = v;
    else if (k == "remote_url") c.remote_url = v;
    else if (k == "scorer") c.scorer = v;
    else if (k == "scorer_fallback") c.scorer_fallback = v;
    else if (k == "embedder") c.embedder = v;
    else if (k == "k") c.k = std::stoi(v);
    else if (k == "reps") c.reps = std::stoi(v);
    else if (k == "parallelism") c.parallelism = std::stoi(v);
    else if (k == "seed") c.seed = std::stoull(v);
    else if (k == "out_dir") c.out_dir = v;
    else if (k == "cache_dir") c.cache_dir = v;
    else if (k == "model_id") c.model_id = v;
    else if (k == "temperature") c.temperature = std::stod(v);
    else {
      set_error("unknown config key '" + k + "'");
      return PAIRKG_ERR_USAGE;
    }
    return PAIRKG_OK;
  } catch (const std::exception&) {
    set_error("bad value '" + v + "' for config key '" + k + "'");
    return PAIRKG_ERR_USAGE;
  }
}

pairkg_status pairkg_mine(pairkg_config* config, const char* const* seeds,
                          size_t n_seeds, char** summary_json) {
  if (!config || (n_seeds > 0 && !seeds)) {
    set_error("null argument");
    return PAIRKG_ERR_USAGE;
  }
  pairkg::CommandContext ctx;
  ctx.config = config->config;
  for (size_t i = 0; i < n_seeds; ++i) ctx.seeds.emplace_back(seeds[i]);
  std::string error, summary;
  int code = pairkg::cmd_mine(ctx, &error, &summary);
  if (!error.empty()) set_error(error);
  if (summary_json) *summary_json = dup_string(summary);
  return to_status(code);
}

pairkg_status pairkg_eval(pairkg_config* config, const char* result_path,
                          const char* annotations_path, char** report_json) {
  if (!config || !result_path) {
    set_error("null argument");
    return PAIRKG_ERR_USAGE;
  }
  std::string error, report;
  int code = pairkg::cmd_eval(config->config, result_path,
                              annotations_path ? annotations_path : "", &error, &report);
  if (!error.empty()) set_error(error);
  if (report_json) *report_json = dup_string(report);
  return to_status(code);
}

pairkg_status pairkg_export_sft(pairkg_config* config, const char* result_path,
                                const char* annotations_path, const char* out_path,
                                double split, char** summary_json) {
  if (!config || !result_path || !out_path) {
    set_error("null argument");
    return PAIRKG_ERR_USAGE;
  }
  std::string error, summary;
  int code = pairkg::cmd_export_sft(config->config, result_path,
                                    annotations_path ? annotations_path : "", out_path,
                                    split, &error, &summary);
  if (!error.empty()) set_error(error);
  if (summary_json) *summary_json = dup_string(summary);
  return to_status(code);
}

pairkg_status pairkg_simulate(const char* sim_config_path, const char* out_path,
                              char** report_json) {
  if (!sim_config_path) {
    set_error("null argument");
    return PAIRKG_ERR_USAGE;
  }
  std::string error, report;
  int code = pairkg::cmd_simulate(sim_config_path, out_path ? out_path : "", &error,
                                  &report);
  if (!error.empty()) set_error(error);
  if (report_json) *report_json = dup_string(report);
  return to_status(code);
}

pairkg_annotation_session* pairkg_annotate_open(const char* result_path,
                                                const char* annotations_path,
                                                const char* annotator,
                                                unsigned long long shuffle_seed) {
  if (!result_path || !annotations_path || !annotator || !*annotator) {
    set_error("null argument");
    return nullptr;
  }
  try {
    auto session = std::make_unique<pairkg_annotation_session>();
    session->annotations_path = annotations_path;
    session->annotator = annotator;

    if (std::filesystem::exists(annotations_path)) {
      session->existing = pairkg::load_annotations(annotations_path);
    }
    auto labeled_by_me = [&](const std::string& s, const std::string& r,
                             const std::string& t) {
      for (const auto& rec : session->existing) {
        if (pairkg::normalize_name(rec.source) != pairkg::normalize_name(s) ||
            rec.relation != r ||
            pairkg::normalize_name(rec.target) != pairkg::normalize_name(t)) {
          continue;
        }
        for (const auto& [who, label] : rec.labels) {
          if (who == session->annotator) return true;
        }
      }
      return false;
    };

    pairkg::MiningResult result = pairkg::load_mining_result(result_path);
    std::vector<pairkg::AnnotationRecord> records;
    for (const auto& t : result.all_triples()) {
      pairkg::AnnotationRecord rec;
      rec.source = t.source;
      rec.relation = t.relation;
      rec.target = t.target;
      records.push_back(std::move(rec));
    }
    records = pairkg::shuffle_for_annotation(records, shuffle_seed);
    for (auto& rec : records) {
      if (!labeled_by_me(rec.source, rec.relation, rec.target)) {
        session->pending.push_back(std::move(rec));
      }
    }
    return session.release();
  } catch (const std::exception& e) {
    set_error(e.what());
    return nullptr;
  }
}

int pairkg_annotate_next(pairkg_annotation_session* session, char* buffer,
                         size_t capacity) {
  if (!session || !buffer || capacity == 0) return 0;
  if (session->cursor >= session->pending.size()) {
    session->current_valid = false;
    return 0;
  }
  const auto& rec = session->pending[session->cursor];
  std::string line = rec.source + "\t" + rec.relation + "\t" + rec.target;
  std::strncpy(buffer, line.c_str(), capacity - 1);
  buffer[capacity - 1] = '\0';
  session->current_valid = true;
  ++session->cursor;
  return 1;
}

pairkg_status pairkg_annotate_label(pairkg_annotation_session* session, int accept) {
  if (!session || !session->current_valid || session->cursor == 0) {
    set_error("no triple pending a label");
    return PAIRKG_ERR_USAGE;
  }
  session->new_labels.emplace_back(
      session->cursor - 1, accept ? pairkg::Label::Accept : pairkg::Label::Reject);
  session->current_valid = false;
  return PAIRKG_OK;
}

pairkg_status pairkg_annotate_close(pairkg_annotation_session* session) {
  if (!session) {
    set_error("null session");
    return PAIRKG_ERR_USAGE;
  }
  std::unique_ptr<pairkg_annotation_session> owned(session);
  try {
    auto key = [](const std::string& s, const std::string& r, const std::string& t) {
      return pairkg::normalize_name(s) + '\x1f' + r + '\x1f' + pairkg::normalize_name(t);
    };
    std::unordered_map<std::string, std::size_t> index;
    std::vector<pairkg::AnnotationRecord> merged = owned->existing;
    for (std::size_t i = 0; i < merged.size(); ++i) {
      index[key(merged[i].source, merged[i].relation, merged[i].target)] = i;
    }
    for (const auto& [pending_idx, label] : owned->new_labels) {
      const auto& rec = owned->pending[pending_idx];
      std::string k = key(rec.source, rec.relation, rec.target);
      auto it = index.find(k);
      if (it == index.end()) {
        pairkg::AnnotationRecord fresh;
        fresh.source = rec.source;
        fresh.relation = rec.relation;
        fresh.target = rec.target;
        merged.push_back(std::move(fresh));
        it = index.emplace(k, merged.size() - 1).first;
      }
      merged[it->second].labels.emplace_back(owned->annotator, label);
    }
    pairkg::save_annotations(merged, owned->annotations_path);
    return PAIRKG_OK;
  } catch (const std::exception& e) {
    set_error(e.what());
    return PAIRKG_ERR_IO;
  }
}

}  // extern "C"
