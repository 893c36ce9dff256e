#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "pairkg/aggregate.hpp"
#include "pairkg/distill.hpp"
#include "pairkg/kg.hpp"
#include "pairkg/llm.hpp"
#include "pairkg/metrics.hpp"
#include "pairkg/prior.hpp"
#include "pairkg/sim.hpp"

namespace pairkg {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct PipelineConfig {
  std::string kg_dir;
  std::string descriptions_path;
  std::string filter_template_path;  // empty = built-in template
  std::string expand_template_path;
  std::string backend;  // "remote[:<url>]" | "scripted:<file>" | "oracle:<cfg>"
  std::string remote_url;
  std::string scorer = "lexical";   // "lexical" | "remote:<url>"
  std::string scorer_fallback;      // "" | "lexical": used when the remote scorer fails
  std::string embedder = "hashed";
  int k = 8;
  int reps = 3;
  int parallelism = 8;
  std::uint64_t seed = 0;
  std::string out_dir = "out";
  std::string cache_dir;
  std::string model_id = "gpt-3.5-turbo";
  double temperature = 0.7;

  static PipelineConfig from_file(const std::string& path);
  void validate() const;
};

// Built-in prompt templates, used when no template path is configured.
const std::string& default_filter_template();
const std::string& default_expand_template();

struct MineParams {
  PipelineVariant variant = PipelineVariant::Full;
  std::string filter_template;
  std::string expand_template;
  std::string model_id = "gpt-3.5-turbo";
  double temperature = 0.7;
  int k = 8;
  int reps = 3;
  int parallelism = 1;
};

struct MineOutcome {
  MiningResult result;
  std::vector<TraceRecord> traces;
  std::vector<std::string> warnings;
  std::vector<std::string> processed_seeds;
  std::vector<std::string> skipped_seeds;
};

// The mining composition: prior knowledge -> relation filtering -> progressive
// expansion -> aggregation. Seeds that cannot be typed or have no candidate
// relations are skipped and reported.
MineOutcome mine(const KnowledgeGraph& graph, const DocumentSource& docs,
                 const std::vector<std::string>& seeds, const LlmGateway& gateway,
                 const RelatednessScorer& scorer, const MineParams& params);

// File-level commands shared by the C API and tests. Each returns an exit
// status: 0 ok, 1 config/usage error, 2 partial failure, 3 fatal I/O.
struct CommandContext {
  PipelineConfig config;
  std::vector<std::string> seeds;  // cmd_mine seed entity names
};

int cmd_mine(const CommandContext& ctx, std::string* error, std::string* summary_json);
int cmd_eval(const PipelineConfig& config, const std::string& result_path,
             const std::string& annotations_path, std::string* error,
             std::string* report_json);
int cmd_export_sft(const PipelineConfig& config, const std::string& result_path,
                   const std::string& annotations_path, const std::string& out_path,
                   double split, std::string* error, std::string* summary_json);
int cmd_simulate(const std::string& sim_config_path, const std::string& out_path,
                 std::string* error, std::string* report_json);

// Loads a mined-triples file back into a MiningResult; when a summary file is
// present beside it, processed seeds with zero triples are restored too.
MiningResult load_mining_result(const std::string& result_path);

// Backend factory for the configured backend string. For "oracle:<cfg>" the
// synthetic visible graph and descriptions replace the configured KG.
struct BackendBundle {
  std::shared_ptr<LlmBackend> backend;
  std::shared_ptr<SyntheticKG> synthetic;  // set for oracle backends
};
BackendBundle make_backend(const PipelineConfig& config);

std::unique_ptr<RelatednessScorer> make_scorer(const std::string& spec,
                                               const std::string& fallback = "");

}  // namespace pairkg
