#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "pairkg/kg.hpp"
#include "pairkg/llm.hpp"
#include "pairkg/metrics.hpp"
#include "pairkg/prior.hpp"

namespace pairkg {

// Ground truth plus the subsample the pipeline is allowed to see.
struct SyntheticKG {
  KnowledgeGraph truth;
  KnowledgeGraph visible;
  double hidden_fraction = 0.0;
  DocumentSource descriptions;
  // Entity names bearing at least one truth triple as source, in generation order.
  std::vector<std::string> sources;
};

struct OracleNoise {
  double hallucination_rate_base = 0.0;
  double knowledge_discount = 0.0;  // multiplies per knowledge flag present
  double omission_rate = 0.0;
  std::uint64_t rng_seed = 0;

  // base * discount^(#flags): more injected knowledge, fewer fabrications.
  double effective_hallucination_rate(int flag_count) const;
};

struct SynthParams {
  int n_entities = 200;
  int n_types = 4;
  int n_relations = 12;
  std::uint64_t seed = 1;
  double hidden_fraction = 0.3;
  double description_fraction = 0.6;
  int min_targets_per_relation = 10;
  int max_targets_per_relation = 16;
  int min_relations_per_entity = 2;
  int max_relations_per_entity = 3;
};

SyntheticKG generate_ground_truth(const SynthParams& params);
SyntheticKG generate_ground_truth(int n_entities, int n_types, int n_relations,
                                  std::uint64_t seed);

// Seed entities a pipeline run can start from: sources whose type resolves in
// the visible graph.
std::vector<std::string> eligible_seeds(const SyntheticKG& synth);

// Answers from ground truth with seeded noise. Relation filtering returns the
// candidate relations that actually bear truth triples (first truth target as
// hint). Entity expansion emits the truth targets minus omissions, then
// fabricated "fake-<n>" names at the effective hallucination rate. Every call
// draws from a generator seeded by (rng_seed, descriptor), so repetitions
// differ but identical runs replay.
class OracleBackend : public LlmBackend {
 public:
  OracleBackend(const SyntheticKG& synth, OracleNoise noise);
  // Owning variant for callers that hand the synthetic KG over entirely.
  OracleBackend(std::shared_ptr<const SyntheticKG> synth, OracleNoise noise);
  std::string tag() const override { return "oracle"; }
  std::string complete(const LlmRequest& request) override;

 private:
  std::shared_ptr<const SyntheticKG> owned_;
  const SyntheticKG& synth_;
  OracleNoise noise_;
  // (normalized source, relation id) -> truth target names in insertion order
  std::map<std::pair<std::string, std::string>, std::vector<std::string>> truth_targets_;
};

std::uint64_t descriptor_seed(std::uint64_t base, const TaskDescriptor& descriptor);

// Truth-membership scoring: a mined triple counts accepted iff it exists in
// the truth graph; novelty is measured against the visible graph.
MetricsReport score_against_truth(const MiningResult& mined, const SyntheticKG& synth);

enum class PipelineVariant { Full, NoAgg, NoAggPr, NoAggPrRf };

const char* variant_name(PipelineVariant v);

struct SimConfig {
  SynthParams synth;
  OracleNoise noise{0.6, 0.5, 0.2, 0};
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  int k = 8;
  int reps = 3;
  int parallelism = 4;
  int max_seed_entities = 0;  // 0 = every eligible seed

  static SimConfig from_file(const std::string& path);
  static SimConfig from_json_text(const std::string& text);
};

struct AblationRun {
  std::uint64_t seed = 0;
  std::map<PipelineVariant, MetricsReport> reports;
};

// Runs the four pipeline variants on the same synthetic KG per seed.
std::vector<AblationRun> run_ablation(const SimConfig& config);

std::string ablation_to_json(const std::vector<AblationRun>& runs);

}  // namespace pairkg
