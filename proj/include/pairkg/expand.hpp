#pragma once

#include <string>
#include <vector>

#include "pairkg/kg.hpp"
#include "pairkg/llm.hpp"
#include "pairkg/prior.hpp"
#include "pairkg/relation_filter.hpp"

namespace pairkg {

// One LLM call's parsed target set, tagged with its prompt-variant subset and
// repetition index.
struct ExpansionRound {
  KnowledgeFlags subset;
  int repetition = 0;
  std::vector<std::string> targets;  // deduped by normalized form, source removed
  std::string prompt;
  std::string raw_response;
  bool failed = false;
};

struct ExpansionResult {
  std::vector<ExpansionRound> rounds;  // |variants| x reps, canonical order
  std::vector<std::string> warnings;
};

// All non-empty subsets of the available knowledge kinds, coarse to fine:
// singletons S, D, I; then pairs SD, SI, DI; then SDI. Subsets using an
// unavailable kind are omitted.
std::vector<KnowledgeFlags> enumerate_prompt_variants(const KnowledgeFlags& available);

// All: the full progressive enumeration. RichestOnly: only the subset with
// every available kind (the single richest prompt).
enum class VariantPolicy { All, RichestOnly };

// Expands (source, relation) with every variant x repetition. A failed call
// keeps its round (empty targets) so round accounting stays exact. Rounds may
// run on up to `parallelism` threads; output order is canonical regardless.
ExpansionResult expand(const LlmGateway& gateway, const KnowledgeGraph& graph,
                       const std::string& source, const FilteredRelation& relation,
                       const PriorKnowledge& prior, int reps,
                       const std::string& template_text, const std::string& model_id,
                       double temperature, int parallelism = 1,
                       VariantPolicy policy = VariantPolicy::All);

}  // namespace pairkg
