#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pairkg/kg.hpp"
#include "pairkg/llm.hpp"
#include "pairkg/prior.hpp"

namespace pairkg {

struct FilteredRelation {
  std::string relation;                    // relation id, from the candidate set
  std::optional<std::string> hint_target;  // one example target, when given
};

struct FilterOutcome {
  std::vector<FilteredRelation> kept;
  std::vector<std::string> warnings;
  std::string prompt;        // rendered prompt, recorded for traces
  std::string raw_response;  // raw completion, recorded for traces
};

// All catalog relations applicable to the entity type, in catalog order.
// Identical for every entity of the same type.
std::vector<RelationDef> retrieve_candidate_relations(const KnowledgeGraph& graph,
                                                      const std::string& entity_type);

// Parses "relation -> hint" pairs from a completion: a JSON object first,
// then "relation: target" lines. Order of appearance is preserved.
std::vector<std::pair<std::string, std::string>> parse_relation_hints(
    const std::string& text);

// Asks the LLM which candidate relations deserve expansion. Relations outside
// the candidate set are dropped; survivors keep candidate order and appear
// once. Hints equal to the source (normalized) are discarded.
FilterOutcome filter_relations(const LlmGateway& gateway, const std::string& source,
                               const PriorKnowledge& prior,
                               const std::vector<RelationDef>& candidates,
                               const std::string& template_text,
                               const std::string& model_id, double temperature);

}  // namespace pairkg
