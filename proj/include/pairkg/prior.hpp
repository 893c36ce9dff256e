#pragma once

#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "pairkg/kg.hpp"

namespace pairkg {

// Caps keep prompts within small-context models.
inline constexpr std::size_t kNeighborCap = 30;
inline constexpr std::size_t kDescriptionCap = 2000;

struct StructuralKnowledge {
  std::string entity_type;
  std::vector<std::pair<std::string, std::string>> neighbors;  // (relation name, neighbor)
};

struct DescriptiveKnowledge {
  std::string text;
  std::string source_tag;
};

struct InheritableKnowledge {
  std::string relation;     // relation id
  std::string hint_target;  // example target entity
};

struct PriorKnowledge {
  std::optional<StructuralKnowledge> structural;
  std::optional<DescriptiveKnowledge> descriptive;
  std::optional<InheritableKnowledge> inheritable;

  bool empty() const { return !structural && !descriptive && !inheritable; }
};

// Keyed by normalized entity name; first document per name wins.
class DocumentSource {
 public:
  DocumentSource() = default;
  // Loads a descriptions file: one JSON object per line {name, text, source_tag}.
  static DocumentSource load(const std::string& path);

  void add(const std::string& name, const std::string& text, const std::string& source_tag);
  std::optional<DescriptiveKnowledge> lookup(const std::string& entity_name) const;
  std::size_t size() const { return docs_.size(); }

 private:
  std::unordered_map<std::string, DescriptiveKnowledge> docs_;
};

std::optional<StructuralKnowledge> assemble_structural(const KnowledgeGraph& graph,
                                                       const std::string& entity_name);

std::optional<DescriptiveKnowledge> assemble_descriptive(const DocumentSource& docs,
                                                         const std::string& entity_name);

PriorKnowledge assemble_prior(const KnowledgeGraph& graph, const DocumentSource& docs,
                              const std::string& entity_name,
                              std::optional<InheritableKnowledge> inheritable);

// Prompt-facing renderings of each knowledge kind.
std::string render_structural(const StructuralKnowledge& s);
std::string render_inheritable(const InheritableKnowledge& i, const KnowledgeGraph& graph);

}  // namespace pairkg
