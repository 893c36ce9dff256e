#include "pairkg/prior.hpp"

#include <fstream>

#include <json.hpp>

#include "pairkg/normalize.hpp"

namespace pairkg {

using nlohmann::json;

DocumentSource DocumentSource::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw KgError("cannot open descriptions file " + path);
  DocumentSource src;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("name") || !j.contains("text")) {
      throw KgError(path + ":" + std::to_string(lineno) + ": bad description record");
    }
    src.add(j["name"].get<std::string>(), j["text"].get<std::string>(),
            j.value("source_tag", std::string{}));
  }
  return src;
}

void DocumentSource::add(const std::string& name, const std::string& text,
                         const std::string& source_tag) {
  if (text.empty()) return;
  docs_.try_emplace(normalize_name(name), DescriptiveKnowledge{text, source_tag});
}

std::optional<DescriptiveKnowledge> DocumentSource::lookup(
    const std::string& entity_name) const {
  auto it = docs_.find(normalize_name(entity_name));
  if (it == docs_.end()) return std::nullopt;
  DescriptiveKnowledge d = it->second;
  d.text = truncate_at_whitespace(d.text, kDescriptionCap);
  return d;
}

std::optional<StructuralKnowledge> assemble_structural(const KnowledgeGraph& graph,
                                                       const std::string& entity_name) {
  auto id = graph.resolve_primary(entity_name);
  if (!id) return std::nullopt;

  StructuralKnowledge s;
  s.entity_type = graph.entity_by_id(*id)->entity_type;
  s.neighbors = graph.one_hop_neighbors(*id);
  if (s.neighbors.size() > kNeighborCap) s.neighbors.resize(kNeighborCap);
  return s;
}

std::optional<DescriptiveKnowledge> assemble_descriptive(const DocumentSource& docs,
                                                         const std::string& entity_name) {
  return docs.lookup(entity_name);
}

PriorKnowledge assemble_prior(const KnowledgeGraph& graph, const DocumentSource& docs,
                              const std::string& entity_name,
                              std::optional<InheritableKnowledge> inheritable) {
  PriorKnowledge prior;
  prior.structural = assemble_structural(graph, entity_name);
  prior.descriptive = assemble_descriptive(docs, entity_name);
  if (inheritable && !inheritable->hint_target.empty()) {
    prior.inheritable = std::move(inheritable);
  }
  return prior;
}

std::string render_structural(const StructuralKnowledge& s) {
  std::string out = "entity type: " + s.entity_type;
  for (const auto& [rel, neighbor] : s.neighbors) {
    out += "\n- " + rel + ": " + neighbor;
  }
  return out;
}

std::string render_inheritable(const InheritableKnowledge& i, const KnowledgeGraph& graph) {
  const RelationDef* r = graph.relation_by_id(i.relation);
  const std::string rel_name = r ? r->name : i.relation;
  return rel_name + ": " + i.hint_target;
}

}  // namespace pairkg
