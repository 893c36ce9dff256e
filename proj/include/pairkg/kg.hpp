#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace pairkg {

struct Entity {
  std::string id;
  std::string name;
  std::string entity_type;
  std::vector<std::string> aliases;
};

struct RelationDef {
  std::string id;
  std::string name;
  std::vector<std::string> applicable_types;

  bool applies_to(const std::string& entity_type) const;
};

enum class Provenance { BaseKG, Mined };

struct Triple {
  std::string source;    // entity name (surface form)
  std::string relation;  // relation id
  std::string target;    // entity name (surface form)
  Provenance provenance = Provenance::BaseKG;
  std::optional<double> score;     // tau, mined only
  std::optional<int> consistency;  // mined only
};

// Thrown on malformed store files; carries file and line when known.
struct KgError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

class KnowledgeGraph {
 public:
  void add_entity(Entity e);
  void add_relation(RelationDef r);
  // Validates the relation id against the catalog.
  void add_triple(Triple t);

  const std::vector<Entity>& entities() const { return entities_; }
  const std::vector<RelationDef>& relations() const { return relations_; }
  const std::vector<Triple>& triples() const { return triples_; }

  const Entity* entity_by_id(const std::string& id) const;
  const RelationDef* relation_by_id(const std::string& id) const;

  // Entity ids whose name or alias normalizes to normalize_name(name).
  std::vector<std::string> resolve(const std::string& name) const;

  // True iff the name (after normalization) hits the name index.
  bool contains_entity(const std::string& name) const;

  // The entity id a name resolves to. Ambiguous names pick the entity with
  // more incident BaseKG triples, ties broken by lexicographically smallest id.
  std::optional<std::string> resolve_primary(const std::string& name) const;

  // Entity type of resolve_primary(name), or absent.
  std::optional<std::string> entity_type_of(const std::string& name) const;

  // All BaseKG triples incident to the entity, as (relation name, neighbor
  // name), sorted by (relation id, normalized neighbor name).
  std::vector<std::pair<std::string, std::string>> one_hop_neighbors(
      const std::string& entity_id) const;

  // True iff a triple with the same (normalized source, relation id,
  // normalized target) already exists, regardless of provenance.
  bool has_triple_key(const std::string& source, const std::string& relation,
                      const std::string& target) const;

 private:
  std::vector<Entity> entities_;
  std::vector<RelationDef> relations_;
  std::vector<Triple> triples_;
  std::unordered_map<std::string, std::size_t> entity_pos_;
  std::unordered_map<std::string, std::size_t> relation_pos_;
  std::unordered_map<std::string, std::vector<std::string>> name_index_;
  // (norm source \x1f relation id \x1f norm target) keys for dedup
  std::unordered_map<std::string, bool> triple_keys_;
};

// Store layout: a directory holding entities.jsonl, relations.jsonl and
// triples.jsonl (one JSON object per line, UTF-8, LF).
KnowledgeGraph load_kg(const std::string& dir);
void save_kg(const KnowledgeGraph& graph, const std::string& dir);

// Appends mined triples to `path` (and the in-memory graph), skipping exact
// duplicates by (normalized source, relation id, normalized target).
// Returns the number actually appended.
int append_triples(KnowledgeGraph& graph, const std::vector<Triple>& triples,
                   const std::string& path);

// Triples-file (de)serialization shared by the store and the pipeline.
Triple triple_from_json_line(const std::string& line, const std::string& file, int lineno);
std::string triple_to_json_line(const Triple& t);
std::vector<Triple> load_triples_file(const std::string& path);

}  // namespace pairkg
