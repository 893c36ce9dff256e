#include "pairkg/kg.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <tuple>

#include <json.hpp>

#include "pairkg/normalize.hpp"

namespace pairkg {

namespace {

using nlohmann::json;

std::string triple_key(const std::string& source, const std::string& relation,
                       const std::string& target) {
  return normalize_name(source) + '\x1f' + relation + '\x1f' + normalize_name(target);
}

json parse_line(const std::string& line, const std::string& file, int lineno) {
  json j = json::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    throw KgError(file + ":" + std::to_string(lineno) + ": not a JSON object");
  }
  return j;
}

std::string require_string(const json& j, const char* field, const std::string& file,
                           int lineno) {
  if (!j.contains(field) || !j[field].is_string() || j[field].get<std::string>().empty()) {
    throw KgError(file + ":" + std::to_string(lineno) + ": missing or empty field '" +
                  field + "'");
  }
  return j[field].get<std::string>();
}

void for_each_line(const std::string& path,
                   const std::function<void(const std::string&, int)>& fn) {
  std::ifstream in(path);
  if (!in) throw KgError("cannot open " + path);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    fn(line, lineno);
  }
}

}  // namespace

bool RelationDef::applies_to(const std::string& entity_type) const {
  return std::find(applicable_types.begin(), applicable_types.end(), entity_type) !=
         applicable_types.end();
}

void KnowledgeGraph::add_entity(Entity e) {
  if (e.id.empty()) throw KgError("entity with empty id");
  if (e.entity_type.empty()) throw KgError("entity '" + e.id + "' has empty type");
  if (entity_pos_.count(e.id)) throw KgError("duplicate entity id '" + e.id + "'");
  if (normalize_name(e.name).empty()) throw KgError("entity '" + e.id + "' has blank name");
  for (const auto& a : e.aliases) {
    if (normalize_name(a).empty()) throw KgError("entity '" + e.id + "' has blank alias");
  }
  entity_pos_[e.id] = entities_.size();
  name_index_[normalize_name(e.name)].push_back(e.id);
  for (const auto& a : e.aliases) {
    auto& ids = name_index_[normalize_name(a)];
    if (std::find(ids.begin(), ids.end(), e.id) == ids.end()) ids.push_back(e.id);
  }
  entities_.push_back(std::move(e));
}

void KnowledgeGraph::add_relation(RelationDef r) {
  if (r.id.empty()) throw KgError("relation with empty id");
  if (r.applicable_types.empty()) {
    throw KgError("relation '" + r.id + "' has no applicable types");
  }
  if (relation_pos_.count(r.id)) throw KgError("duplicate relation id '" + r.id + "'");
  relation_pos_[r.id] = relations_.size();
  relations_.push_back(std::move(r));
}

void KnowledgeGraph::add_triple(Triple t) {
  if (!relation_pos_.count(t.relation)) {
    throw KgError("triple references unknown relation id '" + t.relation + "'");
  }
  triple_keys_[triple_key(t.source, t.relation, t.target)] = true;
  triples_.push_back(std::move(t));
}

const Entity* KnowledgeGraph::entity_by_id(const std::string& id) const {
  auto it = entity_pos_.find(id);
  return it == entity_pos_.end() ? nullptr : &entities_[it->second];
}

const RelationDef* KnowledgeGraph::relation_by_id(const std::string& id) const {
  auto it = relation_pos_.find(id);
  return it == relation_pos_.end() ? nullptr : &relations_[it->second];
}

std::vector<std::string> KnowledgeGraph::resolve(const std::string& name) const {
  auto it = name_index_.find(normalize_name(name));
  return it == name_index_.end() ? std::vector<std::string>{} : it->second;
}

bool KnowledgeGraph::contains_entity(const std::string& name) const {
  return name_index_.count(normalize_name(name)) > 0;
}

std::optional<std::string> KnowledgeGraph::resolve_primary(const std::string& name) const {
  std::vector<std::string> ids = resolve(name);
  if (ids.empty()) return std::nullopt;
  if (ids.size() == 1) return ids[0];

  std::unordered_map<std::string, int> incident;
  for (const auto& id : ids) incident[id] = 0;
  for (const auto& t : triples_) {
    if (t.provenance != Provenance::BaseKG) continue;
    for (const auto& endpoint : {t.source, t.target}) {
      for (const auto& id : resolve(endpoint)) {
        auto it = incident.find(id);
        if (it != incident.end()) ++it->second;
      }
    }
  }
  std::string best = ids[0];
  for (const auto& id : ids) {
    if (incident[id] > incident[best] || (incident[id] == incident[best] && id < best)) {
      best = id;
    }
  }
  return best;
}

std::optional<std::string> KnowledgeGraph::entity_type_of(const std::string& name) const {
  auto id = resolve_primary(name);
  if (!id) return std::nullopt;
  return entity_by_id(*id)->entity_type;
}

std::vector<std::pair<std::string, std::string>> KnowledgeGraph::one_hop_neighbors(
    const std::string& entity_id) const {
  const Entity* e = entity_by_id(entity_id);
  if (!e) throw KgError("unknown entity id '" + entity_id + "'");

  std::vector<std::string> own_names;
  own_names.push_back(normalize_name(e->name));
  for (const auto& a : e->aliases) own_names.push_back(normalize_name(a));
  auto is_own = [&](const std::string& name) {
    return std::find(own_names.begin(), own_names.end(), normalize_name(name)) !=
           own_names.end();
  };

  // (relation id, normalized neighbor, relation name, neighbor surface)
  std::vector<std::tuple<std::string, std::string, std::string, std::string>> found;
  for (const auto& t : triples_) {
    if (t.provenance != Provenance::BaseKG) continue;
    const RelationDef* r = relation_by_id(t.relation);
    if (is_own(t.source)) {
      found.emplace_back(t.relation, normalize_name(t.target), r->name, t.target);
    } else if (is_own(t.target)) {
      found.emplace_back(t.relation, normalize_name(t.source), r->name, t.source);
    }
  }
  std::sort(found.begin(), found.end());

  std::vector<std::pair<std::string, std::string>> out;
  out.reserve(found.size());
  for (auto& [rid, norm, rname, surface] : found) out.emplace_back(rname, surface);
  return out;
}

bool KnowledgeGraph::has_triple_key(const std::string& source, const std::string& relation,
                                    const std::string& target) const {
  return triple_keys_.count(triple_key(source, relation, target)) > 0;
}

Triple triple_from_json_line(const std::string& line, const std::string& file, int lineno) {
  json j = parse_line(line, file, lineno);
  Triple t;
  t.source = require_string(j, "source", file, lineno);
  t.relation = require_string(j, "relation", file, lineno);
  t.target = require_string(j, "target", file, lineno);
  std::string prov = require_string(j, "provenance", file, lineno);
  if (prov == "BaseKG") {
    t.provenance = Provenance::BaseKG;
  } else if (prov == "Mined") {
    t.provenance = Provenance::Mined;
  } else {
    throw KgError(file + ":" + std::to_string(lineno) + ": bad provenance '" + prov + "'");
  }
  if (j.contains("score")) t.score = j["score"].get<double>();
  if (j.contains("consistency")) t.consistency = j["consistency"].get<int>();
  if (t.provenance == Provenance::Mined && (!t.score || !t.consistency)) {
    throw KgError(file + ":" + std::to_string(lineno) +
                  ": mined triple missing score/consistency");
  }
  if (t.provenance == Provenance::BaseKG && (t.score || t.consistency)) {
    throw KgError(file + ":" + std::to_string(lineno) +
                  ": base triple carries score/consistency");
  }
  return t;
}

std::string triple_to_json_line(const Triple& t) {
  json j;
  j["source"] = t.source;
  j["relation"] = t.relation;
  j["target"] = t.target;
  j["provenance"] = t.provenance == Provenance::BaseKG ? "BaseKG" : "Mined";
  if (t.score) j["score"] = *t.score;
  if (t.consistency) j["consistency"] = *t.consistency;
  return j.dump();
}

std::vector<Triple> load_triples_file(const std::string& path) {
  std::vector<Triple> out;
  for_each_line(path, [&](const std::string& line, int lineno) {
    out.push_back(triple_from_json_line(line, path, lineno));
  });
  return out;
}

KnowledgeGraph load_kg(const std::string& dir) {
  namespace fs = std::filesystem;
  const std::string efile = (fs::path(dir) / "entities.jsonl").string();
  const std::string rfile = (fs::path(dir) / "relations.jsonl").string();
  const std::string tfile = (fs::path(dir) / "triples.jsonl").string();

  KnowledgeGraph g;
  for_each_line(efile, [&](const std::string& line, int lineno) {
    json j = parse_line(line, efile, lineno);
    Entity e;
    e.id = require_string(j, "id", efile, lineno);
    e.name = require_string(j, "name", efile, lineno);
    e.entity_type = require_string(j, "type", efile, lineno);
    if (j.contains("aliases")) {
      for (const auto& a : j["aliases"]) e.aliases.push_back(a.get<std::string>());
    }
    try {
      g.add_entity(std::move(e));
    } catch (const KgError& err) {
      throw KgError(efile + ":" + std::to_string(lineno) + ": " + err.what());
    }
  });
  for_each_line(rfile, [&](const std::string& line, int lineno) {
    json j = parse_line(line, rfile, lineno);
    RelationDef r;
    r.id = require_string(j, "id", rfile, lineno);
    r.name = require_string(j, "name", rfile, lineno);
    if (j.contains("applicable_types")) {
      for (const auto& t : j["applicable_types"]) {
        r.applicable_types.push_back(t.get<std::string>());
      }
    }
    try {
      g.add_relation(std::move(r));
    } catch (const KgError& err) {
      throw KgError(rfile + ":" + std::to_string(lineno) + ": " + err.what());
    }
  });
  if (fs::exists(tfile)) {
    for_each_line(tfile, [&](const std::string& line, int lineno) {
      Triple t = triple_from_json_line(line, tfile, lineno);
      if (t.provenance == Provenance::BaseKG && g.resolve(t.source).empty()) {
        throw KgError(tfile + ":" + std::to_string(lineno) + ": base triple source '" +
                      t.source + "' is not a known entity");
      }
      try {
        g.add_triple(std::move(t));
      } catch (const KgError& err) {
        throw KgError(tfile + ":" + std::to_string(lineno) + ": " + err.what());
      }
    });
  }
  return g;
}

void save_kg(const KnowledgeGraph& graph, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  {
    std::ofstream out(fs::path(dir) / "entities.jsonl");
    if (!out) throw KgError("cannot write entities file in " + dir);
    for (const auto& e : graph.entities()) {
      json j;
      j["id"] = e.id;
      j["name"] = e.name;
      j["type"] = e.entity_type;
      j["aliases"] = e.aliases;
      out << j.dump() << '\n';
    }
  }
  {
    std::ofstream out(fs::path(dir) / "relations.jsonl");
    if (!out) throw KgError("cannot write relations file in " + dir);
    for (const auto& r : graph.relations()) {
      json j;
      j["id"] = r.id;
      j["name"] = r.name;
      j["applicable_types"] = r.applicable_types;
      out << j.dump() << '\n';
    }
  }
  {
    std::ofstream out(fs::path(dir) / "triples.jsonl");
    if (!out) throw KgError("cannot write triples file in " + dir);
    for (const auto& t : graph.triples()) out << triple_to_json_line(t) << '\n';
  }
}

int append_triples(KnowledgeGraph& graph, const std::vector<Triple>& triples,
                   const std::string& path) {
  for (const auto& t : triples) {
    if (t.provenance != Provenance::Mined) {
      throw KgError("append_triples only accepts mined triples");
    }
    if (!graph.relation_by_id(t.relation)) {
      throw KgError("mined triple references unknown relation id '" + t.relation + "'");
    }
  }
  std::ofstream out(path, std::ios::app);
  if (!out) throw KgError("cannot open " + path + " for append");
  int appended = 0;
  for (const auto& t : triples) {
    if (graph.has_triple_key(t.source, t.relation, t.target)) continue;
    out << triple_to_json_line(t) << '\n';
    graph.add_triple(t);
    ++appended;
  }
  if (!out) throw KgError("write failure on " + path);
  return appended;
}

}  // namespace pairkg
