#include "pairkg/distill.hpp"

#include <fstream>
#include <map>
#include <stdexcept>

#include <json.hpp>

namespace pairkg {

namespace {

using nlohmann::json;

std::string task_tag(TaskKind k) {
  return k == TaskKind::RelationFilter ? "relation_filter" : "entity_expand";
}

}  // namespace

void save_traces(const std::vector<TraceRecord>& traces, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write trace file " + path);
  for (const auto& t : traces) {
    json j;
    j["task"] = task_tag(t.descriptor.task);
    j["source"] = t.descriptor.source;
    if (t.descriptor.relation) j["relation"] = *t.descriptor.relation;
    j["flags"] = t.descriptor.knowledge.tag();
    j["repetition"] = t.descriptor.repetition;
    j["prompt"] = t.prompt;
    j["response"] = t.response;
    out << j.dump() << '\n';
  }
}

std::vector<TraceRecord> load_traces(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open trace file " + path);
  std::vector<TraceRecord> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": bad trace record");
    }
    TraceRecord t;
    std::string task = j.at("task").get<std::string>();
    t.descriptor.task =
        task == "relation_filter" ? TaskKind::RelationFilter : TaskKind::EntityExpand;
    t.descriptor.source = j.at("source").get<std::string>();
    if (j.contains("relation") && !j["relation"].is_null()) {
      t.descriptor.relation = j["relation"].get<std::string>();
    }
    t.descriptor.knowledge = KnowledgeFlags::from_tag(j.value("flags", std::string{}));
    t.descriptor.repetition = j.value("repetition", 0);
    t.prompt = j.at("prompt").get<std::string>();
    t.response = j.value("response", std::string{});
    out.push_back(std::move(t));
  }
  return out;
}

SftExport export_sft(const std::vector<TraceRecord>& traces, const MiningResult& kept,
                     const KnowledgeGraph& graph) {
  SftExport result;

  // Index traces: relation-filter prompt per source; per (source, relation)
  // the richest rep-0 expansion prompt.
  std::map<std::string, const TraceRecord*> filter_trace;
  std::map<std::pair<std::string, std::string>, const TraceRecord*> expand_trace;
  for (const auto& t : traces) {
    if (t.descriptor.task == TaskKind::RelationFilter) {
      filter_trace.try_emplace(t.descriptor.source, &t);
    } else if (t.descriptor.relation && t.descriptor.repetition == 0) {
      auto key = std::make_pair(t.descriptor.source, *t.descriptor.relation);
      auto [it, inserted] = expand_trace.try_emplace(key, &t);
      if (!inserted &&
          t.descriptor.knowledge.count() > it->second->descriptor.knowledge.count()) {
        it->second = &t;
      }
    }
  }

  for (const auto& [seed, rels] : kept.by_seed) {
    if (rels.empty()) continue;

    // Relation-filter sample: surviving relations with one exemplar target.
    auto ft = filter_trace.find(seed);
    if (ft == filter_trace.end()) {
      ++result.skipped_missing_trace;
    } else {
      json answer = json::object();
      for (const auto& [rel_id, triples] : rels) {
        if (triples.empty()) continue;
        const RelationDef* r = graph.relation_by_id(rel_id);
        answer[r ? r->name : rel_id] = triples.front().target;
      }
      if (!answer.empty()) {
        result.samples.push_back(
            SftSample{TaskKind::RelationFilter, ft->second->prompt, answer.dump()});
      }
    }

    // Entity-expansion samples: kept targets per (seed, relation).
    for (const auto& [rel_id, triples] : rels) {
      if (triples.empty()) continue;
      auto et = expand_trace.find(std::make_pair(seed, rel_id));
      if (et == expand_trace.end()) {
        ++result.skipped_missing_trace;
        continue;
      }
      json answer = json::array();
      for (const auto& t : triples) answer.push_back(t.target);
      result.samples.push_back(
          SftSample{TaskKind::EntityExpand, et->second->prompt, answer.dump()});
    }
  }
  return result;
}

void save_sft_corpus(const std::vector<SftSample>& samples, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write corpus file " + path);
  for (const auto& s : samples) {
    json j{{"task", task_tag(s.task)}, {"question", s.question}, {"response", s.response}};
    out << j.dump() << '\n';
  }
}

}  // namespace pairkg
