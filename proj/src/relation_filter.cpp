#include "pairkg/relation_filter.hpp"

#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "pairkg/normalize.hpp"
#include "pairkg/prompt.hpp"

namespace pairkg {

namespace {

using nlohmann::json;

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string strip_wrapping(std::string s) {
  s = trim(s);
  while (!s.empty() && (s.front() == '-' || s.front() == '*')) s = trim(s.substr(1));
  while (s.size() >= 2 && ((s.front() == '"' && s.back() == '"') ||
                           (s.front() == '\'' && s.back() == '\''))) {
    s = trim(s.substr(1, s.size() - 2));
  }
  return s;
}

}  // namespace

std::vector<RelationDef> retrieve_candidate_relations(const KnowledgeGraph& graph,
                                                      const std::string& entity_type) {
  std::vector<RelationDef> out;
  for (const auto& r : graph.relations()) {
    if (r.applies_to(entity_type)) out.push_back(r);
  }
  return out;
}

std::vector<std::pair<std::string, std::string>> parse_relation_hints(
    const std::string& text) {
  std::vector<std::pair<std::string, std::string>> out;

  std::string body = trim(text);
  if (std::size_t fence = body.find("```"); fence != std::string::npos) {
    std::size_t start = body.find('\n', fence);
    std::size_t end = start == std::string::npos ? std::string::npos
                                                 : body.find("```", start);
    if (start != std::string::npos && end != std::string::npos) {
      body = trim(body.substr(start + 1, end - start - 1));
    }
  }

  json j = json::parse(body, nullptr, false);
  if (!j.is_discarded() && j.is_object()) {
    for (const auto& [key, value] : j.items()) {
      std::string hint;
      if (value.is_string()) {
        hint = value.get<std::string>();
      } else if (value.is_array() && !value.empty() && value[0].is_string()) {
        hint = value[0].get<std::string>();  // tolerate list-valued hints
      }
      out.emplace_back(key, hint);
    }
    return out;
  }

  std::istringstream ss(body);
  std::string line;
  while (std::getline(ss, line)) {
    std::size_t colon = line.find(':');
    if (colon == std::string::npos) continue;
    std::string rel = strip_wrapping(line.substr(0, colon));
    std::string hint = strip_wrapping(line.substr(colon + 1));
    if (!rel.empty()) out.emplace_back(rel, hint);
  }
  return out;
}

FilterOutcome filter_relations(const LlmGateway& gateway, const std::string& source,
                               const PriorKnowledge& prior,
                               const std::vector<RelationDef>& candidates,
                               const std::string& template_text,
                               const std::string& model_id, double temperature) {
  FilterOutcome outcome;
  if (candidates.empty()) return outcome;

  KnowledgeFlags flags;
  flags.structural = prior.structural.has_value();
  flags.descriptive = prior.descriptive.has_value();

  std::string candidate_block;
  for (const auto& r : candidates) {
    if (!candidate_block.empty()) candidate_block += '\n';
    candidate_block += "- " + r.name;
  }

  std::set<std::string> keep;
  if (flags.structural) keep.insert("S");
  if (flags.descriptive) keep.insert("D");

  std::map<std::string, std::string> slots;
  slots["source"] = source;
  slots["candidates"] = candidate_block;
  slots["Struc_KG"] = prior.structural ? render_structural(*prior.structural) : "";
  slots["Desc_KG"] = prior.descriptive ? prior.descriptive->text : "";

  LlmRequest request;
  request.prompt = render_prompt(strip_sections(template_text, keep), slots);
  request.descriptor =
      TaskDescriptor{TaskKind::RelationFilter, source, std::nullopt, flags, 0};
  request.temperature = temperature;
  request.model_id = model_id;
  outcome.prompt = request.prompt;

  try {
    outcome.raw_response = gateway.complete(request).text;
  } catch (const LlmError& err) {
    outcome.warnings.push_back(std::string("relation filter call failed: ") + err.what());
    return outcome;
  }

  auto pairs = parse_relation_hints(outcome.raw_response);
  if (pairs.empty()) {
    outcome.warnings.push_back("relation filter reply was unparseable for '" + source + "'");
    return outcome;
  }

  // Case-insensitive match back onto candidate names; candidate order wins.
  std::unordered_map<std::string, std::string> kept_hints;  // relation id -> hint
  std::unordered_map<std::string, std::string> by_norm_name;
  for (const auto& r : candidates) by_norm_name[normalize_name(r.name)] = r.id;
  const std::string norm_source = normalize_name(source);

  for (const auto& [name, hint] : pairs) {
    auto it = by_norm_name.find(normalize_name(name));
    if (it == by_norm_name.end()) continue;  // not a candidate: dropped
    if (kept_hints.count(it->second)) continue;
    std::string cleaned = strip_wrapping(hint);
    if (normalize_name(cleaned) == norm_source) cleaned.clear();  // self-loop hint
    kept_hints[it->second] = cleaned;
  }

  for (const auto& r : candidates) {
    auto it = kept_hints.find(r.id);
    if (it == kept_hints.end()) continue;
    FilteredRelation fr;
    fr.relation = r.id;
    if (!it->second.empty()) fr.hint_target = it->second;
    outcome.kept.push_back(std::move(fr));
  }
  return outcome;
}

}  // namespace pairkg
