#include "pairkg/expand.hpp"

#include <algorithm>
#include <atomic>
#include <map>
#include <set>
#include <stdexcept>
#include <thread>

#include "pairkg/normalize.hpp"
#include "pairkg/prompt.hpp"

namespace pairkg {

std::vector<KnowledgeFlags> enumerate_prompt_variants(const KnowledgeFlags& available) {
  if (!available.any()) {
    throw std::invalid_argument("no knowledge kinds available for prompting");
  }
  static const char* kCanonical[] = {"S", "D", "I", "SD", "SI", "DI", "SDI"};
  std::vector<KnowledgeFlags> out;
  for (const char* tag : kCanonical) {
    KnowledgeFlags f = KnowledgeFlags::from_tag(tag);
    if ((f.structural && !available.structural) ||
        (f.descriptive && !available.descriptive) ||
        (f.inheritable && !available.inheritable)) {
      continue;
    }
    out.push_back(f);
  }
  return out;
}

ExpansionResult expand(const LlmGateway& gateway, const KnowledgeGraph& graph,
                       const std::string& source, const FilteredRelation& relation,
                       const PriorKnowledge& prior, int reps,
                       const std::string& template_text, const std::string& model_id,
                       double temperature, int parallelism, VariantPolicy policy) {
  if (reps < 1) throw std::invalid_argument("reps must be >= 1");

  KnowledgeFlags available;
  available.structural = prior.structural.has_value();
  available.descriptive = prior.descriptive.has_value();
  available.inheritable = prior.inheritable.has_value();
  std::vector<KnowledgeFlags> variants = enumerate_prompt_variants(available);
  if (policy == VariantPolicy::RichestOnly) {
    variants = {variants.back()};  // canonical order ends at the richest subset
  }

  const RelationDef* rel = graph.relation_by_id(relation.relation);
  const std::string relation_name = rel ? rel->name : relation.relation;
  const std::string norm_source = normalize_name(source);

  ExpansionResult result;
  result.rounds.resize(variants.size() * static_cast<std::size_t>(reps));

  auto run_round = [&](std::size_t index) {
    const KnowledgeFlags& subset = variants[index / reps];
    const int rep = static_cast<int>(index % reps);

    std::set<std::string> keep;
    if (subset.structural) keep.insert("S");
    if (subset.descriptive) keep.insert("D");
    if (subset.inheritable) keep.insert("I");

    std::map<std::string, std::string> slots;
    slots["source"] = source;
    slots["relation"] = relation_name;
    slots["Struc_KG"] =
        subset.structural && prior.structural ? render_structural(*prior.structural) : "";
    slots["Desc_KG"] =
        subset.descriptive && prior.descriptive ? prior.descriptive->text : "";
    slots["Inher_KG"] = subset.inheritable && prior.inheritable
                            ? render_inheritable(*prior.inheritable, graph)
                            : "";

    ExpansionRound round;
    round.subset = subset;
    round.repetition = rep;
    round.prompt = render_prompt(strip_sections(template_text, keep), slots);

    LlmRequest request;
    request.prompt = round.prompt;
    request.descriptor =
        TaskDescriptor{TaskKind::EntityExpand, source, relation.relation, subset, rep};
    request.temperature = temperature;
    request.model_id = model_id;

    try {
      round.raw_response = gateway.complete(request).text;
      for (auto& t : parse_entity_list(round.raw_response)) {
        if (normalize_name(t) == norm_source) continue;  // self-loop
        round.targets.push_back(std::move(t));
      }
    } catch (const LlmError&) {
      round.failed = true;  // round kept with empty targets
    }
    result.rounds[index] = std::move(round);
  };

  const std::size_t total = result.rounds.size();
  if (parallelism <= 1 || total <= 1) {
    for (std::size_t i = 0; i < total; ++i) run_round(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> workers;
    const std::size_t n_workers =
        std::min<std::size_t>(static_cast<std::size_t>(parallelism), total);
    workers.reserve(n_workers);
    for (std::size_t w = 0; w < n_workers; ++w) {
      workers.emplace_back([&] {
        for (std::size_t i = next.fetch_add(1); i < total; i = next.fetch_add(1)) {
          run_round(i);
        }
      });
    }
    for (auto& t : workers) t.join();
  }

  for (const auto& round : result.rounds) {
    if (round.failed) {
      result.warnings.push_back("expansion call failed: source='" + source +
                                "' relation='" + relation.relation + "' variant=" +
                                round.subset.tag() + " rep=" +
                                std::to_string(round.repetition));
    }
  }
  return result;
}

}  // namespace pairkg
