#include "pairkg/sim.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "pairkg/normalize.hpp"
#include "pairkg/pipeline.hpp"

namespace pairkg {

namespace {

using nlohmann::json;

std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

bool bernoulli(std::mt19937_64& gen, double p) {
  if (p <= 0.0) return false;
  if (p >= 1.0) return true;
  return (static_cast<double>(gen() >> 11) * 0x1.0p-53) < p;
}

std::string entity_name(int i) { return "ent-" + std::to_string(i); }
std::string type_name(int i) { return "type-" + std::to_string(i); }

}  // namespace

double OracleNoise::effective_hallucination_rate(int flag_count) const {
  double rate = hallucination_rate_base * std::pow(knowledge_discount, flag_count);
  return std::clamp(rate, 0.0, 1.0);
}

SyntheticKG generate_ground_truth(int n_entities, int n_types, int n_relations,
                                  std::uint64_t seed) {
  SynthParams p;
  p.n_entities = n_entities;
  p.n_types = n_types;
  p.n_relations = n_relations;
  p.seed = seed;
  return generate_ground_truth(p);
}

SyntheticKG generate_ground_truth(const SynthParams& p) {
  if (p.n_entities < 10 || p.n_types < 2 || p.n_relations < 2) {
    throw std::invalid_argument(
        "synthetic KG needs >=10 entities, >=2 types, >=2 relations");
  }
  if (p.hidden_fraction <= 0.0 || p.hidden_fraction >= 1.0) {
    throw std::invalid_argument("hidden_fraction must be in (0,1)");
  }

  std::mt19937_64 gen(p.seed);
  SyntheticKG synth;
  synth.hidden_fraction = p.hidden_fraction;

  std::vector<Entity> entities;
  for (int i = 0; i < p.n_entities; ++i) {
    Entity e;
    e.id = "e" + std::to_string(i);
    e.name = entity_name(i);
    e.entity_type = type_name(static_cast<int>(gen() % p.n_types));
    entities.push_back(e);
    synth.truth.add_entity(e);
  }

  for (int k = 0; k < p.n_relations; ++k) {
    RelationDef r;
    r.id = "r" + std::to_string(k);
    r.name = "rel-" + std::to_string(k);
    for (int t = 0; t < p.n_types; ++t) {
      if (bernoulli(gen, 0.5)) r.applicable_types.push_back(type_name(t));
    }
    if (r.applicable_types.empty()) {
      r.applicable_types.push_back(type_name(static_cast<int>(gen() % p.n_types)));
    }
    synth.truth.add_relation(r);
  }

  // Truth triples: every entity bears a few of its applicable relations, each
  // with a block of distinct targets.
  std::vector<Triple> truth_triples;
  const int rel_span = p.max_relations_per_entity - p.min_relations_per_entity + 1;
  const int tgt_span = p.max_targets_per_relation - p.min_targets_per_relation + 1;
  for (const auto& e : entities) {
    std::vector<const RelationDef*> applicable;
    for (const auto& r : synth.truth.relations()) {
      if (r.applies_to(e.entity_type)) applicable.push_back(&r);
    }
    if (applicable.empty()) continue;
    int n_bearing = p.min_relations_per_entity + static_cast<int>(gen() % rel_span);
    n_bearing = std::min<int>(n_bearing, static_cast<int>(applicable.size()));

    // pick distinct relations
    std::set<std::size_t> rel_idx;
    while (static_cast<int>(rel_idx.size()) < n_bearing) {
      rel_idx.insert(gen() % applicable.size());
    }
    for (std::size_t ri : rel_idx) {
      const RelationDef* rel = applicable[ri];
      int n_targets = p.min_targets_per_relation + static_cast<int>(gen() % tgt_span);
      n_targets = std::min(n_targets, p.n_entities - 1);
      std::set<int> targets;
      while (static_cast<int>(targets.size()) < n_targets) {
        int t = static_cast<int>(gen() % p.n_entities);
        if (entity_name(t) != e.name) targets.insert(t);
      }
      for (int t : targets) {
        Triple triple;
        triple.source = e.name;
        triple.relation = rel->id;
        triple.target = entity_name(t);
        triple.provenance = Provenance::BaseKG;
        truth_triples.push_back(triple);
      }
    }
    synth.sources.push_back(e.name);
  }
  for (const auto& t : truth_triples) synth.truth.add_triple(t);

  // Visible subsample: hide floor(n * hidden_fraction) triples.
  std::vector<std::size_t> order(truth_triples.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  for (std::size_t i = order.size(); i > 1; --i) {
    std::swap(order[i - 1], order[gen() % i]);
  }
  const std::size_t hidden =
      static_cast<std::size_t>(std::floor(static_cast<double>(truth_triples.size()) *
                                          p.hidden_fraction));
  std::vector<bool> keep(truth_triples.size(), false);
  for (std::size_t i = hidden; i < order.size(); ++i) keep[order[i]] = true;

  std::set<std::string> visible_entities;
  for (std::size_t i = 0; i < truth_triples.size(); ++i) {
    if (!keep[i]) continue;
    visible_entities.insert(truth_triples[i].source);
    visible_entities.insert(truth_triples[i].target);
  }
  for (const auto& e : entities) {
    if (visible_entities.count(e.name)) synth.visible.add_entity(e);
  }
  for (const auto& r : synth.truth.relations()) synth.visible.add_relation(r);
  for (std::size_t i = 0; i < truth_triples.size(); ++i) {
    if (keep[i]) synth.visible.add_triple(truth_triples[i]);
  }

  // Synthetic descriptions for a seeded subset of entities.
  for (const auto& e : entities) {
    if (!bernoulli(gen, p.description_fraction)) continue;
    std::string text = e.name + " is a " + e.entity_type + " entity";
    auto neighbors = synth.truth.one_hop_neighbors(e.id);
    if (!neighbors.empty()) {
      text += " associated with";
      std::size_t shown = std::min<std::size_t>(neighbors.size(), 5);
      for (std::size_t i = 0; i < shown; ++i) {
        text += (i == 0 ? " " : ", ") + neighbors[i].second;
      }
    }
    text += ".";
    synth.descriptions.add(e.name, text, "synthetic");
  }

  return synth;
}

std::vector<std::string> eligible_seeds(const SyntheticKG& synth) {
  std::vector<std::string> out;
  for (const auto& name : synth.sources) {
    if (synth.visible.entity_type_of(name)) out.push_back(name);
  }
  return out;
}

std::uint64_t descriptor_seed(std::uint64_t base, const TaskDescriptor& d) {
  std::ostringstream ss;
  ss << (d.task == TaskKind::RelationFilter ? "rf" : "ee") << '\x1f' << d.source << '\x1f'
     << d.relation.value_or("") << '\x1f' << d.knowledge.tag() << '\x1f' << d.repetition;
  std::uint64_t h = fnv1a64(ss.str());
  h ^= base + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  return h;
}

OracleBackend::OracleBackend(const SyntheticKG& synth, OracleNoise noise)
    : synth_(synth), noise_(noise) {
  for (const auto& t : synth.truth.triples()) {
    truth_targets_[{normalize_name(t.source), t.relation}].push_back(t.target);
  }
}

OracleBackend::OracleBackend(std::shared_ptr<const SyntheticKG> synth, OracleNoise noise)
    : owned_(std::move(synth)), synth_(*owned_), noise_(noise) {
  for (const auto& t : synth_.truth.triples()) {
    truth_targets_[{normalize_name(t.source), t.relation}].push_back(t.target);
  }
}

std::string OracleBackend::complete(const LlmRequest& request) {
  const TaskDescriptor& d = request.descriptor;
  if (d.source.empty()) throw LlmError("oracle backend requires a task descriptor");

  if (d.task == TaskKind::RelationFilter) {
    auto type = synth_.truth.entity_type_of(d.source);
    if (!type) return "{}";
    json answer = json::object();
    for (const auto& r : synth_.truth.relations()) {
      if (!r.applies_to(*type)) continue;
      auto it = truth_targets_.find({normalize_name(d.source), r.id});
      if (it == truth_targets_.end() || it->second.empty()) continue;
      answer[r.name] = it->second.front();
    }
    return answer.dump();
  }

  if (!d.relation) throw LlmError("oracle entity expansion requires a relation");
  std::mt19937_64 gen(descriptor_seed(noise_.rng_seed, d));

  std::vector<std::string> emitted;
  auto it = truth_targets_.find({normalize_name(d.source), *d.relation});
  const std::size_t n_truth = it == truth_targets_.end() ? 0 : it->second.size();
  if (it != truth_targets_.end()) {
    for (const auto& target : it->second) {
      if (bernoulli(gen, noise_.omission_rate)) continue;
      emitted.push_back(target);
    }
  }
  const double rate = noise_.effective_hallucination_rate(d.knowledge.count());
  const std::size_t draws = std::max<std::size_t>(1, n_truth);
  for (std::size_t i = 0; i < draws; ++i) {
    if (bernoulli(gen, rate)) {
      emitted.push_back("fake-" + std::to_string(gen() % 1000000));
    }
  }

  json answer = json::array();
  for (const auto& t : emitted) answer.push_back(t);
  return answer.dump();
}

MetricsReport score_against_truth(const MiningResult& mined, const SyntheticKG& synth) {
  MetricsReport report;
  report.triples = mined.triple_count();
  report.seeds = mined.by_seed.size();

  long accepted = 0, total = 0;
  for (const auto& t : mined.all_triples()) {
    ++total;
    if (synth.truth.has_triple_key(t.source, t.relation, t.target)) ++accepted;
  }
  if (total > 0) {
    report.accuracy = static_cast<double>(accepted) / static_cast<double>(total);
    report.decided = static_cast<std::size_t>(total);
    report.novelty = novelty(mined, synth.visible);
  }
  if (!mined.by_seed.empty()) report.aee = aee(mined);
  HashedNgramEmbedder embedder;
  report.ilad = ilad(mined, embedder);
  return report;
}

const char* variant_name(PipelineVariant v) {
  switch (v) {
    case PipelineVariant::Full: return "full";
    case PipelineVariant::NoAgg: return "no_agg";
    case PipelineVariant::NoAggPr: return "no_agg_pr";
    case PipelineVariant::NoAggPrRf: return "no_agg_pr_rf";
  }
  return "?";
}

SimConfig SimConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open simulator config " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str());
}

SimConfig SimConfig::from_json_text(const std::string& text) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    throw std::runtime_error("simulator config is not a JSON object");
  }
  SimConfig cfg;
  cfg.synth.n_entities = j.value("n_entities", cfg.synth.n_entities);
  cfg.synth.n_types = j.value("n_types", cfg.synth.n_types);
  cfg.synth.n_relations = j.value("n_relations", cfg.synth.n_relations);
  cfg.synth.hidden_fraction = j.value("hidden_fraction", cfg.synth.hidden_fraction);
  cfg.synth.description_fraction =
      j.value("description_fraction", cfg.synth.description_fraction);
  if (j.contains("noise")) {
    const auto& n = j["noise"];
    cfg.noise.hallucination_rate_base =
        n.value("hallucination_rate_base", cfg.noise.hallucination_rate_base);
    cfg.noise.knowledge_discount =
        n.value("knowledge_discount", cfg.noise.knowledge_discount);
    cfg.noise.omission_rate = n.value("omission_rate", cfg.noise.omission_rate);
  }
  if (j.contains("seeds")) {
    cfg.seeds.clear();
    for (const auto& s : j["seeds"]) cfg.seeds.push_back(s.get<std::uint64_t>());
  }
  cfg.k = j.value("K", j.value("k", cfg.k));
  cfg.reps = j.value("reps", cfg.reps);
  cfg.parallelism = j.value("parallelism", cfg.parallelism);
  cfg.max_seed_entities = j.value("max_seed_entities", cfg.max_seed_entities);
  if (cfg.seeds.empty()) throw std::runtime_error("simulator config needs seeds");
  if (cfg.k < 1 || cfg.reps < 1) throw std::runtime_error("K and reps must be >= 1");
  return cfg;
}

std::vector<AblationRun> run_ablation(const SimConfig& config) {
  std::vector<AblationRun> runs;
  for (std::uint64_t seed : config.seeds) {
    SynthParams params = config.synth;
    params.seed = seed;
    SyntheticKG synth = generate_ground_truth(params);

    OracleNoise noise = config.noise;
    noise.rng_seed = seed;

    std::vector<std::string> seeds = eligible_seeds(synth);
    if (config.max_seed_entities > 0 &&
        seeds.size() > static_cast<std::size_t>(config.max_seed_entities)) {
      seeds.resize(static_cast<std::size_t>(config.max_seed_entities));
    }

    LlmGateway gateway(std::make_shared<OracleBackend>(synth, noise));
    LexicalScorer scorer;

    AblationRun run;
    run.seed = seed;
    for (PipelineVariant variant :
         {PipelineVariant::Full, PipelineVariant::NoAgg, PipelineVariant::NoAggPr,
          PipelineVariant::NoAggPrRf}) {
      MineParams mp;
      mp.variant = variant;
      mp.filter_template = default_filter_template();
      mp.expand_template = default_expand_template();
      mp.k = config.k;
      mp.reps = config.reps;
      mp.parallelism = config.parallelism;
      MineOutcome outcome =
          mine(synth.visible, synth.descriptions, seeds, gateway, scorer, mp);
      run.reports[variant] = score_against_truth(outcome.result, synth);
    }
    runs.push_back(std::move(run));
  }
  return runs;
}

std::string ablation_to_json(const std::vector<AblationRun>& runs) {
  json out = json::array();
  for (const auto& run : runs) {
    json entry;
    entry["seed"] = run.seed;
    for (const auto& [variant, report] : run.reports) {
      json r;
      if (report.accuracy) r["accuracy"] = *report.accuracy;
      r["novelty"] = report.novelty;
      r["aee"] = report.aee;
      r["ilad"] = report.ilad;
      r["triples"] = report.triples;
      entry[variant_name(variant)] = r;
    }
    out.push_back(entry);
  }
  return out.dump(2);
}

}  // namespace pairkg
