#include "pairkg/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "pairkg/expand.hpp"
#include "pairkg/normalize.hpp"
#include "pairkg/prompt.hpp"
#include "pairkg/relation_filter.hpp"

namespace pairkg {

namespace {

using nlohmann::json;

namespace fs = std::filesystem;

const char* kFilterTemplate =
    "You are building a marketing knowledge graph.\n"
    "Source entity: {source}\n"
    "\xE2\x9F\xA6S\xE2\x9F\xA7Known facts about the source entity:\n"
    "{Struc_KG}\n"
    "\xE2\x9F\xA6/S\xE2\x9F\xA7\xE2\x9F\xA6""D\xE2\x9F\xA7""Background:\n"
    "{Desc_KG}\n"
    "\xE2\x9F\xA6/D\xE2\x9F\xA7""Candidate relations:\n"
    "{candidates}\n"
    "\n"
    "Keep only the candidate relations that are worth expanding for this source\n"
    "entity in a marketing context. Answer with a JSON object that maps each kept\n"
    "relation name to one example target entity.\n";

const char* kExpandTemplate =
    "You are expanding a marketing knowledge graph.\n"
    "Source entity: {source}\n"
    "Relation: {relation}\n"
    "\xE2\x9F\xA6S\xE2\x9F\xA7Known facts about the source entity:\n"
    "{Struc_KG}\n"
    "\xE2\x9F\xA6/S\xE2\x9F\xA7\xE2\x9F\xA6""D\xE2\x9F\xA7""Background:\n"
    "{Desc_KG}\n"
    "\xE2\x9F\xA6/D\xE2\x9F\xA7\xE2\x9F\xA6I\xE2\x9F\xA7""A known example target for this relation:\n"
    "{Inher_KG}\n"
    "\xE2\x9F\xA6/I\xE2\x9F\xA7"
    "\n"
    "List the target entities connected to the source entity through this\n"
    "relation. Answer with a JSON array of entity names only.\n";

std::vector<AggregatedTriple> first_seen_union(const std::string& source,
                                               const std::string& relation_id,
                                               const std::vector<ExpansionRound>& rounds,
                                               int cap) {
  std::vector<std::string> order;  // surface forms, first seen
  std::unordered_map<std::string, int> counts;
  for (const auto& round : rounds) {
    std::set<std::string> seen_this_round;
    for (const auto& t : round.targets) {
      std::string norm = normalize_name(t);
      if (norm.empty() || !seen_this_round.insert(norm).second) continue;
      auto [it, inserted] = counts.try_emplace(norm, 0);
      if (inserted) order.push_back(t);
      ++it->second;
    }
  }
  std::vector<AggregatedTriple> out;
  for (const auto& surface : order) {
    if (cap > 0 && out.size() >= static_cast<std::size_t>(cap)) break;
    AggregatedTriple at;
    at.source = source;
    at.relation = relation_id;
    at.target = surface;
    at.consistency = counts[normalize_name(surface)];
    at.relatedness = 1.0;
    at.tau = std::log1p(static_cast<double>(at.consistency));
    out.push_back(std::move(at));
  }
  return out;
}

std::string scorer_context(const PriorKnowledge& prior) {
  if (prior.descriptive) return prior.descriptive->text;
  if (prior.structural) {
    std::string out;
    for (const auto& [rel, neighbor] : prior.structural->neighbors) {
      if (!out.empty()) out += ", ";
      out += neighbor;
    }
    return out;
  }
  return {};
}

}  // namespace

const std::string& default_filter_template() {
  static const std::string t = kFilterTemplate;
  return t;
}

const std::string& default_expand_template() {
  static const std::string t = kExpandTemplate;
  return t;
}

PipelineConfig PipelineConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  json j = json::parse(ss.str(), nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    throw ConfigError("config file " + path + " is not a JSON object");
  }
  PipelineConfig c;
  c.kg_dir = j.value("kg_dir", c.kg_dir);
  c.descriptions_path = j.value("descriptions", c.descriptions_path);
  c.filter_template_path = j.value("filter_template", c.filter_template_path);
  c.expand_template_path = j.value("expand_template", c.expand_template_path);
  c.backend = j.value("backend", c.backend);
  c.remote_url = j.value("remote_url", c.remote_url);
  c.scorer = j.value("scorer", c.scorer);
  c.scorer_fallback = j.value("scorer_fallback", c.scorer_fallback);
  c.embedder = j.value("embedder", c.embedder);
  c.k = j.value("k", c.k);
  c.reps = j.value("reps", c.reps);
  c.parallelism = j.value("parallelism", c.parallelism);
  c.seed = j.value("seed", c.seed);
  c.out_dir = j.value("out_dir", c.out_dir);
  c.cache_dir = j.value("cache_dir", c.cache_dir);
  c.model_id = j.value("model_id", c.model_id);
  c.temperature = j.value("temperature", c.temperature);
  return c;
}

void PipelineConfig::validate() const {
  if (k < 1) throw ConfigError("k must be >= 1");
  if (reps < 1) throw ConfigError("reps must be >= 1");
  if (parallelism < 1) throw ConfigError("parallelism must be >= 1");
  if (backend.empty()) throw ConfigError("no backend selected");
  if (temperature < 0.0 || temperature > 2.0) {
    throw ConfigError("temperature must be in [0,2]");
  }
  if (embedder != "hashed") throw ConfigError("unknown embedder '" + embedder + "'");
  if (scorer != "lexical" && scorer.rfind("remote:", 0) != 0) {
    throw ConfigError("unknown scorer '" + scorer + "'");
  }
  if (!scorer_fallback.empty() && scorer_fallback != "lexical") {
    throw ConfigError("unknown scorer fallback '" + scorer_fallback + "'");
  }
}

BackendBundle make_backend(const PipelineConfig& config) {
  BackendBundle bundle;
  const std::string& spec = config.backend;
  if (spec.rfind("scripted:", 0) == 0) {
    bundle.backend = ScriptedBackend::load(spec.substr(9));
  } else if (spec.rfind("oracle:", 0) == 0) {
    SimConfig sim = SimConfig::from_file(spec.substr(7));
    SynthParams params = sim.synth;
    params.seed = config.seed != 0 ? config.seed : sim.seeds.front();
    OracleNoise noise = sim.noise;
    noise.rng_seed = params.seed;
    auto synth = std::make_shared<SyntheticKG>(generate_ground_truth(params));
    bundle.synthetic = synth;
    bundle.backend = std::make_shared<OracleBackend>(
        std::shared_ptr<const SyntheticKG>(synth), noise);
  } else if (spec == "remote" || spec.rfind("remote:", 0) == 0) {
    std::string url = spec == "remote" ? config.remote_url : spec.substr(7);
    if (url.empty()) throw ConfigError("remote backend needs a URL");
    bundle.backend = std::make_shared<RemoteBackend>(url);
  } else {
    throw ConfigError("unknown backend '" + spec + "'");
  }
  return bundle;
}

namespace {

// Sticky degrade: after the first remote failure all scoring goes lexical.
class FallbackScorer : public RelatednessScorer {
 public:
  FallbackScorer(std::unique_ptr<RelatednessScorer> primary,
                 std::unique_ptr<RelatednessScorer> fallback)
      : primary_(std::move(primary)), fallback_(std::move(fallback)) {}

  double score(const std::string& source, const std::string& relation_name,
               const std::string& target, const std::string& context) const override {
    if (!degraded_.load()) {
      try {
        return primary_->score(source, relation_name, target, context);
      } catch (const std::exception&) {
        degraded_.store(true);
      }
    }
    return fallback_->score(source, relation_name, target, context);
  }

 private:
  std::unique_ptr<RelatednessScorer> primary_;
  std::unique_ptr<RelatednessScorer> fallback_;
  mutable std::atomic<bool> degraded_{false};
};

}  // namespace

std::unique_ptr<RelatednessScorer> make_scorer(const std::string& spec,
                                               const std::string& fallback) {
  std::unique_ptr<RelatednessScorer> scorer;
  if (spec == "lexical") {
    scorer = std::make_unique<LexicalScorer>();
  } else if (spec.rfind("remote:", 0) == 0) {
    scorer = std::make_unique<RemoteScorer>(spec.substr(7));
  } else {
    throw ConfigError("unknown scorer '" + spec + "'");
  }
  if (fallback.empty()) return scorer;
  if (fallback != "lexical") throw ConfigError("unknown scorer fallback '" + fallback + "'");
  return std::make_unique<FallbackScorer>(std::move(scorer),
                                          std::make_unique<LexicalScorer>());
}

MineOutcome mine(const KnowledgeGraph& graph, const DocumentSource& docs,
                 const std::vector<std::string>& seeds, const LlmGateway& gateway,
                 const RelatednessScorer& scorer, const MineParams& params) {
  MineOutcome outcome;
  const bool use_filter = params.variant != PipelineVariant::NoAggPrRf;
  const VariantPolicy policy = (params.variant == PipelineVariant::Full ||
                                params.variant == PipelineVariant::NoAgg)
                                   ? VariantPolicy::All
                                   : VariantPolicy::RichestOnly;

  for (const auto& seed : seeds) {
    auto type = graph.entity_type_of(seed);
    if (!type) {
      outcome.skipped_seeds.push_back(seed);
      outcome.warnings.push_back("seed '" + seed + "' has no resolvable type");
      continue;
    }
    PriorKnowledge prior = assemble_prior(graph, docs, seed, std::nullopt);
    if (!prior.structural && !prior.descriptive) {
      outcome.skipped_seeds.push_back(seed);
      outcome.warnings.push_back("seed '" + seed + "' has no prior knowledge");
      continue;
    }
    std::vector<RelationDef> candidates = retrieve_candidate_relations(graph, *type);
    if (candidates.empty()) {
      outcome.skipped_seeds.push_back(seed);
      outcome.warnings.push_back("seed '" + seed + "' has no candidate relations");
      continue;
    }

    std::vector<FilteredRelation> kept;
    if (use_filter) {
      FilterOutcome fo = filter_relations(gateway, seed, prior, candidates,
                                          params.filter_template, params.model_id,
                                          params.temperature);
      for (const auto& w : fo.warnings) outcome.warnings.push_back(w);
      if (!fo.prompt.empty()) {
        TaskDescriptor d;
        d.task = TaskKind::RelationFilter;
        d.source = seed;
        d.knowledge.structural = prior.structural.has_value();
        d.knowledge.descriptive = prior.descriptive.has_value();
        outcome.traces.push_back(TraceRecord{d, fo.prompt, fo.raw_response});
      }
      kept = std::move(fo.kept);
    } else {
      for (const auto& c : candidates) kept.push_back(FilteredRelation{c.id, std::nullopt});
    }

    outcome.processed_seeds.push_back(seed);
    outcome.result.add_seed(seed);

    for (const auto& fr : kept) {
      PriorKnowledge rel_prior = prior;
      if (fr.hint_target) {
        rel_prior.inheritable = InheritableKnowledge{fr.relation, *fr.hint_target};
      }
      ExpansionResult er =
          expand(gateway, graph, seed, fr, rel_prior, params.reps, params.expand_template,
                 params.model_id, params.temperature, params.parallelism, policy);
      for (const auto& w : er.warnings) outcome.warnings.push_back(w);
      for (const auto& round : er.rounds) {
        TaskDescriptor d;
        d.task = TaskKind::EntityExpand;
        d.source = seed;
        d.relation = fr.relation;
        d.knowledge = round.subset;
        d.repetition = round.repetition;
        outcome.traces.push_back(TraceRecord{d, round.prompt, round.raw_response});
      }

      const RelationDef* rel = graph.relation_by_id(fr.relation);
      const std::string rel_name = rel ? rel->name : fr.relation;
      std::vector<AggregatedTriple> triples;
      switch (params.variant) {
        case PipelineVariant::Full:
          triples = aggregate(seed, fr.relation, rel_name, er.rounds, scorer,
                              scorer_context(rel_prior), params.k);
          break;
        case PipelineVariant::NoAgg:
          triples = first_seen_union(seed, fr.relation, er.rounds, params.k);
          break;
        case PipelineVariant::NoAggPr:
        case PipelineVariant::NoAggPrRf:
          triples = first_seen_union(seed, fr.relation, er.rounds, 0);
          break;
      }
      if (!triples.empty()) {
        outcome.result.by_seed[seed][fr.relation] = std::move(triples);
      }
    }
  }
  return outcome;
}

MiningResult load_mining_result(const std::string& result_path) {
  MiningResult result;
  std::vector<Triple> triples = load_triples_file(result_path);
  for (const auto& t : triples) {
    if (t.provenance != Provenance::Mined) {
      throw KgError(result_path + ": result file contains non-mined triples");
    }
    AggregatedTriple at;
    at.source = t.source;
    at.relation = t.relation;
    at.target = t.target;
    at.consistency = *t.consistency;
    at.tau = *t.score;
    at.relatedness =
        at.consistency > 0 ? at.tau / std::log1p(static_cast<double>(at.consistency)) : 1.0;
    result.add(at);
  }

  fs::path summary = fs::path(result_path).parent_path() / "summary.json";
  if (fs::exists(summary)) {
    std::ifstream in(summary);
    std::ostringstream ss;
    ss << in.rdbuf();
    json j = json::parse(ss.str(), nullptr, false);
    if (!j.is_discarded() && j.contains("processed")) {
      for (const auto& s : j["processed"]) result.add_seed(s.get<std::string>());
    }
  }
  return result;
}

namespace {

// Shared setup for commands that need the configured graph and documents.
struct Workspace {
  KnowledgeGraph graph;
  DocumentSource docs;
  BackendBundle bundle;
};

Workspace open_workspace(const PipelineConfig& config, bool need_backend) {
  Workspace ws;
  if (need_backend || config.backend.rfind("oracle:", 0) == 0) {
    ws.bundle = make_backend(config);
  }
  if (ws.bundle.synthetic) {
    ws.graph = ws.bundle.synthetic->visible;
    ws.docs = ws.bundle.synthetic->descriptions;
  } else {
    if (config.kg_dir.empty()) throw ConfigError("no kg_dir configured");
    ws.graph = load_kg(config.kg_dir);
    if (!config.descriptions_path.empty()) {
      ws.docs = DocumentSource::load(config.descriptions_path);
    }
  }
  return ws;
}

std::string template_or_default(const std::string& path, const std::string& fallback) {
  return path.empty() ? fallback : load_template_file(path);
}

}  // namespace

int cmd_mine(const CommandContext& ctx, std::string* error, std::string* summary_json) {
  try {
    const PipelineConfig& config = ctx.config;
    config.validate();
    Workspace ws = open_workspace(config, true);

    MineParams params;
    params.variant = PipelineVariant::Full;
    params.filter_template =
        template_or_default(config.filter_template_path, default_filter_template());
    params.expand_template =
        template_or_default(config.expand_template_path, default_expand_template());
    params.model_id = config.model_id;
    params.temperature = config.temperature;
    params.k = config.k;
    params.reps = config.reps;
    params.parallelism = config.parallelism;

    LlmGateway gateway(ws.bundle.backend,
                       config.cache_dir.empty()
                           ? std::nullopt
                           : std::optional<std::string>(config.cache_dir));
    auto scorer = make_scorer(config.scorer, config.scorer_fallback);

    MineOutcome outcome = mine(ws.graph, ws.docs, ctx.seeds, gateway, *scorer, params);

    fs::create_directories(config.out_dir);
    const std::string mined_path = (fs::path(config.out_dir) / "mined.jsonl").string();
    const std::string trace_path = (fs::path(config.out_dir) / "traces.jsonl").string();
    const std::string summary_path = (fs::path(config.out_dir) / "summary.json").string();

    // The result file describes this run; start it fresh, then append.
    std::ofstream(mined_path, std::ios::trunc).close();
    std::vector<Triple> batch;
    for (const auto& at : outcome.result.all_triples()) {
      Triple t;
      t.source = at.source;
      t.relation = at.relation;
      t.target = at.target;
      t.provenance = Provenance::Mined;
      t.score = at.tau;
      t.consistency = at.consistency;
      batch.push_back(std::move(t));
    }
    int appended = append_triples(ws.graph, batch, mined_path);
    save_traces(outcome.traces, trace_path);

    json summary;
    summary["processed"] = outcome.processed_seeds;
    summary["skipped"] = outcome.skipped_seeds;
    summary["warnings"] = outcome.warnings;
    summary["triples"] = outcome.result.triple_count();
    summary["appended"] = appended;
    {
      std::ofstream out(summary_path);
      out << summary.dump(2) << '\n';
    }
    if (summary_json) *summary_json = summary.dump(2);
    return (outcome.skipped_seeds.empty() && outcome.warnings.empty()) ? 0 : 2;
  } catch (const ConfigError& e) {
    if (error) *error = e.what();
    return 1;
  } catch (const std::exception& e) {
    if (error) *error = e.what();
    return 3;
  }
}

int cmd_eval(const PipelineConfig& config, const std::string& result_path,
             const std::string& annotations_path, std::string* error,
             std::string* report_json) {
  try {
    MiningResult result = load_mining_result(result_path);
    if (result.triple_count() == 0) {
      if (error) *error = "no mined triples in " + result_path;
      return 1;
    }
    Workspace ws = open_workspace(config, false);
    std::vector<AnnotationRecord> annotations;
    if (!annotations_path.empty()) annotations = load_annotations(annotations_path);
    HashedNgramEmbedder embedder;
    MetricsReport report = compute_metrics(result, ws.graph, embedder,
                                           annotations.empty() ? nullptr : &annotations);
    if (report_json) *report_json = report.to_json();
    return 0;
  } catch (const ConfigError& e) {
    if (error) *error = e.what();
    return 1;
  } catch (const std::exception& e) {
    if (error) *error = e.what();
    return 3;
  }
}

int cmd_export_sft(const PipelineConfig& config, const std::string& result_path,
                   const std::string& annotations_path, const std::string& out_path,
                   double split, std::string* error, std::string* summary_json) {
  try {
    if (split < 0.0 || split >= 1.0) throw ConfigError("split must be in [0,1)");
    MiningResult result = load_mining_result(result_path);
    std::vector<AnnotationRecord> annotations;
    if (!annotations_path.empty()) annotations = load_annotations(annotations_path);
    MiningResult kept = filter_bad_cases(result, annotations);

    const std::string trace_path =
        (fs::path(result_path).parent_path() / "traces.jsonl").string();
    std::vector<TraceRecord> traces = load_traces(trace_path);

    Workspace ws = open_workspace(config, false);
    SftExport exported = export_sft(traces, kept, ws.graph);

    std::size_t n_filter = 0, n_expand = 0;
    for (const auto& s : exported.samples) {
      (s.task == TaskKind::RelationFilter ? n_filter : n_expand)++;
    }

    if (split > 0.0) {
      std::vector<SftSample> shuffled =
          shuffle_for_annotation(exported.samples, config.seed);
      std::size_t n_val =
          static_cast<std::size_t>(std::floor(split * static_cast<double>(shuffled.size())));
      std::vector<SftSample> train(shuffled.begin(),
                                   shuffled.end() - static_cast<long>(n_val));
      std::vector<SftSample> val(shuffled.end() - static_cast<long>(n_val),
                                 shuffled.end());
      save_sft_corpus(train, out_path + ".train.jsonl");
      save_sft_corpus(val, out_path + ".val.jsonl");
    } else {
      save_sft_corpus(exported.samples, out_path);
    }

    json summary;
    summary["relation_filter_samples"] = n_filter;
    summary["entity_expand_samples"] = n_expand;
    summary["skipped_missing_trace"] = exported.skipped_missing_trace;
    summary["total"] = exported.samples.size();
    if (summary_json) *summary_json = summary.dump(2);
    return exported.skipped_missing_trace == 0 ? 0 : 2;
  } catch (const ConfigError& e) {
    if (error) *error = e.what();
    return 1;
  } catch (const std::exception& e) {
    if (error) *error = e.what();
    return 3;
  }
}

int cmd_simulate(const std::string& sim_config_path, const std::string& out_path,
                 std::string* error, std::string* report_json) {
  SimConfig config;
  try {
    config = SimConfig::from_file(sim_config_path);
  } catch (const std::exception& e) {
    if (error) *error = e.what();
    return 1;
  }
  try {
    std::vector<AblationRun> runs = run_ablation(config);
    std::string report = ablation_to_json(runs);
    if (!out_path.empty()) {
      std::ofstream out(out_path);
      if (!out) throw std::runtime_error("cannot write " + out_path);
      out << report << '\n';
    }
    if (report_json) *report_json = report;
    return 0;
  } catch (const std::exception& e) {
    if (error) *error = e.what();
    return 3;
  }
}

}  // namespace pairkg
