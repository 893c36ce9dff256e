// Acceptance suite: one pass/fail line per criterion, exit code = failures.

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "pairkg/aggregate.hpp"
#include "pairkg/expand.hpp"
#include "pairkg/kg.hpp"
#include "pairkg/metrics.hpp"
#include "pairkg/normalize.hpp"
#include "pairkg/pairkg.h"
#include "pairkg/pipeline.hpp"
#include "pairkg/relation_filter.hpp"
#include "pairkg/sim.hpp"

using namespace pairkg;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

class Criterion {
 public:
  explicit Criterion(std::string name)
      : name_(std::move(name)), start_(std::chrono::steady_clock::now()) {}

  void expect(bool ok, const std::string& detail) {
    if (!ok && failure_.empty()) failure_ = detail;
    ok_ = ok_ && ok;
  }

  void finish(double time_limit_s = 0.0) {
    double t = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_)
                   .count();
    if (time_limit_s > 0.0 && t > time_limit_s) {
      ok_ = false;
      if (failure_.empty()) {
        failure_ = "took " + std::to_string(t) + "s, limit " +
                   std::to_string(time_limit_s) + "s";
      }
    }
    if (ok_) {
      std::printf("PASS  %-34s (%.2fs)\n", name_.c_str(), t);
    } else {
      std::printf("FAIL  %-34s (%.2fs): %s\n", name_.c_str(), t, failure_.c_str());
      ++g_failures;
    }
    std::fflush(stdout);
  }

 private:
  std::string name_;
  std::chrono::steady_clock::time_point start_;
  bool ok_ = true;
  std::string failure_;
};

// Deterministic pseudo-random relatedness in (0, 1], salted per fixture.
class SaltedScorer : public RelatednessScorer {
 public:
  explicit SaltedScorer(std::uint64_t salt) : salt_(salt) {}
  double score(const std::string&, const std::string&, const std::string& target,
               const std::string&) const override {
    std::uint64_t h = salt_ ^ 1469598103934665603ULL;
    for (unsigned char c : normalize_name(target)) {
      h ^= c;
      h *= 1099511628211ULL;
    }
    return (static_cast<double>(h % 997) + 1.0) / 997.0;
  }

 private:
  std::uint64_t salt_;
};

class CountingBackend : public LlmBackend {
 public:
  explicit CountingBackend(std::shared_ptr<LlmBackend> inner) : inner_(std::move(inner)) {}
  std::string tag() const override { return inner_->tag(); }
  std::string complete(const LlmRequest& request) override {
    ++calls_;
    return inner_->complete(request);
  }
  long calls() const { return calls_.load(); }

 private:
  std::shared_ptr<LlmBackend> inner_;
  std::atomic<long> calls_{0};
};

ExpansionRound make_round(std::vector<std::string> targets, int rep = 0) {
  ExpansionRound r;
  r.subset = KnowledgeFlags::from_tag("S");
  r.repetition = rep;
  r.targets = std::move(targets);
  return r;
}

std::vector<ExpansionRound> random_rounds(std::mt19937_64& gen, int max_rounds,
                                          int universe) {
  std::vector<ExpansionRound> rounds;
  int n = 1 + static_cast<int>(gen() % max_rounds);
  for (int i = 0; i < n; ++i) {
    std::vector<std::string> targets;
    int m = static_cast<int>(gen() % 10);
    for (int j = 0; j < m; ++j) {
      targets.push_back("t" + std::to_string(gen() % universe));
    }
    rounds.push_back(make_round(targets, i));
  }
  return rounds;
}

// Full-sort reference for aggregate(), no truncation.
std::vector<std::tuple<double, int, std::string>> oracle_ranking(
    const std::vector<ExpansionRound>& rounds, const RelatednessScorer& scorer,
    const std::string& source, const std::string& rel_name, const std::string& ctx) {
  std::map<std::string, int> counts;
  for (const auto& r : rounds) {
    std::set<std::string> seen;
    for (const auto& t : r.targets) {
      std::string norm = normalize_name(t);
      if (!norm.empty() && seen.insert(norm).second) counts[norm]++;
    }
  }
  std::vector<std::tuple<double, int, std::string>> ranked;
  for (const auto& [norm, c] : counts) {
    double tau = std::log(1.0 + c) * scorer.score(source, rel_name, norm, ctx);
    ranked.emplace_back(tau, c, norm);
  }
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (std::get<0>(a) != std::get<0>(b)) return std::get<0>(a) > std::get<0>(b);
    if (std::get<1>(a) != std::get<1>(b)) return std::get<1>(a) > std::get<1>(b);
    return std::get<2>(a) < std::get<2>(b);
  });
  return ranked;
}

fs::path fresh_dir(const std::string& tag) {
  fs::path dir = fs::temp_directory_path() / ("pairkg_acc_" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void criterion_tau_exactness() {
  Criterion c("tau-score-exactness");
  std::mt19937_64 gen(1001);
  for (int iter = 0; iter < 1000; ++iter) {
    SaltedScorer scorer(gen());
    auto rounds = random_rounds(gen, 8, 14);
    int k = 1 + static_cast<int>(gen() % 10);
    auto out = aggregate("src", "r1", "rel", rounds, scorer, "ctx", k);
    auto oracle = oracle_ranking(rounds, scorer, "src", "rel", "ctx");

    c.expect(
        out.size() == std::min<std::size_t>(oracle.size(), static_cast<std::size_t>(k)),
        "top-K size mismatch");
    for (std::size_t i = 0; i < out.size(); ++i) {
      int count = consistency_count(out[i].target, rounds);
      double expected = std::log(1.0 + count) * out[i].relatedness;
      c.expect(std::abs(out[i].tau - expected) <= 1e-12, "tau differs from ln(1+c)*s");
      c.expect(out[i].consistency == count, "consistency differs from recount");
      c.expect(normalize_name(out[i].target) == std::get<2>(oracle[i]),
               "top-K selection differs from full-sort oracle");
      c.expect(std::abs(out[i].tau - std::get<0>(oracle[i])) <= 1e-12,
               "tau differs from oracle");
    }
  }
  c.finish(5.0);
}

void criterion_monotonicity() {
  Criterion c("self-consistency-monotonicity");
  std::mt19937_64 gen(2002);
  const int kBig = 1000000;
  int checked = 0;
  while (checked < 500) {
    SaltedScorer scorer(gen());
    auto rounds = random_rounds(gen, 6, 10);

    std::set<std::string> present;
    for (const auto& r : rounds) {
      for (const auto& t : r.targets) present.insert(normalize_name(t));
    }
    if (present.size() < 2) continue;
    std::vector<std::string> names(present.begin(), present.end());
    std::string t = names[gen() % names.size()];
    std::string u;
    do {
      u = names[gen() % names.size()];
    } while (u == t);

    auto before = aggregate("s", "r", "rel", rounds, scorer, "ctx", kBig);
    auto pos = [&](const std::vector<AggregatedTriple>& list, const std::string& norm) {
      for (std::size_t i = 0; i < list.size(); ++i) {
        if (normalize_name(list[i].target) == norm) return static_cast<long>(i);
      }
      return -1L;
    };
    long t_before = pos(before, t), u_before = pos(before, u);

    // a new round containing t plus arbitrary extras, never u
    std::vector<std::string> extra{t};
    int m = static_cast<int>(gen() % 4);
    for (int j = 0; j < m; ++j) {
      std::string cand = "t" + std::to_string(gen() % 10);
      if (normalize_name(cand) != u) extra.push_back(cand);
    }
    auto grown = rounds;
    grown.push_back(make_round(extra, static_cast<int>(rounds.size())));
    auto after = aggregate("s", "r", "rel", grown, scorer, "ctx", kBig);
    long t_after = pos(after, t), u_after = pos(after, u);

    c.expect(t_before >= 0 && u_before >= 0 && t_after >= 0 && u_after >= 0,
             "target vanished from full ranking");
    if (t_before >= 0 && t_after >= 0) {
      c.expect(after[static_cast<std::size_t>(t_after)].tau >=
                   before[static_cast<std::size_t>(t_before)].tau - 1e-12,
               "tau decreased after adding a supporting round");
    }
    if (t_before < u_before) {
      c.expect(t_after < u_after, "rank vs absent target got worse");
    }
    ++checked;
  }
  c.finish(5.0);
}

void criterion_zero_count_exclusion() {
  Criterion c("zero-count-exclusion");
  std::mt19937_64 gen(3003);
  for (int iter = 0; iter < 200; ++iter) {
    SaltedScorer scorer(gen());
    auto rounds = random_rounds(gen, 6, 8);  // universe t0..t7
    std::set<std::string> observed;
    for (const auto& r : rounds) {
      for (const auto& t : r.targets) observed.insert(normalize_name(t));
    }
    auto out = aggregate("s", "r", "rel", rounds, scorer, "ctx", 1000000);
    for (const auto& at : out) {
      c.expect(observed.count(normalize_name(at.target)) == 1,
               "unobserved target emitted");
      c.expect(at.consistency >= 1, "zero-count triple emitted");
    }
    for (int j = 8; j < 20; ++j) {  // names outside the universe
      std::string never = "t" + std::to_string(j);
      for (const auto& at : out) {
        c.expect(normalize_name(at.target) != never, "never-observed target emitted");
      }
    }
  }
  c.finish(0.0);
}

void criterion_ilad_oracle() {
  Criterion c("ilad-oracle-equivalence");
  class TwoPoint : public VectorEmbedder {
   public:
    std::vector<double> embed(const std::string& text) const override {
      return normalize_name(text) == "a" ? std::vector<double>{0, 0}
                                         : std::vector<double>{3, 4};
    }
  };
  AggregatedTriple at;
  at.source = "seed";
  at.relation = "r";
  at.consistency = 1;
  at.relatedness = 1.0;
  at.tau = std::log(2.0);

  MiningResult pair;
  at.target = "a";
  pair.add(at);
  at.target = "b";
  pair.add(at);
  c.expect(ilad(pair, TwoPoint{}) == 5.0, "(0,0)/(3,4) pair is not exactly 5.0");

  class TableEmbedder : public VectorEmbedder {
   public:
    std::map<std::string, std::vector<double>> table;
    std::vector<double> embed(const std::string& text) const override {
      return table.at(normalize_name(text));
    }
  };

  std::mt19937_64 gen(4004);
  for (int iter = 0; iter < 200; ++iter) {
    int n = 2 + static_cast<int>(gen() % 11);  // 2..12 targets
    int dim = 2 + static_cast<int>(gen() % 6);
    TableEmbedder embedder;
    MiningResult result;
    std::vector<std::vector<double>> vecs;
    for (int i = 0; i < n; ++i) {
      std::vector<double> v(static_cast<std::size_t>(dim));
      for (auto& x : v) x = (static_cast<double>(gen() % 20000) - 10000.0) / 1000.0;
      std::string name = "t" + std::to_string(i);
      embedder.table[name] = v;
      vecs.push_back(v);
      at.target = name;
      result.add(at);
    }
    double sum = 0;
    int pairs = 0;
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        double d2 = 0;
        for (int k = 0; k < dim; ++k) {
          d2 += (vecs[i][k] - vecs[j][k]) * (vecs[i][k] - vecs[j][k]);
        }
        sum += std::sqrt(d2);
        ++pairs;
      }
    }
    double brute = sum / pairs;
    c.expect(std::abs(ilad(result, embedder) - brute) <= 1e-9,
             "ILAD differs from O(n^2) brute force");
  }
  c.finish(0.0);
}

void criterion_metric_edge_cases() {
  Criterion c("metric-edge-cases");
  AggregatedTriple at;
  at.relation = "r";
  at.consistency = 1;
  at.relatedness = 1.0;
  at.tau = std::log(2.0);

  // AEE includes zero-target seeds in the denominator
  MiningResult two;
  at.source = "rich";
  for (int i = 0; i < 10; ++i) {
    at.target = "t" + std::to_string(i);
    two.add(at);
  }
  two.add_seed("poor");
  c.expect(std::abs(aee(two) - 5.0) < 1e-12, "AEE does not include zero-target seeds");

  // ILAD excludes seeds with fewer than two targets from the outer mean
  HashedNgramEmbedder embedder;
  MiningResult lonely;
  at.source = "solo";
  at.target = "only one";
  lonely.add(at);
  c.expect(ilad(lonely, embedder) == 0.0, "ILAD counted a one-target seed");

  MiningResult pair_only;
  at.source = "pair";
  at.target = "alpha beta gamma";
  pair_only.add(at);
  at.target = "delta epsilon zeta";
  pair_only.add(at);
  MiningResult mixed = pair_only;
  at.source = "solo";
  at.target = "only one";
  mixed.add(at);
  c.expect(std::abs(ilad(mixed, embedder) - ilad(pair_only, embedder)) < 1e-12,
           "ILAD outer mean counted a <2-target seed");

  // novelty is normalization-invariant and duplicate-invariant
  KnowledgeGraph base;
  base.add_entity({"e1", "Air", "Brand", {}});
  base.add_relation({"r", "rel", {"Brand"}});
  c.expect(base.contains_entity("  AIR ") && base.contains_entity("Air"),
           "contains_entity not normalization-invariant");
  MiningResult known;
  at.source = "s";
  at.target = "  AIR ";
  known.add(at);
  c.expect(novelty(known, base) == 0.0, "normalized form counted as novel");

  MiningResult dup;
  at.target = "Novel Thing";
  dup.add(at);
  at.target = "novel thing";
  dup.add(at);
  at.target = "Air";
  dup.add(at);
  c.expect(std::abs(novelty(dup, base) - 0.5) < 1e-12, "novelty not duplicate-invariant");
  c.finish(0.0);
}

void criterion_majority_vote() {
  Criterion c("majority-vote");
  const Label A = Label::Accept, R = Label::Reject;
  for (int bits = 0; bits < 8; ++bits) {
    std::vector<Label> labels;
    int accepts = 0;
    for (int i = 0; i < 3; ++i) {
      bool accept = (bits >> i) & 1;
      labels.push_back(accept ? A : R);
      accepts += accept ? 1 : 0;
    }
    Verdict expected = accepts >= 2 ? Verdict::Accepted : Verdict::Rejected;
    c.expect(majority_vote(labels) == expected, "2^3 case disagrees with >=2 rule");
  }
  c.expect(majority_vote({}) == Verdict::Undecided, "empty labels decided");
  c.expect(majority_vote({A}) == Verdict::Undecided, "single accept decided");
  c.expect(majority_vote({R}) == Verdict::Undecided, "single reject decided");
  c.expect(majority_vote({A, A}) == Verdict::Accepted, "two accepts not accepted");
  c.expect(majority_vote({R, R}) == Verdict::Rejected, "two rejects not rejected");
  c.expect(majority_vote({A, R}) == Verdict::Undecided, "split pair decided");
  c.finish(0.0);
}

void criterion_containment_chain() {
  Criterion c("containment-chain");
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    SynthParams params;
    params.n_entities = 30;
    params.n_types = 2;
    params.n_relations = 5;
    params.seed = seed;
    SyntheticKG synth = generate_ground_truth(params);
    OracleNoise noise{0.6, 0.5, 0.2, seed};
    LlmGateway gateway(std::make_shared<OracleBackend>(synth, noise));
    LexicalScorer scorer;

    MineParams mp;
    mp.filter_template = default_filter_template();
    mp.expand_template = default_expand_template();
    mp.reps = 2;
    auto seeds = eligible_seeds(synth);
    seeds.resize(std::min<std::size_t>(seeds.size(), 3));
    MineOutcome outcome =
        mine(synth.visible, synth.descriptions, seeds, gateway, scorer, mp);
    c.expect(outcome.result.triple_count() > 0, "run mined nothing");

    for (const auto& t : outcome.result.all_triples()) {
      auto type = synth.visible.entity_type_of(t.source);
      c.expect(type.has_value(), "mined source has no type");
      if (!type) continue;
      bool in_candidates = false;
      for (const auto& r : retrieve_candidate_relations(synth.visible, *type)) {
        if (r.id == t.relation) in_candidates = true;
      }
      c.expect(in_candidates, "mined relation outside the candidate set");
    }

    // filter output is a subset of its candidate set
    const std::string& source = seeds.front();
    auto type = synth.visible.entity_type_of(source);
    auto candidates = retrieve_candidate_relations(synth.visible, *type);
    PriorKnowledge prior =
        assemble_prior(synth.visible, synth.descriptions, source, std::nullopt);
    FilterOutcome fo = filter_relations(gateway, source, prior, candidates,
                                        default_filter_template(), "m", 0.0);
    std::set<std::string> candidate_ids;
    for (const auto& r : candidates) candidate_ids.insert(r.id);
    for (const auto& fr : fo.kept) {
      c.expect(candidate_ids.count(fr.relation) == 1, "filter kept a non-candidate");
    }
  }
  c.finish(0.0);
}

void criterion_round_accounting() {
  Criterion c("round-accounting");
  KnowledgeGraph g;
  g.add_entity({"air", "Air", "Brand", {}});
  g.add_relation({"r1", "related brand", {"Brand"}});

  auto scripted = std::make_shared<ScriptedBackend>();
  for (const char* tag : {"S", "D", "I", "SD", "SI", "DI", "SDI"}) {
    for (int rep = 0; rep < 3; ++rep) {
      scripted->add(TaskDescriptor{TaskKind::EntityExpand, "Air", "r1",
                                   KnowledgeFlags::from_tag(tag), rep},
                    "[\"Nike\"]");
    }
  }

  PriorKnowledge full;
  full.structural = StructuralKnowledge{"Brand", {{"related brand", "Nike"}}};
  full.descriptive = DescriptiveKnowledge{"Air is a sneaker brand.", "wiki"};
  full.inheritable = InheritableKnowledge{"r1", "Nike"};
  auto counting = std::make_shared<CountingBackend>(scripted);
  LlmGateway gateway(counting);
  auto res = expand(gateway, g, "Air", FilteredRelation{"r1", "Nike"}, full, 3,
                    default_expand_template(), "m", 0.0, 4);
  c.expect(counting->calls() == 21, "full knowledge did not make exactly 21 calls");
  c.expect(res.rounds.size() == 21, "full knowledge did not record 21 rounds");

  PriorKnowledge s_only;
  s_only.structural = StructuralKnowledge{"Brand", {}};
  auto counting2 = std::make_shared<CountingBackend>(scripted);
  LlmGateway gateway2(counting2);
  auto res2 = expand(gateway2, g, "Air", FilteredRelation{"r1", std::nullopt}, s_only, 3,
                     default_expand_template(), "m", 0.0, 1);
  c.expect(counting2->calls() == 3, "structural-only did not make exactly 3 calls");
  c.expect(res2.rounds.size() == 3, "structural-only did not record 3 rounds");
  c.finish(0.0);
}

void criterion_determinism() {
  Criterion c("mine-determinism");
  fs::path dir = fresh_dir("determinism");

  // 200-entity synthetic KG driven through the C API.
  std::string sim_path = (dir / "sim.json").string();
  {
    std::ofstream out(sim_path);
    out << R"({"n_entities":200,"n_types":4,"n_relations":12,"hidden_fraction":0.3,)"
        << R"("noise":{"hallucination_rate_base":0.6,"knowledge_discount":0.5,)"
        << R"("omission_rate":0.2},"seeds":[1],"K":8,"reps":3})";
  }
  SimConfig sim = SimConfig::from_file(sim_path);
  SynthParams params = sim.synth;
  params.seed = 1;
  auto seed_names = eligible_seeds(generate_ground_truth(params));
  seed_names.resize(std::min<std::size_t>(seed_names.size(), 60));

  auto run = [&](const std::string& out_name, const char* parallelism) {
    pairkg_config* config = pairkg_config_new();
    pairkg_config_set(config, "backend", ("oracle:" + sim_path).c_str());
    pairkg_config_set(config, "out_dir", (dir / out_name).string().c_str());
    pairkg_config_set(config, "parallelism", parallelism);
    pairkg_config_set(config, "seed", "1");
    std::vector<const char*> raw;
    for (const auto& s : seed_names) raw.push_back(s.c_str());
    pairkg_status status = pairkg_mine(config, raw.data(), raw.size(), nullptr);
    pairkg_config_free(config);
    c.expect(status == PAIRKG_OK, std::string("mine failed: ") + pairkg_last_error());
    return slurp(dir / out_name / "mined.jsonl");
  };

  std::string p1_a = run("p1_a", "1");
  std::string p1_b = run("p1_b", "1");
  std::string p8_a = run("p8_a", "8");
  std::string p8_b = run("p8_b", "8");
  c.expect(!p1_a.empty(), "empty result file");
  c.expect(p1_a == p1_b, "two serial runs differ");
  c.expect(p8_a == p8_b, "two parallel runs differ");
  c.expect(p1_a == p8_a, "parallelism changed the result bytes");

  // scripted backend determinism
  fs::path script = dir / "script.jsonl";
  {
    std::ofstream out(script);
    out << R"({"task":"relation_filter","source":"Air","flags":"S","repetition":0,)"
        << R"("response":"{\"related brand\":\"Nike\"}"})" << "\n";
    for (int rep = 0; rep < 3; ++rep) {
      out << R"({"task":"entity_expand","source":"Air","relation":"r1","flags":"S",)"
          << R"("repetition":)" << rep << R"(,"response":"[\"Nike\",\"Adidas\"]"})"
          << "\n";
      out << R"({"task":"entity_expand","source":"Air","relation":"r1","flags":"SI",)"
          << R"("repetition":)" << rep << R"(,"response":"[\"Nike\",\"Puma\"]"})"
          << "\n";
      out << R"({"task":"entity_expand","source":"Air","relation":"r1","flags":"I",)"
          << R"("repetition":)" << rep << R"(,"response":"[\"Reebok\"]"})" << "\n";
    }
  }
  fs::path kg_dir = dir / "kg";
  fs::create_directories(kg_dir);
  std::ofstream(kg_dir / "entities.jsonl")
      << R"({"id":"e1","name":"Air","type":"Brand","aliases":[]})" << "\n";
  std::ofstream(kg_dir / "relations.jsonl")
      << R"({"id":"r1","name":"related brand","applicable_types":["Brand"]})" << "\n";
  std::ofstream(kg_dir / "triples.jsonl") << "";

  auto run_scripted = [&](const std::string& out_name, const char* parallelism) {
    pairkg_config* config = pairkg_config_new();
    pairkg_config_set(config, "backend", ("scripted:" + script.string()).c_str());
    pairkg_config_set(config, "kg_dir", kg_dir.string().c_str());
    pairkg_config_set(config, "out_dir", (dir / out_name).string().c_str());
    pairkg_config_set(config, "parallelism", parallelism);
    const char* seed_list[] = {"Air"};
    pairkg_status status = pairkg_mine(config, seed_list, 1, nullptr);
    pairkg_config_free(config);
    c.expect(status == PAIRKG_OK,
             std::string("scripted mine failed: ") + pairkg_last_error());
    return slurp(dir / out_name / "mined.jsonl");
  };
  std::string s1 = run_scripted("script_a", "1");
  std::string s2 = run_scripted("script_b", "8");
  c.expect(!s1.empty() && s1 == s2, "scripted runs differ");
  c.finish(30.0);
}

void criterion_ablation_ordering() {
  Criterion c("ablation-ordering");
  SimConfig config;  // defaults: 200 entities, base 0.6 / discount 0.5 / omission 0.2
  auto runs = run_ablation(config);
  c.expect(runs.size() == 5, "expected 5 seeds");

  int chain_ok = 0, aee_ok = 0;
  for (const auto& run : runs) {
    auto acc = [&](PipelineVariant v) { return *run.reports.at(v).accuracy; };
    auto aee_of = [&](PipelineVariant v) { return run.reports.at(v).aee; };
    bool chain = acc(PipelineVariant::Full) > acc(PipelineVariant::NoAgg) &&
                 acc(PipelineVariant::NoAgg) > acc(PipelineVariant::NoAggPr) &&
                 acc(PipelineVariant::NoAggPr) > acc(PipelineVariant::NoAggPrRf);
    bool aee_max = aee_of(PipelineVariant::NoAggPrRf) > aee_of(PipelineVariant::Full) &&
                   aee_of(PipelineVariant::NoAggPrRf) > aee_of(PipelineVariant::NoAgg) &&
                   aee_of(PipelineVariant::NoAggPrRf) > aee_of(PipelineVariant::NoAggPr);
    chain_ok += chain ? 1 : 0;
    aee_ok += aee_max ? 1 : 0;
  }
  c.expect(chain_ok >= 4,
           "accuracy chain held in only " + std::to_string(chain_ok) + " of 5 seeds");
  c.expect(aee_ok >= 4, "AEE max held in only " + std::to_string(aee_ok) + " of 5 seeds");
  c.finish(120.0);
}

void criterion_noiseless_sanity() {
  Criterion c("noiseless-oracle-sanity");
  SimConfig config;
  config.noise = OracleNoise{0.0, 0.0, 0.0, 0};
  config.seeds = {1};
  config.max_seed_entities = 40;
  auto runs = run_ablation(config);
  c.expect(runs.size() == 1, "expected one run");
  for (const auto& [variant, report] : runs[0].reports) {
    c.expect(report.accuracy.has_value() && *report.accuracy == 1.0,
             std::string(variant_name(variant)) + " accuracy below 1.0 with zero noise");
  }
  c.finish(0.0);
}

void criterion_sft_round_trip() {
  Criterion c("sft-round-trip");
  std::mt19937_64 gen(7007);
  KnowledgeGraph g;
  g.add_entity({"e", "Seed", "Brand", {}});
  for (int r = 0; r < 4; ++r) {
    g.add_relation({"r" + std::to_string(r), "relation " + std::to_string(r), {"Brand"}});
  }

  for (int iter = 0; iter < 100; ++iter) {
    int n_seeds = 1 + static_cast<int>(gen() % 3);
    MiningResult result;
    std::vector<TraceRecord> traces;
    std::vector<AnnotationRecord> annotations;
    std::set<std::string> rejected_targets;

    for (int s = 0; s < n_seeds; ++s) {
      std::string seed = "seed-" + std::to_string(s);
      TraceRecord rf;
      rf.descriptor.task = TaskKind::RelationFilter;
      rf.descriptor.source = seed;
      rf.descriptor.knowledge = KnowledgeFlags::from_tag("SD");
      rf.prompt = "filter prompt for " + seed;
      traces.push_back(rf);

      int n_rels = 1 + static_cast<int>(gen() % 3);
      for (int r = 0; r < n_rels; ++r) {
        std::string rel = "r" + std::to_string(r);
        TraceRecord ee;
        ee.descriptor.task = TaskKind::EntityExpand;
        ee.descriptor.source = seed;
        ee.descriptor.relation = rel;
        ee.descriptor.knowledge = KnowledgeFlags::from_tag(gen() % 2 ? "SDI" : "SD");
        ee.prompt = "expand " + seed + " " + rel;
        traces.push_back(ee);

        int n_targets = 1 + static_cast<int>(gen() % 8);
        for (int t = 0; t < n_targets; ++t) {
          AggregatedTriple at;
          at.source = seed;
          at.relation = rel;
          at.target = "target-" + std::to_string(s) + "-" + std::to_string(r) + "-" +
                      std::to_string(t);
          at.consistency = 1 + static_cast<int>(gen() % 5);
          at.relatedness = 0.5;
          at.tau = std::log(1.0 + at.consistency) * 0.5;
          result.add(at);
          if (gen() % 4 == 0) {
            AnnotationRecord rej;
            rej.source = at.source;
            rej.relation = at.relation;
            rej.target = at.target;
            rej.labels = {{"a", Label::Reject}, {"b", Label::Reject}};
            annotations.push_back(rej);
            rejected_targets.insert(at.target);
          }
        }
      }
    }

    MiningResult kept = filter_bad_cases(result, annotations);
    SftExport exported = export_sft(traces, kept, g);
    c.expect(exported.skipped_missing_trace == 0, "traces went missing");

    for (const auto& sample : exported.samples) {
      for (const auto& bad : rejected_targets) {
        c.expect(sample.response.find(bad) == std::string::npos,
                 "rejected target leaked into a response");
      }
      if (sample.task == TaskKind::EntityExpand) {
        auto parsed = parse_entity_list(sample.response);
        bool matched = false;
        for (const auto& [seed, rels] : kept.by_seed) {
          for (const auto& [rel, triples] : rels) {
            if (sample.question != "expand " + seed + " " + rel) continue;
            matched = true;
            c.expect(parsed.size() == triples.size(), "response length differs");
            for (std::size_t i = 0; i < std::min(parsed.size(), triples.size()); ++i) {
              c.expect(parsed[i] == triples[i].target,
                       "response round-trip differs from kept targets");
            }
          }
        }
        c.expect(matched, "expand sample with unknown question");
      }
    }
  }
  c.finish(0.0);
}

void criterion_kg_round_trip() {
  Criterion c("kg-round-trip");
  std::mt19937_64 gen(9009);
  for (int iter = 0; iter < 50; ++iter) {
    KnowledgeGraph g;
    int n_types = 2 + static_cast<int>(gen() % 3);
    int n_ent = 5 + static_cast<int>(gen() % 20);
    for (int i = 0; i < n_ent; ++i) {
      Entity e;
      e.id = "e" + std::to_string(i);
      e.name = "Entity " + std::to_string(i);
      e.entity_type = "T" + std::to_string(gen() % n_types);
      if (gen() % 3 == 0) e.aliases.push_back("alias " + std::to_string(i));
      g.add_entity(e);
    }
    int n_rel = 1 + static_cast<int>(gen() % 4);
    for (int r = 0; r < n_rel; ++r) {
      RelationDef rd;
      rd.id = "r" + std::to_string(r);
      rd.name = "relation " + std::to_string(r);
      for (int t = 0; t < n_types; ++t) {
        if (gen() % 2) rd.applicable_types.push_back("T" + std::to_string(t));
      }
      if (rd.applicable_types.empty()) rd.applicable_types.push_back("T0");
      g.add_relation(rd);
    }
    int n_triples = static_cast<int>(gen() % 40);
    for (int i = 0; i < n_triples; ++i) {
      Triple t;
      t.source = "Entity " + std::to_string(gen() % n_ent);
      t.relation = "r" + std::to_string(gen() % n_rel);
      t.target = "Entity " + std::to_string(gen() % n_ent);
      if (gen() % 4 == 0) {
        t.provenance = Provenance::Mined;
        t.consistency = 1 + static_cast<int>(gen() % 5);
        t.score = std::log(1.0 + *t.consistency) * 0.5;
      }
      g.add_triple(t);
    }

    fs::path dir = fresh_dir("rt");
    save_kg(g, dir.string());
    KnowledgeGraph g2 = load_kg(dir.string());

    auto entity_key = [](const Entity& e) {
      std::string k = e.id + "|" + e.name + "|" + e.entity_type;
      for (const auto& a : e.aliases) k += "|" + a;
      return k;
    };
    auto relation_key = [](const RelationDef& r) {
      std::string k = r.id + "|" + r.name;
      for (const auto& t : r.applicable_types) k += "|" + t;
      return k;
    };
    auto triple_key = [](const Triple& t) {
      std::string k = t.source + "|" + t.relation + "|" + t.target + "|" +
                      (t.provenance == Provenance::Mined ? "M" : "B");
      if (t.consistency) k += "|" + std::to_string(*t.consistency);
      return k;
    };
    std::multiset<std::string> e1, e2, r1, r2, t1, t2;
    for (const auto& e : g.entities()) e1.insert(entity_key(e));
    for (const auto& e : g2.entities()) e2.insert(entity_key(e));
    for (const auto& r : g.relations()) r1.insert(relation_key(r));
    for (const auto& r : g2.relations()) r2.insert(relation_key(r));
    for (const auto& t : g.triples()) t1.insert(triple_key(t));
    for (const auto& t : g2.triples()) t2.insert(triple_key(t));
    c.expect(e1 == e2, "entity multisets differ");
    c.expect(r1 == r2, "relation multisets differ");
    c.expect(t1 == t2, "triple multisets differ");
  }
  c.finish(0.0);
}

}  // namespace

int main() {
  criterion_tau_exactness();
  criterion_monotonicity();
  criterion_zero_count_exclusion();
  criterion_ilad_oracle();
  criterion_metric_edge_cases();
  criterion_majority_vote();
  criterion_containment_chain();
  criterion_round_accounting();
  criterion_determinism();
  criterion_ablation_ordering();
  criterion_noiseless_sanity();
  criterion_sft_round_trip();
  criterion_kg_round_trip();

  if (g_failures == 0) {
    std::printf("all acceptance criteria passed\n");
  } else {
    std::printf("%d acceptance criteria FAILED\n", g_failures);
  }
  return g_failures;
}
