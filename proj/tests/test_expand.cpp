#include <doctest.h>

#include <memory>
#include <set>

#include "pairkg/expand.hpp"
#include "pairkg/pipeline.hpp"

using namespace pairkg;

namespace {

KnowledgeGraph tiny_graph() {
  KnowledgeGraph g;
  g.add_entity({"air", "Air", "Brand", {}});
  g.add_relation({"r1", "related brand", {"Brand"}});
  return g;
}

PriorKnowledge full_prior() {
  PriorKnowledge p;
  p.structural = StructuralKnowledge{"Brand", {{"related brand", "Nike"}}};
  p.descriptive = DescriptiveKnowledge{"Air is a sneaker brand.", "wiki"};
  p.inheritable = InheritableKnowledge{"r1", "Nike"};
  return p;
}

// Scripted responses for every (variant, rep) combination.
std::shared_ptr<ScriptedBackend> scripted_all(const PriorKnowledge& prior, int reps,
                                              const std::string& reply) {
  auto backend = std::make_shared<ScriptedBackend>();
  KnowledgeFlags available;
  available.structural = prior.structural.has_value();
  available.descriptive = prior.descriptive.has_value();
  available.inheritable = prior.inheritable.has_value();
  for (const auto& subset : enumerate_prompt_variants(available)) {
    for (int rep = 0; rep < reps; ++rep) {
      backend->add(TaskDescriptor{TaskKind::EntityExpand, "Air", "r1", subset, rep}, reply);
    }
  }
  return backend;
}

}  // namespace

TEST_CASE("enumerate_prompt_variants is canonical coarse-to-fine") {
  auto all = enumerate_prompt_variants(KnowledgeFlags::from_tag("SDI"));
  REQUIRE(all.size() == 7);
  std::vector<std::string> tags;
  for (const auto& f : all) tags.push_back(f.tag());
  CHECK(tags == std::vector<std::string>{"S", "D", "I", "SD", "SI", "DI", "SDI"});

  auto only_s = enumerate_prompt_variants(KnowledgeFlags::from_tag("S"));
  REQUIRE(only_s.size() == 1);
  CHECK(only_s[0].tag() == "S");

  CHECK_THROWS_AS(enumerate_prompt_variants(KnowledgeFlags{}), std::invalid_argument);
}

TEST_CASE("enumerate_prompt_variants matches the brute-force power set") {
  // oracle: all non-empty subsets of {S,D}, reordered canonically
  auto got = enumerate_prompt_variants(KnowledgeFlags::from_tag("SD"));
  std::vector<std::string> tags;
  for (const auto& f : got) tags.push_back(f.tag());
  CHECK(tags == std::vector<std::string>{"S", "D", "SD"});

  // every subset of the available flags appears exactly once
  std::set<std::string> unique(tags.begin(), tags.end());
  CHECK(unique.size() == 3);
}

TEST_CASE("expand produces |variants| x reps rounds in canonical order") {
  KnowledgeGraph g = tiny_graph();
  PriorKnowledge prior = full_prior();
  LlmGateway gateway(scripted_all(prior, 3, R"(["Nike","Adidas"])"));

  ExpansionResult res = expand(gateway, g, "Air", FilteredRelation{"r1", "Nike"}, prior, 3,
                               default_expand_template(), "m", 0.0);
  CHECK(res.rounds.size() == 21);
  CHECK(res.rounds[0].subset.tag() == "S");
  CHECK(res.rounds[0].repetition == 0);
  CHECK(res.rounds[2].repetition == 2);
  CHECK(res.rounds[20].subset.tag() == "SDI");
  for (const auto& r : res.rounds) {
    CHECK(r.targets == std::vector<std::string>{"Nike", "Adidas"});
  }
}

TEST_CASE("structural-only prior yields reps rounds") {
  KnowledgeGraph g = tiny_graph();
  PriorKnowledge prior;
  prior.structural = StructuralKnowledge{"Brand", {}};
  LlmGateway gateway(scripted_all(prior, 3, R"(["Nike"])"));
  ExpansionResult res = expand(gateway, g, "Air", FilteredRelation{"r1", {}}, prior, 3,
                               default_expand_template(), "m", 0.0);
  CHECK(res.rounds.size() == 3);
}

TEST_CASE("a failed round keeps its slot with empty targets") {
  KnowledgeGraph g = tiny_graph();
  PriorKnowledge prior = full_prior();
  auto backend = scripted_all(prior, 1, R"(["Nike"])");
  // no rep-1 entries scripted -> those calls fail
  LlmGateway gateway(backend);
  ExpansionResult res = expand(gateway, g, "Air", FilteredRelation{"r1", "Nike"}, prior, 2,
                               default_expand_template(), "m", 0.0);
  CHECK(res.rounds.size() == 14);
  int failed = 0;
  for (const auto& r : res.rounds) {
    if (r.failed) {
      ++failed;
      CHECK(r.targets.empty());
      CHECK(r.repetition == 1);
    }
  }
  CHECK(failed == 7);
  CHECK(res.warnings.size() == 7);
}

TEST_CASE("self-loops are stripped from round targets") {
  KnowledgeGraph g = tiny_graph();
  PriorKnowledge prior;
  prior.structural = StructuralKnowledge{"Brand", {}};
  auto backend = std::make_shared<ScriptedBackend>();
  backend->add(TaskDescriptor{TaskKind::EntityExpand, "Air", "r1",
                              KnowledgeFlags::from_tag("S"), 0},
               R"(["Nike","  AIR ","Adidas"])");
  LlmGateway gateway(backend);
  ExpansionResult res = expand(gateway, g, "Air", FilteredRelation{"r1", {}}, prior, 1,
                               default_expand_template(), "m", 0.0);
  REQUIRE(res.rounds.size() == 1);
  CHECK(res.rounds[0].targets == std::vector<std::string>{"Nike", "Adidas"});
}

TEST_CASE("round list is identical under parallel execution") {
  KnowledgeGraph g = tiny_graph();
  PriorKnowledge prior = full_prior();
  LlmGateway gateway(scripted_all(prior, 3, R"(["Nike","Adidas","Puma"])"));

  auto serial = expand(gateway, g, "Air", FilteredRelation{"r1", "Nike"}, prior, 3,
                       default_expand_template(), "m", 0.0, 1);
  auto parallel = expand(gateway, g, "Air", FilteredRelation{"r1", "Nike"}, prior, 3,
                         default_expand_template(), "m", 0.0, 8);
  REQUIRE(serial.rounds.size() == parallel.rounds.size());
  for (std::size_t i = 0; i < serial.rounds.size(); ++i) {
    CHECK(serial.rounds[i].subset.tag() == parallel.rounds[i].subset.tag());
    CHECK(serial.rounds[i].repetition == parallel.rounds[i].repetition);
    CHECK(serial.rounds[i].targets == parallel.rounds[i].targets);
    CHECK(serial.rounds[i].prompt == parallel.rounds[i].prompt);
  }
}

TEST_CASE("richest-only policy runs a single variant") {
  KnowledgeGraph g = tiny_graph();
  PriorKnowledge prior = full_prior();
  LlmGateway gateway(scripted_all(prior, 2, R"(["Nike"])"));
  auto res = expand(gateway, g, "Air", FilteredRelation{"r1", "Nike"}, prior, 2,
                    default_expand_template(), "m", 0.0, 1, VariantPolicy::RichestOnly);
  REQUIRE(res.rounds.size() == 2);
  CHECK(res.rounds[0].subset.tag() == "SDI");
  CHECK(res.rounds[1].subset.tag() == "SDI");
}
