#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pairkg/aggregate.hpp"
#include "pairkg/kg.hpp"

namespace pairkg {

enum class Label { Accept, Reject };
enum class Verdict { Accepted, Rejected, Undecided };

struct AnnotationRecord {
  std::string source;
  std::string relation;  // relation id
  std::string target;
  // (annotator id, label); at most one label per annotator, three annotators.
  std::vector<std::pair<std::string, Label>> labels;

  Verdict verdict() const;
};

// Mined output grouped per seed entity. Seeds with zero targets stay present
// (they count toward AEE's denominator).
struct MiningResult {
  // seed name -> relation id -> kept triples
  std::map<std::string, std::map<std::string, std::vector<AggregatedTriple>>> by_seed;

  void add(const AggregatedTriple& t) { by_seed[t.source][t.relation].push_back(t); }
  void add_seed(const std::string& seed) { by_seed.try_emplace(seed); }
  std::size_t triple_count() const;
  std::vector<AggregatedTriple> all_triples() const;
};

class VectorEmbedder {
 public:
  virtual ~VectorEmbedder() = default;
  virtual std::vector<double> embed(const std::string& text) const = 0;
};

// Deterministic 256-dim feature-hashing embedder over character 3-grams of
// the normalized text, L2-normalized.
class HashedNgramEmbedder : public VectorEmbedder {
 public:
  static constexpr std::size_t kDim = 256;
  std::vector<double> embed(const std::string& text) const override;
};

// >=2 agreeing labels decide; anything else is undecided. Rejects more than
// three labels.
Verdict majority_vote(const std::vector<Label>& labels);

// Accepted / (Accepted + Rejected); undecided records are excluded from both
// sides. Throws when nothing is decided.
double accuracy(const std::vector<AnnotationRecord>& records);

// Fraction of distinct (normalized) mined targets absent from the base KG.
double novelty(const MiningResult& result, const KnowledgeGraph& base);

// Mean distinct-target count per seed; zero-target seeds count in the
// denominator.
double aee(const MiningResult& result);

// Mean over seeds (with >=2 distinct targets) of the mean pairwise Euclidean
// distance between the targets' embeddings; 0 when no seed qualifies.
double ilad(const MiningResult& result, const VectorEmbedder& embedder);

double euclidean_distance(const std::vector<double>& a, const std::vector<double>& b);

// Seeded Fisher-Yates permutation; identical seeds give identical orders on
// every platform (raw mt19937_64 draws, no distribution involved). Presented
// records carry no system-of-origin field; provenance stays with the caller.
std::vector<std::size_t> shuffled_indices(std::size_t n, std::uint64_t seed);

template <typename T>
std::vector<T> shuffle_for_annotation(const std::vector<T>& items, std::uint64_t seed) {
  std::vector<T> out;
  out.reserve(items.size());
  for (std::size_t i : shuffled_indices(items.size(), seed)) out.push_back(items[i]);
  return out;
}

// Drops triples with a Rejected verdict; undecided and unannotated triples
// stay. Emptied relation entries disappear; seeds stay for AEE accounting.
MiningResult filter_bad_cases(const MiningResult& result,
                              const std::vector<AnnotationRecord>& records);

// Annotations file: one JSON object per line
//   {source, relation, target, labels: [{annotator, label}, ...]}
// Bare string labels ("Accept"/"Reject") are accepted and given anonymous
// annotator ids.
std::vector<AnnotationRecord> load_annotations(const std::string& path);
void save_annotations(const std::vector<AnnotationRecord>& records, const std::string& path);

struct MetricsReport {
  std::optional<double> accuracy;
  double novelty = 0.0;
  double aee = 0.0;
  double ilad = 0.0;
  std::size_t triples = 0;
  std::size_t seeds = 0;
  std::size_t decided = 0;

  std::string to_json() const;
};

MetricsReport compute_metrics(const MiningResult& result, const KnowledgeGraph& base,
                              const VectorEmbedder& embedder,
                              const std::vector<AnnotationRecord>* annotations);

}  // namespace pairkg
