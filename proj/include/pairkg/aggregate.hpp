#pragma once

#include <functional>
#include <string>
#include <vector>

#include "pairkg/expand.hpp"

namespace pairkg {

// (source, relation, target) with its self-consistency count, semantic
// relatedness and final score tau = ln(1 + consistency) * relatedness.
struct AggregatedTriple {
  std::string source;
  std::string relation;  // relation id
  std::string target;    // first-seen surface form
  int consistency = 0;
  double relatedness = 0.0;
  double tau = 0.0;
};

// Scores how plausible target t is for (source, relation) given context
// evidence. Implementations must return values in (0, 1] and be safe for
// concurrent calls.
class RelatednessScorer {
 public:
  virtual ~RelatednessScorer() = default;
  virtual double score(const std::string& source, const std::string& relation_name,
                       const std::string& target, const std::string& context) const = 0;
};

// Deterministic stand-in for a learned scorer: epsilon + (1-epsilon) * J with
// J the Jaccard similarity between character-3-gram multisets of the
// normalized target and the normalized "source relation context" text.
class LexicalScorer : public RelatednessScorer {
 public:
  double score(const std::string& source, const std::string& relation_name,
               const std::string& target, const std::string& context) const override;
};

// Remote scorer: POST {text: "s [SEP] r [SEP] t"} to an endpoint returning
// {score: x}; x is squashed through the logistic function into (0, 1).
class RemoteScorer : public RelatednessScorer {
 public:
  explicit RemoteScorer(std::string url);
  double score(const std::string& source, const std::string& relation_name,
               const std::string& target, const std::string& context) const override;

 private:
  std::string url_;
};

// Number of rounds whose target set contains normalize(target); at most one
// count per round.
int consistency_count(const std::string& target, const std::vector<ExpansionRound>& rounds);

// Every distinct (normalized) target seen in at least one round gets
// tau = ln(1 + count) * score; ranked by tau desc, then consistency desc,
// then normalized target asc; at most K survive.
std::vector<AggregatedTriple> aggregate(const std::string& source,
                                        const std::string& relation_id,
                                        const std::string& relation_name,
                                        const std::vector<ExpansionRound>& rounds,
                                        const RelatednessScorer& scorer,
                                        const std::string& context, int k);

double logistic(double x);

}  // namespace pairkg
