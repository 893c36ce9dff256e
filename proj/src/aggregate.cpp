#include "pairkg/aggregate.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include <httplib.h>
#include <json.hpp>

#include "pairkg/normalize.hpp"

namespace pairkg {

namespace {

constexpr double kEpsilon = 0.05;

// Character 3-gram multiset over code points.
std::unordered_map<std::string, int> trigrams(const std::string& normalized) {
  std::unordered_map<std::string, int> grams;
  std::vector<char32_t> cps = utf8_codepoints(normalized);
  for (std::size_t i = 0; i + 3 <= cps.size(); ++i) {
    std::vector<char32_t> g(cps.begin() + static_cast<long>(i),
                            cps.begin() + static_cast<long>(i) + 3);
    ++grams[utf8_encode(g)];
  }
  return grams;
}

double multiset_jaccard(const std::unordered_map<std::string, int>& a,
                        const std::unordered_map<std::string, int>& b) {
  long inter = 0, uni = 0;
  for (const auto& [g, ca] : a) {
    auto it = b.find(g);
    int cb = it == b.end() ? 0 : it->second;
    inter += std::min(ca, cb);
    uni += std::max(ca, cb);
  }
  for (const auto& [g, cb] : b) {
    if (!a.count(g)) uni += cb;
  }
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

}  // namespace

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double LexicalScorer::score(const std::string& source, const std::string& relation_name,
                            const std::string& target, const std::string& context) const {
  const std::string norm_target = normalize_name(target);
  const std::string norm_context =
      normalize_name(source + " " + relation_name + " " + context);
  double j = multiset_jaccard(trigrams(norm_target), trigrams(norm_context));
  return kEpsilon + (1.0 - kEpsilon) * j;
}

RemoteScorer::RemoteScorer(std::string url) : url_(std::move(url)) {}

double RemoteScorer::score(const std::string& source, const std::string& relation_name,
                           const std::string& target, const std::string&) const {
  std::size_t scheme = url_.find("://");
  std::size_t path_start = url_.find('/', scheme == std::string::npos ? 0 : scheme + 3);
  std::string base = path_start == std::string::npos ? url_ : url_.substr(0, path_start);
  std::string path = path_start == std::string::npos ? "/" : url_.substr(path_start);

  nlohmann::json body;
  body["text"] = source + " [SEP] " + relation_name + " [SEP] " + target;
  httplib::Client client(base);
  auto res = client.Post(path, body.dump(), "application/json");
  if (!res || res->status < 200 || res->status >= 300) {
    throw std::runtime_error("relatedness endpoint failed" +
                             (res ? " (HTTP " + std::to_string(res->status) + ")" : ""));
  }
  nlohmann::json reply = nlohmann::json::parse(res->body, nullptr, false);
  if (reply.is_discarded() || !reply.contains("score") || !reply["score"].is_number()) {
    throw std::runtime_error("relatedness endpoint returned malformed response");
  }
  return logistic(reply["score"].get<double>());
}

int consistency_count(const std::string& target,
                      const std::vector<ExpansionRound>& rounds) {
  const std::string norm = normalize_name(target);
  int count = 0;
  for (const auto& round : rounds) {
    for (const auto& t : round.targets) {
      if (normalize_name(t) == norm) {
        ++count;
        break;  // one count per round
      }
    }
  }
  return count;
}

std::vector<AggregatedTriple> aggregate(const std::string& source,
                                        const std::string& relation_id,
                                        const std::string& relation_name,
                                        const std::vector<ExpansionRound>& rounds,
                                        const RelatednessScorer& scorer,
                                        const std::string& context, int k) {
  if (k < 1) throw std::invalid_argument("K must be >= 1");

  // normalized target -> (first-seen surface form, count). Rounds are walked
  // in order so the surface form is stable under round permutation only up to
  // normalization; counts are permutation-invariant.
  std::map<std::string, std::pair<std::string, int>> counts;
  for (const auto& round : rounds) {
    std::unordered_set<std::string> seen_this_round;
    for (const auto& t : round.targets) {
      std::string norm = normalize_name(t);
      if (norm.empty()) continue;
      if (!seen_this_round.insert(norm).second) continue;
      auto [it, inserted] = counts.try_emplace(norm, t, 0);
      ++it->second.second;
    }
  }

  std::vector<AggregatedTriple> scored;
  scored.reserve(counts.size());
  for (const auto& [norm, entry] : counts) {
    const auto& [surface, count] = entry;
    AggregatedTriple at;
    at.source = source;
    at.relation = relation_id;
    at.target = surface;
    at.consistency = count;
    at.relatedness = scorer.score(source, relation_name, surface, context);
    at.tau = std::log1p(static_cast<double>(count)) * at.relatedness;
    scored.push_back(std::move(at));
  }

  std::sort(scored.begin(), scored.end(),
            [](const AggregatedTriple& a, const AggregatedTriple& b) {
              if (a.tau != b.tau) return a.tau > b.tau;
              if (a.consistency != b.consistency) return a.consistency > b.consistency;
              return normalize_name(a.target) < normalize_name(b.target);
            });
  if (scored.size() > static_cast<std::size_t>(k)) scored.resize(static_cast<std::size_t>(k));
  return scored;
}

}  // namespace pairkg
