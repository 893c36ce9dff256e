#include "pairkg/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <stdexcept>
#include <unordered_map>

#include <json.hpp>

#include "pairkg/normalize.hpp"

namespace pairkg {

namespace {

using nlohmann::json;

std::string triple_id(const std::string& source, const std::string& relation,
                      const std::string& target) {
  return normalize_name(source) + '\x1f' + relation + '\x1f' + normalize_name(target);
}

// FNV-1a 64, the hash behind the feature-hashing embedder.
std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::vector<std::string> distinct_targets_of_seed(
    const std::map<std::string, std::vector<AggregatedTriple>>& by_relation) {
  std::set<std::string> norms;
  std::vector<std::string> out;
  for (const auto& [rel, triples] : by_relation) {
    for (const auto& t : triples) {
      if (norms.insert(normalize_name(t.target)).second) out.push_back(t.target);
    }
  }
  return out;
}

}  // namespace

Verdict AnnotationRecord::verdict() const {
  std::vector<Label> plain;
  plain.reserve(labels.size());
  for (const auto& [annotator, label] : labels) plain.push_back(label);
  return majority_vote(plain);
}

std::size_t MiningResult::triple_count() const {
  std::size_t n = 0;
  for (const auto& [seed, rels] : by_seed) {
    for (const auto& [rel, triples] : rels) n += triples.size();
  }
  return n;
}

std::vector<AggregatedTriple> MiningResult::all_triples() const {
  std::vector<AggregatedTriple> out;
  for (const auto& [seed, rels] : by_seed) {
    for (const auto& [rel, triples] : rels) {
      out.insert(out.end(), triples.begin(), triples.end());
    }
  }
  return out;
}

Verdict majority_vote(const std::vector<Label>& labels) {
  if (labels.size() > 3) {
    throw std::invalid_argument("at most three annotators are supported");
  }
  int accept = 0, reject = 0;
  for (Label l : labels) (l == Label::Accept ? accept : reject)++;
  if (accept >= 2) return Verdict::Accepted;
  if (reject >= 2) return Verdict::Rejected;
  return Verdict::Undecided;
}

double accuracy(const std::vector<AnnotationRecord>& records) {
  long accepted = 0, rejected = 0;
  for (const auto& r : records) {
    switch (r.verdict()) {
      case Verdict::Accepted: ++accepted; break;
      case Verdict::Rejected: ++rejected; break;
      case Verdict::Undecided: break;
    }
  }
  if (accepted + rejected == 0) {
    throw std::invalid_argument("no decided annotation records");
  }
  return static_cast<double>(accepted) / static_cast<double>(accepted + rejected);
}

double novelty(const MiningResult& result, const KnowledgeGraph& base) {
  std::set<std::string> norms;
  for (const auto& [seed, rels] : result.by_seed) {
    for (const auto& [rel, triples] : rels) {
      for (const auto& t : triples) norms.insert(normalize_name(t.target));
    }
  }
  if (norms.empty()) throw std::invalid_argument("mining result has no targets");
  long novel = 0;
  for (const auto& n : norms) {
    if (!base.contains_entity(n)) ++novel;
  }
  return static_cast<double>(novel) / static_cast<double>(norms.size());
}

double aee(const MiningResult& result) {
  if (result.by_seed.empty()) throw std::invalid_argument("mining result has no seeds");
  std::size_t total = 0;
  for (const auto& [seed, rels] : result.by_seed) {
    total += distinct_targets_of_seed(rels).size();
  }
  return static_cast<double>(total) / static_cast<double>(result.by_seed.size());
}

double euclidean_distance(const std::vector<double>& a, const std::vector<double>& b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double d = a[i] - b[i];
    sum += d * d;
  }
  return std::sqrt(sum);
}

double ilad(const MiningResult& result, const VectorEmbedder& embedder) {
  double sum = 0.0;
  std::size_t qualifying = 0;
  for (const auto& [seed, rels] : result.by_seed) {
    std::vector<std::string> targets = distinct_targets_of_seed(rels);
    if (targets.size() < 2) continue;
    std::vector<std::vector<double>> vecs;
    vecs.reserve(targets.size());
    for (const auto& t : targets) vecs.push_back(embedder.embed(t));
    double pair_sum = 0.0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < vecs.size(); ++i) {
      for (std::size_t j = i + 1; j < vecs.size(); ++j) {
        pair_sum += euclidean_distance(vecs[i], vecs[j]);
        ++pairs;
      }
    }
    sum += pair_sum / static_cast<double>(pairs);
    ++qualifying;
  }
  return qualifying == 0 ? 0.0 : sum / static_cast<double>(qualifying);
}

std::vector<double> HashedNgramEmbedder::embed(const std::string& text) const {
  std::vector<double> v(kDim, 0.0);
  const std::string norm = normalize_name(text);
  std::vector<char32_t> cps = utf8_codepoints(norm);
  for (std::size_t i = 0; i + 3 <= cps.size(); ++i) {
    std::vector<char32_t> g(cps.begin() + static_cast<long>(i),
                            cps.begin() + static_cast<long>(i) + 3);
    std::uint64_t h = fnv1a(utf8_encode(g));
    std::size_t bucket = h % kDim;
    double sign = ((h >> 32) & 1) ? 1.0 : -1.0;
    v[bucket] += sign;
  }
  double norm2 = 0.0;
  for (double x : v) norm2 += x * x;
  if (norm2 > 0.0) {
    double inv = 1.0 / std::sqrt(norm2);
    for (double& x : v) x *= inv;
  }
  return v;
}

std::vector<std::size_t> shuffled_indices(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  std::mt19937_64 gen(seed);
  for (std::size_t i = n; i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(gen() % i);
    std::swap(idx[i - 1], idx[j]);
  }
  return idx;
}

MiningResult filter_bad_cases(const MiningResult& result,
                              const std::vector<AnnotationRecord>& records) {
  std::unordered_map<std::string, Verdict> verdicts;
  for (const auto& r : records) {
    verdicts[triple_id(r.source, r.relation, r.target)] = r.verdict();
  }
  MiningResult kept;
  for (const auto& [seed, rels] : result.by_seed) {
    kept.add_seed(seed);
    for (const auto& [rel, triples] : rels) {
      std::vector<AggregatedTriple> survivors;
      for (const auto& t : triples) {
        auto it = verdicts.find(triple_id(t.source, t.relation, t.target));
        if (it != verdicts.end() && it->second == Verdict::Rejected) continue;
        survivors.push_back(t);
      }
      if (!survivors.empty()) kept.by_seed[seed][rel] = std::move(survivors);
    }
  }
  return kept;
}

std::vector<AnnotationRecord> load_annotations(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open annotations file " + path);
  std::vector<AnnotationRecord> out;
  std::string line;
  int lineno = 0;
  int anon = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": bad annotation record");
    }
    AnnotationRecord r;
    r.source = j.at("source").get<std::string>();
    r.relation = j.at("relation").get<std::string>();
    r.target = j.at("target").get<std::string>();
    for (const auto& l : j.value("labels", json::array())) {
      std::string annotator, label;
      if (l.is_string()) {
        annotator = "anon-" + std::to_string(anon++);
        label = l.get<std::string>();
      } else {
        annotator = l.at("annotator").get<std::string>();
        label = l.at("label").get<std::string>();
      }
      if (label != "Accept" && label != "Reject") {
        throw std::runtime_error(path + ":" + std::to_string(lineno) + ": bad label '" +
                                 label + "'");
      }
      r.labels.emplace_back(annotator, label == "Accept" ? Label::Accept : Label::Reject);
    }
    out.push_back(std::move(r));
  }
  return out;
}

void save_annotations(const std::vector<AnnotationRecord>& records,
                      const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write annotations file " + path);
  for (const auto& r : records) {
    json labels = json::array();
    for (const auto& [annotator, label] : r.labels) {
      labels.push_back({{"annotator", annotator},
                        {"label", label == Label::Accept ? "Accept" : "Reject"}});
    }
    json j{{"source", r.source}, {"relation", r.relation}, {"target", r.target},
           {"labels", labels}};
    out << j.dump() << '\n';
  }
}

std::string MetricsReport::to_json() const {
  json j;
  if (accuracy) j["accuracy"] = *accuracy;
  j["novelty"] = novelty;
  j["aee"] = aee;
  j["ilad"] = ilad;
  j["counts"] = {{"triples", triples}, {"seeds", seeds}, {"decided", decided}};
  return j.dump(2);
}

MetricsReport compute_metrics(const MiningResult& result, const KnowledgeGraph& base,
                              const VectorEmbedder& embedder,
                              const std::vector<AnnotationRecord>* annotations) {
  MetricsReport report;
  report.triples = result.triple_count();
  report.seeds = result.by_seed.size();
  report.novelty = novelty(result, base);
  report.aee = aee(result);
  report.ilad = ilad(result, embedder);
  if (annotations && !annotations->empty()) {
    long decided = 0;
    for (const auto& r : *annotations) {
      if (r.verdict() != Verdict::Undecided) ++decided;
    }
    report.decided = static_cast<std::size_t>(decided);
    if (decided > 0) report.accuracy = accuracy(*annotations);
  }
  return report;
}

}  // namespace pairkg
