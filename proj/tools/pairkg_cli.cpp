// Command-line front end for the pairkg shared library. Talks to the engine
// through the C API only.

#include <cctype>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pairkg/pairkg.h"

namespace {

struct ConfigHandle {
  pairkg_config* ptr = pairkg_config_new();
  ~ConfigHandle() { pairkg_config_free(ptr); }
};

struct GlobalOptions {
  std::string config_path;
  std::string backend;
  std::string scorer;
  std::string out_dir;
  int k = -1;
  int reps = -1;
  int parallelism = -1;
  long long seed = -1;
};

int apply_options(pairkg_config* config, const GlobalOptions& opts) {
  if (!opts.config_path.empty() &&
      pairkg_config_load(config, opts.config_path.c_str()) != PAIRKG_OK) {
    std::cerr << "error: " << pairkg_last_error() << "\n";
    return 1;
  }
  auto set = [&](const char* key, const std::string& value) {
    if (pairkg_config_set(config, key, value.c_str()) != PAIRKG_OK) {
      std::cerr << "error: " << pairkg_last_error() << "\n";
      return false;
    }
    return true;
  };
  if (!opts.backend.empty() && !set("backend", opts.backend)) return 1;
  if (!opts.scorer.empty() && !set("scorer", opts.scorer)) return 1;
  if (!opts.out_dir.empty() && !set("out_dir", opts.out_dir)) return 1;
  if (opts.k >= 0 && !set("k", std::to_string(opts.k))) return 1;
  if (opts.reps >= 0 && !set("reps", std::to_string(opts.reps))) return 1;
  if (opts.parallelism >= 0 && !set("parallelism", std::to_string(opts.parallelism)))
    return 1;
  if (opts.seed >= 0 && !set("seed", std::to_string(opts.seed))) return 1;
  return 0;
}

std::vector<std::string> read_seed_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CLI::ValidationError("--seeds-file", "cannot open " + path);
  std::vector<std::string> seeds;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) seeds.push_back(line);
  }
  return seeds;
}

void print_result(const char* json) {
  if (json && *json) std::cout << json << "\n";
}

int finish(pairkg_status status, char* out) {
  print_result(out);
  pairkg_string_free(out);
  if (status != PAIRKG_OK) std::cerr << "error: " << pairkg_last_error() << "\n";
  return static_cast<int>(status);
}

int run_annotate(const std::string& result_path, const std::string& annotations_path,
                 const std::string& annotator, long long seed) {
  pairkg_annotation_session* session = pairkg_annotate_open(
      result_path.c_str(), annotations_path.c_str(), annotator.c_str(),
      seed < 0 ? 0ULL : static_cast<unsigned long long>(seed));
  if (!session) {
    std::cerr << "error: " << pairkg_last_error() << "\n";
    return 3;
  }
  std::cout << "Labeling as '" << annotator << "'. [a]ccept / [r]eject / [s]kip / [q]uit\n";
  char buffer[4096];
  std::size_t labeled = 0;
  while (pairkg_annotate_next(session, buffer, sizeof(buffer))) {
    std::cout << buffer << "\n> " << std::flush;
    std::string line;
    if (!std::getline(std::cin, line)) break;
    if (line.empty()) continue;  // skip on empty input
    char c = static_cast<char>(std::tolower(static_cast<unsigned char>(line[0])));
    if (c == 'q') break;
    if (c == 's') continue;
    if (c == 'a' || c == 'r') {
      if (pairkg_annotate_label(session, c == 'a' ? 1 : 0) == PAIRKG_OK) ++labeled;
    }
  }
  pairkg_status status = pairkg_annotate_close(session);
  if (status != PAIRKG_OK) {
    std::cerr << "error: " << pairkg_last_error() << "\n";
    return static_cast<int>(status);
  }
  std::cout << "recorded " << labeled << " labels in " << annotations_path << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pairkg - LLM-driven marketing knowledge graph miner"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags are valid after the subcommand too

  GlobalOptions opts;
  app.add_option("--config", opts.config_path, "pipeline config file (JSON)");
  app.add_option("--seed", opts.seed, "run seed");
  app.add_option("--backend", opts.backend,
                 "backend: remote[:<url>] | scripted:<file> | oracle:<cfg>");
  app.add_option("--scorer", opts.scorer, "relatedness scorer: lexical | remote:<url>");
  app.add_option("--k", opts.k, "top-K kept per (source, relation)");
  app.add_option("--reps", opts.reps, "LLM calls per prompt variant");
  app.add_option("--parallelism", opts.parallelism, "max in-flight LLM calls");
  app.add_option("--out", opts.out_dir, "output directory");

  auto* mine = app.add_subcommand("mine", "mine triples for seed entities");
  std::vector<std::string> seed_names;
  std::string seeds_file;
  mine->add_option("seeds", seed_names, "seed entity names");
  mine->add_option("--seeds-file", seeds_file, "file with one seed entity name per line");

  auto* eval = app.add_subcommand("eval", "compute metrics over a result file");
  std::string result_path, annotations_path;
  eval->add_option("--result", result_path, "mined triples file")->required();
  eval->add_option("--annotations", annotations_path, "annotations file");

  auto* annotate = app.add_subcommand("annotate", "blinded accept/reject review");
  std::string ann_result, ann_file, annotator;
  annotate->add_option("--result", ann_result, "mined triples file")->required();
  annotate->add_option("--annotations", ann_file, "annotations file")->required();
  annotate->add_option("--annotator", annotator, "annotator id")->required();

  auto* export_sft = app.add_subcommand("export-sft", "write the fine-tuning corpus");
  std::string sft_result, sft_annotations, sft_out = "corpus.jsonl";
  double split = 0.0;
  export_sft->add_option("--result", sft_result, "mined triples file")->required();
  export_sft->add_option("--annotations", sft_annotations, "annotations file");
  export_sft->add_option("--out-file", sft_out, "corpus output path");
  export_sft->add_option("--split", split, "validation fraction in [0,1)");

  auto* simulate = app.add_subcommand("simulate", "run the four-variant ablation");
  std::string sim_config, sim_out;
  simulate->add_option("--sim-config", sim_config, "simulator config file")->required();
  simulate->add_option("--out-file", sim_out, "ablation report output path");

  CLI11_PARSE(app, argc, argv);

  ConfigHandle config;

  if (mine->parsed()) {
    if (int rc = apply_options(config.ptr, opts)) return rc;
    std::vector<std::string> seeds = seed_names;
    if (!seeds_file.empty()) {
      for (auto& s : read_seed_file(seeds_file)) seeds.push_back(s);
    }
    std::vector<const char*> raw;
    raw.reserve(seeds.size());
    for (const auto& s : seeds) raw.push_back(s.c_str());
    char* summary = nullptr;
    pairkg_status status =
        pairkg_mine(config.ptr, raw.data(), raw.size(), &summary);
    return finish(status, summary);
  }
  if (eval->parsed()) {
    if (int rc = apply_options(config.ptr, opts)) return rc;
    char* report = nullptr;
    pairkg_status status = pairkg_eval(
        config.ptr, result_path.c_str(),
        annotations_path.empty() ? nullptr : annotations_path.c_str(), &report);
    return finish(status, report);
  }
  if (annotate->parsed()) {
    return run_annotate(ann_result, ann_file, annotator, opts.seed);
  }
  if (export_sft->parsed()) {
    if (int rc = apply_options(config.ptr, opts)) return rc;
    char* summary = nullptr;
    pairkg_status status = pairkg_export_sft(
        config.ptr, sft_result.c_str(),
        sft_annotations.empty() ? nullptr : sft_annotations.c_str(), sft_out.c_str(),
        split, &summary);
    return finish(status, summary);
  }
  if (simulate->parsed()) {
    char* report = nullptr;
    pairkg_status status = pairkg_simulate(
        sim_config.c_str(), sim_out.empty() ? nullptr : sim_out.c_str(), &report);
    return finish(status, report);
  }
  return 1;
}
