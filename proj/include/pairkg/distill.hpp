#pragma once

#include <string>
#include <vector>

#include "pairkg/kg.hpp"
#include "pairkg/llm.hpp"
#include "pairkg/metrics.hpp"

namespace pairkg {

// One persisted LLM call: the rendered prompt and the raw completion.
struct TraceRecord {
  TaskDescriptor descriptor;
  std::string prompt;
  std::string response;
};

void save_traces(const std::vector<TraceRecord>& traces, const std::string& path);
std::vector<TraceRecord> load_traces(const std::string& path);

struct SftSample {
  TaskKind task = TaskKind::EntityExpand;
  std::string question;
  std::string response;
};

struct SftExport {
  std::vector<SftSample> samples;
  std::size_t skipped_missing_trace = 0;
};

// Builds the fine-tuning corpus from mining traces and the human-filtered
// result: one relation-filter sample per seed (surviving relations with an
// exemplar target each) and one entity-expansion sample per (seed, relation)
// using the richest prompt variant that ran. Rejected targets never reach a
// response.
SftExport export_sft(const std::vector<TraceRecord>& traces, const MiningResult& kept,
                     const KnowledgeGraph& graph);

// One JSON object per line: {task, question, response}.
void save_sft_corpus(const std::vector<SftSample>& samples, const std::string& path);

}  // namespace pairkg
