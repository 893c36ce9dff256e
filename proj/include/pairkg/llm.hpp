#pragma once

#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace pairkg {

enum class TaskKind { RelationFilter, EntityExpand };

// Which knowledge kinds a prompt carries: structural (S), descriptive (D),
// inheritable (I).
struct KnowledgeFlags {
  bool structural = false;
  bool descriptive = false;
  bool inheritable = false;

  int count() const {
    return (structural ? 1 : 0) + (descriptive ? 1 : 0) + (inheritable ? 1 : 0);
  }
  bool any() const { return structural || descriptive || inheritable; }
  // Canonical tag, e.g. "S", "DI", "SDI".
  std::string tag() const;
  static KnowledgeFlags from_tag(const std::string& tag);
  bool operator==(const KnowledgeFlags&) const = default;
};

// Machine-readable request identity that travels alongside the prompt so
// replay and oracle backends can act without parsing prose.
struct TaskDescriptor {
  TaskKind task = TaskKind::EntityExpand;
  std::string source;
  std::optional<std::string> relation;  // relation id; EntityExpand only
  KnowledgeFlags knowledge;
  int repetition = 0;

  bool operator==(const TaskDescriptor&) const = default;
};

struct LlmRequest {
  std::string prompt;
  TaskDescriptor descriptor;
  double temperature = 0.7;
  std::string model_id;
};

struct LlmResponse {
  std::string text;
  std::string backend_tag;
  bool cached = false;
};

struct LlmError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

class LlmBackend {
 public:
  virtual ~LlmBackend() = default;
  virtual std::string tag() const = 0;
  // Returns the raw completion text; throws LlmError on failure.
  virtual std::string complete(const LlmRequest& request) = 0;
};

struct RetryPolicy {
  int max_attempts = 4;
  int backoff_base_ms = 500;
  int backoff_cap_ms = 8000;
};

// OpenAI-style chat-completion backend. POSTs {model, messages, temperature}
// and reads choices[0].message.content. Bearer token, when present, comes
// from the PAIR_LLM_API_KEY environment variable.
class RemoteBackend : public LlmBackend {
 public:
  explicit RemoteBackend(std::string url, RetryPolicy retry = {});
  std::string tag() const override { return "remote"; }
  std::string complete(const LlmRequest& request) override;

 private:
  std::string base_;
  std::string path_;
  RetryPolicy retry_;
};

// Replay backend: responses recorded per descriptor (optionally pinned to a
// prompt hash) in a JSONL file.
class ScriptedBackend : public LlmBackend {
 public:
  static std::shared_ptr<ScriptedBackend> load(const std::string& path);
  void add(const TaskDescriptor& desc, std::string response,
           std::optional<std::string> prompt_sha256 = std::nullopt);
  std::string tag() const override { return "scripted"; }
  std::string complete(const LlmRequest& request) override;

 private:
  struct Entry {
    TaskDescriptor desc;
    std::optional<std::string> prompt_sha256;
    std::string response;
  };
  std::vector<Entry> entries_;
};

// Issues requests through a backend with an optional on-disk response cache.
// Keys are hex digests; values are raw response text. Safe for concurrent use.
class LlmGateway {
 public:
  explicit LlmGateway(std::shared_ptr<LlmBackend> backend,
                      std::optional<std::string> cache_dir = std::nullopt);
  LlmResponse complete(const LlmRequest& request) const;
  const LlmBackend& backend() const { return *backend_; }

 private:
  std::shared_ptr<LlmBackend> backend_;
  std::optional<std::string> cache_dir_;
};

// Stable digest over (model_id, prompt, temperature, repetition). The
// repetition index keeps repeated calls distinct in the cache.
std::string cache_key(const LlmRequest& request);

std::string sha256_hex(const std::string& data);

// Extracts entity names from a completion: strict JSON array of strings
// first, then line/comma splitting with bullet, numbering and quote
// stripping. Deduplicates by normalized form, keeping first-seen surface
// forms in order.
std::vector<std::string> parse_entity_list(const std::string& text);

}  // namespace pairkg
