#include "pairkg/llm.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>
#include <unordered_set>

#include <httplib.h>
#include <json.hpp>

#include "pairkg/normalize.hpp"

namespace pairkg {

namespace {

using nlohmann::json;

std::string task_name(TaskKind k) {
  return k == TaskKind::RelationFilter ? "relation_filter" : "entity_expand";
}

TaskKind task_from_name(const std::string& s) {
  if (s == "relation_filter") return TaskKind::RelationFilter;
  if (s == "entity_expand") return TaskKind::EntityExpand;
  throw LlmError("unknown task '" + s + "'");
}

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

// Strips markdown fences, then leading bullets/numbering and wrapping quotes.
std::string clean_item(std::string item) {
  item = trim(item);
  while (!item.empty() && (item.front() == '-' || item.front() == '*' ||
                           item.front() == '+')) {
    item = trim(item.substr(1));
  }
  // "1." / "2)" / "(3)" numbering
  std::size_t i = 0;
  while (i < item.size() && (std::isdigit(static_cast<unsigned char>(item[i])) ||
                             item[i] == '(')) {
    ++i;
  }
  if (i > 0 && i < item.size() && (item[i] == '.' || item[i] == ')')) {
    bool digits = false;
    for (std::size_t k = 0; k < i; ++k) {
      if (std::isdigit(static_cast<unsigned char>(item[k]))) digits = true;
    }
    if (digits) item = trim(item.substr(i + 1));
  }
  if (!item.empty() && item.back() == ',') item = trim(item.substr(0, item.size() - 1));
  while (item.size() >= 2 &&
         ((item.front() == '"' && item.back() == '"') ||
          (item.front() == '\'' && item.back() == '\'') ||
          (item.front() == '`' && item.back() == '`'))) {
    item = trim(item.substr(1, item.size() - 2));
  }
  return item;
}

std::string strip_code_fence(const std::string& text) {
  std::size_t open = text.find("```");
  if (open == std::string::npos) return text;
  std::size_t body = text.find('\n', open);
  if (body == std::string::npos) return text;
  std::size_t close = text.find("```", body);
  if (close == std::string::npos) return text;
  return text.substr(body + 1, close - body - 1);
}

}  // namespace

std::string KnowledgeFlags::tag() const {
  std::string t;
  if (structural) t += 'S';
  if (descriptive) t += 'D';
  if (inheritable) t += 'I';
  return t;
}

KnowledgeFlags KnowledgeFlags::from_tag(const std::string& tag) {
  KnowledgeFlags f;
  for (char c : tag) {
    if (c == 'S') f.structural = true;
    else if (c == 'D') f.descriptive = true;
    else if (c == 'I') f.inheritable = true;
    else throw LlmError(std::string("bad knowledge flag '") + c + "'");
  }
  return f;
}

std::string sha256_hex(const std::string& data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  EVP_DigestUpdate(ctx, data.data(), data.size());
  EVP_DigestFinal_ex(ctx, digest, &len);
  EVP_MD_CTX_free(ctx);
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xF]);
  }
  return out;
}

std::string cache_key(const LlmRequest& request) {
  std::ostringstream ss;
  ss << request.model_id << '\x1f' << request.prompt << '\x1f' << request.temperature
     << '\x1f' << request.descriptor.repetition;
  return sha256_hex(ss.str());
}

// ---------------------------------------------------------------------------
// RemoteBackend

RemoteBackend::RemoteBackend(std::string url, RetryPolicy retry) : retry_(retry) {
  std::size_t scheme = url.find("://");
  std::size_t path_start =
      url.find('/', scheme == std::string::npos ? 0 : scheme + 3);
  if (path_start == std::string::npos) {
    base_ = url;
    path_ = "/";
  } else {
    base_ = url.substr(0, path_start);
    path_ = url.substr(path_start);
  }
}

std::string RemoteBackend::complete(const LlmRequest& request) {
  json body;
  body["model"] = request.model_id;
  body["messages"] = json::array({json{{"role", "user"}, {"content", request.prompt}}});
  body["temperature"] = request.temperature;
  const std::string payload = body.dump();

  httplib::Headers headers;
  if (const char* key = std::getenv("PAIR_LLM_API_KEY"); key && *key) {
    headers.emplace("Authorization", std::string("Bearer ") + key);
  }

  std::string last_error;
  int backoff = retry_.backoff_base_ms;
  for (int attempt = 1; attempt <= retry_.max_attempts; ++attempt) {
    if (attempt > 1) {
      std::this_thread::sleep_for(std::chrono::milliseconds(backoff));
      backoff = std::min(backoff * 2, retry_.backoff_cap_ms);
    }
    httplib::Client client(base_);
    client.set_read_timeout(120, 0);
    auto res = client.Post(path_, headers, payload, "application/json");
    if (!res) {
      last_error = "transport failure: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status < 200 || res->status >= 300) {
      last_error = "HTTP " + std::to_string(res->status);
      continue;
    }
    json reply = json::parse(res->body, nullptr, false);
    if (reply.is_discarded() || !reply.contains("choices") || reply["choices"].empty() ||
        !reply["choices"][0].contains("message") ||
        !reply["choices"][0]["message"].contains("content")) {
      throw LlmError("remote response missing choices[0].message.content");
    }
    return reply["choices"][0]["message"]["content"].get<std::string>();
  }
  throw LlmError("remote backend failed after " + std::to_string(retry_.max_attempts) +
                 " attempts (" + last_error + ")");
}

// ---------------------------------------------------------------------------
// ScriptedBackend

std::shared_ptr<ScriptedBackend> ScriptedBackend::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw LlmError("cannot open scripted responses file " + path);
  auto backend = std::make_shared<ScriptedBackend>();
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
      throw LlmError(path + ":" + std::to_string(lineno) + ": bad scripted record");
    }
    TaskDescriptor d;
    d.task = task_from_name(j.at("task").get<std::string>());
    d.source = j.at("source").get<std::string>();
    if (j.contains("relation") && !j["relation"].is_null()) {
      d.relation = j["relation"].get<std::string>();
    }
    d.knowledge = KnowledgeFlags::from_tag(j.value("flags", std::string{}));
    d.repetition = j.value("repetition", 0);
    std::optional<std::string> hash;
    if (j.contains("prompt_sha256")) hash = j["prompt_sha256"].get<std::string>();
    backend->add(d, j.at("response").get<std::string>(), hash);
  }
  return backend;
}

void ScriptedBackend::add(const TaskDescriptor& desc, std::string response,
                          std::optional<std::string> prompt_sha256) {
  entries_.push_back(Entry{desc, std::move(prompt_sha256), std::move(response)});
}

std::string ScriptedBackend::complete(const LlmRequest& request) {
  for (const auto& e : entries_) {
    if (e.desc != request.descriptor) continue;
    if (e.prompt_sha256 && *e.prompt_sha256 != sha256_hex(request.prompt)) continue;
    return e.response;
  }
  throw LlmError("no scripted response for " + task_name(request.descriptor.task) +
                 " source='" + request.descriptor.source + "' relation='" +
                 request.descriptor.relation.value_or("") + "' flags=" +
                 request.descriptor.knowledge.tag() + " rep=" +
                 std::to_string(request.descriptor.repetition));
}

// ---------------------------------------------------------------------------
// LlmGateway

namespace {
std::mutex g_cache_mutex;
}

LlmGateway::LlmGateway(std::shared_ptr<LlmBackend> backend,
                       std::optional<std::string> cache_dir)
    : backend_(std::move(backend)), cache_dir_(std::move(cache_dir)) {
  if (cache_dir_) std::filesystem::create_directories(*cache_dir_);
}

LlmResponse LlmGateway::complete(const LlmRequest& request) const {
  std::filesystem::path entry;
  if (cache_dir_) {
    entry = std::filesystem::path(*cache_dir_) / cache_key(request);
    std::lock_guard lock(g_cache_mutex);
    std::ifstream in(entry, std::ios::binary);
    if (in) {
      std::ostringstream ss;
      ss << in.rdbuf();
      return LlmResponse{ss.str(), backend_->tag(), true};
    }
  }
  std::string text = backend_->complete(request);
  if (cache_dir_) {
    std::lock_guard lock(g_cache_mutex);
    std::filesystem::path tmp = entry;
    tmp += ".tmp";
    {
      std::ofstream out(tmp, std::ios::binary);
      out << text;
    }
    std::filesystem::rename(tmp, entry);
  }
  return LlmResponse{std::move(text), backend_->tag(), false};
}

// ---------------------------------------------------------------------------
// parse_entity_list

std::vector<std::string> parse_entity_list(const std::string& text) {
  std::vector<std::string> items;

  std::string body = trim(strip_code_fence(text));
  json j = json::parse(body, nullptr, false);
  if (!j.is_discarded() && j.is_array()) {
    for (const auto& el : j) {
      if (el.is_string()) items.push_back(el.get<std::string>());
    }
  } else {
    std::vector<std::string> lines;
    std::istringstream ss(body);
    std::string line;
    while (std::getline(ss, line)) {
      if (!trim(line).empty()) lines.push_back(line);
    }
    if (lines.size() == 1 && lines[0].find(',') != std::string::npos) {
      std::istringstream ls(lines[0]);
      std::string piece;
      lines.clear();
      while (std::getline(ls, piece, ',')) lines.push_back(piece);
    }
    for (auto& l : lines) {
      std::string item = clean_item(l);
      if (!item.empty()) items.push_back(item);
    }
  }

  std::vector<std::string> out;
  std::unordered_set<std::string> seen;
  for (auto& item : items) {
    std::string cleaned = clean_item(item);
    std::string norm = normalize_name(cleaned);
    if (norm.empty()) continue;
    if (seen.insert(norm).second) out.push_back(cleaned);
  }
  return out;
}

}  // namespace pairkg
