#include "pairkg/prompt.hpp"

#include <fstream>
#include <sstream>

namespace pairkg {

namespace {

constexpr const char* kOpen = "\xE2\x9F\xA6";   // U+27E6
constexpr const char* kClose = "\xE2\x9F\xA7";  // U+27E7

}  // namespace

std::string render_prompt(const std::string& template_text,
                          const std::map<std::string, std::string>& slots) {
  std::string out;
  out.reserve(template_text.size());
  std::size_t i = 0;
  while (i < template_text.size()) {
    char c = template_text[i];
    if (c != '{') {
      out.push_back(c);
      ++i;
      continue;
    }
    std::size_t end = template_text.find('}', i + 1);
    if (end == std::string::npos) {
      out.push_back(c);
      ++i;
      continue;
    }
    std::string name = template_text.substr(i + 1, end - i - 1);
    auto it = slots.find(name);
    if (it == slots.end()) {
      throw PromptError("template references unbound slot '" + name + "'");
    }
    out += it->second;
    i = end + 1;
  }
  return out;
}

std::string strip_sections(const std::string& template_text,
                           const std::set<std::string>& keep) {
  std::string out;
  out.reserve(template_text.size());
  std::size_t i = 0;
  const std::string open(kOpen), close(kClose);
  while (i < template_text.size()) {
    std::size_t start = template_text.find(open, i);
    if (start == std::string::npos) {
      out += template_text.substr(i);
      break;
    }
    std::size_t tag_end = template_text.find(close, start + open.size());
    if (tag_end == std::string::npos) {
      out += template_text.substr(i);
      break;
    }
    std::string tag = template_text.substr(start + open.size(),
                                           tag_end - start - open.size());
    out += template_text.substr(i, start - i);

    const std::string end_marker = open + "/" + tag + close;
    std::size_t body_start = tag_end + close.size();
    std::size_t body_end = template_text.find(end_marker, body_start);
    if (body_end == std::string::npos) {
      throw PromptError("unterminated section '" + tag + "' in template");
    }
    if (keep.count(tag)) {
      out += template_text.substr(body_start, body_end - body_start);
    }
    i = body_end + end_marker.size();
  }
  return out;
}

std::string load_template_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw PromptError("cannot open template file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace pairkg
