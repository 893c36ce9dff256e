#pragma once

#include <map>
#include <set>
#include <stdexcept>
#include <string>

namespace pairkg {

struct PromptError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Single-pass {slot} substitution. Every slot the template references must
// have a binding (possibly empty); inserted values are never re-expanded.
std::string render_prompt(const std::string& template_text,
                          const std::map<std::string, std::string>& slots);

// Conditional sections delimited by the markers U+27E6 tag U+27E7 ...
// U+27E6 /tag U+27E7. Sections whose tag is in `keep` lose only the markers;
// the rest are removed with their content. Sections do not nest.
std::string strip_sections(const std::string& template_text,
                           const std::set<std::string>& keep);

std::string load_template_file(const std::string& path);

}  // namespace pairkg
