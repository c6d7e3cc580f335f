#include "semrex/prompts.hpp"

#include <regex>

#include <fmt/format.h>

#include "semrex/resources.hpp"
#include "semrex/text.hpp"

using semrex::text::replace_all;
using semrex::text::trim;

namespace semrex {

namespace {

// Role tags as they appear in the listings, including their misspellings.
std::optional<Role> tag_role(std::string_view line) {
  static const std::regex tag(R"(</?(system|user|assistant|assitant|asistant)>)");
  std::match_results<std::string_view::const_iterator> m;
  if (!std::regex_match(line.begin(), line.end(), m, tag)) return std::nullopt;
  std::string name = m[1].str();
  if (name == "system") return Role::system;
  if (name == "user") return Role::user;
  return Role::assistant;
}

}  // namespace

std::vector<ChatMessage> parse_prompt_listing(std::string_view text) {
  std::vector<ChatMessage> out;
  std::optional<ChatMessage> open;
  std::vector<std::string_view> lines;
  std::size_t line_no = 0;
  while (!text.empty()) {
    auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (auto role = tag_role(line)) {
      if (open) {
        std::string content;
        for (std::size_t i = 0; i < lines.size(); ++i) {
          if (i) content += '\n';
          content += lines[i];
        }
        open->content = std::move(content);
        out.push_back(std::move(*open));
        open.reset();
        lines.clear();
      } else {
        if (line.substr(0, 2) == "</") throw std::invalid_argument(fmt::format("line {}: closing tag with no open message", line_no));
        open = ChatMessage{*role, {}};
      }
      continue;
    }
    if (open) {
      lines.push_back(line);
    } else if (!trim(line).empty()) {
      throw std::invalid_argument(fmt::format("line {}: text outside a message", line_no));
    }
  }
  if (open) throw std::invalid_argument("listing ends inside a message");
  return out;
}

std::string_view prompt_listing(std::string_view name) {
  return resource(fmt::format("prompts/{}.txt", name));
}

std::vector<ChatMessage> prompt_messages(std::string_view name) {
  auto messages = parse_prompt_listing(prompt_listing(name));
  const std::string language(trim(resource("prompts/semantic_regex_language.txt")));
  for (auto& m : messages) {
    m.content = replace_all(m.content, "{SEMANTIC_REGEX_DESCRIPTION}", language);
    m.content = replace_all(replace_all(m.content, "{{", "{"), "}}", "}");
  }
  return messages;
}

}  // namespace semrex
