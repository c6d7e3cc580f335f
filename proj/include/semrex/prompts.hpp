#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "semrex/llm.hpp"

namespace semrex {

/// Splits a prompt listing into messages. A line consisting only of a role
/// tag opens a message when none is open and closes the open one otherwise,
/// so misspelled or mismatched closing tags are tolerated. Message content is
/// the lines in between, joined with '\n'. Throws std::invalid_argument on
/// text outside a message or an unclosed final message.
std::vector<ChatMessage> parse_prompt_listing(std::string_view text);

/// Named listing from data/prompts with `{SEMANTIC_REGEX_DESCRIPTION}`
/// replaced by the language definition and `{{` `}}` unescaped.
std::vector<ChatMessage> prompt_messages(std::string_view name);

/// The raw listing text as shipped.
std::string_view prompt_listing(std::string_view name);

}  // namespace semrex
