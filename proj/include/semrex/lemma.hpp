#pragma once

#include <string>
#include <string_view>

namespace semrex {

/// Rule-based English lemma: lowercases, consults an irregular-form table,
/// then strips one inflectional suffix (-s/-es/-ies, -ing, -ed, and -er/-est
/// on known gradable adjectives) with consonant undoubling and silent-e
/// restoration. Words containing an apostrophe are only lowercased.
///
/// The result is always a fixed point: default_lemma(default_lemma(w)) ==
/// default_lemma(w).
std::string default_lemma(std::string_view word);

}  // namespace semrex
