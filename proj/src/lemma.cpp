#include "semrex/lemma.hpp"

#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>

#include "semrex/text.hpp"

namespace semrex {
namespace {

const std::unordered_map<std::string_view, std::string_view>& irregular_forms() {
  static const std::unordered_map<std::string_view, std::string_view> table = {
      // be / have / do / go
      {"am", "be"}, {"is", "be"}, {"are", "be"}, {"was", "be"}, {"were", "be"}, {"been", "be"},
      {"being", "be"}, {"has", "have"}, {"had", "have"}, {"having", "have"}, {"does", "do"},
      {"did", "do"}, {"done", "do"}, {"goes", "go"}, {"went", "go"}, {"gone", "go"},
      // strong and irregular verbs
      {"ran", "run"}, {"said", "say"}, {"says", "say"}, {"made", "make"}, {"took", "take"},
      {"taken", "take"}, {"came", "come"}, {"saw", "see"}, {"seen", "see"}, {"knew", "know"},
      {"known", "know"}, {"got", "get"}, {"gotten", "get"}, {"gave", "give"}, {"given", "give"},
      {"found", "find"}, {"thought", "think"}, {"told", "tell"}, {"became", "become"},
      {"felt", "feel"}, {"brought", "bring"}, {"began", "begin"}, {"begun", "begin"},
      {"kept", "keep"}, {"held", "hold"}, {"wrote", "write"}, {"written", "write"},
      {"writing", "write"}, {"stood", "stand"}, {"heard", "hear"}, {"meant", "mean"},
      {"met", "meet"}, {"paid", "pay"}, {"sat", "sit"}, {"spoke", "speak"}, {"spoken", "speak"},
      {"led", "lead"}, {"fed", "feed"}, {"grew", "grow"}, {"grown", "grow"}, {"lost", "lose"},
      {"fell", "fall"}, {"fallen", "fall"}, {"sent", "send"}, {"built", "build"},
      {"understood", "understand"}, {"drew", "draw"}, {"drawn", "draw"}, {"broke", "break"},
      {"broken", "break"}, {"spent", "spend"}, {"drove", "drive"}, {"driven", "drive"},
      {"bought", "buy"}, {"wore", "wear"}, {"worn", "wear"}, {"chose", "choose"},
      {"chosen", "choose"}, {"sought", "seek"}, {"threw", "throw"}, {"thrown", "throw"},
      {"caught", "catch"}, {"fought", "fight"}, {"taught", "teach"}, {"sold", "sell"},
      {"flew", "fly"}, {"flown", "fly"}, {"ate", "eat"}, {"eaten", "eat"}, {"sang", "sing"},
      {"sung", "sing"}, {"swam", "swim"}, {"swum", "swim"}, {"won", "win"}, {"slept", "sleep"},
      {"forgot", "forget"}, {"forgotten", "forget"}, {"hid", "hide"}, {"hidden", "hide"},
      {"shook", "shake"}, {"shaken", "shake"}, {"stole", "steal"}, {"stolen", "steal"},
      {"woke", "wake"}, {"woken", "wake"}, {"froze", "freeze"}, {"frozen", "freeze"},
      {"rode", "ride"}, {"ridden", "ride"}, {"struck", "strike"}, {"dug", "dig"},
      {"fled", "flee"}, {"bent", "bend"}, {"lent", "lend"}, {"dealt", "deal"}, {"slid", "slide"},
      {"dying", "die"}, {"lying", "lie"}, {"tying", "tie"},
      // regular spellings the suffix rules get wrong
      {"used", "use"}, {"using", "use"}, {"agreed", "agree"}, {"freed", "free"},
      {"guaranteed", "guarantee"}, {"changed", "change"}, {"changing", "change"},
      {"challenged", "challenge"}, {"challenging", "challenge"}, {"focused", "focus"},
      {"focusing", "focus"}, {"invited", "invite"}, {"inviting", "invite"},
      {"completed", "complete"}, {"completing", "complete"}, {"deleted", "delete"},
      {"ignored", "ignore"}, {"ignoring", "ignore"}, {"restored", "restore"},
      {"explored", "explore"}, {"exploring", "explore"}, {"controlled", "control"},
      {"controlling", "control"}, {"created", "create"}, {"creating", "create"},
      {"breathed", "breathe"}, {"breathing", "breathe"}, {"biased", "bias"},
      // irregular plurals
      {"men", "man"}, {"women", "woman"}, {"children", "child"}, {"feet", "foot"},
      {"teeth", "tooth"}, {"mice", "mouse"}, {"geese", "goose"}, {"wolves", "wolf"},
      {"knives", "knife"}, {"halves", "half"}, {"shelves", "shelf"}, {"wives", "wife"},
      {"thieves", "thief"}, {"buses", "bus"}, {"heroes", "hero"}, {"potatoes", "potato"},
      {"tomatoes", "tomato"}, {"echoes", "echo"},
      // irregular comparison
      {"better", "good"}, {"best", "good"}, {"worse", "bad"}, {"worst", "bad"},
      // base forms that look inflected
      {"during", "during"}, {"morning", "morning"}, {"evening", "evening"},
      {"nothing", "nothing"}, {"something", "something"}, {"anything", "anything"},
      {"everything", "everything"}, {"ceiling", "ceiling"}, {"hundred", "hundred"},
      {"sacred", "sacred"}, {"naked", "naked"}, {"wicked", "wicked"}, {"hatred", "hatred"},
      {"news", "news"}, {"series", "series"}, {"species", "species"}, {"always", "always"},
      {"perhaps", "perhaps"}, {"politics", "politics"}, {"physics", "physics"},
      {"economics", "economics"}, {"mathematics", "mathematics"}, {"lens", "lens"},
  };
  return table;
}

// Gradable adjectives whose -er/-est forms are stripped. Other -er words
// (water, paper, number) are left alone.
const std::unordered_set<std::string_view>& comparable_adjectives() {
  static const std::unordered_set<std::string_view> set = {
      "fast", "slow", "quick", "big", "small", "large", "tall", "short", "long", "high", "low",
      "deep", "wide", "narrow", "old", "young", "new", "strong", "weak", "hard", "soft",
      "great", "cheap", "rich", "poor", "dark", "light", "bright", "warm", "cold", "hot",
      "cool", "easy", "happy", "early", "late", "near", "nice", "fine", "safe", "close",
      "simple", "busy", "heavy", "thin", "thick", "fat", "wet", "dry", "clean", "clear",
      "loud", "quiet", "sad", "mad", "kind", "smart", "brave", "calm", "fresh", "full",
      "sweet", "sharp", "tough", "wise", "pretty", "ugly", "funny", "lucky", "angry",
      "healthy", "wealthy", "tiny", "huge", "rare", "pure", "true", "free", "firm", "steep",
  };
  return set;
}

bool is_vowel(char c) { return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u'; }

// 'y' acts as a vowel after a consonant (typ-ed, gym).
bool is_vowel_at(const std::string& s, std::size_t i) {
  if (is_vowel(s[i])) return true;
  return s[i] == 'y' && i > 0 && !is_vowel(s[i - 1]);
}

bool has_vowel(const std::string& s) {
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (is_vowel_at(s, i)) return true;
  }
  return false;
}

bool is_consonant_at(const std::string& s, std::size_t i) { return !is_vowel_at(s, i); }

int vowel_groups(const std::string& s) {
  int groups = 0;
  bool prev = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    bool v = is_vowel_at(s, i);
    if (v && !prev) ++groups;
    prev = v;
  }
  return groups;
}

bool ends_with(const std::string& s, std::string_view suffix) { return s.ends_with(suffix); }

// Ends consonant-vowel-consonant.
bool ends_cvc(const std::string& s) {
  std::size_t n = s.size();
  if (n < 3) return false;
  return is_consonant_at(s, n - 3) && is_vowel_at(s, n - 2) && is_consonant_at(s, n - 1);
}

// Multi-syllable stems whose final (vowel, consonant) pair usually hides a
// silent e: decid(e), translat(e), requir(e), combin(e), ...
bool silent_e_tail(char vowel, char consonant) {
  static const std::unordered_set<std::string_view> tails = {
      "id", "ud", "od", "ad", "ib", "ir", "ur", "ar", "us", "os", "as", "is",
      "at", "ut", "um", "in", "ok", "ak", "ap", "il", "ag", "ig", "ug"};
  const char pair[2] = {vowel, consonant};
  return tails.contains(std::string_view(pair, 2));
}

// Repairs the stem left after removing -ing or -ed.
std::string restore_stem(std::string stem) {
  std::size_t n = stem.size();
  if (n >= 4 && stem[n - 1] == stem[n - 2] && is_consonant_at(stem, n - 1)) {
    char c = stem[n - 1];
    if (c != 'l' && c != 's' && c != 'z' && c != 'f') {
      stem.pop_back();
      return stem;
    }
    return stem;
  }
  if (n < 2) return stem;
  const char last = stem[n - 1];
  const char prev = stem[n - 2];
  auto with_e = [&] { return stem + "e"; };

  if (last == 'v' || last == 'z' || (last == 'c' && prev != 'c') || (last == 'u' && n >= 3 && !is_vowel(prev))) {
    return with_e();
  }
  for (std::string_view tail : {"dg", "rg", "lg", "ns", "rs", "ps"}) {
    if (ends_with(stem, tail)) return with_e();
  }
  if (last == 's' && n >= 3) {
    std::string_view vv = std::string_view(stem).substr(n - 3, 2);
    if (vv == "ai" || vv == "ea" || vv == "au" || vv == "ou" || vv == "oi") return with_e();
  }
  if (last == 'l' && !is_vowel(prev) && prev != 'l' && prev != 'r' && prev != 'w' && prev != 'y') {
    return with_e();
  }
  if (ends_with(stem, "uir")) return with_e();
  if (ends_with(stem, "ang") && n >= 5) return with_e();
  if (ends_cvc(stem) && last != 'w' && last != 'x' && last != 'y') {
    if (vowel_groups(stem) == 1) return with_e();
    if (silent_e_tail(prev, last)) return with_e();
  }
  return stem;
}

std::string strip_plural(const std::string& w) {
  std::size_t n = w.size();
  if (ends_with(w, "ies")) return n > 4 ? w.substr(0, n - 3) + "y" : w.substr(0, n - 1);
  if (ends_with(w, "sses") || ends_with(w, "zzes") || ends_with(w, "xes") || ends_with(w, "ches") ||
      ends_with(w, "shes")) {
    return w.substr(0, n - 2);
  }
  if (ends_with(w, "ss") || ends_with(w, "us") || ends_with(w, "is")) return w;
  return w.substr(0, n - 1);
}

std::string strip_comparative(const std::string& w) {
  const auto& adjectives = comparable_adjectives();
  std::size_t n = w.size();
  auto try_base = [&](std::string base) -> std::string {
    if (adjectives.contains(base)) return base;
    std::size_t b = base.size();
    if (b >= 3 && base[b - 1] == base[b - 2]) {
      std::string undoubled = base.substr(0, b - 1);
      if (adjectives.contains(undoubled)) return undoubled;
    }
    if (adjectives.contains(base + "e")) return base + "e";
    return {};
  };
  if (ends_with(w, "iest") && n > 5) {
    std::string base = w.substr(0, n - 4) + "y";
    if (adjectives.contains(base)) return base;
  }
  if (ends_with(w, "ier") && n > 4) {
    std::string base = w.substr(0, n - 3) + "y";
    if (adjectives.contains(base)) return base;
  }
  if (ends_with(w, "est") && n > 4) {
    if (auto base = try_base(w.substr(0, n - 3)); !base.empty()) return base;
  }
  if (ends_with(w, "er") && n > 3) {
    if (auto base = try_base(w.substr(0, n - 2)); !base.empty()) return base;
  }
  return w;
}

std::string apply_rules(const std::string& w) {
  if (auto it = irregular_forms().find(w); it != irregular_forms().end()) return std::string(it->second);
  if (w.size() <= 3 || w.find('\'') != std::string::npos) return w;
  std::size_t n = w.size();

  if (ends_with(w, "ing")) {
    std::string stem = w.substr(0, n - 3);
    if (stem.size() >= 2 && has_vowel(stem)) return restore_stem(std::move(stem));
    return w;
  }
  if (ends_with(w, "ed")) {
    if (ends_with(w, "eed")) return w;
    if (ends_with(w, "ied")) return n > 4 ? w.substr(0, n - 3) + "y" : w.substr(0, n - 1);
    std::string stem = w.substr(0, n - 2);
    if (stem.size() >= 2 && has_vowel(stem)) return restore_stem(std::move(stem));
    return w;
  }
  if (ends_with(w, "er") || ends_with(w, "est")) {
    std::string base = strip_comparative(w);
    if (base != w) return base;
  }
  if (w.back() == 's') return strip_plural(w);
  return w;
}

}  // namespace

std::string default_lemma(std::string_view word) {
  std::string lower = text::to_lower(word);
  std::string lemma = apply_rules(lower);
  // Keep the surface form when the rules would keep rewriting their own output.
  if (apply_rules(lemma) != lemma) return lower;
  return lemma;
}

}  // namespace semrex
