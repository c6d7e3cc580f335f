#include "semrex/matcher.hpp"

#include <algorithm>
#include <fstream>
#include <optional>
#include <sstream>
#include <thread>

#include "semrex/hash.hpp"
#include "semrex/lemma.hpp"
#include "semrex/resources.hpp"
#include "semrex/text.hpp"

namespace semrex {

WordSequence WordSequence::from_text(std::string_view input) {
  WordSequence doc;
  doc.text = std::string(input);
  std::size_t i = 0;
  while (i < input.size()) {
    while (i < input.size() && text::is_space(input[i])) ++i;
    std::size_t j = i;
    while (j < input.size() && !text::is_space(input[j])) ++j;
    if (j > i) {
      doc.words.emplace_back(input.substr(i, j - i));
      doc.offsets.push_back({i, j});
    }
    i = j;
  }
  return doc;
}

std::string WordSequence::join(std::size_t begin, std::size_t end) const {
  std::string out;
  for (std::size_t i = begin; i < end; ++i) {
    if (i > begin) out += ' ';
    out += words[i];
  }
  return out;
}

std::string_view lexeme_surface(std::string_view word) { return text::strip_punctuation(word); }

bool symbol_matches(std::string_view payload, const WordSequence& doc, std::size_t begin, std::size_t end,
                    SymbolPolicy policy) {
  std::string normalized = text::normalize_whitespace(payload);
  if (normalized.empty() || end <= begin || end > doc.size()) return false;
  std::size_t width = static_cast<std::size_t>(std::count(normalized.begin(), normalized.end(), ' ')) + 1;
  if (end - begin != width) return false;
  std::string joined = doc.join(begin, end);
  if (policy == SymbolPolicy::whole_words) return joined == normalized;
  return joined.find(normalized) != std::string::npos;
}

namespace {

// Thompson automaton over word positions. Primitive edges consume one or
// more words; every other edge is an epsilon move.
struct Automaton {
  struct State {
    std::vector<int> epsilon;
    int primitive = -1;  // index into `primitives`
    int target = -1;
  };
  std::vector<State> states;
  std::vector<const RegexNode*> primitives;
  int start = -1;
  int accept = -1;

  int add_state() {
    states.emplace_back();
    return static_cast<int>(states.size()) - 1;
  }
};

struct Fragment {
  int start;
  int accept;
};

class Compiler {
 public:
  Compiler(Automaton& a, const WordSequence& doc, const OracleBundle& oracles)
      : a_(a), doc_(doc), oracles_(oracles) {}

  Fragment compile(const RegexNode& n) {
    switch (n.kind) {
      case NodeKind::symbol:
      case NodeKind::lexeme:
      case NodeKind::field: {
        int s = a_.add_state();
        int t = a_.add_state();
        a_.states[s].primitive = static_cast<int>(a_.primitives.size());
        a_.states[s].target = t;
        a_.primitives.push_back(&n);
        return {s, t};
      }
      case NodeKind::context: {
        if (!context_accepts(n.text)) {
          // Unreachable accept: the fragment can never complete.
          return {a_.add_state(), a_.add_state()};
        }
        return compile(n.child());
      }
      case NodeKind::sequence: {
        Fragment first = compile(n.children.front());
        int tail = first.accept;
        for (std::size_t i = 1; i < n.children.size(); ++i) {
          Fragment next = compile(n.children[i]);
          a_.states[tail].epsilon.push_back(next.start);
          tail = next.accept;
        }
        return {first.start, tail};
      }
      case NodeKind::alternation: {
        int s = a_.add_state();
        int t = a_.add_state();
        for (const auto& branch : n.children) {
          Fragment f = compile(branch);
          a_.states[s].epsilon.push_back(f.start);
          a_.states[f.accept].epsilon.push_back(t);
        }
        return {s, t};
      }
      case NodeKind::optional: {
        int s = a_.add_state();
        int t = a_.add_state();
        Fragment f = compile(n.child());
        a_.states[s].epsilon.push_back(f.start);
        a_.states[s].epsilon.push_back(t);
        a_.states[f.accept].epsilon.push_back(t);
        return {s, t};
      }
    }
    throw std::logic_error("unknown node kind");
  }

 private:
  bool context_accepts(const std::string& label) {
    if (auto it = context_memo_.find(label); it != context_memo_.end()) return it->second;
    if (!oracles_.context) throw OracleError("no context oracle configured", 0, doc_.size());
    bool ok;
    try {
      ok = oracles_.context(doc_.text, label);
    } catch (const std::exception& e) {
      throw OracleError(std::string("context oracle failed: ") + e.what(), 0, doc_.size());
    }
    context_memo_.emplace(label, ok);
    return ok;
  }

  Automaton& a_;
  const WordSequence& doc_;
  const OracleBundle& oracles_;
  std::unordered_map<std::string, bool> context_memo_;
};

class Runner {
 public:
  Runner(const Automaton& a, const WordSequence& doc, const OracleBundle& oracles, MatchOptions options)
      : a_(a), doc_(doc), oracles_(oracles), options_(options), ends_(a.primitives.size()) {
    lemmas_.resize(doc.size());
  }

  void run(std::vector<MatchSpan>& out, const RegexNode* via) {
    const std::size_t n = doc_.size();
    const std::size_t m = a_.states.size();
    std::vector<std::vector<char>> reach(n + 1, std::vector<char>(m, 0));
    for (std::size_t begin = 0; begin < n; ++begin) {
      for (std::size_t p = begin; p <= n; ++p) std::fill(reach[p].begin(), reach[p].end(), 0);
      close(reach[begin], a_.start);
      for (std::size_t p = begin; p <= n; ++p) {
        if (p > begin && reach[p][a_.accept]) out.push_back({begin, p, via});
        if (p == n) break;
        for (std::size_t s = 0; s < m; ++s) {
          if (!reach[p][s] || a_.states[s].primitive < 0) continue;
          for (std::size_t end : primitive_ends(a_.states[s].primitive, p)) {
            close(reach[end], a_.states[s].target);
          }
        }
      }
    }
  }

 private:
  void close(std::vector<char>& set, int state) {
    if (set[state]) return;
    std::vector<int> stack{state};
    set[state] = 1;
    while (!stack.empty()) {
      int s = stack.back();
      stack.pop_back();
      for (int t : a_.states[s].epsilon) {
        if (!set[t]) {
          set[t] = 1;
          stack.push_back(t);
        }
      }
    }
  }

  const std::string& word_lemma(std::size_t i) {
    if (!lemmas_[i]) lemmas_[i] = oracles_.lexical(lexeme_surface(doc_.words[i]));
    return *lemmas_[i];
  }

  const std::vector<std::size_t>& primitive_ends(int prim, std::size_t begin) {
    auto& per_start = ends_[prim];
    if (per_start.empty()) per_start.resize(doc_.size());
    auto& slot = per_start[begin];
    if (slot) return *slot;
    slot.emplace();
    const RegexNode& node = *a_.primitives[prim];
    const std::size_t n = doc_.size();
    switch (node.kind) {
      case NodeKind::symbol: {
        std::string payload = text::normalize_whitespace(node.text);
        std::size_t width = static_cast<std::size_t>(std::count(payload.begin(), payload.end(), ' ')) + 1;
        if (begin + width <= n && symbol_matches(payload, doc_, begin, begin + width, options_.symbol_policy)) {
          slot->push_back(begin + width);
        }
        break;
      }
      case NodeKind::lexeme: {
        if (!oracles_.lexical) throw OracleError("no lexical oracle configured", begin, begin + 1);
        const auto& targets = payload_lemmas(node);
        if (targets.empty() || begin + targets.size() > n) break;
        bool ok = true;
        for (std::size_t k = 0; k < targets.size() && ok; ++k) {
          try {
            ok = word_lemma(begin + k) == targets[k];
          } catch (const std::exception& e) {
            throw OracleError(std::string("lexical oracle failed: ") + e.what(), begin + k, begin + k + 1);
          }
        }
        if (ok) slot->push_back(begin + targets.size());
        break;
      }
      case NodeKind::field: {
        if (!oracles_.field) throw OracleError("no field oracle configured", begin, begin + 1);
        std::size_t max_len = std::min(oracles_.max_field_words, n - begin);
        for (std::size_t len = 1; len <= max_len; ++len) {
          bool ok;
          try {
            ok = oracles_.field(doc_.join(begin, begin + len), node.text);
          } catch (const std::exception& e) {
            throw OracleError(std::string("field oracle failed: ") + e.what(), begin, begin + len);
          }
          if (ok) slot->push_back(begin + len);
        }
        break;
      }
      default:
        break;
    }
    return *slot;
  }

  const std::vector<std::string>& payload_lemmas(const RegexNode& node) {
    auto it = payload_memo_.find(&node);
    if (it != payload_memo_.end()) return it->second;
    std::vector<std::string> lemmas;
    for (const auto& w : text::split_whitespace(node.text)) {
      std::string_view surface = lexeme_surface(w);
      if (surface.empty()) continue;
      lemmas.push_back(oracles_.lexical(surface));
    }
    return payload_memo_.emplace(&node, std::move(lemmas)).first->second;
  }

  const Automaton& a_;
  const WordSequence& doc_;
  const OracleBundle& oracles_;
  MatchOptions options_;
  std::vector<std::vector<std::optional<std::vector<std::size_t>>>> ends_;
  std::vector<std::optional<std::string>> lemmas_;
  std::unordered_map<const RegexNode*, std::vector<std::string>> payload_memo_;
};

void match_branch(const RegexNode& branch, const WordSequence& doc, const OracleBundle& oracles,
                  MatchOptions options, std::vector<MatchSpan>& out) {
  Automaton a;
  Compiler compiler(a, doc, oracles);
  Fragment f = compiler.compile(branch);
  a.start = f.start;
  a.accept = f.accept;
  Runner(a, doc, oracles, options).run(out, &branch);
}

}  // namespace

std::vector<MatchSpan> find_matches(const RegexNode& regex, const WordSequence& doc, const OracleBundle& oracles,
                                    MatchOptions options) {
  std::vector<MatchSpan> spans;
  if (doc.empty()) return spans;
  if (regex.kind == NodeKind::alternation) {
    for (const auto& branch : regex.children) match_branch(branch, doc, oracles, options, spans);
  } else {
    match_branch(regex, doc, oracles, options, spans);
  }
  // Stable so that the first branch producing a span is kept as its `via`.
  std::stable_sort(spans.begin(), spans.end());
  spans.erase(std::unique(spans.begin(), spans.end()), spans.end());
  return spans;
}

std::pair<std::size_t, std::size_t> covering_tokens(const MatchSpan& span, const WordSequence& doc,
                                                    std::span<const CharSpan> token_offsets) {
  std::size_t char_begin = doc.offsets[span.start_word].begin;
  std::size_t char_end = doc.offsets[span.end_word - 1].end;
  std::size_t first = token_offsets.size();
  std::size_t last = 0;
  for (std::size_t t = 0; t < token_offsets.size(); ++t) {
    const CharSpan& tok = token_offsets[t];
    if (tok.end > char_begin && tok.begin < char_end) {
      first = std::min(first, t);
      last = std::max(last, t + 1);
    }
  }
  if (first >= last) return {0, 0};
  return {first, last};
}

// ---------------------------------------------------------------------------

namespace {

std::string normalize_phrase(std::string_view phrase) {
  return text::to_lower(text::strip_punctuation(text::normalize_whitespace(phrase)));
}

}  // namespace

Gazetteer parse_gazetteer(std::string_view content) {
  Gazetteer g;
  std::size_t pos = 0;
  while (pos <= content.size()) {
    std::size_t nl = content.find('\n', pos);
    std::string_view line = content.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? content.size() + 1 : nl + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (text::trim(line).empty() || line.front() == '#') continue;
    std::size_t tab = line.find('\t');
    if (tab == std::string_view::npos) {
      throw std::runtime_error("gazetteer line without a tab: '" + std::string(line) + "'");
    }
    std::string label = text::to_lower(text::normalize_whitespace(line.substr(0, tab)));
    std::string phrase = normalize_phrase(line.substr(tab + 1));
    if (label.empty() || phrase.empty()) continue;
    g[label].insert(std::move(phrase));
  }
  return g;
}

Gazetteer load_gazetteer(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open gazetteer " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_gazetteer(ss.str());
}

FieldOracle wordlist_field_oracle(Gazetteer gazetteer) {
  auto shared = std::make_shared<const Gazetteer>(std::move(gazetteer));
  return [shared](std::string_view phrase, std::string_view label) {
    auto it = shared->find(text::to_lower(text::normalize_whitespace(label)));
    if (it == shared->end()) return false;
    return it->second.contains(normalize_phrase(phrase));
  };
}

ContextOracle keyword_context_oracle(Gazetteer keywords) {
  auto shared = std::make_shared<const Gazetteer>(std::move(keywords));
  return [shared](std::string_view document, std::string_view label) {
    auto it = shared->find(text::to_lower(text::normalize_whitespace(label)));
    if (it == shared->end()) return false;
    std::vector<std::string> words;
    for (const auto& w : text::split_whitespace(document)) {
      std::string_view s = text::strip_punctuation(w);
      if (!s.empty()) words.push_back(text::to_lower(s));
    }
    for (const auto& phrase : it->second) {
      std::vector<std::string> parts = text::split_whitespace(phrase);
      if (parts.empty() || parts.size() > words.size()) continue;
      for (std::size_t i = 0; i + parts.size() <= words.size(); ++i) {
        if (std::equal(parts.begin(), parts.end(), words.begin() + static_cast<std::ptrdiff_t>(i))) return true;
      }
    }
    return false;
  };
}

OracleBundle default_oracles() {
  static const Gazetteer fields = parse_gazetteer(resource("gazetteer.tsv"));
  static const Gazetteer contexts = parse_gazetteer(resource("contexts.tsv"));
  OracleBundle bundle;
  bundle.lexical = [](std::string_view w) { return default_lemma(w); };
  bundle.field = wordlist_field_oracle(fields);
  bundle.context = keyword_context_oracle(contexts);
  return bundle;
}

OracleCache::OracleCache(std::filesystem::path dir, std::string backend_id)
    : dir_(std::move(dir)), backend_id_(std::move(backend_id)) {
  std::filesystem::create_directories(dir_);
}

bool OracleCache::lookup_or_compute(std::string_view label, std::string_view phrase,
                                    const std::function<bool()>& compute) {
  std::string key_material = backend_id_;
  key_material += '\0';
  key_material += label;
  key_material += '\0';
  key_material += phrase;
  std::string key = sha256_hex(key_material);
  {
    std::lock_guard lock(mutex_);
    if (auto it = memory_.find(key); it != memory_.end()) return it->second;
  }
  std::filesystem::path file = dir_ / (key + ".bool");
  if (std::ifstream in(file); in) {
    char c = 0;
    in.get(c);
    bool value = c == '1';
    std::lock_guard lock(mutex_);
    memory_.emplace(key, value);
    return value;
  }
  bool value = compute();
  {
    std::lock_guard lock(mutex_);
    ++misses_;
    memory_.emplace(key, value);
  }
  // Write-then-rename; identical concurrent writes produce identical files.
  std::filesystem::path tmp = file;
  tmp += ".tmp" + std::to_string(std::hash<std::thread::id>{}(std::this_thread::get_id()));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << (value ? '1' : '0');
  }
  std::error_code ec;
  std::filesystem::rename(tmp, file, ec);
  return value;
}

FieldOracle memoize_oracle(FieldOracle oracle, std::shared_ptr<OracleCache> cache) {
  return [oracle = std::move(oracle), cache = std::move(cache)](std::string_view text, std::string_view label) {
    return cache->lookup_or_compute(label, text, [&] { return oracle(text, label); });
  };
}

}  // namespace semrex
