#include "semrex/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <regex>

#include <fmt/format.h>

#include "semrex/parallel.hpp"
#include "semrex/prompts.hpp"
#include "semrex/rng.hpp"
#include "semrex/scoring.hpp"
#include "semrex/text.hpp"

namespace semrex {

using nlohmann::json;

std::string_view to_string(MetricId m) {
  switch (m) {
    case MetricId::detection: return "detection";
    case MetricId::fuzzing: return "fuzzing";
    case MetricId::responsiveness: return "responsiveness";
    case MetricId::purity: return "purity";
    case MetricId::clarity: return "clarity";
    case MetricId::faithfulness: return "faithfulness";
  }
  return "detection";
}

MetricId parse_metric(std::string_view name) {
  for (MetricId m : {MetricId::detection, MetricId::fuzzing, MetricId::responsiveness, MetricId::purity,
                     MetricId::clarity, MetricId::faithfulness}) {
    if (to_string(m) == name) return m;
  }
  throw std::invalid_argument(fmt::format("unknown metric '{}'", name));
}

EvaluatorConfig EvaluatorConfig::defaults(MetricId m) {
  EvaluatorConfig c;
  switch (m) {
    case MetricId::detection:
    case MetricId::fuzzing:
      c.temperature = 0.7;
      c.examples_per_call = 5;
      c.max_tokens = 500;
      break;
    case MetricId::responsiveness:
    case MetricId::purity:
    case MetricId::faithfulness:
      c.temperature = 1.0;
      c.examples_per_call = 15;
      break;
    case MetricId::clarity:
      c.temperature = 1.0;
      c.examples_per_call = 5;
      break;
  }
  return c;
}

json EvaluatorConfig::to_json() const {
  return {{"model", model},
          {"temperature", temperature},
          {"top_p", top_p},
          {"max_tokens", max_tokens ? json(*max_tokens) : json(nullptr)},
          {"examples_per_call", examples_per_call},
          {"tokens_per_example", tokens_per_example}};
}

json MetricResult::to_json() const {
  json d = json::array();
  for (const auto& e : details) {
    json row = {{"id", e.id}, {"positive", e.positive}, {"text", e.text},
                {"judgment", e.judgment ? json(*e.judgment) : json(nullptr)}};
    if (metric == MetricId::clarity) row["activation"] = e.score;
    if (!e.group.empty()) row["group"] = e.group;
    d.push_back(std::move(row));
  }
  return {{"metric", to_string(metric)},
          {"score", std::isfinite(score) ? json(score) : json(nullptr)},
          {"n_pos", n_pos},
          {"n_neg", n_neg},
          {"skipped", skipped},
          {"flagged", flagged},
          {"warnings", warnings},
          {"usage", {{"prompt_tokens", usage.prompt_tokens}, {"completion_tokens", usage.completion_tokens}}},
          {"config", config},
          {"details", d}};
}

std::string evaluator_description(const Description& d) {
  if (d.method == Method::semantic_regex && d.parsed) return render(*d.parsed);
  return d.extracted;
}

bool uses_regex_prompts(const Description& d) { return d.method == Method::semantic_regex; }

std::string evaluator_text(std::string_view s) { return text::replace_all(s, "\n", "\\n"); }

// ---------------------------------------------------------------------------
// Reply parsing.

std::optional<std::vector<int>> parse_binary_list(std::string_view reply) {
  auto open = reply.find('[');
  if (open == std::string_view::npos) return std::nullopt;
  auto close = reply.find(']', open);
  if (close == std::string_view::npos) return std::nullopt;
  std::string_view body = reply.substr(open + 1, close - open - 1);
  std::vector<int> out;
  if (text::trim(body).empty()) return out;
  while (true) {
    auto comma = body.find(',');
    auto item = text::trim(body.substr(0, comma));
    if (item == "0") {
      out.push_back(0);
    } else if (item == "1") {
      out.push_back(1);
    } else {
      return std::nullopt;
    }
    if (comma == std::string_view::npos) break;
    body = body.substr(comma + 1);
  }
  return out;
}

std::optional<std::map<std::size_t, int>> parse_rating_map(std::string_view reply) {
  auto open = reply.find('{');
  if (open == std::string_view::npos) return std::nullopt;
  auto close = reply.find('}', open);
  if (close == std::string_view::npos) return std::nullopt;
  std::string body(reply.substr(open + 1, close - open - 1));
  static const std::regex pair(R"re(^\s*(?:"(\d+)"|'(\d+)'|(\d+))\s*:\s*(\d+)\s*(,|$))re");
  std::map<std::size_t, int> out;
  std::smatch m;
  std::string rest = body;
  while (!text::trim(rest).empty()) {
    if (!std::regex_search(rest, m, pair)) return std::nullopt;
    std::string key = m[1].matched ? m[1].str() : m[2].matched ? m[2].str() : m[3].str();
    int rating = std::stoi(m[4].str());
    if (rating < 0 || rating > 2) return std::nullopt;
    out[std::stoul(key)] = rating;
    rest = m.suffix().str();
  }
  return out;
}

std::optional<std::vector<std::string>> parse_string_list(std::string_view reply) {
  auto pos = reply.find('[');
  if (pos == std::string_view::npos) return std::nullopt;
  ++pos;
  std::vector<std::string> out;
  auto skip_ws = [&] {
    while (pos < reply.size() && text::is_space(reply[pos])) ++pos;
  };
  while (true) {
    skip_ws();
    if (pos >= reply.size()) return std::nullopt;
    if (reply[pos] == ']') return out;
    char quote = reply[pos];
    if (quote != '"' && quote != '\'') return std::nullopt;
    ++pos;
    std::string item;
    bool closed = false;
    while (pos < reply.size()) {
      char c = reply[pos++];
      if (c == quote) {
        closed = true;
        break;
      }
      if (c == '\\' && pos < reply.size()) {
        char e = reply[pos++];
        switch (e) {
          case 'n': item += '\n'; break;
          case 't': item += '\t'; break;
          case 'r': item += '\r'; break;
          case 'u':
            if (pos + 4 <= reply.size() &&
                std::all_of(reply.begin() + pos, reply.begin() + pos + 4, [](char h) { return std::isxdigit(static_cast<unsigned char>(h)); })) {
              unsigned cp = std::stoul(std::string(reply.substr(pos, 4)), nullptr, 16);
              pos += 4;
              if (cp < 0x80) {
                item += static_cast<char>(cp);
              } else if (cp < 0x800) {
                item += static_cast<char>(0xC0 | (cp >> 6));
                item += static_cast<char>(0x80 | (cp & 0x3F));
              } else {
                item += static_cast<char>(0xE0 | (cp >> 12));
                item += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
                item += static_cast<char>(0x80 | (cp & 0x3F));
              }
            }
            break;
          default: item += e;
        }
        continue;
      }
      item += c;
    }
    if (!closed) return std::nullopt;
    out.push_back(std::move(item));
    skip_ws();
    if (pos >= reply.size()) return std::nullopt;
    if (reply[pos] == ',') {
      ++pos;
    } else if (reply[pos] != ']') {
      return std::nullopt;
    }
  }
}

// ---------------------------------------------------------------------------

namespace {

struct Item {
  bool positive = false;
  std::string shown;
};

class Session {
 public:
  Session(ChatProvider& provider, const EvaluatorConfig& config) : provider_(provider), config_(config) {}

  ChatRequest request(std::vector<ChatMessage> messages, std::size_t sample = 0) const {
    ChatRequest r;
    r.model = config_.model;
    r.messages = std::move(messages);
    r.temperature = config_.temperature;
    r.top_p = config_.top_p;
    r.max_tokens = config_.max_tokens;
    r.sample = sample;
    return r;
  }

  std::string ask(const ChatRequest& r) {
    auto resp = provider_.complete(r);
    std::lock_guard lock(mutex_);
    usage_.prompt_tokens += resp.usage.prompt_tokens;
    usage_.completion_tokens += resp.usage.completion_tokens;
    return resp.content;
  }

  /// Asks, then re-asks once with `correction` when `accept` rejects the reply.
  template <class Parse>
  auto ask_with_retry(std::vector<ChatMessage> messages, const std::string& correction, Parse parse,
                      std::size_t sample = 0) -> decltype(parse(std::string_view{})) {
    std::string reply = ask(request(messages, sample));
    if (auto parsed = parse(reply)) return parsed;
    messages.push_back({Role::assistant, reply});
    messages.push_back({Role::user, correction});
    return parse(ask(request(std::move(messages), sample)));
  }

  void warn(std::string w) {
    std::lock_guard lock(mutex_);
    warnings_.push_back(std::move(w));
  }

  void finish(MetricResult& r) {
    r.usage = usage_;
    std::sort(warnings_.begin(), warnings_.end());
    r.warnings = warnings_;
  }

  const EvaluatorConfig& config() const { return config_; }

 private:
  ChatProvider& provider_;
  const EvaluatorConfig& config_;
  std::mutex mutex_;
  Usage usage_;
  std::vector<std::string> warnings_;
};

std::vector<ActivationRecord> windows_of(const std::vector<ActivationRecord>& records, std::size_t width) {
  std::vector<ActivationRecord> out;
  for (const auto& r : records) out.push_back(prepare_window(r, width));
  return out;
}

/// Presentation order: a seeded permutation of [0, n).
std::vector<std::size_t> presentation_order(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(seed);
  rng.shuffle(order);
  return order;
}

/// Shuffled items as evaluator-visible details, id = presentation position.
std::vector<ExampleDetail> present(const std::vector<Item>& items, std::uint64_t seed) {
  auto order = presentation_order(items.size(), seed);
  std::vector<ExampleDetail> out;
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    const Item& it = items[order[pos]];
    out.push_back({pos, it.positive, it.shown, std::nullopt, 0.0, {}});
  }
  return out;
}

void count_classes(MetricResult& r) {
  r.n_pos = r.n_neg = 0;
  for (const auto& d : r.details) {
    if (!d.judgment) continue;
    (d.positive ? r.n_pos : r.n_neg) += 1;
  }
}

MetricResult run_binary(MetricId metric, ChatProvider& evaluator, const Description& description,
                        std::vector<Item> items, std::uint64_t seed, const EvaluatorConfig& config) {
  const bool sr = uses_regex_prompts(description);
  auto base = prompt_messages(fmt::format("{}_{}", to_string(metric), sr ? "sr" : "nl"));
  const std::string header = fmt::format("{} explanation: {}\n\nTest examples:",
                                         sr ? "Semantic Regex" : "Latent", evaluator_description(description));
  MetricResult result;
  result.metric = metric;
  result.details = present(items, seed);
  const std::size_t per_call = std::max<std::size_t>(1, config.examples_per_call);
  const std::size_t n_batches = (result.details.size() + per_call - 1) / per_call;
  Session session(evaluator, config);

  for_each_bounded(n_batches, config.max_concurrent_calls, [&](std::size_t b) {
    const std::size_t begin = b * per_call, end = std::min(result.details.size(), begin + per_call);
    std::string user = header;
    for (std::size_t i = begin; i < end; ++i) {
      user += fmt::format("\nExample {}:{}", i - begin, result.details[i].text);
    }
    auto messages = base;
    messages.push_back({Role::user, user});
    const std::size_t k = end - begin;
    auto verdicts = session.ask_with_retry(
        messages,
        fmt::format("Your reply could not be read. Return only a Python list of {} values, each 0 or 1.", k),
        [k](std::string_view reply) {
          auto parsed = parse_binary_list(reply);
          return parsed && parsed->size() == k ? parsed : std::nullopt;
        });
    if (!verdicts) {
      session.warn(fmt::format("batch {} unscorable after re-ask; {} examples excluded", b, k));
      return;
    }
    for (std::size_t i = begin; i < end; ++i) result.details[i].judgment = (*verdicts)[i - begin];
  });

  std::vector<BinaryJudgment> judgments;
  for (const auto& d : result.details) {
    if (d.judgment) judgments.push_back({d.positive, *d.judgment == 1});
  }
  count_classes(result);
  session.finish(result);
  result.config = config.to_json();
  result.config["seed"] = seed;
  result.score = balanced_accuracy(judgments);
  return result;
}

/// Ratings for `details` in batches, keyed by detail id. Missing ids after a
/// re-ask stay unscored.
void rate(Session& session, const Description& description, std::vector<ExampleDetail>& details) {
  const bool sr = uses_regex_prompts(description);
  auto base = prompt_messages(sr ? "rating_sr" : "rating_nl");
  const std::string header = fmt::format("Concept: \"{}\"\n\nSequences:", evaluator_description(description));
  const std::size_t per_call = std::max<std::size_t>(1, session.config().examples_per_call);
  const std::size_t n_batches = (details.size() + per_call - 1) / per_call;
  for_each_bounded(n_batches, session.config().max_concurrent_calls, [&](std::size_t b) {
    const std::size_t begin = b * per_call, end = std::min(details.size(), begin + per_call);
    std::string user = header;
    for (std::size_t i = begin; i < end; ++i) user += fmt::format("\n{}: {}", details[i].id, details[i].text);
    auto messages = base;
    messages.push_back({Role::user, user});
    auto complete = [&](std::string_view reply) -> std::optional<std::map<std::size_t, int>> {
      auto parsed = parse_rating_map(reply);
      if (!parsed) return std::nullopt;
      for (std::size_t i = begin; i < end; ++i) {
        if (!parsed->count(details[i].id)) return std::nullopt;
      }
      return parsed;
    };
    auto ratings = session.ask_with_retry(
        messages,
        "Your reply could not be read or missed some sequence IDs. Return only a Python dictionary mapping every "
        "sequence ID to a rating of 0, 1 or 2.",
        complete);
    if (!ratings) {
      // Keep whatever a lenient read of the last reply cannot provide: nothing.
      session.warn(fmt::format("rating batch {} incomplete after re-ask; {} examples excluded", b, end - begin));
      return;
    }
    for (std::size_t i = begin; i < end; ++i) details[i].judgment = ratings->at(details[i].id);
  });
}

}  // namespace

MetricResult run_detection(ChatProvider& evaluator, const ScoringInput& in, const EvaluatorConfig& config) {
  std::vector<Item> items;
  for (const auto& w : windows_of(in.positives, config.tokens_per_example)) items.push_back({true, evaluator_text(w.text())});
  for (const auto& w : windows_of(in.negatives, config.tokens_per_example)) items.push_back({false, evaluator_text(w.text())});
  return run_binary(MetricId::detection, evaluator, in.description, std::move(items), in.seed, config);
}

MetricResult run_fuzzing(ChatProvider& evaluator, const ScoringInput& in, double threshold,
                         const EvaluatorConfig& config) {
  auto pos = windows_of(in.positives, config.tokens_per_example);
  auto neg = windows_of(in.negatives, config.tokens_per_example);
  if (pos.empty()) throw ScoringError("fuzzing needs at least one positive example");
  std::vector<Item> items;
  for (const auto& w : pos) items.push_back({true, evaluator_text(highlight_text(w, threshold, in.feature_max))});
  for (std::size_t i = 0; i < neg.size(); ++i) {
    items.push_back({false, evaluator_text(transfer_highlights(pos, neg[i], threshold, in.feature_max, i))});
  }
  auto r = run_binary(MetricId::fuzzing, evaluator, in.description, std::move(items), in.seed, config);
  r.config["threshold"] = threshold;
  return r;
}

RatingResult run_rating(ChatProvider& evaluator, const ScoringInput& in, const EvaluatorConfig& config) {
  std::vector<Item> items;
  for (const auto& w : windows_of(in.positives, config.tokens_per_example)) items.push_back({true, evaluator_text(w.text())});
  for (const auto& w : windows_of(in.negatives, config.tokens_per_example)) items.push_back({false, evaluator_text(w.text())});
  Session session(evaluator, config);
  auto details = present(items, in.seed);
  rate(session, in.description, details);

  std::vector<RatedExample> rated;
  for (const auto& d : details) {
    if (d.judgment) rated.push_back({d.positive, *d.judgment});
  }
  auto kept = discard_ambiguous(rated);
  std::vector<LabeledScore> scores;
  for (const auto& r : kept) scores.push_back({r.positive, static_cast<double>(r.rating)});

  RatingResult out;
  out.responsiveness.metric = MetricId::responsiveness;
  out.purity.metric = MetricId::purity;
  for (MetricResult* m : {&out.responsiveness, &out.purity}) {
    m->details = details;
    count_classes(*m);
    session.finish(*m);
    m->config = config.to_json();
    m->config["seed"] = in.seed;
  }
  const double gini = gini_from_scores(scores);
  out.responsiveness.score = std::max(gini, 0.0);
  if (gini < 0) out.responsiveness.warnings.push_back(fmt::format("negative Gini {} clamped to 0", gini));
  out.purity.score = average_precision(rated);
  // Usage is shared; report it once.
  out.purity.usage = {};
  return out;
}

MetricResult run_clarity(ChatProvider& evaluator, ActivationBackend& backend, const Description& description,
                         const std::vector<ActivationRecord>& negatives, std::uint64_t seed,
                         const ClarityConfig& config) {
  const bool sr = uses_regex_prompts(description);
  auto base = prompt_messages(sr ? "clarity_sr" : "clarity_nl");
  Session session(evaluator, config.evaluator);
  std::vector<std::vector<std::string>> per_call(config.generation_calls);
  const std::string user = fmt::format("Concept: \"{}\"\n\nNumber of sequences: {}", evaluator_description(description),
                                       config.sequences_per_call);
  for_each_bounded(config.generation_calls, config.evaluator.max_concurrent_calls, [&](std::size_t c) {
    auto messages = base;
    messages.push_back({Role::user, user});
    auto list = session.ask_with_retry(
        messages, "Your reply could not be read. Return only a Python list of strings.",
        [](std::string_view reply) {
          auto parsed = parse_string_list(reply);
          return parsed && !parsed->empty() ? parsed : std::nullopt;
        },
        c);
    if (!list) {
      session.warn(fmt::format("generation call {} unparseable after re-ask; skipped", c));
      return;
    }
    per_call[c] = std::move(*list);
  });

  MetricResult result;
  result.metric = MetricId::clarity;
  std::vector<std::string> texts;
  std::vector<bool> labels;
  for (const auto& call : per_call) {
    for (const auto& t : call) {
      texts.push_back(t);
      labels.push_back(true);
    }
  }
  const std::size_t n_generated = texts.size();
  if (n_generated == 0) throw ScoringError("clarity: no generated sequences");
  auto neg_windows = windows_of(negatives, config.evaluator.tokens_per_example);
  auto order = presentation_order(neg_windows.size(), seed);
  const std::size_t n_neg = std::min(n_generated, neg_windows.size());
  if (n_neg < n_generated) session.warn(fmt::format("only {} negatives for {} generated sequences", n_neg, n_generated));
  for (std::size_t i = 0; i < n_neg; ++i) {
    texts.push_back(neg_windows[order[i]].text());
    labels.push_back(false);
  }
  auto records = backend.activate(description.feature, texts);
  if (records.size() != texts.size()) throw BackendError("activation backend returned a different number of records");
  std::vector<LabeledScore> scores;
  for (std::size_t i = 0; i < texts.size(); ++i) {
    double peak = peak_activation(records[i]);
    scores.push_back({labels[i], peak});
    result.details.push_back({i, labels[i], texts[i], std::nullopt, peak, {}});
  }
  result.n_pos = n_generated;
  result.n_neg = n_neg;
  const double gini = gini_from_scores(scores);
  result.score = std::max(gini, 0.0);
  if (gini < 0) session.warn(fmt::format("negative Gini {} clamped to 0", gini));
  session.finish(result);
  result.config = config.evaluator.to_json();
  result.config["generation_calls"] = config.generation_calls;
  result.config["sequences_per_call"] = config.sequences_per_call;
  result.config["backend"] = backend.id();
  result.config["seed"] = seed;
  return result;
}

double faithfulness_score(const std::vector<double>& p, bool ratio) {
  if (p.size() < 2) throw std::invalid_argument("faithfulness needs the ablation and at least one factor");
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < p.size(); ++i) {
    double v;
    if (ratio) {
      v = p[0] > 0 ? p[i] / p[0] : (p[i] > 0 ? std::numeric_limits<double>::infinity() : 0.0);
    } else {
      v = p[i] - p[0];
    }
    best = std::max(best, v);
  }
  return best;
}

MetricResult run_faithfulness(ChatProvider& evaluator, SteeringBackend& backend, const Description& description,
                              const std::vector<ActivationRecord>& prompts, double feature_max, std::uint64_t seed,
                              const FaithfulnessConfig& config) {
  MetricResult result;
  result.metric = MetricId::faithfulness;
  result.config = config.evaluator.to_json();
  result.config["factors"] = config.factors;
  result.config["n_tokens"] = config.n_tokens;
  result.config["aggregation"] = config.ratio ? "ratio" : "difference";
  result.config["backend"] = backend.id();
  result.config["seed"] = seed;

  auto zero = std::find(config.factors.begin(), config.factors.end(), 0.0);
  if (zero == config.factors.end()) throw std::invalid_argument("faithfulness factors must include 0 (ablation)");
  // A seeded subset when more prompts than needed are given.
  auto windows = windows_of(prompts, config.evaluator.tokens_per_example);
  auto order = presentation_order(windows.size(), seed);
  std::vector<std::string> prompt_texts;
  for (std::size_t i = 0; i < std::min(config.n_prompts, windows.size()); ++i) {
    prompt_texts.push_back(windows[order[i]].text());
  }
  if (prompt_texts.empty()) throw ScoringError("faithfulness needs at least one prompt");

  Session session(evaluator, config.evaluator);
  std::vector<double> proportions;
  std::vector<double> ordered_factors = {0.0};
  for (double f : config.factors) {
    if (f != 0.0) ordered_factors.push_back(f);
  }
  for (double f : ordered_factors) {
    std::vector<ExampleDetail> details;
    try {
      for (std::size_t i = 0; i < prompt_texts.size(); ++i) {
        std::string continuation = backend.generate(prompt_texts[i], description.feature, f * feature_max, config.n_tokens);
        details.push_back({i, f != 0.0, evaluator_text(continuation), std::nullopt, 0.0, fmt::format("{}", f)});
      }
    } catch (const BackendUnavailable& e) {
      result.skipped = true;
      result.score = std::numeric_limits<double>::quiet_NaN();
      session.warn(e.what());
      session.finish(result);
      result.details.clear();
      return result;
    }
    rate(session, description, details);
    std::size_t twos = 0, kept = 0;
    for (const auto& d : details) {
      if (!d.judgment || *d.judgment == 1) continue;
      ++kept;
      twos += *d.judgment == 2;
    }
    if (kept == 0) session.warn(fmt::format("factor {}: every rating discarded; proportion taken as 0", f));
    proportions.push_back(kept ? static_cast<double>(twos) / static_cast<double>(kept) : 0.0);
    for (auto& d : details) result.details.push_back(std::move(d));
  }
  for (std::size_t i = 0; i < result.details.size(); ++i) result.details[i].id = i;
  json props = json::object();
  for (std::size_t i = 0; i < ordered_factors.size(); ++i) props[fmt::format("{}", ordered_factors[i])] = proportions[i];
  result.config["proportions"] = props;
  result.score = faithfulness_score(proportions, config.ratio);
  result.flagged = !std::isfinite(result.score) || result.score < 0;
  result.n_pos = result.n_neg = 0;
  for (const auto& d : result.details) {
    if (d.judgment && *d.judgment != 1) (d.positive ? result.n_pos : result.n_neg) += 1;
  }
  session.finish(result);
  return result;
}

// ---------------------------------------------------------------------------

std::string_view to_string(JudgePolicy p) {
  switch (p) {
    case JudgePolicy::oracle: return "oracle";
    case JudgePolicy::all_positive: return "all-positive";
    case JudgePolicy::all_negative: return "all-negative";
    case JudgePolicy::inverted: return "inverted";
  }
  return "oracle";
}

JudgePolicy parse_judge_policy(std::string_view name) {
  for (JudgePolicy p : {JudgePolicy::oracle, JudgePolicy::all_positive, JudgePolicy::all_negative, JudgePolicy::inverted}) {
    if (to_string(p) == name) return p;
  }
  throw std::invalid_argument(fmt::format("unknown evaluator policy '{}'", name));
}

namespace {

std::string truth_key(std::string_view shown) {
  return text::normalize_whitespace(text::replace_all(text::replace_all(shown, "<<", ""), ">>", ""));
}

}  // namespace

LabelEvaluator::LabelEvaluator(JudgePolicy policy, std::vector<std::string> generated)
    : policy_(policy), generated_(std::move(generated)) {}

void LabelEvaluator::add_truth(const std::string& text, bool positive) {
  truth_[truth_key(evaluator_text(text))] = positive;
}

std::string LabelEvaluator::id() const { return fmt::format("label-evaluator:{}", to_string(policy_)); }

bool LabelEvaluator::verdict(const std::string& shown) const {
  switch (policy_) {
    case JudgePolicy::all_positive: return true;
    case JudgePolicy::all_negative: return false;
    default: break;
  }
  auto it = truth_.find(truth_key(shown));
  bool truth = it != truth_.end() && it->second;
  return policy_ == JudgePolicy::inverted ? !truth : truth;
}

ChatResponse LabelEvaluator::complete(const ChatRequest& request) {
  request.validate();
  const std::string& user = request.last_user();
  std::string reply;
  static const std::regex example_line(R"(^Example \d+:(.*)$)");
  static const std::regex rated_line(R"(^(\d+): (.*)$)");
  static const std::regex count_line(R"(Number of sequences: (\d+))");
  std::smatch m;
  if (user.find("\n\nTest examples:") != std::string::npos) {
    std::vector<std::string> answers;
    for (const auto& line : text::split_lines(user)) {
      if (std::regex_match(line, m, example_line)) answers.push_back(verdict(m[1].str()) ? "1" : "0");
    }
    reply = "[" + text::join(answers, ",") + "]";
  } else if (user.find("\n\nSequences:") != std::string::npos) {
    json out = json::object();
    for (const auto& line : text::split_lines(user)) {
      if (std::regex_match(line, m, rated_line)) out[m[1].str()] = verdict(m[2].str()) ? 2 : 0;
    }
    reply = out.dump();
  } else if (std::regex_search(user, m, count_line)) {
    if (generated_.empty()) throw MockMiss("label evaluator has no sequences to generate");
    std::size_t n = std::stoul(m[1].str());
    json out = json::array();
    for (std::size_t i = 0; i < n; ++i) out.push_back(generated_[(request.sample * n + i) % generated_.size()]);
    reply = out.dump();
  } else {
    throw MockMiss("label evaluator does not recognize the request");
  }
  ChatResponse resp;
  resp.content = reply;
  for (const auto& msg : request.messages) resp.usage.prompt_tokens += estimate_tokens(msg.content);
  resp.usage.completion_tokens = estimate_tokens(reply);
  resp.provenance = {id(), request.model, request_hash(request)};
  return resp;
}

}  // namespace semrex
