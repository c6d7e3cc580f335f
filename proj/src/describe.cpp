#include "semrex/describe.hpp"

#include <fmt/format.h>

#include "semrex/prompts.hpp"
#include "semrex/text.hpp"

namespace semrex {

MethodSpec MethodSpec::defaults(Method m) {
  MethodSpec s;
  s.method = m;
  switch (m) {
    case Method::token_act_pair:
      s.n_fewshot = 3;
      s.n_examples = 5;
      s.tokens_per_example = 64;
      s.temperature = 1.0;
      s.top_p = 1.0;
      s.activation_threshold = std::nullopt;
      break;
    case Method::max_acts:
      s.n_fewshot = 3;
      s.n_examples = 20;
      s.tokens_per_example = 32;
      s.temperature = 0.7;
      s.top_p = 1.0;
      s.activation_threshold = 0.60;
      break;
    case Method::semantic_regex:
      s.n_fewshot = 4;
      s.n_examples = 10;
      s.tokens_per_example = 32;
      s.temperature = 1.0;
      s.top_p = 1.0;
      s.activation_threshold = 0.30;
      break;
  }
  return s;
}

std::string MethodSpec::validate() const {
  if (n_examples == 0) return "n_examples must be positive";
  if (tokens_per_example == 0) return "tokens_per_example must be positive";
  if (!(temperature >= 0) || !(top_p >= 0)) return "temperature and top_p must be >= 0";
  if (method != Method::token_act_pair) {
    if (!activation_threshold) return "activation_threshold is required for highlighted methods";
    if (!(*activation_threshold >= 0 && *activation_threshold <= 1)) return "activation_threshold must be in [0, 1]";
  }
  if (model.empty()) return "model must be set";
  return {};
}

std::string_view prompt_name(Method m) {
  switch (m) {
    case Method::token_act_pair: return "token_act_pair";
    case Method::max_acts: return "max_acts";
    case Method::semantic_regex: return "semantic_regex";
  }
  return "semantic_regex";
}

namespace {

// The real feature follows the few-shot neurons, which are numbered from 1.
std::size_t neuron_number(const MethodSpec& spec) { return spec.n_fewshot + 1; }

std::string token_act_block(const ActivationRecord& window, const std::vector<int>& scaled, bool skip_zeros) {
  std::string out = "<start>\n";
  for (std::size_t i = 0; i < window.tokens.size(); ++i) {
    if (skip_zeros && scaled[i] == 0) continue;
    out += fmt::format("{}\t{}\n", window.tokens[i], scaled[i]);
  }
  out += "<end>";
  return out;
}

}  // namespace

std::string format_feature_examples(const MethodSpec& spec, const FeatureDataset& dataset) {
  if (auto err = spec.validate(); !err.empty()) throw std::invalid_argument(err);
  auto ranked = dataset.ranked();
  if (ranked.size() < spec.n_examples) {
    throw DescribeError(fmt::format("{} has {} records, {} needed", dataset.feature.key(), ranked.size(),
                                    spec.n_examples));
  }
  ranked.resize(spec.n_examples);
  std::vector<ActivationRecord> windows;
  for (const auto& r : ranked) windows.push_back(prepare_window(*r, spec.tokens_per_example));

  std::string out;
  switch (spec.method) {
    case Method::token_act_pair: {
      std::vector<std::vector<int>> scaled;
      for (const auto& w : windows) scaled.push_back(scale_activations(w, dataset.feature_max));
      out = fmt::format("Neuron {}\nActivations:\n", neuron_number(spec));
      for (std::size_t i = 0; i < windows.size(); ++i) out += token_act_block(windows[i], scaled[i], false) + "\n";
      out += "\nSame activations, but with all zeros filtered out:\n";
      for (std::size_t i = 0; i < windows.size(); ++i) out += token_act_block(windows[i], scaled[i], true) + "\n";
      out += fmt::format("\nExplanation of neuron {} behavior: the main thing this neuron does is find",
                         neuron_number(spec));
      break;
    }
    case Method::max_acts:
    case Method::semantic_regex: {
      const char* prefix = spec.method == Method::max_acts ? "Example " : "";
      for (std::size_t i = 0; i < windows.size(); ++i) {
        if (i) out += '\n';
        out += fmt::format("{}{}: {}", prefix, i + 1,
                           highlight_text(windows[i], *spec.activation_threshold, dataset.feature_max));
      }
      break;
    }
  }
  return out;
}

ChatRequest build_messages(const MethodSpec& spec, const FeatureDataset& dataset) {
  auto listing = prompt_messages(prompt_name(spec.method));
  // System message, then user/assistant pairs.
  const std::size_t available = (listing.size() - 1) / 2;
  if (spec.n_fewshot > available) {
    throw std::invalid_argument(fmt::format("{} few-shot dialogues requested, {} available", spec.n_fewshot, available));
  }
  ChatRequest req;
  req.model = spec.model;
  req.temperature = spec.temperature;
  req.top_p = spec.top_p;
  req.messages.assign(listing.begin(), listing.begin() + 1 + 2 * static_cast<std::ptrdiff_t>(spec.n_fewshot));
  req.messages.push_back({Role::user, format_feature_examples(spec, dataset)});
  return req;
}

std::string extract_description(Method method, std::string_view raw) {
  auto after_last = [&](std::string_view marker) {
    auto pos = raw.rfind(marker);
    if (pos == std::string_view::npos) {
      throw ExtractionError(fmt::format("explainer output has no '{}' marker", text::trim(marker)));
    }
    return std::string(text::trim(raw.substr(pos + marker.size())));
  };
  switch (method) {
    case Method::semantic_regex: return after_last("SR: ");
    case Method::max_acts: return after_last("[EXPLANATION]:");
    case Method::token_act_pair: {
      std::string_view t = text::trim(raw);
      if (!t.empty() && t.back() == '.') t.remove_suffix(1);
      return std::string(text::trim(t));
    }
  }
  return std::string(raw);
}

Description make_description(const FeatureRef& feature, Method method, std::string raw, std::string request_hash) {
  Description d;
  d.feature = feature;
  d.method = method;
  d.raw_output = std::move(raw);
  d.request_hash = std::move(request_hash);
  try {
    d.extracted = extract_description(method, d.raw_output);
  } catch (const ExtractionError& e) {
    d.diagnostic = e.what();
    return d;
  }
  if (method == Method::semantic_regex) {
    try {
      auto result = parse_with_diagnostics(d.extracted, ParseOptions{.lenient = true});
      d.parsed = std::move(result.node);
      std::vector<std::string> notes;
      for (const auto& diag : result.diagnostics) notes.push_back(diag.message);
      d.diagnostic = text::join(notes, "; ");
    } catch (const ParseError& e) {
      d.diagnostic = e.what();
    }
  }
  return d;
}

Description describe_feature(ChatProvider& provider, const MethodSpec& spec, const FeatureDataset& dataset) {
  ChatRequest req = build_messages(spec, dataset);
  ChatResponse resp = provider.complete(req);
  Description d = make_description(dataset.feature, spec.method, resp.content, resp.provenance.request_hash);
  d.prompt_tokens = resp.usage.prompt_tokens;
  d.completion_tokens = resp.usage.completion_tokens;
  return d;
}

}  // namespace semrex
