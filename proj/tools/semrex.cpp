#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "json.hpp"
#include "semrex/analysis.hpp"
#include "semrex/backend.hpp"
#include "semrex/description.hpp"
#include "semrex/job.hpp"
#include "semrex/llm.hpp"
#include "semrex/matcher.hpp"
#include "semrex/text.hpp"

using nlohmann::json;
using namespace semrex;

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 2;
constexpr int kProviderError = 3;

json ast_json(const RegexNode& n) {
  json j = {{"kind", to_string(n.kind)}};
  if (!n.text.empty()) j[n.kind == NodeKind::context ? "label" : "payload"] = n.text;
  if (!n.children.empty()) {
    json kids = json::array();
    for (const auto& c : n.children) kids.push_back(ast_json(c));
    j["children"] = kids;
  }
  return j;
}

json profile_json(const ComplexityProfile& p) {
  return {{"n_components", p.n_components},
          {"symbols", p.symbols},
          {"lexemes", p.lexemes},
          {"fields", p.fields},
          {"contexts", p.contexts},
          {"structure_class", to_string(p.structure)},
          {"depth", p.depth}};
}

void print_diagnostic(std::string_view input, const ParseDiagnostic& d) {
  std::cerr << "error: " << d.message << "\n  " << input << "\n  " << std::string(d.char_span.begin, ' ')
            << std::string(std::max<std::size_t>(1, d.char_span.end - d.char_span.begin), '^') << "\n";
}

std::string read_input(const std::string& path) {
  if (path == "-") {
    std::stringstream ss;
    ss << std::cin.rdbuf();
    return ss.str();
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Globals {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string cache_dir;
  std::string out;
  bool offline = false;
};

JobConfig job_config(const Globals& g) {
  if (g.config.empty()) throw ConfigError("--config is required for this command");
  JobConfig c = load_job_config(g.config);
  if (g.seed) {
    c.seed = *g.seed;
    c.source["seed"] = *g.seed;
  }
  if (!g.cache_dir.empty()) {
    c.cache_dir = g.cache_dir;
    c.source["cache_dir"] = g.cache_dir;
  }
  if (!g.out.empty()) {
    c.out_dir = g.out;
    c.source["out_dir"] = g.out;
  }
  if (g.offline) {
    c.offline = true;
    c.source["offline"] = true;
  }
  return c;
}

int run_stages(const Globals& g, std::optional<std::vector<std::string>> stages) {
  JobConfig c = job_config(g);
  if (stages) {
    c.stages = *stages;
    c.source["stages"] = *stages;
  }
  JobSummary s = run_job(c);
  std::cout << fmt::format("{} features, {} failed; outputs in {}\n", s.features, s.failed, s.out_dir.string());
  return s.exit_code;
}

// Token counts of the three published cost rows (system + few-shot prompt,
// mean feature input, mean output).
struct CostRow {
  const char* method;
  std::int64_t t_prompt, t_feature, t_out;
};
constexpr CostRow kPublishedCosts[] = {
    {"token-act-pair", 919, 457, 9},
    {"max-acts", 483, 524, 30},
    {"semantic-regex", 993, 237, 33},
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Semantic regex parsing, matching, feature description and evaluation"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--config", g.config, "Job config file (JSON)");
  app.add_option("--seed", g.seed, "Override the config seed");
  app.add_option("--cache-dir", g.cache_dir, "Override the cache directory");
  app.add_option("--out", g.out, "Override the output directory");
  app.add_flag("--offline", g.offline, "Replay cached responses only; mocks still answer");

  // parse
  auto* parse_cmd = app.add_subcommand("parse", "Parse a semantic regex and print its canonical form and AST");
  std::string regex_text;
  bool lenient = false;
  parse_cmd->add_option("regex", regex_text, "Semantic regex")->required();
  parse_cmd->add_flag("--lenient", lenient, "Repair primitives closed by a bare ']'");

  // match
  auto* match_cmd = app.add_subcommand("match", "Print the spans a semantic regex matches in each document");
  std::vector<std::string> docs;
  std::string docs_file, gazetteer_file, contexts_file;
  bool whole_words = false;
  std::size_t max_field_words = 5;
  match_cmd->add_option("regex", regex_text, "Semantic regex")->required();
  match_cmd->add_option("text", docs, "Documents to match");
  match_cmd->add_option("--file", docs_file, "One document per line ('-' for stdin)");
  match_cmd->add_option("--gazetteer", gazetteer_file, "Field word list (label<TAB>phrase)");
  match_cmd->add_option("--contexts", contexts_file, "Context keyword list (label<TAB>phrase)");
  match_cmd->add_option("--max-field-words", max_field_words, "Longest span a field may consume");
  match_cmd->add_flag("--whole-words", whole_words, "Symbols must equal whole words");
  match_cmd->add_flag("--lenient", lenient, "Repair primitives closed by a bare ']'");

  auto* describe_cmd = app.add_subcommand("describe", "Generate descriptions for the configured features");
  auto* evaluate_cmd = app.add_subcommand("evaluate", "Generate and evaluate descriptions");
  auto* run_cmd = app.add_subcommand("run", "Run the stages listed in the config");

  auto* analyze_cmd = app.add_subcommand("analyze", "Write the analysis CSVs for a results file");
  std::string results_path;
  analyze_cmd->add_option("results", results_path, "results.jsonl from a previous run")->required();

  auto* consistency_cmd = app.add_subcommand("consistency", "Identity rates of repeated descriptions");
  std::string consistency_file = "-";
  std::string consistency_method = "semantic-regex";
  consistency_cmd->add_option("file", consistency_file, "One description per line ('-' for stdin)");
  consistency_cmd->add_option("--method", consistency_method, "Description method of the lines");

  auto* cost_cmd = app.add_subcommand("cost", "Description cost per feature");
  std::string p_in = "0.00000015", p_out = "0.0000006";
  std::optional<std::int64_t> t_prompt, t_feature, t_out;
  cost_cmd->add_option("--p-in", p_in, "Price per input token");
  cost_cmd->add_option("--p-out", p_out, "Price per output token");
  cost_cmd->add_option("--t-prompt", t_prompt, "System and few-shot input tokens");
  cost_cmd->add_option("--t-feature", t_feature, "Feature input tokens");
  cost_cmd->add_option("--t-out", t_out, "Output tokens");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (parse_cmd->parsed()) {
      try {
        auto r = parse_with_diagnostics(regex_text, {lenient});
        json out = {{"canonical", render(r.node)}, {"ast", ast_json(r.node)}, {"complexity", profile_json(complexity_profile(r.node))}};
        json diags = json::array();
        for (const auto& d : r.diagnostics) diags.push_back({{"message", d.message}, {"span", {d.char_span.begin, d.char_span.end}}});
        out["diagnostics"] = diags;
        std::cout << out.dump(2) << "\n";
        return kOk;
      } catch (const ParseError& e) {
        print_diagnostic(regex_text, e.diagnostic());
        return kConfigError;
      }
    }

    if (match_cmd->parsed()) {
      RegexNode regex;
      try {
        regex = parse(regex_text, {lenient});
      } catch (const ParseError& e) {
        print_diagnostic(regex_text, e.diagnostic());
        return kConfigError;
      }
      if (!docs_file.empty()) {
        for (auto line : text::split_lines(read_input(docs_file))) docs.push_back(std::string(line));
      }
      OracleBundle oracles = default_oracles();
      if (!gazetteer_file.empty()) oracles.field = wordlist_field_oracle(load_gazetteer(gazetteer_file));
      if (!contexts_file.empty()) oracles.context = keyword_context_oracle(load_gazetteer(contexts_file));
      oracles.max_field_words = max_field_words;
      MatchOptions options;
      options.symbol_policy = whole_words ? SymbolPolicy::whole_words : SymbolPolicy::substring;
      for (const auto& d : docs) {
        auto seq = WordSequence::from_text(d);
        json spans = json::array();
        for (const auto& s : find_matches(regex, seq, oracles, options)) {
          spans.push_back({{"start", s.start_word}, {"end", s.end_word}, {"text", seq.join(s.start_word, s.end_word)}});
        }
        std::cout << json{{"text", d}, {"spans", spans}}.dump() << "\n";
      }
      return kOk;
    }

    if (describe_cmd->parsed()) return run_stages(g, std::vector<std::string>{"describe", "analyze"});
    if (evaluate_cmd->parsed()) return run_stages(g, std::vector<std::string>{"describe", "evaluate", "analyze"});
    if (run_cmd->parsed()) return run_stages(g, std::nullopt);

    if (analyze_cmd->parsed()) {
      JobConfig c;
      if (!g.config.empty()) c = job_config(g);
      std::filesystem::path out = g.out.empty() ? std::filesystem::path(results_path).parent_path() : std::filesystem::path(g.out);
      if (out.empty()) out = ".";
      write_analysis(analyze_results(read_results(results_path), c), out);
      std::cout << "analysis written to " << out.string() << "\n";
      return kOk;
    }

    if (consistency_cmd->parsed()) {
      Method method = parse_method(consistency_method);
      std::vector<std::string> forms;
      for (auto line : text::split_lines(read_input(consistency_file))) {
        if (text::trim(line).empty()) continue;
        // Lines hold descriptions, not explainer output, so no marker extraction.
        Description d;
        d.method = method;
        d.extracted = std::string(text::trim(line));
        if (method == Method::semantic_regex) {
          try {
            d.parsed = parse(d.extracted, {true});
          } catch (const ParseError&) {
            d.parsed.reset();
          }
        }
        forms.push_back(canonical_form(d));
      }
      if (forms.size() < 2) throw ConfigError("consistency needs at least two descriptions");
      std::cout << json{{"n", forms.size()}, {"pairwise", consistency_rate(forms)}, {"modal", modal_consistency(forms)}}.dump(2)
                << "\n";
      return kOk;
    }

    if (cost_cmd->parsed()) {
      Decimal in = Decimal::parse(p_in), out = Decimal::parse(p_out);
      std::cout << "method,t_prompt,t_feature,t_out,cost\n";
      if (t_prompt || t_feature || t_out) {
        CostModel m{in, out, t_prompt.value_or(0), t_feature.value_or(0), t_out.value_or(0)};
        std::cout << fmt::format("custom,{},{},{},{}\n", m.t_prompt, m.t_feature, m.t_out, cost_per_feature(m).to_fixed(8));
        return kOk;
      }
      for (const auto& row : kPublishedCosts) {
        CostModel m{in, out, row.t_prompt, row.t_feature, row.t_out};
        std::cout << fmt::format("{},{},{},{},{}\n", row.method, row.t_prompt, row.t_feature, row.t_out,
                                 cost_per_feature(m).to_fixed(8));
      }
      return kOk;
    }
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfigError;
  } catch (const LlmError& e) {
    std::cerr << "provider error: " << e.what() << "\n";
    return kProviderError;
  } catch (const BackendError& e) {
    std::cerr << "provider error: " << e.what() << "\n";
    return kProviderError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kProviderError;
  }
  return kOk;
}
