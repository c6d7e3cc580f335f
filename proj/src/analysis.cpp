#include "semrex/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>
#include <unordered_map>

#include <fmt/format.h>

#include "semrex/stats.hpp"
#include "semrex/text.hpp"

namespace semrex {

std::string_view to_string(StructureClass c) {
  switch (c) {
    case StructureClass::single_primitive: return "single-primitive";
    case StructureClass::sequence: return "sequence";
    case StructureClass::alternation: return "alternation";
    case StructureClass::optional: return "optional";
    case StructureClass::contextual: return "contextual";
    case StructureClass::mixed: return "mixed";
  }
  return "unknown";
}

namespace {

void count(const RegexNode& n, ComplexityProfile& p) {
  switch (n.kind) {
    case NodeKind::symbol: ++p.symbols; break;
    case NodeKind::lexeme: ++p.lexemes; break;
    case NodeKind::field: ++p.fields; break;
    case NodeKind::context: ++p.contexts; break;
    default: break;
  }
  for (const auto& c : n.children) count(c, p);
}

std::size_t depth_of(const RegexNode& n) {
  std::size_t d = 0;
  for (const auto& c : n.children) d = std::max(d, depth_of(c));
  return d + 1;
}

bool structural(NodeKind k) {
  return k == NodeKind::sequence || k == NodeKind::alternation || k == NodeKind::optional;
}

}  // namespace

ComplexityProfile complexity_profile(const RegexNode& regex) {
  ComplexityProfile p;
  count(regex, p);
  p.n_components = p.symbols + p.lexemes + p.fields + p.contexts;
  p.depth = depth_of(regex);
  if (regex.is_primitive()) {
    p.structure = StructureClass::single_primitive;
  } else if (regex.kind == NodeKind::context) {
    p.structure = StructureClass::contextual;
  } else {
    std::set<NodeKind> kinds{regex.kind};
    for (const auto& c : regex.children) {
      if (structural(c.kind)) kinds.insert(c.kind);
    }
    if (kinds.size() > 1) {
      p.structure = StructureClass::mixed;
    } else if (regex.kind == NodeKind::sequence) {
      p.structure = StructureClass::sequence;
    } else if (regex.kind == NodeKind::alternation) {
      p.structure = StructureClass::alternation;
    } else {
      p.structure = StructureClass::optional;
    }
  }
  return p;
}

std::vector<LayerRow> layer_summary(const std::map<int, std::vector<ComplexityProfile>>& profiles) {
  std::vector<LayerRow> rows;
  for (const auto& [layer, list] : profiles) {
    if (list.empty()) throw std::invalid_argument(fmt::format("layer {} has no profiles", layer));
    LayerRow row;
    row.layer = layer;
    row.n = list.size();
    double components = 0, symbols = 0, lexemes = 0, fields = 0, contexts = 0;
    std::map<StructureClass, double> classes;
    for (const auto& p : list) {
      components += static_cast<double>(p.n_components);
      symbols += static_cast<double>(p.symbols);
      lexemes += static_cast<double>(p.lexemes);
      fields += static_cast<double>(p.fields);
      contexts += static_cast<double>(p.contexts);
      classes[p.structure] += 1;
    }
    const double n = static_cast<double>(list.size());
    row.mean_components = components / n;
    row.prop_single_primitive = classes[StructureClass::single_primitive] / n;
    row.prop_sequence = classes[StructureClass::sequence] / n;
    row.prop_alternation = classes[StructureClass::alternation] / n;
    row.prop_optional = classes[StructureClass::optional] / n;
    row.prop_contextual = classes[StructureClass::contextual] / n;
    row.prop_mixed = classes[StructureClass::mixed] / n;
    if (components > 0) {
      row.prop_symbol = symbols / components;
      row.prop_lexeme = lexemes / components;
      row.prop_field = fields / components;
      row.prop_context = contexts / components;
    }
    rows.push_back(row);
  }
  return rows;
}

std::string complexity_csv(const std::vector<LayerRow>& rows) {
  std::string out =
      "layer,mean_components,prop_single_primitive,prop_sequence,prop_alternation,prop_optional,prop_contextual,"
      "prop_symbol,prop_lexeme,prop_field,prop_context\n";
  for (const auto& r : rows) {
    out += fmt::format("{},{},{},{},{},{},{},{},{},{},{}\n", r.layer, r.mean_components, r.prop_single_primitive,
                       r.prop_sequence, r.prop_alternation, r.prop_optional, r.prop_contextual, r.prop_symbol,
                       r.prop_lexeme, r.prop_field, r.prop_context);
  }
  return out;
}

double consistency_rate(const std::vector<std::string>& forms) {
  if (forms.size() < 2) throw std::invalid_argument("consistency needs at least two descriptions");
  std::unordered_map<std::string, std::size_t> counts;
  for (const auto& f : forms) ++counts[f];
  double same = 0;
  for (const auto& [form, c] : counts) same += static_cast<double>(c) * static_cast<double>(c - 1) / 2;
  double n = static_cast<double>(forms.size());
  return same / (n * (n - 1) / 2);
}

double consistency_rate(const std::vector<Description>& descriptions) {
  std::vector<std::string> forms;
  for (const auto& d : descriptions) forms.push_back(canonical_form(d));
  return consistency_rate(forms);
}

double modal_consistency(const std::vector<std::string>& forms) {
  if (forms.empty()) throw std::invalid_argument("modal consistency of an empty list");
  std::unordered_map<std::string, std::size_t> counts;
  std::size_t best = 0;
  for (const auto& f : forms) best = std::max(best, ++counts[f]);
  return static_cast<double>(best) / static_cast<double>(forms.size());
}

LengthStats length_stats_of(const std::vector<double>& lengths) {
  if (lengths.empty()) throw std::invalid_argument("length statistics of an empty list");
  return {stats::median(lengths), stats::quantile(lengths, 0.25), stats::quantile(lengths, 0.75)};
}

LengthStats length_stats(const std::vector<Description>& descriptions) {
  std::vector<double> lengths;
  for (const auto& d : descriptions) lengths.push_back(static_cast<double>(text::utf8_length(d.extracted)));
  return length_stats_of(lengths);
}

NonInferiority noninferiority_test(const std::vector<double>& a, const std::vector<double>& b, double margin,
                                   std::size_t n_comparisons) {
  if (a.size() != b.size()) throw std::invalid_argument("paired samples differ in length");
  if (a.size() < 3) throw std::invalid_argument("non-inferiority test needs at least three pairs");
  if (!(margin >= 0)) throw std::invalid_argument("margin must be non-negative");
  if (n_comparisons == 0) throw std::invalid_argument("comparison count must be positive");
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  NonInferiority r;
  r.n = d.size();
  r.mean_diff = stats::mean(d);
  r.sd = stats::sample_sd(d);
  const double shifted = r.mean_diff + margin;
  // Differences that agree to rounding error count as zero variance.
  if (r.sd <= 1e-12 * std::max(1.0, std::fabs(r.mean_diff))) {
    r.zero_variance = true;
    const double tol = 1e-12 * std::max({1.0, std::fabs(r.mean_diff), margin});
    if (shifted > tol) {
      r.t = INFINITY;
      r.p = 0.0;
    } else if (shifted < -tol) {
      r.t = -INFINITY;
      r.p = 1.0;
    } else {
      r.t = 0.0;
      r.p = 0.5;
      r.flagged = true;
    }
  } else {
    r.t = shifted / (r.sd / std::sqrt(static_cast<double>(r.n)));
    r.p = stats::student_t_upper(r.t, static_cast<double>(r.n - 1));
  }
  r.p_adjusted = std::min(1.0, r.p * static_cast<double>(n_comparisons));
  return r;
}

double noninferiority_p(const std::vector<double>& a, const std::vector<double>& b, double margin,
                        std::size_t n_comparisons) {
  return noninferiority_test(a, b, margin, n_comparisons).p_adjusted;
}

Decimal cost_per_feature(const CostModel& m) {
  if (m.p_in < Decimal(0) || m.p_out < Decimal(0) || m.t_prompt < 0 || m.t_feature < 0 || m.t_out < 0) {
    throw std::invalid_argument("cost model fields must be non-negative");
  }
  return m.p_in * Decimal(m.t_prompt + m.t_feature) + m.p_out * Decimal(m.t_out);
}

}  // namespace semrex
