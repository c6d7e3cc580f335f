#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "semrex/decimal.hpp"
#include "semrex/description.hpp"
#include "semrex/lang.hpp"

namespace semrex {

enum class StructureClass { single_primitive, sequence, alternation, optional, contextual, mixed };
std::string_view to_string(StructureClass c);

struct ComplexityProfile {
  std::size_t n_components = 0;  // primitives plus contexts
  std::size_t symbols = 0;
  std::size_t lexemes = 0;
  std::size_t fields = 0;
  std::size_t contexts = 0;
  StructureClass structure = StructureClass::single_primitive;
  std::size_t depth = 0;  // a lone primitive has depth 1
};

/// Counts components and classifies the top-level structure. A context root
/// is contextual. Otherwise the structural kinds (sequence, alternation,
/// optional) of the root and its direct children are collected: none means a
/// single primitive, one kind names the class, several make it mixed.
ComplexityProfile complexity_profile(const RegexNode& regex);

struct LayerRow {
  int layer = 0;
  std::size_t n = 0;
  double mean_components = 0;
  double prop_single_primitive = 0, prop_sequence = 0, prop_alternation = 0, prop_optional = 0,
         prop_contextual = 0, prop_mixed = 0;
  // Share of each component kind among all components in the layer.
  double prop_symbol = 0, prop_lexeme = 0, prop_field = 0, prop_context = 0;
};

/// One row per layer in ascending order. Throws std::invalid_argument for an empty layer.
std::vector<LayerRow> layer_summary(const std::map<int, std::vector<ComplexityProfile>>& profiles);
std::string complexity_csv(const std::vector<LayerRow>& rows);

/// Fraction of unordered pairs with identical forms. Needs two or more.
double consistency_rate(const std::vector<std::string>& canonical_forms);
double consistency_rate(const std::vector<Description>& descriptions);
/// Frequency of the most common form divided by the count.
double modal_consistency(const std::vector<std::string>& canonical_forms);

struct LengthStats {
  double median = 0;
  double q1 = 0;
  double q3 = 0;
};

/// Character (code point) lengths of the extracted descriptions.
LengthStats length_stats(const std::vector<Description>& descriptions);
LengthStats length_stats_of(const std::vector<double>& lengths);

struct NonInferiority {
  std::size_t n = 0;
  double mean_diff = 0;  // mean(a - b)
  double sd = 0;
  double t = 0;             // infinite when sd == 0 and mean_diff + margin != 0
  double p = 0;             // one-sided, H0: mean(a - b) <= -margin
  double p_adjusted = 0;    // min(1, p * n_comparisons)
  bool zero_variance = false;
  bool flagged = false;     // zero variance with mean_diff + margin == 0; p set to 0.5
};

NonInferiority noninferiority_test(const std::vector<double>& a, const std::vector<double>& b, double margin,
                                   std::size_t n_comparisons);
/// Bonferroni-adjusted p of noninferiority_test.
double noninferiority_p(const std::vector<double>& a, const std::vector<double>& b, double margin,
                        std::size_t n_comparisons);

struct CostModel {
  Decimal p_in;   // price per input token
  Decimal p_out;  // price per output token
  std::int64_t t_prompt = 0;
  std::int64_t t_feature = 0;
  std::int64_t t_out = 0;
};

/// P_in (T_prompt + T_feature) + P_out T_out, exactly.
Decimal cost_per_feature(const CostModel& model);

}  // namespace semrex
