#pragma once

#include <random>
#include <string>
#include <vector>

#include "semrex/lang.hpp"

namespace test_support {

/// Random canonical ASTs. `budget` bounds the node count; `depth` the nesting.
class RegexGenerator {
 public:
  RegexGenerator(std::uint64_t seed, std::vector<std::string> payloads, std::vector<std::string> labels)
      : rng_(seed), payloads_(std::move(payloads)), labels_(std::move(labels)) {}

  semrex::RegexNode generate(int budget, int depth) { return node(budget, depth); }

  int nodes_used() const { return used_; }
  void reset_count() { used_ = 0; }

 private:
  int pick(int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng_); }

  semrex::RegexNode primitive() {
    ++used_;
    const std::string& p = payloads_[pick(static_cast<int>(payloads_.size()))];
    switch (pick(3)) {
      case 0: return semrex::RegexNode::symbol(p);
      case 1: return semrex::RegexNode::lexeme(p);
      default: return semrex::RegexNode::field(p);
    }
  }

  semrex::RegexNode node(int budget, int depth) {
    if (budget <= 1 || depth <= 1 || pick(3) == 0) return primitive();
    ++used_;
    int remaining = budget - 1;
    switch (pick(4)) {
      case 0: {
        auto body = node(remaining, depth - 1);
        return semrex::RegexNode::context(labels_[pick(static_cast<int>(labels_.size()))], std::move(body));
      }
      case 1: {
        auto body = node(remaining, depth - 1);
        return semrex::RegexNode::optional(std::move(body));
      }
      default: {
        if (remaining < 2) return primitive();
        std::vector<semrex::RegexNode> items;
        int n = 2 + pick(std::min(2, remaining - 1));
        for (int i = 0; i < n; ++i) {
          int share = std::max(1, remaining / (n - i));
          int before = used_;
          items.push_back(node(share, depth - 1));
          remaining -= used_ - before;
          if (remaining <= 0 && i + 1 < n) {
            items.push_back(primitive());
            break;
          }
        }
        return pick(2) == 0 ? semrex::RegexNode::sequence(std::move(items))
                            : semrex::RegexNode::alternation(std::move(items));
      }
    }
  }

  std::mt19937_64 rng_;
  std::vector<std::string> payloads_;
  std::vector<std::string> labels_;
  int used_ = 0;
};

}  // namespace test_support
