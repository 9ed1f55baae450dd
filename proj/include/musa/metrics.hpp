// SPDX-License-Identifier: Apache-2.0
//
// Evaluation metrics. All scores are in [0,1]; reports scale them by 100.
//
// Answer metrics (EM, token F1/P/R) use the HotpotQA normalization. BLEU-4
// and ROUGE-L use the rouge-score tokenizer (lowercase, runs of characters
// outside [a-z0-9] are separators); articles are kept.
#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace musa {

/// Lowercase, strip ASCII punctuation, drop the articles a/an/the, collapse whitespace.
std::string normalize_answer(std::string_view text);

/// Tokens used by bleu4 and rouge_l.
std::vector<std::string> metric_tokens(std::string_view text);

struct PRF {
  double f1 = 0.0;
  double precision = 0.0;
  double recall = 0.0;
};

double exact_match(std::string_view pred, std::string_view gold);
/// Token-multiset overlap after normalization. "yes"/"no"/"noanswer" only
/// score when both sides agree.
PRF token_f1(std::string_view pred, std::string_view gold);

/// Sentence BLEU, uniform 1-4-gram weights, clipped counts, brevity penalty.
/// A zero n-gram precision is floored at 1e-9 / total; no unigram match or an
/// empty prediction scores 0.
double bleu4(std::string_view pred, std::string_view gold);

/// LCS-based P = LCS/|pred|, R = LCS/|gold|.
PRF rouge_l(std::string_view pred, std::string_view gold);

std::size_t lcs_length(const std::vector<std::string>& a, const std::vector<std::string>& b);

struct LevelScores {
  double accuracy = 0.0;
  double f1 = 0.0;
  double precision = 0.0;
  double recall = 0.0;
};

/// Accuracy plus support-weighted multi-class P/R/F1 over the union of gold
/// and predicted labels.
LevelScores level_scores(const std::vector<std::string>& preds, const std::vector<std::string>& golds);

struct CategoryLabel {
  std::string level1;
  std::string level2;
};

struct HierarchicalScores {
  LevelScores level1;
  LevelScores level2;
};

HierarchicalScores hierarchical_scores(const std::vector<CategoryLabel>& preds, const std::vector<CategoryLabel>& golds);

struct Discrepancy {
  std::string label;  // gold label
  int errors = 0;
  int support = 0;
};

/// Gold labels ranked by misclassification count (ties by label), at most `top`.
std::vector<Discrepancy> most_discrepant(const std::vector<std::string>& preds, const std::vector<std::string>& golds,
                                         std::size_t top = 5);

}  // namespace musa
