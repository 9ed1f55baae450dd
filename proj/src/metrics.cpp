// SPDX-License-Identifier: Apache-2.0
#include "musa/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "musa/error.hpp"

namespace musa {
namespace {

std::vector<std::string> split_ws(std::string_view s) {
  std::vector<std::string> out;
  std::istringstream in{std::string(s)};
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

using NGramCounts = std::map<std::vector<std::string>, int>;

NGramCounts ngrams(const std::vector<std::string>& tokens, std::size_t n) {
  NGramCounts counts;
  if (tokens.size() < n) return counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i)
    ++counts[std::vector<std::string>(tokens.begin() + static_cast<long>(i), tokens.begin() + static_cast<long>(i + n))];
  return counts;
}

double f1_of(double p, double r) { return p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0; }

}  // namespace

std::string normalize_answer(std::string_view text) {
  std::string s;
  s.reserve(text.size());
  for (unsigned char c : text) {
    if (std::ispunct(c)) continue;
    s.push_back(static_cast<char>(std::tolower(c)));
  }
  std::string out;
  for (const auto& tok : split_ws(s)) {
    if (tok == "a" || tok == "an" || tok == "the") continue;
    if (!out.empty()) out.push_back(' ');
    out += tok;
  }
  return out;
}

std::vector<std::string> metric_tokens(std::string_view text) {
  std::string s;
  s.reserve(text.size());
  for (unsigned char c : text) {
    const auto l = static_cast<unsigned char>(std::tolower(c));
    s.push_back((l >= 'a' && l <= 'z') || (l >= '0' && l <= '9') ? static_cast<char>(l) : ' ');
  }
  return split_ws(s);
}

double exact_match(std::string_view pred, std::string_view gold) {
  return normalize_answer(pred) == normalize_answer(gold) ? 1.0 : 0.0;
}

PRF token_f1(std::string_view pred, std::string_view gold) {
  const std::string np = normalize_answer(pred);
  const std::string ng = normalize_answer(gold);
  for (const char* special : {"yes", "no", "noanswer"}) {
    if ((np == special || ng == special) && np != ng) return {};
  }
  const auto pt = split_ws(np);
  const auto gt = split_ws(ng);
  std::map<std::string, int> gold_counts;
  for (const auto& t : gt) ++gold_counts[t];
  int same = 0;
  for (const auto& t : pt) {
    auto it = gold_counts.find(t);
    if (it != gold_counts.end() && it->second > 0) {
      --it->second;
      ++same;
    }
  }
  if (same == 0) return {};
  const double p = static_cast<double>(same) / static_cast<double>(pt.size());
  const double r = static_cast<double>(same) / static_cast<double>(gt.size());
  return PRF{f1_of(p, r), p, r};
}

double bleu4(std::string_view pred, std::string_view gold) {
  const auto hyp = metric_tokens(pred);
  const auto ref = metric_tokens(gold);
  if (hyp.empty()) return 0.0;
  double log_sum = 0.0;
  for (std::size_t n = 1; n <= 4; ++n) {
    const auto h = ngrams(hyp, n);
    const auto r = ngrams(ref, n);
    int matches = 0;
    int total = 0;
    for (const auto& [gram, count] : h) {
      total += count;
      auto it = r.find(gram);
      if (it != r.end()) matches += std::min(count, it->second);
    }
    if (n == 1 && matches == 0) return 0.0;
    const double numerator = matches == 0 ? 1e-9 : static_cast<double>(matches);
    log_sum += 0.25 * std::log(numerator / static_cast<double>(std::max(1, total)));
  }
  const double c = static_cast<double>(hyp.size());
  const double r = static_cast<double>(ref.size());
  const double bp = c > r ? 1.0 : std::exp(1.0 - r / c);
  return bp * std::exp(log_sum);
}

std::size_t lcs_length(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::vector<std::size_t> prev(b.size() + 1, 0);
  std::vector<std::size_t> cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j)
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

PRF rouge_l(std::string_view pred, std::string_view gold) {
  const auto p = metric_tokens(pred);
  const auto g = metric_tokens(gold);
  if (p.empty() || g.empty()) return {};
  const double lcs = static_cast<double>(lcs_length(p, g));
  const double precision = lcs / static_cast<double>(p.size());
  const double recall = lcs / static_cast<double>(g.size());
  return PRF{f1_of(precision, recall), precision, recall};
}

LevelScores level_scores(const std::vector<std::string>& preds, const std::vector<std::string>& golds) {
  if (preds.size() != golds.size())
    throw PreconditionError("prediction/gold length mismatch: " + std::to_string(preds.size()) + " vs " +
                            std::to_string(golds.size()));
  LevelScores s;
  if (golds.empty()) return s;
  std::map<std::string, int> support, predicted, tp;
  int correct = 0;
  for (std::size_t i = 0; i < golds.size(); ++i) {
    ++support[golds[i]];
    ++predicted[preds[i]];
    if (preds[i] == golds[i]) {
      ++tp[golds[i]];
      ++correct;
    }
  }
  const double n = static_cast<double>(golds.size());
  s.accuracy = correct / n;
  for (const auto& [label, sup] : support) {
    const double t = tp.count(label) ? tp[label] : 0;
    const double pc = predicted.count(label) ? predicted[label] : 0;
    const double p = pc > 0 ? t / pc : 0.0;
    const double r = t / sup;
    const double w = sup / n;
    s.precision += w * p;
    s.recall += w * r;
    s.f1 += w * f1_of(p, r);
  }
  return s;
}

HierarchicalScores hierarchical_scores(const std::vector<CategoryLabel>& preds, const std::vector<CategoryLabel>& golds) {
  if (preds.size() != golds.size())
    throw PreconditionError("prediction/gold length mismatch: " + std::to_string(preds.size()) + " vs " +
                            std::to_string(golds.size()));
  std::vector<std::string> p1, g1, p2, g2;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    p1.push_back(preds[i].level1);
    g1.push_back(golds[i].level1);
    p2.push_back(preds[i].level2);
    g2.push_back(golds[i].level2);
  }
  return HierarchicalScores{level_scores(p1, g1), level_scores(p2, g2)};
}

std::vector<Discrepancy> most_discrepant(const std::vector<std::string>& preds, const std::vector<std::string>& golds,
                                         std::size_t top) {
  if (preds.size() != golds.size()) throw PreconditionError("prediction/gold length mismatch");
  std::map<std::string, Discrepancy> by_label;
  for (std::size_t i = 0; i < golds.size(); ++i) {
    auto& d = by_label[golds[i]];
    d.label = golds[i];
    ++d.support;
    if (preds[i] != golds[i]) ++d.errors;
  }
  std::vector<Discrepancy> out;
  for (auto& [label, d] : by_label) {
    if (d.errors > 0) out.push_back(d);
  }
  std::stable_sort(out.begin(), out.end(), [](const Discrepancy& a, const Discrepancy& b) { return a.errors > b.errors; });
  if (out.size() > top) out.resize(top);
  return out;
}

}  // namespace musa
