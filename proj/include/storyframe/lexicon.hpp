#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "storyframe/feature_table.hpp"
#include "storyframe/text.hpp"

namespace storyframe::lexicon {

struct Association {
  std::string category;
  double weight = 1.0;
};

/// Weighted term -> category lexicon (NRC, VAD, MRC, LIWC-style, ...).
class Lexicon {
 public:
  Lexicon() = default;
  explicit Lexicon(std::string name) : name_(std::move(name)) {}

  const std::string& name() const noexcept { return name_; }

  /// Throws on a duplicate (term, category) pair or a non-finite weight.
  void add(const std::string& term, const std::string& category, double weight = 1.0);

  const std::vector<Association>* find(const std::string& term) const;
  const std::vector<std::string>& categories() const noexcept { return categories_; }  // sorted
  std::size_t num_terms() const noexcept { return entries_.size(); }
  std::size_t num_entries() const noexcept { return num_entries_; }

 private:
  std::string name_;
  std::unordered_map<std::string, std::vector<Association>> entries_;
  std::vector<std::string> categories_;
  std::size_t num_entries_ = 0;
};

/// CSV with header `term,category,weight`; the weight column is optional
/// (defaults to 1.0). The lexicon name defaults to the file stem.
Lexicon load_lexicon(const std::string& path, const std::string& name = {});

struct CategoryScores {
  std::map<std::string, double> by_category;
  bool empty_document = false;
};

/// score(c) = sum over tokens t of weight(t, c) * count(t) / N.
CategoryScores score(std::span<const text::Token> tokens, const Lexicon& lex);

struct PronounCounts {
  std::size_t first_sing = 0;
  std::size_t first_plur = 0;
  std::size_t third_sing = 0;
  std::size_t third_plur = 0;
  double ratio_1st_3rd = 1.0;
};

const std::vector<std::string>& first_singular_pronouns();
const std::vector<std::string>& first_plural_pronouns();
const std::vector<std::string>& third_singular_pronouns();
const std::vector<std::string>& third_plural_pronouns();

/// Counts pronouns by fixed lists; ratio = (1st + 1) / (3rd + 1), singular and plural combined.
PronounCounts pronoun_features(std::span<const text::Token> tokens);

struct TokenizedDoc {
  std::string id;
  std::vector<text::Token> tokens;
};

struct UnigramMatrix {
  FeatureTable table;
  std::vector<std::size_t> document_frequency;  // aligned with table.feature_names()
  std::size_t threshold = 0;                    // minimum document count retained
};

/// Minimum document count for a unigram: max(1, floor(fraction * n_docs)).
std::size_t unigram_threshold(std::size_t n_docs, double min_doc_fraction);

/// Relative-frequency matrix over unigrams used in at least
/// unigram_threshold(|corpus|, min_doc_fraction) documents. Features are sorted.
UnigramMatrix unigram_matrix(std::span<const TokenizedDoc> corpus, double min_doc_fraction = 0.01);

}  // namespace storyframe::lexicon
