#pragma once

#include <cstddef>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "storyframe/character.hpp"
#include "storyframe/stats.hpp"
#include "storyframe/text.hpp"

namespace storyframe::arc {

/// Rule-based sentiment lexicon: word valences plus booster and negation rules.
struct ValenceLexicon {
  std::map<std::string, double> valence;   // typically in [-4, 4]
  std::map<std::string, double> boosters;  // increment, +0.293 or -0.293 by default
  std::set<std::string> negations;
  double negation_factor = -0.74;
  double normalization = 15.0;  // compound = s / sqrt(s^2 + normalization)
};

const std::map<std::string, double>& default_boosters();
const std::set<std::string>& default_negations();

/// Valence CSV with header `term,valence`, or a tab-separated file whose first
/// two columns are term and mean valence. Boosters and negations take the defaults.
ValenceLexicon load_valence_lexicon(const std::string& path);
/// One booster per line, optionally followed by whitespace and an increment.
std::map<std::string, double> load_boosters(const std::string& path);

/// Compound score in (-1, 1). Each valenced word is shifted by boosters up to
/// three words before it (scaled 1, 0.95, 0.9) and multiplied once by the
/// negation factor when a negation occurs in the three preceding words.
double sentence_sentiment(std::span<const text::Token> tokens, const ValenceLexicon& lex);

/// Sizes of `n_chunks` contiguous chunks covering n items; earlier chunks take the remainder.
std::vector<std::size_t> chunk_sizes(std::size_t n, std::size_t n_chunks);

/// Least-squares slope of values against 0, 1, ..., n-1.
double ols_slope(std::span<const double> values);

struct ArcOptions {
  std::size_t n_chunks = 10;
  std::size_t min_sentence_words = 6;
};

struct ArcProfile {
  bool valid = false;  // false when fewer kept sentences than chunks
  std::vector<double> chunk_means;
  std::vector<std::size_t> chunk_sizes;
  double slope = 0.0;
  std::size_t n_sentences_used = 0;
};

/// Words counted for the sentence-length filter: tokens with a letter or digit.
std::size_t word_count(std::span<const text::Token> tokens);

/// Keeps sentences with enough words that contain a tuple whose subject or
/// object is the narrator, chunks them in order and averages sentiment.
ArcProfile story_arc(std::span<const text::Sentence> sentences, std::span<const character::SvoTuple> tuples,
                     const ValenceLexicon& lex, const character::EntityClass& narrator, const ArcOptions& opts = {});

/// Sentences rebuilt from parse tokens (lowercased forms, in order).
std::vector<text::Sentence> sentences_from_graphs(std::span<const character::DependencyGraph> graphs);

struct ChunkComparison {
  double mean_yta = 0.0;
  double mean_nta = 0.0;
  double t = 0.0;
  double p = 1.0;
  bool zero_variance = false;
};

/// Welch t-test per chunk between the two classes' valid arcs.
std::vector<ChunkComparison> arc_class_comparison(std::span<const ArcProfile> arcs_yta,
                                                  std::span<const ArcProfile> arcs_nta);

/// Plot-ready JSON: per-class chunk means, slope summary and per-chunk tests.
std::string arc_report_json(std::span<const ArcProfile> arcs_yta, std::span<const ArcProfile> arcs_nta,
                            const std::string& meta_json = {});

}  // namespace storyframe::arc
