#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "storyframe/config.hpp"
#include "storyframe/random.hpp"

namespace storyframe::testing {

/// Standard normal draw from two uniforms (Box-Muller).
double gauss(Rng& rng);

struct SyntheticOptions {
  std::size_t n_docs = 2000;
  double yta_fraction = 0.5;
  double effect_d = 0.8;     // planted Cohen's D of the target category rate
  double base_rate = 0.04;   // NTA mean rate of target words
  double rate_sd = 0.01;     // within-class sd of the rate
  std::size_t sentences = 60;
  bool with_parses = true;
  bool with_demographics = true;
  std::size_t n_ineligible = 0;  // extra short posts that ingest must drop
  std::uint64_t seed = 2024;
};

struct SyntheticCorpus {
  std::string dir;
  std::string corpus;
  std::string lexicon;       // categories: target (planted), control_a, control_b
  std::string power_agency;
  std::string valence;
  std::string target_feature = "planted:target";
  std::vector<std::string> ids;       // eligible documents, generation order
  std::vector<int> labels;            // YTA = 1
  std::vector<double> planted_rates;  // realized target-word relative frequency
};

/// Writes a labelled JSONL corpus, CoNLL-U parses and the lexicons into `dir`.
/// Class-1 documents use target-category words at a rate shifted up by
/// effect_d * rate_sd; every other word is drawn identically for both classes.
SyntheticCorpus write_synthetic_corpus(const std::string& dir, const SyntheticOptions& opts);

/// A config that runs the whole pipeline on the corpus, writing to `out_dir`.
config::RunConfig synthetic_config(const SyntheticCorpus& corpus, const std::string& out_dir);

}  // namespace storyframe::testing
