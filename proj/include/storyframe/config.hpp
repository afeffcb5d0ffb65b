#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace storyframe::config {

struct LexiconSpec {
  std::string name;
  std::string path;
  std::string family = "theory";  // "theory" or "liwc"
};

/// Everything a pipeline run depends on. Empty optional paths mean "not used".
struct RunConfig {
  // paths
  std::string corpus;            // raw JSONL dump
  std::string filtered_corpus;   // defaults to <output_dir>/ingest/corpus.jsonl
  std::string parses_dir;        // base for relative parse_ref values; defaults to the corpus directory
  std::string bots;
  std::string entity_classes;
  std::string power_agency;
  std::string valence;
  std::vector<LexiconSpec> lexicons;
  std::string output_dir = "storyframe_out";

  // thresholds
  std::size_t min_words = 500;
  std::int64_t min_comments = 20;
  double min_doc_fraction = 0.01;
  double alpha = 0.05;

  // extraction
  bool fallback_svo = false;
  std::size_t arc_chunks = 10;
  std::size_t arc_min_sentence_words = 6;
  int k_chain = 3;

  // analysis
  bool interactions = true;

  // classification
  int k_folds = 10;
  double ridge = 1.0;
  std::vector<std::string> feature_sets = {"story-level", "character-level", "all"};

  // seeds
  std::uint64_t seed_undersample = 13;
  std::uint64_t seed_folds = 17;

  std::string filtered_corpus_path() const;
  std::string stats_path() const;  // next to the filtered corpus
};

const std::vector<std::string>& known_feature_sets();

/// Reads a TOML file; relative paths are resolved against the file's directory.
/// Unknown keys and wrong types raise ConfigError.
RunConfig load_config(const std::string& path);

/// Range and enum checks that need no file system access. Throws ConfigError.
void validate_values(const RunConfig& c);

/// Canonical JSON of every setting that affects results (the output directory is excluded).
std::string canonical_json(const RunConfig& c);

/// FNV-1a 64 of canonical_json, as 16 lowercase hex digits.
std::string config_hash(const RunConfig& c);

/// {"config_hash", "seeds", "tool"} object embedded in every output.
std::string meta_json(const RunConfig& c);

/// The same facts as "# key=value" style comment lines for CSV outputs.
std::vector<std::string> meta_comments(const RunConfig& c);

std::uint64_t fnv1a64(std::string_view data);

}  // namespace storyframe::config
