#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "storyframe/ingest.hpp"

namespace storyframe::events {

/// A verb occurrence: stemmed lemma and the 0-based sentence it appears in.
struct VerbOccurrence {
  std::string lemma;
  std::size_t sentence = 0;
};

struct VerbDepth {
  double total_depth = 0.0;
  std::size_t frequency = 0;
  double normalized_depth = 0.0;  // total_depth / frequency
};

using VerbDepthTable = std::map<std::string, VerbDepth>;

/// Accumulates sentence depths per verb over a set of documents.
VerbDepthTable verb_depths(std::span<const std::vector<VerbOccurrence>> documents);

struct JenksResult {
  std::vector<double> breaks;            // upper bound of every class but the last
  std::vector<std::size_t> class_sizes;  // contiguous, in value order
  double objective = 0.0;                // total within-class sum of squared deviations
};

/// Optimal 1-D partition of sorted `values` into k contiguous classes (Fisher/Jenks
/// dynamic programme). Equal values are kept in one class whenever the number
/// of distinct values allows it. Throws on k < 1, k > |values| or unsorted input.
JenksResult jenks(std::span<const double> values, int k);
std::vector<double> jenks_breaks(std::span<const double> values, int k);

struct EventChain {
  ingest::BinaryLabel label = ingest::BinaryLabel::NTA;
  int k = 1;  // effective number of clusters
  std::vector<double> breaks;
  std::map<std::string, int> cluster_of;
  std::vector<std::string> warnings;

  int cluster(double depth) const;
};

/// Clusters the verbs of a single-label subset by normalized depth; cluster ids
/// increase with depth. Fewer than k distinct verbs is an error; fewer than k
/// distinct depths yields a chain with that many clusters and a warning.
EventChain build_chain(const VerbDepthTable& depths, ingest::BinaryLabel label, int k = 3);

/// Unrestricted Damerau-Levenshtein distance (insert, delete, substitute,
/// transpose adjacent symbols; transposed symbols may be edited further).
int dl_distance(std::span<const int> a, std::span<const int> b);
int dl_distance(std::string_view a, std::string_view b);

/// Cluster-id sequence of a document's verbs under a chain, unknown verbs
/// skipped and consecutive repeats collapsed.
std::vector<int> chain_sequence(std::span<const std::string> verbs, const EventChain& chain);

struct ChainPrediction {
  ingest::BinaryLabel label = ingest::BinaryLabel::NTA;
  int distance_nta = 0;
  int distance_yta = 0;
  bool no_signal = false;
};

/// Picks the label whose canonical chain (0, 1, ..., k-1) is closer in DL
/// distance; ties and documents with no mappable verbs go to NTA.
ChainPrediction predict_by_chain(std::span<const std::string> verbs, const EventChain& chain_nta,
                                 const EventChain& chain_yta);

std::string chain_to_json(const EventChain& chain, const std::string& meta_json = {});
EventChain chain_from_json(std::string_view json_text);
void save_chain(const std::string& path, const EventChain& chain, const std::string& meta_json = {});
EventChain load_chain(const std::string& path);

}  // namespace storyframe::events
