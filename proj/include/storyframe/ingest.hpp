#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace storyframe::ingest {

enum class BinaryLabel : int { NTA = 0, YTA = 1 };

inline int to_int(BinaryLabel l) { return static_cast<int>(l); }
std::string_view to_string(BinaryLabel l);

struct Submission {
  std::string id;
  std::string title;
  std::string body;
  std::string raw_label;
  std::int64_t comment_count = 0;
  std::int64_t created_at = 0;  // epoch seconds
  std::optional<std::string> author_handle;
  std::size_t word_count = 0;  // tokens in the normalized body
  std::optional<std::string> parse_ref;
};

struct Reject {
  std::size_t line = 0;  // 1-based
  std::string reason;
};

struct LoadResult {
  std::vector<Submission> submissions;
  std::vector<Reject> rejects;
};

/// Reads a JSONL dump. Required fields: id, body, label. Bad lines are
/// reported in `rejects`, never dropped silently. A first-line `{"_meta": ...}`
/// record written by save_submissions is skipped.
LoadResult load_submissions(const std::string& path);

/// Token count of the normalized body.
std::size_t count_words(std::string_view body);

struct EligibilityCriteria {
  std::size_t min_words = 500;
  std::int64_t min_comments = 20;
  std::set<std::string> bot_handles;  // compared lowercased
};

/// True for handles that name a bot or moderator account.
bool is_bot_or_moderator(std::string_view handle, const std::set<std::string>& bot_handles);

/// True for bodies removed by the author or the moderators.
bool is_deleted(const Submission& s);

/// Keeps non-deleted posts meeting the word and comment minimums whose
/// author is not a bot or moderator. Order preserved; idempotent.
std::vector<Submission> filter_eligible(std::span<const Submission> subs, const EligibilityCriteria& criteria);

/// "YTA" -> YTA, "NTA" -> NTA (trimmed, case-insensitive); anything else -> nullopt.
std::optional<BinaryLabel> encode_label(std::string_view raw_label);

struct CorpusStats {
  std::size_t n_total = 0;
  std::size_t n_eligible = 0;
  std::size_t n_nta = 0;
  std::size_t n_yta = 0;
  double class_balance = 0.0;  // n_nta / n_eligible

  static CorpusStats from_counts(std::size_t n_total, std::size_t n_nta, std::size_t n_yta);
};

/// Keeps only submissions carrying a binary label.
std::vector<Submission> keep_labeled(std::span<const Submission> subs);

CorpusStats compute_stats(std::size_t n_total, std::span<const Submission> labeled);

/// Reads one handle per line.
std::set<std::string> load_bot_handles(const std::string& path);

/// Writes submissions as JSONL using the input field names; `meta_json`, when
/// non-empty, is written first as a `{"_meta": ...}` line.
void save_submissions(const std::string& path, std::span<const Submission> subs, const std::string& meta_json = {});

}  // namespace storyframe::ingest
