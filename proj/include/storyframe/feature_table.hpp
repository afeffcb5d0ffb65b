#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace storyframe {

/// Corpus-aligned matrix of named feature values, one row per submission.
/// Rows keep insertion order; every value is finite.
class FeatureTable {
 public:
  FeatureTable() = default;
  explicit FeatureTable(std::vector<std::string> feature_names);

  const std::vector<std::string>& feature_names() const noexcept { return names_; }
  const std::vector<std::string>& ids() const noexcept { return ids_; }
  std::size_t num_features() const noexcept { return names_.size(); }
  std::size_t num_rows() const noexcept { return ids_.size(); }
  bool empty() const noexcept { return ids_.empty(); }

  /// Throws on a duplicate id, wrong width, or a non-finite value.
  void add_row(const std::string& id, std::vector<double> values);

  bool contains(const std::string& id) const { return index_.contains(id); }
  std::span<const double> row(std::size_t r) const { return rows_[r]; }
  std::span<const double> row(const std::string& id) const;
  std::optional<std::size_t> feature_index(const std::string& name) const;
  std::vector<double> column(std::size_t feature) const;
  std::vector<double> column(const std::string& name) const;

  /// Restricts to the named features, in the given order.
  FeatureTable select(const std::vector<std::string>& features) const;

  /// Keeps rows whose id is in `ids`, in the order of `ids`; missing ids are skipped.
  FeatureTable subset_rows(const std::vector<std::string>& ids) const;

  /// CSV: header "id,<features...>", one row per submission. Lines starting
  /// with '#' are comments (used for run metadata).
  void write_csv(const std::string& path, const std::vector<std::string>& comment_lines = {}) const;
  static FeatureTable read_csv(const std::string& path);

  /// JSON sidecar listing the feature names.
  void write_sidecar(const std::string& path, const std::map<std::string, std::string>& meta = {}) const;

 private:
  std::vector<std::string> names_;
  std::vector<std::string> ids_;
  std::vector<std::vector<double>> rows_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Left-joins several tables onto `ids`. Cells missing from a table are NaN;
/// feature names must be unique across tables.
struct JoinedFeatures {
  std::vector<std::string> ids;
  std::vector<std::string> feature_names;
  std::vector<std::vector<double>> rows;  // may contain NaN
};

JoinedFeatures left_join(const std::vector<std::string>& ids, std::span<const FeatureTable* const> tables);

/// Formats a double so that it round-trips exactly ("%.17g").
std::string format_double(double v);

}  // namespace storyframe
