#include "storyframe/feature_table.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>

#include <json.hpp>

#include "csv.hpp"
#include "storyframe/error.hpp"

namespace storyframe {

FeatureTable::FeatureTable(std::vector<std::string> feature_names) : names_(std::move(feature_names)) {
  std::set<std::string> seen;
  for (const auto& n : names_) {
    if (n.empty()) throw Error("empty feature name");
    if (!seen.insert(n).second) throw Error("duplicate feature name '" + n + "'");
  }
}

void FeatureTable::add_row(const std::string& id, std::vector<double> values) {
  if (id.empty()) throw Error("empty submission id");
  if (values.size() != names_.size()) {
    throw Error("row '" + id + "' has " + std::to_string(values.size()) + " values, expected " +
                std::to_string(names_.size()));
  }
  for (std::size_t j = 0; j < values.size(); ++j) {
    if (!std::isfinite(values[j])) throw Error("non-finite value for '" + names_[j] + "' in row '" + id + "'");
  }
  if (!index_.emplace(id, ids_.size()).second) throw Error("duplicate row id '" + id + "'");
  ids_.push_back(id);
  rows_.push_back(std::move(values));
}

std::span<const double> FeatureTable::row(const std::string& id) const {
  const auto it = index_.find(id);
  if (it == index_.end()) throw Error("no row '" + id + "'");
  return rows_[it->second];
}

std::optional<std::size_t> FeatureTable::feature_index(const std::string& name) const {
  for (std::size_t j = 0; j < names_.size(); ++j) {
    if (names_[j] == name) return j;
  }
  return std::nullopt;
}

std::vector<double> FeatureTable::column(std::size_t feature) const {
  std::vector<double> out;
  out.reserve(rows_.size());
  for (const auto& r : rows_) out.push_back(r.at(feature));
  return out;
}

std::vector<double> FeatureTable::column(const std::string& name) const {
  const auto j = feature_index(name);
  if (!j) throw Error("no feature '" + name + "'");
  return column(*j);
}

FeatureTable FeatureTable::select(const std::vector<std::string>& features) const {
  std::vector<std::size_t> cols;
  for (const auto& f : features) {
    const auto j = feature_index(f);
    if (!j) throw Error("no feature '" + f + "'");
    cols.push_back(*j);
  }
  FeatureTable out(features);
  for (std::size_t r = 0; r < rows_.size(); ++r) {
    std::vector<double> v;
    v.reserve(cols.size());
    for (auto j : cols) v.push_back(rows_[r][j]);
    out.add_row(ids_[r], std::move(v));
  }
  return out;
}

FeatureTable FeatureTable::subset_rows(const std::vector<std::string>& ids) const {
  FeatureTable out(names_);
  for (const auto& id : ids) {
    const auto it = index_.find(id);
    if (it != index_.end()) out.add_row(id, rows_[it->second]);
  }
  return out;
}

std::string format_double(double v) {
  if (v == 0.0) return "0";  // also folds -0
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void FeatureTable::write_csv(const std::string& path, const std::vector<std::string>& comment_lines) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  for (const auto& c : comment_lines) out << "# " << c << '\n';
  out << "id";
  for (const auto& n : names_) out << ',' << csv::escape(n);
  out << '\n';
  for (std::size_t r = 0; r < rows_.size(); ++r) {
    out << csv::escape(ids_[r]);
    for (double v : rows_[r]) out << ',' << format_double(v);
    out << '\n';
  }
  if (!out) throw IoError("failed writing " + path);
}

FeatureTable FeatureTable::read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> fields;
  std::optional<FeatureTable> table;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    if (!csv::split_line(line, fields)) throw ParseError(path, line_no, "unterminated quote");
    if (!table) {
      if (fields.empty() || fields[0] != "id") throw ParseError(path, line_no, "header must start with 'id'");
      table.emplace(std::vector<std::string>(fields.begin() + 1, fields.end()));
      continue;
    }
    if (fields.size() != table->num_features() + 1) {
      throw ParseError(path, line_no, "expected " + std::to_string(table->num_features() + 1) + " columns");
    }
    std::vector<double> values;
    values.reserve(fields.size() - 1);
    for (std::size_t j = 1; j < fields.size(); ++j) {
      try {
        std::size_t used = 0;
        values.push_back(std::stod(fields[j], &used));
        if (used != fields[j].size()) throw std::invalid_argument("trailing");
      } catch (const std::exception&) {
        throw ParseError(path, line_no, "bad number '" + fields[j] + "'");
      }
    }
    try {
      table->add_row(fields[0], std::move(values));
    } catch (const Error& e) {
      throw ParseError(path, line_no, e.what());
    }
  }
  if (!table) throw ParseError(path, line_no, "missing header");
  return std::move(*table);
}

void FeatureTable::write_sidecar(const std::string& path, const std::map<std::string, std::string>& meta) const {
  nlohmann::ordered_json j;
  j["feature_names"] = names_;
  j["num_rows"] = rows_.size();
  for (const auto& [k, v] : meta) j["meta"][k] = v;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << j.dump(2) << '\n';
}

JoinedFeatures left_join(const std::vector<std::string>& ids, std::span<const FeatureTable* const> tables) {
  JoinedFeatures out;
  out.ids = ids;
  std::set<std::string> seen;
  for (const FeatureTable* t : tables) {
    for (const auto& n : t->feature_names()) {
      if (!seen.insert(n).second) throw Error("feature '" + n + "' appears in more than one table");
      out.feature_names.push_back(n);
    }
  }
  out.rows.assign(ids.size(), std::vector<double>(out.feature_names.size(), std::numeric_limits<double>::quiet_NaN()));
  for (std::size_t r = 0; r < ids.size(); ++r) {
    std::size_t offset = 0;
    for (const FeatureTable* t : tables) {
      if (t->contains(ids[r])) {
        const auto row = t->row(ids[r]);
        std::copy(row.begin(), row.end(), out.rows[r].begin() + static_cast<std::ptrdiff_t>(offset));
      }
      offset += t->num_features();
    }
  }
  return out;
}

}  // namespace storyframe
