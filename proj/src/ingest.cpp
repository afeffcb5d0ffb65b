#include "storyframe/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <unordered_set>

#include <json.hpp>

#include "csv.hpp"
#include "storyframe/error.hpp"
#include "storyframe/text.hpp"

namespace storyframe::ingest {

using nlohmann::json;

std::string_view to_string(BinaryLabel l) { return l == BinaryLabel::YTA ? "YTA" : "NTA"; }

namespace {

std::string lower_ascii(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

std::optional<std::string> string_field(const json& rec, const char* key) {
  const auto it = rec.find(key);
  if (it == rec.end() || it->is_null()) return std::nullopt;
  if (it->is_string()) return it->get<std::string>();
  if (it->is_number_integer()) return std::to_string(it->get<std::int64_t>());
  throw Error(std::string("field '") + key + "' must be a string");
}

std::optional<std::int64_t> integer_field(const json& rec, const char* key) {
  const auto it = rec.find(key);
  if (it == rec.end() || it->is_null()) return std::nullopt;
  if (it->is_number_integer()) return it->get<std::int64_t>();
  if (it->is_number_float()) {
    const double v = it->get<double>();
    if (!std::isfinite(v)) throw Error(std::string("field '") + key + "' is not finite");
    return static_cast<std::int64_t>(std::floor(v));
  }
  if (it->is_string()) {
    try {
      std::size_t used = 0;
      const auto s = it->get<std::string>();
      const double v = std::stod(s, &used);
      if (used != s.size() || !std::isfinite(v)) throw std::invalid_argument(s);
      return static_cast<std::int64_t>(std::floor(v));
    } catch (const std::exception&) {
      throw Error(std::string("field '") + key + "' is not numeric");
    }
  }
  throw Error(std::string("field '") + key + "' must be a number");
}

Submission parse_record(const json& rec) {
  if (!rec.is_object()) throw Error("record is not a JSON object");
  Submission s;
  auto id = string_field(rec, "id");
  if (!id || id->empty()) throw Error("missing required field 'id'");
  auto body = string_field(rec, "body");
  if (!body) throw Error("missing required field 'body'");
  auto label = string_field(rec, "label");
  if (!label || csv::trim(*label).empty()) throw Error("missing required field 'label'");
  s.id = std::move(*id);
  s.body = std::move(*body);
  s.raw_label = std::move(*label);
  s.title = string_field(rec, "title").value_or("");
  s.comment_count = integer_field(rec, "num_comments").value_or(0);
  if (s.comment_count < 0) throw Error("num_comments is negative");
  s.created_at = integer_field(rec, "created_utc").value_or(0);
  s.author_handle = string_field(rec, "author");
  s.parse_ref = string_field(rec, "parse_ref");
  s.word_count = count_words(s.body);
  return s;
}

}  // namespace

std::size_t count_words(std::string_view body) { return text::tokenize(text::normalize(body)).size(); }

LoadResult load_submissions(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open corpus: " + path);
  LoadResult out;
  std::unordered_set<std::string> ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (csv::trim(line).empty()) continue;
    try {
      const json rec = json::parse(line);
      if (line_no == 1 && rec.is_object() && rec.contains("_meta") && rec.size() == 1) continue;
      Submission s = parse_record(rec);
      if (!ids.insert(s.id).second) throw Error("duplicate id '" + s.id + "'");
      out.submissions.push_back(std::move(s));
    } catch (const json::exception& e) {
      out.rejects.push_back({line_no, std::string("malformed JSON: ") + e.what()});
    } catch (const Error& e) {
      out.rejects.push_back({line_no, e.what()});
    }
  }
  return out;
}

bool is_bot_or_moderator(std::string_view handle, const std::set<std::string>& bot_handles) {
  const std::string h = lower_ascii(csv::trim(handle));
  if (bot_handles.contains(h)) return true;
  return h.find("bot") != std::string::npos || h.find("mod") != std::string::npos;
}

bool is_deleted(const Submission& s) {
  const std::string body = lower_ascii(csv::trim(s.body));
  return body == "[deleted]" || body == "[removed]";
}

std::vector<Submission> filter_eligible(std::span<const Submission> subs, const EligibilityCriteria& criteria) {
  std::set<std::string> blocked;
  for (const auto& b : criteria.bot_handles) blocked.insert(lower_ascii(csv::trim(b)));
  std::vector<Submission> out;
  for (const auto& s : subs) {
    if (is_deleted(s)) continue;
    if (s.word_count < criteria.min_words || s.comment_count < criteria.min_comments) continue;
    if (s.author_handle && is_bot_or_moderator(*s.author_handle, blocked)) continue;
    out.push_back(s);
  }
  return out;
}

std::optional<BinaryLabel> encode_label(std::string_view raw_label) {
  const std::string l = lower_ascii(csv::trim(raw_label));
  if (l == "yta") return BinaryLabel::YTA;
  if (l == "nta") return BinaryLabel::NTA;
  return std::nullopt;
}

CorpusStats CorpusStats::from_counts(std::size_t n_total, std::size_t n_nta, std::size_t n_yta) {
  CorpusStats s;
  s.n_total = n_total;
  s.n_nta = n_nta;
  s.n_yta = n_yta;
  s.n_eligible = n_nta + n_yta;
  s.class_balance = s.n_eligible > 0 ? static_cast<double>(n_nta) / static_cast<double>(s.n_eligible) : 0.0;
  return s;
}

std::vector<Submission> keep_labeled(std::span<const Submission> subs) {
  std::vector<Submission> out;
  for (const auto& s : subs) {
    if (encode_label(s.raw_label)) out.push_back(s);
  }
  return out;
}

CorpusStats compute_stats(std::size_t n_total, std::span<const Submission> labeled) {
  std::size_t nta = 0;
  std::size_t yta = 0;
  for (const auto& s : labeled) {
    const auto l = encode_label(s.raw_label);
    if (!l) throw Error("compute_stats: submission '" + s.id + "' has no binary label");
    (*l == BinaryLabel::YTA ? yta : nta) += 1;
  }
  return CorpusStats::from_counts(n_total, nta, yta);
}

std::set<std::string> load_bot_handles(const std::string& path) {
  std::set<std::string> out;
  for (const auto& h : text::load_word_list(path)) out.insert(h);
  return out;
}

void save_submissions(const std::string& path, std::span<const Submission> subs, const std::string& meta_json) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  if (!meta_json.empty()) {
    nlohmann::ordered_json meta;
    meta["_meta"] = nlohmann::ordered_json::parse(meta_json);
    out << meta.dump() << '\n';
  }
  for (const auto& s : subs) {
    nlohmann::ordered_json j;
    j["id"] = s.id;
    j["title"] = s.title;
    j["body"] = s.body;
    j["label"] = s.raw_label;
    j["num_comments"] = s.comment_count;
    j["created_utc"] = s.created_at;
    if (s.author_handle) j["author"] = *s.author_handle;
    if (s.parse_ref) j["parse_ref"] = *s.parse_ref;
    out << j.dump(-1, ' ', false, json::error_handler_t::replace) << '\n';
  }
  if (!out) throw IoError("failed writing " + path);
}

}  // namespace storyframe::ingest
