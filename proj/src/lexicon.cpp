#include "storyframe/lexicon.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <unordered_set>

#include "csv.hpp"
#include "storyframe/error.hpp"

namespace storyframe::lexicon {

namespace {

// Lexicon terms ending in '*' match any token with that prefix (LIWC convention).
bool is_prefix_pattern(const std::string& term) { return term.size() > 1 && term.back() == '*'; }

std::string fold_apostrophes(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s.substr(i, 3) == "\xE2\x80\x99") {
      out.push_back('\'');
      i += 2;
    } else {
      out.push_back(s[i]);
    }
  }
  return out;
}

}  // namespace

void Lexicon::add(const std::string& term, const std::string& category, double weight) {
  if (term.empty() || category.empty()) throw Error("lexicon '" + name_ + "': empty term or category");
  if (!std::isfinite(weight)) throw Error("lexicon '" + name_ + "': non-finite weight for '" + term + "'");
  auto& list = entries_[term];
  for (const auto& a : list) {
    if (a.category == category) {
      throw Error("lexicon '" + name_ + "': duplicate entry (" + term + ", " + category + ")");
    }
  }
  list.push_back({category, weight});
  ++num_entries_;
  const auto it = std::lower_bound(categories_.begin(), categories_.end(), category);
  if (it == categories_.end() || *it != category) categories_.insert(it, category);
}

const std::vector<Association>* Lexicon::find(const std::string& term) const {
  const auto it = entries_.find(term);
  return it == entries_.end() ? nullptr : &it->second;
}

Lexicon load_lexicon(const std::string& path, const std::string& name) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open lexicon: " + path);
  Lexicon lex(name.empty() ? std::filesystem::path(path).stem().string() : name);
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> fields;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (csv::trim(line).empty()) continue;
    if (!csv::split_line(line, fields)) throw ParseError(path, line_no, "unterminated quote");
    for (auto& f : fields) f = csv::trim(f);
    if (!header_seen) {
      if (fields.size() < 2 || fields[0] != "term" || fields[1] != "category" ||
          (fields.size() == 3 && fields[2] != "weight") || fields.size() > 3) {
        throw ParseError(path, line_no, "expected header 'term,category,weight'");
      }
      header_seen = true;
      continue;
    }
    if (fields.size() < 2 || fields.size() > 3) {
      throw ParseError(path, line_no, "expected 2 or 3 fields, got " + std::to_string(fields.size()));
    }
    const std::string term = fold_apostrophes(text::normalize(fields[0]));
    if (term.empty() || fields[1].empty()) throw ParseError(path, line_no, "empty term or category");
    double weight = 1.0;
    if (fields.size() == 3 && !fields[2].empty()) {
      try {
        std::size_t used = 0;
        weight = std::stod(fields[2], &used);
        if (used != fields[2].size()) throw std::invalid_argument("trailing characters");
      } catch (const std::exception&) {
        throw ParseError(path, line_no, "weight '" + fields[2] + "' is not a number");
      }
      if (!std::isfinite(weight)) throw ParseError(path, line_no, "weight is not finite");
    }
    try {
      lex.add(term, fields[1], weight);
    } catch (const ParseError&) {
      throw;
    } catch (const Error& e) {
      throw ParseError(path, line_no, e.what());
    }
  }
  if (!header_seen) throw ParseError(path, line_no, "missing header");
  return lex;
}

CategoryScores score(std::span<const text::Token> tokens, const Lexicon& lex) {
  CategoryScores out;
  for (const auto& c : lex.categories()) out.by_category[c] = 0.0;
  if (tokens.empty()) {
    out.empty_document = true;
    return out;
  }
  // Sorted counts make the sums independent of token order.
  std::map<std::string, std::size_t> counts;
  for (const auto& t : tokens) ++counts[fold_apostrophes(t.surface)];
  const double n = static_cast<double>(tokens.size());
  for (const auto& [term, count] : counts) {
    const double rel = static_cast<double>(count) / n;
    if (const auto* assoc = lex.find(term)) {
      for (const auto& a : *assoc) out.by_category[a.category] += a.weight * rel;
    }
    for (std::size_t len = term.size(); len >= 1; --len) {
      const std::string pattern = term.substr(0, len) + "*";
      if (const auto* assoc = lex.find(pattern); assoc && is_prefix_pattern(pattern)) {
        for (const auto& a : *assoc) out.by_category[a.category] += a.weight * rel;
      }
    }
  }
  return out;
}

const std::vector<std::string>& first_singular_pronouns() {
  static const std::vector<std::string> v = {"i", "i'm", "i've", "i'd", "i'll", "my", "me", "mine", "myself"};
  return v;
}

const std::vector<std::string>& first_plural_pronouns() {
  static const std::vector<std::string> v = {"we", "we're", "our", "ours", "us", "ourselves"};
  return v;
}

const std::vector<std::string>& third_singular_pronouns() {
  static const std::vector<std::string> v = {"he",  "she",  "him",  "her",     "his",
                                             "hers", "he's", "she's", "himself", "herself"};
  return v;
}

const std::vector<std::string>& third_plural_pronouns() {
  static const std::vector<std::string> v = {"they", "them", "their", "theirs", "they're", "themselves"};
  return v;
}

PronounCounts pronoun_features(std::span<const text::Token> tokens) {
  static const std::unordered_set<std::string> fs(first_singular_pronouns().begin(), first_singular_pronouns().end());
  static const std::unordered_set<std::string> fp(first_plural_pronouns().begin(), first_plural_pronouns().end());
  static const std::unordered_set<std::string> ts(third_singular_pronouns().begin(), third_singular_pronouns().end());
  static const std::unordered_set<std::string> tp(third_plural_pronouns().begin(), third_plural_pronouns().end());
  PronounCounts pc;
  for (const auto& t : tokens) {
    const std::string s = fold_apostrophes(t.surface);
    if (fs.contains(s)) {
      ++pc.first_sing;
    } else if (fp.contains(s)) {
      ++pc.first_plur;
    } else if (ts.contains(s)) {
      ++pc.third_sing;
    } else if (tp.contains(s)) {
      ++pc.third_plur;
    }
  }
  pc.ratio_1st_3rd = static_cast<double>(pc.first_sing + pc.first_plur + 1) /
                     static_cast<double>(pc.third_sing + pc.third_plur + 1);
  return pc;
}

std::size_t unigram_threshold(std::size_t n_docs, double min_doc_fraction) {
  // Rounds down (1% of 38,060 documents is 380) but never below one document.
  const double raw = min_doc_fraction * static_cast<double>(n_docs);
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(raw + 1e-9)));
}

UnigramMatrix unigram_matrix(std::span<const TokenizedDoc> corpus, double min_doc_fraction) {
  if (corpus.empty()) throw Error("unigram_matrix: empty corpus");
  if (!(min_doc_fraction > 0.0 && min_doc_fraction <= 1.0)) {
    throw Error("unigram_matrix: min_doc_fraction must be in (0, 1]");
  }
  const std::size_t threshold = unigram_threshold(corpus.size(), min_doc_fraction);

  std::map<std::string, std::size_t> doc_freq;
  for (const auto& doc : corpus) {
    std::unordered_set<std::string> seen;
    for (const auto& t : doc.tokens) {
      if (seen.insert(t.surface).second) ++doc_freq[t.surface];
    }
  }
  UnigramMatrix out;
  out.threshold = threshold;
  std::vector<std::string> vocab;
  std::unordered_map<std::string, std::size_t> column_of;
  for (const auto& [term, df] : doc_freq) {
    if (df < threshold) continue;
    column_of.emplace(term, vocab.size());
    vocab.push_back(term);
    out.document_frequency.push_back(df);
  }
  out.table = FeatureTable(vocab);
  for (const auto& doc : corpus) {
    std::vector<double> row(vocab.size(), 0.0);
    if (!doc.tokens.empty()) {
      for (const auto& t : doc.tokens) {
        const auto it = column_of.find(t.surface);
        if (it != column_of.end()) row[it->second] += 1.0;
      }
      const double n = static_cast<double>(doc.tokens.size());
      for (double& v : row) v /= n;
    }
    out.table.add_row(doc.id, std::move(row));
  }
  return out;
}

}  // namespace storyframe::lexicon
