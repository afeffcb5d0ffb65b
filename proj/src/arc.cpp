#include "storyframe/arc.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "csv.hpp"
#include "storyframe/error.hpp"

namespace storyframe::arc {

namespace {

constexpr double kBoost = 0.293;

bool ends_with_nt(const std::string& w) { return w.size() > 3 && w.ends_with("n't"); }

}  // namespace

const std::map<std::string, double>& default_boosters() {
  static const std::map<std::string, double> m = [] {
    std::map<std::string, double> b;
    for (const char* w :
         {"absolutely", "amazingly",   "awfully",      "completely", "considerably", "decidedly",   "deeply",
          "effing",     "enormously",  "entirely",     "especially", "exceptionally", "extremely",  "fabulously",
          "flipping",   "flippin",     "fricking",     "frickin",    "frigging",     "friggin",     "fully",
          "fucking",    "greatly",     "hella",        "highly",     "hugely",       "incredibly",  "intensely",
          "majorly",    "more",        "most",         "particularly", "purely",     "quite",       "really",
          "remarkably", "so",          "substantially", "thoroughly", "totally",     "tremendously", "uber",
          "unbelievably", "unusually", "utterly",      "very"}) {
      b[w] = kBoost;
    }
    for (const char* w : {"almost", "barely", "hardly", "kinda", "kindof", "kind-of", "less", "little", "marginally",
                          "occasionally", "partly", "scarcely", "slightly", "somewhat", "sorta", "sortof", "sort-of"}) {
      b[w] = -kBoost;
    }
    return b;
  }();
  return m;
}

const std::set<std::string>& default_negations() {
  static const std::set<std::string> s = {
      "aint",    "arent",   "cannot",  "cant",     "couldnt", "darent",   "didnt",   "doesnt",  "ain't",
      "aren't",  "can't",   "couldn't", "daren't", "didn't",  "doesn't",  "dont",    "hadnt",   "hasnt",
      "havent",  "isnt",    "mightnt", "mustnt",   "neither", "don't",    "hadn't",  "hasn't",  "haven't",
      "isn't",   "mightn't", "mustn't", "neednt",  "needn't", "never",    "none",    "nope",    "nor",
      "not",     "nothing", "nowhere", "oughtnt",  "shant",   "shouldnt", "uhuh",    "wasnt",   "werent",
      "oughtn't", "shan't", "shouldn't", "uh-uh",  "wasn't",  "weren't",  "without", "wont",    "wouldnt",
      "won't",   "wouldn't", "rarely", "seldom",   "despite"};
  return s;
}

ValenceLexicon load_valence_lexicon(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open valence lexicon: " + path);
  ValenceLexicon lex;
  lex.boosters = default_boosters();
  lex.negations = default_negations();
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> fields;
  bool first = true;
  bool tsv = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (csv::trim(line).empty()) continue;
    if (first) {
      first = false;
      if (csv::trim(line) == "term,valence") continue;
      if (line.find('\t') == std::string::npos) throw ParseError(path, line_no, "expected header 'term,valence'");
      tsv = true;
    }
    if (tsv) {
      fields.clear();
      std::istringstream ss(line);
      std::string f;
      while (std::getline(ss, f, '\t')) fields.push_back(f);
    } else if (!csv::split_line(line, fields)) {
      throw ParseError(path, line_no, "unterminated quote");
    }
    if (fields.size() < 2 || (!tsv && fields.size() != 2)) throw ParseError(path, line_no, "expected term and valence");
    const std::string term = text::normalize(csv::trim(fields[0]));
    double v = 0.0;
    try {
      std::size_t used = 0;
      const std::string num = csv::trim(fields[1]);
      v = std::stod(num, &used);
      if (used != num.size()) throw std::invalid_argument(num);
    } catch (const std::exception&) {
      throw ParseError(path, line_no, "valence '" + fields[1] + "' is not a number");
    }
    if (term.empty() || !std::isfinite(v)) throw ParseError(path, line_no, "empty term or non-finite valence");
    if (!lex.valence.emplace(term, v).second) throw ParseError(path, line_no, "duplicate term '" + term + "'");
  }
  return lex;
}

std::map<std::string, double> load_boosters(const std::string& path) {
  std::map<std::string, double> out;
  for (const auto& entry : text::load_word_list(path)) {
    std::istringstream ss(entry);
    std::string word;
    double inc = kBoost;
    ss >> word;
    if (!(ss >> inc)) inc = kBoost;
    if (!std::isfinite(inc)) throw Error("booster '" + word + "' has a non-finite increment");
    out[word] = inc;
  }
  return out;
}

double sentence_sentiment(std::span<const text::Token> tokens, const ValenceLexicon& lex) {
  std::vector<const std::string*> words;
  for (const auto& t : tokens) {
    if (text::is_word(t.surface) || lex.valence.contains(t.surface)) words.push_back(&t.surface);
  }
  static constexpr double kScale[3] = {1.0, 0.95, 0.9};
  double sum = 0.0;
  for (std::size_t i = 0; i < words.size(); ++i) {
    const std::string& w = *words[i];
    if (lex.boosters.contains(w)) continue;
    const auto it = lex.valence.find(w);
    if (it == lex.valence.end()) continue;
    double v = it->second;
    bool negated = false;
    for (std::size_t d = 1; d <= 3 && d <= i; ++d) {
      const std::string& prev = *words[i - d];
      if (const auto b = lex.boosters.find(prev); b != lex.boosters.end() && v != 0.0) {
        const double inc = b->second * kScale[d - 1];
        v += v > 0.0 ? inc : -inc;
      }
      if (lex.negations.contains(prev) || ends_with_nt(prev)) negated = true;
    }
    if (negated) v *= lex.negation_factor;
    sum += v;
  }
  if (sum == 0.0) return 0.0;
  return sum / std::sqrt(sum * sum + lex.normalization);
}

std::vector<std::size_t> chunk_sizes(std::size_t n, std::size_t n_chunks) {
  if (n_chunks == 0) throw Error("chunk_sizes: need at least one chunk");
  std::vector<std::size_t> sizes(n_chunks, n / n_chunks);
  for (std::size_t i = 0; i < n % n_chunks; ++i) ++sizes[i];
  return sizes;
}

double ols_slope(std::span<const double> values) {
  const std::size_t n = values.size();
  if (n < 2) throw Error("ols_slope: need at least two points");
  const double xbar = static_cast<double>(n - 1) / 2.0;
  double ybar = 0.0;
  for (double v : values) ybar += v;
  ybar /= static_cast<double>(n);
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = static_cast<double>(i) - xbar;
    sxy += dx * (values[i] - ybar);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

std::size_t word_count(std::span<const text::Token> tokens) {
  std::size_t n = 0;
  for (const auto& t : tokens) n += text::is_word(t.surface) ? 1 : 0;
  return n;
}

ArcProfile story_arc(std::span<const text::Sentence> sentences, std::span<const character::SvoTuple> tuples,
                     const ValenceLexicon& lex, const character::EntityClass& narrator, const ArcOptions& opts) {
  if (opts.n_chunks < 2) throw Error("story_arc: need at least two chunks");
  std::set<std::size_t> narrator_sentences;
  const std::vector<character::EntityClass> only = {narrator};
  for (const auto& t : tuples) {
    if (character::match_entity(t.subject_text, only) ||
        (t.object_text && character::match_entity(*t.object_text, only))) {
      narrator_sentences.insert(t.sentence_index);
    }
  }
  std::vector<double> scores;
  for (const auto& s : sentences) {
    if (word_count(s.tokens) < opts.min_sentence_words || !narrator_sentences.contains(s.index)) continue;
    scores.push_back(sentence_sentiment(s.tokens, lex));
  }
  ArcProfile arc;
  arc.n_sentences_used = scores.size();
  if (scores.size() < opts.n_chunks) return arc;
  arc.valid = true;
  arc.chunk_sizes = chunk_sizes(scores.size(), opts.n_chunks);
  std::size_t pos = 0;
  for (std::size_t size : arc.chunk_sizes) {
    double s = 0.0;
    for (std::size_t i = 0; i < size; ++i) s += scores[pos + i];
    arc.chunk_means.push_back(s / static_cast<double>(size));
    pos += size;
  }
  arc.slope = ols_slope(arc.chunk_means);
  return arc;
}

std::vector<text::Sentence> sentences_from_graphs(std::span<const character::DependencyGraph> graphs) {
  std::vector<text::Sentence> out;
  for (const auto& g : graphs) {
    text::Sentence s;
    s.index = g.sentence_index;
    for (const auto& t : g.tokens) {
      std::string form = text::normalize(t.form);
      if (!form.empty()) s.tokens.push_back({std::move(form), 0, 0});
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<ChunkComparison> arc_class_comparison(std::span<const ArcProfile> arcs_yta,
                                                  std::span<const ArcProfile> arcs_nta) {
  if (arcs_yta.size() < 2 || arcs_nta.size() < 2) throw Error("arc_class_comparison: each class needs at least two arcs");
  const std::size_t k = arcs_yta.front().chunk_means.size();
  auto check = [&](std::span<const ArcProfile> arcs) {
    for (const auto& a : arcs) {
      if (!a.valid || a.chunk_means.size() != k) throw Error("arc_class_comparison: invalid or mismatched arc");
    }
  };
  check(arcs_yta);
  check(arcs_nta);
  std::vector<ChunkComparison> out;
  for (std::size_t c = 0; c < k; ++c) {
    std::vector<double> y;
    std::vector<double> n;
    for (const auto& a : arcs_yta) y.push_back(a.chunk_means[c]);
    for (const auto& a : arcs_nta) n.push_back(a.chunk_means[c]);
    const auto w = stats::welch_t(y, n);
    out.push_back({stats::mean(y), stats::mean(n), w.t, w.p, w.zero_variance});
  }
  return out;
}

std::string arc_report_json(std::span<const ArcProfile> arcs_yta, std::span<const ArcProfile> arcs_nta,
                            const std::string& meta_json) {
  nlohmann::ordered_json j;
  if (!meta_json.empty()) j["meta"] = nlohmann::ordered_json::parse(meta_json);
  std::vector<ArcProfile> yta;
  std::vector<ArcProfile> nta;
  for (const auto& a : arcs_yta) {
    if (a.valid) yta.push_back(a);
  }
  for (const auto& a : arcs_nta) {
    if (a.valid) nta.push_back(a);
  }
  j["n_valid"] = {{"YTA", yta.size()}, {"NTA", nta.size()}};
  if (yta.size() < 2 || nta.size() < 2) {
    j["warning"] = "fewer than two valid arcs in a class; no comparison";
    return j.dump(2);
  }
  const auto cmp = arc_class_comparison(yta, nta);
  std::vector<double> my, mn, t, p;
  std::vector<bool> zv;
  for (const auto& c : cmp) {
    my.push_back(c.mean_yta);
    mn.push_back(c.mean_nta);
    t.push_back(c.t);
    p.push_back(c.p);
    zv.push_back(c.zero_variance);
  }
  auto mean_slope = [](const std::vector<ArcProfile>& arcs) {
    double s = 0.0;
    for (const auto& a : arcs) s += a.slope;
    return s / static_cast<double>(arcs.size());
  };
  j["YTA"] = my;
  j["NTA"] = mn;
  j["slope_summary"] = {{"YTA", mean_slope(yta)}, {"NTA", mean_slope(nta)}};
  j["t_per_chunk"] = t;
  j["p_per_chunk"] = p;
  j["zero_variance"] = zv;
  return j.dump(2);
}

}  // namespace storyframe::arc
