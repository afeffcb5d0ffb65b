#include "storyframe/character.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <regex>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "csv.hpp"
#include "storyframe/error.hpp"

namespace storyframe::character {

double Demographics::mean_other_age() const {
  if (others.empty()) return 0.0;
  double s = 0.0;
  for (const auto& o : others) s += o.age_value();
  return s / static_cast<double>(others.size());
}

double Demographics::mean_other_gender() const {
  if (others.empty()) return 0.0;
  double s = 0.0;
  for (const auto& o : others) s += o.gender_value();
  return s / static_cast<double>(others.size());
}

namespace {

const std::regex& marker_regex() {
  static const std::regex re(
      R"(\((\d{1,3})\s?([fm])(?![a-z0-9])\)?)"  // (24f) (24 f)
      R"(|\((\d{1,3})\))"                       // (24)
      R"(|\(([fm])\s?(\d{1,3})(?!\d)\)?)"        // (f24) (m 30)
      R"(|\b(\d{1,3})([fm])\b)"                 // 24f
      R"(|\b([fm])\s?(\d{1,3})\b)",             // f24, m 30
      std::regex::ECMAScript | std::regex::optimize);
  return re;
}

CharacterProfile profile_from(const std::smatch& m) {
  CharacterProfile p;
  auto set = [&](int age_group, int gender_group) {
    if (age_group > 0 && m[age_group].matched) p.age = std::stod(m[age_group].str());
    if (gender_group > 0 && m[gender_group].matched) p.gender_code = m[gender_group].str() == "f" ? 1.0 : -1.0;
  };
  if (m[1].matched) {
    set(1, 2);
  } else if (m[3].matched) {
    set(3, 0);
  } else if (m[5].matched) {
    set(5, 4);
  } else if (m[6].matched) {
    set(6, 7);
  } else {
    set(9, 8);
  }
  return p;
}

bool attaches_to_narrator(const std::vector<text::Token>& tokens, std::size_t marker_start) {
  std::size_t idx = 0;
  while (idx < tokens.size() && tokens[idx].end <= marker_start) ++idx;
  for (std::size_t back = 1; back <= 2 && back <= idx; ++back) {
    const auto& s = tokens[idx - back].surface;
    if (s == "i" || s == "me") return true;
  }
  return false;
}

}  // namespace

Demographics extract_demographics(std::string_view normalized_text) {
  Demographics out;
  const std::string textbuf(normalized_text);
  const auto tokens = text::tokenize(textbuf);
  bool narrator_found = false;
  auto begin = textbuf.cbegin();
  std::smatch m;
  auto flags = std::regex_constants::match_default;
  while (std::regex_search(begin, textbuf.cend(), m, marker_regex(), flags)) {
    const auto start = static_cast<std::size_t>(m[0].first - textbuf.cbegin());
    // A letter glued to an apostrophe is a contraction ("i'm 30"), not a marker.
    if (start > 0) {
      const auto prev = static_cast<unsigned char>(textbuf[start - 1]);
      if (prev == '\'' || prev == '"' || prev >= 0x80 || std::isalnum(prev) || prev == '_') {
        begin = m[0].first + 1;
        flags = std::regex_constants::match_prev_avail;
        continue;
      }
    }
    const CharacterProfile p = profile_from(m);
    if (attaches_to_narrator(tokens, start)) {
      if (narrator_found) {
        ++out.ignored_markers;
      } else {
        out.narrator = p;
        narrator_found = true;
      }
    } else {
      out.others.push_back(p);
    }
    begin = m[0].second;
    flags = std::regex_constants::match_prev_avail;
  }
  return out;
}

namespace {

int parse_int(const std::string& s, const std::string& source, std::size_t line, const char* what) {
  int v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ParseError(source, line, std::string("invalid ") + what + " '" + s + "'");
  }
  return v;
}

void validate_sentence(const DependencyGraph& g, const std::string& source, std::size_t first_line) {
  const int n = static_cast<int>(g.tokens.size());
  int roots = 0;
  for (const auto& t : g.tokens) {
    if (t.head < 0 || t.head > n) {
      throw ParseError(source, first_line + static_cast<std::size_t>(t.id) - 1,
                       "head " + std::to_string(t.head) + " out of range");
    }
    roots += t.head == 0 ? 1 : 0;
  }
  if (roots != 1) throw ParseError(source, first_line, "sentence has " + std::to_string(roots) + " roots");
  for (const auto& t : g.tokens) {
    int cur = t.id;
    for (int steps = 0; cur != 0; ++steps) {
      if (steps > n) throw ParseError(source, first_line, "cyclic heads at token " + std::to_string(t.id));
      cur = g.tokens[static_cast<std::size_t>(cur - 1)].head;
    }
  }
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

}  // namespace

std::vector<DependencyGraph> parse_conllu_text(std::string_view content, const std::string& source) {
  std::vector<DependencyGraph> out;
  DependencyGraph cur;
  std::size_t first_line = 0;
  std::size_t line_no = 0;
  auto flush = [&] {
    if (!cur.tokens.empty()) {
      validate_sentence(cur, source, first_line);
      cur.sentence_index = out.size();
      out.push_back(std::move(cur));
    }
    cur = DependencyGraph{};
    first_line = 0;
  };
  std::istringstream in{std::string(content)};
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (csv::trim(line).empty()) {
      flush();
      continue;
    }
    if (line[0] == '#') {
      const std::string_view key = "# text =";
      if (std::string_view(line).substr(0, key.size()) == key) cur.text = csv::trim(line.substr(key.size()));
      continue;
    }
    std::vector<std::string> cols;
    std::size_t pos = 0;
    while (true) {
      const auto tab = line.find('\t', pos);
      cols.push_back(line.substr(pos, tab == std::string::npos ? std::string::npos : tab - pos));
      if (tab == std::string::npos) break;
      pos = tab + 1;
    }
    if (cols.size() != 10) {
      throw ParseError(source, line_no, "expected 10 tab-separated columns, got " + std::to_string(cols.size()));
    }
    if (cols[0].find_first_of("-.") != std::string::npos) continue;  // multiword range or empty node
    ConlluToken t;
    t.id = parse_int(cols[0], source, line_no, "token id");
    if (t.id != static_cast<int>(cur.tokens.size()) + 1) {
      throw ParseError(source, line_no, "token id " + cols[0] + " out of sequence");
    }
    if (cur.tokens.empty()) first_line = line_no;
    t.form = cols[1];
    t.lemma = cols[2];
    t.upos = cols[3];
    t.xpos = cols[4];
    t.feats = cols[5];
    t.head = parse_int(cols[6], source, line_no, "head");
    t.deprel = cols[7];
    if (t.head == t.id) throw ParseError(source, line_no, "token " + cols[0] + " is its own head (cycle)");
    cur.tokens.push_back(std::move(t));
  }
  flush();
  return out;
}

std::vector<DependencyGraph> parse_conllu(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open parse file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_conllu_text(ss.str(), path);
}

std::vector<SvoTuple> extract_svo(const DependencyGraph& graph) {
  std::vector<SvoTuple> out;
  for (const auto& verb : graph.tokens) {
    if (verb.upos != "VERB") continue;
    const ConlluToken* subj = nullptr;
    const ConlluToken* obj = nullptr;
    for (const auto& dep : graph.tokens) {
      if (dep.head != verb.id) continue;
      if (!subj && (dep.deprel == "nsubj" || dep.deprel == "nsubj:pass")) subj = &dep;
      if (!obj && (dep.deprel == "obj" || dep.deprel == "dobj")) obj = &dep;
    }
    if (!subj) continue;
    SvoTuple t;
    t.sentence_index = graph.sentence_index;
    t.subject_text = text::normalize(lower(subj->form));
    t.verb_lemma = text::stem(text::normalize(lower(verb.form)));
    if (obj) t.object_text = text::normalize(lower(obj->form));
    if (t.verb_lemma.empty()) continue;
    out.push_back(std::move(t));
  }
  return out;
}

std::vector<SvoTuple> extract_svo(std::span<const DependencyGraph> graphs) {
  std::vector<SvoTuple> out;
  for (const auto& g : graphs) {
    auto t = extract_svo(g);
    out.insert(out.end(), t.begin(), t.end());
  }
  return out;
}

const std::vector<std::string>& entity_precedence() {
  static const std::vector<std::string> v = {"narrator", "romantic_females", "romantic_males", "family",
                                             "friends",  "females",          "males"};
  return v;
}

const std::vector<EntityClass>& default_entity_classes() {
  static const std::vector<EntityClass> v = {
      {"narrator", {"i", "i'm", "i\"m", "mine", "myself", "me"}},
      {"romantic_females",
       {"wife", "exgf", "ex-gf", "exgirlfriend", "ex-girlfriend", "exwife", "ex-wife", "exwive", "exwives",
        "girlfriend", "mistress", "sugarmom"}},
      {"romantic_males",
       {"husband", "exbf", "ex-bf", "exboyfriend", "ex-boyfriend", "exhusband", "ex-husband", "boyfriend", "hubby",
        "sugardad", "sugardaddy"}},
      {"family",
       {"aunt",        "uncle",       "sister",      "brother",    "mom",         "dad",      "mother",
        "father",      "mommy",       "daddy",       "daughter",   "son",         "children", "family",
        "godmother",   "godfather",   "grandmother", "grandfather", "grandma",    "grandpa",  "grandmom",
        "granddad",    "grandkid",    "grandchildren", "neice",    "nephew",      "parent",   "grandparent",
        "subling",     "relatives",   "cousin"}},
      {"friends", {"bestie", "besties", "friend", "friends", "bff", "bffs"}},
      {"females", {"she", "her", "herself", "hers"}},
      {"males", {"he", "him", "himself", "his"}},
  };
  return v;
}

std::vector<EntityClass> load_entity_classes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open entity classes: " + path);
  nlohmann::ordered_json j;
  try {
    j = nlohmann::ordered_json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path, 0, e.what());
  }
  if (!j.is_object()) throw ParseError(path, 0, "expected a JSON object of keyword lists");
  std::vector<EntityClass> known;
  std::vector<EntityClass> unknown;
  for (const auto& [name, list] : j.items()) {
    if (!list.is_array()) throw ParseError(path, 0, "class '" + name + "' must map to a list");
    EntityClass c{name, {}};
    for (const auto& kw : list) {
      if (!kw.is_string()) throw ParseError(path, 0, "class '" + name + "' has a non-string keyword");
      c.keywords.insert(text::normalize(lower(kw.get<std::string>())));
    }
    const auto& order = entity_precedence();
    (std::find(order.begin(), order.end(), name) != order.end() ? known : unknown).push_back(std::move(c));
  }
  const auto& order = entity_precedence();
  std::sort(known.begin(), known.end(), [&](const EntityClass& a, const EntityClass& b) {
    return std::find(order.begin(), order.end(), a.name) < std::find(order.begin(), order.end(), b.name);
  });
  known.insert(known.end(), unknown.begin(), unknown.end());
  return known;
}

namespace {

std::string head_token(std::string_view span) {
  const auto tokens = text::tokenize(text::normalize(span));
  for (auto it = tokens.rbegin(); it != tokens.rend(); ++it) {
    if (text::is_word(it->surface)) return it->surface;
  }
  return {};
}

}  // namespace

std::optional<std::string> match_entity(std::string_view span, std::span<const EntityClass> classes) {
  const std::string head = head_token(span);
  if (head.empty()) return std::nullopt;
  for (const auto& c : classes) {
    if (c.keywords.contains(head)) return c.name;
  }
  return std::nullopt;
}

void PowerAgencyLexicon::add(std::string_view verb, VerbFrame frame) {
  const std::string key = text::stem(text::normalize(verb));
  if (key.empty()) throw Error("power/agency lexicon: empty verb");
  const auto [it, inserted] = frames_.emplace(key, frame);
  if (!inserted && (it->second.power != frame.power || it->second.agency != frame.agency)) {
    throw Error("power/agency lexicon: conflicting frames for stem '" + key + "'");
  }
}

const VerbFrame* PowerAgencyLexicon::find(const std::string& verb_lemma) const {
  const auto it = frames_.find(verb_lemma);
  return it == frames_.end() ? nullptr : &it->second;
}

namespace {

std::optional<Power> parse_power(std::string s) {
  if (s.starts_with("power_")) s = s.substr(6);
  if (s == "agent") return Power::Agent;
  if (s == "theme") return Power::Theme;
  if (s == "equal") return Power::Equal;
  if (s == "none" || s.empty()) return Power::None;
  return std::nullopt;
}

std::optional<Agency> parse_agency(std::string s) {
  if (s.starts_with("agency_")) s = s.substr(7);
  if (s == "positive" || s == "pos") return Agency::Positive;
  if (s == "negative" || s == "neg") return Agency::Negative;
  if (s == "equal") return Agency::Equal;
  if (s == "none" || s.empty()) return Agency::None;
  return std::nullopt;
}

}  // namespace

PowerAgencyLexicon load_power_agency(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open power/agency lexicon: " + path);
  PowerAgencyLexicon lex;
  std::string line;
  std::size_t line_no = 0;
  bool header = false;
  std::vector<std::string> fields;
  while (std::getline(in, line)) {
    ++line_no;
    if (csv::trim(line).empty()) continue;
    if (!csv::split_line(line, fields)) throw ParseError(path, line_no, "unterminated quote");
    for (auto& f : fields) f = lower(csv::trim(f));
    if (!header) {
      if (fields != std::vector<std::string>{"verb", "power", "agency"}) {
        throw ParseError(path, line_no, "expected header 'verb,power,agency'");
      }
      header = true;
      continue;
    }
    if (fields.size() != 3) throw ParseError(path, line_no, "expected 3 fields");
    const auto p = parse_power(fields[1]);
    const auto a = parse_agency(fields[2]);
    if (!p) throw ParseError(path, line_no, "unknown power label '" + fields[1] + "'");
    if (!a) throw ParseError(path, line_no, "unknown agency label '" + fields[2] + "'");
    try {
      lex.add(fields[0], {*p, *a});
    } catch (const Error& e) {
      throw ParseError(path, line_no, e.what());
    }
  }
  if (!header) throw ParseError(path, line_no, "missing header");
  return lex;
}

PowerAgencyScore power_agency(std::span<const SvoTuple> tuples, const PowerAgencyLexicon& lex,
                              const EntityClass& target) {
  PowerAgencyScore s;
  double power_sum = 0.0;
  double agency_sum = 0.0;
  for (const auto& t : tuples) {
    const VerbFrame* f = lex.find(t.verb_lemma);
    if (!f) continue;
    const bool subj = target.keywords.contains(head_token(t.subject_text));
    const bool obj = t.object_text && target.keywords.contains(head_token(*t.object_text));
    if ((subj || obj) && (f->power == Power::Agent || f->power == Power::Theme)) {
      ++s.n_power_tuples;
      const bool agent = f->power == Power::Agent;
      if ((subj && agent) || (obj && !agent)) power_sum += 1.0;
      if ((obj && agent) || (subj && !agent)) power_sum -= 1.0;
    }
    if (subj && (f->agency == Agency::Positive || f->agency == Agency::Negative)) {
      ++s.n_agency_tuples;
      agency_sum += f->agency == Agency::Positive ? 1.0 : -1.0;
    }
  }
  if (s.n_power_tuples > 0) s.power = power_sum / static_cast<double>(s.n_power_tuples);
  if (s.n_agency_tuples > 0) s.agency = agency_sum / static_cast<double>(s.n_agency_tuples);
  return s;
}

std::vector<SvoTuple> fallback_svo(std::span<const text::Sentence> sentences, const PowerAgencyLexicon& lex,
                                   std::span<const EntityClass> classes) {
  static const std::unordered_set<std::string> pronouns = {"i",  "me", "you",  "he",   "him", "she", "her",
                                                           "we", "us", "they", "them", "it"};
  static const std::unordered_set<std::string> determiners = {"the", "a",    "an",   "my",   "your", "his",
                                                              "our", "their", "this", "that", "these", "those"};
  auto is_character = [&](const std::string& w) {
    if (pronouns.contains(w)) return true;
    return std::any_of(classes.begin(), classes.end(), [&](const EntityClass& c) { return c.keywords.contains(w); });
  };
  std::vector<SvoTuple> out;
  for (const auto& sent : sentences) {
    const auto& toks = sent.tokens;
    for (std::size_t i = 1; i < toks.size(); ++i) {
      const std::string& w = toks[i].surface;
      if (!text::is_word(w) || is_character(w)) continue;
      const std::string lemma = text::stem(w);
      if (!lex.find(lemma) || !is_character(toks[i - 1].surface)) continue;
      SvoTuple t;
      t.sentence_index = sent.index;
      t.subject_text = toks[i - 1].surface;
      t.verb_lemma = lemma;
      std::size_t j = i + 1;
      while (j < toks.size() && determiners.contains(toks[j].surface)) ++j;
      if (j < toks.size() && is_character(toks[j].surface)) t.object_text = toks[j].surface;
      out.push_back(std::move(t));
    }
  }
  return out;
}

}  // namespace storyframe::character
