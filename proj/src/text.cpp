#include "storyframe/text.hpp"

#include <algorithm>
#include <array>
#include <cstdint>
#include <fstream>
#include <optional>

#include "storyframe/error.hpp"

namespace storyframe::text {

namespace {

struct Decoded {
  char32_t cp = 0;
  std::size_t len = 0;  // 0 means invalid sequence
};

Decoded decode_utf8(std::string_view s, std::size_t pos) {
  const auto b0 = static_cast<unsigned char>(s[pos]);
  if (b0 < 0x80) return {b0, 1};
  std::size_t len = 0;
  char32_t cp = 0;
  char32_t min_cp = 0;
  if ((b0 & 0xE0) == 0xC0) {
    len = 2;
    cp = b0 & 0x1F;
    min_cp = 0x80;
  } else if ((b0 & 0xF0) == 0xE0) {
    len = 3;
    cp = b0 & 0x0F;
    min_cp = 0x800;
  } else if ((b0 & 0xF8) == 0xF0) {
    len = 4;
    cp = b0 & 0x07;
    min_cp = 0x10000;
  } else {
    return {};
  }
  if (pos + len > s.size()) return {};
  for (std::size_t i = 1; i < len; ++i) {
    const auto b = static_cast<unsigned char>(s[pos + i]);
    if ((b & 0xC0) != 0x80) return {};
    cp = (cp << 6) | (b & 0x3F);
  }
  if (cp < min_cp || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) return {};
  return {cp, len};
}

void append_utf8(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

bool is_space_cp(char32_t cp) {
  return cp == ' ' || cp == '\t' || cp == '\n' || cp == '\r' || cp == '\v' || cp == '\f' ||
         cp == 0xA0 || cp == 0x2028 || cp == 0x2029 || cp == 0x3000 ||
         (cp >= 0x2000 && cp <= 0x200A) || cp == 0x202F || cp == 0x205F;
}

char32_t to_lower_cp(char32_t cp) {
  if (cp >= 'A' && cp <= 'Z') return cp + 32;
  // Latin-1 supplement capitals, skipping the multiplication sign.
  if (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7) return cp + 32;
  return cp;
}

bool is_ascii_alnum(unsigned char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9');
}

bool is_ascii_alpha(unsigned char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }

bool is_ascii_digit(unsigned char c) { return c >= '0' && c <= '9'; }

// Non-ASCII code points that behave like punctuation or stand-alone symbols.
bool is_symbol_cp(char32_t cp) {
  return (cp >= 0xA1 && cp <= 0xBF) || cp == 0xD7 || cp == 0xF7 || (cp >= 0x2000 && cp <= 0x206F) ||
         (cp >= 0x2190 && cp <= 0x2BFF) || (cp >= 0x3000 && cp <= 0x303F) ||
         (cp >= 0x1F000 && cp <= 0x1FAFF);
}

bool is_modifier_cp(char32_t cp) {
  return (cp >= 0xFE00 && cp <= 0xFE0F) || (cp >= 0x1F3FB && cp <= 0x1F3FF) || cp == 0x20E3;
}

constexpr char32_t kZeroWidthJoiner = 0x200D;
constexpr char32_t kRightSingleQuote = 0x2019;

// Word character at pos; returns its byte length or 0.
std::size_t word_char_len(std::string_view s, std::size_t pos) {
  if (pos >= s.size()) return 0;
  const auto c = static_cast<unsigned char>(s[pos]);
  if (c < 0x80) return is_ascii_alnum(c) ? 1 : 0;
  const Decoded d = decode_utf8(s, pos);
  if (d.len == 0) return 0;
  if (is_symbol_cp(d.cp) || is_modifier_cp(d.cp) || d.cp == kZeroWidthJoiner) return 0;
  return d.len;
}

bool starts_with(std::string_view s, std::size_t pos, std::string_view prefix) {
  return s.substr(pos, prefix.size()) == prefix;
}

// Length of a dotted abbreviation like "e.g." or "u.s." starting at pos, or 0.
std::size_t match_dotted_abbreviation(std::string_view s, std::size_t pos) {
  std::size_t i = pos;
  int groups = 0;
  while (i + 1 < s.size() && is_ascii_alpha(static_cast<unsigned char>(s[i])) && s[i + 1] == '.') {
    i += 2;
    ++groups;
  }
  if (groups < 2) return 0;
  if (word_char_len(s, i) > 0) return 0;
  return i - pos;
}

constexpr std::array<std::string_view, 7> kContractionSuffixes = {"m", "s", "t", "re", "ve", "ll", "d"};

// Byte length of a straight double quote used as an apostrophe (i"m), or 0.
std::size_t quote_contraction_len(std::string_view s, std::size_t pos) {
  if (pos >= s.size() || s[pos] != '"') return 0;
  for (auto suffix : kContractionSuffixes) {
    if (starts_with(s, pos + 1, suffix) && word_char_len(s, pos + 1 + suffix.size()) == 0) return 1;
  }
  return 0;
}

std::size_t consume_word(std::string_view s, std::size_t pos) {
  std::size_t i = pos;
  while (i < s.size()) {
    if (const std::size_t n = word_char_len(s, i); n > 0) {
      i += n;
      continue;
    }
    const auto c = static_cast<unsigned char>(s[i]);
    if ((c == '\'' || c == '-') && word_char_len(s, i + 1) > 0) {
      i += 1;
      continue;
    }
    if (c == '"' && quote_contraction_len(s, i) > 0) {
      i += 1;
      continue;
    }
    if ((c == '.' || c == ',') && i > pos && is_ascii_digit(static_cast<unsigned char>(s[i - 1])) &&
        i + 1 < s.size() && is_ascii_digit(static_cast<unsigned char>(s[i + 1]))) {
      i += 1;
      continue;
    }
    if (c >= 0x80) {
      const Decoded d = decode_utf8(s, i);
      if (d.len > 0 && d.cp == kRightSingleQuote && word_char_len(s, i + d.len) > 0) {
        i += d.len;
        continue;
      }
    }
    break;
  }
  return i - pos;
}

std::size_t consume_url(std::string_view s, std::size_t pos) {
  if (!(starts_with(s, pos, "http://") || starts_with(s, pos, "https://") || starts_with(s, pos, "www."))) {
    return 0;
  }
  std::size_t i = pos;
  while (i < s.size() && s[i] != ' ') ++i;
  while (i > pos) {
    const char last = s[i - 1];
    if (last == '.' || last == ',' || last == '!' || last == '?' || last == ';' || last == ':' || last == ')' ||
        last == '"' || last == '\'') {
      --i;
    } else {
      break;
    }
  }
  return i - pos;
}

// A symbol plus any trailing variation selectors, skin tones and ZWJ sequences.
std::size_t consume_symbol(std::string_view s, std::size_t pos) {
  Decoded d = decode_utf8(s, pos);
  if (d.len == 0) return 1;
  std::size_t i = pos + d.len;
  while (i < s.size()) {
    const Decoded next = decode_utf8(s, i);
    if (next.len == 0) break;
    if (is_modifier_cp(next.cp)) {
      i += next.len;
    } else if (next.cp == kZeroWidthJoiner) {
      i += next.len;
      if (i < s.size()) {
        const Decoded joined = decode_utf8(s, i);
        if (joined.len > 0 && is_symbol_cp(joined.cp)) i += joined.len;
      }
    } else {
      break;
    }
  }
  return i - pos;
}

bool is_terminal_char(char c) { return c == '.' || c == '!' || c == '?'; }

const std::array<std::string_view, 31> kEmoticons = {
    ":-)", ":)", ":-(", ":(", ":-d", ":d", ":-p", ":p", ";-)", ";)", ":'(", ":'-(", ":/", ":-/", ":|",
    ":-|", ":o", ":-o", ":*", ":-*", "<3", "</3", "^_^", "^^", "-_-", "o_o", "t_t", "xd", ":]", ":[",
    ":')"};

const std::array<std::string_view, 28> kAbbreviations = {
    "mr.", "mrs.", "ms.", "dr.", "prof.", "sr.", "jr.", "st.", "vs.", "etc.", "e.g.", "i.e.", "a.m.", "p.m.",
    "approx.", "appt.", "apt.", "dept.", "est.", "min.", "no.", "u.s.", "u.k.", "jan.", "feb.", "aug.",
    "sept.", "oct."};

}  // namespace

std::string normalize(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  bool pending_space = false;
  std::size_t i = 0;
  while (i < raw.size()) {
    const Decoded d = decode_utf8(raw, i);
    if (d.len == 0) {
      ++i;  // invalid byte: drop it
      continue;
    }
    i += d.len;
    if (is_space_cp(d.cp)) {
      pending_space = true;
      continue;
    }
    if (pending_space && !out.empty()) out.push_back(' ');
    pending_space = false;
    append_utf8(out, to_lower_cp(d.cp));
  }
  return out;
}

const std::vector<std::string>& default_emoticons() {
  static const std::vector<std::string> list(kEmoticons.begin(), kEmoticons.end());
  return list;
}

const std::vector<std::string>& default_abbreviations() {
  static const std::vector<std::string> list(kAbbreviations.begin(), kAbbreviations.end());
  return list;
}

std::vector<std::string> load_word_list(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open word list: " + path);
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto last = line.find_last_not_of(" \t");
    out.push_back(normalize(line.substr(first, last - first + 1)));
  }
  return out;
}

Tokenizer::Tokenizer() : Tokenizer(default_emoticons()) {}

Tokenizer::Tokenizer(std::vector<std::string> emoticons) : emoticons_(std::move(emoticons)) {
  for (auto& e : emoticons_) e = normalize(e);
  std::erase_if(emoticons_, [](const std::string& e) { return e.empty(); });
  std::stable_sort(emoticons_.begin(), emoticons_.end(),
                   [](const std::string& a, const std::string& b) { return a.size() > b.size(); });
}

std::size_t Tokenizer::match_emoticon(std::string_view text, std::size_t pos) const {
  for (const auto& e : emoticons_) {
    if (!starts_with(text, pos, e)) continue;
    // An emoticon must not run into a following word ("<30", ":data").
    if (word_char_len(text, pos + e.size()) > 0) continue;
    return e.size();
  }
  return 0;
}

std::vector<Token> Tokenizer::tokenize(std::string_view s) const {
  std::vector<Token> tokens;
  std::size_t pos = 0;
  auto emit = [&](std::size_t len) {
    tokens.push_back(Token{std::string(s.substr(pos, len)), pos, pos + len});
    pos += len;
  };
  while (pos < s.size()) {
    const auto c = static_cast<unsigned char>(s[pos]);
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
      ++pos;
      continue;
    }
    if (const std::size_t n = consume_url(s, pos); n > 0) {
      emit(n);
      continue;
    }
    if (const std::size_t n = match_emoticon(s, pos); n > 0) {
      emit(n);
      continue;
    }
    if (const std::size_t n = match_dotted_abbreviation(s, pos); n > 0) {
      emit(n);
      continue;
    }
    if ((c == '#' || c == '@') && word_char_len(s, pos + 1) > 0) {
      emit(1 + consume_word(s, pos + 1));
      continue;
    }
    if (word_char_len(s, pos) > 0) {
      emit(consume_word(s, pos));
      continue;
    }
    if (is_terminal_char(static_cast<char>(c))) {
      std::size_t n = 1;
      while (pos + n < s.size() && is_terminal_char(s[pos + n])) ++n;
      emit(n);
      continue;
    }
    if (c >= 0x80) {
      emit(consume_symbol(s, pos));
      continue;
    }
    emit(1);
  }
  return tokens;
}

std::vector<Token> tokenize(std::string_view normalized) {
  static const Tokenizer tokenizer;
  return tokenizer.tokenize(normalized);
}

std::vector<Token> tokenize_raw(std::string_view raw) { return tokenize(normalize(raw)); }

bool is_terminal_punctuation(std::string_view surface) {
  return !surface.empty() && std::all_of(surface.begin(), surface.end(), is_terminal_char);
}

bool is_word(std::string_view surface) {
  return std::any_of(surface.begin(), surface.end(), [](char ch) {
    const auto c = static_cast<unsigned char>(ch);
    return c >= 0x80 || is_ascii_alnum(c);
  });
}

SentenceSplitter::SentenceSplitter() : SentenceSplitter(default_abbreviations()) {}

SentenceSplitter::SentenceSplitter(const std::vector<std::string>& abbreviations)
    : abbreviations_(abbreviations.begin(), abbreviations.end()) {}

std::vector<Sentence> SentenceSplitter::split(std::span<const Token> tokens) const {
  std::vector<Sentence> out;
  Sentence current;
  auto close = [&] {
    if (current.tokens.empty()) return;
    current.index = out.size();
    out.push_back(std::move(current));
    current = Sentence{};
  };
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const Token& tok = tokens[i];
    current.tokens.push_back(tok);
    if (!is_terminal_punctuation(tok.surface)) continue;
    // "mr." arrives as "mr" followed by "."; a period glued to its word is not a break.
    if (tok.surface == "." && i > 0 && tokens[i - 1].end == tok.start &&
        abbreviations_.contains(tokens[i - 1].surface + ".")) {
      continue;
    }
    while (i + 1 < tokens.size() && (tokens[i + 1].surface == ")" || tokens[i + 1].surface == "]")) {
      current.tokens.push_back(tokens[++i]);
    }
    close();
  }
  close();
  return out;
}

std::vector<Sentence> split_sentences(std::span<const Token> tokens) {
  static const SentenceSplitter splitter;
  return splitter.split(tokens);
}

// ---------------------------------------------------------------------------
// Porter stemmer, original 1980 rule set.

namespace {

class PorterStemmer {
 public:
  explicit PorterStemmer(std::string word) : w_(std::move(word)) {}

  std::string run() {
    step1a();
    step1b();
    step1c();
    step2();
    step3();
    step4();
    step5a();
    step5b();
    return w_;
  }

 private:
  static bool is_vowel_letter(char c) { return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u'; }

  static bool consonant(std::string_view s, std::size_t i) {
    if (is_vowel_letter(s[i])) return false;
    if (s[i] != 'y') return true;
    // y is a consonant at the start or after a vowel.
    bool negate = false;
    while (i > 0 && s[i] == 'y') {
      negate = !negate;
      --i;
    }
    return (!is_vowel_letter(s[i])) != negate;
  }

  static int measure(std::string_view s) {
    int m = 0;
    bool prev_vowel = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
      const bool c = consonant(s, i);
      if (c && prev_vowel) ++m;
      prev_vowel = !c;
    }
    return m;
  }

  static bool contains_vowel(std::string_view s) {
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (!consonant(s, i)) return true;
    }
    return false;
  }

  static bool ends_double_consonant(std::string_view s) {
    const std::size_t n = s.size();
    return n >= 2 && s[n - 1] == s[n - 2] && consonant(s, n - 1);
  }

  static bool ends_cvc(std::string_view s) {
    const std::size_t n = s.size();
    return n >= 3 && consonant(s, n - 3) && !consonant(s, n - 2) && consonant(s, n - 1) && s[n - 1] != 'w' &&
           s[n - 1] != 'x' && s[n - 1] != 'y';
  }

  bool ends(std::string_view suffix) const { return w_.ends_with(suffix); }

  std::string_view stem_without(std::string_view suffix) const {
    return std::string_view(w_).substr(0, w_.size() - suffix.size());
  }

  struct Rule {
    std::string_view suffix;
    std::string_view replacement;
  };

  // The first rule whose suffix matches decides; later rules are not tried.
  template <std::size_t N, typename Cond>
  void apply_first(const std::array<Rule, N>& rules, Cond cond) {
    for (const Rule& r : rules) {
      if (!ends(r.suffix)) continue;
      const std::string_view base = stem_without(r.suffix);
      if (cond(base)) w_ = std::string(base) + std::string(r.replacement);
      return;
    }
  }

  static bool positive_measure(std::string_view s) { return measure(s) > 0; }

  void step1a() {
    static constexpr std::array<Rule, 4> rules{{{"sses", "ss"}, {"ies", "i"}, {"ss", "ss"}, {"s", ""}}};
    apply_first(rules, [](std::string_view) { return true; });
  }

  void step1b() {
    if (ends("eed")) {
      if (measure(stem_without("eed")) > 0) w_ = std::string(stem_without("eed")) + "ee";
      return;
    }
    std::string base;
    bool stripped = false;
    for (std::string_view suffix : {std::string_view("ed"), std::string_view("ing")}) {
      if (ends(suffix) && contains_vowel(stem_without(suffix))) {
        base = std::string(stem_without(suffix));
        stripped = true;
        break;
      }
    }
    if (!stripped) return;
    w_ = base;
    if (ends("at") || ends("bl") || ends("iz")) {
      w_ += 'e';
    } else if (ends_double_consonant(w_)) {
      const char last = w_.back();
      if (last != 'l' && last != 's' && last != 'z') w_.pop_back();
    } else if (measure(w_) == 1 && ends_cvc(w_)) {
      w_ += 'e';
    }
  }

  void step1c() {
    if (ends("y") && contains_vowel(stem_without("y"))) w_.back() = 'i';
  }

  void step2() {
    static constexpr std::array<Rule, 20> rules{{{"ational", "ate"}, {"tional", "tion"}, {"enci", "ence"},
                                                 {"anci", "ance"},    {"izer", "ize"},     {"abli", "able"},
                                                 {"alli", "al"},      {"entli", "ent"},    {"eli", "e"},
                                                 {"ousli", "ous"},    {"ization", "ize"},  {"ation", "ate"},
                                                 {"ator", "ate"},     {"alism", "al"},     {"iveness", "ive"},
                                                 {"fulness", "ful"},  {"ousness", "ous"},  {"aliti", "al"},
                                                 {"iviti", "ive"},    {"biliti", "ble"}}};
    apply_first(rules, positive_measure);
  }

  void step3() {
    static constexpr std::array<Rule, 7> rules{{{"icate", "ic"},
                                                {"ative", ""},
                                                {"alize", "al"},
                                                {"iciti", "ic"},
                                                {"ical", "ic"},
                                                {"ful", ""},
                                                {"ness", ""}}};
    apply_first(rules, positive_measure);
  }

  void step4() {
    static constexpr std::array<Rule, 19> rules{{{"al", ""},   {"ance", ""}, {"ence", ""}, {"er", ""},
                                                 {"ic", ""},   {"able", ""}, {"ible", ""}, {"ant", ""},
                                                 {"ement", ""}, {"ment", ""}, {"ent", ""},  {"ion", ""},
                                                 {"ou", ""},   {"ism", ""},  {"ate", ""},  {"iti", ""},
                                                 {"ous", ""},  {"ive", ""},  {"ize", ""}}};
    for (const Rule& r : rules) {
      if (!ends(r.suffix)) continue;
      const std::string_view base = stem_without(r.suffix);
      bool ok = measure(base) > 1;
      if (r.suffix == "ion") ok = ok && !base.empty() && (base.back() == 's' || base.back() == 't');
      if (ok) w_ = std::string(base);
      return;
    }
  }

  void step5a() {
    if (!ends("e")) return;
    const std::string_view base = stem_without("e");
    const int m = measure(base);
    if (m > 1 || (m == 1 && !ends_cvc(base))) w_ = std::string(base);
  }

  void step5b() {
    if (ends("ll") && measure(std::string_view(w_).substr(0, w_.size() - 1)) > 1) w_.pop_back();
  }

  std::string w_;
};

}  // namespace

std::string stem(std::string_view word) {
  if (word.empty()) return {};
  return PorterStemmer(std::string(word)).run();
}

}  // namespace storyframe::text
