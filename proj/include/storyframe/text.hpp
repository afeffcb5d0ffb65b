#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace storyframe::text {

struct Token {
  std::string surface;
  std::size_t start = 0;  // byte offsets into the normalized text, [start, end)
  std::size_t end = 0;

  bool operator==(const Token&) const = default;
};

struct Sentence {
  std::size_t index = 0;
  std::vector<Token> tokens;
};

/// Collapses whitespace runs to one space, trims, lowercases, and drops
/// byte sequences that are not valid UTF-8.
std::string normalize(std::string_view raw);

const std::vector<std::string>& default_emoticons();
const std::vector<std::string>& default_abbreviations();

/// Reads a plain-text list, one entry per line. Blank lines and lines
/// starting with '#' are skipped.
std::vector<std::string> load_word_list(const std::string& path);

/// Social-media aware tokenizer. Keeps contractions, emoticons, URLs and
/// dotted abbreviations ("e.g.") whole; splits punctuation from words.
class Tokenizer {
 public:
  Tokenizer();
  explicit Tokenizer(std::vector<std::string> emoticons);

  std::vector<Token> tokenize(std::string_view normalized) const;

 private:
  std::size_t match_emoticon(std::string_view text, std::size_t pos) const;

  std::vector<std::string> emoticons_;  // longest first
};

std::vector<Token> tokenize(std::string_view normalized);

/// Convenience: tokenize(normalize(raw)).
std::vector<Token> tokenize_raw(std::string_view raw);

/// True for tokens made only of '.', '!' and '?'.
bool is_terminal_punctuation(std::string_view surface);

/// True when the token contains at least one letter or digit (or any non-ASCII byte).
bool is_word(std::string_view surface);

class SentenceSplitter {
 public:
  SentenceSplitter();
  explicit SentenceSplitter(const std::vector<std::string>& abbreviations);

  std::vector<Sentence> split(std::span<const Token> tokens) const;

 private:
  std::unordered_set<std::string> abbreviations_;
};

std::vector<Sentence> split_sentences(std::span<const Token> tokens);

/// Original Porter (1980) stemmer. Input is expected lowercase.
std::string stem(std::string_view word);

}  // namespace storyframe::text
