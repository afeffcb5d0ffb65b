#include <doctest.h>

#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "storyframe/text.hpp"

using namespace storyframe::text;

namespace {

std::vector<std::string> surfaces(const std::vector<Token>& tokens) {
  std::vector<std::string> out;
  for (const auto& t : tokens) out.push_back(t.surface);
  return out;
}

std::vector<std::string> surfaces_of(std::string_view raw) { return surfaces(tokenize(normalize(raw))); }

}  // namespace

TEST_CASE("normalize collapses whitespace and lowercases") {
  CHECK(normalize("Hello   WORLD ") == "hello world");
  CHECK(normalize("") == "");
  CHECK(normalize("A\tB\nC") == "a b c");
  CHECK(normalize("  \n\t ") == "");
  CHECK(normalize("CAF\xC3\x89") == "caf\xC3\xA9");  // É -> é
}

TEST_CASE("normalize drops invalid utf-8") {
  CHECK(normalize("ab\xFF\xFE" "cd") == "abcd");
  CHECK(normalize("x\xC3(y") == "x(y");                // truncated two-byte sequence
  CHECK(normalize("\xE2\x80\x99ok") == "\xE2\x80\x99ok");  // valid curly quote survives
  CHECK(normalize("\xED\xA0\x80z") == "z");            // encoded surrogate is invalid
}

TEST_CASE("normalize is idempotent") {
  std::mt19937 rng(7);
  const std::string pool = "aB c\t\nD.!?(\"')\xC3\x89\xFF";
  for (int trial = 0; trial < 500; ++trial) {
    std::string s;
    const int len = static_cast<int>(rng() % 40);
    for (int i = 0; i < len; ++i) s.push_back(pool[rng() % pool.size()]);
    const std::string once = normalize(s);
    CHECK(normalize(once) == once);
  }
}

TEST_CASE("tokenize keeps contractions and emoticons") {
  CHECK(surfaces_of("i'm :) happy!") == std::vector<std::string>{"i'm", ":)", "happy", "!"});
  CHECK(surfaces_of("my sister (66f)") == std::vector<std::string>{"my", "sister", "(", "66f", ")"});
  CHECK(tokenize("").empty());
}

TEST_CASE("tokenize social media idioms") {
  CHECK(surfaces_of("e.g. we left.") == std::vector<std::string>{"e.g.", "we", "left", "."});
  CHECK(surfaces_of("my ex-gf said i\"m rude") ==
        std::vector<std::string>{"my", "ex-gf", "said", "i\"m", "rude"});
  CHECK(surfaces_of("he said \"no\" twice...") ==
        std::vector<std::string>{"he", "said", "\"", "no", "\"", "twice", "..."});
  CHECK(surfaces_of("wait?! really") == std::vector<std::string>{"wait", "?!", "really"});
  CHECK(surfaces_of("see https://example.com/x. ok") ==
        std::vector<std::string>{"see", "https://example.com/x", ".", "ok"});
  CHECK(surfaces_of("it cost 1,000.50 dollars") ==
        std::vector<std::string>{"it", "cost", "1,000.50", "dollars"});
  CHECK(surfaces_of("love you <3") == std::vector<std::string>{"love", "you", "<3"});
  CHECK(surfaces_of("x <30 y") == std::vector<std::string>{"x", "<", "30", "y"});
  CHECK(surfaces_of("lol :D") == std::vector<std::string>{"lol", ":d"});
  CHECK(surfaces_of("#aita @mods") == std::vector<std::string>{"#aita", "@mods"});
  CHECK(surfaces_of("dad\xE2\x80\x99s car") == std::vector<std::string>{"dad\xE2\x80\x99s", "car"});
}

TEST_CASE("token spans are increasing and point into the text") {
  const std::string text = normalize("Okay (so) my BIL, 30M, said: \"no\"... :( bye!");
  const auto tokens = tokenize(text);
  REQUIRE(!tokens.empty());
  std::size_t prev_end = 0;
  for (const auto& t : tokens) {
    CHECK(!t.surface.empty());
    CHECK(t.start >= prev_end);
    CHECK(t.end > t.start);
    CHECK(text.substr(t.start, t.end - t.start) == t.surface);
    prev_end = t.end;
  }
}

TEST_CASE("tokenize then join is a fixed point on alphanumeric text") {
  std::mt19937 rng(11);
  const std::string letters = "abcdefghijklmnopqrstuvwxyz0123456789";
  for (int trial = 0; trial < 300; ++trial) {
    std::string s;
    const int words = 1 + static_cast<int>(rng() % 12);
    for (int w = 0; w < words; ++w) {
      if (w > 0) s += std::string(1 + rng() % 3, ' ');
      const int len = 1 + static_cast<int>(rng() % 8);
      for (int i = 0; i < len; ++i) s.push_back(letters[rng() % letters.size()]);
    }
    const std::string norm = normalize(s);
    std::string joined;
    for (const auto& t : tokenize(norm)) {
      if (!joined.empty()) joined += ' ';
      joined += t.surface;
    }
    CHECK(normalize(joined) == norm);
  }
}

TEST_CASE("custom emoticon table") {
  const Tokenizer tok({"(^o^)"});
  CHECK(surfaces(tok.tokenize("yay (^o^) ok")) == std::vector<std::string>{"yay", "(^o^)", "ok"});
  CHECK(surfaces(tok.tokenize("ok :)")) == std::vector<std::string>{"ok", ":", ")"});
}

TEST_CASE("split_sentences") {
  auto count = [](std::string_view raw) { return split_sentences(tokenize(normalize(raw))).size(); };
  CHECK(count("he left. she cried!") == 2);
  CHECK(count("no punctuation here") == 1);
  CHECK(count("e.g. we left.") == 1);
  CHECK(count("mr. smith came. he sat.") == 2);
  CHECK(count("") == 0);
  CHECK(count("what?! no way (seriously.) fine") == 3);

  const auto sents = split_sentences(tokenize(normalize("a b. c d e! f")));
  REQUIRE(sents.size() == 3);
  CHECK(sents[0].index == 0);
  CHECK(sents[2].index == 2);
  CHECK(sents[1].tokens.size() == 4);
}

TEST_CASE("split_sentences preserves token order and count") {
  std::mt19937 rng(3);
  const std::vector<std::string> vocab = {"i", "we", "left", ".", "!", "?", "mr", "e.g.", "(", ")", "ok"};
  for (int trial = 0; trial < 200; ++trial) {
    std::string s;
    const int n = static_cast<int>(rng() % 30);
    for (int i = 0; i < n; ++i) s += vocab[rng() % vocab.size()] + " ";
    const auto tokens = tokenize(normalize(s));
    const auto sents = split_sentences(tokens);
    std::vector<Token> flat;
    for (const auto& sent : sents) flat.insert(flat.end(), sent.tokens.begin(), sent.tokens.end());
    CHECK(flat == tokens);
  }
}

TEST_CASE("custom abbreviation list") {
  const SentenceSplitter splitter({"approx."});
  CHECK(splitter.split(tokenize("it was approx. ten. ok")).size() == 2);
  CHECK(SentenceSplitter(std::vector<std::string>{}).split(tokenize("mr. x")).size() == 2);
}

TEST_CASE("porter stemmer basics") {
  CHECK(stem("decided") == "decid");
  CHECK(stem("running") == "run");
  CHECK(stem("go") == "go");
  CHECK(stem("asked") == "ask");
  CHECK(stem("needed") == "need");
  CHECK(stem("") == "");
}

TEST_CASE("porter stemmer matches the reference vocabulary") {
  std::ifstream in(std::string(STORYFRAME_FIXTURES) + "/porter_pairs.tsv");
  REQUIRE(in);
  std::string line;
  int pairs = 0;
  while (std::getline(in, line)) {
    const auto tab = line.find('\t');
    REQUIRE(tab != std::string::npos);
    const std::string word = line.substr(0, tab);
    const std::string expected = line.substr(tab + 1);
    INFO(word);
    CHECK(stem(word) == expected);
    ++pairs;
  }
  CHECK(pairs >= 100);
}
