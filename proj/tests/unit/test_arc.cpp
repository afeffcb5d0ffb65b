#include <doctest.h>

#include <cmath>
#include <random>

#include <json.hpp>

#include "storyframe/arc.hpp"
#include "storyframe/error.hpp"
#include "temp_files.hpp"

using namespace storyframe;
using namespace storyframe::arc;

namespace {

ValenceLexicon small_lexicon() {
  ValenceLexicon lex;
  lex.valence = {{"good", 1.9}, {"bad", -2.5}, {"happy", 2.7}, {"sad", -2.1}, {":)", 2.0}};
  lex.boosters = default_boosters();
  lex.negations = default_negations();
  return lex;
}

double score(const std::string& s, const ValenceLexicon& lex) { return sentence_sentiment(text::tokenize_raw(s), lex); }

const character::EntityClass& narrator() { return character::default_entity_classes().front(); }

// A story of n narrator sentences whose sentiment words are chosen by `word_for`.
struct Story {
  std::vector<text::Sentence> sentences;
  std::vector<character::SvoTuple> tuples;
};

template <class F>
Story make_story(std::size_t n, F word_for) {
  Story s;
  for (std::size_t i = 0; i < n; ++i) {
    text::Sentence sent;
    sent.index = i;
    sent.tokens = text::tokenize("i really told them it was " + word_for(i) + " today .");
    s.sentences.push_back(sent);
    s.tuples.push_back({i, "i", "tell", std::string("them")});
  }
  return s;
}

}  // namespace

TEST_CASE("sentence_sentiment examples") {
  const auto lex = small_lexicon();
  CHECK(score("nothing to see here", lex) == 0.0);
  CHECK(score("this movie is good", lex) == doctest::Approx(1.9 / std::sqrt(1.9 * 1.9 + 15)).epsilon(1e-12));
  CHECK(score("this movie is good", lex) == doctest::Approx(0.4404).epsilon(1e-4));
  CHECK(score("this movie is not good", lex) == doctest::Approx(-0.3412).epsilon(1e-4));
  CHECK(score("this movie isn't good", lex) == doctest::Approx(-0.3412).epsilon(1e-4));
  const double boosted = 1.9 + 0.293;
  CHECK(score("very good", lex) == doctest::Approx(boosted / std::sqrt(boosted * boosted + 15)).epsilon(1e-12));
  const double far = -2.5 - 0.293 * 0.9;
  CHECK(score("very much so-so bad", lex) == doctest::Approx(far / std::sqrt(far * far + 15)).epsilon(1e-12));
  CHECK(score("slightly good", lex) == doctest::Approx((1.9 - 0.293) / std::sqrt(std::pow(1.9 - 0.293, 2) + 15)));
  CHECK(score("good :)", lex) > score("good", lex));
}

TEST_CASE("sentence_sentiment properties") {
  const auto lex = small_lexicon();
  auto flipped = lex;
  for (auto& [w, v] : flipped.valence) v = -v;
  const std::vector<std::string> words = {"good", "bad", "happy", "sad", "very", "not", "the", "i", "slightly", ":)"};
  std::mt19937 rng(12);
  for (int rep = 0; rep < 500; ++rep) {
    std::string s;
    for (std::size_t i = 0; i < 1 + rng() % 20; ++i) s += words[rng() % words.size()] + " ";
    const double a = score(s, lex);
    CHECK(a > -1.0);
    CHECK(a < 1.0);
    CHECK(score(s, flipped) == doctest::Approx(-a).epsilon(1e-12));
  }
}

TEST_CASE("chunk sizes and slope") {
  CHECK(chunk_sizes(25, 10) == std::vector<std::size_t>{3, 3, 3, 3, 3, 2, 2, 2, 2, 2});
  CHECK(chunk_sizes(10, 10) == std::vector<std::size_t>(10, 1));
  for (std::size_t n = 10; n < 200; ++n) {
    const auto s = chunk_sizes(n, 10);
    std::size_t sum = 0;
    for (auto v : s) sum += v;
    CHECK(sum == n);
    CHECK(*std::max_element(s.begin(), s.end()) - *std::min_element(s.begin(), s.end()) <= 1);
  }
  std::vector<double> down;
  for (int i = 9; i >= 0; --i) down.push_back(0.1 * i);
  CHECK(std::abs(ols_slope(down) + 0.1) < 1e-9);
  std::vector<double> rev(down.rbegin(), down.rend());
  CHECK(ols_slope(rev) == doctest::Approx(-ols_slope(down)).epsilon(1e-12));
  CHECK(ols_slope(std::vector<double>(10, 0.0)) == 0.0);
}

TEST_CASE("story_arc filtering and chunking") {
  const auto lex = small_lexicon();
  auto story = make_story(25, [](std::size_t i) { return i < 12 ? std::string("good") : std::string("bad"); });
  // Short sentence and a sentence without the narrator are skipped.
  story.sentences.push_back({25, text::tokenize("i was good .")});
  story.tuples.push_back({25, "i", "be", std::nullopt});
  story.sentences.push_back({26, text::tokenize("she said the food was really very good")});
  story.tuples.push_back({26, "she", "say", std::nullopt});
  const auto arc = story_arc(story.sentences, story.tuples, lex, narrator());
  REQUIRE(arc.valid);
  CHECK(arc.n_sentences_used == 25);
  CHECK(arc.chunk_sizes == std::vector<std::size_t>{3, 3, 3, 3, 3, 2, 2, 2, 2, 2});
  CHECK(arc.chunk_means.size() == 10);
  CHECK(arc.slope < 0.0);

  const auto short_story = make_story(9, [](std::size_t) { return std::string("good"); });
  const auto invalid = story_arc(short_story.sentences, short_story.tuples, lex, narrator());
  CHECK_FALSE(invalid.valid);
  CHECK(invalid.n_sentences_used == 9);
  CHECK(invalid.chunk_means.empty());

  const auto neutral = make_story(30, [](std::size_t) { return std::string("fine"); });
  const auto flat = story_arc(neutral.sentences, neutral.tuples, lex, narrator());
  CHECK(flat.chunk_means == std::vector<double>(10, 0.0));
  CHECK(flat.slope == 0.0);
}

TEST_CASE("story_arc slope is exact on a noise-free linear sequence") {
  // One sentence per chunk; valences chosen so each compound score is exactly 0.9 - 0.1 i.
  ValenceLexicon lex;
  std::vector<double> target;
  for (int i = 0; i < 10; ++i) {
    const double c = 0.9 - 0.1 * i;
    target.push_back(c);
    lex.valence["w" + std::to_string(i)] = c == 0.0 ? 0.0 : c * std::sqrt(15.0 / (1.0 - c * c));
  }
  const auto story = make_story(10, [](std::size_t i) { return "w" + std::to_string(i); });
  const auto arc = story_arc(story.sentences, story.tuples, lex, narrator());
  REQUIRE(arc.valid);
  for (std::size_t i = 0; i < 10; ++i) CHECK(std::abs(arc.chunk_means[i] - target[i]) < 1e-12);
  CHECK(std::abs(arc.slope - (-0.1)) < 1e-9);
}

TEST_CASE("arc_class_comparison") {
  auto arc_of = [](std::vector<double> means) {
    ArcProfile a;
    a.valid = true;
    a.chunk_means = std::move(means);
    a.slope = ols_slope(a.chunk_means);
    return a;
  };
  std::vector<ArcProfile> a, b;
  std::mt19937 rng(1);
  std::normal_distribution<double> nd;
  for (int i = 0; i < 5; ++i) {
    std::vector<double> m(10);
    for (auto& v : m) v = nd(rng);
    a.push_back(arc_of(m));
  }
  for (const auto& c : arc_class_comparison(a, a)) {
    CHECK(c.t == 0.0);
    CHECK(c.p == 1.0);
  }

  const std::vector<ArcProfile> ones(3, arc_of(std::vector<double>(10, 1.0)));
  const std::vector<ArcProfile> zeros(3, arc_of(std::vector<double>(10, 0.0)));
  for (const auto& c : arc_class_comparison(ones, zeros)) {
    CHECK(c.zero_variance);
    CHECK(c.t == stats::kZeroVarianceT);
    CHECK(c.p < 1e-12);
  }

  const std::vector<ArcProfile> x = {arc_of(std::vector<double>(10, 0.1)), arc_of(std::vector<double>(10, 0.2)),
                                     arc_of(std::vector<double>(10, 0.3))};
  const std::vector<ArcProfile> y = {arc_of(std::vector<double>(10, 0.4)), arc_of(std::vector<double>(10, 0.5)),
                                     arc_of(std::vector<double>(10, 0.6))};
  for (const auto& c : arc_class_comparison(x, y)) CHECK(c.t == doctest::Approx(-3.674).epsilon(1e-3));

  CHECK_THROWS_AS(arc_class_comparison(std::vector<ArcProfile>{x[0]}, y), Error);
  ArcProfile bad;
  CHECK_THROWS_AS(arc_class_comparison(std::vector<ArcProfile>{x[0], bad}, y), Error);

  const auto js = nlohmann::json::parse(arc_report_json(x, y, R"({"config_hash":"h"})"));
  CHECK(js["YTA"].size() == 10);
  CHECK(js["t_per_chunk"].size() == 10);
  CHECK(js["meta"]["config_hash"] == "h");
}

TEST_CASE("valence lexicon files") {
  testing::TempDir dir;
  auto lex = load_valence_lexicon(dir.write("v.csv", "term,valence\ngood,1.9\nbad,-2.5\n"));
  CHECK(lex.valence.at("good") == 1.9);
  CHECK(lex.negations.contains("not"));
  lex = load_valence_lexicon(dir.write("vader.txt", "good\t1.9\t0.9\t[2, 2]\n:)\t2.0\t0.5\t[2]\n"));
  CHECK(lex.valence.at(":)") == 2.0);
  CHECK_THROWS_AS(load_valence_lexicon(dir.write("bad.csv", "term,valence\ngood,abc\n")), ParseError);
  CHECK_THROWS_AS(load_valence_lexicon(dir.write("dup.csv", "term,valence\ngood,1\ngood,2\n")), ParseError);
  const auto b = load_boosters(dir.write("b.txt", "very\nbarely -0.293\n"));
  CHECK(b.at("very") == 0.293);
  CHECK(b.at("barely") == -0.293);
}

TEST_CASE("sentences_from_graphs") {
  const auto graphs = character::parse_conllu(std::string(STORYFRAME_FIXTURES) + "/power_agency_examples.conllu");
  const auto s = sentences_from_graphs(graphs);
  REQUIRE(s.size() == 3);
  CHECK(s[0].tokens.size() == 5);
  CHECK(word_count(s[0].tokens) == 5);
  CHECK(s[2].index == 2);
}
