#include <doctest.h>

#include <random>

#include "storyframe/character.hpp"
#include "storyframe/error.hpp"
#include "temp_files.hpp"

using namespace storyframe;
using namespace storyframe::character;

namespace {

const std::string kFixtures = STORYFRAME_FIXTURES;

const EntityClass& cls(const std::string& name) {
  for (const auto& c : default_entity_classes()) {
    if (c.name == name) return c;
  }
  throw std::runtime_error("no class " + name);
}

PowerAgencyLexicon fixture_lexicon() { return load_power_agency(kFixtures + "/power_agency.csv"); }

std::string conllu_row(int id, const std::string& form, const std::string& upos, int head, const std::string& rel) {
  return std::to_string(id) + "\t" + form + "\t" + form + "\t" + upos + "\t_\t_\t" + std::to_string(head) + "\t" + rel +
         "\t_\t_\n";
}

// Independent per-tuple tally of the power and agency rules.
PowerAgencyScore tally(const std::vector<SvoTuple>& tuples, const std::map<std::string, std::pair<int, int>>& frames,
                       const std::set<std::string>& keywords) {
  // frames: lemma -> (power: +1 agent, -1 theme, 0 other; agency: +1, -1, 0)
  int pn = 0, an = 0;
  double ps = 0, as = 0;
  for (const auto& t : tuples) {
    auto it = frames.find(t.verb_lemma);
    if (it == frames.end()) continue;
    const bool s = keywords.count(t.subject_text) > 0;
    const bool o = t.object_text && keywords.count(*t.object_text) > 0;
    const int power = it->second.first;
    const int agency = it->second.second;
    if (power != 0 && (s || o)) {
      ++pn;
      if (s) ps += power;
      if (o) ps -= power;
    }
    if (agency != 0 && s) {
      ++an;
      as += agency;
    }
  }
  PowerAgencyScore r;
  r.n_power_tuples = static_cast<std::size_t>(pn);
  r.n_agency_tuples = static_cast<std::size_t>(an);
  r.power = pn ? ps / pn : 0.0;
  r.agency = an ? as / an : 0.0;
  return r;
}

}  // namespace

TEST_CASE("extract_demographics on the example sentence") {
  const auto d = extract_demographics(text::normalize("my sister (66f), my two cousins (24F) and (18M), and me (51F)"));
  REQUIRE(d.narrator.age);
  CHECK(*d.narrator.age == 51.0);
  CHECK(*d.narrator.gender_code == 1.0);
  REQUIRE(d.others.size() == 3);
  CHECK(d.others[0].age_value() == 66);
  CHECK(d.others[1].age_value() == 24);
  CHECK(d.others[2].age_value() == 18);
  CHECK(d.others[0].gender_value() == 1);
  CHECK(d.others[1].gender_value() == 1);
  CHECK(d.others[2].gender_value() == -1);
  CHECK(d.mean_other_age() == 36.0);
  CHECK(d.mean_other_gender() == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("extract_demographics grammar") {
  auto d = extract_demographics("i (24m) did a thing");
  CHECK(d.narrator.age_value() == 24);
  CHECK(d.narrator.gender_value() == -1);
  CHECK(d.others.empty());

  d = extract_demographics("we went to the store");
  CHECK(d.narrator.age_disclosed() == 0);
  CHECK(d.narrator.gender_disclosed() == 0);
  CHECK(d.narrator.age_value() == 0);
  CHECK(d.mean_other_age() == 0);

  d = extract_demographics("so i, f24, told my boyfriend m 30 that");
  CHECK(d.narrator.age_value() == 24);
  CHECK(d.narrator.gender_value() == 1);
  REQUIRE(d.others.size() == 1);
  CHECK(d.others[0].age_value() == 30);

  d = extract_demographics("me (f 19) and my dad (52)");
  CHECK(d.narrator.age_value() == 19);
  REQUIRE(d.others.size() == 1);
  CHECK(d.others[0].age_value() == 52);
  CHECK(d.others[0].gender_disclosed() == 0);
  CHECK(d.mean_other_gender() == 0.0);

  d = extract_demographics("i'm 30 and it was 2019 (or 2020)");
  CHECK(d.narrator.age_disclosed() == 0);
  CHECK(d.others.empty());

  d = extract_demographics("i (30f) and later i (31f)");
  CHECK(d.narrator.age_value() == 30);
  CHECK(d.ignored_markers == 1);
}

TEST_CASE("extract_demographics marker bookkeeping") {
  const std::vector<std::pair<std::string, std::size_t>> fixtures = {{"my mom (50f) and i (20m)", 2},
                                                                     {"aunt (40f), uncle (41m)", 2},
                                                                     {"nothing here", 0},
                                                                     {"i (33) met him (34m)", 2},
                                                                     {"me 25f with f22 and m23", 3}};
  for (const auto& [f, markers] : fixtures) {
    const auto d = extract_demographics(f);
    const std::size_t narrator = (d.narrator.age_disclosed() + d.narrator.gender_disclosed()) > 0 ? 1 : 0;
    CHECK(d.others.size() + narrator == markers);
  }
}

TEST_CASE("parse_conllu reads sentences") {
  const auto graphs = parse_conllu(kFixtures + "/power_agency_examples.conllu");
  REQUIRE(graphs.size() == 3);
  CHECK(graphs[0].tokens.size() == 5);
  CHECK(graphs[0].text == "i asked her many times");
  CHECK(graphs[2].sentence_index == 2);

  const std::string three = conllu_row(1, "she", "PRON", 2, "nsubj") + conllu_row(2, "decided", "VERB", 0, "root") +
                            conllu_row(3, ".", "PUNCT", 2, "punct");
  CHECK(parse_conllu_text(three).size() == 1);
  CHECK(parse_conllu_text(three + "\n" + three).size() == 2);
  CHECK(parse_conllu_text("").empty());

  const std::string with_range = "1-2\tdon't\t_\t_\t_\t_\t_\t_\t_\t_\n" + conllu_row(1, "do", "AUX", 2, "aux") +
                                 conllu_row(2, "n't", "PART", 0, "root") + "1.1\tx\t_\t_\t_\t_\t_\t_\t_\t_\n";
  CHECK(parse_conllu_text(with_range)[0].tokens.size() == 2);
}

TEST_CASE("parse_conllu errors") {
  try {
    parse_conllu_text(conllu_row(1, "a", "X", 0, "root") + "2\tb\tb\tX\n", "f.conllu");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
  CHECK_THROWS_AS(parse_conllu_text(conllu_row(1, "a", "X", 1, "root")), ParseError);
  CHECK_THROWS_AS(parse_conllu_text(conllu_row(1, "a", "X", 0, "root") + conllu_row(2, "b", "X", 0, "root")),
                  ParseError);
  CHECK_THROWS_AS(parse_conllu_text(conllu_row(1, "a", "X", 0, "root") + conllu_row(2, "b", "X", 3, "dep") +
                                    conllu_row(3, "c", "X", 2, "dep")),
                  ParseError);
  CHECK_THROWS_AS(parse_conllu_text(conllu_row(1, "a", "X", 5, "root")), ParseError);
  CHECK_THROWS_AS(parse_conllu(kFixtures + "/missing.conllu"), IoError);
}

TEST_CASE("extract_svo") {
  const auto graphs = parse_conllu(kFixtures + "/power_agency_examples.conllu");
  const auto t0 = extract_svo(graphs[0]);
  REQUIRE(t0.size() == 1);
  CHECK(t0[0] == SvoTuple{0, "i", "ask", std::string("her")});
  const auto t1 = extract_svo(graphs[1]);
  REQUIRE(t1.size() == 1);  // "leave" has no subject of its own
  CHECK(t1[0] == SvoTuple{1, "i", "decid", std::nullopt});
  const auto t2 = extract_svo(graphs[2]);
  REQUIRE(t2.size() == 1);
  CHECK(t2[0] == SvoTuple{2, "friend", "need", std::string("money")});

  const auto she = parse_conllu_text(conllu_row(1, "She", "PRON", 2, "nsubj") + conllu_row(2, "decided", "VERB", 0, "root"));
  CHECK(extract_svo(she[0]) == std::vector<SvoTuple>{{0, "she", "decid", std::nullopt}});
  const auto noverb = parse_conllu_text(conllu_row(1, "wow", "INTJ", 0, "root"));
  CHECK(extract_svo(noverb[0]).empty());
  const auto passive = parse_conllu_text(conllu_row(1, "i", "PRON", 3, "nsubj:pass") + conllu_row(2, "was", "AUX", 3, "aux:pass") +
                                         conllu_row(3, "excluded", "VERB", 0, "root"));
  CHECK(extract_svo(passive[0]).at(0).subject_text == "i");
}

TEST_CASE("match_entity") {
  const auto& classes = default_entity_classes();
  CHECK(match_entity("her", classes) == std::optional<std::string>("females"));
  CHECK(match_entity("wife", classes) == std::optional<std::string>("romantic_females"));
  CHECK(match_entity("my ex-wife", classes) == std::optional<std::string>("romantic_females"));
  CHECK(match_entity("the door", classes) == std::nullopt);
  CHECK(match_entity("Me", classes) == std::optional<std::string>("narrator"));
  CHECK(match_entity("i\"m", classes) == std::optional<std::string>("narrator"));
  CHECK(match_entity("my best friend", classes) == std::optional<std::string>("friends"));
  CHECK(match_entity("", classes) == std::nullopt);
  REQUIRE(classes.size() == 7);
  CHECK(cls("narrator").keywords == std::set<std::string>{"i", "i'm", "i\"m", "mine", "myself", "me"});
  CHECK(cls("family").keywords.contains("subling"));
}

TEST_CASE("load_entity_classes orders by precedence") {
  testing::TempDir dir;
  const auto path = dir.write("classes.json", R"({"males":["He"],"pets":["dog"],"narrator":["i","me"]})");
  const auto c = load_entity_classes(path);
  REQUIRE(c.size() == 3);
  CHECK(c[0].name == "narrator");
  CHECK(c[1].name == "males");
  CHECK(c[1].keywords.contains("he"));
  CHECK(c[2].name == "pets");
  CHECK_THROWS_AS(load_entity_classes(dir.write("bad.json", "[1,2]")), ParseError);
}

TEST_CASE("power/agency lexicon loading") {
  const auto lex = fixture_lexicon();
  CHECK(lex.size() == 12);
  REQUIRE(lex.find("ask"));
  CHECK(lex.find("ask")->power == Power::Theme);
  CHECK(lex.find("decid")->agency == Agency::Positive);
  testing::TempDir dir;
  CHECK_THROWS_AS(load_power_agency(dir.write("a.csv", "verb,power\nask,theme\n")), ParseError);
  CHECK_THROWS_AS(load_power_agency(dir.write("b.csv", "verb,power,agency\nask,boss,positive\n")), ParseError);
  try {
    load_power_agency(dir.write("c.csv", "verb,power,agency\nasks,theme,positive\nasked,agent,positive\n"));
    FAIL("expected conflict");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
  }
  const auto sap = load_power_agency(dir.write("d.csv", "verb,power,agency\nabandons,power_agent,agency_pos\n"));
  CHECK(sap.find("abandon")->power == Power::Agent);
}

TEST_CASE("power_agency on the example sentences") {
  const auto lex = fixture_lexicon();
  const auto tuples = extract_svo(parse_conllu(kFixtures + "/power_agency_examples.conllu"));
  const std::vector<SvoTuple> asked = {tuples[0]}, decided = {tuples[1]}, needed = {tuples[2]};

  auto s = power_agency(asked, lex, cls("narrator"));
  CHECK(s.power == -1.0);
  CHECK(s.agency == 1.0);
  s = power_agency(asked, lex, cls("females"));
  CHECK(s.power == 1.0);
  CHECK(s.n_agency_tuples == 0);
  CHECK(s.agency == 0.0);

  s = power_agency(decided, lex, cls("narrator"));
  CHECK(s.power == 1.0);
  CHECK(s.agency == 1.0);

  s = power_agency(needed, lex, cls("friends"));
  CHECK(s.power == -1.0);
  CHECK(s.agency == -1.0);

  s = power_agency(tuples, lex, cls("narrator"));
  CHECK(s.n_power_tuples == 2);
  CHECK(s.power == 0.0);
  CHECK(s.agency == 1.0);

  s = power_agency(tuples, lex, cls("males"));
  CHECK(s.n_power_tuples == 0);
  CHECK(s.power == 0.0);

  const std::vector<SvoTuple> neutral = {{0, "i", "see", std::string("her")}, {0, "i", "sit", std::nullopt},
                                         {0, "i", "zzz", std::nullopt}};
  s = power_agency(neutral, lex, cls("narrator"));
  CHECK(s.n_power_tuples == 0);
  CHECK(s.n_agency_tuples == 0);
}

TEST_CASE("power_agency agrees with an exhaustive tally and is antisymmetric") {
  const auto lex = fixture_lexicon();
  const std::map<std::string, std::pair<int, int>> frames = {
      {"ask", {-1, 1}},   {"decid", {1, 1}},  {"need", {-1, -1}}, {"want", {1, -1}},
      {"abandon", {1, 1}}, {"dread", {-1, -1}}, {"exclud", {1, 1}}, {"help", {1, 1}},
      {"tell", {1, 1}},    {"hate", {-1, -1}},  {"see", {0, 0}},    {"sit", {0, 0}}};
  const std::vector<std::string> verbs = {"ask", "decid", "need", "want", "abandon", "dread", "exclud",
                                          "help", "tell", "hate", "see", "sit", "run"};
  const std::vector<std::string> people = {"i", "me", "her", "she", "him", "mom", "friend", "wife", "door"};
  std::mt19937 rng(31);
  for (int rep = 0; rep < 500; ++rep) {
    std::vector<SvoTuple> tuples(rng() % 11);
    for (auto& t : tuples) {
      t.subject_text = people[rng() % people.size()];
      t.verb_lemma = verbs[rng() % verbs.size()];
      if (rng() % 4 != 0) t.object_text = people[rng() % people.size()];
    }
    for (const auto& c : default_entity_classes()) {
      const auto got = power_agency(tuples, lex, c);
      const auto want = tally(tuples, frames, c.keywords);
      CHECK(got.power == want.power);
      CHECK(got.agency == want.agency);
      CHECK(got.n_power_tuples == want.n_power_tuples);
      CHECK(got.n_agency_tuples == want.n_agency_tuples);
      CHECK(std::abs(got.power) <= 1.0);
      CHECK(std::abs(got.agency) <= 1.0);
    }
  }
  // Target present in every tuple, both roles filled: swapping roles negates power.
  for (int rep = 0; rep < 200; ++rep) {
    std::vector<SvoTuple> tuples(1 + rng() % 10), swapped;
    for (auto& t : tuples) {
      t.subject_text = rng() % 2 ? "i" : people[2 + rng() % (people.size() - 2)];
      t.object_text = t.subject_text == "i" ? people[2 + rng() % (people.size() - 2)] : "me";
      t.verb_lemma = verbs[rng() % verbs.size()];
      swapped.push_back({t.sentence_index, *t.object_text, t.verb_lemma, t.subject_text});
    }
    const auto a = power_agency(tuples, lex, cls("narrator"));
    const auto b = power_agency(swapped, lex, cls("narrator"));
    CHECK(a.power == -b.power);
  }
}

TEST_CASE("fallback_svo heuristic") {
  const auto lex = fixture_lexicon();
  const auto tokens = text::tokenize(text::normalize("I asked her many times. My friend needed the money. I decided to leave."));
  const auto sents = text::split_sentences(tokens);
  const auto t = fallback_svo(sents, lex, default_entity_classes());
  REQUIRE(t.size() == 3);
  CHECK(t[0] == SvoTuple{0, "i", "ask", std::string("her")});
  CHECK(t[1] == SvoTuple{1, "friend", "need", std::nullopt});
  CHECK(t[2] == SvoTuple{2, "i", "decid", std::nullopt});
  CHECK(power_agency(t, lex, cls("narrator")).agency == 1.0);
}
