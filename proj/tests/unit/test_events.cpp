#include <doctest.h>

#include <algorithm>
#include <random>

#include "oracles.hpp"
#include "storyframe/error.hpp"
#include "storyframe/events.hpp"
#include "temp_files.hpp"

using namespace storyframe;
using namespace storyframe::events;
using ingest::BinaryLabel;

namespace {

VerbDepthTable table_of(const std::vector<std::pair<std::string, double>>& depths) {
  VerbDepthTable t;
  for (const auto& [v, d] : depths) t[v] = {d, 1, d};
  return t;
}

}  // namespace

TEST_CASE("verb_depths tallies") {
  const std::vector<std::vector<VerbOccurrence>> docs = {{{"ask", 2}, {"leav", 0}}, {{"ask", 4}}};
  const auto t = verb_depths(docs);
  REQUIRE(t.size() == 2);
  CHECK(t.at("ask").total_depth == 6.0);
  CHECK(t.at("ask").frequency == 2);
  CHECK(t.at("ask").normalized_depth == 3.0);
  CHECK(t.at("leav").normalized_depth == 0.0);
  CHECK(verb_depths(std::vector<std::vector<VerbOccurrence>>{}).empty());
}

TEST_CASE("jenks examples") {
  const std::vector<double> v = {1, 2, 3, 10, 11, 12};
  const auto r = jenks(v, 2);
  CHECK(r.class_sizes == std::vector<std::size_t>{3, 3});
  CHECK(r.breaks == std::vector<double>{3.0});
  CHECK(r.objective == doctest::Approx(4.0));
  CHECK(jenks_breaks(v, 1).empty());
  const auto all = jenks(v, 6);
  CHECK(all.objective == 0.0);
  CHECK(all.breaks == std::vector<double>{1, 2, 3, 10, 11});
  CHECK_THROWS_AS(jenks(v, 7), Error);
  CHECK_THROWS_AS(jenks(v, 0), Error);
  CHECK_THROWS_AS(jenks(std::vector<double>{2, 1}, 1), Error);
}

TEST_CASE("jenks matches exhaustive contiguous partition search") {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> len(1, 12);
  std::uniform_int_distribution<int> small(0, 6);
  std::normal_distribution<double> nd(0.0, 3.0);
  for (int rep = 0; rep < 400; ++rep) {
    const int n = len(rng);
    std::vector<double> v(static_cast<std::size_t>(n));
    // Half the cases draw from a small integer pool to exercise ties.
    for (auto& x : v) x = rep % 2 == 0 ? nd(rng) : static_cast<double>(small(rng));
    std::sort(v.begin(), v.end());
    for (int k = 1; k <= std::min(4, n); ++k) {
      const auto r = jenks(v, k);
      const double best = oracle::exhaustive_jenks_objective(v, k);
      CHECK(r.objective == doctest::Approx(best).epsilon(1e-9).scale(1.0));
      CHECK(oracle::partition_objective(v, r.class_sizes) == doctest::Approx(best).epsilon(1e-9).scale(1.0));
    }
  }
}

TEST_CASE("build_chain") {
  const auto chain = build_chain(
      table_of({{"a", 0.1}, {"b", 0.2}, {"c", 0.3}, {"d", 5.0}, {"e", 5.1}, {"f", 9.9}}), BinaryLabel::YTA, 3);
  CHECK(chain.k == 3);
  CHECK(chain.warnings.empty());
  CHECK(chain.cluster_of.at("a") == 0);
  CHECK(chain.cluster_of.at("b") == 0);
  CHECK(chain.cluster_of.at("c") == 0);
  CHECK(chain.cluster_of.at("d") == 1);
  CHECK(chain.cluster_of.at("e") == 1);
  CHECK(chain.cluster_of.at("f") == 2);
  CHECK(chain.breaks == std::vector<double>{0.3, 5.1});

  const auto one = build_chain(table_of({{"a", 4}, {"b", 1}}), BinaryLabel::NTA, 1);
  CHECK(one.k == 1);
  CHECK(one.cluster_of.at("a") == 0);
  CHECK(one.cluster_of.at("b") == 0);

  const auto flat = build_chain(table_of({{"a", 2}, {"b", 2}, {"c", 2}}), BinaryLabel::NTA, 2);
  CHECK(flat.k == 1);
  CHECK(flat.warnings.size() == 1);
  CHECK(flat.breaks.empty());

  CHECK_THROWS_AS(build_chain(table_of({{"a", 1}, {"b", 2}}), BinaryLabel::NTA, 3), Error);
}

TEST_CASE("build_chain is invariant to document order") {
  std::mt19937_64 rng(6);
  std::vector<std::vector<VerbOccurrence>> docs(40);
  const std::vector<std::string> verbs = {"ask", "tell", "leav", "say", "want", "get", "go", "think"};
  for (auto& d : docs) {
    for (int i = 0; i < 12; ++i) d.push_back({verbs[rng() % verbs.size()], static_cast<std::size_t>(rng() % 30)});
  }
  const auto a = build_chain(verb_depths(docs), BinaryLabel::NTA, 3);
  std::shuffle(docs.begin(), docs.end(), rng);
  const auto b = build_chain(verb_depths(docs), BinaryLabel::NTA, 3);
  CHECK(a.breaks == b.breaks);
  CHECK(a.cluster_of == b.cluster_of);
  int prev = 0;
  std::vector<std::pair<double, int>> by_depth;
  const auto t = verb_depths(docs);
  for (const auto& [v, d] : t) by_depth.push_back({d.normalized_depth, a.cluster_of.at(v)});
  std::sort(by_depth.begin(), by_depth.end());
  for (const auto& [d, c] : by_depth) {
    CHECK(c >= prev);
    prev = c;
  }
}

TEST_CASE("dl_distance examples") {
  CHECK(dl_distance("abc", "abc") == 0);
  CHECK(dl_distance("abc", "acb") == 1);
  CHECK(dl_distance("ab", "") == 2);
  CHECK(dl_distance("", "") == 0);
  CHECK(dl_distance("ca", "abc") == 2);  // restricted (OSA) variant gives 3
  CHECK(dl_distance("kitten", "sitting") == 3);
}

TEST_CASE("dl_distance equals minimal edit search on every pair up to length 6") {
  const oracle::EditGraph graph("abc", 7);
  std::vector<std::string> domain;
  for (std::size_t i = 0; i < graph.size(); ++i) {
    if (graph.string_at(i).size() <= 6) domain.push_back(graph.string_at(i));
  }
  REQUIRE(domain.size() == 1093);
  std::size_t mismatches = 0;
  for (const auto& a : domain) {
    const auto dist = graph.distances_from(a);
    for (const auto& b : domain) {
      if (dl_distance(a, b) != dist[graph.index_of(b)]) ++mismatches;
    }
  }
  CHECK(mismatches == 0);
  CHECK(oracle::brute_force_edit_distance("cab", "bca") == dl_distance("cab", "bca"));
}

TEST_CASE("dl_distance is a metric on random short sequences") {
  std::mt19937_64 rng(99);
  auto draw = [&] {
    std::vector<int> v(rng() % 9);
    for (auto& x : v) x = static_cast<int>(rng() % 4);
    return v;
  };
  for (int rep = 0; rep < 3000; ++rep) {
    const auto a = draw(), b = draw(), c = draw();
    CHECK(dl_distance(a, a) == 0);
    CHECK(dl_distance(a, b) == dl_distance(b, a));
    if (a != b) CHECK(dl_distance(a, b) > 0);
    CHECK(dl_distance(a, c) <= dl_distance(a, b) + dl_distance(b, c));
  }
}

TEST_CASE("predict_by_chain") {
  EventChain nta;
  nta.label = BinaryLabel::NTA;
  nta.k = 3;
  nta.breaks = {1, 2};
  nta.cluster_of = {{"ask", 0}, {"tell", 1}, {"leav", 2}};
  EventChain yta = nta;
  yta.label = BinaryLabel::YTA;
  yta.cluster_of = {{"ask", 2}, {"tell", 1}, {"leav", 0}};

  const std::vector<std::string> ordered = {"ask", "ask", "tell", "leav"};
  auto p = predict_by_chain(ordered, nta, yta);
  CHECK(p.label == BinaryLabel::NTA);
  CHECK(p.distance_nta == 0);
  CHECK(p.distance_yta > 0);
  CHECK(chain_sequence(ordered, nta) == std::vector<int>{0, 1, 2});

  const std::vector<std::string> reversed = {"leav", "tell", "ask"};
  p = predict_by_chain(reversed, nta, yta);
  CHECK(p.label == BinaryLabel::YTA);

  const std::vector<std::string> tie = {"tell"};
  p = predict_by_chain(tie, nta, yta);
  CHECK(p.distance_nta == p.distance_yta);
  CHECK(p.label == BinaryLabel::NTA);
  CHECK_FALSE(p.no_signal);

  const std::vector<std::string> unknown = {"zzz", "yyy"};
  p = predict_by_chain(unknown, nta, yta);
  CHECK(p.label == BinaryLabel::NTA);
  CHECK(p.no_signal);
}

TEST_CASE("chain JSON round trip") {
  const auto chain = build_chain(table_of({{"a", 0.1}, {"b", 0.2}, {"c", 3.0}, {"d", 7.5}}), BinaryLabel::YTA, 3);
  testing::TempDir dir;
  const auto path = dir.file("chain.json");
  save_chain(path, chain, R"({"config_hash":"x"})");
  const auto back = load_chain(path);
  CHECK(back.label == BinaryLabel::YTA);
  CHECK(back.k == chain.k);
  CHECK(back.breaks == chain.breaks);
  CHECK(back.cluster_of == chain.cluster_of);
  CHECK_THROWS_AS(chain_from_json(R"({"label":"YTA","k":2,"breaks":[],"clusters":{}})"), Error);
  CHECK_THROWS_AS(chain_from_json(R"({"label":"ESH","k":1,"breaks":[],"clusters":{}})"), Error);
  CHECK_THROWS_AS(chain_from_json("not json"), Error);
}
