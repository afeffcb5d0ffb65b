#include "storyframe/events.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "storyframe/error.hpp"

namespace storyframe::events {

VerbDepthTable verb_depths(std::span<const std::vector<VerbOccurrence>> documents) {
  VerbDepthTable table;
  for (const auto& doc : documents) {
    for (const auto& v : doc) {
      auto& d = table[v.lemma];
      d.total_depth += static_cast<double>(v.sentence);
      ++d.frequency;
    }
  }
  for (auto& [verb, d] : table) d.normalized_depth = d.total_depth / static_cast<double>(d.frequency);
  return table;
}

JenksResult jenks(std::span<const double> values, int k) {
  const std::size_t n = values.size();
  if (k < 1) throw Error("jenks: k must be at least 1");
  if (static_cast<std::size_t>(k) > n) throw Error("jenks: k exceeds the number of values");
  if (!std::is_sorted(values.begin(), values.end())) throw Error("jenks: values must be sorted");
  const auto kk = static_cast<std::size_t>(k);

  // Mean-shifted prefix sums keep the SSD formula well conditioned.
  double shift = 0.0;
  for (double v : values) shift += v;
  shift /= static_cast<double>(n);
  std::vector<double> s1(n + 1, 0.0), s2(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = values[i] - shift;
    s1[i + 1] = s1[i] + x;
    s2[i + 1] = s2[i] + x * x;
  }
  auto ssd = [&](std::size_t lo, std::size_t hi) {  // [lo, hi)
    const double m = static_cast<double>(hi - lo);
    const double s = s1[hi] - s1[lo];
    return std::max(0.0, (s2[hi] - s2[lo]) - s * s / m);
  };

  std::size_t distinct = n == 0 ? 0 : 1;
  for (std::size_t i = 1; i < n; ++i) distinct += values[i] != values[i - 1] ? 1 : 0;
  const bool respect_ties = distinct >= kk;
  auto can_cut = [&](std::size_t at) { return !respect_ties || values[at - 1] != values[at]; };

  constexpr double inf = std::numeric_limits<double>::infinity();
  // cost[c][j]: best objective for the first j values in c + 1 classes.
  std::vector<std::vector<double>> cost(kk, std::vector<double>(n + 1, inf));
  std::vector<std::vector<std::size_t>> cut(kk, std::vector<std::size_t>(n + 1, 0));
  for (std::size_t j = 1; j <= n; ++j) cost[0][j] = ssd(0, j);
  for (std::size_t c = 1; c < kk; ++c) {
    for (std::size_t j = c + 1; j <= n; ++j) {
      for (std::size_t i = c; i < j; ++i) {
        if (cost[c - 1][i] == inf || !can_cut(i)) continue;
        const double v = cost[c - 1][i] + ssd(i, j);
        if (v < cost[c][j]) {
          cost[c][j] = v;
          cut[c][j] = i;
        }
      }
    }
  }
  if (cost[kk - 1][n] == inf) throw Error("jenks: no admissible partition");

  JenksResult out;
  out.objective = cost[kk - 1][n];
  std::vector<std::size_t> ends;
  std::size_t j = n;
  for (std::size_t c = kk - 1; c > 0; --c) {
    const std::size_t i = cut[c][j];
    ends.push_back(j);
    j = i;
  }
  ends.push_back(j);
  std::reverse(ends.begin(), ends.end());
  std::size_t start = 0;
  for (std::size_t c = 0; c < kk; ++c) {
    out.class_sizes.push_back(ends[c] - start);
    if (c + 1 < kk) out.breaks.push_back(values[ends[c] - 1]);
    start = ends[c];
  }
  return out;
}

std::vector<double> jenks_breaks(std::span<const double> values, int k) { return jenks(values, k).breaks; }

int EventChain::cluster(double depth) const {
  return static_cast<int>(std::lower_bound(breaks.begin(), breaks.end(), depth) - breaks.begin());
}

EventChain build_chain(const VerbDepthTable& depths, ingest::BinaryLabel label, int k) {
  if (k < 1) throw Error("build_chain: k must be at least 1");
  if (depths.size() < static_cast<std::size_t>(k)) {
    throw Error("build_chain: " + std::to_string(depths.size()) + " distinct verbs, need at least " +
                std::to_string(k));
  }
  std::vector<double> values;
  values.reserve(depths.size());
  for (const auto& [verb, d] : depths) values.push_back(d.normalized_depth);
  std::sort(values.begin(), values.end());
  const auto distinct = static_cast<int>(std::unique(values.begin(), values.end()) - values.begin());
  values.resize(static_cast<std::size_t>(distinct));

  EventChain chain;
  chain.label = label;
  chain.k = std::min(k, distinct);
  if (chain.k < k) {
    chain.warnings.push_back("only " + std::to_string(distinct) + " distinct verb depths; chain has " +
                             std::to_string(chain.k) + " cluster(s) instead of " + std::to_string(k));
  }
  // Clustering the distinct depths keeps equal depths together.
  chain.breaks = jenks_breaks(values, chain.k);
  for (const auto& [verb, d] : depths) chain.cluster_of[verb] = chain.cluster(d.normalized_depth);
  return chain;
}

int dl_distance(std::span<const int> a, std::span<const int> b) {
  // Lowrance-Wagner: unrestricted edits with the last-occurrence table.
  const std::size_t n = a.size();
  const std::size_t m = b.size();
  const std::size_t max_dist = n + m;
  std::vector<std::vector<std::size_t>> d(n + 2, std::vector<std::size_t>(m + 2, 0));
  d[0][0] = max_dist;
  for (std::size_t i = 0; i <= n; ++i) {
    d[i + 1][0] = max_dist;
    d[i + 1][1] = i;
  }
  for (std::size_t j = 0; j <= m; ++j) {
    d[0][j + 1] = max_dist;
    d[1][j + 1] = j;
  }
  std::unordered_map<int, std::size_t> last_row;
  for (std::size_t i = 1; i <= n; ++i) {
    std::size_t last_col = 0;
    for (std::size_t j = 1; j <= m; ++j) {
      const auto it = last_row.find(b[j - 1]);
      const std::size_t i1 = it == last_row.end() ? 0 : it->second;
      const std::size_t j1 = last_col;
      std::size_t cost = 1;
      if (a[i - 1] == b[j - 1]) {
        cost = 0;
        last_col = j;
      }
      d[i + 1][j + 1] = std::min({d[i][j] + cost, d[i + 1][j] + 1, d[i][j + 1] + 1,
                                  d[i1][j1] + (i - i1 - 1) + 1 + (j - j1 - 1)});
    }
    last_row[a[i - 1]] = i;
  }
  return static_cast<int>(d[n + 1][m + 1]);
}

int dl_distance(std::string_view a, std::string_view b) {
  std::vector<int> x(a.begin(), a.end());
  std::vector<int> y(b.begin(), b.end());
  return dl_distance(x, y);
}

std::vector<int> chain_sequence(std::span<const std::string> verbs, const EventChain& chain) {
  std::vector<int> seq;
  for (const auto& v : verbs) {
    const auto it = chain.cluster_of.find(v);
    if (it == chain.cluster_of.end()) continue;
    if (seq.empty() || seq.back() != it->second) seq.push_back(it->second);
  }
  return seq;
}

ChainPrediction predict_by_chain(std::span<const std::string> verbs, const EventChain& chain_nta,
                                 const EventChain& chain_yta) {
  auto canonical = [](const EventChain& c) {
    std::vector<int> v(static_cast<std::size_t>(c.k));
    for (int i = 0; i < c.k; ++i) v[static_cast<std::size_t>(i)] = i;
    return v;
  };
  const auto seq_nta = chain_sequence(verbs, chain_nta);
  const auto seq_yta = chain_sequence(verbs, chain_yta);
  ChainPrediction p;
  p.distance_nta = dl_distance(seq_nta, canonical(chain_nta));
  p.distance_yta = dl_distance(seq_yta, canonical(chain_yta));
  if (seq_nta.empty() && seq_yta.empty()) {
    p.no_signal = true;
    return p;
  }
  p.label = p.distance_yta < p.distance_nta ? ingest::BinaryLabel::YTA : ingest::BinaryLabel::NTA;
  return p;
}

std::string chain_to_json(const EventChain& chain, const std::string& meta_json) {
  nlohmann::ordered_json j;
  if (!meta_json.empty()) j["meta"] = nlohmann::ordered_json::parse(meta_json);
  j["label"] = std::string(ingest::to_string(chain.label));
  j["k"] = chain.k;
  j["breaks"] = chain.breaks;
  j["clusters"] = nlohmann::ordered_json::object();
  for (const auto& [verb, id] : chain.cluster_of) j["clusters"][verb] = id;
  if (!chain.warnings.empty()) j["warnings"] = chain.warnings;
  return j.dump(2);
}

EventChain chain_from_json(std::string_view json_text) {
  EventChain c;
  try {
    const auto j = nlohmann::json::parse(json_text);
    const auto label = ingest::encode_label(j.at("label").get<std::string>());
    if (!label) throw Error("chain label must be YTA or NTA");
    c.label = *label;
    c.k = j.at("k").get<int>();
    c.breaks = j.at("breaks").get<std::vector<double>>();
    for (const auto& [verb, id] : j.at("clusters").items()) c.cluster_of[verb] = id.get<int>();
    if (j.contains("warnings")) c.warnings = j["warnings"].get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("invalid chain JSON: ") + e.what());
  }
  if (c.k < 1 || c.breaks.size() != static_cast<std::size_t>(c.k - 1)) throw Error("chain has inconsistent k and breaks");
  for (std::size_t i = 1; i < c.breaks.size(); ++i) {
    if (!(c.breaks[i - 1] < c.breaks[i])) throw Error("chain breaks must be strictly increasing");
  }
  for (const auto& [verb, id] : c.cluster_of) {
    if (id < 0 || id >= c.k) throw Error("cluster id out of range for verb '" + verb + "'");
  }
  return c;
}

void save_chain(const std::string& path, const EventChain& chain, const std::string& meta_json) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << chain_to_json(chain, meta_json) << '\n';
  if (!out) throw IoError("failed writing " + path);
}

EventChain load_chain(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return chain_from_json(ss.str());
}

}  // namespace storyframe::events
