#include "storyframe/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <set>

#include <json.hpp>
#include "third_party/toml.hpp"

#include "storyframe/error.hpp"
#include "storyframe/version.hpp"

namespace storyframe::config {

namespace fs = std::filesystem;

std::string RunConfig::filtered_corpus_path() const {
  if (!filtered_corpus.empty()) return filtered_corpus;
  return (fs::path(output_dir) / "ingest" / "corpus.jsonl").string();
}

std::string RunConfig::stats_path() const {
  fs::path p(filtered_corpus_path());
  return (p.parent_path() / (p.stem().string() + ".stats.json")).string();
}

const std::vector<std::string>& known_feature_sets() {
  static const std::vector<std::string> v = {"story-level", "character-level", "all"};
  return v;
}

namespace {

class Reader {
 public:
  Reader(const toml::table& root, fs::path base) : root_(root), base_(std::move(base)) {}

  void allow(const char* name) { known_sections_.insert(name); }

  const toml::table* section(const char* name) {
    known_sections_.insert(name);
    const toml::node* n = root_.get(name);
    if (!n) return nullptr;
    if (!n->is_table()) throw ConfigError(std::string("[") + name + "] must be a table");
    return n->as_table();
  }

  void check_unknown_sections() const {
    for (auto&& [k, v] : root_) {
      if (!known_sections_.contains(std::string(k.str()))) {
        throw ConfigError("unknown config section '" + std::string(k.str()) + "'");
      }
    }
  }

  std::string resolve(const std::string& p) const {
    if (p.empty()) return p;
    const fs::path path(p);
    return path.is_absolute() ? p : (base_ / path).lexically_normal().string();
  }

 private:
  const toml::table& root_;
  fs::path base_;
  std::set<std::string> known_sections_;
};

void check_keys(const toml::table& t, const char* section, std::initializer_list<const char*> keys) {
  for (auto&& [k, v] : t) {
    bool ok = false;
    for (const char* key : keys) ok = ok || k.str() == key;
    if (!ok) throw ConfigError("unknown key '" + std::string(k.str()) + "' in [" + section + "]");
  }
}

std::string where(const char* section, const char* key) { return std::string(section) + "." + key; }

void read(const toml::table& t, const char* section, const char* key, std::string& out) {
  const toml::node* n = t.get(key);
  if (!n) return;
  auto v = n->value<std::string>();
  if (!v || !n->is_string()) throw ConfigError(where(section, key) + " must be a string");
  out = *v;
}

void read(const toml::table& t, const char* section, const char* key, bool& out) {
  const toml::node* n = t.get(key);
  if (!n) return;
  if (!n->is_boolean()) throw ConfigError(where(section, key) + " must be a boolean");
  out = *n->value<bool>();
}

void read(const toml::table& t, const char* section, const char* key, double& out) {
  const toml::node* n = t.get(key);
  if (!n) return;
  if (!n->is_number()) throw ConfigError(where(section, key) + " must be a number");
  out = *n->value<double>();
}

template <typename Int>
void read_int(const toml::table& t, const char* section, const char* key, Int& out) {
  const toml::node* n = t.get(key);
  if (!n) return;
  if (!n->is_integer()) throw ConfigError(where(section, key) + " must be an integer");
  const std::int64_t v = *n->value<std::int64_t>();
  if (v < 0) throw ConfigError(where(section, key) + " must be non-negative");
  out = static_cast<Int>(v);
}

}  // namespace

RunConfig load_config(const std::string& path) {
  if (!fs::exists(path)) throw ConfigError("config file not found: " + path);
  toml::table root;
  try {
    root = toml::parse_file(path);
  } catch (const toml::parse_error& e) {
    const auto& b = e.source().begin;
    throw ConfigError(path + ":" + std::to_string(b.line) + ": " + std::string(e.description()));
  }
  RunConfig c;
  Reader r(root, fs::absolute(path).parent_path());

  if (const auto* t = r.section("paths")) {
    check_keys(*t, "paths",
               {"corpus", "filtered_corpus", "parses", "bots", "entity_classes", "power_agency", "valence", "output"});
    read(*t, "paths", "corpus", c.corpus);
    read(*t, "paths", "filtered_corpus", c.filtered_corpus);
    read(*t, "paths", "parses", c.parses_dir);
    read(*t, "paths", "bots", c.bots);
    read(*t, "paths", "entity_classes", c.entity_classes);
    read(*t, "paths", "power_agency", c.power_agency);
    read(*t, "paths", "valence", c.valence);
    read(*t, "paths", "output", c.output_dir);
    for (std::string* p : {&c.corpus, &c.filtered_corpus, &c.parses_dir, &c.bots, &c.entity_classes,
                           &c.power_agency, &c.valence, &c.output_dir}) {
      *p = r.resolve(*p);
    }
  }
  if (const toml::node* n = root.get("lexicons")) {
    const toml::array* arr = n->as_array();
    if (!arr) throw ConfigError("lexicons must be an array of tables");
    for (const auto& item : *arr) {
      const toml::table* t = item.as_table();
      if (!t) throw ConfigError("lexicons must be an array of tables");
      check_keys(*t, "lexicons", {"name", "path", "family"});
      LexiconSpec spec;
      read(*t, "lexicons", "name", spec.name);
      read(*t, "lexicons", "path", spec.path);
      read(*t, "lexicons", "family", spec.family);
      spec.path = r.resolve(spec.path);
      c.lexicons.push_back(std::move(spec));
    }
  }
  r.allow("lexicons");
  if (const auto* t = r.section("ingest")) {
    check_keys(*t, "ingest", {"min_words", "min_comments"});
    read_int(*t, "ingest", "min_words", c.min_words);
    read_int(*t, "ingest", "min_comments", c.min_comments);
  }
  if (const auto* t = r.section("features")) {
    check_keys(*t, "features", {"min_doc_fraction", "fallback_svo", "arc_chunks", "arc_min_sentence_words", "k_chain"});
    read(*t, "features", "min_doc_fraction", c.min_doc_fraction);
    read(*t, "features", "fallback_svo", c.fallback_svo);
    read_int(*t, "features", "arc_chunks", c.arc_chunks);
    read_int(*t, "features", "arc_min_sentence_words", c.arc_min_sentence_words);
    read_int(*t, "features", "k_chain", c.k_chain);
  }
  if (const auto* t = r.section("analysis")) {
    check_keys(*t, "analysis", {"alpha", "interactions"});
    read(*t, "analysis", "alpha", c.alpha);
    read(*t, "analysis", "interactions", c.interactions);
  }
  if (const auto* t = r.section("classify")) {
    check_keys(*t, "classify", {"k_folds", "ridge", "feature_sets"});
    read_int(*t, "classify", "k_folds", c.k_folds);
    read(*t, "classify", "ridge", c.ridge);
    if (const toml::node* n = t->get("feature_sets")) {
      const toml::array* arr = n->as_array();
      if (!arr) throw ConfigError("classify.feature_sets must be an array of strings");
      c.feature_sets.clear();
      for (const auto& item : *arr) {
        auto s = item.value<std::string>();
        if (!s || !item.is_string()) throw ConfigError("classify.feature_sets must be an array of strings");
        c.feature_sets.push_back(*s);
      }
    }
  }
  if (const auto* t = r.section("seeds")) {
    check_keys(*t, "seeds", {"undersample", "folds"});
    read_int(*t, "seeds", "undersample", c.seed_undersample);
    read_int(*t, "seeds", "folds", c.seed_folds);
  }
  r.check_unknown_sections();
  return c;
}

void validate_values(const RunConfig& c) {
  if (!(c.alpha > 0.0 && c.alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
  if (!(c.min_doc_fraction > 0.0 && c.min_doc_fraction <= 1.0)) {
    throw ConfigError("min_doc_fraction must lie in (0, 1]");
  }
  if (c.min_comments < 0) throw ConfigError("min_comments must be non-negative");
  if (c.k_folds < 2) throw ConfigError("k_folds must be at least 2");
  if (c.k_chain < 1) throw ConfigError("k_chain must be at least 1");
  if (c.arc_chunks < 2) throw ConfigError("arc_chunks must be at least 2");
  if (!(c.ridge >= 0.0) || !std::isfinite(c.ridge)) throw ConfigError("ridge must be a finite non-negative number");
  if (c.output_dir.empty()) throw ConfigError("output directory is empty");
  if (c.feature_sets.empty()) throw ConfigError("no feature sets selected");
  std::set<std::string> seen;
  for (const auto& s : c.feature_sets) {
    const auto& known = known_feature_sets();
    if (std::find(known.begin(), known.end(), s) == known.end()) {
      throw ConfigError("unknown feature set '" + s + "' (expected story-level, character-level or all)");
    }
    if (!seen.insert(s).second) throw ConfigError("feature set '" + s + "' listed twice");
  }
  std::set<std::string> names;
  for (const auto& l : c.lexicons) {
    if (l.name.empty()) throw ConfigError("lexicon entry without a name");
    if (l.path.empty()) throw ConfigError("lexicon '" + l.name + "' has no path");
    if (l.family != "theory" && l.family != "liwc") {
      throw ConfigError("lexicon '" + l.name + "': family must be 'theory' or 'liwc'");
    }
    for (char ch : l.name) {
      if (!(std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '-')) {
        throw ConfigError("lexicon name '" + l.name + "' may only contain letters, digits, '_' and '-'");
      }
    }
    if (!names.insert(l.name).second) throw ConfigError("lexicon name '" + l.name + "' used twice");
  }
}

std::string canonical_json(const RunConfig& c) {
  nlohmann::ordered_json j;
  j["corpus"] = c.corpus;
  j["parses"] = c.parses_dir;
  j["bots"] = c.bots;
  j["entity_classes"] = c.entity_classes;
  j["power_agency"] = c.power_agency;
  j["valence"] = c.valence;
  auto lex = nlohmann::ordered_json::array();
  for (const auto& l : c.lexicons) lex.push_back({{"name", l.name}, {"path", l.path}, {"family", l.family}});
  j["lexicons"] = lex;
  j["min_words"] = c.min_words;
  j["min_comments"] = c.min_comments;
  j["min_doc_fraction"] = c.min_doc_fraction;
  j["alpha"] = c.alpha;
  j["fallback_svo"] = c.fallback_svo;
  j["arc_chunks"] = c.arc_chunks;
  j["arc_min_sentence_words"] = c.arc_min_sentence_words;
  j["k_chain"] = c.k_chain;
  j["interactions"] = c.interactions;
  j["k_folds"] = c.k_folds;
  j["ridge"] = c.ridge;
  j["feature_sets"] = c.feature_sets;
  j["seeds"] = {{"undersample", c.seed_undersample}, {"folds", c.seed_folds}};
  return j.dump();
}

std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : data) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

std::string config_hash(const RunConfig& c) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(canonical_json(c))));
  return buf;
}

std::string meta_json(const RunConfig& c) {
  nlohmann::ordered_json j;
  j["config_hash"] = config_hash(c);
  j["seeds"] = {{"undersample", c.seed_undersample}, {"folds", c.seed_folds}};
  j["tool"] = std::string("storyframe ") + kVersion;
  return j.dump();
}

std::vector<std::string> meta_comments(const RunConfig& c) {
  return {"config_hash=" + config_hash(c),
          "seeds=undersample:" + std::to_string(c.seed_undersample) + ",folds:" + std::to_string(c.seed_folds),
          std::string("tool=storyframe ") + kVersion};
}

}  // namespace storyframe::config
