#include "storyframe/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include <json.hpp>

#include "csv.hpp"
#include "storyframe/arc.hpp"
#include "storyframe/character.hpp"
#include "storyframe/classify.hpp"
#include "storyframe/error.hpp"
#include "storyframe/events.hpp"
#include "storyframe/feature_table.hpp"
#include "storyframe/ingest.hpp"
#include "storyframe/lexicon.hpp"
#include "storyframe/stats.hpp"
#include "storyframe/text.hpp"

namespace storyframe::pipeline {

namespace fs = std::filesystem;
using config::RunConfig;
using ojson = nlohmann::ordered_json;

std::string features_dir(const RunConfig& c) { return (fs::path(c.output_dir) / "features").string(); }
std::string analysis_dir(const RunConfig& c) { return (fs::path(c.output_dir) / "analysis").string(); }
std::string classify_dir(const RunConfig& c) { return (fs::path(c.output_dir) / "classify").string(); }
std::string report_path(const RunConfig& c) { return (fs::path(c.output_dir) / "report.json").string(); }

namespace {

std::string join_path(const std::string& dir, const std::string& file) { return (fs::path(dir) / file).string(); }

void require_file(const std::string& path, const std::string& what) {
  if (path.empty()) throw ConfigError(what + " path is not set");
  if (!fs::exists(path)) throw ConfigError(what + " not found: " + path);
}

void require_input(const std::string& path, const std::string& hint) {
  if (!fs::exists(path)) throw IoError("missing " + path + " (" + hint + ")");
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir + ": " + ec.message());
}

void write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << content;
  if (content.empty() || content.back() != '\n') out << '\n';
  if (!out) throw IoError("failed writing " + path);
}

ojson read_json(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  try {
    return ojson::parse(in);
  } catch (const ojson::exception& e) {
    throw ParseError(path, 0, e.what());
  }
}

ojson meta_object(const RunConfig& c) { return ojson::parse(config::meta_json(c)); }

void merge(StageResult& into, const StageResult& from) {
  into.outputs.insert(into.outputs.end(), from.outputs.begin(), from.outputs.end());
  into.warnings.insert(into.warnings.end(), from.warnings.begin(), from.warnings.end());
}

// ---- extraction ----

struct Resources {
  std::vector<std::pair<config::LexiconSpec, lexicon::Lexicon>> lexicons;
  std::optional<character::PowerAgencyLexicon> power_agency;
  std::optional<arc::ValenceLexicon> valence;
  std::vector<character::EntityClass> classes;
};

Resources load_resources(const RunConfig& c, bool with_lexicons) {
  Resources r;
  if (with_lexicons) {
    for (const auto& spec : c.lexicons) r.lexicons.emplace_back(spec, lexicon::load_lexicon(spec.path, spec.name));
  }
  if (!c.power_agency.empty()) r.power_agency = character::load_power_agency(c.power_agency);
  if (!c.valence.empty()) r.valence = arc::load_valence_lexicon(c.valence);
  r.classes = c.entity_classes.empty() ? character::default_entity_classes()
                                       : character::load_entity_classes(c.entity_classes);
  return r;
}

struct Doc {
  std::string id;
  int label = 0;
  std::string normalized;
  std::vector<text::Token> tokens;
  bool has_tuples = false;
  bool approximate = false;
  std::vector<text::Sentence> sentences;
  std::vector<character::SvoTuple> tuples;
};

std::string parse_base(const RunConfig& c) {
  if (!c.parses_dir.empty()) return c.parses_dir;
  if (!c.corpus.empty()) return fs::path(c.corpus).parent_path().string();
  return fs::path(c.filtered_corpus_path()).parent_path().string();
}

std::vector<Doc> load_docs(const RunConfig& c, const Resources& res, StageResult& result) {
  const std::string path = c.filtered_corpus_path();
  require_input(path, "run ingest first");
  const auto loaded = ingest::load_submissions(path);
  if (!loaded.rejects.empty()) {
    throw ParseError(path, loaded.rejects.front().line, loaded.rejects.front().reason);
  }
  const std::string base = parse_base(c);
  std::vector<Doc> docs;
  std::size_t unlabeled = 0;
  for (const auto& s : loaded.submissions) {
    const auto label = ingest::encode_label(s.raw_label);
    if (!label) {
      ++unlabeled;
      continue;
    }
    Doc d;
    d.id = s.id;
    d.label = ingest::to_int(*label);
    d.normalized = text::normalize(s.body);
    d.tokens = text::tokenize(d.normalized);
    if (s.parse_ref && !s.parse_ref->empty()) {
      fs::path p(*s.parse_ref);
      if (p.is_relative()) p = fs::path(base) / p;
      if (!fs::exists(p)) throw IoError("parse for '" + s.id + "' not found: " + p.string());
      const auto graphs = character::parse_conllu(p.string());
      d.tuples = character::extract_svo(graphs);
      d.sentences = arc::sentences_from_graphs(graphs);
      d.has_tuples = true;
    } else if (c.fallback_svo && res.power_agency) {
      d.sentences = text::split_sentences(d.tokens);
      d.tuples = character::fallback_svo(d.sentences, *res.power_agency, res.classes);
      d.has_tuples = true;
      d.approximate = true;
    }
    docs.push_back(std::move(d));
  }
  if (unlabeled > 0) {
    result.warnings.push_back(std::to_string(unlabeled) + " unlabeled submissions in the filtered corpus were ignored");
  }
  if (docs.empty()) throw Error("filtered corpus " + path + " has no labeled submissions");
  return docs;
}

struct Chains {
  std::optional<events::EventChain> nta;
  std::optional<events::EventChain> yta;
};

std::vector<std::string> verbs_of(const Doc& d) {
  std::vector<std::string> v;
  for (const auto& t : d.tuples) v.push_back(t.verb_lemma);
  return v;
}

Chains build_chains(const std::vector<Doc>& docs, int k, StageResult& result) {
  Chains out;
  for (int label : {0, 1}) {
    std::vector<std::vector<events::VerbOccurrence>> occ;
    for (const auto& d : docs) {
      if (!d.has_tuples || d.label != label) continue;
      std::vector<events::VerbOccurrence> v;
      for (const auto& t : d.tuples) v.push_back({t.verb_lemma, t.sentence_index});
      occ.push_back(std::move(v));
    }
    const auto bl = static_cast<ingest::BinaryLabel>(label);
    try {
      auto chain = events::build_chain(events::verb_depths(occ), bl, k);
      for (const auto& w : chain.warnings) result.warnings.push_back(std::string(ingest::to_string(bl)) + " chain: " + w);
      (label == 0 ? out.nta : out.yta) = std::move(chain);
    } catch (const Error& e) {
      result.warnings.push_back(std::string(ingest::to_string(bl)) + " chain not built: " + e.what());
    }
  }
  return out;
}

struct Family {
  std::string name;
  std::string set;       // story-level | character-level
  std::string analysis;  // theory | liwc | unigrams | "" (not correlated)
  FeatureTable table;
};

std::string family_file(const std::string& name) { return name + ".csv"; }

Family pronoun_family(const std::vector<Doc>& docs) {
  Family f{"pronouns", "story-level", "theory",
           FeatureTable({"pronoun_first_singular", "pronoun_first_plural", "pronoun_third_singular",
                         "pronoun_third_plural", "pronoun_ratio_1st_3rd"})};
  for (const auto& d : docs) {
    const auto pc = lexicon::pronoun_features(d.tokens);
    const double n = d.tokens.empty() ? 1.0 : static_cast<double>(d.tokens.size());
    f.table.add_row(d.id, {pc.first_sing / n, pc.first_plur / n, pc.third_sing / n, pc.third_plur / n, pc.ratio_1st_3rd});
  }
  return f;
}

Family lexicon_family(const std::vector<Doc>& docs, const config::LexiconSpec& spec, const lexicon::Lexicon& lex) {
  std::vector<std::string> names;
  for (const auto& cat : lex.categories()) names.push_back(spec.name + ":" + cat);
  Family f{"lexicon_" + spec.name, "story-level", spec.family, FeatureTable(names)};
  for (const auto& d : docs) {
    const auto s = lexicon::score(d.tokens, lex);
    std::vector<double> row;
    for (const auto& cat : lex.categories()) row.push_back(s.by_category.at(cat));
    f.table.add_row(d.id, std::move(row));
  }
  return f;
}

}  // namespace

void validate(const RunConfig& c, Stage stage) {
  config::validate_values(c);
  switch (stage) {
    case Stage::Ingest:
      require_file(c.corpus, "corpus");
      if (!c.bots.empty()) require_file(c.bots, "bot list");
      break;
    case Stage::Extract:
      for (const auto& l : c.lexicons) require_file(l.path, "lexicon '" + l.name + "'");
      [[fallthrough]];
    case Stage::ChainBuild:
      if (!c.entity_classes.empty()) require_file(c.entity_classes, "entity classes");
      if (!c.power_agency.empty()) require_file(c.power_agency, "power/agency lexicon");
      if (!c.valence.empty()) require_file(c.valence, "valence lexicon");
      if (!c.parses_dir.empty()) require_file(c.parses_dir, "parses directory");
      if (c.fallback_svo && c.power_agency.empty()) {
        throw ConfigError("fallback_svo needs a power/agency lexicon (paths.power_agency)");
      }
      break;
    case Stage::Analyze:
    case Stage::Classify:
    case Stage::Report:
      break;
  }
}

StageResult run_ingest(const RunConfig& c, bool dry_run) {
  validate(c, Stage::Ingest);
  StageResult result;
  const std::string out_path = c.filtered_corpus_path();
  const std::string stats_path = c.stats_path();
  result.outputs = {out_path, stats_path};
  if (dry_run) return result;

  const auto loaded = ingest::load_submissions(c.corpus);
  ingest::EligibilityCriteria criteria;
  criteria.min_words = c.min_words;
  criteria.min_comments = c.min_comments;
  if (!c.bots.empty()) criteria.bot_handles = ingest::load_bot_handles(c.bots);
  const auto eligible = ingest::filter_eligible(loaded.submissions, criteria);
  const auto labeled = ingest::keep_labeled(eligible);
  const auto st = ingest::compute_stats(loaded.submissions.size(), labeled);

  ensure_dir(fs::path(out_path).parent_path().string());
  ensure_dir(fs::path(stats_path).parent_path().string());
  ingest::save_submissions(out_path, labeled, config::meta_json(c));

  ojson j;
  j["meta"] = meta_object(c);
  j["n_total"] = st.n_total;
  j["n_eligible"] = st.n_eligible;
  j["n_nta"] = st.n_nta;
  j["n_yta"] = st.n_yta;
  j["class_balance"] = st.class_balance;
  j["n_filtered_out"] = loaded.submissions.size() - eligible.size();
  j["n_unlabeled"] = eligible.size() - labeled.size();
  j["rejects"] = ojson::array();
  for (const auto& r : loaded.rejects) j["rejects"].push_back({{"line", r.line}, {"reason", r.reason}});
  write_text(stats_path, j.dump(2));
  if (!loaded.rejects.empty()) {
    result.warnings.push_back(std::to_string(loaded.rejects.size()) + " corpus lines rejected; see " + stats_path);
  }
  if (labeled.empty()) result.warnings.push_back("no submission passed the filters");
  return result;
}

StageResult run_chain_build(const RunConfig& c, const std::string& out_dir, bool dry_run) {
  validate(c, Stage::ChainBuild);
  StageResult result;
  const std::string dir = out_dir.empty() ? features_dir(c) : out_dir;
  result.outputs = {join_path(dir, "chain_nta.json"), join_path(dir, "chain_yta.json")};
  if (dry_run) return result;
  const Resources res = load_resources(c, false);
  const auto docs = load_docs(c, res, result);
  if (std::none_of(docs.begin(), docs.end(), [](const Doc& d) { return d.has_tuples; })) {
    throw Error("no submission has a parse and fallback_svo is disabled; chains need verb tuples");
  }
  const Chains chains = build_chains(docs, c.k_chain, result);
  if (!chains.nta || !chains.yta) throw Error("event chains could not be built for both labels");
  ensure_dir(dir);
  events::save_chain(result.outputs[0], *chains.nta, config::meta_json(c));
  events::save_chain(result.outputs[1], *chains.yta, config::meta_json(c));
  return result;
}

std::string inspect_chain(const std::string& path) {
  const auto chain = events::load_chain(path);
  std::ostringstream out;
  out << "label: " << ingest::to_string(chain.label) << '\n';
  out << "clusters: " << chain.k << '\n';
  out << "breaks:";
  for (double b : chain.breaks) out << ' ' << format_double(b);
  out << '\n';
  std::vector<std::vector<std::string>> members(static_cast<std::size_t>(chain.k));
  for (const auto& [verb, id] : chain.cluster_of) members[static_cast<std::size_t>(id)].push_back(verb);
  for (std::size_t i = 0; i < members.size(); ++i) {
    out << "cluster " << i << " (" << members[i].size() << " verbs):";
    for (const auto& v : members[i]) out << ' ' << v;
    out << '\n';
  }
  for (const auto& w : chain.warnings) out << "warning: " << w << '\n';
  return out.str();
}

StageResult run_extract(const RunConfig& c, bool dry_run) {
  validate(c, Stage::Extract);
  StageResult result;
  const std::string dir = features_dir(c);
  if (dry_run) {
    require_input(c.filtered_corpus_path(), "run ingest first");
    result.outputs = {join_path(dir, "manifest.json"), join_path(dir, "labels.csv")};
    return result;
  }
  const Resources res = load_resources(c, true);
  const auto docs = load_docs(c, res, result);
  const auto comments = config::meta_comments(c);

  std::vector<Family> families;
  families.push_back(pronoun_family(docs));
  for (const auto& [spec, lex] : res.lexicons) families.push_back(lexicon_family(docs, spec, lex));

  std::vector<lexicon::TokenizedDoc> tdocs;
  for (const auto& d : docs) tdocs.push_back({d.id, d.tokens});
  auto uni = lexicon::unigram_matrix(tdocs, c.min_doc_fraction);
  families.push_back({"unigrams", "story-level", "unigrams", std::move(uni.table)});

  Family demo{"demographics", "character-level", "theory",
              FeatureTable({"narrator_age", "narrator_gender", "others_mean_age", "others_mean_gender"})};
  Family cov{"covariates", "character-level", "",
             FeatureTable({"narrator_age_undisclosed", "narrator_gender_undisclosed"})};
  for (const auto& d : docs) {
    const auto dm = character::extract_demographics(d.normalized);
    demo.table.add_row(d.id, {dm.narrator.age_value(), dm.narrator.gender_value(), dm.mean_other_age(),
                              dm.mean_other_gender()});
    cov.table.add_row(d.id, {1.0 - dm.narrator.age_disclosed(), 1.0 - dm.narrator.gender_disclosed()});
  }
  families.push_back(std::move(demo));
  families.push_back(std::move(cov));

  std::size_t no_parse = 0;
  std::size_t approximate = 0;
  for (const auto& d : docs) {
    no_parse += d.has_tuples ? 0 : 1;
    approximate += d.approximate ? 1 : 0;
  }
  const bool any_tuples = no_parse < docs.size();
  if (!any_tuples) {
    result.warnings.push_back(
        "no parses and fallback_svo disabled: power_agency, arc and chain families are absent");
  } else if (no_parse > 0) {
    result.warnings.push_back(std::to_string(no_parse) + " submissions have no parse and were left out of tuple-based families");
  }
  if (approximate > 0) {
    result.warnings.push_back(std::to_string(approximate) + " submissions use approximate (parse-free) verb tuples");
  }

  if (any_tuples && !res.power_agency) {
    result.warnings.push_back("no power/agency lexicon configured: power_agency family absent");
  } else if (any_tuples) {
    std::vector<std::string> names;
    for (const auto& cls : res.classes) {
      names.push_back(cls.name + "_power");
      names.push_back(cls.name + "_agency");
    }
    Family pa{"power_agency", "character-level", "theory", FeatureTable(names)};
    for (const auto& d : docs) {
      if (!d.has_tuples) continue;
      std::vector<double> row;
      for (const auto& cls : res.classes) {
        const auto s = character::power_agency(d.tuples, *res.power_agency, cls);
        row.push_back(s.power);
        row.push_back(s.agency);
      }
      pa.table.add_row(d.id, std::move(row));
    }
    families.push_back(std::move(pa));
  }

  std::size_t invalid_arcs = 0;
  if (any_tuples && !res.valence) {
    result.warnings.push_back("no valence lexicon configured: arc family absent");
  } else if (any_tuples) {
    const auto narrator = std::find_if(res.classes.begin(), res.classes.end(),
                                       [](const character::EntityClass& e) { return e.name == "narrator"; });
    if (narrator == res.classes.end()) throw ConfigError("entity classes define no 'narrator' class");
    arc::ArcOptions opts{c.arc_chunks, c.arc_min_sentence_words};
    std::vector<std::string> chunk_names;
    for (std::size_t i = 0; i < c.arc_chunks; ++i) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "arc_chunk_%02zu", i + 1);
      chunk_names.push_back(buf);
    }
    Family slope{"arc", "character-level", "theory", FeatureTable({"arc_slope"})};
    Family chunks{"arc_chunks", "character-level", "", FeatureTable(chunk_names)};
    for (const auto& d : docs) {
      if (!d.has_tuples) continue;
      const auto a = arc::story_arc(d.sentences, d.tuples, *res.valence, *narrator, opts);
      if (!a.valid) {
        ++invalid_arcs;
        continue;
      }
      slope.table.add_row(d.id, {a.slope});
      chunks.table.add_row(d.id, a.chunk_means);
    }
    if (invalid_arcs > 0) {
      result.warnings.push_back(std::to_string(invalid_arcs) + " submissions have fewer than " +
                                std::to_string(c.arc_chunks) + " usable narrator sentences; no arc");
    }
    families.push_back(std::move(slope));
    families.push_back(std::move(chunks));
  }

  std::size_t no_chain_signal = 0;
  std::optional<Chains> chains;
  if (any_tuples) {
    chains = build_chains(docs, c.k_chain, result);
    if (chains->nta && chains->yta) {
      Family ch{"chain", "character-level", "theory", FeatureTable({"chain_match_yta", "chain_distance_margin"})};
      for (const auto& d : docs) {
        if (!d.has_tuples) continue;
        const auto verbs = verbs_of(d);
        const auto pred = events::predict_by_chain(verbs, *chains->nta, *chains->yta);
        if (pred.no_signal) {
          ++no_chain_signal;
          continue;
        }
        ch.table.add_row(d.id, {pred.label == ingest::BinaryLabel::YTA ? 1.0 : 0.0,
                                static_cast<double>(pred.distance_nta - pred.distance_yta)});
      }
      families.push_back(std::move(ch));
    } else {
      result.warnings.push_back("chain family absent");
    }
  }

  ensure_dir(dir);
  FeatureTable labels({"label"});
  for (const auto& d : docs) labels.add_row(d.id, {static_cast<double>(d.label)});
  labels.write_csv(join_path(dir, "labels.csv"), comments);
  result.outputs.push_back(join_path(dir, "labels.csv"));

  ojson manifest;
  manifest["meta"] = meta_object(c);
  manifest["n_documents"] = docs.size();
  manifest["families"] = ojson::object();
  for (const auto& f : families) {
    if (f.table.num_rows() == 0 || f.table.num_features() == 0) {
      result.warnings.push_back("family '" + f.name + "' is empty and was not written");
      continue;
    }
    const std::string file = family_file(f.name);
    f.table.write_csv(join_path(dir, file), comments);
    result.outputs.push_back(join_path(dir, file));
    ojson e;
    e["file"] = file;
    e["feature_set"] = f.set;
    e["analysis_family"] = f.analysis.empty() ? ojson(nullptr) : ojson(f.analysis);
    e["n_rows"] = f.table.num_rows();
    e["n_features"] = f.table.num_features();
    e["features"] = f.table.feature_names();
    manifest["families"][f.name] = e;
  }
  if (chains && chains->nta && chains->yta) {
    events::save_chain(join_path(dir, "chain_nta.json"), *chains->nta, config::meta_json(c));
    events::save_chain(join_path(dir, "chain_yta.json"), *chains->yta, config::meta_json(c));
    result.outputs.push_back(join_path(dir, "chain_nta.json"));
    result.outputs.push_back(join_path(dir, "chain_yta.json"));
  }
  manifest["unigram_threshold"] = uni.threshold;
  manifest["exclusions"] = {{"no_parse", no_parse}, {"invalid_arc", invalid_arcs}, {"no_chain_signal", no_chain_signal}};
  manifest["approximate_svo"] = {{"enabled", c.fallback_svo}, {"n_documents", approximate}};
  manifest["warnings"] = result.warnings;
  write_text(join_path(dir, "manifest.json"), manifest.dump(2));
  result.outputs.push_back(join_path(dir, "manifest.json"));
  return result;
}

namespace {

struct FeatureStore {
  ojson manifest;
  std::map<std::string, FeatureTable> tables;  // by family name
  std::map<std::string, int> labels;
  std::vector<std::string> label_ids;  // labels.csv order
};

FeatureStore load_features(const RunConfig& c) {
  const std::string dir = features_dir(c);
  const std::string manifest_path = join_path(dir, "manifest.json");
  require_input(manifest_path, "run extract first");
  FeatureStore s;
  s.manifest = read_json(manifest_path);
  const auto labels = FeatureTable::read_csv(join_path(dir, "labels.csv"));
  for (std::size_t r = 0; r < labels.num_rows(); ++r) {
    const double v = labels.row(r)[0];
    if (v != 0.0 && v != 1.0) throw Error("labels.csv: label must be 0 or 1 for '" + labels.ids()[r] + "'");
    s.labels[labels.ids()[r]] = static_cast<int>(v);
    s.label_ids.push_back(labels.ids()[r]);
  }
  for (const auto& [name, entry] : s.manifest.at("families").items()) {
    s.tables.emplace(name, FeatureTable::read_csv(join_path(dir, entry.at("file").get<std::string>())));
  }
  return s;
}

std::vector<int> labels_for(const FeatureStore& s, const std::vector<std::string>& ids) {
  std::vector<int> y;
  y.reserve(ids.size());
  for (const auto& id : ids) {
    const auto it = s.labels.find(id);
    if (it == s.labels.end()) throw Error("no label for submission '" + id + "'");
    y.push_back(it->second);
  }
  return y;
}

bool both_classes(std::span<const int> y, std::size_t min_each) {
  std::size_t ones = 0;
  for (int v : y) ones += static_cast<std::size_t>(v);
  return ones >= min_each && y.size() - ones >= min_each;
}

stats::Covariates covariates_for(const FeatureStore& s, const std::vector<std::string>& ids) {
  stats::Covariates cov;
  const auto it = s.tables.find("covariates");
  if (it == s.tables.end()) return cov;
  cov.names = it->second.feature_names();
  cov.columns.assign(cov.names.size(), {});
  for (const auto& id : ids) {
    const auto row = it->second.row(id);
    for (std::size_t j = 0; j < row.size(); ++j) cov.columns[j].push_back(row[j]);
  }
  return cov;
}

std::set<std::string> adjusted_features(const FeatureStore& s) {
  std::set<std::string> out;
  const auto it = s.tables.find("demographics");
  if (it != s.tables.end()) out.insert(it->second.feature_names().begin(), it->second.feature_names().end());
  return out;
}

void apply_bh(std::vector<stats::CorrelationResult>& results, double alpha) {
  std::vector<double> p;
  for (const auto& r : results) p.push_back(r.p_value);
  const auto bh = stats::bh_correct(p, alpha);
  for (std::size_t i = 0; i < results.size(); ++i) {
    results[i].q_value = bh.q_values[i];
    results[i].q_significant = bh.reject[i];
  }
}

}  // namespace

StageResult run_analyze(const RunConfig& c, bool dry_run) {
  validate(c, Stage::Analyze);
  StageResult result;
  const std::string dir = analysis_dir(c);
  if (dry_run) {
    require_input(join_path(features_dir(c), "manifest.json"), "run extract first");
    result.outputs = {dir};
    return result;
  }
  const FeatureStore store = load_features(c);
  const auto comments = config::meta_comments(c);
  const auto adjusted = adjusted_features(store);
  ensure_dir(dir);

  // feature -> family table, for the interaction scan
  std::map<std::string, std::string> family_of;
  std::vector<stats::CorrelationResult> significant;
  std::vector<stats::CorrelationResult> unigram_results;

  for (const std::string group : {"theory", "liwc", "unigrams"}) {
    std::vector<stats::CorrelationResult> all;
    for (const auto& [name, entry] : store.manifest.at("families").items()) {
      const auto& af = entry.at("analysis_family");
      if (af.is_null() || af.get<std::string>() != group) continue;
      const FeatureTable& table = store.tables.at(name);
      const auto y = labels_for(store, table.ids());
      if (!both_classes(y, 2)) {
        result.warnings.push_back("family '" + name + "' needs two rows per label; not analysed");
        continue;
      }
      stats::CorrelationOptions opts;
      opts.alpha = c.alpha;
      stats::Covariates cov;
      if (name == "demographics") {
        cov = covariates_for(store, table.ids());
        opts.covariates = &cov;
        opts.adjusted_features = adjusted;
      }
      auto rep = stats::correlate_features(table, y, opts);
      for (const auto& f : rep.skipped) result.warnings.push_back("feature '" + f + "' has zero variance; skipped");
      for (auto& r : rep.results) {
        family_of[r.feature] = name;
        all.push_back(std::move(r));
      }
    }
    if (all.empty()) {
      result.warnings.push_back("analysis family '" + group + "' has no testable features; skipped");
      continue;
    }
    std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) { return a.feature < b.feature; });
    apply_bh(all, c.alpha);
    const std::string path = join_path(dir, "correlations_" + group + ".csv");
    stats::write_correlations_csv(path, all, comments);
    result.outputs.push_back(path);
    if (group == std::string("unigrams")) {
      unigram_results = all;
    } else {
      for (const auto& r : all) {
        if (r.q_significant) significant.push_back(r);
      }
    }
  }

  if (c.interactions) {
    std::vector<stats::InteractionResult> inter;
    std::sort(significant.begin(), significant.end(), [](const auto& a, const auto& b) { return a.feature < b.feature; });
    for (std::size_t a = 0; a < significant.size(); ++a) {
      for (std::size_t b = a + 1; b < significant.size(); ++b) {
        const std::string& f1 = significant[a].feature;
        const std::string& f2 = significant[b].feature;
        const FeatureTable& t1 = store.tables.at(family_of.at(f1));
        const FeatureTable& t2 = store.tables.at(family_of.at(f2));
        FeatureTable pair({f1, f2});
        const std::size_t j1 = *t1.feature_index(f1);
        const std::size_t j2 = *t2.feature_index(f2);
        for (const auto& id : t1.ids()) {
          if (t2.contains(id)) pair.add_row(id, {t1.row(id)[j1], t2.row(id)[j2]});
        }
        const auto y = labels_for(store, pair.ids());
        if (!both_classes(y, 2)) continue;
        stats::CorrelationOptions opts;
        opts.alpha = c.alpha;
        const stats::Covariates cov = covariates_for(store, pair.ids());
        opts.covariates = &cov;
        opts.adjusted_features = adjusted;
        try {
          auto r = stats::interaction_scan(pair, y, opts);
          inter.insert(inter.end(), r.begin(), r.end());
        } catch (const ZeroVarianceError& e) {
          result.warnings.push_back("interaction " + f1 + " x " + f2 + " skipped: " + e.what());
        }
      }
    }
    std::vector<double> p;
    for (const auto& r : inter) p.push_back(r.p_value);
    const auto bh = stats::bh_correct(p, c.alpha);
    for (std::size_t i = 0; i < inter.size(); ++i) {
      inter[i].q_value = bh.q_values[i];
      inter[i].q_significant = bh.reject[i];
    }
    const std::string path = join_path(dir, "interactions.csv");
    stats::write_interactions_csv(path, inter, comments);
    result.outputs.push_back(path);
  }

  if (const auto it = store.tables.find("arc_chunks"); it != store.tables.end()) {
    const FeatureTable& chunks = it->second;
    const FeatureTable* slopes = store.tables.contains("arc") ? &store.tables.at("arc") : nullptr;
    std::vector<arc::ArcProfile> yta;
    std::vector<arc::ArcProfile> nta;
    for (std::size_t r = 0; r < chunks.num_rows(); ++r) {
      const std::string& id = chunks.ids()[r];
      arc::ArcProfile a;
      a.valid = true;
      a.chunk_means.assign(chunks.row(r).begin(), chunks.row(r).end());
      a.slope = slopes != nullptr ? slopes->row(id)[0] : arc::ols_slope(a.chunk_means);
      (store.labels.at(id) == 1 ? yta : nta).push_back(std::move(a));
    }
    if (yta.size() >= 2 && nta.size() >= 2) {
      const std::string path = join_path(dir, "arcs.json");
      write_text(path, arc::arc_report_json(yta, nta, config::meta_json(c)));
      result.outputs.push_back(path);
    } else {
      result.warnings.push_back("arc comparison needs two valid arcs per label; arcs.json not written");
    }
  } else {
    result.warnings.push_back("no arc features; arcs.json not written");
  }

  if (const auto it = store.tables.find("unigrams"); it != store.tables.end() && !unigram_results.empty()) {
    const FeatureTable& uni = it->second;
    ojson j;
    j["meta"] = meta_object(c);
    j["unigrams"] = ojson::array();
    for (const auto& r : unigram_results) {
      const std::size_t col = *uni.feature_index(r.feature);
      std::size_t df = 0;
      for (std::size_t row = 0; row < uni.num_rows(); ++row) df += uni.row(row)[col] > 0.0 ? 1 : 0;
      j["unigrams"].push_back({{"unigram", r.feature},
                               {"cohens_d", r.cohens_d},
                               {"document_frequency", df},
                               {"q_significant", r.q_significant}});
    }
    const std::string path = join_path(dir, "wordcloud.json");
    write_text(path, j.dump(2));
    result.outputs.push_back(path);
  }
  return result;
}

StageResult run_classify(const RunConfig& c, bool dry_run) {
  validate(c, Stage::Classify);
  StageResult result;
  const std::string dir = classify_dir(c);
  for (const auto& set : c.feature_sets) result.outputs.push_back(join_path(dir, "report_" + set + ".json"));
  result.outputs.push_back(join_path(dir, "report_mfc.json"));
  if (dry_run) {
    require_input(join_path(features_dir(c), "manifest.json"), "run extract first");
    return result;
  }
  result.outputs.clear();
  const FeatureStore store = load_features(c);

  const auto y_all = labels_for(store, store.label_ids);
  if (!both_classes(y_all, 1)) throw Error("classification needs both labels in the corpus");
  const auto keep = classify::undersample(y_all, c.seed_undersample);
  std::vector<std::string> ids;
  std::vector<int> y;
  for (std::size_t i : keep) {
    ids.push_back(store.label_ids[i]);
    y.push_back(y_all[i]);
  }
  const auto plan = classify::stratified_folds(y, c.k_folds, c.seed_folds);

  classify::TrainOptions opts;
  opts.logistic.ridge = c.ridge;
  opts.logistic.require_more_rows = false;
  opts.ignore_constant_columns = true;  // rare unigrams can be constant inside one training fold

  ensure_dir(dir);
  auto write_report = [&](const classify::ClassifierReport& r, const std::vector<std::string>& features) {
    ojson j = ojson::parse(classify::report_to_json(r, config::meta_json(c)));
    j["n_samples"] = y.size();
    j["undersample_seed"] = c.seed_undersample;
    j["features"] = features;
    const std::string path = join_path(dir, "report_" + r.feature_set + ".json");
    write_text(path, j.dump(2));
    result.outputs.push_back(path);
  };

  for (const auto& set : c.feature_sets) {
    std::vector<FeatureTable> renamed;
    renamed.reserve(store.tables.size());  // keeps pointers into it stable
    std::vector<const FeatureTable*> tables;
    for (const auto& [name, entry] : store.manifest.at("families").items()) {
      if (set != "all" && entry.at("feature_set").get<std::string>() != set) continue;
      const FeatureTable& t = store.tables.at(name);
      if (name != "unigrams") {
        tables.push_back(&t);
        continue;
      }
      std::vector<std::string> names;
      for (const auto& f : t.feature_names()) names.push_back("unigram:" + f);
      FeatureTable u(names);
      for (std::size_t r = 0; r < t.num_rows(); ++r) u.add_row(t.ids()[r], {t.row(r).begin(), t.row(r).end()});
      renamed.push_back(std::move(u));
      tables.push_back(&renamed.back());
    }
    const auto joined = left_join(ids, tables);
    classify::Dataset data;
    std::vector<std::string> dropped;
    std::vector<std::size_t> cols;
    for (std::size_t j = 0; j < joined.feature_names.size(); ++j) {
      std::vector<double> present;
      for (const auto& row : joined.rows) {
        if (!std::isnan(row[j])) present.push_back(row[j]);
      }
      if (present.size() < 2 || stats::variance(present) <= 0.0) {
        dropped.push_back(joined.feature_names[j]);
      } else {
        cols.push_back(j);
      }
    }
    if (!dropped.empty()) {
      result.warnings.push_back(set + ": " + std::to_string(dropped.size()) +
                                " constant or missing features dropped (first: " + dropped.front() + ")");
    }
    if (cols.empty()) {
      result.warnings.push_back("feature set '" + set + "' has no usable features; no report");
      continue;
    }
    for (std::size_t j : cols) data.feature_names.push_back(joined.feature_names[j]);
    for (const auto& row : joined.rows) {
      std::vector<double> r;
      r.reserve(cols.size());
      for (std::size_t j : cols) r.push_back(row[j]);
      data.rows.push_back(std::move(r));
    }
    auto report = classify::train_eval(data, y, plan, opts);
    report.feature_set = set;
    write_report(report, data.feature_names);
  }
  write_report(classify::mfc_baseline(y), {});
  return result;
}

namespace {

ojson read_result_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  ojson rows = ojson::array();
  std::vector<std::string> header;
  std::vector<std::string> fields;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    if (!csv::split_line(line, fields)) throw ParseError(path, line_no, "unterminated quote");
    if (header.empty()) {
      header = fields;
      continue;
    }
    if (fields.size() != header.size()) throw ParseError(path, line_no, "wrong number of columns");
    ojson row;
    for (std::size_t i = 0; i < fields.size(); ++i) {
      const std::string& f = fields[i];
      if (f == "true" || f == "false") {
        row[header[i]] = f == "true";
        continue;
      }
      char* end = nullptr;
      const double v = std::strtod(f.c_str(), &end);
      if (!f.empty() && end == f.c_str() + f.size()) {
        row[header[i]] = v;
      } else {
        row[header[i]] = f;
      }
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

StageResult run_report(const RunConfig& c, bool dry_run) {
  validate(c, Stage::Report);
  StageResult result;
  const std::string path = report_path(c);
  result.outputs = {path};
  if (dry_run) return result;

  ojson j;
  j["meta"] = meta_object(c);
  j["config"] = ojson::parse(config::canonical_json(c));
  bool any = false;
  auto include_json = [&](const char* key, const std::string& file) {
    if (fs::exists(file)) {
      ojson v = read_json(file);
      if (v.is_object()) v.erase("meta");
      j[key] = std::move(v);
      any = true;
    } else {
      result.warnings.push_back(std::string(key) + ": " + file + " not found");
    }
  };
  include_json("ingest", c.stats_path());
  include_json("manifest", join_path(features_dir(c), "manifest.json"));

  j["correlations"] = ojson::object();
  for (const std::string group : {"theory", "liwc", "unigrams"}) {
    const std::string file = join_path(analysis_dir(c), "correlations_" + group + ".csv");
    if (fs::exists(file)) {
      j["correlations"][group] = read_result_csv(file);
      any = true;
    }
  }
  if (const std::string file = join_path(analysis_dir(c), "interactions.csv"); fs::exists(file)) {
    j["interactions"] = read_result_csv(file);
  }
  include_json("arcs", join_path(analysis_dir(c), "arcs.json"));

  j["classification"] = ojson::object();
  std::vector<std::string> sets = c.feature_sets;
  sets.push_back("mfc");
  for (const auto& set : sets) {
    const std::string file = join_path(classify_dir(c), "report_" + set + ".json");
    if (!fs::exists(file)) continue;
    ojson r = read_json(file);
    r.erase("meta");
    j["classification"][set] = std::move(r);
    any = true;
  }
  if (!any) throw IoError("nothing to report under " + c.output_dir + " (run the other stages first)");
  ensure_dir(c.output_dir);
  write_text(path, j.dump(2));
  return result;
}

StageResult run_all(const RunConfig& c) {
  StageResult all;
  merge(all, run_ingest(c));
  merge(all, run_extract(c));
  merge(all, run_analyze(c));
  merge(all, run_classify(c));
  merge(all, run_report(c));
  return all;
}

}  // namespace storyframe::pipeline
