// storyframe: command-line driver for the narrative feature pipeline.
//
//   storyframe ingest  --input dump.jsonl --out filtered.jsonl
//   storyframe extract --config run.toml
//   storyframe analyze --config run.toml
//   storyframe classify --config run.toml --feature-set all
//   storyframe chain build|inspect ...
//   storyframe report  --config run.toml
//
// Exit codes: 0 success, 1 runtime error, 2 configuration error.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "storyframe/config.hpp"
#include "storyframe/error.hpp"
#include "storyframe/pipeline.hpp"
#include "storyframe/version.hpp"

namespace {

using storyframe::config::RunConfig;
namespace pipeline = storyframe::pipeline;

struct Overrides {
  std::string config_path;
  std::optional<std::string> corpus, parses, bots, entity_classes, power_agency, valence, output_dir;
  std::vector<std::string> lexicons;
  std::vector<std::string> liwc_lexicons;
  std::optional<std::size_t> min_words;
  std::optional<std::int64_t> min_comments;
  std::optional<double> min_doc_fraction, alpha, ridge;
  std::optional<std::size_t> arc_chunks, arc_min_words;
  std::optional<int> k_chain, k_folds;
  std::optional<std::uint64_t> seed_undersample, seed_folds;
  std::vector<std::string> feature_sets;
  bool fallback_svo = false;
  bool no_interactions = false;
  bool dry_run = false;

  CLI::Option* fallback_opt = nullptr;
};

storyframe::config::LexiconSpec parse_lexicon_arg(const std::string& arg, const std::string& family) {
  const auto eq = arg.find('=');
  if (eq == std::string::npos || eq == 0 || eq + 1 == arg.size()) {
    throw storyframe::ConfigError("lexicon argument '" + arg + "' must look like NAME=PATH");
  }
  return {arg.substr(0, eq), arg.substr(eq + 1), family};
}

RunConfig resolve(const Overrides& o) {
  RunConfig c = o.config_path.empty() ? RunConfig{} : storyframe::config::load_config(o.config_path);
  auto set = [](std::string& dst, const std::optional<std::string>& v) {
    if (v) dst = *v;
  };
  set(c.corpus, o.corpus);
  set(c.parses_dir, o.parses);
  set(c.bots, o.bots);
  set(c.entity_classes, o.entity_classes);
  set(c.power_agency, o.power_agency);
  set(c.valence, o.valence);
  set(c.output_dir, o.output_dir);
  if (!o.lexicons.empty() || !o.liwc_lexicons.empty()) {
    c.lexicons.clear();
    for (const auto& a : o.lexicons) c.lexicons.push_back(parse_lexicon_arg(a, "theory"));
    for (const auto& a : o.liwc_lexicons) c.lexicons.push_back(parse_lexicon_arg(a, "liwc"));
  }
  if (o.min_words) c.min_words = *o.min_words;
  if (o.min_comments) c.min_comments = *o.min_comments;
  if (o.min_doc_fraction) c.min_doc_fraction = *o.min_doc_fraction;
  if (o.alpha) c.alpha = *o.alpha;
  if (o.ridge) c.ridge = *o.ridge;
  if (o.arc_chunks) c.arc_chunks = *o.arc_chunks;
  if (o.arc_min_words) c.arc_min_sentence_words = *o.arc_min_words;
  if (o.k_chain) c.k_chain = *o.k_chain;
  if (o.k_folds) c.k_folds = *o.k_folds;
  if (o.seed_undersample) c.seed_undersample = *o.seed_undersample;
  if (o.seed_folds) c.seed_folds = *o.seed_folds;
  if (!o.feature_sets.empty()) c.feature_sets = o.feature_sets;
  if (o.fallback_opt != nullptr && o.fallback_opt->count() > 0) c.fallback_svo = o.fallback_svo;
  if (o.no_interactions) c.interactions = false;
  return c;
}

void add_common(CLI::App& app, Overrides& o) {
  app.add_option("--config", o.config_path, "TOML run configuration");
  app.add_option("--output-dir", o.output_dir, "Directory for all outputs");
  app.add_flag("--dry-run", o.dry_run, "Validate the configuration and list outputs without writing");
  app.add_option("--corpus", o.corpus, "Raw JSONL corpus");
  app.add_option("--parses", o.parses, "Base directory for relative parse_ref paths");
  app.add_option("--bots", o.bots, "Bot/moderator handle list, one per line");
  app.add_option("--entity-classes", o.entity_classes, "Entity keyword JSON");
  app.add_option("--power-agency", o.power_agency, "Power/agency verb lexicon CSV");
  app.add_option("--valence", o.valence, "Valence lexicon for sentence sentiment");
  app.add_option("--lexicon", o.lexicons, "Theory-driven lexicon NAME=PATH (repeatable)");
  app.add_option("--liwc-lexicon", o.liwc_lexicons, "Word-category lexicon NAME=PATH (repeatable)");
  app.add_option("--min-words", o.min_words, "Minimum body length in words");
  app.add_option("--min-comments", o.min_comments, "Minimum number of comments");
  app.add_option("--min-doc-fraction", o.min_doc_fraction, "Unigram document-frequency floor");
  app.add_option("--alpha", o.alpha, "FDR level");
  app.add_option("--ridge", o.ridge, "Classifier L2 penalty");
  app.add_option("--arc-chunks", o.arc_chunks, "Chunks per story arc");
  app.add_option("--arc-min-words", o.arc_min_words, "Minimum words for an arc sentence");
  app.add_option("--chain-k", o.k_chain, "Clusters per event chain");
  app.add_option("--k-folds", o.k_folds, "Cross-validation folds");
  app.add_option("--seed-undersample", o.seed_undersample, "Seed for undersampling");
  app.add_option("--seed-folds", o.seed_folds, "Seed for fold assignment");
  app.add_option("--feature-set", o.feature_sets, "story-level, character-level or all (repeatable)");
  o.fallback_opt = app.add_flag("--fallback-svo,!--no-fallback-svo", o.fallback_svo,
                                "Approximate verb tuples for submissions without a parse");
  app.add_flag("--no-interactions", o.no_interactions, "Skip the pairwise interaction scan");
}

void report(const pipeline::StageResult& r, bool dry_run) {
  for (const auto& w : r.warnings) std::cerr << "warning: " << w << '\n';
  for (const auto& p : r.outputs) std::cout << (dry_run ? "would write " : "wrote ") << p << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Narrative feature extraction, analysis and classification for verdict-labelled stories"};
  app.set_version_flag("--version", std::string("storyframe ") + storyframe::kVersion);
  app.require_subcommand(1);
  Overrides o;

  auto* ingest = app.add_subcommand("ingest", "Filter and label the raw corpus");
  add_common(*ingest, o);
  std::optional<std::string> ingest_out;
  ingest->add_option("--input", o.corpus, "Raw JSONL corpus (same as --corpus)");
  ingest->add_option("--out", ingest_out, "Filtered JSONL path (stats go next to it)");

  auto* extract = app.add_subcommand("extract", "Compute feature tables");
  add_common(*extract, o);
  auto* analyze = app.add_subcommand("analyze", "Correlations, interactions, arcs and word-cloud data");
  add_common(*analyze, o);
  auto* classify = app.add_subcommand("classify", "Cross-validated classifiers per feature set");
  add_common(*classify, o);
  auto* report_cmd = app.add_subcommand("report", "Bundle all outputs into report.json");
  add_common(*report_cmd, o);
  auto* run = app.add_subcommand("run", "ingest, extract, analyze, classify and report");
  add_common(*run, o);

  auto* chain = app.add_subcommand("chain", "Event chains");
  chain->require_subcommand(1);
  auto* chain_build = chain->add_subcommand("build", "Build the NTA and YTA chains");
  add_common(*chain_build, o);
  std::string chain_out;
  chain_build->add_option("--out", chain_out, "Output directory (default: features directory)");
  auto* chain_inspect = chain->add_subcommand("inspect", "Summarize a saved chain");
  std::string chain_file;
  chain_inspect->add_option("chain", chain_file, "Chain JSON file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (chain_inspect->parsed()) {
      std::cout << pipeline::inspect_chain(chain_file);
      return 0;
    }
    RunConfig c = resolve(o);
    if (ingest->parsed() && ingest_out) c.filtered_corpus = *ingest_out;
    if (o.dry_run) {
      std::cout << "config_hash " << storyframe::config::config_hash(c) << '\n';
      std::cout << storyframe::config::canonical_json(c) << '\n';
    }
    pipeline::StageResult r;
    if (ingest->parsed()) {
      r = pipeline::run_ingest(c, o.dry_run);
    } else if (extract->parsed()) {
      r = pipeline::run_extract(c, o.dry_run);
    } else if (analyze->parsed()) {
      r = pipeline::run_analyze(c, o.dry_run);
    } else if (classify->parsed()) {
      r = pipeline::run_classify(c, o.dry_run);
    } else if (report_cmd->parsed()) {
      r = pipeline::run_report(c, o.dry_run);
    } else if (chain_build->parsed()) {
      r = pipeline::run_chain_build(c, chain_out, o.dry_run);
    } else if (run->parsed()) {
      if (o.dry_run) {
        for (auto stage : {pipeline::Stage::Ingest, pipeline::Stage::Extract}) pipeline::validate(c, stage);
        std::cout << "configuration is valid\n";
        return 0;
      }
      r = pipeline::run_all(c);
    }
    report(r, o.dry_run);
    return 0;
  } catch (const storyframe::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
