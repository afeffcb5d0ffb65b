#pragma once

#include <string>
#include <vector>

#include "storyframe/config.hpp"

namespace storyframe::pipeline {

enum class Stage { Ingest, Extract, Analyze, Classify, ChainBuild, Report };

struct StageResult {
  std::vector<std::string> outputs;   // files written (or that would be written on a dry run)
  std::vector<std::string> warnings;
};

/// Value checks plus existence of every input path the stage reads from the
/// config. Throws ConfigError naming the offending path.
void validate(const config::RunConfig& c, Stage stage);

std::string features_dir(const config::RunConfig& c);
std::string analysis_dir(const config::RunConfig& c);
std::string classify_dir(const config::RunConfig& c);
std::string report_path(const config::RunConfig& c);

/// Filters and labels the raw corpus; writes the filtered JSONL and a stats JSON.
StageResult run_ingest(const config::RunConfig& c, bool dry_run = false);

/// Writes one CSV per feature family, labels.csv, both event chains and manifest.json.
StageResult run_extract(const config::RunConfig& c, bool dry_run = false);

/// Per-family correlations (BH within family), interactions among significant
/// features, the arc comparison and word-cloud data.
StageResult run_analyze(const config::RunConfig& c, bool dry_run = false);

/// Cross-validated classifier reports per feature set plus the MFC baseline.
StageResult run_classify(const config::RunConfig& c, bool dry_run = false);

/// Builds the NTA and YTA event chains from the filtered corpus into `out_dir`
/// (defaults to the features directory).
StageResult run_chain_build(const config::RunConfig& c, const std::string& out_dir = {}, bool dry_run = false);

/// Human-readable summary of a saved chain.
std::string inspect_chain(const std::string& path);

/// Bundles the stage outputs into a single report.json.
StageResult run_report(const config::RunConfig& c, bool dry_run = false);

/// ingest, extract, analyze, classify and report in order.
StageResult run_all(const config::RunConfig& c);

}  // namespace storyframe::pipeline
