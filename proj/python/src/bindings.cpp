#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "storyframe/arc.hpp"
#include "storyframe/character.hpp"
#include "storyframe/classify.hpp"
#include "storyframe/config.hpp"
#include "storyframe/error.hpp"
#include "storyframe/events.hpp"
#include "storyframe/ingest.hpp"
#include "storyframe/pipeline.hpp"
#include "storyframe/stats.hpp"
#include "storyframe/text.hpp"
#include "storyframe/version.hpp"

namespace py = pybind11;
using namespace storyframe;

namespace {

py::dict profile_dict(const character::CharacterProfile& p) {
  py::dict d;
  d["age"] = p.age ? py::cast(*p.age) : py::none();
  d["gender"] = p.gender_code ? py::cast(*p.gender_code) : py::none();
  return d;
}

config::RunConfig config_from(const std::string& path, const std::string& output_dir) {
  auto c = config::load_config(path);
  if (!output_dir.empty()) c.output_dir = output_dir;
  return c;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "storyframe core bindings";
  m.attr("__version__") = kVersion;

  static py::exception<Error> error(m, "Error");
  static py::exception<ConfigError> config_error(m, "ConfigError", error.ptr());
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ConfigError& e) {
      config_error(e.what());
    } catch (const Error& e) {
      error(e.what());
    }
  });

  m.def("normalize", &text::normalize, py::arg("text"));
  m.def(
      "tokenize",
      [](const std::string& raw) {
        std::vector<std::string> out;
        for (const auto& t : text::tokenize_raw(raw)) out.push_back(t.surface);
        return out;
      },
      py::arg("text"), "Normalizes then tokenizes; returns token surfaces.");
  m.def("count_words", &ingest::count_words, py::arg("body"));
  m.def(
      "class_balance",
      [](std::size_t n_nta, std::size_t n_yta) {
        return ingest::CorpusStats::from_counts(n_nta + n_yta, n_nta, n_yta).class_balance;
      },
      py::arg("n_nta"), py::arg("n_yta"));

  m.def("cohens_d", [](const std::vector<double>& yta, const std::vector<double>& nta) { return stats::cohens_d(yta, nta); },
        py::arg("yta"), py::arg("nta"));
  m.def(
      "bh_correct",
      [](const std::vector<double>& p, double alpha) {
        const auto r = stats::bh_correct(p, alpha);
        return py::make_tuple(r.reject, r.q_values);
      },
      py::arg("p_values"), py::arg("alpha") = 0.05, "Returns (reject, q_values) in input order.");
  m.def(
      "welch_t",
      [](const std::vector<double>& a, const std::vector<double>& b) {
        const auto r = stats::welch_t(a, b);
        return py::make_tuple(r.t, r.p, r.df);
      },
      py::arg("a"), py::arg("b"), "Returns (t, p, df).");

  m.def("dl_distance", py::overload_cast<std::string_view, std::string_view>(&events::dl_distance), py::arg("a"),
        py::arg("b"));
  m.def("jenks_breaks", [](std::vector<double> v, int k) { return events::jenks_breaks(v, k); }, py::arg("values"),
        py::arg("k"));
  m.def("ols_slope", [](const std::vector<double>& v) { return arc::ols_slope(v); }, py::arg("values"));

  m.def(
      "extract_demographics",
      [](const std::string& raw) {
        const auto d = character::extract_demographics(text::normalize(raw));
        py::list others;
        for (const auto& o : d.others) others.append(profile_dict(o));
        py::dict out;
        out["narrator"] = profile_dict(d.narrator);
        out["others"] = others;
        out["mean_other_age"] = d.mean_other_age();
        out["mean_other_gender"] = d.mean_other_gender();
        return out;
      },
      py::arg("text"));

  m.def("undersample", [](const std::vector<int>& y, std::uint64_t seed) { return classify::undersample(y, seed); },
        py::arg("labels"), py::arg("seed"));
  m.def("stratified_folds",
        [](const std::vector<int>& y, int k, std::uint64_t seed) { return classify::stratified_folds(y, k, seed).assignments; },
        py::arg("labels"), py::arg("k"), py::arg("seed"), "Fold id per sample.");

  m.def(
      "load_config", [](const std::string& path) { return config::canonical_json(config::load_config(path)); },
      py::arg("path"), "Canonical JSON of the resolved configuration.");
  m.def(
      "config_hash", [](const std::string& path) { return config::config_hash(config::load_config(path)); },
      py::arg("path"));
  m.def(
      "run",
      [](const std::string& stage, const std::string& config_path, const std::string& output_dir, bool dry_run) {
        const auto c = config_from(config_path, output_dir);
        pipeline::StageResult r;
        {
          py::gil_scoped_release release;
          if (stage == "ingest") r = pipeline::run_ingest(c, dry_run);
          else if (stage == "extract") r = pipeline::run_extract(c, dry_run);
          else if (stage == "analyze") r = pipeline::run_analyze(c, dry_run);
          else if (stage == "classify") r = pipeline::run_classify(c, dry_run);
          else if (stage == "report") r = pipeline::run_report(c, dry_run);
          else if (stage == "all" && dry_run) throw ConfigError("stage 'all' has no dry run");
          else if (stage == "all") r = pipeline::run_all(c);
          else throw ConfigError("unknown stage '" + stage + "'");
        }
        py::dict out;
        out["outputs"] = r.outputs;
        out["warnings"] = r.warnings;
        return out;
      },
      py::arg("stage"), py::arg("config"), py::arg("output_dir") = "", py::arg("dry_run") = false,
      "Runs one pipeline stage ('ingest', 'extract', 'analyze', 'classify', 'report' or 'all').");
}
