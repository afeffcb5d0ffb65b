#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "storyframe/text.hpp"

namespace storyframe::character {

// ---- demographics ----

struct CharacterProfile {
  std::optional<double> age;
  std::optional<double> gender_code;  // female +1, male -1

  int age_disclosed() const { return age ? 1 : 0; }
  int gender_disclosed() const { return gender_code ? 1 : 0; }
  double age_value() const { return age.value_or(0.0); }
  double gender_value() const { return gender_code.value_or(0.0); }
};

struct Demographics {
  CharacterProfile narrator;
  std::vector<CharacterProfile> others;
  std::size_t ignored_markers = 0;  // further first-person markers after the narrator's

  double mean_other_age() const;     // 0 when there are no others
  double mean_other_gender() const;  // undisclosed genders count as 0
};

/// Finds age/gender markers such as "(24f)", "(m 30)", "24f" or "f24" in
/// normalized text. A marker whose first token sits one or two tokens after
/// "i" or "me" describes the narrator; the rest describe other characters.
Demographics extract_demographics(std::string_view normalized_text);

// ---- dependency parses ----

struct ConlluToken {
  int id = 0;
  std::string form;
  std::string lemma;
  std::string upos;
  std::string xpos;
  std::string feats;
  int head = 0;
  std::string deprel;
};

struct DependencyGraph {
  std::size_t sentence_index = 0;
  std::string text;  // from a "# text =" comment, if present
  std::vector<ConlluToken> tokens;  // tokens[i].id == i + 1
};

/// Reads CoNLL-U. Multiword ranges and empty nodes are skipped. Each sentence
/// must have exactly one root and acyclic heads; violations raise ParseError.
std::vector<DependencyGraph> parse_conllu(const std::string& path);
std::vector<DependencyGraph> parse_conllu_text(std::string_view content, const std::string& source = "<conllu>");

struct SvoTuple {
  std::size_t sentence_index = 0;
  std::string subject_text;
  std::string verb_lemma;  // Porter stem of the lowercased verb
  std::optional<std::string> object_text;

  bool operator==(const SvoTuple&) const = default;
};

/// One tuple per VERB node with an nsubj/nsubj:pass dependent; the object is
/// its obj/dobj dependent when present.
std::vector<SvoTuple> extract_svo(const DependencyGraph& graph);
std::vector<SvoTuple> extract_svo(std::span<const DependencyGraph> graphs);

// ---- entity classes ----

struct EntityClass {
  std::string name;
  std::set<std::string> keywords;  // lowercase
};

/// Class order used for matching, most specific first.
const std::vector<std::string>& entity_precedence();

/// narrator, romantic_females, romantic_males, family, friends, females, males.
const std::vector<EntityClass>& default_entity_classes();

/// JSON object {class_name: [keywords...]}; known classes are ordered by
/// entity_precedence(), unknown ones follow in file order.
std::vector<EntityClass> load_entity_classes(const std::string& path);

/// Class of the span's head (last) token, or nullopt.
std::optional<std::string> match_entity(std::string_view span, std::span<const EntityClass> classes);

// ---- power and agency ----

enum class Power { Agent, Theme, Equal, None };
enum class Agency { Positive, Negative, Equal, None };

struct VerbFrame {
  Power power = Power::None;
  Agency agency = Agency::None;
};

class PowerAgencyLexicon {
 public:
  /// Stems `verb`; a second, different frame for the same stem is an error.
  void add(std::string_view verb, VerbFrame frame);
  const VerbFrame* find(const std::string& verb_lemma) const;
  std::size_t size() const { return frames_.size(); }

 private:
  std::map<std::string, VerbFrame> frames_;
};

/// CSV with header `verb,power,agency`.
PowerAgencyLexicon load_power_agency(const std::string& path);

struct PowerAgencyScore {
  double power = 0.0;
  double agency = 0.0;
  std::size_t n_power_tuples = 0;
  std::size_t n_agency_tuples = 0;
};

/// Signed power (subject-agent / object-theme +1, the reverse -1) and agency
/// (subject only: positive +1, negative -1), each averaged over its
/// qualifying tuples.
PowerAgencyScore power_agency(std::span<const SvoTuple> tuples, const PowerAgencyLexicon& lex,
                              const EntityClass& target);

/// Approximate tuples for text without a parse: a lexicon verb preceded by a
/// pronoun or entity keyword, with the next pronoun or keyword (after
/// determiners) as its object.
std::vector<SvoTuple> fallback_svo(std::span<const text::Sentence> sentences, const PowerAgencyLexicon& lex,
                                   std::span<const EntityClass> classes);

}  // namespace storyframe::character
