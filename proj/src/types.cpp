#include "essaymark/types.hpp"

#include <algorithm>
#include <cctype>

namespace essaymark {

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return out;
}

}  // namespace

std::string_view to_string(ComponentLabel label) {
  switch (label) {
    case ComponentLabel::Lead: return "Lead";
    case ComponentLabel::Position: return "Position";
    case ComponentLabel::Claim: return "Claim";
    case ComponentLabel::Counterclaim: return "Counterclaim";
    case ComponentLabel::Rebuttal: return "Rebuttal";
    case ComponentLabel::Evidence: return "Evidence";
    case ComponentLabel::ConcludingStatement: return "ConcludingStatement";
  }
  return "?";
}

std::string_view short_key(ComponentLabel label) {
  switch (label) {
    case ComponentLabel::Lead: return "L";
    case ComponentLabel::Position: return "P";
    case ComponentLabel::Claim: return "C1";
    case ComponentLabel::Counterclaim: return "C2";
    case ComponentLabel::Rebuttal: return "R";
    case ComponentLabel::Evidence: return "E";
    case ComponentLabel::ConcludingStatement: return "C3";
  }
  return "?";
}

std::optional<ComponentLabel> component_label_from_string(std::string_view s) {
  std::string key = lower(s);
  // strip spaces so "Concluding Statement" (corpus spelling) also matches
  key.erase(std::remove(key.begin(), key.end(), ' '), key.end());
  if (key == "lead") return ComponentLabel::Lead;
  if (key == "position") return ComponentLabel::Position;
  if (key == "claim") return ComponentLabel::Claim;
  if (key == "counterclaim") return ComponentLabel::Counterclaim;
  if (key == "rebuttal") return ComponentLabel::Rebuttal;
  if (key == "evidence") return ComponentLabel::Evidence;
  if (key == "concludingstatement") return ComponentLabel::ConcludingStatement;
  return std::nullopt;
}

std::string_view to_string(ErrorLabel label) {
  switch (label) {
    case ErrorLabel::Spelling: return "Spelling";
    case ErrorLabel::PunctOrth: return "PunctOrth";
    case ErrorLabel::Grammar: return "Grammar";
  }
  return "?";
}

std::optional<ErrorLabel> error_label_from_string(std::string_view s) {
  std::string key = lower(s);
  if (key == "spelling") return ErrorLabel::Spelling;
  if (key == "punctorth") return ErrorLabel::PunctOrth;
  if (key == "grammar") return ErrorLabel::Grammar;
  return std::nullopt;
}

std::string_view to_string(Gender g) {
  switch (g) {
    case Gender::Female: return "F";
    case Gender::Male: return "M";
    case Gender::Other: return "Other";
  }
  return "?";
}

std::string_view to_string(RaceEthnicity r) {
  switch (r) {
    case RaceEthnicity::WC: return "WC";
    case RaceEthnicity::HL: return "HL";
    case RaceEthnicity::BA: return "BA";
    case RaceEthnicity::AP: return "AP";
    case RaceEthnicity::Mix: return "Mix";
    case RaceEthnicity::Nat: return "Nat";
  }
  return "?";
}

std::string_view to_string(Grade g) {
  switch (g) {
    case Grade::G6: return "6";
    case Grade::G7: return "7";
    case Grade::G8: return "8";
    case Grade::G9: return "9";
    case Grade::G10: return "10";
    case Grade::G11: return "11";
    case Grade::G12: return "12";
    case Grade::Unknown: return "Unk.";
  }
  return "?";
}

}  // namespace essaymark
