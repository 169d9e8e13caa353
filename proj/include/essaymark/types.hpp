#ifndef ESSAYMARK_TYPES_HPP
#define ESSAYMARK_TYPES_HPP

#include <array>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace essaymark {

// The seven argumentative component labels.
enum class ComponentLabel {
  Lead,
  Position,
  Claim,
  Counterclaim,
  Rebuttal,
  Evidence,
  ConcludingStatement,
};

inline constexpr std::array<ComponentLabel, 7> kComponentLabels = {
    ComponentLabel::Lead,          ComponentLabel::Position,
    ComponentLabel::Claim,         ComponentLabel::Counterclaim,
    ComponentLabel::Rebuttal,      ComponentLabel::Evidence,
    ComponentLabel::ConcludingStatement,
};

std::string_view to_string(ComponentLabel label);
// Short keys used in reports: L, P, C1, C2, R, E, C3.
std::string_view short_key(ComponentLabel label);
std::optional<ComponentLabel> component_label_from_string(std::string_view s);

// Collapsed conventions-error labels.
enum class ErrorLabel { Spelling, PunctOrth, Grammar };

inline constexpr std::array<ErrorLabel, 3> kErrorLabels = {
    ErrorLabel::Spelling, ErrorLabel::PunctOrth, ErrorLabel::Grammar};

std::string_view to_string(ErrorLabel label);
std::optional<ErrorLabel> error_label_from_string(std::string_view s);

// Half-open [start, end) range of Unicode scalar values into the essay text.
struct ComponentSpan {
  std::string essay_id;
  std::size_t start = 0;
  std::size_t end = 0;
  ComponentLabel label = ComponentLabel::Lead;

  bool operator==(const ComponentSpan&) const = default;
};

// Error spans live on the original (uncorrected) text. Zero-width spans mark
// the insertion point of a Missing edit.
struct ErrorSpan {
  std::string essay_id;
  std::size_t start = 0;
  std::size_t end = 0;
  ErrorLabel label = ErrorLabel::Grammar;

  bool operator==(const ErrorSpan&) const = default;
};

enum class Gender { Female, Male, Other };
enum class RaceEthnicity { WC, HL, BA, AP, Mix, Nat };

std::string_view to_string(Gender g);
std::string_view to_string(RaceEthnicity r);

struct Demographics {
  std::optional<Gender> gender;
  std::optional<RaceEthnicity> race_ethnicity;
  std::optional<bool> ell;
  std::optional<bool> disadvantaged_economically;
  std::optional<bool> identified_disability;

  bool operator==(const Demographics&) const = default;
};

// Grade 6-12, with "unknown" as a first-class category.
enum class Grade { G6 = 6, G7, G8, G9, G10, G11, G12, Unknown = 0 };

std::string_view to_string(Grade g);

struct Essay {
  std::string id;
  std::string text;  // UTF-8
  Grade grade = Grade::Unknown;
  std::optional<bool> source_dependent;
  std::optional<int> score;  // holistic, nominally 1-6
  std::string split;         // e.g. "train" / "test"; empty if absent
  Demographics demographics;
};

}  // namespace essaymark

#endif
