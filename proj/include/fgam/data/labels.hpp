#pragma once

// Postoperative outcome labels for AKI (creatinine criteria) and ARF
// (ventilation criteria). All cutoffs are strict.

#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>

#include "fgam/error.hpp"

namespace fgam::data {

enum class Outcome { negative, positive, undefined };

inline std::string to_string(Outcome o) {
  switch (o) {
    case Outcome::negative: return "negative";
    case Outcome::positive: return "positive";
    case Outcome::undefined: return "undefined";
  }
  return "undefined";
}

struct LabelResult {
  Outcome outcome = Outcome::undefined;
  std::string reason;
};

// Absorbs rounding in differences such as 1.30 - 1.00 so that values on a
// cutoff are not pushed over it by representation error.
inline constexpr double kBoundaryTolerance = 1e-9;

struct CreatinineValue {
  double hours_after_surgery = 0.0;
  double mg_dl = 0.0;
};

inline constexpr double kAkiAbsoluteRise = 0.3;
inline constexpr double kAkiRelativeRise = 0.5;
inline constexpr double kAkiWindowHours = 48.0;
inline constexpr double kPreopMaxAgeDays = 30.0;

inline LabelResult label_aki(std::optional<double> preop_mg_dl, std::optional<double> preop_age_days,
                             std::span<const CreatinineValue> postop, bool on_dialysis) {
  if (preop_mg_dl && *preop_mg_dl < 0.0) throw InvalidArgument("negative preoperative creatinine");
  for (const auto& v : postop) {
    if (v.mg_dl < 0.0) throw InvalidArgument("negative postoperative creatinine");
  }
  if (on_dialysis) return {Outcome::undefined, "on dialysis"};
  if (!preop_mg_dl || !std::isfinite(*preop_mg_dl)) return {Outcome::undefined, "no preoperative creatinine"};
  if (!preop_age_days || !(*preop_age_days >= 0.0) || *preop_age_days > kPreopMaxAgeDays) {
    return {Outcome::undefined, "preoperative creatinine older than 30 days"};
  }
  bool any = false;
  bool rise = false;
  for (const auto& v : postop) {
    if (!(v.hours_after_surgery >= 0.0 && v.hours_after_surgery <= kAkiWindowHours)) continue;
    any = true;
    const double base = *preop_mg_dl;
    if (v.mg_dl - base > kAkiAbsoluteRise + kBoundaryTolerance) rise = true;
    if (v.mg_dl - base > kAkiRelativeRise * base + kBoundaryTolerance) rise = true;
  }
  if (!any) return {Outcome::undefined, "no postoperative creatinine within 48 hours"};
  return rise ? LabelResult{Outcome::positive, "creatinine rise"} : LabelResult{Outcome::negative, ""};
}

struct RespiratoryCourse {
  double ventilation_hours_after_surgery = 0.0;
  bool reintubated_within_48h = false;
  bool ventilated_before_surgery = false;
  bool second_surgery_within_48h = false;
  bool died_within_48h = false;
};

inline constexpr double kArfVentilationHours = 48.0;

inline LabelResult label_arf(const RespiratoryCourse& c) {
  if (c.ventilated_before_surgery) return {Outcome::undefined, "ventilated before surgery"};
  if (c.second_surgery_within_48h) return {Outcome::undefined, "second surgery within 48 hours"};
  if (c.died_within_48h) return {Outcome::undefined, "died within 48 hours"};
  if (c.ventilation_hours_after_surgery < 0.0) throw InvalidArgument("negative ventilation time");
  if (c.ventilation_hours_after_surgery > kArfVentilationHours + kBoundaryTolerance) {
    return {Outcome::positive, "prolonged ventilation"};
  }
  if (c.reintubated_within_48h) return {Outcome::positive, "reintubation"};
  return {Outcome::negative, ""};
}

// Counts per outcome plus a breakdown of why cases were excluded.
struct LabelTally {
  std::size_t positive = 0;
  std::size_t negative = 0;
  std::size_t undefined = 0;
  std::map<std::string, std::size_t> exclusions;

  void add(const LabelResult& r) {
    switch (r.outcome) {
      case Outcome::positive: ++positive; break;
      case Outcome::negative: ++negative; break;
      case Outcome::undefined:
        ++undefined;
        ++exclusions[r.reason];
        break;
    }
  }
  std::size_t total() const { return positive + negative + undefined; }
};

}  // namespace fgam::data
