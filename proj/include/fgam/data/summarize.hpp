#pragma once

// Reduces an intraoperative time series to per-case columns. Integrals treat
// the series as a step function: each sample holds until the next one, the
// last holds to the end of surgery, and the first also covers any gap
// between the start of surgery and the first sample.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fgam/data/schema.hpp"
#include "fgam/error.hpp"

namespace fgam::data {

struct Sample {
  double t = 0.0;  // seconds from start of surgery
  double value = 0.0;
};

struct SummaryValue {
  std::string column;
  std::optional<double> value;
};

namespace detail {

inline void check_series(std::span<const Sample> series, const std::string& name) {
  for (std::size_t i = 0; i < series.size(); ++i) {
    if (!std::isfinite(series[i].t) || !std::isfinite(series[i].value)) {
      throw InvalidArgument("non-finite sample in channel '" + name + "'");
    }
    if (i > 0 && series[i].t < series[i - 1].t) {
      throw InvalidArgument("timestamps decrease in channel '" + name + "'");
    }
  }
}

inline std::vector<Sample> in_window(std::span<const Sample> series, double duration) {
  std::vector<Sample> out;
  for (const auto& s : series) {
    if (s.t >= 0.0 && s.t <= duration) out.push_back(s);
  }
  return out;
}

// Time each sample holds within [0, duration].
inline std::vector<double> hold_times(const std::vector<Sample>& s, double duration) {
  std::vector<double> len(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double start = i == 0 ? 0.0 : s[i].t;
    const double end = i + 1 < s.size() ? s[i + 1].t : duration;
    len[i] = std::max(0.0, end - start);
  }
  return len;
}

}  // namespace detail

inline std::optional<double> final_value(std::span<const Sample> series, double duration) {
  const auto s = detail::in_window(series, duration);
  if (s.empty()) return std::nullopt;
  return s.back().value;
}

// Emits one value per column of `spec`, in the order of spec.columns().
// An empty window yields missing values for every column.
inline std::vector<SummaryValue> summarize_channel(std::span<const Sample> series, const ChannelSpec& spec,
                                                   double duration, std::optional<double> weight_kg = std::nullopt) {
  if (!(duration > 0.0) || !std::isfinite(duration)) throw InvalidArgument("surgery duration must be positive");
  detail::check_series(series, spec.name);
  const auto s = detail::in_window(series, duration);
  std::vector<SummaryValue> out;
  for (const auto& c : spec.columns()) out.push_back({c, std::nullopt});
  if (s.empty()) return out;

  const auto len = detail::hold_times(s, duration);
  double mean = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) mean += s[i].value * len[i];
  mean /= duration;
  double var = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) var += (s[i].value - mean) * (s[i].value - mean) * len[i];
  var /= duration;
  double lo = s.front().value, hi = s.front().value;
  for (const auto& x : s) {
    lo = std::min(lo, x.value);
    hi = std::max(hi, x.value);
  }

  std::size_t k = 0;
  for (auto st : spec.statistics) {
    switch (st) {
      case Statistic::mean: out[k].value = mean; break;
      case Statistic::std: out[k].value = std::sqrt(std::max(var, 0.0)); break;
      case Statistic::min: out[k].value = lo; break;
      case Statistic::max: out[k].value = hi; break;
      case Statistic::final: out[k].value = s.back().value; break;
    }
    ++k;
  }
  const bool scale_ok = !spec.thresholds_per_kg || (weight_kg && *weight_kg > 0.0 && std::isfinite(*weight_kg));
  for (const auto& th : spec.thresholds) {
    if (scale_ok) {
      const double scale = spec.thresholds_per_kg ? *weight_kg : 1.0;
      double time = 0.0;
      for (std::size_t i = 0; i < s.size(); ++i) {
        const double v = s[i].value / scale;
        const bool hit = th.direction == Direction::below ? v < th.cutoff : v > th.cutoff;
        if (hit) time += len[i];
      }
      out[k].value = std::clamp(time / duration, 0.0, 1.0);
    }
    ++k;
  }
  return out;
}

// Final volume over final pressure; missing when the pressure is not positive.
inline std::optional<double> compliance(std::optional<double> final_volume, std::optional<double> final_pressure) {
  if (!final_volume || !final_pressure) return std::nullopt;
  if (!(*final_pressure > 0.0) || !std::isfinite(*final_volume) || !std::isfinite(*final_pressure)) {
    return std::nullopt;
  }
  return *final_volume / *final_pressure;
}

}  // namespace fgam::data
