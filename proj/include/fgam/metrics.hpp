#pragma once

// Discrimination metrics for binary risk scores: ROC/PR curves, AUROC as
// the Mann-Whitney statistic, AUPRC as average precision, and normal
// approximation confidence intervals (Hanley & McNeil, 1982).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/distributions/normal.hpp>

#include "fgam/error.hpp"

namespace fgam {

struct ClassCounts {
  std::size_t positives = 0;
  std::size_t negatives = 0;
};

inline ClassCounts count_classes(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw DimensionError("score and label counts differ");
  ClassCounts c;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == 1) {
      ++c.positives;
    } else if (labels[i] == 0) {
      ++c.negatives;
    } else {
      throw InvalidArgument("labels must be 0 or 1");
    }
    if (!std::isfinite(scores[i])) throw InvalidArgument("scores must be finite");
  }
  return c;
}

namespace detail {

// Indices sorted by descending score; ties keep input order.
inline std::vector<std::size_t> order_desc(std::span<const double> scores) {
  std::vector<std::size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  return idx;
}

// Visits groups of tied scores, highest first, with (positives, negatives) in the group.
template <class Fn>
void for_each_threshold(std::span<const double> scores, std::span<const int> labels, Fn&& fn) {
  const auto idx = order_desc(scores);
  std::size_t i = 0;
  while (i < idx.size()) {
    std::size_t pos = 0, neg = 0;
    const double s = scores[idx[i]];
    std::size_t j = i;
    for (; j < idx.size() && scores[idx[j]] == s; ++j) {
      if (labels[idx[j]] == 1) ++pos; else ++neg;
    }
    fn(s, pos, neg);
    i = j;
  }
}

}  // namespace detail

// Fraction of (positive, negative) pairs ranked correctly, ties counted 1/2.
// Accumulated in integer half-units so the result is exact.
inline double auroc(std::span<const double> scores, std::span<const int> labels) {
  const auto counts = count_classes(scores, labels);
  if (counts.positives == 0 || counts.negatives == 0) {
    throw InvalidArgument("AUROC needs at least one positive and one negative");
  }
  // Walk from the lowest score up so negatives below each group are known.
  std::vector<std::pair<double, int>> rows(scores.size());
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = {scores[i], labels[i]};
  std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  std::uint64_t twice_u = 0;
  std::uint64_t negatives_below = 0;
  std::size_t i = 0;
  while (i < rows.size()) {
    std::size_t j = i;
    std::uint64_t pos = 0, neg = 0;
    for (; j < rows.size() && rows[j].first == rows[i].first; ++j) {
      if (rows[j].second == 1) ++pos; else ++neg;
    }
    twice_u += pos * (2 * negatives_below + neg);
    negatives_below += neg;
    i = j;
  }
  return static_cast<double>(twice_u) /
         (2.0 * static_cast<double>(counts.positives) * static_cast<double>(counts.negatives));
}

// Average precision: sum over thresholds of (recall step) x (precision at that threshold).
inline double auprc(std::span<const double> scores, std::span<const int> labels) {
  const auto counts = count_classes(scores, labels);
  if (counts.positives == 0) throw InvalidArgument("AUPRC needs at least one positive");
  double ap = 0.0;
  std::size_t tp = 0, fp = 0;
  detail::for_each_threshold(scores, labels, [&](double, std::size_t pos, std::size_t neg) {
    tp += pos;
    fp += neg;
    if (pos > 0) {
      const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
      ap += precision * static_cast<double>(pos) / static_cast<double>(counts.positives);
    }
  });
  return ap;
}

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
  double threshold = 0.0;
};

struct PrPoint {
  double recall = 0.0;
  double precision = 0.0;
  double threshold = 0.0;
};

struct Curves {
  std::vector<RocPoint> roc;
  std::vector<PrPoint> pr;
};

// One point per unique score. ROC starts at (0,0) and ends at (1,1).
inline Curves curves(std::span<const double> scores, std::span<const int> labels) {
  const auto counts = count_classes(scores, labels);
  if (counts.positives == 0 || counts.negatives == 0) {
    throw InvalidArgument("ROC curve needs at least one positive and one negative");
  }
  Curves out;
  out.roc.push_back({0.0, 0.0, std::numeric_limits<double>::infinity()});
  std::size_t tp = 0, fp = 0;
  const double P = static_cast<double>(counts.positives), N = static_cast<double>(counts.negatives);
  detail::for_each_threshold(scores, labels, [&](double s, std::size_t pos, std::size_t neg) {
    tp += pos;
    fp += neg;
    out.roc.push_back({static_cast<double>(fp) / N, static_cast<double>(tp) / P, s});
    out.pr.push_back({static_cast<double>(tp) / P, static_cast<double>(tp) / static_cast<double>(tp + fp), s});
  });
  return out;
}

inline double trapezoid_area(std::span<const RocPoint> roc) {
  double a = 0.0;
  for (std::size_t i = 1; i < roc.size(); ++i) {
    a += (roc[i].fpr - roc[i - 1].fpr) * 0.5 * (roc[i].tpr + roc[i - 1].tpr);
  }
  return a;
}

inline double normal_quantile(double p) {
  return boost::math::quantile(boost::math::normal_distribution<double>(0.0, 1.0), p);
}

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

inline double hanley_mcneil_se(double auc, std::size_t n_pos, std::size_t n_neg) {
  if (!(auc >= 0.0 && auc <= 1.0)) throw InvalidArgument("AUC must lie in [0, 1]");
  if (n_pos < 1 || n_neg < 1) throw InvalidArgument("Hanley-McNeil needs at least one case per class");
  const double a = auc;
  const double q1 = a / (2.0 - a);
  const double q2 = 2.0 * a * a / (1.0 + a);
  const double np = static_cast<double>(n_pos), nn = static_cast<double>(n_neg);
  const double var = (a * (1.0 - a) + (np - 1.0) * (q1 - a * a) + (nn - 1.0) * (q2 - a * a)) / (np * nn);
  return std::sqrt(std::max(var, 0.0));
}

// Two-sided interval auc +/- z * SE, clipped to [0, 1].
inline Interval hanley_mcneil_ci(double auc, std::size_t n_pos, std::size_t n_neg, double level = 0.95) {
  if (!(level > 0.0 && level < 1.0)) throw InvalidArgument("confidence level must lie in (0, 1)");
  const double se = hanley_mcneil_se(auc, n_pos, n_neg);
  const double z = normal_quantile(0.5 + level / 2.0);
  return {std::max(0.0, auc - z * se), std::min(1.0, auc + z * se)};
}

struct EvalReport {
  double auroc = 0.0;
  Interval auroc_ci;
  double auprc = 0.0;
  Interval auprc_ci;
  std::vector<RocPoint> roc_points;
  std::vector<PrPoint> pr_points;
  std::size_t n_pos = 0;
  std::size_t n_neg = 0;
};

// The AUPRC interval reuses the Hanley-McNeil variance with the AUPRC in place of A.
inline EvalReport evaluate_scores(std::span<const double> scores, std::span<const int> labels, double level = 0.95) {
  const auto counts = count_classes(scores, labels);
  if (counts.positives == 0 || counts.negatives == 0) {
    throw InvalidArgument("evaluation needs both classes; split has " + std::to_string(counts.positives) +
                          " positives and " + std::to_string(counts.negatives) + " negatives");
  }
  EvalReport r;
  r.n_pos = counts.positives;
  r.n_neg = counts.negatives;
  r.auroc = auroc(scores, labels);
  r.auprc = auprc(scores, labels);
  r.auroc_ci = hanley_mcneil_ci(r.auroc, r.n_pos, r.n_neg, level);
  r.auprc_ci = hanley_mcneil_ci(r.auprc, r.n_pos, r.n_neg, level);
  auto c = curves(scores, labels);
  r.roc_points = std::move(c.roc);
  r.pr_points = std::move(c.pr);
  return r;
}

inline void write_roc_csv(std::ostream& os, std::span<const RocPoint> roc) {
  os.precision(17);
  os << "fpr,tpr\n";
  for (const auto& p : roc) os << p.fpr << ',' << p.tpr << '\n';
}

inline void write_pr_csv(std::ostream& os, std::span<const PrPoint> pr) {
  os.precision(17);
  os << "recall,precision\n";
  for (const auto& p : pr) os << p.recall << ',' << p.precision << '\n';
}

// Spearman rank correlation with average ranks for ties.
inline double spearman(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.size() < 2) throw InvalidArgument("spearman needs two equal-length series");
  auto ranks = [](std::span<const double> v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t x, std::size_t y) { return v[x] < v[y]; });
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < idx.size();) {
      std::size_t j = i;
      while (j < idx.size() && v[idx[j]] == v[idx[i]]) ++j;
      const double avg = 0.5 * static_cast<double>(i + j - 1) + 1.0;
      for (std::size_t k = i; k < j; ++k) r[idx[k]] = avg;
      i = j;
    }
    return r;
  };
  const auto ra = ranks(a), rb = ranks(b);
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / n;
  const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    sab += (ra[i] - ma) * (rb[i] - mb);
    saa += (ra[i] - ma) * (ra[i] - ma);
    sbb += (rb[i] - mb) * (rb[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

}  // namespace fgam
