#include "core/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace oodcl::metrics {

namespace {

void check(const EvalScores& s) {
  if (s.id_scores.empty() || s.ood_scores.empty()) {
    throw EmptyInputError("metrics: both score lists must be nonempty");
  }
  for (double v : s.id_scores) {
    if (!std::isfinite(v)) throw Error("metrics: non-finite ID score");
  }
  for (double v : s.ood_scores) {
    if (!std::isfinite(v)) throw Error("metrics: non-finite OOD score");
  }
}

}  // namespace

double fpr_at_95(const EvalScores& scores) {
  check(scores);
  std::vector<double> id_sorted = scores.id_scores;
  std::sort(id_sorted.begin(), id_sorted.end(), std::greater<>());
  const std::size_t n_id = id_sorted.size();
  const double need = 0.95 * double(n_id);

  // Walking distinct ID values downward, the first value whose >=-count
  // reaches 95% is the largest feasible threshold.
  double threshold = id_sorted.back();
  for (std::size_t i = 0; i < n_id;) {
    std::size_t j = i;
    while (j < n_id && id_sorted[j] == id_sorted[i]) ++j;
    if (double(j) >= need) {  // count of scores >= id_sorted[i]
      threshold = id_sorted[i];
      break;
    }
    i = j;
  }
  std::size_t fp = 0;
  for (double v : scores.ood_scores) {
    if (v >= threshold) ++fp;
  }
  return double(fp) / double(scores.ood_scores.size());
}

double auroc(const EvalScores& scores) {
  check(scores);
  std::vector<double> ood_sorted = scores.ood_scores;
  std::sort(ood_sorted.begin(), ood_sorted.end());
  double wins = 0.0;
  for (double v : scores.id_scores) {
    const auto lo = std::lower_bound(ood_sorted.begin(), ood_sorted.end(), v);
    const auto hi = std::upper_bound(lo, ood_sorted.end(), v);
    wins += double(lo - ood_sorted.begin()) + 0.5 * double(hi - lo);
  }
  return wins / (double(scores.id_scores.size()) * double(ood_sorted.size()));
}

double aupr(const EvalScores& scores) {
  check(scores);
  // (score, is_positive) sorted by score descending, ties grouped.
  std::vector<std::pair<double, bool>> all;
  all.reserve(scores.id_scores.size() + scores.ood_scores.size());
  for (double v : scores.id_scores) all.emplace_back(v, true);
  for (double v : scores.ood_scores) all.emplace_back(v, false);
  std::sort(all.begin(), all.end(),
            [](const auto& a, const auto& b) { return a.first > b.first; });

  const double n_pos = double(scores.id_scores.size());
  double ap = 0.0;
  std::size_t tp = 0, fp = 0;
  for (std::size_t i = 0; i < all.size();) {
    std::size_t j = i;
    std::size_t block_tp = 0, block_fp = 0;
    while (j < all.size() && all[j].first == all[i].first) {
      (all[j].second ? block_tp : block_fp)++;
      ++j;
    }
    tp += block_tp;
    fp += block_fp;
    if (block_tp > 0) {
      const double precision = double(tp) / double(tp + fp);
      ap += (double(block_tp) / n_pos) * precision;
    }
    i = j;
  }
  return ap;
}

MetricsReport compute_report(const EvalScores& scores) {
  MetricsReport r;
  r.fpr_at_95 = fpr_at_95(scores);
  r.auroc = auroc(scores);
  r.aupr = aupr(scores);
  r.n_id = scores.id_scores.size();
  r.n_ood = scores.ood_scores.size();
  return r;
}

EvalSummary evaluate_sets(std::span<const NamedScores> sets) {
  if (sets.empty()) throw EmptyInputError("evaluate_sets: no OOD sets");
  EvalSummary summary;
  summary.sets.reserve(sets.size());
  for (const auto& s : sets) {
    summary.sets.push_back({s.name, compute_report(s.scores)});
  }
  const double n = double(sets.size());
  for (const auto& s : summary.sets) {
    summary.average.fpr_at_95 += s.report.fpr_at_95 / n;
    summary.average.auroc += s.report.auroc / n;
    summary.average.aupr += s.report.aupr / n;
    summary.average.n_id += s.report.n_id;
    summary.average.n_ood += s.report.n_ood;
  }
  return summary;
}

}  // namespace oodcl::metrics
