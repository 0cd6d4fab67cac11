#pragma once

#include <span>
#include <string>
#include <vector>

#include "core/errors.hpp"

namespace oodcl::metrics {

// ID samples are the positives, OOD samples the negatives; higher score means
// more in-distribution.
struct EvalScores {
  std::vector<double> id_scores;
  std::vector<double> ood_scores;
};

struct MetricsReport {
  double fpr_at_95 = 0.0;
  double auroc = 0.0;
  double aupr = 0.0;
  std::size_t n_id = 0;
  std::size_t n_ood = 0;
};

// Fraction of OOD scores >= t*, where t* is the largest threshold accepting
// at least 95% of the ID scores (>= comparisons on both sides).
double fpr_at_95(const EvalScores& scores);

// Rank-sum AUROC: P(id > ood) + 0.5 P(id == ood). Equals trapezoidal
// integration of the tie-grouped ROC curve.
double auroc(const EvalScores& scores);

// Average precision with ties grouped: sum over distinct-score blocks of
// (recall gain) * (precision including the block).
double aupr(const EvalScores& scores);

MetricsReport compute_report(const EvalScores& scores);

struct NamedScores {
  std::string name;
  EvalScores scores;
};

struct SetReport {
  std::string name;
  MetricsReport report;
};

struct EvalSummary {
  std::vector<SetReport> sets;
  MetricsReport average;  // unweighted mean of each metric across sets
};

EvalSummary evaluate_sets(std::span<const NamedScores> sets);

}  // namespace oodcl::metrics
