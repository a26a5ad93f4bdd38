#pragma once

#include <Eigen/Dense>
#include <string>
#include <utility>
#include <vector>

#include "rmlal/errors.hpp"

namespace rmlal {

/// Micro-averaged F1 over all instance-label pairs, positive class +1.
/// Returns 0 when the pooled denominator is 0.
double micro_f1(const Eigen::MatrixXi& predictions, const Eigen::MatrixXi& truth);

struct LearningCurve {
  std::vector<std::pair<int, double>> checkpoints;  // (queries_spent, micro_f1)
  std::string method;
  int seed = 0;
  std::string dataset;
};

struct WTLSummary {
  int wins = 0;
  int ties = 0;
  int losses = 0;
  int total() const { return wins + ties + losses; }
};

/// Student's t CDF, computed through the regularized incomplete beta
/// continued fraction.
double students_t_cdf(double t, int df);

/// Two-sided critical value. The 5% column is hard-coded from the t table
/// for df <= 30 and cross-checked against the CDF; everything else inverts
/// the CDF numerically.
double students_t_critical_two_sided(int df, double alpha);

/// Per-checkpoint paired t-test of method A versus method B across runs,
/// aggregated into win/tie/loss counts. Zero-variance differences resolve by
/// the sign of the mean. Runs are paired by seed.
WTLSummary paired_ttest_wtl(const std::vector<LearningCurve>& curves_a,
                            const std::vector<LearningCurve>& curves_b,
                            double significance = 0.05);

}  // namespace rmlal
