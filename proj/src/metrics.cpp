#include <algorithm>
#include <cmath>

#include "rmlal/metrics.hpp"

namespace rmlal {

double micro_f1(const Eigen::MatrixXi& predictions, const Eigen::MatrixXi& truth) {
  if (predictions.rows() != truth.rows() || predictions.cols() != truth.cols()) {
    throw dimension_error("micro_f1: prediction and truth shapes differ");
  }
  long tp = 0, fp = 0, fn = 0;
  for (Eigen::Index i = 0; i < truth.rows(); ++i) {
    for (Eigen::Index k = 0; k < truth.cols(); ++k) {
      const int p = predictions(i, k);
      const int y = truth(i, k);
      if ((p != -1 && p != 1) || (y != -1 && y != 1)) {
        throw domain_error("micro_f1: entries must be -1 or +1");
      }
      if (p == 1 && y == 1) ++tp;
      else if (p == 1 && y == -1) ++fp;
      else if (p == -1 && y == 1) ++fn;
    }
  }
  const double denom = static_cast<double>(2 * tp + fp + fn);
  return denom == 0.0 ? 0.0 : 2.0 * static_cast<double>(tp) / denom;
}

namespace {

// Regularized incomplete beta I_x(a,b) via the Lentz continued fraction.
double betacf(double a, double b, double x) {
  const int max_iter = 300;
  const double eps = 3e-16;
  const double fpmin = 1e-300;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < fpmin) d = fpmin;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= max_iter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < fpmin) d = fpmin;
    c = 1.0 + aa / c;
    if (std::abs(c) < fpmin) c = fpmin;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < fpmin) d = fpmin;
    c = 1.0 + aa / c;
    if (std::abs(c) < fpmin) c = fpmin;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < eps) break;
  }
  return h;
}

double incomplete_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                          a * std::log(x) + b * std::log(1.0 - x);
  const double front = std::exp(ln_front);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * betacf(a, b, x) / a;
  }
  return 1.0 - front * betacf(b, a, 1.0 - x) / b;
}

// Two-tailed 5% column of the t table, df 1..30.
constexpr double kT95[30] = {
    12.7062, 4.3027, 3.1824, 2.7764, 2.5706, 2.4469, 2.3646, 2.3060, 2.2622, 2.2281,
    2.2010,  2.1788, 2.1604, 2.1448, 2.1314, 2.1199, 2.1098, 2.1009, 2.0930, 2.0860,
    2.0796,  2.0739, 2.0687, 2.0639, 2.0595, 2.0555, 2.0518, 2.0484, 2.0452, 2.0423};

}  // namespace

double students_t_cdf(double t, int df) {
  if (df < 1) throw domain_error("students_t_cdf: df must be >= 1");
  const double nu = static_cast<double>(df);
  const double x = nu / (nu + t * t);
  const double tail = 0.5 * incomplete_beta(nu / 2.0, 0.5, x);
  return t >= 0.0 ? 1.0 - tail : tail;
}

double students_t_critical_two_sided(int df, double alpha) {
  if (df < 1) throw domain_error("students_t_critical_two_sided: df must be >= 1");
  if (!(alpha > 0.0 && alpha < 1.0)) throw domain_error("alpha must lie in (0,1)");
  if (alpha == 0.05 && df <= 30) return kT95[df - 1];
  // Invert 2*(1 - CDF(t)) = alpha by bisection.
  double lo = 0.0, hi = 1e3;
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    const double p = 2.0 * (1.0 - students_t_cdf(mid, df));
    (p > alpha ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

WTLSummary paired_ttest_wtl(const std::vector<LearningCurve>& curves_a,
                            const std::vector<LearningCurve>& curves_b,
                            double significance) {
  if (curves_a.size() != curves_b.size() || curves_a.size() < 2) {
    throw dimension_error("paired_ttest_wtl: need the same run count on both sides (>= 2)");
  }
  std::vector<LearningCurve> a = curves_a;
  std::vector<LearningCurve> b = curves_b;
  const auto by_seed = [](const LearningCurve& x, const LearningCurve& y) {
    return x.seed < y.seed;
  };
  std::sort(a.begin(), a.end(), by_seed);
  std::sort(b.begin(), b.end(), by_seed);

  const std::size_t runs = a.size();
  const std::size_t points = a.front().checkpoints.size();
  for (std::size_t r = 0; r < runs; ++r) {
    if (a[r].checkpoints.size() != points || b[r].checkpoints.size() != points) {
      throw dimension_error("paired_ttest_wtl: checkpoint grids differ in length");
    }
    for (std::size_t p = 0; p < points; ++p) {
      if (a[r].checkpoints[p].first != b[r].checkpoints[p].first ||
          a[r].checkpoints[p].first != a.front().checkpoints[p].first) {
        throw dimension_error("paired_ttest_wtl: checkpoint grids are not aligned");
      }
    }
  }

  const double critical =
      students_t_critical_two_sided(static_cast<int>(runs) - 1, significance);
  WTLSummary summary;
  for (std::size_t p = 0; p < points; ++p) {
    double mean = 0.0;
    for (std::size_t r = 0; r < runs; ++r) {
      mean += a[r].checkpoints[p].second - b[r].checkpoints[p].second;
    }
    mean /= static_cast<double>(runs);
    double var = 0.0;
    for (std::size_t r = 0; r < runs; ++r) {
      const double d = a[r].checkpoints[p].second - b[r].checkpoints[p].second - mean;
      var += d * d;
    }
    var /= static_cast<double>(runs - 1);

    if (var == 0.0) {
      // Degenerate differences: decide by the sign of the mean.
      if (mean > 0.0) ++summary.wins;
      else if (mean < 0.0) ++summary.losses;
      else ++summary.ties;
      continue;
    }
    const double t = mean / std::sqrt(var / static_cast<double>(runs));
    if (t > critical) ++summary.wins;
    else if (t < -critical) ++summary.losses;
    else ++summary.ties;
  }
  return summary;
}

}  // namespace rmlal
