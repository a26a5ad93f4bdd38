#pragma once

#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "rmlal/kernels.hpp"

namespace rmlal {

/// Classifier state for one candidate-conditioned solve. With an identity
/// label-correlation matrix every quantity separates per label: theta holds
/// one coefficient row per label over the labeled points, e/eta are the
/// per-label auxiliary and dual variables of the margin split.
struct ModelState {
  Eigen::MatrixXd theta;  // C x l
  Eigen::VectorXd e;      // C, e_k = theta_k . K_L(x_q) at convergence
  Eigen::VectorXd eta;    // C, dual variable
  double rho = 1.0;       // augmented-Lagrangian penalty

  static ModelState zero(int labels, int labeled, double rho_value) {
    ModelState s;
    s.theta = Eigen::MatrixXd::Zero(labels, labeled);
    s.e = Eigen::VectorXd::Zero(labels);
    s.eta = Eigen::VectorXd::Zero(labels);
    s.rho = rho_value;
    return s;
  }
};

struct SolverConfig {
  double lambda = 0.1;     // ridge weight
  double beta1 = 1.0;      // pool-representativeness tradeoff
  double beta2 = 1.0;      // labeled-redundancy tradeoff
  double rho = 1.0;        // ADMM penalty
  int max_outer = 10;      // half-quadratic reweighting steps
  int max_inner = 50;      // ADMM steps per reweighting
  double tol_primal = 1e-5;
  double tol_obj = 1e-6;
  WeightMode weight_mode = WeightMode::mcc;

  void validate() const {
    if (lambda < 0.0 || beta1 < 0.0 || beta2 < 0.0) {
      throw config_error("lambda/beta1/beta2 must be non-negative");
    }
    if (!(rho > 0.0)) throw config_error("rho must be positive");
    if (max_outer < 1 || max_inner < 1) throw config_error("iteration caps must be >= 1");
    if (!(tol_primal > 0.0) || !(tol_obj > 0.0)) throw config_error("tolerances must be positive");
  }
};

struct SolveReport {
  bool converged = false;
  int outer_iterations = 0;
  int inner_iterations = 0;
  std::vector<double> objective_trace;        // maximized objective after each outer pass
  std::vector<double> primal_residual_trace;  // inner residuals of the final outer pass
};

/// Called after every outer reweighting pass with the current state.
using OuterObserver = std::function<void(const ModelState&, int outer_index)>;

/// f_k(x) = theta_k . kernel_column for every label.
Eigen::VectorXd predict(const ModelState& state, const Eigen::VectorXd& kernel_column);

/// Batched predict over the columns of `kernel_columns` (l x m), returns C x m.
Eigen::MatrixXd predict_all(const ModelState& state, const Eigen::MatrixXd& kernel_columns);

/// Value of the fixed-weight half-quadratic surrogate (to be minimized),
/// evaluated with f_k(x_q) = theta_k . K_L(x_q) substituted back in.
double objective_hq(const ModelState& state, const HQWeights& weights,
                    const GramCache& caches, const Eigen::MatrixXd& y_L, int q_pool,
                    const SolverConfig& solver);

/// Exact maximized objective: correntropy fit - ridge + candidate margin
/// + beta1 * pool consistency - beta2 * labeled consistency.
double objective_mcc(const ModelState& state, const GramCache& caches,
                     const Eigen::MatrixXd& y_L, int q_pool,
                     const SolverConfig& solver, const KernelConfig& kernel);

/// Candidate-free variant: correntropy fit - ridge only.
double objective_mcc_fit(const ModelState& state, const GramCache& caches,
                         const Eigen::MatrixXd& y_L, const SolverConfig& solver,
                         const KernelConfig& kernel);

/// One theta update: per-label symmetric solve of the stationarity system of
/// the fixed-weight augmented Lagrangian at the state's e and eta.
Eigen::MatrixXd update_theta(const ModelState& state, const HQWeights& weights,
                             const GramCache& caches, const Eigen::MatrixXd& y_L,
                             int q_pool, const SolverConfig& solver);

/// Closed-form e update: e_k = soft(rho*c_k - eta_k, 2*n_qk) / (2*n_qk + rho)
/// with c_k = theta_k . K_L(x_q).
Eigen::VectorXd update_e(const ModelState& state, const HQWeights& weights,
                         const GramCache& caches, int q_pool);

/// Dual ascent: eta_k += rho * (e_k - theta_k . K_L(x_q)).
Eigen::VectorXd update_eta(const ModelState& state, int q_pool, const GramCache& caches);

/// Full half-quadratic / ADMM solve for one pool candidate.
std::pair<ModelState, SolveReport> solve_for_candidate(
    int q_pool, const GramCache& caches, const Eigen::MatrixXd& y_L,
    const SolverConfig& solver, const KernelConfig& kernel,
    const ModelState* warm_start = nullptr, const OuterObserver& observer = {});

/// Candidate-free robust fit (margin, representativeness and redundancy terms
/// absent). Used to initialize the alternation and by the margin baseline.
std::pair<ModelState, SolveReport> solve_fit(const GramCache& caches,
                                             const Eigen::MatrixXd& y_L,
                                             const SolverConfig& solver,
                                             const KernelConfig& kernel,
                                             const ModelState* warm_start = nullptr);

}  // namespace rmlal
