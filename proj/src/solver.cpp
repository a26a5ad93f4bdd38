#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Cholesky>

#include "rmlal/solver.hpp"

namespace rmlal {

Eigen::VectorXd predict(const ModelState& state, const Eigen::VectorXd& kernel_column) {
  if (state.theta.cols() != kernel_column.size()) {
    throw dimension_error("predict: kernel column length " +
                          std::to_string(kernel_column.size()) + " != labeled size " +
                          std::to_string(state.theta.cols()));
  }
  return state.theta * kernel_column;
}

Eigen::MatrixXd predict_all(const ModelState& state, const Eigen::MatrixXd& kernel_columns) {
  if (state.theta.cols() != kernel_columns.rows()) {
    throw dimension_error("predict_all: kernel block has " +
                          std::to_string(kernel_columns.rows()) + " rows, expected " +
                          std::to_string(state.theta.cols()));
  }
  return state.theta * kernel_columns;
}

double objective_hq(const ModelState& state, const HQWeights& weights,
                    const GramCache& caches, const Eigen::MatrixXd& y_L, int q_pool,
                    const SolverConfig& solver) {
  const int l = caches.l();
  const int u = caches.u();
  const int c = static_cast<int>(state.theta.rows());

  const Eigen::MatrixXd f_L = state.theta * caches.K_LL;
  const Eigen::MatrixXd f_U = state.theta * caches.K_LU;
  const Eigen::VectorXd f_q = f_U.col(q_pool);

  double fit = 0.0;
  for (int i = 0; i < l; ++i) {
    for (int k = 0; k < c; ++k) {
      const double r = y_L(i, k) - f_L(k, i);
      fit += weights.M(i, k) * r * r;
    }
  }
  const double ridge = solver.lambda * (state.theta * caches.K_LL * state.theta.transpose()).trace();
  double margin = 0.0;
  for (int k = 0; k < c; ++k) {
    margin += weights.N(k) * (1.0 + 2.0 * std::abs(f_q(k)) + f_q(k) * f_q(k));
  }
  double pool_term = 0.0;
  for (int i = 0; i < u; ++i) {
    pool_term += weights.Hstar(i) * (f_q - f_U.col(i)).squaredNorm();
  }
  double labeled_term = 0.0;
  for (int i = 0; i < l; ++i) {
    labeled_term += weights.Vstar(i) * (f_q - y_L.row(i).transpose()).squaredNorm();
  }
  return fit + ridge + margin + solver.beta1 * pool_term - solver.beta2 * labeled_term;
}

double objective_mcc(const ModelState& state, const GramCache& caches,
                     const Eigen::MatrixXd& y_L, int q_pool,
                     const SolverConfig& solver, const KernelConfig& kernel) {
  const int l = caches.l();
  const int u = caches.u();
  const int c = static_cast<int>(state.theta.rows());
  const double gamma = kernel.gamma_label();

  const Eigen::MatrixXd f_L = state.theta * caches.K_LL;
  const Eigen::MatrixXd f_U = state.theta * caches.K_LU;
  const Eigen::VectorXd f_q = f_U.col(q_pool);

  double fit = 0.0;
  for (int i = 0; i < l; ++i) {
    for (int k = 0; k < c; ++k) {
      const double r = y_L(i, k) - f_L(k, i);
      fit += std::exp(-gamma * r * r);
    }
  }
  // Ridge coefficient gamma*lambda: the convex-conjugate transform of each
  // exp(-gamma r^2) term produces quadratics scaled by gamma, so the
  // maximized objective whose exact reweighting surrogate is objective_hq
  // (which uses plain lambda) carries gamma*lambda here. Anything else breaks
  // the non-decrease of this value across outer reweighting passes.
  const double ridge = gamma * solver.lambda *
                       (state.theta * caches.K_LL * state.theta.transpose()).trace();
  double margin = 0.0;
  for (int k = 0; k < c; ++k) {
    const double a = std::abs(f_q(k));
    margin += std::exp(-gamma * (1.0 + 2.0 * a + f_q(k) * f_q(k)));
  }
  double pool_term = 0.0;
  for (int i = 0; i < u; ++i) {
    pool_term += std::exp(-gamma * (f_q - f_U.col(i)).squaredNorm()) * caches.w_UU(q_pool, i);
  }
  pool_term /= static_cast<double>(u);
  double labeled_term = 0.0;
  for (int i = 0; i < l; ++i) {
    labeled_term +=
        std::exp(-gamma * (f_q - y_L.row(i).transpose()).squaredNorm()) * caches.w_UL(q_pool, i);
  }
  labeled_term /= static_cast<double>(l);

  return fit - ridge + margin + solver.beta1 * pool_term - solver.beta2 * labeled_term;
}

double objective_mcc_fit(const ModelState& state, const GramCache& caches,
                         const Eigen::MatrixXd& y_L, const SolverConfig& solver,
                         const KernelConfig& kernel) {
  const int l = caches.l();
  const int c = static_cast<int>(state.theta.rows());
  const double gamma = kernel.gamma_label();
  const Eigen::MatrixXd f_L = state.theta * caches.K_LL;
  double fit = 0.0;
  for (int i = 0; i < l; ++i) {
    for (int k = 0; k < c; ++k) {
      const double r = y_L(i, k) - f_L(k, i);
      fit += std::exp(-gamma * r * r);
    }
  }
  // Same gamma*lambda pairing as objective_mcc.
  const double ridge = gamma * solver.lambda *
                       (state.theta * caches.K_LL * state.theta.transpose()).trace();
  return fit - ridge;
}

namespace {

double soft_threshold(double z, double tau) {
  if (z > tau) return z - tau;
  if (z < -tau) return z + tau;
  return 0.0;
}

// Per-label quadratic system of the fixed-weight augmented Lagrangian:
//   B_k theta_k = r0_k + (eta_k + rho * e_k) * K_q
// with
//   B_k = 2 K_LL diag(m_k) K_LL + 2 lambda K_LL + 2 beta1 D_h
//         + (rho - 2 beta2 sum(v*)) K_q K_q^T
//   r0_k = 2 K_LL (m_k o y_k) - 2 beta2 (sum_i v*_i y_ik) K_q
// D_h = sum_i h*_i (K_q - K^U_i)(K_q - K^U_i)^T is shared across labels.
// Factorizations are cached so ADMM iterations only pay a back-substitution.
struct ThetaSystem {
  std::vector<Eigen::LDLT<Eigen::MatrixXd>> factorization;
  std::vector<Eigen::VectorXd> r0;
  Eigen::VectorXd k_q;
  bool has_candidate = false;

  Eigen::VectorXd solve(int label, double eta_k, double rho_e_k) const {
    if (!has_candidate) return factorization[static_cast<std::size_t>(label)].solve(r0[static_cast<std::size_t>(label)]);
    return factorization[static_cast<std::size_t>(label)].solve(
        r0[static_cast<std::size_t>(label)] + (eta_k + rho_e_k) * k_q);
  }
};

Eigen::LDLT<Eigen::MatrixXd> factorize_or_throw(Eigen::MatrixXd B, int label) {
  Eigen::LDLT<Eigen::MatrixXd> ldlt(B);
  auto condition = [&]() {
    const Eigen::VectorXd d = ldlt.vectorD().cwiseAbs();
    const double dmin = d.minCoeff();
    return dmin > 0.0 ? d.maxCoeff() / dmin : std::numeric_limits<double>::infinity();
  };
  if (ldlt.info() == Eigen::Success && condition() < 1e15) return ldlt;
  // Near-singular systems show up when lambda is tiny and l is small; retry
  // once with a small diagonal jitter before giving up.
  const double jitter = 1e-10 * (1.0 + B.diagonal().cwiseAbs().mean());
  B.diagonal().array() += jitter;
  ldlt.compute(B);
  if (ldlt.info() == Eigen::Success && condition() < 1e15) return ldlt;
  throw solver_error("theta system is numerically singular", label, condition());
}

ThetaSystem assemble_theta_system(const HQWeights& weights, const GramCache& caches,
                                  const Eigen::MatrixXd& y_L, int q_pool, double rho,
                                  const SolverConfig& solver, bool with_candidate) {
  const int c = static_cast<int>(y_L.cols());

  ThetaSystem sys;
  sys.has_candidate = with_candidate;

  Eigen::MatrixXd base = 2.0 * solver.lambda * caches.K_LL;
  if (with_candidate) {
    sys.k_q = caches.K_LU.col(q_pool);
    // D_h expanded around K_q to keep the assembly at one l x u GEMM.
    const Eigen::MatrixXd scaled = caches.K_LU * weights.Hstar.asDiagonal();
    const Eigen::MatrixXd second_moment = scaled * caches.K_LU.transpose();
    const Eigen::VectorXd first_moment = caches.K_LU * weights.Hstar;
    const double mass = weights.Hstar.sum();
    Eigen::MatrixXd d_h = second_moment;
    d_h.noalias() += mass * (sys.k_q * sys.k_q.transpose());
    d_h.noalias() -= sys.k_q * first_moment.transpose();
    d_h.noalias() -= first_moment * sys.k_q.transpose();
    base.noalias() += 2.0 * solver.beta1 * d_h;
    base.noalias() +=
        (rho - 2.0 * solver.beta2 * weights.Vstar.sum()) * (sys.k_q * sys.k_q.transpose());
  }

  sys.factorization.reserve(static_cast<std::size_t>(c));
  sys.r0.reserve(static_cast<std::size_t>(c));
  for (int k = 0; k < c; ++k) {
    const Eigen::VectorXd m_k = weights.M.col(k);
    Eigen::MatrixXd B = base;
    B.noalias() += 2.0 * (caches.K_LL * m_k.asDiagonal()) * caches.K_LL;
    Eigen::VectorXd r0 = 2.0 * (caches.K_LL * m_k.cwiseProduct(y_L.col(k)));
    if (with_candidate) {
      const double v_dot_y = weights.Vstar.dot(y_L.col(k));
      r0.noalias() -= (2.0 * solver.beta2 * v_dot_y) * sys.k_q;
    }
    sys.factorization.push_back(factorize_or_throw(std::move(B), k));
    sys.r0.push_back(std::move(r0));
  }
  return sys;
}

}  // namespace

Eigen::MatrixXd update_theta(const ModelState& state, const HQWeights& weights,
                             const GramCache& caches, const Eigen::MatrixXd& y_L,
                             int q_pool, const SolverConfig& solver) {
  const ThetaSystem sys =
      assemble_theta_system(weights, caches, y_L, q_pool, state.rho, solver, true);
  Eigen::MatrixXd theta(y_L.cols(), caches.l());
  for (int k = 0; k < y_L.cols(); ++k) {
    theta.row(k) = sys.solve(k, state.eta(k), state.rho * state.e(k)).transpose();
  }
  return theta;
}

Eigen::VectorXd update_e(const ModelState& state, const HQWeights& weights,
                         const GramCache& caches, int q_pool) {
  const Eigen::VectorXd c = state.theta * caches.K_LU.col(q_pool);
  Eigen::VectorXd e(c.size());
  for (int k = 0; k < c.size(); ++k) {
    const double n = weights.N(k);
    e(k) = soft_threshold(state.rho * c(k) - state.eta(k), 2.0 * n) / (2.0 * n + state.rho);
  }
  return e;
}

Eigen::VectorXd update_eta(const ModelState& state, int q_pool, const GramCache& caches) {
  const Eigen::VectorXd c = state.theta * caches.K_LU.col(q_pool);
  return state.eta + state.rho * (state.e - c);
}

namespace {

[[noreturn]] void throw_divergence(const std::vector<double>& trace) {
  std::ostringstream os;
  os << "objective became non-finite; trace:";
  for (double v : trace) os << ' ' << v;
  throw divergence_error(os.str());
}

}  // namespace

std::pair<ModelState, SolveReport> solve_for_candidate(
    int q_pool, const GramCache& caches, const Eigen::MatrixXd& y_L,
    const SolverConfig& solver, const KernelConfig& kernel,
    const ModelState* warm_start, const OuterObserver& observer) {
  solver.validate();
  kernel.validate();
  const int l = caches.l();
  const int c = static_cast<int>(y_L.cols());
  if (q_pool < 0 || q_pool >= caches.u()) {
    throw query_error("solve_for_candidate: candidate outside pool");
  }

  ModelState state = warm_start ? *warm_start : ModelState::zero(c, l, solver.rho);
  if (state.theta.rows() != c || state.theta.cols() != l) {
    throw dimension_error("warm start has wrong shape");
  }
  state.rho = solver.rho;
  state.e = state.theta * caches.K_LU.col(q_pool);
  state.eta.setZero(c);

  SolveReport report;
  double previous = std::numeric_limits<double>::quiet_NaN();
  bool inner_converged = false;

  for (int outer = 0; outer < solver.max_outer; ++outer) {
    const HQWeights weights =
        hq_weights(state.theta, q_pool, caches, y_L, kernel, solver.weight_mode);
    const ThetaSystem sys =
        assemble_theta_system(weights, caches, y_L, q_pool, state.rho, solver, true);

    // Inner ADMM on (theta, e, eta). The primal residual alone can sit at
    // zero right after the e update (when all n_qk vanish e tracks c
    // exactly), so the stop test also watches the dual residual rho*|de|.
    report.primal_residual_trace.clear();
    inner_converged = false;
    for (int inner = 0; inner < solver.max_inner; ++inner) {
      ++report.inner_iterations;
      for (int k = 0; k < c; ++k) {
        state.theta.row(k) = sys.solve(k, state.eta(k), state.rho * state.e(k)).transpose();
      }
      const Eigen::VectorXd c_q = state.theta * sys.k_q;
      const Eigen::VectorXd e_old = state.e;
      for (int k = 0; k < c; ++k) {
        const double n = weights.N(k);
        state.e(k) =
            soft_threshold(state.rho * c_q(k) - state.eta(k), 2.0 * n) / (2.0 * n + state.rho);
      }
      state.eta += state.rho * (state.e - c_q);

      const double primal = (state.e - c_q).lpNorm<Eigen::Infinity>();
      const double dual = state.rho * (state.e - e_old).lpNorm<Eigen::Infinity>();
      report.primal_residual_trace.push_back(primal);
      if (std::max(primal, dual) <= solver.tol_primal) {
        inner_converged = true;
        break;
      }
    }

    ++report.outer_iterations;
    const double objective =
        solver.weight_mode == WeightMode::mcc
            ? objective_mcc(state, caches, y_L, q_pool, solver, kernel)
            : -objective_hq(state, weights, caches, y_L, q_pool, solver);
    report.objective_trace.push_back(objective);
    if (!std::isfinite(objective)) throw_divergence(report.objective_trace);
    if (observer) observer(state, outer);

    if (outer > 0 && std::abs(objective - previous) < solver.tol_obj) {
      report.converged = inner_converged;
      break;
    }
    previous = objective;
  }
  return {std::move(state), std::move(report)};
}

std::pair<ModelState, SolveReport> solve_fit(const GramCache& caches,
                                             const Eigen::MatrixXd& y_L,
                                             const SolverConfig& solver,
                                             const KernelConfig& kernel,
                                             const ModelState* warm_start) {
  solver.validate();
  kernel.validate();
  const int l = caches.l();
  const int c = static_cast<int>(y_L.cols());

  ModelState state = warm_start ? *warm_start : ModelState::zero(c, l, solver.rho);
  if (state.theta.rows() != c || state.theta.cols() != l) {
    throw dimension_error("warm start has wrong shape");
  }
  state.rho = solver.rho;
  state.e.setZero(c);
  state.eta.setZero(c);

  SolveReport report;
  double previous = std::numeric_limits<double>::quiet_NaN();
  const double gamma = kernel.gamma_label();

  for (int outer = 0; outer < solver.max_outer; ++outer) {
    HQWeights weights;
    weights.M.resize(l, c);
    if (solver.weight_mode == WeightMode::mse) {
      weights.M.setOnes();
    } else {
      const Eigen::MatrixXd f_L = state.theta * caches.K_LL;
      for (int i = 0; i < l; ++i) {
        for (int k = 0; k < c; ++k) {
          const double r = y_L(i, k) - f_L(k, i);
          weights.M(i, k) = std::exp(-gamma * r * r);
        }
      }
    }

    const ThetaSystem sys = assemble_theta_system(weights, caches, y_L, 0, state.rho, solver, false);
    for (int k = 0; k < c; ++k) {
      state.theta.row(k) = sys.solve(k, 0.0, 0.0).transpose();
    }
    ++report.outer_iterations;
    ++report.inner_iterations;

    double objective;
    if (solver.weight_mode == WeightMode::mcc) {
      objective = objective_mcc_fit(state, caches, y_L, solver, kernel);
    } else {
      const Eigen::MatrixXd resid = y_L - (state.theta * caches.K_LL).transpose();
      objective = -(resid.squaredNorm() +
                    solver.lambda * (state.theta * caches.K_LL * state.theta.transpose()).trace());
    }
    report.objective_trace.push_back(objective);
    if (!std::isfinite(objective)) throw_divergence(report.objective_trace);

    if (outer > 0 && std::abs(objective - previous) < solver.tol_obj) {
      report.converged = true;
      break;
    }
    previous = objective;
  }
  return {std::move(state), std::move(report)};
}

}  // namespace rmlal
