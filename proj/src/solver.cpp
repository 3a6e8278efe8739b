#include "smf/solver.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <mutex>
#include <random>
#include <thread>

#include <Eigen/QR>

#include "smf/errors.hpp"

namespace smf {

std::string_view to_string(SolverMode m) {
  return m == SolverMode::kPenalty ? "penalty" : "projected";
}

SolverMode parse_solver_mode(std::string_view text) {
  if (text == "penalty") return SolverMode::kPenalty;
  if (text == "projected") return SolverMode::kProjected;
  throw InvalidInput("unknown solver mode '" + std::string(text) + "'");
}

std::string_view to_string(InitScheme s) {
  return s == InitScheme::kUniform ? "uniform" : "anchor";
}

InitScheme parse_init_scheme(std::string_view text) {
  if (text == "uniform") return InitScheme::kUniform;
  if (text == "anchor") return InitScheme::kAnchorRows;
  throw InvalidInput("unknown init scheme '" + std::string(text) + "'");
}

void validate(const SolverConfig& c) {
  if (c.rank < 1) throw InvalidInput("rank must be at least 1");
  if (c.max_iter < 1) throw InvalidInput("max_iter must be at least 1");
  if (c.restarts < 1) throw InvalidInput("restarts must be at least 1");
  if (!(c.penalty_sum1 >= 0.0) || !(c.penalty_nonneg >= 0.0)) {
    throw InvalidInput("penalty weights must be non-negative");
  }
  if (!(c.conv_tol > 0.0)) throw InvalidInput("conv_tol must be positive");
  if (!(c.smoothing_end > 0.0) || !(c.smoothing_start >= c.smoothing_end)) {
    throw InvalidInput("smoothing widths must satisfy start >= end > 0");
  }
  if (!(c.rank_tol > 0.0)) throw InvalidInput("rank_tol must be positive");
  if (c.lbfgs_memory < 0) throw InvalidInput("lbfgs_memory must be non-negative");
  if (c.threads < 1) throw InvalidInput("threads must be at least 1");
}

namespace {

// Huber-smoothed |r| and its derivative.
double smooth_abs(double r, double mu) {
  const double a = std::abs(r);
  if (mu <= 0.0) return a;
  return a <= mu ? r * r / (2.0 * mu) : a - 0.5 * mu;
}

double smooth_abs_deriv(double r, double mu) {
  if (mu <= 0.0) return r > 0.0 ? 1.0 : (r < 0.0 ? -1.0 : 0.0);
  return std::clamp(r / mu, -1.0, 1.0);
}

// Smoothed max(0, u) and its derivative.
double smooth_hinge(double u, double mu) {
  if (u <= 0.0) return 0.0;
  if (mu <= 0.0) return u;
  return u <= mu ? u * u / (2.0 * mu) : u - 0.5 * mu;
}

double smooth_hinge_deriv(double u, double mu) {
  if (u <= 0.0) return 0.0;
  if (mu <= 0.0) return 1.0;
  return std::min(u / mu, 1.0);
}

}  // namespace

PenalizedObjective::PenalizedObjective(const DenseMatrix& X, const SolverConfig& config)
    : X_(X), config_(config) {
  // ||X (I - P)||_F = ||R (I - P)||_F for X = Q R, so tall inputs are
  // replaced by their triangular factor for everything except W itself.
  if (X.rows() > X.cols()) {
    const Eigen::HouseholderQR<DenseMatrix> qr(X);
    reduced_X_ = qr.matrixQR().topRows(X.cols()).triangularView<Eigen::Upper>();
  } else {
    reduced_X_ = X;
  }
}

bool PenalizedObjective::penalize_w_sums() const {
  if (!w_is_stochastic(config_.orientation)) return false;
  return config_.orientation == Orientation::kWRowsSumToOne || config_.penalize_w;
}

bool PenalizedObjective::penalize_w_signs() const {
  return config_.orientation == Orientation::kWRowsSumToOne || config_.penalize_w;
}

PenalizedObjective::Evaluation PenalizedObjective::evaluate(const DenseMatrix& H) const {
  Evaluation e;
  e.H = H;
  if (!H.allFinite()) return e;
  auto pinv = pseudoinverse_with_rank(H, config_.rank_tol);
  if (pinv.rank < H.rows()) return e;
  e.full_rank = true;
  e.H_pinv = std::move(pinv.inverse);
  e.W.noalias() = X_ * e.H_pinv;
  e.reduced_W.noalias() = reduced_X_ * e.H_pinv;
  e.reduced_residual = reduced_X_;
  e.reduced_residual.noalias() -= e.reduced_W * H;
  e.residual_norm = e.reduced_residual.norm();
  return e;
}

double PenalizedObjective::value(const Evaluation& e, double mu) const {
  if (!e.full_rank) return std::numeric_limits<double>::infinity();
  const double w_sum = config_.penalty_sum1;
  const double w_neg = config_.penalty_nonneg;

  double f = mu > 0.0 ? std::sqrt(e.residual_norm * e.residual_norm + mu * mu) : e.residual_norm;

  if (penalize_w_sums()) {
    double s = 0.0;
    for (Index i = 0; i < e.W.rows(); ++i) s += smooth_abs(e.W.row(i).sum() - 1.0, mu);
    f += w_sum * s;
  }
  if (penalize_w_signs()) {
    double s = 0.0;
    const double* w = e.W.data();
    for (Index k = 0; k < e.W.size(); ++k) s += smooth_hinge(-w[k], mu);
    f += w_neg * s;
  }
  double h_box = 0.0;
  const double* h = e.H.data();
  for (Index k = 0; k < e.H.size(); ++k) {
    h_box += smooth_hinge(-h[k], mu) + smooth_hinge(h[k] - 1.0, mu);
  }
  f += w_neg * h_box;
  if (h_is_stochastic(config_.orientation)) {
    double s = 0.0;
    for (Index r = 0; r < e.H.rows(); ++r) s += smooth_abs(e.H.row(r).sum() - 1.0, mu);
    f += w_sum * s;
  }
  return f;
}

DenseMatrix PenalizedObjective::gradient(const Evaluation& e, double mu) const {
  if (!e.full_rank) throw RankDeficient(0, static_cast<std::size_t>(e.H.rows()));
  const double w_sum = config_.penalty_sum1;
  const double w_neg = config_.penalty_nonneg;
  const Index n = e.W.rows();
  const Index r = e.W.cols();

  // dValue/dW for the penalties on W = X H+.
  DenseMatrix gw = DenseMatrix::Zero(n, r);
  if (penalize_w_sums()) {
    for (Index i = 0; i < n; ++i) {
      gw.row(i).array() += w_sum * smooth_abs_deriv(e.W.row(i).sum() - 1.0, mu);
    }
  }
  if (penalize_w_signs()) {
    for (Index i = 0; i < n; ++i) {
      for (Index k = 0; k < r; ++k) gw(i, k) -= w_neg * smooth_hinge_deriv(-e.W(i, k), mu);
    }
  }

  // With S = H H^T, P = H+ H and Res = X(I - P):
  //   d||Res||^2 / dH         = -2 W^T Res
  //   d<G, X H+> / dH          = -W^T G H+^T + S^-1 G^T Res
  // and S^-1 = H+^T H+ for full row rank H. W^T Res equals the same product
  // on the triangular factor, so only G^T X touches all N rows.
  const double denom = mu > 0.0 ? std::sqrt(e.residual_norm * e.residual_norm + mu * mu)
                                 : e.residual_norm;
  const DenseMatrix s_inv = e.H_pinv.transpose() * e.H_pinv;
  DenseMatrix gx = gw.transpose() * X_;
  gx -= (gx * e.H_pinv) * e.H;
  DenseMatrix grad = s_inv * gx;
  if (denom > 0.0) grad.noalias() -= e.reduced_W.transpose() * e.reduced_residual / denom;
  const DenseMatrix wg = e.W.transpose() * gw;
  grad.noalias() -= wg * e.H_pinv.transpose();

  for (Index i = 0; i < e.H.rows(); ++i) {
    for (Index j = 0; j < e.H.cols(); ++j) {
      const double v = e.H(i, j);
      grad(i, j) += w_neg * (smooth_hinge_deriv(v - 1.0, mu) - smooth_hinge_deriv(-v, mu));
    }
  }
  if (h_is_stochastic(config_.orientation)) {
    for (Index i = 0; i < e.H.rows(); ++i) {
      grad.row(i).array() += w_sum * smooth_abs_deriv(e.H.row(i).sum() - 1.0, mu);
    }
  }
  return grad;
}

double objective(const DenseMatrix& X, const DenseMatrix& H, const SolverConfig& config) {
  require_finite(X, "X");
  require_finite(H, "H");
  if (H.cols() != X.cols()) throw InvalidInput("H must have as many columns as X");
  PenalizedObjective obj(X, config);
  const auto e = obj.evaluate(H);
  if (!e.full_rank) {
    const auto rank = pseudoinverse_with_rank(H, config.rank_tol).rank;
    throw RankDeficient(static_cast<std::size_t>(rank), static_cast<std::size_t>(H.rows()));
  }
  return obj.value(e, 0.0);
}

DenseMatrix concentrate_W(const DenseMatrix& X, const DenseMatrix& H, double rank_tol) {
  require_finite(X, "X");
  require_finite(H, "H");
  if (H.cols() != X.cols()) throw InvalidInput("H must have as many columns as X");
  auto pinv = pseudoinverse_with_rank(H, rank_tol);
  if (pinv.rank < H.rows()) {
    throw RankDeficient(static_cast<std::size_t>(pinv.rank), static_cast<std::size_t>(H.rows()));
  }
  return X * pinv.inverse;
}

std::vector<Index> successive_projection_rows(const DenseMatrix& X, Index count) {
  DenseMatrix rest = X;
  std::vector<Index> picked;
  for (Index k = 0; k < count; ++k) {
    Index best = 0;
    const Vector norms = rest.rowwise().squaredNorm();
    norms.maxCoeff(&best);
    picked.push_back(best);
    const double len = std::sqrt(norms(best));
    if (len == 0.0) continue;
    const Vector u = rest.row(best).transpose() / len;
    const Vector along = rest * u;
    rest.noalias() -= along * u.transpose();
  }
  return picked;
}

namespace {

void project_h(DenseMatrix& H, Orientation o) {
  if (h_is_stochastic(o)) {
    simplex_project_rows(H);
  } else {
    H = H.cwiseMax(0.0).cwiseMin(1.0);
  }
}

DenseMatrix uniform_rows(Index rows, Index cols, Orientation o, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  DenseMatrix H(rows, cols);
  for (Index k = 0; k < H.size(); ++k) H.data()[k] = unit(rng);
  if (h_is_stochastic(o)) {
    for (Index r = 0; r < rows; ++r) H.row(r) /= H.row(r).sum();
  }
  return H;
}

DenseMatrix initial_h(const DenseMatrix& X, const SolverConfig& c, int restart,
                      const std::vector<Index>& anchors) {
  std::mt19937_64 rng(c.seed + static_cast<std::uint64_t>(restart));
  DenseMatrix noise = uniform_rows(c.rank, X.cols(), c.orientation, rng);
  if (c.init == InitScheme::kUniform || anchors.empty()) return noise;

  DenseMatrix H(c.rank, X.cols());
  for (Index r = 0; r < c.rank; ++r) H.row(r) = X.row(anchors[static_cast<std::size_t>(r)]);
  if (h_is_stochastic(c.orientation)) {
    for (Index r = 0; r < c.rank; ++r) {
      const double s = H.row(r).sum();
      if (s > 0.0) H.row(r) /= s;
    }
  }
  if (restart > 0) H = 0.8 * H + 0.2 * noise;
  if (pseudoinverse_with_rank(H, c.rank_tol).rank < c.rank) return noise;
  return H;
}

struct RestartOutcome {
  DenseMatrix H;
  double objective = std::numeric_limits<double>::infinity();
  std::vector<double> trace;
  int iterations = 0;
  bool converged = false;
};

// Two-loop recursion; returns the quasi-Newton direction for gradient g.
DenseMatrix lbfgs_direction(const DenseMatrix& g, const std::deque<DenseMatrix>& s,
                            const std::deque<DenseMatrix>& y) {
  if (s.empty()) {
    const double norm = g.norm();
    return norm > 1.0 ? DenseMatrix(g / norm) : g;
  }
  DenseMatrix q = g;
  std::vector<double> alpha(s.size()), rho(s.size());
  for (std::size_t k = s.size(); k-- > 0;) {
    rho[k] = 1.0 / y[k].cwiseProduct(s[k]).sum();
    alpha[k] = rho[k] * s[k].cwiseProduct(q).sum();
    q -= alpha[k] * y[k];
  }
  q *= s.back().cwiseProduct(y.back()).sum() / y.back().squaredNorm();
  for (std::size_t k = 0; k < s.size(); ++k) {
    const double beta = rho[k] * y[k].cwiseProduct(q).sum();
    q += (alpha[k] - beta) * s[k];
  }
  return q;
}

RestartOutcome run_restart(const DenseMatrix& X, const SolverConfig& c, int restart,
                           const std::vector<Index>& anchors, const ProgressCallback& progress,
                           std::mutex& progress_mutex) {
  const PenalizedObjective obj(X, c);
  const bool projected = c.mode == SolverMode::kProjected;

  DenseMatrix H = initial_h(X, c, restart, anchors);
  if (projected) project_h(H, c.orientation);
  auto current = obj.evaluate(H);
  if (!current.full_rank) throw NumericalError("initial H is rank deficient");

  RestartOutcome out;
  out.H = H;
  out.objective = obj.value(current, 0.0);
  out.trace.push_back(out.objective);

  double mu = c.smoothing_start;
  int iter = 0;
  while (true) {
    const bool last_stage = mu <= c.smoothing_end * (1.0 + 1e-12);
    const double stage_tol = last_stage ? c.conv_tol : std::max(c.conv_tol, 1e-6);
    double f = obj.value(current, mu);
    DenseMatrix g = obj.gradient(current, mu);
    std::deque<DenseMatrix> mem_s, mem_y;
    bool stage_done = false;

    while (iter < c.max_iter) {
      ++iter;
      DenseMatrix d = projected ? g : lbfgs_direction(g, mem_s, mem_y);
      double slope = d.cwiseProduct(g).sum();
      if (!projected && !(slope > 0.0)) {
        mem_s.clear();
        mem_y.clear();
        d = lbfgs_direction(g, mem_s, mem_y);
        slope = d.cwiseProduct(g).sum();
      }

      bool accepted = false;
      PenalizedObjective::Evaluation trial;
      double f_trial = f;
      for (double t = 1.0; t > 1e-20; t *= 0.5) {
        DenseMatrix candidate = current.H - t * d;
        if (projected) project_h(candidate, c.orientation);
        trial = obj.evaluate(candidate);
        f_trial = obj.value(trial, mu);
        const double decrease = projected ? g.cwiseProduct(current.H - candidate).sum() : t * slope;
        if (f_trial < f - 1e-4 * decrease) {
          accepted = true;
          break;
        }
      }
      if (!accepted) {
        stage_done = true;  // no descent left at this smoothing width
        break;
      }

      DenseMatrix g_trial = obj.gradient(trial, mu);
      if (!projected && c.lbfgs_memory > 0) {
        DenseMatrix step = trial.H - current.H;
        DenseMatrix dg = g_trial - g;
        if (step.cwiseProduct(dg).sum() > 1e-12 * dg.squaredNorm()) {
          mem_s.push_back(std::move(step));
          mem_y.push_back(std::move(dg));
          if (static_cast<int>(mem_s.size()) > c.lbfgs_memory) {
            mem_s.pop_front();
            mem_y.pop_front();
          }
        }
      }
      const double rel = (f - f_trial) / std::max(std::abs(f), 1e-300);
      current = std::move(trial);
      f = f_trial;
      g = std::move(g_trial);

      const double exact = obj.value(current, 0.0);
      if (exact <= out.objective) {
        out.objective = exact;
        out.H = current.H;
      }
      out.trace.push_back(out.objective);
      if (progress) {
        std::lock_guard lock(progress_mutex);
        progress(iter, out.objective);
      }
      if (rel < stage_tol) {
        stage_done = true;
        break;
      }
    }
    if (!stage_done) break;
    if (last_stage) {
      out.converged = true;
      break;
    }
    mu = std::max(mu * 0.1, c.smoothing_end);
  }
  out.iterations = iter;
  return out;
}

void check_input(const DenseMatrix& X, const SolverConfig& c) {
  validate(c);
  require_finite(X, "X");
  if ((X.array() < 0.0).any()) throw InvalidInput("X must be non-negative");
  if (c.rank >= std::min(X.rows(), X.cols())) {
    throw InvalidInput("rank " + std::to_string(c.rank) + " must be below min(N, M) = " +
                       std::to_string(std::min(X.rows(), X.cols())));
  }
  if (h_is_stochastic(c.orientation)) {
    for (Index i = 0; i < X.rows(); ++i) {
      if (std::abs(X.row(i).sum() - 1.0) > 1e-6) {
        throw InvalidInput("topic orientation needs rows of X summing to 1; row " +
                           std::to_string(i) + " sums to " + std::to_string(X.row(i).sum()));
      }
    }
  }
}

DenseMatrix feasible_w(const DenseMatrix& X, const DenseMatrix& H, const SolverConfig& c) {
  DenseMatrix W = concentrate_W(X, H, c.rank_tol);
  if (w_is_stochastic(c.orientation)) {
    simplex_project_rows(W);
  } else {
    W = W.cwiseMax(0.0);
  }
  return W;
}

// With one factor the only point of the simplex is 1, so W = 1_N and the
// least-squares H is the column mean of X.
SolveResult solve_rank_one(const DenseMatrix& X, const SolverConfig& c) {
  SolveResult res;
  DenseMatrix H = X.colwise().mean();
  if (!h_is_stochastic(c.orientation)) H = H.cwiseMin(1.0);
  res.factors.orientation = c.orientation;
  res.factors.W = DenseMatrix::Ones(X.rows(), 1);
  res.factors.H = H;
  if (H.isZero(0.0)) throw RankDeficient(0, 1);
  res.objective = objective(X, H, c);
  res.objective_trace = {res.objective};
  res.converged = true;
  return res;
}

}  // namespace

SolveResult factorize(const DenseMatrix& X, const SolverConfig& config,
                      const ProgressCallback& progress) {
  check_input(X, config);
  if (config.rank == 1) return solve_rank_one(X, config);

  std::vector<Index> anchors;
  if (config.init == InitScheme::kAnchorRows) anchors = successive_projection_rows(X, config.rank);

  std::vector<RestartOutcome> outcomes(static_cast<std::size_t>(config.restarts));
  std::vector<std::exception_ptr> errors(outcomes.size());
  std::mutex progress_mutex;
  auto work = [&](int restart) {
    try {
      outcomes[static_cast<std::size_t>(restart)] =
          run_restart(X, config, restart, anchors, progress, progress_mutex);
    } catch (...) {
      errors[static_cast<std::size_t>(restart)] = std::current_exception();
    }
  };

  const int workers = std::min(config.threads, config.restarts);
  if (workers <= 1) {
    for (int k = 0; k < config.restarts; ++k) work(k);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (int k = w; k < config.restarts; k += workers) work(k);
      });
    }
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  // Lowest objective wins; ties go to the lowest restart index.
  std::size_t best = 0;
  for (std::size_t k = 1; k < outcomes.size(); ++k) {
    if (outcomes[k].objective < outcomes[best].objective) best = k;
  }
  auto& win = outcomes[best];

  SolveResult res;
  res.factors.orientation = config.orientation;
  res.factors.H = std::move(win.H);
  res.factors.W = feasible_w(X, res.factors.H, config);
  res.objective = win.objective;
  res.objective_trace = std::move(win.trace);
  res.iterations = win.iterations;
  res.converged = win.converged;
  res.best_restart = static_cast<int>(best);
  return res;
}

}  // namespace smf
