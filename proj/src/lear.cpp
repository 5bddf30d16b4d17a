#include "epf/lear.hpp"

#include <algorithm>
#include <cmath>

namespace epf {

namespace {

double soft_threshold(double a, double t) {
  if (a > t) return a - t;
  if (a < -t) return a + t;
  return 0.0;
}

// Coordinate descent in covariance form: the iterate keeps
// g = v - G*theta (== X^T residual), so a coordinate that stays at zero
// costs one comparison and an update costs one column axpy.
struct GramFitter {
  const Eigen::MatrixXd& G;
  const Eigen::VectorXd& v;
  double lambda;
  Eigen::VectorXd theta;
  Eigen::VectorXd g;

  void refresh_gradient() { g.noalias() = v - G * theta; }

  double pass(bool active_only) {
    const double half_lambda = 0.5 * lambda;
    const int p = static_cast<int>(v.size());
    double max_delta = 0.0;
    for (int j = 0; j < p; ++j) {
      const double old = theta[j];
      if (active_only && old == 0.0) continue;
      const double gjj = G(j, j);
      if (gjj <= 0.0) continue;  // zero column: coefficient pinned at 0
      if (old == 0.0 && std::abs(g[j]) <= half_lambda) continue;
      const double rho = g[j] + gjj * old;
      const double next = soft_threshold(rho, half_lambda) / gjj;
      const double delta = next - old;
      if (delta != 0.0) {
        g.noalias() -= G.col(j) * delta;
        theta[j] = next;
        max_delta = std::max(max_delta, std::abs(delta));
      }
    }
    return max_delta;
  }

  double kkt_violation() const {
    const int p = static_cast<int>(v.size());
    double worst = 0.0;
    for (int j = 0; j < p; ++j) {
      const double twog = 2.0 * g[j];
      const double viol =
          theta[j] == 0.0
              ? std::max(0.0, std::abs(twog) - lambda)
              : std::abs(twog - (theta[j] > 0.0 ? lambda : -lambda));
      worst = std::max(worst, viol);
    }
    return worst;
  }

  double objective(double y_squared) const {
    return y_squared - 2.0 * theta.dot(v) +
           theta.dot(G.selfadjointView<Eigen::Lower>() * theta) +
           lambda * theta.lpNorm<1>();
  }
};

// kkt_tol <= 0 disables the stationarity polish.
Eigen::VectorXd fit_gram(const Eigen::MatrixXd& G, const Eigen::VectorXd& v,
                         double lambda, Eigen::VectorXd theta0,
                         const FitOptions& opts, double kkt_tol,
                         double y_squared = 0.0,
                         std::vector<double>* objective_per_sweep = nullptr) {
  GramFitter f{G, v, lambda, std::move(theta0), {}};
  f.refresh_gradient();
  int sweeps = 0;
  auto record = [&] {
    if (objective_per_sweep) objective_per_sweep->push_back(f.objective(y_squared));
  };
  while (sweeps < opts.max_sweeps) {
    const double delta = f.pass(false);
    ++sweeps;
    record();
    if (delta < opts.tol) {
      if (kkt_tol <= 0.0) break;
      f.refresh_gradient();
      if (f.kkt_violation() <= kkt_tol) break;
      continue;
    }
    while (sweeps < opts.max_sweeps) {
      const double inner = f.pass(true);
      ++sweeps;
      record();
      if (inner < opts.tol) break;
    }
  }
  return std::move(f.theta);
}

double resolve_kkt_tol(const FitOptions& opts, double lmax) {
  if (opts.kkt_tol > 0.0) return opts.kkt_tol;
  if (opts.kkt_tol < 0.0) return 0.0;
  return std::max(1e-9, 1e-12 * lmax);
}

std::vector<double> make_grid(double lmax, int grid_size) {
  std::vector<double> grid(grid_size);
  for (int i = 0; i < grid_size; ++i) {
    grid[i] = lmax * std::pow(10.0, -4.0 * (grid_size - 1 - i) / (grid_size - 1));
  }
  return grid;
}

std::vector<int> fold_bounds(int rows, int folds) {
  std::vector<int> b(folds + 1);
  for (int f = 0; f <= folds; ++f) {
    b[f] = static_cast<int>(static_cast<long>(f) * rows / folds);
  }
  return b;
}

// Pooled out-of-fold SSE for every grid point (ascending grid, path fitted
// from the largest penalty down with warm starts).
std::vector<double> cv_sse(const Eigen::Ref<const Eigen::MatrixXd>& X,
                           const Eigen::Ref<const Eigen::VectorXd>& y,
                           const std::vector<Eigen::MatrixXd>& G_blocks,
                           const std::vector<Eigen::VectorXd>& v_blocks,
                           const std::vector<int>& bounds,
                           const std::vector<double>& grid,
                           const FitOptions& opts) {
  const int folds = static_cast<int>(G_blocks.size());
  const int p = static_cast<int>(X.cols());
  std::vector<double> sse(grid.size(), 0.0);
  Eigen::MatrixXd G_train(p, p);
  Eigen::VectorXd v_train(p);
  for (int f = 0; f < folds; ++f) {
    G_train.setZero();
    v_train.setZero();
    for (int b = 0; b < folds; ++b) {
      if (b == f) continue;
      G_train += G_blocks[b];
      v_train += v_blocks[b];
    }
    const int row0 = bounds[f];
    const int nrows = bounds[f + 1] - bounds[f];
    auto X_f = X.middleRows(row0, nrows);
    auto y_f = y.segment(row0, nrows);
    Eigen::VectorXd theta = Eigen::VectorXd::Zero(p);
    Eigen::VectorXd pred(nrows);
    for (int gi = static_cast<int>(grid.size()) - 1; gi >= 0; --gi) {
      theta = fit_gram(G_train, v_train, grid[gi], std::move(theta), opts, 0.0);
      pred.setZero();
      for (int j = 0; j < p; ++j) {
        if (theta[j] != 0.0) pred.noalias() += X_f.col(j) * theta[j];
      }
      sse[gi] += (y_f - pred).squaredNorm();
    }
  }
  return sse;
}

// Strictly-better comparisons walking from the largest penalty down leave
// ties at the sparser end of the grid.
int pick_lambda_index(const std::vector<double>& curve) {
  int best = static_cast<int>(curve.size()) - 1;
  for (int gi = best - 1; gi >= 0; --gi) {
    if (curve[gi] < curve[best]) best = gi;
  }
  return best;
}

void check_finite(const Eigen::Ref<const Eigen::MatrixXd>& X,
                  const Eigen::Ref<const Eigen::MatrixXd>& Y) {
  if (!X.allFinite()) throw NonFinite("design matrix contains non-finite values");
  if (!Y.allFinite()) throw NonFinite("target contains non-finite values");
}

int require_lags(const TransformedSeries& s, const char* name) {
  if (s.n_days() < 1) throw LagUnavailable(std::string(name) + " series is empty");
  return s.first_valid;
}

}  // namespace

Design build_design(const TransformedSeries& u_price,
                    const TransformedSeries& u_exog1,
                    const TransformedSeries& u_exog2,
                    const std::vector<int>& day_of_week,
                    int day_begin, int day_end) {
  const int n_price = u_price.n_days();
  const int min_lag = std::max({require_lags(u_price, "price"),
                                require_lags(u_exog1, "exog1"),
                                require_lags(u_exog2, "exog2")});
  if (day_end > n_price) {
    throw LagUnavailable("target range ends past the price series");
  }
  if (day_begin - 7 < min_lag) {
    throw LagUnavailable("day " + std::to_string(day_begin) +
                         " lacks a 7-day lag (history starts at day " +
                         std::to_string(min_lag) + ")");
  }
  if (u_exog1.n_days() < day_end || u_exog2.n_days() < day_end ||
      static_cast<int>(day_of_week.size()) < day_end) {
    throw LagUnavailable("exogenous/day-of-week series shorter than target range");
  }
  if (day_end < day_begin) throw InvalidArgument("empty target day range");

  const int rows = day_end - day_begin;
  Design d;
  d.X = Eigen::MatrixXd::Zero(rows, kNumRegressors);
  d.Y = Eigen::MatrixXd(rows, 24);
  d.row_days.resize(rows);
  for (int r = 0; r < rows; ++r) {
    const int day = day_begin + r;
    d.row_days[r] = day;
    d.X.block(r, 0, 1, 24) = u_price.values.row(day - 1);
    d.X.block(r, 24, 1, 24) = u_price.values.row(day - 2);
    d.X.block(r, 48, 1, 24) = u_price.values.row(day - 3);
    d.X.block(r, 72, 1, 24) = u_price.values.row(day - 7);
    d.X.block(r, 96, 1, 24) = u_exog1.values.row(day);
    d.X.block(r, 120, 1, 24) = u_exog2.values.row(day);
    d.X.block(r, 144, 1, 24) = u_exog1.values.row(day - 1);
    d.X.block(r, 168, 1, 24) = u_exog2.values.row(day - 1);
    d.X.block(r, 192, 1, 24) = u_exog1.values.row(day - 7);
    d.X.block(r, 216, 1, 24) = u_exog2.values.row(day - 7);
    const int dow = day_of_week[day];
    if (dow < 1 || dow > 7) throw InvalidArgument("day_of_week outside 1..7");
    d.X(r, 240 + dow - 1) = 1.0;
    d.Y.row(r) = u_price.values.row(day);
  }
  return d;
}

FeatureMatrix build_features(const TransformedSeries& u_price,
                             const TransformedSeries& u_exog1,
                             const TransformedSeries& u_exog2,
                             const std::vector<int>& day_of_week,
                             int day_begin, int day_end, int hour) {
  if (hour < 0 || hour > 23) throw InvalidArgument("hour outside 0..23");
  Design d = build_design(u_price, u_exog1, u_exog2, day_of_week, day_begin, day_end);
  return FeatureMatrix{std::move(d.X), d.Y.col(hour), std::move(d.row_days), hour};
}

Eigen::VectorXd build_feature_row(const TransformedSeries& u_price,
                                  const TransformedSeries& u_exog1,
                                  const TransformedSeries& u_exog2,
                                  int day_of_week, int day) {
  const int min_lag = std::max({require_lags(u_price, "price"),
                                require_lags(u_exog1, "exog1"),
                                require_lags(u_exog2, "exog2")});
  if (day - 7 < min_lag || day > u_price.n_days()) {
    throw LagUnavailable("day " + std::to_string(day) +
                         " lacks the lags needed for a feature row");
  }
  // exogenous values for the prediction day itself are day-ahead known
  if (u_exog1.n_days() < day + 1 || u_exog2.n_days() < day + 1) {
    throw LagUnavailable("exogenous series lack the prediction day's values");
  }
  if (day_of_week < 1 || day_of_week > 7) {
    throw InvalidArgument("day_of_week outside 1..7");
  }
  Eigen::VectorXd f = Eigen::VectorXd::Zero(kNumRegressors);
  f.segment(0, 24) = u_price.values.row(day - 1);
  f.segment(24, 24) = u_price.values.row(day - 2);
  f.segment(48, 24) = u_price.values.row(day - 3);
  f.segment(72, 24) = u_price.values.row(day - 7);
  f.segment(96, 24) = u_exog1.values.row(day);
  f.segment(120, 24) = u_exog2.values.row(day);
  f.segment(144, 24) = u_exog1.values.row(day - 1);
  f.segment(168, 24) = u_exog2.values.row(day - 1);
  f.segment(192, 24) = u_exog1.values.row(day - 7);
  f.segment(216, 24) = u_exog2.values.row(day - 7);
  f[240 + day_of_week - 1] = 1.0;
  return f;
}

double lambda_max(const Eigen::Ref<const Eigen::MatrixXd>& X,
                  const Eigen::Ref<const Eigen::VectorXd>& y) {
  return 2.0 * (X.transpose() * y).cwiseAbs().maxCoeff();
}

Eigen::VectorXd fit_lasso(const Eigen::Ref<const Eigen::MatrixXd>& X,
                          const Eigen::Ref<const Eigen::VectorXd>& y,
                          double lambda, const FitOptions& opts,
                          std::vector<double>* objective_per_sweep) {
  if (X.rows() < 1) throw InvalidArgument("design matrix has no rows");
  if (X.rows() != y.size()) throw InvalidArgument("X/y row mismatch");
  check_finite(X, y);
  if (!std::isfinite(lambda) || lambda < 0.0) {
    throw InvalidArgument("lambda must be finite and >= 0");
  }
  const int p = static_cast<int>(X.cols());
  Eigen::MatrixXd G(p, p);
  G.setZero();
  G.selfadjointView<Eigen::Lower>().rankUpdate(X.transpose());
  G.triangularView<Eigen::StrictlyUpper>() = G.transpose();
  const Eigen::VectorXd v = X.transpose() * y;
  const double lmax = 2.0 * v.cwiseAbs().maxCoeff();
  return fit_gram(G, v, lambda, Eigen::VectorXd::Zero(p), opts,
                  resolve_kkt_tol(opts, lmax), y.squaredNorm(),
                  objective_per_sweep);
}

CvResult select_lambda_cv(const Eigen::Ref<const Eigen::MatrixXd>& X,
                          const Eigen::Ref<const Eigen::VectorXd>& y,
                          int n_folds, int grid_size, const FitOptions& opts) {
  const int n = static_cast<int>(X.rows());
  if (n_folds < 2) throw InvalidArgument("need at least 2 folds");
  if (n < n_folds) {
    throw TooFewRows(std::to_string(n) + " rows cannot form " +
                     std::to_string(n_folds) + " folds");
  }
  if (grid_size < 2) throw InvalidArgument("lambda grid needs at least 2 points");
  if (X.rows() != y.size()) throw InvalidArgument("X/y row mismatch");
  check_finite(X, y);

  const int p = static_cast<int>(X.cols());
  const Eigen::VectorXd v_all = X.transpose() * y;
  const double lmax = 2.0 * v_all.cwiseAbs().maxCoeff();
  CvResult result;
  if (lmax == 0.0) {
    // Degenerate target: every penalty yields the zero model.
    result.lambda = 0.0;
    result.grid.assign(grid_size, 0.0);
    result.cv_curve.assign(grid_size, 0.0);
    return result;
  }
  result.grid = make_grid(lmax, grid_size);

  const std::vector<int> bounds = fold_bounds(n, n_folds);
  std::vector<Eigen::MatrixXd> G_blocks(n_folds);
  std::vector<Eigen::VectorXd> v_blocks(n_folds);
  for (int f = 0; f < n_folds; ++f) {
    auto X_f = X.middleRows(bounds[f], bounds[f + 1] - bounds[f]);
    G_blocks[f].resize(p, p);
    G_blocks[f].setZero();
    G_blocks[f].selfadjointView<Eigen::Lower>().rankUpdate(X_f.transpose());
    G_blocks[f].triangularView<Eigen::StrictlyUpper>() = G_blocks[f].transpose();
    v_blocks[f] = X_f.transpose() * y.segment(bounds[f], bounds[f + 1] - bounds[f]);
  }
  std::vector<double> sse = cv_sse(X, y, G_blocks, v_blocks, bounds, result.grid, opts);
  result.cv_curve.resize(sse.size());
  for (size_t i = 0; i < sse.size(); ++i) result.cv_curve[i] = sse[i] / n;
  result.lambda = result.grid[pick_lambda_index(result.cv_curve)];
  return result;
}

LearModelSet fit_lear_day(const Design& design, const CvSpec& cv,
                          const FitOptions& opts, DayFitInfo* info) {
  const int n = static_cast<int>(design.X.rows());
  const int p = static_cast<int>(design.X.cols());
  if (cv.folds < 2) throw InvalidArgument("need at least 2 folds");
  if (n < cv.folds) {
    throw TooFewRows(std::to_string(n) + " training rows cannot form " +
                     std::to_string(cv.folds) + " folds");
  }
  if (cv.grid_size < 2) throw InvalidArgument("lambda grid needs at least 2 points");
  check_finite(design.X, design.Y);

  const std::vector<int> bounds = fold_bounds(n, cv.folds);
  std::vector<Eigen::MatrixXd> G_blocks(cv.folds);
  std::vector<Eigen::MatrixXd> V_blocks(cv.folds);  // p x 24 per block
  Eigen::MatrixXd G_all = Eigen::MatrixXd::Zero(p, p);
  Eigen::MatrixXd V_all = Eigen::MatrixXd::Zero(p, 24);
  for (int f = 0; f < cv.folds; ++f) {
    auto X_f = design.X.middleRows(bounds[f], bounds[f + 1] - bounds[f]);
    auto Y_f = design.Y.middleRows(bounds[f], bounds[f + 1] - bounds[f]);
    G_blocks[f].resize(p, p);
    G_blocks[f].setZero();
    G_blocks[f].selfadjointView<Eigen::Lower>().rankUpdate(X_f.transpose());
    G_blocks[f].triangularView<Eigen::StrictlyUpper>() = G_blocks[f].transpose();
    V_blocks[f] = X_f.transpose() * Y_f;
    G_all += G_blocks[f];
    V_all += V_blocks[f];
  }

  LearModelSet models;
  std::vector<Eigen::VectorXd> v_blocks(cv.folds);
  for (int h = 0; h < 24; ++h) {
    const Eigen::VectorXd v_all = V_all.col(h);
    const Eigen::VectorXd y_h = design.Y.col(h);
    const double y_sq = y_h.squaredNorm();
    const double lmax = 2.0 * v_all.cwiseAbs().maxCoeff();
    HourModel& m = models.hour[h];
    if (lmax == 0.0) {
      m.theta = Eigen::VectorXd::Zero(p);
      m.lambda = 0.0;
      m.training_loss = y_sq;
      if (info) ++info->degenerate_hours;
      continue;
    }
    const std::vector<double> grid = make_grid(lmax, cv.grid_size);
    for (int f = 0; f < cv.folds; ++f) v_blocks[f] = V_blocks[f].col(h);
    std::vector<double> sse =
        cv_sse(design.X, y_h, G_blocks, v_blocks, bounds, grid, opts);
    const int best = pick_lambda_index(sse);
    m.lambda = grid[best];

    // Warm-started path on the full training Gram down to the selection,
    // then a stationarity polish at the selected penalty.
    Eigen::VectorXd theta = Eigen::VectorXd::Zero(p);
    for (int gi = static_cast<int>(grid.size()) - 1; gi > best; --gi) {
      theta = fit_gram(G_all, v_all, grid[gi], std::move(theta), opts, 0.0);
    }
    theta = fit_gram(G_all, v_all, m.lambda, std::move(theta), opts,
                     resolve_kkt_tol(opts, lmax));
    m.training_loss = y_sq - 2.0 * theta.dot(v_all) +
                      theta.dot(G_all.selfadjointView<Eigen::Lower>() * theta) +
                      m.lambda * theta.lpNorm<1>();
    m.theta = std::move(theta);
  }
  return models;
}

Eigen::VectorXd predict(const LearModelSet& models,
                        const Eigen::Ref<const Eigen::VectorXd>& features) {
  if (!features.allFinite()) throw NonFinite("feature vector has non-finite values");
  Eigen::VectorXd out(24);
  for (int h = 0; h < 24; ++h) {
    const auto& theta = models.hour[h].theta;
    if (theta.size() != features.size()) {
      throw InvalidArgument("feature length does not match the fitted model");
    }
    out[h] = theta.dot(features);
  }
  return out;
}

}  // namespace epf
