#pragma once

#include <array>
#include <vector>

#include "epf/transform.hpp"

namespace epf {

inline constexpr int kNumRegressors = 247;

/// Per-hour design matrix. Column layout (all lag blocks 24 wide):
///   [0,24)    standardised price, day d-1
///   [24,48)   standardised price, day d-2
///   [48,72)   standardised price, day d-3
///   [72,96)   standardised price, day d-7
///   [96,120)  exog1, day d        (day-ahead known)
///   [120,144) exog2, day d
///   [144,168) exog1, day d-1
///   [168,192) exog2, day d-1
///   [192,216) exog1, day d-7
///   [216,240) exog2, day d-7
///   [240,247) day-of-week one-hot, Monday = column 240
struct FeatureMatrix {
  Eigen::MatrixXd X;          // rows x 247
  Eigen::VectorXd y;          // target u_d^h per row
  std::vector<int> row_days;  // series day index per row
  int hour = 0;               // 0..23
};

/// The regressor matrix is shared by all 24 hourly targets; only the target
/// column differs. Y holds all 24 targets.
struct Design {
  Eigen::MatrixXd X;
  Eigen::MatrixXd Y;  // rows x 24
  std::vector<int> row_days;
};

Design build_design(const TransformedSeries& u_price,
                    const TransformedSeries& u_exog1,
                    const TransformedSeries& u_exog2,
                    const std::vector<int>& day_of_week,
                    int day_begin, int day_end);  // target days [begin, end)

FeatureMatrix build_features(const TransformedSeries& u_price,
                             const TransformedSeries& u_exog1,
                             const TransformedSeries& u_exog2,
                             const std::vector<int>& day_of_week,
                             int day_begin, int day_end, int hour);

/// Regressor row for one prediction day; `day` may equal the price series
/// length (the day right after it) as long as every lag is available.
Eigen::VectorXd build_feature_row(const TransformedSeries& u_price,
                                  const TransformedSeries& u_exog1,
                                  const TransformedSeries& u_exog2,
                                  int day_of_week, int day);

struct FitOptions {
  double tol = 1e-7;     // max coefficient change per sweep
  int max_sweeps = 10000;
  // Extra stationarity polish after the coefficient rule has converged:
  // 0 picks a tolerance from the problem scale, < 0 disables the polish.
  double kkt_tol = 0.0;
};

/// Smallest penalty at which the LASSO solution is identically zero.
double lambda_max(const Eigen::Ref<const Eigen::MatrixXd>& X,
                  const Eigen::Ref<const Eigen::VectorXd>& y);

/// Minimise ||y - X theta||^2 + lambda * ||theta||_1 by cyclic coordinate
/// descent. Deterministic for identical inputs. When objective_per_sweep is
/// given it receives the objective value after every sweep.
Eigen::VectorXd fit_lasso(const Eigen::Ref<const Eigen::MatrixXd>& X,
                          const Eigen::Ref<const Eigen::VectorXd>& y,
                          double lambda, const FitOptions& opts = {},
                          std::vector<double>* objective_per_sweep = nullptr);

struct CvResult {
  double lambda = 0.0;
  std::vector<double> grid;      // ascending, log-spaced
  std::vector<double> cv_curve;  // mean out-of-fold squared error per point
};

/// Pick lambda over a log grid spanning [1e-4*lambda_max, lambda_max] using
/// contiguous chronological folds. Ties go to the larger (sparser) lambda.
CvResult select_lambda_cv(const Eigen::Ref<const Eigen::MatrixXd>& X,
                          const Eigen::Ref<const Eigen::VectorXd>& y,
                          int n_folds = 5, int grid_size = 100,
                          const FitOptions& opts = {});

struct HourModel {
  Eigen::VectorXd theta;
  double lambda = 0.0;
  double training_loss = 0.0;  // objective value at the solution
};

struct LearModelSet {
  std::array<HourModel, 24> hour;
};

struct CvSpec {
  int folds = 5;
  int grid_size = 100;
};

struct DayFitInfo {
  int degenerate_hours = 0;  // lambda_max == 0 fallbacks (zero model)
};

/// Fit the 24 hourly models of one calibration day: shared-Gram CV per hour
/// followed by a warm-started path fit at the selected lambda.
LearModelSet fit_lear_day(const Design& design, const CvSpec& cv,
                          const FitOptions& opts = {}, DayFitInfo* info = nullptr);

/// One prediction per hour: the dot product theta_h . features.
Eigen::VectorXd predict(const LearModelSet& models,
                        const Eigen::Ref<const Eigen::VectorXd>& features);

}  // namespace epf
