#pragma once

#include <optional>

#include "epf/dataset.hpp"

namespace epf {

// Guards division by zero when a rolling window is constant.
inline constexpr double kSigmaFloor = 1e-8;

enum class Scheme { adaptive, median_arcsinh, identity };
enum class SourceRole { price, exog1, exog2 };

std::string to_string(Scheme s);
Scheme parse_scheme(const std::string& name);

/// Rolling mean / population standard deviation per day, each computed over
/// the 24*v values of the v days immediately before that day. mu and sigma
/// carry n_days+1 entries; the extra final entry holds the parameters for
/// the day right after the series, which is what a forecast day needs.
/// Entries before first_valid (== v) have no history and are NaN.
struct AdaptiveParams {
  Eigen::VectorXd mu;
  Eigen::VectorXd sigma;
  int window_v = 0;
  int first_valid = 0;

  int size() const { return static_cast<int>(mu.size()); }
  bool covers(int day) const { return day >= first_valid && day < size(); }
};

/// Static robust location/scale frozen from a training slice.
struct ArcsinhParams {
  double median = 0.0;
  double mad_scale = 0.0;  // 1.4826 * median absolute deviation
  double scale() const { return std::max(mad_scale, kSigmaFloor); }
};

struct TransformedSeries {
  Matrix values;  // rows before first_valid are NaN (adaptive only)
  Scheme scheme = Scheme::identity;
  SourceRole role = SourceRole::price;
  int first_valid = 0;
  std::optional<AdaptiveParams> adaptive;
  std::optional<ArcsinhParams> arcsinh;

  int n_days() const { return static_cast<int>(values.rows()); }
};

AdaptiveParams estimate_adaptive_params(const Eigen::Ref<const Matrix>& series, int v);

/// Replace every cell outside mu_d +- kappa*sigma_d (bounds inclusive) by
/// the median of the 24*v values in the v days before d. Bounds and medians
/// come from the unfiltered input; the first v days pass through unchanged.
Matrix filter_outliers(const Eigen::Ref<const Matrix>& series, int v, double kappa);

/// u = (p - mu_d) / max(sigma_d, floor). params must cover every row.
TransformedSeries apply_adaptive(const Eigen::Ref<const Matrix>& series,
                                 const AdaptiveParams& params,
                                 SourceRole role = SourceRole::price);

/// p = mu + max(sigma, floor) * u for one day's 24 values.
Eigen::RowVectorXd invert_adaptive(const Eigen::Ref<const Eigen::RowVectorXd>& u,
                                   double mu, double sigma);

/// Full-matrix inverse over the valid region, using the stored parameters.
Matrix invert_adaptive(const TransformedSeries& u);

ArcsinhParams estimate_arcsinh_params(const Eigen::Ref<const Matrix>& train_slice);

/// y = asinh((p - median) / scale) with parameters frozen from train_slice.
TransformedSeries apply_median_arcsinh(const Eigen::Ref<const Matrix>& series,
                                       const Eigen::Ref<const Matrix>& train_slice,
                                       SourceRole role = SourceRole::price);
TransformedSeries apply_median_arcsinh(const Eigen::Ref<const Matrix>& series,
                                       const ArcsinhParams& params,
                                       SourceRole role = SourceRole::price);

Matrix invert_median_arcsinh(const Eigen::Ref<const Matrix>& y,
                             const ArcsinhParams& params);

/// Rolling standardisation of an exogenous variable with its own per-day
/// parameters. Day-of-week dummies are never transformed.
TransformedSeries standardise_exogenous(const Eigen::Ref<const Matrix>& exog, int v,
                                        SourceRole role);

}  // namespace epf
