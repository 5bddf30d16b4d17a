#include "epf/transform.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace epf {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void check_window(int v, int n_days) {
  if (v < 1) throw InvalidArgument("rolling window v must be >= 1 day");
  if (v >= n_days) {
    throw WindowTooLarge("rolling window of " + std::to_string(v) +
                         " days needs at least " + std::to_string(v + 1) +
                         " days of data, got " + std::to_string(n_days));
  }
}

double median_of(std::vector<double>& values) {
  const size_t n = values.size();
  std::sort(values.begin(), values.end());
  if (n % 2 == 1) return values[n / 2];
  return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

}  // namespace

std::string to_string(Scheme s) {
  switch (s) {
    case Scheme::adaptive: return "adaptive";
    case Scheme::median_arcsinh: return "arcsinh";
    case Scheme::identity: return "identity";
  }
  return "identity";
}

Scheme parse_scheme(const std::string& name) {
  if (name == "adaptive") return Scheme::adaptive;
  if (name == "arcsinh" || name == "median-arcsinh" || name == "median_arcsinh") {
    return Scheme::median_arcsinh;
  }
  if (name == "identity") return Scheme::identity;
  throw InvalidArgument("unknown scheme: '" + name + "'");
}

AdaptiveParams estimate_adaptive_params(const Eigen::Ref<const Matrix>& series, int v) {
  const int n = static_cast<int>(series.rows());
  check_window(v, n);
  AdaptiveParams p;
  p.window_v = v;
  p.first_valid = v;
  p.mu = Eigen::VectorXd::Constant(n + 1, kNaN);
  p.sigma = Eigen::VectorXd::Constant(n + 1, kNaN);
  const double denom = 24.0 * v;
  for (int d = v; d <= n; ++d) {
    auto window = series.middleRows(d - v, v);
    const double mu = window.sum() / denom;
    const double ss = (window.array() - mu).square().sum();
    p.mu[d] = mu;
    p.sigma[d] = std::sqrt(ss / denom);
  }
  return p;
}

Matrix filter_outliers(const Eigen::Ref<const Matrix>& series, int v, double kappa) {
  if (kappa <= 0) throw InvalidArgument("kappa must be > 0");
  const int n = static_cast<int>(series.rows());
  check_window(v, n);
  AdaptiveParams p = estimate_adaptive_params(series, v);
  Matrix out = series;
  for (int d = v; d < n; ++d) {
    const double lo = p.mu[d] - kappa * p.sigma[d];
    const double hi = p.mu[d] + kappa * p.sigma[d];
    double median = kNaN;  // computed once per day when first needed
    for (int h = 0; h < 24; ++h) {
      const double x = series(d, h);
      if (x >= lo && x <= hi) continue;
      if (std::isnan(median)) {
        auto window = series.middleRows(d - v, v);
        std::vector<double> values(window.data(), window.data() + window.size());
        median = median_of(values);
      }
      out(d, h) = median;
    }
  }
  return out;
}

TransformedSeries apply_adaptive(const Eigen::Ref<const Matrix>& series,
                                 const AdaptiveParams& params, SourceRole role) {
  const int n = static_cast<int>(series.rows());
  if (params.size() < n) {
    throw MissingParams("adaptive parameters cover " + std::to_string(params.size()) +
                        " days, series has " + std::to_string(n));
  }
  TransformedSeries t;
  t.scheme = Scheme::adaptive;
  t.role = role;
  t.first_valid = params.first_valid;
  t.adaptive = params;
  t.values = Matrix::Constant(n, 24, kNaN);
  for (int d = params.first_valid; d < n; ++d) {
    const double scale = std::max(params.sigma[d], kSigmaFloor);
    t.values.row(d) = (series.row(d).array() - params.mu[d]) / scale;
  }
  return t;
}

Eigen::RowVectorXd invert_adaptive(const Eigen::Ref<const Eigen::RowVectorXd>& u,
                                   double mu, double sigma) {
  if (!std::isfinite(mu) || !std::isfinite(sigma)) {
    throw MissingParams("inversion parameters are not finite");
  }
  return (u.array() * std::max(sigma, kSigmaFloor) + mu).matrix();
}

Matrix invert_adaptive(const TransformedSeries& u) {
  if (!u.adaptive) throw MissingParams("series carries no adaptive parameters");
  const AdaptiveParams& p = *u.adaptive;
  const int n = u.n_days();
  Matrix out = Matrix::Constant(n, 24, kNaN);
  for (int d = p.first_valid; d < n; ++d) {
    out.row(d) = invert_adaptive(u.values.row(d), p.mu[d], p.sigma[d]);
  }
  return out;
}

ArcsinhParams estimate_arcsinh_params(const Eigen::Ref<const Matrix>& train_slice) {
  if (train_slice.size() == 0) throw EmptyTraining("empty training slice");
  std::vector<double> values(train_slice.data(),
                             train_slice.data() + train_slice.size());
  ArcsinhParams p;
  p.median = median_of(values);
  for (auto& x : values) x = std::abs(x - p.median);
  p.mad_scale = 1.4826 * median_of(values);
  return p;
}

TransformedSeries apply_median_arcsinh(const Eigen::Ref<const Matrix>& series,
                                       const ArcsinhParams& params, SourceRole role) {
  TransformedSeries t;
  t.scheme = Scheme::median_arcsinh;
  t.role = role;
  t.first_valid = 0;
  t.arcsinh = params;
  t.values = ((series.array() - params.median) / params.scale()).asinh();
  return t;
}

TransformedSeries apply_median_arcsinh(const Eigen::Ref<const Matrix>& series,
                                       const Eigen::Ref<const Matrix>& train_slice,
                                       SourceRole role) {
  return apply_median_arcsinh(series, estimate_arcsinh_params(train_slice), role);
}

Matrix invert_median_arcsinh(const Eigen::Ref<const Matrix>& y,
                             const ArcsinhParams& params) {
  return (y.array().sinh() * params.scale() + params.median).matrix();
}

TransformedSeries standardise_exogenous(const Eigen::Ref<const Matrix>& exog, int v,
                                        SourceRole role) {
  return apply_adaptive(exog, estimate_adaptive_params(exog, v), role);
}

}  // namespace epf
