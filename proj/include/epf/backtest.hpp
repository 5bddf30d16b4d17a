#pragma once

#include <functional>
#include <optional>

#include "epf/lear.hpp"

namespace epf {

struct BacktestConfig {
  MarketId market = MarketId::custom;
  Scheme scheme = Scheme::adaptive;
  int window = kAllHistory;  // calibration window in days, or kAllHistory
  int v = 7;                 // rolling window for the per-day parameters
  double kappa = 10.0;       // outlier bound width, in rolling sigmas
  bool filter_outliers = true;
  int cv_folds = 5;
  int lambda_grid = 100;
  bool exog_own_params = true;  // false reuses the price parameters
  std::string label;

  void validate() const;
};

/// Day-ahead predictions over a contiguous span of test days, in original
/// price units.
struct ForecastTable {
  std::string label;
  Date first_day{};
  std::vector<std::array<double, 24>> rows;
  std::optional<BacktestConfig> config;

  int n_days() const { return static_cast<int>(rows.size()); }
  Date day(int i) const { return first_day + std::chrono::days(i); }
  Date last_day() const { return day(n_days() - 1); }
  int index_of(Date d) const {
    auto i = (d - first_day).count();
    return (i >= 0 && i < n_days()) ? static_cast<int>(i) : -1;
  }
};

struct BacktestOptions {
  int jobs = 1;
  // called after each finished day (from worker threads, already serialized)
  std::function<void(int done, int total, Date day, double millis)> progress;
  std::vector<double>* per_day_ms = nullptr;       // filled in day order
  std::vector<std::string>* model_dump = nullptr;  // CSV lines, day order
  std::vector<std::string>* log = nullptr;         // degenerate-day notes
};

/// One forecast, for `target` (a day inside the dataset's test period or
/// any day with enough history). Training data is everything the
/// calibration window admits strictly before the target day.
std::array<double, 24> forecast_one_day(const MarketDataset& ds,
                                        const BacktestConfig& cfg, Date target);

/// The daily-retraining loop over [test_start, test_end]. Deterministic for
/// identical inputs regardless of the worker count.
ForecastTable run_backtest(const MarketDataset& ds, const BacktestConfig& cfg,
                           const BacktestOptions& opts = {});

struct SuiteEntry {
  BacktestConfig config;
  std::optional<ForecastTable> table;
  std::string error;  // empty on success
};

/// Run each configuration; a failing configuration is reported in its entry
/// and never aborts the others. Entry order follows the input order.
std::vector<SuiteEntry> run_suite(const MarketDataset& ds,
                                  const std::vector<BacktestConfig>& configs,
                                  const BacktestOptions& opts = {});

// header: date,label,h1,...,h24 — dates ISO-8601, full double precision
void write_forecast_csv(const ForecastTable& table, const std::string& path);
ForecastTable read_forecast_csv(const std::string& path);

}  // namespace epf
