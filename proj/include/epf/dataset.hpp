#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "epf/dates.hpp"
#include "epf/errors.hpp"

namespace epf {

// Days down the rows, the 24 hourly values across the columns.
using Matrix = Eigen::MatrixXd;

enum class MarketId { omie_sp, epex_de, epex_be, epex_fr, np, custom };

std::string to_string(MarketId id);
MarketId parse_market(const std::string& name);  // accepts "OMIE-SP", "omie-sp", ...

/// Aligned hourly series for one market: day-ahead price plus the two
/// exogenous variables published before gate closure. Days are consecutive
/// calendar dates and every matrix has one row per day. Immutable once
/// loaded; concurrent readers are safe.
struct MarketDataset {
  MarketId market = MarketId::custom;
  Date first_day{};
  Matrix price;  // n x 24, currency/MWh
  Matrix exog1;  // n x 24
  Matrix exog2;  // n x 24
  std::vector<int> day_of_week;  // 1..7, Monday = 1
  Date test_start{};
  Date test_end{};

  int n_days() const { return static_cast<int>(price.rows()); }
  Date day(int i) const { return first_day + std::chrono::days(i); }
  Date last_day() const { return day(n_days() - 1); }
  int index_of(Date d) const {
    auto i = (d - first_day).count();
    return (i >= 0 && i < n_days()) ? static_cast<int>(i) : -1;
  }

  void validate() const;  // throws on any invariant violation
};

/// Registry of the five built-in markets: test periods plus the calibration
/// windows each market is evaluated with.
struct DatasetRegistryEntry {
  MarketId market;
  Date test_start, test_end;
  std::vector<int> short_windows;
  std::vector<int> long_windows;
};

const std::vector<DatasetRegistryEntry>& dataset_registry();
const DatasetRegistryEntry* registry_find(MarketId id);

struct LoadReport {
  int interpolated_cells = 0;  // missing hours filled by linear interpolation
  int averaged_cells = 0;      // duplicated hours collapsed by their mean
  int short_days = 0;          // 23-hour clock-change days
  int long_days = 0;           // 25-hour clock-change days
  bool fallback_test_period = false;  // no declared period fit the data span
};

struct LoadOptions {
  std::optional<Date> test_start;  // override manifest and registry
  std::optional<Date> test_end;
};

/// Parse a dataset CSV (header: timestamp,price,exog1,exog2) into an aligned
/// day-by-hour dataset. Clock-change days are normalized: a missing hour is
/// linearly interpolated, a duplicated hour is averaged. Isolated gaps
/// shorter than 3 hours are interpolated as well; anything longer is a
/// GapError. A sibling "<stem>.manifest" key-value file may declare
/// test_start / test_end (and market_id for custom data).
MarketDataset load_dataset(const std::string& path, MarketId market,
                           const LoadOptions& opts = {},
                           LoadReport* report = nullptr);

void save_dataset(const MarketDataset& ds, const std::string& path);

/// Contiguous by-day view over a dataset.
struct DatasetSlice {
  const MarketDataset* ds = nullptr;
  int offset = 0;  // index of the first day within ds
  int count = 0;

  Date day(int i) const { return ds->day(offset + i); }
  Date first() const { return day(0); }
  Date last() const { return day(count - 1); }
  auto price() const { return ds->price.middleRows(offset, count); }
  auto exog1() const { return ds->exog1.middleRows(offset, count); }
  auto exog2() const { return ds->exog2.middleRows(offset, count); }
  int dow(int i) const { return ds->day_of_week[offset + i]; }
};

inline constexpr int kAllHistory = -1;

/// The last `window` days strictly before target_day, or every prior day
/// when window == kAllHistory. The target day itself is never included.
DatasetSlice slice_training(const MarketDataset& ds, Date target_day, int window);

}  // namespace epf
