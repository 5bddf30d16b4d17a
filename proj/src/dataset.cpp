#include "epf/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace epf {

namespace {

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) out.push_back(trim(field));
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

double parse_double(const std::string& s, const std::string& context) {
  const char* begin = s.c_str();
  char* end = nullptr;
  double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0' || !std::isfinite(v)) {
    throw ParseError("malformed number '" + s + "' " + context);
  }
  return v;
}

// "<stem>.manifest" next to the CSV, lines of "key = value" or "key: value".
struct ManifestData {
  std::optional<MarketId> market;
  std::optional<Date> test_start, test_end;
};

ManifestData read_manifest(const std::string& csv_path) {
  ManifestData m;
  std::filesystem::path p(csv_path);
  p.replace_extension(".manifest");
  std::ifstream in(p);
  if (!in) return m;
  std::string line;
  while (std::getline(in, line)) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto sep = line.find_first_of("=:");
    if (sep == std::string::npos) continue;
    std::string key = lower(trim(line.substr(0, sep)));
    std::string value = trim(line.substr(sep + 1));
    if (value.empty()) continue;
    if (key == "market_id" || key == "market") {
      m.market = parse_market(value);
    } else if (key == "test_start") {
      m.test_start = parse_date(value);
    } else if (key == "test_end") {
      m.test_end = parse_date(value);
    }
  }
  return m;
}

}  // namespace

std::string to_string(MarketId id) {
  switch (id) {
    case MarketId::omie_sp: return "OMIE-SP";
    case MarketId::epex_de: return "EPEX-DE";
    case MarketId::epex_be: return "EPEX-BE";
    case MarketId::epex_fr: return "EPEX-FR";
    case MarketId::np: return "NP";
    case MarketId::custom: return "custom";
  }
  return "custom";
}

MarketId parse_market(const std::string& name) {
  std::string n = lower(name);
  std::replace(n.begin(), n.end(), '_', '-');
  if (n == "omie-sp") return MarketId::omie_sp;
  if (n == "epex-de") return MarketId::epex_de;
  if (n == "epex-be") return MarketId::epex_be;
  if (n == "epex-fr") return MarketId::epex_fr;
  if (n == "np") return MarketId::np;
  if (n == "custom") return MarketId::custom;
  throw InvalidArgument("unknown market id: '" + name + "'");
}

const std::vector<DatasetRegistryEntry>& dataset_registry() {
  static const std::vector<DatasetRegistryEntry> entries = {
      {MarketId::omie_sp, make_date(2022, 1, 1), make_date(2023, 5, 31),
       {56, 84}, {364, 728}},
      {MarketId::epex_de, make_date(2022, 1, 1), make_date(2023, 5, 31),
       {56, 84}, {364, 728}},
      {MarketId::epex_be, make_date(2015, 1, 4), make_date(2016, 12, 31),
       {56, 84}, {1092, 1456}},
      {MarketId::epex_fr, make_date(2015, 1, 4), make_date(2016, 12, 31),
       {56, 84}, {1092, 1456}},
      {MarketId::np, make_date(2016, 12, 27), make_date(2018, 12, 24),
       {56, 84}, {1092, 1456}},
  };
  return entries;
}

const DatasetRegistryEntry* registry_find(MarketId id) {
  for (const auto& e : dataset_registry()) {
    if (e.market == id) return &e;
  }
  return nullptr;
}

void MarketDataset::validate() const {
  const int n = n_days();
  if (n < 1) throw SchemaError("dataset is empty");
  auto check_shape = [&](const Matrix& m, const char* name) {
    if (m.rows() != n || m.cols() != 24) {
      throw SchemaError(std::string("matrix '") + name + "' is not " +
                        std::to_string(n) + "x24");
    }
    if (m.hasNaN()) {
      throw SchemaError(std::string("matrix '") + name + "' has NaN cells");
    }
  };
  check_shape(price, "price");
  check_shape(exog1, "exog1");
  check_shape(exog2, "exog2");
  if (static_cast<int>(day_of_week.size()) != n) {
    throw SchemaError("day_of_week length does not match day count");
  }
  for (int i = 0; i < n; ++i) {
    if (day_of_week[i] != weekday_iso(day(i))) {
      throw SchemaError("day_of_week mismatch at " + to_string(day(i)));
    }
  }
  const int ts = index_of(test_start);
  const int te = index_of(test_end);
  if (ts < 0 || te < 0) {
    throw InvalidArgument("test period [" + to_string(test_start) + ", " +
                          to_string(test_end) + "] lies outside the data span");
  }
  if (te < ts) throw InvalidArgument("test_end precedes test_start");
  if (ts < 14) {
    throw InsufficientHistory("only " + std::to_string(ts) +
                              " days precede test_start (need at least 14)");
  }
}

MarketDataset load_dataset(const std::string& path, MarketId market,
                           const LoadOptions& opts, LoadReport* report) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open dataset file: " + path);

  std::string line;
  if (!std::getline(in, line)) throw SchemaError("empty file: " + path);
  if (!line.empty() && line.front() == '\xEF') line.erase(0, 3);  // UTF-8 BOM
  auto header = split_csv_line(line);
  const std::vector<std::string> expected = {"timestamp", "price", "exog1", "exog2"};
  if (header.size() != expected.size()) {
    throw SchemaError("expected 4 columns (timestamp,price,exog1,exog2), got " +
                      std::to_string(header.size()));
  }
  for (size_t i = 0; i < expected.size(); ++i) {
    if (lower(header[i]) != expected[i]) {
      throw SchemaError("unexpected column '" + header[i] + "' (want '" +
                        expected[i] + "')");
    }
  }

  struct Row {
    long flat;  // days since first date * 24 + hour; filled in second pass
    Date day;
    int hour;
    double p, x1, x2;
  };
  std::vector<Row> rows;
  Timestamp prev{};
  bool have_prev = false;
  size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto fields = split_csv_line(line);
    if (fields.size() != 4) {
      throw SchemaError("line " + std::to_string(line_no) + ": expected 4 fields");
    }
    const std::string ctx = "at line " + std::to_string(line_no);
    Timestamp ts = parse_timestamp(fields[0]);
    if (have_prev) {
      long a = prev.day.time_since_epoch().count() * 24 + prev.hour;
      long b = ts.day.time_since_epoch().count() * 24 + ts.hour;
      if (b < a) throw SchemaError("timestamps not sorted ascending " + ctx);
    }
    prev = ts;
    have_prev = true;
    rows.push_back(Row{0, ts.day, ts.hour, parse_double(fields[1], ctx),
                       parse_double(fields[2], ctx), parse_double(fields[3], ctx)});
  }
  if (rows.empty()) throw SchemaError("no data rows in " + path);

  const Date first = rows.front().day;
  const Date last = rows.back().day;
  const int n = static_cast<int>((last - first).count()) + 1;
  const long cells = static_cast<long>(n) * 24;

  Eigen::VectorXd sums[3] = {Eigen::VectorXd::Zero(cells),
                             Eigen::VectorXd::Zero(cells),
                             Eigen::VectorXd::Zero(cells)};
  std::vector<int> counts(cells, 0);
  for (auto& r : rows) {
    r.flat = (r.day - first).count() * 24 + r.hour;
    sums[0][r.flat] += r.p;
    sums[1][r.flat] += r.x1;
    sums[2][r.flat] += r.x2;
    counts[r.flat] += 1;
  }

  LoadReport rep;
  std::vector<bool> day_has_dup(n, false), day_has_miss(n, false);
  for (long c = 0; c < cells; ++c) {
    if (counts[c] > 1) {
      for (auto& s : sums) s[c] /= counts[c];
      ++rep.averaged_cells;
      day_has_dup[c / 24] = true;
    }
  }

  // Missing hours: runs of 1-2 cells are interpolated (this covers the
  // 23-hour clock-change day); longer runs mean real gaps in the data.
  long c = 0;
  while (c < cells) {
    if (counts[c] > 0) { ++c; continue; }
    long begin = c;
    while (c < cells && counts[c] == 0) ++c;
    long len = c - begin;
    Date gap_day = first + std::chrono::days(begin / 24);
    if (len >= 24 && begin % 24 == 0) {
      throw GapError("missing calendar day " + to_string(gap_day));
    }
    if (len >= 3) {
      throw GapError("gap of " + std::to_string(len) + " hours starting " +
                     to_string(gap_day) + " hour " + std::to_string(begin % 24));
    }
    for (int s = 0; s < 3; ++s) {
      if (begin == 0 || c == cells) {
        double v = (begin == 0) ? sums[s][c] : sums[s][begin - 1];
        for (long k = begin; k < c; ++k) sums[s][k] = v;
      } else {
        double lo = sums[s][begin - 1], hi = sums[s][c];
        for (long k = begin; k < c; ++k) {
          double t = double(k - begin + 1) / double(len + 1);
          sums[s][k] = lo + t * (hi - lo);
        }
      }
    }
    rep.interpolated_cells += static_cast<int>(len);
    for (long k = begin; k < c; ++k) day_has_miss[k / 24] = true;
  }
  for (int d = 0; d < n; ++d) {
    if (day_has_dup[d]) ++rep.long_days;
    if (day_has_miss[d]) ++rep.short_days;
  }

  MarketDataset ds;
  ds.market = market;
  ds.first_day = first;
  for (int s = 0; s < 3; ++s) {
    Matrix& m = (s == 0) ? ds.price : (s == 1) ? ds.exog1 : ds.exog2;
    m = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                       Eigen::RowMajor>>(sums[s].data(), n, 24);
  }
  ds.day_of_week.resize(n);
  for (int d = 0; d < n; ++d) ds.day_of_week[d] = weekday_iso(ds.day(d));

  ManifestData manifest = read_manifest(path);
  if (market == MarketId::custom && manifest.market) ds.market = *manifest.market;

  // Test period: explicit overrides win, then the manifest, then the
  // registry (clamped to the data span), then the last day on its own.
  std::optional<Date> ts = opts.test_start, te = opts.test_end;
  if (!ts && manifest.test_start) ts = manifest.test_start;
  if (!te && manifest.test_end) te = manifest.test_end;
  if (!ts || !te) {
    if (const auto* reg = registry_find(ds.market)) {
      int si = ds.index_of(reg->test_start);
      if (!ts && si >= 14) {
        ts = reg->test_start;
        if (!te) te = std::min(reg->test_end, ds.last_day());
      }
    }
  }
  if (ts && !te) te = ds.last_day();
  if (!ts) {
    ts = ds.last_day();
    te = ds.last_day();
    rep.fallback_test_period = true;
  }
  ds.test_start = *ts;
  ds.test_end = *te;

  ds.validate();
  if (report) *report = rep;
  return ds;
}

void save_dataset(const MarketDataset& ds, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write dataset file: " + path);
  out << "timestamp,price,exog1,exog2\n";
  char buf[128];
  for (int d = 0; d < ds.n_days(); ++d) {
    std::string date = to_string(ds.day(d));
    for (int h = 0; h < 24; ++h) {
      std::snprintf(buf, sizeof(buf), "%s %02d:00,%.17g,%.17g,%.17g\n",
                    date.c_str(), h, ds.price(d, h), ds.exog1(d, h),
                    ds.exog2(d, h));
      out << buf;
    }
  }
  if (!out) throw IoError("failed writing dataset file: " + path);
}

DatasetSlice slice_training(const MarketDataset& ds, Date target_day, int window) {
  const int ti = ds.index_of(target_day);
  if (ti < 0) {
    throw InvalidArgument("target day " + to_string(target_day) +
                          " lies outside the dataset");
  }
  if (window == kAllHistory) {
    if (ti < 14) {
      throw InsufficientHistory("only " + std::to_string(ti) +
                                " days precede " + to_string(target_day) +
                                " (need at least 14)");
    }
    return DatasetSlice{&ds, 0, ti};
  }
  if (window < 1) throw InvalidArgument("calibration window must be >= 1 day");
  if (ti < window) {
    throw InsufficientHistory("calibration window of " + std::to_string(window) +
                              " days does not fit before " + to_string(target_day) +
                              " (" + std::to_string(ti) + " days available)");
  }
  return DatasetSlice{&ds, ti - window, window};
}

}  // namespace epf
