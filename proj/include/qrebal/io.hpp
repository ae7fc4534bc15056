#pragma once

#include "qrebal/allocation.hpp"
#include "qrebal/backtest.hpp"
#include "qrebal/clustering.hpp"
#include "qrebal/qaoa.hpp"
#include "qrebal/schedule_qubo.hpp"
#include "qrebal/shrinkage.hpp"

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

namespace qrebal::io {

using Json = nlohmann::ordered_json;

// JSON forms of the pipeline artifacts.
Json to_json(const WeightVector& w);
WeightVector weights_from_json(const Json& j);

Json to_json(const QuboProblem& q);
Json to_json(const QaoaOutcome& o, int top_k = 20);
Json to_json(const ScheduleResult& s, int top_k = 20);
std::vector<std::uint8_t> schedule_bits_from_json(const Json& j);

Json read_json(const std::filesystem::path& path);
void write_json(const Json& j, const std::filesystem::path& path);

/// Bitstring rendered with bit 0 leftmost.
std::string bitstring(std::uint64_t packed, int width);

/// Histogram entries sorted by descending count, then ascending value.
std::vector<std::pair<std::uint64_t, std::uint64_t>> top_entries(const Histogram& h, int k);

/// Number formatting shared by every CSV: 12 significant digits, and the
/// literal "undefined" for missing ratios.
std::string fmt_num(double v);
std::string fmt_num(const std::optional<double>& v);

/// Square matrix with a header row and a leading ticker column.
void write_matrix_csv(const Matrix& m, const std::vector<std::string>& labels, const std::filesystem::path& path);

/// Columns: Strategy, Return (%), Sharpe, Sortino, MDD (%), Calmar, Rebalances, Cost (bp).
void write_metrics_csv(const std::vector<BacktestReport>& reports, std::ostream& out);
void write_metrics_csv(const std::vector<BacktestReport>& reports, const std::filesystem::path& path);

/// Long format: strategy, day, date, value, drawdown. Day 0 is the start value.
void write_curves_csv(const std::vector<BacktestReport>& reports, const std::vector<Date>& test_dates,
                      const std::filesystem::path& path);

/// Parse `key = value` lines; `#` starts a comment. Throws std::invalid_argument
/// on malformed lines or duplicate keys.
std::map<std::string, std::string> parse_key_values(std::istream& in);

/// 64-bit FNV-1a, rendered as 16 hex digits.
std::string fnv1a_hex(const std::string& text);

}  // namespace qrebal::io
