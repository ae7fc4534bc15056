#pragma once

#include "qrebal/common.hpp"

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace qrebal {

using Date = std::chrono::year_month_day;

/// Parse an ISO-8601 calendar date (YYYY-MM-DD). Throws std::invalid_argument.
Date parse_date(const std::string& text);
std::string format_date(Date d);

/// Adjusted close prices, one row per date and one column per ticker.
struct PricePanel {
    std::vector<Date> dates;
    std::vector<std::string> tickers;
    Matrix prices;  // T x M, strictly positive

    Index rows() const { return prices.rows(); }
    Index assets() const { return prices.cols(); }

    /// Throws std::invalid_argument if any panel invariant is broken.
    void validate() const;
};

/// Daily returns. Row t holds the move from price row t to row t+1 and is
/// stamped with the later date.
struct ReturnPanel {
    std::vector<Date> dates;
    std::vector<std::string> tickers;
    Matrix log_returns;    // (T-1) x M
    Matrix gross_returns;  // (T-1) x M, strictly positive

    Index rows() const { return gross_returns.rows(); }
    Index assets() const { return gross_returns.cols(); }

    /// Rows [begin, end) as a new panel.
    ReturnPanel slice(Index begin, Index end) const;
    /// Keep only the named columns, in the given order.
    ReturnPanel select(const std::vector<std::string>& names) const;
};

struct SplitSpec {
    Date train_end;
    Date test_end;
};

struct LoadResult {
    PricePanel panel;
    std::vector<std::string> dropped;  // tickers removed for gaps or bad prices
};

/// Read a wide-format CSV: a `date` column followed by one column per ticker.
/// Tickers with any blank, non-numeric or non-positive cell are dropped.
LoadResult load_csv(const std::filesystem::path& path);

/// Write a panel in the format accepted by load_csv.
void write_csv(const PricePanel& panel, const std::filesystem::path& path);

ReturnPanel to_returns(const PricePanel& panel);

/// (train, test): rows with date <= train_end, and rows in (train_end, test_end].
std::pair<ReturnPanel, ReturnPanel> split(const ReturnPanel& returns, const SplitSpec& spec);

/// Seeded geometric Brownian motion panel with correlated daily log returns.
///
/// Daily log return of asset i is (drift_i - vol_i^2 / 2) / 252 plus a
/// Gaussian shock with standard deviation vol_i / sqrt(252); shocks are
/// correlated through the Cholesky factor of `target_corr`. Prices start at
/// 100 on 2010-01-04 and advance one weekday per row.
PricePanel synth_panel(std::uint64_t seed, Index rows, Index assets, const Matrix& target_corr,
                       const Vector& ann_vol, const Vector& ann_drift);

/// Block correlation: `blocks` groups of `per_block` assets, correlation
/// `intra` within a group and `inter` across groups, unit diagonal.
Matrix block_correlation(Index blocks, Index per_block, double intra, double inter);

}  // namespace qrebal
