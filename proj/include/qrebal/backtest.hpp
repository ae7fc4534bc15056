#pragma once

#include "qrebal/allocation.hpp"
#include "qrebal/common.hpp"
#include "qrebal/market_data.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace qrebal {

struct BuyAndHold {};
struct Periodic {
    int days = 1;  // fires on test rows t >= 1 with t % days == 0
};
struct Threshold {
    double max_drift = 0.05;  // fires when max_i |drifted_i - target_i| exceeds this
};
struct ExplicitSchedule {
    std::vector<std::uint8_t> days;  // one flag per test row
};
using Scheduler = std::variant<BuyAndHold, Periodic, Threshold, ExplicitSchedule>;

struct Strategy {
    std::string label;
    WeightVector weights;
    Scheduler scheduler;
};

/// Ratios are empty when their denominator is zero ("undefined"), never infinite.
struct Metrics {
    double total_return = 0.0;
    std::optional<double> sharpe;
    std::optional<double> sortino;
    double mdd = 0.0;  // <= 0
    std::optional<double> calmar;
    bool degenerate = false;  // fewer than two curve points
};

struct BacktestReport {
    std::string label;
    std::vector<double> equity_curve;  // V_0 = 1 followed by one value per test row
    Metrics metrics;
    Index rebalance_count = 0;
    double total_cost_bp = 0.0;
    std::vector<Index> rebalance_days;
};

/// Net-of-cost simulation. Holdings drift with every row's returns. On a
/// scheduled row the return is applied first, w~ is the resulting drifted
/// weight vector, V is charged c * |w~ - w|_1 and the weights reset to target.
/// Row 0 follows the free initial allocation and never trades.
BacktestReport run(const ReturnPanel& test, const Strategy& strategy, double cost_c);

/// Sharpe and Sortino use daily log returns of the curve, annualised by sqrt(252).
/// Sortino's downside deviation is sqrt(mean(min(r, 0)^2)), i.e. MAR = 0.
Metrics metrics(const std::vector<double>& equity_curve);

/// Running-peak drawdown series, same length as the curve.
std::vector<double> drawdown_series(const std::vector<double>& equity_curve);

struct GridSpec {
    std::vector<int> periods{1, 5, 10, 21};
    double threshold = 0.05;
};

/// The strategy grid: buy-and-hold for each weight set, GA on each periodic
/// schedule and on the threshold rule, and each weight set on its own QAOA
/// schedule. `weights` and `qaoa_schedules` are in the same method order and
/// must contain a GA entry.
std::vector<Strategy> strategy_grid(const std::vector<WeightVector>& weights,
                                    const std::vector<std::vector<std::uint8_t>>& qaoa_schedules,
                                    const GridSpec& spec = {});

std::vector<BacktestReport> run_grid(const ReturnPanel& test, const std::vector<WeightVector>& weights,
                                     const std::vector<std::vector<std::uint8_t>>& qaoa_schedules, double cost_c,
                                     const GridSpec& spec = {});

}  // namespace qrebal
