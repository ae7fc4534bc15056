#include "qrebal/backtest.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>

#include <fmt/format.h>

#include "qrebal/parallel.hpp"

namespace qrebal {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace

BacktestReport run(const ReturnPanel& test, const Strategy& strategy, double cost_c) {
    const Index days = test.rows();
    const Vector& target = strategy.weights.weights;
    if (days < 1) {
        throw std::invalid_argument("backtest: empty test panel");
    }
    if (target.size() != test.assets()) {
        throw std::invalid_argument(fmt::format("backtest '{}': {} weights for {} assets", strategy.label,
                                                target.size(), test.assets()));
    }
    if (!(cost_c >= 0.0)) {
        throw std::invalid_argument("backtest: cost must be non-negative");
    }
    if (const auto* p = std::get_if<Periodic>(&strategy.scheduler); p && p->days < 1) {
        throw std::invalid_argument("backtest: periodic interval must be >= 1");
    }
    if (const auto* th = std::get_if<Threshold>(&strategy.scheduler);
        th && !(th->max_drift > 0.0 && th->max_drift < 1.0)) {
        throw std::invalid_argument("backtest: threshold must lie in (0, 1)");
    }
    if (const auto* e = std::get_if<ExplicitSchedule>(&strategy.scheduler);
        e && static_cast<Index>(e->days.size()) != days) {
        throw std::invalid_argument(fmt::format("backtest '{}': schedule has {} flags for {} test days",
                                                strategy.label, e->days.size(), days));
    }

    BacktestReport report;
    report.label = strategy.label;
    report.equity_curve.reserve(static_cast<std::size_t>(days) + 1);
    report.equity_curve.push_back(1.0);

    Vector held = target;
    double value = 1.0;
    double total_cost = 0.0;
    for (Index t = 0; t < days; ++t) {
        // the day's return moves holdings first; a trade at the close restores the target
        const Eigen::RowVectorXd gross = test.gross_returns.row(t);
        const double growth = gross.dot(held);
        value *= growth;
        // a move shared by every asset leaves relative weights untouched
        if ((gross.array() != gross(0)).any()) held = held.cwiseProduct(gross.transpose()) / growth;

        const bool fires = t >= 1 && std::visit(overloaded{
                                                    [](const BuyAndHold&) { return false; },
                                                    [t](const Periodic& p) { return t % p.days == 0; },
                                                    [&](const Threshold& th) {
                                                        return (held - target).cwiseAbs().maxCoeff() > th.max_drift;
                                                    },
                                                    [t](const ExplicitSchedule& e) {
                                                        return e.days[static_cast<std::size_t>(t)] != 0;
                                                    },
                                                },
                                                strategy.scheduler);
        if (fires) {
            const double cost = cost_c * (held - target).cwiseAbs().sum();
            assert(cost < 1.0);
            value *= 1.0 - cost;
            total_cost += cost;
            held = target;
            report.rebalance_days.push_back(t);
        }
        if (!(value > 0.0)) {
            throw std::domain_error(
                fmt::format("backtest '{}': portfolio value hit {} on day {}", strategy.label, value, t));
        }
        report.equity_curve.push_back(value);
    }
    report.rebalance_count = static_cast<Index>(report.rebalance_days.size());
    report.total_cost_bp = 1e4 * total_cost;
    report.metrics = metrics(report.equity_curve);
    return report;
}

std::vector<double> drawdown_series(const std::vector<double>& equity_curve) {
    std::vector<double> out;
    out.reserve(equity_curve.size());
    double peak = 0.0;
    for (double v : equity_curve) {
        peak = std::max(peak, v);
        out.push_back(v / peak - 1.0);
    }
    return out;
}

Metrics metrics(const std::vector<double>& equity_curve) {
    Metrics m;
    if (equity_curve.size() < 2) {
        m.degenerate = true;
        return m;
    }
    m.total_return = equity_curve.back() / equity_curve.front() - 1.0;
    const auto dd = drawdown_series(equity_curve);
    m.mdd = *std::min_element(dd.begin(), dd.end());

    const std::size_t n = equity_curve.size() - 1;
    std::vector<double> r(n);
    for (std::size_t t = 0; t < n; ++t) r[t] = std::log(equity_curve[t + 1] / equity_curve[t]);
    double mean = 0.0;
    for (double v : r) mean += v;
    mean /= static_cast<double>(n);
    double downside = 0.0;
    for (double v : r) downside += std::min(v, 0.0) * std::min(v, 0.0);
    downside = std::sqrt(downside / static_cast<double>(n));

    const double annual = std::sqrt(kTradingDaysPerYear);
    if (n >= 2) {
        double ss = 0.0;
        for (double v : r) ss += (v - mean) * (v - mean);
        const double sd = std::sqrt(ss / static_cast<double>(n - 1));
        if (sd > 1e-14 * std::abs(mean)) m.sharpe = mean / sd * annual;
    }
    if (downside > 0.0) m.sortino = mean / downside * annual;
    if (m.mdd < 0.0) m.calmar = m.total_return / std::abs(m.mdd);
    return m;
}

std::vector<Strategy> strategy_grid(const std::vector<WeightVector>& weights,
                                    const std::vector<std::vector<std::uint8_t>>& qaoa_schedules,
                                    const GridSpec& spec) {
    if (weights.size() != qaoa_schedules.size()) {
        throw std::invalid_argument("strategy_grid: one QAOA schedule per weight set is required");
    }
    const auto ga = std::find_if(weights.begin(), weights.end(),
                                 [](const WeightVector& w) { return w.method == WeightMethod::GA; });
    if (ga == weights.end()) {
        throw std::invalid_argument("strategy_grid: GA weights are required");
    }

    std::vector<Strategy> grid;
    for (const auto& w : weights) {
        grid.push_back({fmt::format("{} Buy&Hold", to_string(w.method)), w, BuyAndHold{}});
    }
    for (int period : spec.periods) {
        grid.push_back({fmt::format("GA Rebal/{}d", period), *ga, Periodic{period}});
    }
    grid.push_back({fmt::format("GA Threshold ({:g}%)", spec.threshold * 100.0), *ga, Threshold{spec.threshold}});
    for (std::size_t i = 0; i < weights.size(); ++i) {
        grid.push_back({fmt::format("{} + QAOA", to_string(weights[i].method)), weights[i],
                        ExplicitSchedule{qaoa_schedules[i]}});
    }
    return grid;
}

std::vector<BacktestReport> run_grid(const ReturnPanel& test, const std::vector<WeightVector>& weights,
                                     const std::vector<std::vector<std::uint8_t>>& qaoa_schedules, double cost_c,
                                     const GridSpec& spec) {
    const auto grid = strategy_grid(weights, qaoa_schedules, spec);
    std::vector<BacktestReport> reports(grid.size());
    parallel_for(grid.size(), [&](std::size_t i) { reports[i] = run(test, grid[i], cost_c); });
    return reports;
}

}  // namespace qrebal
