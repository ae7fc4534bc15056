#pragma once

#include <chrono>
#include <string>
#include <vector>

#include "qrebal/market_data.hpp"
#include "qrebal/random.hpp"

namespace qrebal::fixture {

// Return panel straight from gross returns; tickers A, B, C, ...
inline ReturnPanel panel_from_gross(const Matrix& gross) {
    ReturnPanel p;
    for (Index j = 0; j < gross.cols(); ++j) p.tickers.push_back(std::string(1, static_cast<char>('A' + j)));
    p.gross_returns = gross;
    p.log_returns = gross.array().log();
    std::chrono::sys_days day{std::chrono::year{2020} / 1 / 1};
    for (Index t = 0; t < gross.rows(); ++t) p.dates.emplace_back(day + std::chrono::days{t});
    return p;
}

inline ReturnPanel panel_from_log(const Matrix& log_returns) {
    return panel_from_gross(log_returns.array().exp().matrix());
}

inline Matrix random_gross(std::uint64_t seed, Index rows, Index cols, double vol = 0.01, double drift = 0.0003) {
    Rng rng(seed);
    Matrix g(rows, cols);
    for (Index t = 0; t < rows; ++t)
        for (Index j = 0; j < cols; ++j) g(t, j) = std::exp(drift + vol * rng.normal());
    return g;
}

inline Matrix random_symmetric(Rng& rng, Index n, double lo = -1.0, double hi = 1.0) {
    Matrix q(n, n);
    for (Index i = 0; i < n; ++i)
        for (Index j = i; j < n; ++j) q(i, j) = q(j, i) = rng.uniform(lo, hi);
    return q;
}

// Planted block panel returns (log), blocks of equal size.
inline ReturnPanel block_panel(std::uint64_t seed, Index blocks, Index per_block, Index rows, double intra,
                               double inter) {
    const Index m = blocks * per_block;
    const auto corr = block_correlation(blocks, per_block, intra, inter);
    const auto prices = synth_panel(seed, rows + 1, m, corr, Vector::Constant(m, 0.2), Vector::Constant(m, 0.05));
    return to_returns(prices);
}

}  // namespace qrebal::fixture
