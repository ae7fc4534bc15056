#pragma once

#include "qrebal/allocation.hpp"
#include "qrebal/common.hpp"
#include "qrebal/market_data.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace qrebal {

/// Candidate rebalancing days, as row offsets into one return window.
struct CandidateDates {
    std::vector<Index> indices;  // strictly increasing, interior to the window
    Index window_len = 0;

    Index count() const { return static_cast<Index>(indices.size()); }
};

struct QuboParams {
    double lambda1 = 1.0;  // reward for beneficial rebalancing
    double lambda2 = 0.5;  // fixed cost penalty
    double lambda3 = 0.3;  // consecutive rebalancing penalty
    double cost_c = 0.001; // proportional cost per unit turnover
};

struct QuboProblem {
    Matrix q;                  // W x W symmetric, divided by raw_max_abs
    double raw_max_abs = 0.0;  // zero when the raw matrix was all zeros
    CandidateDates candidates;
    std::vector<double> gains;
    QuboParams params;
    Index n_assets = 0;
    double delta_t = 0.0;      // mean candidate spacing, trading days

    Index size() const { return q.rows(); }
};

/// A binary schedule. Bit k selects candidate k; the packed integer form
/// stores bit k at position k.
struct BitSchedule {
    std::vector<std::uint8_t> bits;
    double energy = 0.0;

    std::uint64_t packed() const;
    static std::vector<std::uint8_t> unpack(std::uint64_t value, int width);
    /// Bit 0 leftmost, e.g. "11000010".
    std::string to_string() const;
};

/// x' Q x for a packed bitstring.
double qubo_energy(const Matrix& q, std::uint64_t x);
double qubo_energy(const Matrix& q, const std::vector<std::uint8_t>& bits);

/// t_k = round((k + 1) * window_len / (W + 1)) for k = 0..W-1, bumped to the
/// next free day on collision and pulled back when a crowded window would
/// push later days past the end. All days lie in [1, window_len - 2].
CandidateDates candidate_dates(Index window_len, Index count);

/// Target weights drifted by the gross returns of rows [0, upto).
Vector drift_weights(const Vector& target, const Matrix& gross_returns, Index upto);

/// Annualised Sharpe of ln(R_t . w) over rows [begin, end); 0 when the
/// window has zero volatility.
double window_sharpe(const Vector& weights, const Matrix& gross_returns, Index begin, Index end);

/// Net benefit of rebalancing at candidate k: forward Sharpe of the target
/// minus forward Sharpe of the drifted weights, minus the annualised cost of
/// the trade. The forward window runs to the next candidate, or to the end of
/// the window for the last one.
double marginal_gain(const Vector& target, const Matrix& gross_returns, const CandidateDates& candidates, Index k,
                     double cost_c);

/// Diagonal -lambda1 g_k + lambda2 c n, off-diagonal lambda3 exp(-|t_k - t_l| / dt),
/// then scaled so the largest magnitude is 1.
QuboProblem build_qubo(const Vector& target, const Matrix& gross_returns, Index count, const QuboParams& params);

/// Exhaustive minimiser of x' Q x. Ties go to the smallest packed value.
inline constexpr int kMaxExactBits = 24;
BitSchedule brute_force(const Matrix& q);

}  // namespace qrebal
