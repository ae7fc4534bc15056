#include "qrebal/schedule_qubo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "qrebal/clustering.hpp"
#include "qrebal/parallel.hpp"

namespace qrebal {

std::uint64_t BitSchedule::packed() const {
    std::uint64_t v = 0;
    for (std::size_t k = 0; k < bits.size(); ++k) {
        if (bits[k]) v |= std::uint64_t{1} << k;
    }
    return v;
}

std::vector<std::uint8_t> BitSchedule::unpack(std::uint64_t value, int width) {
    std::vector<std::uint8_t> out(static_cast<std::size_t>(width));
    for (int k = 0; k < width; ++k) out[static_cast<std::size_t>(k)] = (value >> k) & 1U;
    return out;
}

std::string BitSchedule::to_string() const {
    std::string s;
    s.reserve(bits.size());
    for (auto b : bits) s.push_back(b ? '1' : '0');
    return s;
}

double qubo_energy(const Matrix& q, std::uint64_t x) {
    const Index w = q.rows();
    double e = 0.0;
    for (Index i = 0; i < w; ++i) {
        if (!((x >> i) & 1U)) continue;
        for (Index j = 0; j < w; ++j) {
            if ((x >> j) & 1U) e += q(i, j);
        }
    }
    return e;
}

double qubo_energy(const Matrix& q, const std::vector<std::uint8_t>& bits) {
    if (static_cast<Index>(bits.size()) != q.rows()) {
        throw std::invalid_argument("qubo_energy: bit count does not match matrix size");
    }
    BitSchedule s{bits, 0.0};
    return qubo_energy(q, s.packed());
}

CandidateDates candidate_dates(Index window_len, Index count) {
    if (count < 1) {
        throw std::invalid_argument("candidate_dates: need at least one candidate");
    }
    if (window_len < count + 2) {
        throw std::invalid_argument(fmt::format(
            "candidate_dates: window of {} days cannot host {} distinct interior dates", window_len, count));
    }
    CandidateDates out;
    out.window_len = window_len;
    Index prev = 0;
    for (Index k = 0; k < count; ++k) {
        // round((k+1) L / (W+1)) with halves rounded up, in exact integer arithmetic
        const Index num = 2 * (k + 1) * window_len + (count + 1);
        Index t = num / (2 * (count + 1));
        if (t <= prev) t = prev + 1;
        // leave room for the candidates still to come
        t = std::min(t, window_len - 2 - (count - 1 - k));
        out.indices.push_back(t);
        prev = t;
    }
    return out;
}

Vector drift_weights(const Vector& target, const Matrix& gross_returns, Index upto) {
    if (upto < 0 || upto > gross_returns.rows()) {
        throw std::out_of_range(
            fmt::format("drift_weights: prefix {} outside window of {}", upto, gross_returns.rows()));
    }
    if (target.size() != gross_returns.cols()) {
        throw std::invalid_argument("drift_weights: weight length does not match asset count");
    }
    const Vector growth = gross_returns.topRows(upto).colwise().prod().transpose();
    const Vector held = target.cwiseProduct(growth);
    return held / held.sum();
}

double window_sharpe(const Vector& weights, const Matrix& gross_returns, Index begin, Index end) {
    const Vector r = portfolio_log_returns(weights, gross_returns.middleRows(begin, end - begin));
    try {
        return annualised_sharpe(r);
    } catch (const UndefinedRatio&) {
        return 0.0;
    }
}

double marginal_gain(const Vector& target, const Matrix& gross_returns, const CandidateDates& candidates, Index k,
                     double cost_c) {
    if (k < 0 || k >= candidates.count()) {
        throw std::out_of_range(fmt::format("marginal_gain: candidate {} of {}", k, candidates.count()));
    }
    const Index start = candidates.indices[static_cast<std::size_t>(k)];
    const Index stop =
        k + 1 < candidates.count() ? candidates.indices[static_cast<std::size_t>(k + 1)] : gross_returns.rows();
    if (stop - start < 2) {
        throw std::invalid_argument(
            fmt::format("marginal_gain: forward window after candidate {} has {} days, need 2", k, stop - start));
    }
    const Vector drifted = drift_weights(target, gross_returns, start);
    const double improvement =
        window_sharpe(target, gross_returns, start, stop) - window_sharpe(drifted, gross_returns, start, stop);
    const double turnover = (drifted - target).cwiseAbs().sum();
    return improvement - cost_c * turnover * std::sqrt(kTradingDaysPerYear);
}

QuboProblem build_qubo(const Vector& target, const Matrix& gross_returns, Index count, const QuboParams& params) {
    QuboProblem p;
    p.candidates = candidate_dates(gross_returns.rows(), count);
    p.params = params;
    p.n_assets = target.size();
    const auto& t = p.candidates.indices;

    p.gains.resize(static_cast<std::size_t>(count));
    parallel_for(static_cast<std::size_t>(count), [&](std::size_t k) {
        p.gains[k] = marginal_gain(target, gross_returns, p.candidates, static_cast<Index>(k), params.cost_c);
    });

    p.delta_t = count > 1 ? static_cast<double>(t.back() - t.front()) / static_cast<double>(count - 1) : 0.0;

    Matrix q(count, count);
    for (Index k = 0; k < count; ++k) {
        q(k, k) = -params.lambda1 * p.gains[static_cast<std::size_t>(k)] +
                  params.lambda2 * params.cost_c * static_cast<double>(p.n_assets);
        for (Index l = k + 1; l < count; ++l) {
            const double gap = static_cast<double>(t[static_cast<std::size_t>(l)] - t[static_cast<std::size_t>(k)]);
            q(k, l) = params.lambda3 * std::exp(-gap / p.delta_t);
            q(l, k) = q(k, l);
        }
    }
    p.raw_max_abs = q.cwiseAbs().maxCoeff();
    if (p.raw_max_abs > 0.0) {
        q /= p.raw_max_abs;
    }
    p.q = std::move(q);
    return p;
}

BitSchedule brute_force(const Matrix& q) {
    const Index w = q.rows();
    if (q.cols() != w || w < 1) {
        throw std::invalid_argument("brute_force: QUBO matrix must be square and non-empty");
    }
    if (w > kMaxExactBits) {
        throw std::invalid_argument(fmt::format("brute_force: {} variables exceeds the {}-bit guard", w, kMaxExactBits));
    }
    std::uint64_t best = 0;
    double best_e = qubo_energy(q, std::uint64_t{0});
    const std::uint64_t states = std::uint64_t{1} << w;
    for (std::uint64_t x = 1; x < states; ++x) {
        const double e = qubo_energy(q, x);
        if (e < best_e) {
            best_e = e;
            best = x;
        }
    }
    return BitSchedule{BitSchedule::unpack(best, static_cast<int>(w)), best_e};
}

}  // namespace qrebal
