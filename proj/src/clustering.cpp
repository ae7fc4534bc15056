#include "qrebal/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <fmt/format.h>

namespace qrebal {

ClusterAssignment ward_cluster(const Matrix& dist, int n) {
    const Index m = dist.rows();
    if (dist.cols() != m || m < 1) {
        throw std::invalid_argument("ward_cluster: distance matrix must be square and non-empty");
    }
    if (n < 1 || n > m) {
        throw std::invalid_argument(fmt::format("ward_cluster: cluster count {} outside [1, {}]", n, m));
    }
    if (!dist.isApprox(dist.transpose(), 1e-12) || dist.diagonal().cwiseAbs().maxCoeff() > 1e-12 ||
        (dist.array() < 0.0).any()) {
        throw std::invalid_argument("ward_cluster: distances must be symmetric, non-negative, zero on the diagonal");
    }

    // Each live cluster occupies the slot of its smallest member.
    Matrix d = dist;
    std::vector<int> owner(static_cast<std::size_t>(m));
    std::iota(owner.begin(), owner.end(), 0);
    std::vector<double> size(static_cast<std::size_t>(m), 1.0);
    std::vector<bool> live(static_cast<std::size_t>(m), true);

    for (Index remaining = m; remaining > n; --remaining) {
        double best = std::numeric_limits<double>::infinity();
        Index bi = -1;
        Index bj = -1;
        for (Index i = 0; i < m; ++i) {
            if (!live[i]) continue;
            for (Index j = i + 1; j < m; ++j) {
                if (live[j] && d(i, j) < best) {
                    best = d(i, j);
                    bi = i;
                    bj = j;
                }
            }
        }

        const double ni = size[bi];
        const double nj = size[bj];
        const double dij2 = d(bi, bj) * d(bi, bj);
        for (Index k = 0; k < m; ++k) {
            if (!live[k] || k == bi || k == bj) continue;
            const double nk = size[k];
            const double merged2 =
                ((ni + nk) * d(k, bi) * d(k, bi) + (nj + nk) * d(k, bj) * d(k, bj) - nk * dij2) / (ni + nj + nk);
            const double merged = std::sqrt(std::max(merged2, 0.0));
            d(k, bi) = merged;
            d(bi, k) = merged;
        }
        size[bi] = ni + nj;
        live[bj] = false;
        for (auto& o : owner) {
            if (o == bj) o = static_cast<int>(bi);
        }
    }

    // Slots are smallest members, so ascending slot order is canonical.
    std::vector<int> label_of_slot(static_cast<std::size_t>(m), -1);
    int next = 0;
    for (Index i = 0; i < m; ++i) {
        if (live[i]) label_of_slot[i] = next++;
    }
    ClusterAssignment out;
    out.n_clusters = n;
    out.labels.reserve(static_cast<std::size_t>(m));
    for (int o : owner) {
        out.labels.push_back(label_of_slot[o]);
    }
    return out;
}

double annualised_sharpe(std::span<const double> series) {
    const auto count = series.size();
    if (count < 2) {
        throw std::invalid_argument("annualised_sharpe: need at least 2 observations");
    }
    const double mean = std::accumulate(series.begin(), series.end(), 0.0) / static_cast<double>(count);
    double ss = 0.0;
    for (double v : series) {
        ss += (v - mean) * (v - mean);
    }
    const double sd = std::sqrt(ss / static_cast<double>(count - 1));
    // a constant series leaves only rounding noise in sd
    if (!(sd > 1e-14 * std::abs(mean))) {
        throw UndefinedRatio("annualised_sharpe: zero standard deviation");
    }
    return mean / sd * std::sqrt(kTradingDaysPerYear);
}

double annualised_sharpe(const Vector& series) {
    return annualised_sharpe(std::span<const double>(series.data(), static_cast<std::size_t>(series.size())));
}

SelectionResult select_representatives(const ClusterAssignment& assign, const ReturnPanel& train) {
    if (static_cast<Index>(assign.labels.size()) != train.assets()) {
        throw std::invalid_argument("select_representatives: assignment does not cover the train tickers");
    }
    SelectionResult out;
    for (int c = 0; c < assign.n_clusters; ++c) {
        std::string best_ticker;
        double best_sharpe = -std::numeric_limits<double>::infinity();
        bool found = false;
        bool any_member = false;
        for (Index j = 0; j < train.assets(); ++j) {
            if (assign.labels[j] != c) continue;
            any_member = true;
            double s = 0.0;
            try {
                s = annualised_sharpe(Vector(train.log_returns.col(j)));
            } catch (const UndefinedRatio&) {
                continue;
            }
            const auto& ticker = train.tickers[j];
            if (!found || s > best_sharpe || (s == best_sharpe && ticker < best_ticker)) {
                best_sharpe = s;
                best_ticker = ticker;
                found = true;
            }
        }
        if (!any_member) {
            throw std::invalid_argument(fmt::format("select_representatives: cluster {} is empty", c));
        }
        if (!found) {
            throw UndefinedRatio(fmt::format("select_representatives: every member of cluster {} has zero variance", c));
        }
        out.tickers.push_back(best_ticker);
        out.per_cluster_sharpe.push_back(best_sharpe);
    }
    return out;
}

}  // namespace qrebal
