#include "qrebal/shrinkage.hpp"

#include <algorithm>
#include <cmath>

namespace qrebal {

ShrunkCovariance ledoit_wolf(const ReturnPanel& returns) {
    const Matrix& x = returns.log_returns;
    const Index n_obs = x.rows();
    const Index n_assets = x.cols();
    if (n_obs < 2) {
        throw std::invalid_argument("ledoit_wolf: need at least 2 return rows, got " + std::to_string(n_obs));
    }
    if (n_assets < 1) {
        throw std::invalid_argument("ledoit_wolf: no assets");
    }

    const Eigen::RowVectorXd mean = x.colwise().mean();
    const Matrix centred = x.rowwise() - mean;
    Matrix sample = (centred.transpose() * centred) / static_cast<double>(n_obs - 1);

    for (Index j = 0; j < n_assets; ++j) {
        if (!(sample(j, j) > 0.0)) {
            const std::string name =
                static_cast<std::size_t>(j) < returns.tickers.size() ? returns.tickers[j] : std::to_string(j);
            throw std::invalid_argument("ledoit_wolf: asset '" + name + "' has zero variance");
        }
    }

    // Frobenius norms are scaled by 1/M throughout; the intensity is a ratio
    // of two such norms so the scale cancels, but it keeps magnitudes sane.
    const double m = static_cast<double>(n_assets);
    const double mu = sample.trace() / m;
    Matrix target_gap = sample;
    target_gap.diagonal().array() -= mu;
    const double d2 = target_gap.squaredNorm() / m;

    double b_bar2 = 0.0;
    for (Index t = 0; t < n_obs; ++t) {
        const Vector row = centred.row(t).transpose();
        b_bar2 += (row * row.transpose() - sample).squaredNorm() / m;
    }
    b_bar2 /= static_cast<double>(n_obs) * static_cast<double>(n_obs);

    double alpha = 0.0;
    if (d2 > 0.0) {
        alpha = std::clamp(std::min(b_bar2, d2) / d2, 0.0, 1.0);
    }

    ShrunkCovariance out;
    out.tickers = returns.tickers;
    out.alpha = alpha;
    out.mu_target = mu;
    out.sigma = (1.0 - alpha) * sample;
    out.sigma.diagonal().array() += alpha * mu;
    out.sigma = 0.5 * (out.sigma + out.sigma.transpose()).eval();
    out.sample = std::move(sample);
    out.corr = correlation_from_covariance(out.sigma);
    out.dist = out.corr.unaryExpr([](double r) { return angular_distance(r); });
    out.dist.diagonal().setZero();
    return out;
}

Matrix correlation_from_covariance(const Matrix& sigma) {
    const Vector inv_sd = sigma.diagonal().array().sqrt().inverse();
    Matrix corr = inv_sd.asDiagonal() * sigma * inv_sd.asDiagonal();
    corr = corr.cwiseMax(-1.0).cwiseMin(1.0);
    corr.diagonal().setOnes();
    return corr;
}

double angular_distance(double rho) {
    constexpr double kSlack = 1e-12;
    if (!(std::abs(rho) <= 1.0 + kSlack)) {
        throw std::invalid_argument("angular_distance: correlation " + std::to_string(rho) + " outside [-1, 1]");
    }
    rho = std::clamp(rho, -1.0, 1.0);
    return std::sqrt(0.5 * (1.0 - rho));
}

ShrunkCovariance ShrunkCovariance::restrict_to(const std::vector<std::string>& names) const {
    std::vector<Index> idx;
    for (const auto& name : names) {
        const auto it = std::find(tickers.begin(), tickers.end(), name);
        if (it == tickers.end()) {
            throw std::invalid_argument("unknown ticker '" + name + "'");
        }
        idx.push_back(static_cast<Index>(it - tickers.begin()));
    }
    ShrunkCovariance out;
    out.tickers = names;
    out.alpha = alpha;
    out.mu_target = mu_target;
    out.sigma = sigma(idx, idx);
    out.sample = sample(idx, idx);
    out.corr = corr(idx, idx);
    out.dist = dist(idx, idx);
    return out;
}

}  // namespace qrebal
