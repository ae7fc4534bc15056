#pragma once

#include "qrebal/common.hpp"
#include "qrebal/market_data.hpp"

namespace qrebal {

/// Ledoit-Wolf covariance estimate and the matrices derived from it.
struct ShrunkCovariance {
    std::vector<std::string> tickers;
    Matrix sigma;       // shrunk covariance, return^2 per day
    Matrix sample;      // unshrunk sample covariance (denominator T-1)
    double alpha = 0.0; // shrinkage intensity in [0, 1]
    double mu_target = 0.0;
    Matrix corr;        // correlation of sigma
    Matrix dist;        // angular distance sqrt((1 - corr) / 2)

    /// Restrict to a subset of assets, in the given order.
    ShrunkCovariance restrict_to(const std::vector<std::string>& names) const;
};

/// Shrink the sample covariance of log returns toward mu * I, with mu the
/// mean sample eigenvalue and the intensity given by the Ledoit-Wolf (2004)
/// analytic formula. Throws std::invalid_argument for a constant asset.
ShrunkCovariance ledoit_wolf(const ReturnPanel& returns);

/// d = sqrt((1 - rho) / 2). Overshoot up to 1e-12 beyond [-1, 1] is clamped.
double angular_distance(double rho);

/// D^{-1/2} sigma D^{-1/2} with entries clamped to [-1, 1].
Matrix correlation_from_covariance(const Matrix& sigma);

}  // namespace qrebal
