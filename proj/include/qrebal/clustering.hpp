#pragma once

#include "qrebal/common.hpp"
#include "qrebal/market_data.hpp"

#include <span>
#include <string>
#include <vector>

namespace qrebal {

struct ClusterAssignment {
    std::vector<int> labels;  // per asset, in 0..n_clusters-1
    int n_clusters = 0;
};

struct SelectionResult {
    std::vector<std::string> tickers;       // one representative per cluster, in cluster order
    std::vector<double> per_cluster_sharpe; // annualised train Sharpe of each representative
};

/// Agglomerative Ward clustering on a precomputed distance matrix, using the
/// Lance-Williams update, stopped when `n` clusters remain.
///
/// Cluster ids are canonical: clusters are numbered in order of their
/// lowest-index member. Among equally close pairs the one with the smallest
/// (i, j) member indices merges first.
ClusterAssignment ward_cluster(const Matrix& dist, int n);

/// (mean / sample std) * sqrt(252). Throws UndefinedRatio on zero spread.
double annualised_sharpe(std::span<const double> series);
double annualised_sharpe(const Vector& series);

/// Per cluster, the member with the highest annualised Sharpe on `train`
/// log returns. Ties go to the lexicographically smallest ticker. Members
/// with zero variance are skipped.
SelectionResult select_representatives(const ClusterAssignment& assign, const ReturnPanel& train);

}  // namespace qrebal
