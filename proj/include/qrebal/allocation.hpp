#pragma once

#include "qrebal/common.hpp"
#include "qrebal/market_data.hpp"
#include "qrebal/shrinkage.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace qrebal {

enum class WeightMethod { GA, MinVar, Equal, Ensemble };

std::string_view to_string(WeightMethod m);
WeightMethod parse_weight_method(std::string_view name);

/// Long-only weights on the simplex, tagged with how they were produced.
struct WeightVector {
    std::vector<std::string> tickers;
    Vector weights;
    WeightMethod method = WeightMethod::Equal;
    double train_sharpe = 0.0;

    Index size() const { return weights.size(); }
};

struct GaConfig {
    int population = 300;
    int generations = 200;
    double mutation_rate = 0.15;
    double gene_low = 0.01;
    double gene_high = 1.0;
    double lambda_ent = 0.05;
    int tournament = 3;
    std::uint64_t seed = 0;

    void validate() const;
};

/// Daily portfolio log returns ln(R_t . w) for fixed weights.
Vector portfolio_log_returns(const Vector& weights, const Matrix& gross_returns);

/// Annualised Sharpe of the fixed-weight portfolio on `returns`.
double portfolio_sharpe(const Vector& weights, const ReturnPanel& returns);

/// -sum w ln w / ln n, with 0 ln 0 = 0 and H = 0 when n = 1.
double normalised_entropy(const Vector& weights);

/// Sharpe of ln(R_t . w) plus lambda_ent times the normalised entropy.
double fitness(const Vector& weights, const ReturnPanel& train, double lambda_ent);

struct GaResult {
    WeightVector best;
    double best_fitness = 0.0;
    std::vector<double> best_per_generation;  // best-so-far after each generation
};

/// Entropy-regularised genetic search over gene vectors in [gene_low, gene_high].
/// Genes are normalised by their sum before evaluation. The equal-weight
/// individual is always part of the first generation and the best individual
/// is carried over unchanged, so the result never scores below equal weights.
GaResult ga_run(const ReturnPanel& train, const GaConfig& cfg);
WeightVector ga_optimise(const ReturnPanel& train, const GaConfig& cfg);

/// Global minimum variance weights via the pseudoinverse, with negative
/// entries projected to zero and the rest renormalised.
WeightVector minvar(const ShrunkCovariance& cov);

WeightVector equal_weights(const std::vector<std::string>& tickers);

/// Arithmetic mean of the three vectors.
WeightVector ensemble(const WeightVector& ga, const WeightVector& mv, const WeightVector& eq);

/// Fill in `train_sharpe` for `w` on the given train panel.
void annotate_train_sharpe(WeightVector& w, const ReturnPanel& train);

}  // namespace qrebal
