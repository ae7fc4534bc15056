#include "qrebal/allocation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "qrebal/clustering.hpp"
#include "qrebal/parallel.hpp"
#include "qrebal/random.hpp"

namespace qrebal {

std::string_view to_string(WeightMethod m) {
    switch (m) {
        case WeightMethod::GA: return "GA";
        case WeightMethod::MinVar: return "MinVar";
        case WeightMethod::Equal: return "Equal";
        case WeightMethod::Ensemble: return "Ensemble";
    }
    return "?";
}

WeightMethod parse_weight_method(std::string_view name) {
    for (auto m : {WeightMethod::GA, WeightMethod::MinVar, WeightMethod::Equal, WeightMethod::Ensemble}) {
        if (name == to_string(m)) return m;
    }
    throw std::invalid_argument(fmt::format("unknown weight method '{}'", name));
}

void GaConfig::validate() const {
    if (population < 2 || generations < 0 || tournament < 1) {
        throw std::invalid_argument("GaConfig: population >= 2, generations >= 0, tournament >= 1 required");
    }
    if (!(gene_low > 0.0 && gene_low < gene_high)) {
        throw std::invalid_argument("GaConfig: need 0 < gene_low < gene_high");
    }
    if (!(mutation_rate >= 0.0 && mutation_rate <= 1.0)) {
        throw std::invalid_argument("GaConfig: mutation_rate must lie in [0, 1]");
    }
}

Vector portfolio_log_returns(const Vector& weights, const Matrix& gross_returns) {
    if (weights.size() != gross_returns.cols()) {
        throw std::invalid_argument(fmt::format("weight length {} does not match {} assets", weights.size(),
                                                gross_returns.cols()));
    }
    const Vector growth = gross_returns * weights;
    if (!(growth.array() > 0.0).all()) {
        throw std::domain_error("portfolio gross return is not positive");
    }
    return growth.array().log();
}

double portfolio_sharpe(const Vector& weights, const ReturnPanel& returns) {
    return annualised_sharpe(portfolio_log_returns(weights, returns.gross_returns));
}

double normalised_entropy(const Vector& weights) {
    const Index n = weights.size();
    if (n <= 1) {
        return 0.0;
    }
    double h = 0.0;
    for (Index i = 0; i < n; ++i) {
        const double w = weights(i);
        if (w > 0.0) h -= w * std::log(w);
    }
    return h / std::log(static_cast<double>(n));
}

double fitness(const Vector& weights, const ReturnPanel& train, double lambda_ent) {
    return portfolio_sharpe(weights, train) + lambda_ent * normalised_entropy(weights);
}

namespace {

Vector genes_to_weights(const Vector& genes) { return genes / genes.sum(); }

double safe_fitness(const Vector& genes, const ReturnPanel& train, double lambda_ent) {
    try {
        return fitness(genes_to_weights(genes), train, lambda_ent);
    } catch (const UndefinedRatio&) {
        return -std::numeric_limits<double>::infinity();
    }
}

std::size_t argmax(const std::vector<double>& v) {
    // First index wins ties so the result does not depend on evaluation order.
    return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

}  // namespace

GaResult ga_run(const ReturnPanel& train, const GaConfig& cfg) {
    cfg.validate();
    const Index n = train.assets();
    if (n < 2) {
        throw std::invalid_argument("ga_optimise: need at least 2 assets");
    }
    const Vector eq = Vector::Constant(n, 1.0 / static_cast<double>(n));
    try {
        (void)fitness(eq, train, cfg.lambda_ent);
    } catch (const UndefinedRatio&) {
        throw std::invalid_argument("ga_optimise: train panel is degenerate (equal-weight portfolio has zero volatility)");
    }

    Rng rng(derive_seed(cfg.seed, {0x4741ULL}));
    const auto pop_size = static_cast<std::size_t>(cfg.population);
    std::vector<Vector> pop(pop_size, Vector(n));
    pop[0].setConstant(cfg.gene_high);
    for (std::size_t i = 1; i < pop_size; ++i) {
        for (Index g = 0; g < n; ++g) pop[i](g) = rng.uniform(cfg.gene_low, cfg.gene_high);
    }

    std::vector<double> fit(pop_size);
    auto evaluate = [&] {
        parallel_for(pop_size, [&](std::size_t i) { fit[i] = safe_fitness(pop[i], train, cfg.lambda_ent); });
    };
    evaluate();

    GaResult result;
    std::size_t best_idx = argmax(fit);
    Vector best_genes = pop[best_idx];
    double best_fit = fit[best_idx];
    result.best_per_generation.push_back(best_fit);

    auto tournament = [&]() -> const Vector& {
        std::size_t winner = static_cast<std::size_t>(rng.below(pop_size));
        for (int k = 1; k < cfg.tournament; ++k) {
            const auto c = static_cast<std::size_t>(rng.below(pop_size));
            if (fit[c] > fit[winner] || (fit[c] == fit[winner] && c < winner)) winner = c;
        }
        return pop[winner];
    };

    std::vector<Vector> next(pop_size, Vector(n));
    for (int gen = 0; gen < cfg.generations; ++gen) {
        next[0] = best_genes;
        for (std::size_t i = 1; i < pop_size; ++i) {
            const Vector& a = tournament();
            const Vector& b = tournament();
            for (Index g = 0; g < n; ++g) {
                next[i](g) = rng.bernoulli(0.5) ? a(g) : b(g);
                if (rng.bernoulli(cfg.mutation_rate)) {
                    next[i](g) = rng.uniform(cfg.gene_low, cfg.gene_high);
                }
            }
        }
        std::swap(pop, next);
        evaluate();
        best_idx = argmax(fit);
        if (fit[best_idx] > best_fit) {
            best_fit = fit[best_idx];
            best_genes = pop[best_idx];
        }
        result.best_per_generation.push_back(best_fit);
    }

    result.best.tickers = train.tickers;
    result.best.weights = genes_to_weights(best_genes);
    result.best.method = WeightMethod::GA;
    result.best.train_sharpe = portfolio_sharpe(result.best.weights, train);
    result.best_fitness = best_fit;
    return result;
}

WeightVector ga_optimise(const ReturnPanel& train, const GaConfig& cfg) { return ga_run(train, cfg).best; }

WeightVector minvar(const ShrunkCovariance& cov) {
    const Matrix& sigma = cov.sigma;
    const Index n = sigma.rows();
    if (n < 1 || sigma.cols() != n) {
        throw std::invalid_argument("minvar: covariance must be square and non-empty");
    }
    if (!sigma.isApprox(sigma.transpose(), 1e-10)) {
        throw std::invalid_argument("minvar: covariance is not symmetric");
    }
    const Matrix pinv = Eigen::CompleteOrthogonalDecomposition<Matrix>(sigma).pseudoInverse();
    const Vector raw = pinv * Vector::Ones(n);
    const double denom = raw.sum();
    if (!(std::abs(denom) > 0.0)) {
        throw std::invalid_argument("minvar: 1' pinv(sigma) 1 is zero");
    }
    Vector w = (raw / denom).cwiseMax(0.0);
    const double total = w.sum();
    if (!(total > 0.0)) {
        throw std::invalid_argument("minvar: every weight was projected to zero");
    }
    WeightVector out;
    out.tickers = cov.tickers;
    out.weights = w / total;
    out.method = WeightMethod::MinVar;
    out.train_sharpe = std::nan("");
    return out;
}

WeightVector equal_weights(const std::vector<std::string>& tickers) {
    if (tickers.empty()) {
        throw std::invalid_argument("equal_weights: no assets");
    }
    WeightVector out;
    out.tickers = tickers;
    out.weights = Vector::Constant(static_cast<Index>(tickers.size()), 1.0 / static_cast<double>(tickers.size()));
    out.method = WeightMethod::Equal;
    out.train_sharpe = std::nan("");
    return out;
}

WeightVector ensemble(const WeightVector& ga, const WeightVector& mv, const WeightVector& eq) {
    if (ga.size() != mv.size() || ga.size() != eq.size()) {
        throw std::invalid_argument(
            fmt::format("ensemble: length mismatch ({}, {}, {})", ga.size(), mv.size(), eq.size()));
    }
    WeightVector out;
    out.tickers = ga.tickers;
    out.weights = (ga.weights + mv.weights + eq.weights) / 3.0;
    out.method = WeightMethod::Ensemble;
    out.train_sharpe = std::nan("");
    return out;
}

void annotate_train_sharpe(WeightVector& w, const ReturnPanel& train) {
    w.train_sharpe = portfolio_sharpe(w.weights, train);
}

}  // namespace qrebal
