#include <cmath>

#include <gtest/gtest.h>

#include "qrebal/allocation.hpp"
#include "qrebal/clustering.hpp"
#include "support.hpp"

using namespace qrebal;

namespace {

ShrunkCovariance cov_of(const Matrix& sigma) {
    ShrunkCovariance c;
    for (Index j = 0; j < sigma.rows(); ++j) c.tickers.push_back(std::string(1, static_cast<char>('A' + j)));
    c.sigma = sigma;
    return c;
}

WeightVector wv(std::vector<double> w, WeightMethod m) {
    WeightVector out;
    out.weights = Eigen::Map<Vector>(w.data(), static_cast<Index>(w.size()));
    for (std::size_t j = 0; j < w.size(); ++j) out.tickers.push_back(std::string(1, static_cast<char>('A' + j)));
    out.method = m;
    return out;
}

GaConfig small_ga(std::uint64_t seed) {
    GaConfig cfg;
    cfg.population = 60;
    cfg.generations = 40;
    cfg.seed = seed;
    return cfg;
}

}  // namespace

TEST(Entropy, Extremes) {
    EXPECT_NEAR(normalised_entropy(Vector::Constant(10, 0.1)), 1.0, 1e-15);
    EXPECT_EQ(normalised_entropy(Vector::Constant(1, 1.0)), 0.0);
    Vector one_hot = Vector::Zero(4);
    one_hot(2) = 1.0;
    EXPECT_EQ(normalised_entropy(one_hot), 0.0);
    Vector near(10);
    near << 0.991, 0.001, 0.001, 0.001, 0.001, 0.001, 0.001, 0.001, 0.001, 0.001;
    const double h = -(0.991 * std::log(0.991) + 9 * 0.001 * std::log(0.001)) / std::log(10.0);
    EXPECT_NEAR(normalised_entropy(near), h, 1e-15);
    EXPECT_LT(normalised_entropy(near), 0.05);
}

TEST(Fitness, EqualWeightsEntropyTerm) {
    const auto panel = fixture::panel_from_gross(fixture::random_gross(2, 100, 10));
    const Vector eq = Vector::Constant(10, 0.1);
    EXPECT_NEAR(fitness(eq, panel, 0.05) - portfolio_sharpe(eq, panel), 0.05, 1e-14);
}

TEST(Fitness, SingleAssetIsSharpe) {
    const auto panel = fixture::panel_from_gross(fixture::random_gross(3, 50, 1));
    const Vector w = Vector::Ones(1);
    EXPECT_DOUBLE_EQ(fitness(w, panel, 0.05), annualised_sharpe(Vector(panel.log_returns.col(0))));
}

TEST(Ga, NeverWorseThanEqualWeights) {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto panel = fixture::panel_from_gross(fixture::random_gross(seed * 7, 120, 5));
        const auto r = ga_run(panel, small_ga(seed));
        EXPECT_GE(r.best_fitness, fitness(Vector::Constant(5, 0.2), panel, 0.05));
        EXPECT_NEAR(r.best.weights.sum(), 1.0, 1e-12);
        EXPECT_TRUE((r.best.weights.array() > 0.0).all());
        EXPECT_NEAR(r.best_fitness, fitness(r.best.weights, panel, 0.05), 1e-12);
    }
}

TEST(Ga, BestSoFarMonotone) {
    const auto panel = fixture::panel_from_gross(fixture::random_gross(9, 150, 6));
    const auto r = ga_run(panel, small_ga(4));
    ASSERT_EQ(r.best_per_generation.size(), 41u);
    for (std::size_t g = 1; g < r.best_per_generation.size(); ++g) {
        EXPECT_GE(r.best_per_generation[g], r.best_per_generation[g - 1]);
    }
}

TEST(Ga, DominantAssetGetsMoreWeight) {
    Rng rng(17);
    Matrix g(500, 2);
    for (Index t = 0; t < 500; ++t) {
        g(t, 0) = std::exp(0.002 + 0.01 * rng.normal());
        g(t, 1) = std::exp(-0.001 + 0.01 * rng.normal());
    }
    const auto w = ga_optimise(fixture::panel_from_gross(g), small_ga(1));
    EXPECT_GT(w.weights(0), w.weights(1));
}

TEST(Ga, Deterministic) {
    const auto panel = fixture::panel_from_gross(fixture::random_gross(5, 80, 4));
    const auto a = ga_optimise(panel, small_ga(11));
    const auto b = ga_optimise(panel, small_ga(11));
    EXPECT_EQ(a.weights, b.weights);
}

TEST(Ga, RejectsBadConfig) {
    const auto panel = fixture::panel_from_gross(fixture::random_gross(5, 80, 4));
    GaConfig cfg = small_ga(1);
    cfg.gene_low = 0.0;
    EXPECT_THROW(ga_run(panel, cfg), std::invalid_argument);
    cfg = small_ga(1);
    cfg.population = 1;
    EXPECT_THROW(ga_run(panel, cfg), std::invalid_argument);
}

TEST(MinVar, DiagonalInverseVariance) {
    Matrix s = Matrix::Zero(2, 2);
    s(0, 0) = 1.0;
    s(1, 1) = 4.0;
    const auto w = minvar(cov_of(s));
    EXPECT_NEAR(w.weights(0), 0.8, 1e-15);
    EXPECT_NEAR(w.weights(1), 0.2, 1e-15);
}

TEST(MinVar, IdentityGivesEqual) {
    const auto w = minvar(cov_of(Matrix::Identity(7, 7)));
    for (Index i = 0; i < 7; ++i) EXPECT_NEAR(w.weights(i), 1.0 / 7.0, 1e-15);
}

TEST(MinVar, NegativeRawWeightClipped) {
    // raw (1.25, -0.25) by hand: inverse = [[4,-1.5],[-1.5,1]] / 1.75, row sums 2.5 and -0.5
    Matrix s(2, 2);
    s << 1.0, 1.5, 1.5, 4.0;
    const auto w = minvar(cov_of(s));
    EXPECT_DOUBLE_EQ(w.weights(0), 1.0);
    EXPECT_DOUBLE_EQ(w.weights(1), 0.0);
}

TEST(MinVar, SingularUsesPseudoinverse) {
    // two identical assets: rank one, weights split evenly
    const auto w = minvar(cov_of(Matrix::Constant(2, 2, 0.04)));
    EXPECT_NEAR(w.weights(0), 0.5, 1e-12);
    EXPECT_NEAR(w.weights(1), 0.5, 1e-12);
}

TEST(Ensemble, Means) {
    const auto eq = wv({0.5, 0.5}, WeightMethod::Equal);
    const auto e = ensemble(wv({1, 0}, WeightMethod::GA), wv({0, 1}, WeightMethod::MinVar), eq);
    EXPECT_DOUBLE_EQ(e.weights(0), 0.5);
    EXPECT_DOUBLE_EQ(e.weights(1), 0.5);
    EXPECT_EQ(e.method, WeightMethod::Ensemble);
    const auto same = ensemble(wv({0.5, 0.5}, WeightMethod::GA), wv({0.5, 0.5}, WeightMethod::MinVar), eq);
    EXPECT_EQ(same.weights, eq.weights);
}

TEST(Ensemble, TableFourColumnBlend) {
    const auto e = ensemble(wv({0.075, 0.925}, WeightMethod::GA), wv({0.041, 0.959}, WeightMethod::MinVar),
                            wv({0.100, 0.900}, WeightMethod::Equal));
    EXPECT_NEAR(100.0 * e.weights(0), 7.2, 0.05);
}

TEST(EqualWeights, OneOverN) {
    const auto w = equal_weights({"A", "B", "C", "D"});
    for (Index i = 0; i < 4; ++i) EXPECT_DOUBLE_EQ(w.weights(i), 0.25);
    EXPECT_THROW(equal_weights({}), std::invalid_argument);
}

TEST(WeightMethodNames, RoundTrip) {
    for (auto m : {WeightMethod::GA, WeightMethod::MinVar, WeightMethod::Equal, WeightMethod::Ensemble}) {
        EXPECT_EQ(parse_weight_method(to_string(m)), m);
    }
    EXPECT_THROW(parse_weight_method("Kelly"), std::invalid_argument);
}
