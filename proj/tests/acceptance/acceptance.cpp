// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>

#include <fmt/format.h>

#include "../unit/lw_oracle.hpp"
#include "../unit/support.hpp"
#include "qrebal/allocation.hpp"
#include "qrebal/backtest.hpp"
#include "qrebal/clustering.hpp"
#include "qrebal/pipeline.hpp"
#include "qrebal/qaoa.hpp"
#include "qrebal/schedule_qubo.hpp"
#include "qrebal/shrinkage.hpp"

using namespace qrebal;
namespace fs = std::filesystem;

namespace {

struct Verdict {
    bool pass = false;
    std::string detail;
};

WeightVector weights_of(const Vector& w) {
    WeightVector out;
    out.weights = w;
    for (Index j = 0; j < w.size(); ++j) out.tickers.push_back(fmt::format("A{}", j));
    return out;
}

QaoaConfig default_qaoa(std::uint64_t seed) {
    QaoaConfig cfg;  // p = 2, R = 5, 2048 / 4096 shots, 150 evaluations
    cfg.seed = seed;
    return cfg;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Verdict ising_equivalence() {
    Rng rng(101);
    double worst = 0.0;
    for (int rep = 0; rep < 100; ++rep) {
        const Index w = 2 + rep % 9;
        const Matrix q = fixture::random_symmetric(rng, w, -2.0, 2.0);
        const auto model = to_ising(q);
        for (std::uint64_t x = 0; x < (std::uint64_t{1} << w); ++x) {
            worst = std::max(worst, std::abs(qubo_energy(q, x) - model.energy(x)));
        }
    }
    return {worst < 1e-9, fmt::format("max |x'Qx - H(z)| = {:.3g} over 100 QUBOs, W = 2..10", worst)};
}

Verdict qaoa_quality() {
    Rng rng(202);
    int low = 0;
    int exact = 0;
    for (int inst = 0; inst < 50; ++inst) {
        const Matrix q = fixture::random_symmetric(rng, 6);
        const auto out = optimise_angles(to_ising(q), q, default_qaoa(1000 + static_cast<std::uint64_t>(inst)));
        std::vector<double> energies(64);
        for (std::uint64_t x = 0; x < 64; ++x) energies[x] = qubo_energy(q, x);
        std::sort(energies.begin(), energies.end());
        const double e = out.best_bits.energy;
        // within the lowest 10%: no worse than the 7th best of 64
        if (e <= energies[6] + 1e-12) ++low;
        if (e <= energies[0] + 1e-12) ++exact;
    }
    return {low >= 35 && exact >= 20,
            fmt::format("{}/50 in lowest 10% (need 35), {}/50 exact optimum (need 20)", low, exact)};
}

Verdict enrichment(const fs::path& root) {
    const auto loaded = load_csv(root / "data" / "golden_prices.csv");
    const auto returns = to_returns(loaded.panel);
    const Matrix window = returns.gross_returns.bottomRows(249).topRows(83);
    const Index n = window.cols();
    const auto qubo = build_qubo(Vector::Constant(n, 1.0 / static_cast<double>(n)), window, 8, QuboParams{});
    const auto out = optimise_angles(to_ising(qubo.q), qubo.q, default_qaoa(42));
    const double freq = static_cast<double>(out.histogram.at(out.best_bits.packed())) / 4096.0;
    const double factor = freq * 256.0;
    return {factor >= 4.0, fmt::format("top bitstring {} at frequency {:.4f} = {:.1f}x uniform (need 4x)",
                                       out.best_bits.to_string(), freq, factor)};
}

Verdict no_lookahead() {
    const Matrix gross = fixture::random_gross(303, 249, 5, 0.015);
    const Vector target = Vector::Constant(5, 0.2);
    QaoaConfig cfg = default_qaoa(9);
    cfg.restarts = 3;
    const auto base = walk_forward(fixture::panel_from_gross(gross), target, 3, 8, cfg, QuboParams{});
    bool ok = true;
    for (Index k = 0; k + 1 < 3; ++k) {
        Matrix changed = gross;
        Rng rng(404 + static_cast<std::uint64_t>(k));
        for (Index t = (k + 1) * 83; t < 249; ++t)
            for (Index j = 0; j < 5; ++j) changed(t, j) *= std::exp(0.05 * rng.normal());
        const auto alt = walk_forward(fixture::panel_from_gross(changed), target, 3, 8, cfg, QuboParams{});
        for (Index w = 0; w <= k; ++w) {
            ok = ok && alt.windows[static_cast<std::size_t>(w)].outcome.histogram ==
                           base.windows[static_cast<std::size_t>(w)].outcome.histogram;
        }
        ok = ok && std::equal(base.schedule.begin(), base.schedule.begin() + (k + 1) * 83, alt.schedule.begin());
    }
    return {ok, "schedules and histograms of earlier chunks unchanged after perturbing later chunks"};
}

Verdict backtest_identities() {
    const Index t_days = 249;
    const auto flat = fixture::panel_from_gross(Matrix::Constant(t_days, 4, 1.001));
    const auto bh = run(flat, {"bh", weights_of(Vector::Constant(4, 0.25)), BuyAndHold{}}, 0.001);
    const double rel = std::abs(bh.equity_curve.back() / std::pow(1.001, static_cast<double>(t_days)) - 1.0);

    Matrix common(t_days, 4);
    Rng rng(505);
    for (Index t = 0; t < t_days; ++t) common.row(t).setConstant(std::exp(0.01 * rng.normal()));
    const auto drift_free = fixture::panel_from_gross(common);
    double max_cost = 0.0;
    for (const Scheduler& s : std::vector<Scheduler>{Periodic{1}, Periodic{10}, Threshold{0.01},
                                                     ExplicitSchedule{std::vector<std::uint8_t>(t_days, 1)}}) {
        Vector w(4);
        w << 0.1, 0.2, 0.3, 0.4;
        max_cost = std::max(max_cost, run(drift_free, {"x", weights_of(w), s}, 0.001).total_cost_bp);
    }

    Matrix worked(3, 2);
    worked << 1.0, 1.0, 2.0, 1.0, 1.0, 1.0;
    const auto r = run(fixture::panel_from_gross(worked), {"x", weights_of(Vector::Constant(2, 0.5)),
                                                            ExplicitSchedule{{0, 0, 1}}},
                       0.001);
    const double cost = r.total_cost_bp / 1e4;
    const bool ok = rel < 1e-12 && max_cost == 0.0 && std::abs(cost - 0.001 / 3.0) < 1e-12;
    return {ok, fmt::format("V_T/1.001^T - 1 = {:.2g}; drift-free cost {} bp; worked cost {:.15f}", rel, max_cost,
                            cost)};
}

Verdict rebalance_counts() {
    const auto panel = fixture::panel_from_gross(fixture::random_gross(606, 249, 3));
    const auto w = weights_of(Vector::Constant(3, 1.0 / 3.0));
    const Index daily = run(panel, {"d", w, Periodic{1}}, 0.001).rebalance_count;
    const Index ten = run(panel, {"d", w, Periodic{10}}, 0.001).rebalance_count;
    return {daily == 248 && ten == 24, fmt::format("periodic(1) = {}, periodic(10) = {} on 249 days", daily, ten)};
}

Verdict minvar_optimality() {
    Rng rng(707);
    int found = 0;
    bool ok = true;
    double worst_gap = -1e300;
    while (found < 20) {
        Matrix a(10, 10);
        for (Index i = 0; i < 10; ++i)
            for (Index j = 0; j < 10; ++j) a(i, j) = rng.normal();
        Matrix sigma = 0.05 * a * a.transpose() / 10.0;
        for (Index i = 0; i < 10; ++i) sigma(i, i) += rng.uniform(0.5, 2.0);
        const Vector raw = sigma.inverse() * Vector::Ones(10);
        if ((raw.array() <= 0.0).any()) continue;  // clipping would trigger
        ++found;
        ShrunkCovariance cov;
        cov.tickers = weights_of(Vector::Zero(10)).tickers;
        cov.sigma = sigma;
        const Vector w = minvar(cov).weights;
        const double var = w.dot(sigma * w);
        double best = 1e300;
        for (int s = 0; s < 10'000; ++s) {
            Vector p(10);
            for (Index i = 0; i < 10; ++i) p(i) = -std::log(1.0 - rng.uniform());
            p /= p.sum();
            best = std::min(best, p.dot(sigma * p));
        }
        worst_gap = std::max(worst_gap, var - best);
        ok = ok && var <= best;
    }
    ShrunkCovariance diag;
    diag.tickers = {"A", "B"};
    diag.sigma = Matrix::Zero(2, 2);
    diag.sigma(0, 0) = 1.0;
    diag.sigma(1, 1) = 4.0;
    const Vector w = minvar(diag).weights;
    const bool analytic = std::abs(w(0) - 0.8) <= 1e-15 && std::abs(w(1) - 0.2) <= 1e-15;
    return {ok && analytic, fmt::format("20 matrices, max(w'Sw - best random) = {:.3g}; diag(1,4) -> ({}, {})",
                                        worst_gap, w(0), w(1))};
}

Verdict ledoit_wolf_oracle() {
    double worst = 0.0;
    bool alpha_ok = true;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        Rng rng(800 + seed);
        const Index t = 15 + static_cast<Index>(rng.below(200));
        const Index m = 2 + static_cast<Index>(rng.below(12));
        Matrix x(t, m);
        for (Index i = 0; i < t; ++i)
            for (Index j = 0; j < m; ++j) x(i, j) = 0.01 * rng.normal() + (j % 2 ? 0.004 * x(i, 0) : 0.0);
        const auto est = ledoit_wolf(fixture::panel_from_log(x));
        const auto oracle = fixture::lw_oracle(x);
        worst = std::max(worst, std::abs(est.alpha - oracle.alpha));
        for (Index i = 0; i < m; ++i)
            for (Index j = 0; j < m; ++j) worst = std::max(worst, std::abs(est.sigma(i, j) - oracle.sigma[i][j]));
        alpha_ok = alpha_ok && est.alpha >= 0.0 && est.alpha <= 1.0;
    }
    return {worst <= 1e-10 && alpha_ok, fmt::format("max deviation from oracle {:.3g} on 20 panels", worst)};
}

Verdict clustering_recovery() {
    int recovered = 0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const auto panel = fixture::block_panel(900 + seed, 2, 5, 500, 0.7, 0.05);
        const auto labels = ward_cluster(ledoit_wolf(panel).dist, 2).labels;
        bool ok = true;
        for (std::size_t j = 0; j < labels.size(); ++j) ok = ok && labels[j] == static_cast<int>(j / 5);
        recovered += ok;
    }
    return {recovered == 20, fmt::format("{}/20 planted partitions recovered", recovered)};
}

Verdict ga_improvement() {
    bool ok = true;
    double min_margin = 1e300;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto panel = fixture::block_panel(1000 + seed, 3, 2, 504, 0.5, 0.1);
        GaConfig cfg;
        cfg.population = 100;
        cfg.generations = 60;
        cfg.seed = seed;
        const auto r = ga_run(panel, cfg);
        const double eq = fitness(Vector::Constant(6, 1.0 / 6.0), panel, cfg.lambda_ent);
        min_margin = std::min(min_margin, r.best_fitness - eq);
        ok = ok && r.best_fitness >= eq;
        for (std::size_t g = 1; g < r.best_per_generation.size(); ++g) {
            ok = ok && r.best_per_generation[g] >= r.best_per_generation[g - 1];
        }
    }
    return {ok, fmt::format("5 panels, min(GA - equal-weight fitness) = {:.4f}, best-so-far monotone", min_margin)};
}

Verdict golden_run(const fs::path& root) {
    auto cfg = load_config(root / "data" / "golden.cfg");
    cfg.out = fs::temp_directory_path() / "qrebal_acceptance_golden";
    fs::remove_all(cfg.out);
    cmd_run(cfg);
    const std::string produced = slurp(cfg.out / "metrics.csv");
    const std::string frozen = slurp(root / "tests" / "golden" / "metrics.csv");
    return {!frozen.empty() && produced == frozen,
            frozen.empty() ? "frozen metrics file missing" : "metrics.csv byte-identical to frozen copy"};
}

}  // namespace

int main() {
    const fs::path root = QREBAL_SOURCE_DIR;
    const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
        {"QUBO/Ising energy equivalence", ising_equivalence},
        {"QAOA quality against brute force (W=6)", qaoa_quality},
        {"Top-bitstring enrichment (W=8)", [&] { return enrichment(root); }},
        {"Walk-forward no-lookahead", no_lookahead},
        {"Backtest identities", backtest_identities},
        {"Rebalance-count conventions", rebalance_counts},
        {"MinVar optimality", minvar_optimality},
        {"Ledoit-Wolf oracle match", ledoit_wolf_oracle},
        {"Clustering recovery", clustering_recovery},
        {"GA improvement", ga_improvement},
        {"End-to-end golden run", [&] { return golden_run(root); }},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Verdict v;
        try {
            v = criteria[i].second();
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        failed += !v.pass;
        std::printf("%s [%zu] %s: %s\n", v.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), v.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%zu/%zu criteria passed\n", criteria.size() - static_cast<std::size_t>(failed), criteria.size());
    return failed == 0 ? 0 : 1;
}
