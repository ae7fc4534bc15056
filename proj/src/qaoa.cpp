#include "qrebal/qaoa.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "qrebal/nelder_mead.hpp"
#include "qrebal/parallel.hpp"

namespace qrebal {

namespace {

// Stream ids under a restart's seed.
constexpr std::uint64_t kInitStream = 1;
constexpr std::uint64_t kShotStream = 2;
constexpr std::uint64_t kEvalStream = 3;

std::vector<double> qubo_energy_table(const Matrix& q) {
    const std::uint64_t states = std::uint64_t{1} << q.rows();
    std::vector<double> table(states);
    for (std::uint64_t x = 0; x < states; ++x) table[x] = qubo_energy(q, x);
    return table;
}

double mean_energy(const Histogram& h, const std::vector<double>& table) {
    double total = 0.0;
    std::uint64_t shots = 0;
    for (const auto& [x, count] : h) {
        total += static_cast<double>(count) * table[x];
        shots += count;
    }
    return total / static_cast<double>(shots);
}

}  // namespace

void QaoaConfig::validate() const {
    if (depth < 1 || restarts < 1 || opt_shots < 1 || eval_shots < 1 || max_iters < 1) {
        throw std::invalid_argument("QaoaConfig: depth, restarts, shots and max_iters must all be >= 1");
    }
    if (!(initial_step > 0.0)) {
        throw std::invalid_argument("QaoaConfig: initial_step must be positive");
    }
}

double IsingModel::energy(std::uint64_t x) const {
    const Index w = size();
    double e = offset;
    for (Index i = 0; i < w; ++i) {
        const double zi = ((x >> i) & 1U) ? -1.0 : 1.0;
        e += h(i) * zi;
        for (Index k = i + 1; k < w; ++k) {
            const double zk = ((x >> k) & 1U) ? -1.0 : 1.0;
            e += j(i, k) * zi * zk;
        }
    }
    return e;
}

IsingModel to_ising(const Matrix& q) {
    const Index w = q.rows();
    if (q.cols() != w) {
        throw std::invalid_argument("to_ising: QUBO matrix must be square");
    }
    // x'Qx only sees the symmetric part.
    const Matrix s = 0.5 * (q + q.transpose());
    IsingModel m;
    m.h = Vector::Zero(w);
    m.j = Matrix::Zero(w, w);
    m.offset = 0.0;
    for (Index i = 0; i < w; ++i) {
        m.h(i) -= 0.5 * s(i, i);
        m.offset += 0.5 * s(i, i);
        for (Index k = i + 1; k < w; ++k) {
            m.j(i, k) = 0.5 * s(i, k);
            m.h(i) -= 0.5 * s(i, k);
            m.h(k) -= 0.5 * s(i, k);
            m.offset += 0.5 * s(i, k);
        }
    }
    return m;
}

std::vector<double> cost_diagonal(const IsingModel& model) {
    const Index w = model.size();
    if (w > kMaxSimulatedQubits) {
        throw std::invalid_argument(
            fmt::format("{} qubits exceeds the {}-qubit simulation guard", w, kMaxSimulatedQubits));
    }
    const std::uint64_t states = std::uint64_t{1} << w;
    std::vector<double> diag(states);
    for (std::uint64_t x = 0; x < states; ++x) diag[x] = model.energy(x) - model.offset;
    return diag;
}

namespace {

Statevector run_circuit(Index w, const std::vector<double>& diag, const std::vector<double>& gammas,
                        const std::vector<double>& betas) {
    const std::size_t states = std::size_t{1} << w;
    Statevector psi(states, std::complex<double>(1.0 / std::sqrt(static_cast<double>(states)), 0.0));
    const std::complex<double> minus_i(0.0, -1.0);
    for (std::size_t layer = 0; layer < gammas.size(); ++layer) {
        const double gamma = gammas[layer];
        for (std::size_t x = 0; x < states; ++x) {
            psi[x] *= std::polar(1.0, -gamma * diag[x]);
        }
        const double c = std::cos(betas[layer]);
        const std::complex<double> mis = minus_i * std::sin(betas[layer]);
        for (Index qubit = 0; qubit < w; ++qubit) {
            const std::size_t mask = std::size_t{1} << qubit;
            for (std::size_t x = 0; x < states; ++x) {
                if (x & mask) continue;
                const auto a = psi[x];
                const auto b = psi[x | mask];
                psi[x] = c * a + mis * b;
                psi[x | mask] = mis * a + c * b;
            }
        }
    }
    return psi;
}

}  // namespace

Statevector simulate_ansatz(const IsingModel& model, const std::vector<double>& gammas,
                            const std::vector<double>& betas) {
    if (gammas.size() != betas.size()) {
        throw std::invalid_argument("simulate_ansatz: gamma and beta must have the same length");
    }
    return run_circuit(model.size(), cost_diagonal(model), gammas, betas);
}

Histogram sample(const Statevector& state, int shots, Rng& rng) {
    std::vector<double> cdf(state.size());
    double acc = 0.0;
    for (std::size_t x = 0; x < state.size(); ++x) {
        acc += std::norm(state[x]);
        cdf[x] = acc;
    }
    Histogram h;
    for (int s = 0; s < shots; ++s) {
        const double u = rng.uniform() * acc;
        // upper_bound never lands on a zero-probability state (repeated cdf value).
        auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
        if (it == cdf.end()) --it;
        ++h[static_cast<std::uint64_t>(it - cdf.begin())];
    }
    return h;
}

Histogram sample(const Statevector& state, int shots, std::uint64_t seed) {
    Rng rng(seed);
    return sample(state, shots, rng);
}

double expected_energy(const Histogram& histogram, const Matrix& q) {
    if (histogram.empty()) {
        throw std::invalid_argument("expected_energy: empty histogram");
    }
    double total = 0.0;
    std::uint64_t shots = 0;
    for (const auto& [x, count] : histogram) {
        total += static_cast<double>(count) * qubo_energy(q, x);
        shots += count;
    }
    return total / static_cast<double>(shots);
}

std::uint64_t most_frequent(const Histogram& histogram) {
    if (histogram.empty()) {
        throw std::invalid_argument("most_frequent: empty histogram");
    }
    // Map order is ascending, so strict > keeps the smallest value on ties.
    auto best = histogram.begin();
    for (auto it = histogram.begin(); it != histogram.end(); ++it) {
        if (it->second > best->second) best = it;
    }
    return best->first;
}

QaoaOutcome optimise_angles(const IsingModel& model, const Matrix& q, const QaoaConfig& cfg) {
    cfg.validate();
    const Index w = model.size();
    if (q.rows() != w || q.cols() != w) {
        throw std::invalid_argument("optimise_angles: model and QUBO sizes differ");
    }
    const auto diag = cost_diagonal(model);
    const auto table = qubo_energy_table(q);
    const auto p = static_cast<std::size_t>(cfg.depth);

    struct RestartRun {
        std::vector<double> gammas;
        std::vector<double> betas;
        Histogram histogram;
        double energy = 0.0;
        int evaluations = 0;
    };
    std::vector<RestartRun> runs(static_cast<std::size_t>(cfg.restarts));

    parallel_for(runs.size(), [&](std::size_t r) {
        const std::uint64_t restart_seed = derive_seed(cfg.seed, {r});
        Rng init(derive_seed(restart_seed, {kInitStream}));
        Rng shots(derive_seed(restart_seed, {kShotStream}));

        Vector x0(2 * static_cast<Index>(p));
        for (std::size_t l = 0; l < p; ++l) x0(static_cast<Index>(l)) = init.uniform(0.0, 2.0 * std::numbers::pi);
        for (std::size_t l = 0; l < p; ++l) x0(static_cast<Index>(p + l)) = init.uniform(0.0, std::numbers::pi);

        auto split_angles = [p](const Vector& x) {
            std::vector<double> g(x.data(), x.data() + p);
            std::vector<double> b(x.data() + p, x.data() + 2 * p);
            return std::pair{g, b};
        };
        auto objective = [&](const Vector& x) {
            const auto [g, b] = split_angles(x);
            const Statevector psi = run_circuit(w, diag, g, b);
            if (cfg.exact_expectation) {
                double e = 0.0;
                for (std::size_t s = 0; s < psi.size(); ++s) e += std::norm(psi[s]) * table[s];
                return e;
            }
            return mean_energy(sample(psi, cfg.opt_shots, shots), table);
        };

        const auto found = nelder_mead(objective, x0, cfg.initial_step, cfg.max_iters);
        auto [g, b] = split_angles(found.x);
        const Statevector psi = run_circuit(w, diag, g, b);

        RestartRun& run = runs[r];
        run.histogram = sample(psi, cfg.eval_shots, derive_seed(restart_seed, {kEvalStream}));
        run.energy = mean_energy(run.histogram, table);
        run.gammas = std::move(g);
        run.betas = std::move(b);
        run.evaluations = found.evaluations;
    });

    QaoaOutcome out;
    std::size_t winner = 0;
    for (std::size_t r = 0; r < runs.size(); ++r) {
        out.restart_energies.push_back(runs[r].energy);
        out.evaluations += runs[r].evaluations;
        if (runs[r].energy < runs[winner].energy) winner = r;
    }
    RestartRun& best = runs[winner];
    const std::uint64_t top = most_frequent(best.histogram);
    out.best_bits = BitSchedule{BitSchedule::unpack(top, static_cast<int>(w)), table[top]};
    out.histogram = std::move(best.histogram);
    out.expected_energy = best.energy;
    out.gammas = std::move(best.gammas);
    out.betas = std::move(best.betas);
    out.winning_restart = static_cast<int>(winner);
    return out;
}

Index ScheduleResult::rebalance_count() const {
    return static_cast<Index>(std::count(schedule.begin(), schedule.end(), std::uint8_t{1}));
}

ScheduleResult walk_forward(const ReturnPanel& test, const Vector& target, Index windows, Index candidates,
                            const QaoaConfig& cfg, const QuboParams& params) {
    const Index total = test.rows();
    if (windows < 1 || candidates < 1) {
        throw std::invalid_argument("walk_forward: need at least one window and one candidate");
    }
    // every candidate needs a forward window of at least two days
    if (total / windows < 2 * (candidates + 1)) {
        throw std::invalid_argument(fmt::format(
            "walk_forward: {} test days cannot host {} windows of {} candidates", total, windows, candidates));
    }
    const Index chunk = total / windows;

    ScheduleResult result;
    result.schedule.assign(static_cast<std::size_t>(total), 0);
    for (Index k = 0; k < windows; ++k) {
        WindowSchedule win;
        win.start = k * chunk;
        win.end = k + 1 == windows ? total : (k + 1) * chunk;
        const Matrix gross = test.gross_returns.middleRows(win.start, win.end - win.start);
        win.qubo = build_qubo(target, gross, candidates, params);

        QaoaConfig window_cfg = cfg;
        window_cfg.seed = derive_seed(cfg.seed, {static_cast<std::uint64_t>(k)});
        win.outcome = optimise_angles(to_ising(win.qubo.q), win.qubo.q, window_cfg);
        if (candidates <= kExactReportBits) {
            win.exact = brute_force(win.qubo.q);
        }

        const auto& bits = win.outcome.best_bits.bits;
        for (std::size_t j = 0; j < bits.size(); ++j) {
            if (bits[j]) {
                result.schedule[static_cast<std::size_t>(win.start + win.qubo.candidates.indices[j])] = 1;
            }
        }
        result.windows.push_back(std::move(win));
    }
    return result;
}

}  // namespace qrebal
