#pragma once

#include "qrebal/common.hpp"
#include "qrebal/market_data.hpp"
#include "qrebal/random.hpp"
#include "qrebal/schedule_qubo.hpp"

#include <complex>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace qrebal {

/// H = sum h_i z_i + sum_{i<j} J_ij z_i z_j + offset, with z_i = 1 - 2 x_i.
/// For symmetric Q this reproduces x'Qx exactly on every bitstring.
struct IsingModel {
    Vector h;
    Matrix j;  // strictly upper triangular
    double offset = 0.0;

    Index size() const { return h.size(); }
    /// Energy of the packed bitstring x, including the offset.
    double energy(std::uint64_t x) const;
};

using Statevector = std::vector<std::complex<double>>;
/// Packed bitstring -> shot count.
using Histogram = std::map<std::uint64_t, std::uint64_t>;

struct QaoaConfig {
    int depth = 2;
    int restarts = 5;
    int opt_shots = 2048;
    int eval_shots = 4096;
    int max_iters = 150;  // objective evaluations per restart
    double initial_step = 0.5;
    // Optimise the exact expectation instead of the shot estimate.
    bool exact_expectation = false;
    std::uint64_t seed = 0;

    void validate() const;
};

inline constexpr int kMaxSimulatedQubits = 24;
inline constexpr const char* kAngleOptimizer = "nelder-mead";

struct QaoaOutcome {
    BitSchedule best_bits;      // energy = x'Qx of the chosen bitstring
    Histogram histogram;        // winning restart, eval_shots shots
    double expected_energy = 0.0;
    std::vector<double> gammas;
    std::vector<double> betas;
    std::vector<double> restart_energies;  // eval-shot expected energy per restart
    int winning_restart = 0;
    int evaluations = 0;        // objective calls summed over restarts
};

IsingModel to_ising(const Matrix& q);

/// Ising energy without the offset for every basis state.
std::vector<double> cost_diagonal(const IsingModel& model);

/// Depth-p QAOA state: alternating diagonal cost phases exp(-i gamma E(x))
/// and transverse-field mixers exp(-i beta sum X) applied to |+>^W.
Statevector simulate_ansatz(const IsingModel& model, const std::vector<double>& gammas,
                            const std::vector<double>& betas);

/// Multinomial measurement of `shots` samples from |amplitude|^2.
Histogram sample(const Statevector& state, int shots, std::uint64_t seed);
Histogram sample(const Statevector& state, int shots, Rng& rng);

/// Shot-weighted mean of x'Qx.
double expected_energy(const Histogram& histogram, const Matrix& q);

/// Bitstring with the highest count; ties go to the smaller packed value.
std::uint64_t most_frequent(const Histogram& histogram);

/// Multi-restart angle search. Each restart draws gamma from [0, 2pi]^p and
/// beta from [0, pi]^p, runs a bounded-budget simplex search on the shot
/// estimate of the energy, and is scored by the expected energy of a fresh
/// eval_shots histogram. The lowest-scoring restart wins.
QaoaOutcome optimise_angles(const IsingModel& model, const Matrix& q, const QaoaConfig& cfg);

struct WindowSchedule {
    Index start = 0;  // first test row of the chunk
    Index end = 0;    // one past the last row
    QuboProblem qubo;
    QaoaOutcome outcome;
    std::optional<BitSchedule> exact;  // brute-force optimum when affordable
};

struct ScheduleResult {
    std::vector<std::uint8_t> schedule;  // one flag per test row
    std::vector<WindowSchedule> windows;
    std::string optimizer = kAngleOptimizer;

    Index rebalance_count() const;
};

inline constexpr Index kExactReportBits = 16;

/// Walk-forward scheduling: split `test` into `windows` chunks (the last one
/// takes the remainder), build and solve the QUBO on each chunk's rows only,
/// and map the chosen candidates back to test-row indices. Chunk k draws its
/// randomness from a stream derived from (cfg.seed, k) alone.
ScheduleResult walk_forward(const ReturnPanel& test, const Vector& target, Index windows, Index candidates,
                            const QaoaConfig& cfg, const QuboParams& params);

}  // namespace qrebal
