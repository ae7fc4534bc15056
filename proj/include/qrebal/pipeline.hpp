#pragma once

#include "qrebal/allocation.hpp"
#include "qrebal/backtest.hpp"
#include "qrebal/clustering.hpp"
#include "qrebal/market_data.hpp"
#include "qrebal/qaoa.hpp"
#include "qrebal/schedule_qubo.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace qrebal {

/// Bad configuration or missing input file. The CLI maps this to exit code 1.
class ValidationError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Everything a pipeline run depends on. Defaults follow the reference
/// configuration (p = 2, W = 8, K = 3, R = 5, 2048/4096 shots, 150 iterations,
/// lambda = 1.0/0.5/0.3, c = 10 bp, n = 10 clusters).
struct RunConfig {
    std::filesystem::path prices;
    std::filesystem::path out{"out"};
    Date train_end{};
    Date test_end{};
    int n_clusters = 10;
    std::uint64_t seed = 42;
    GaConfig ga;
    QaoaConfig qaoa;
    Index candidates = 8;
    Index windows = 3;
    QuboParams qubo;
    GridSpec grid;

    /// Canonical key-value text of everything except `out`; its hash
    /// identifies the run.
    std::string to_text() const;
    std::string hash() const;
    /// Throws ValidationError.
    void validate() const;
};

/// Parse a config file. Relative `prices` paths resolve against the config
/// file's directory. Throws ValidationError.
RunConfig load_config(const std::filesystem::path& path);
RunConfig parse_config(const std::string& text, const std::filesystem::path& base_dir);

/// Stream seeds derived from the master seed.
std::uint64_t ga_seed(const RunConfig& cfg);
std::uint64_t qaoa_seed(const RunConfig& cfg, WeightMethod method);

inline constexpr WeightMethod kAllMethods[] = {WeightMethod::GA, WeightMethod::MinVar, WeightMethod::Equal,
                                               WeightMethod::Ensemble};

struct PreparedData {
    LoadResult loaded;
    ReturnPanel train;
    ReturnPanel test;
};

PreparedData prepare(const RunConfig& cfg);

// Pipeline stages. Each reads its inputs from and writes its artifacts to cfg.out.

/// selection.json, selection.csv, correlation.csv, distance.csv
SelectionResult cmd_select(const RunConfig& cfg);
/// weights_<Method>.json for GA, MinVar, Equal, Ensemble, plus weights.csv
std::vector<WeightVector> cmd_weights(const RunConfig& cfg);
/// schedule_<Method>.json, histogram_<Method>.csv, qubo_<Method>_window<k>.csv,
/// schedule_diagnostics.csv
std::vector<ScheduleResult> cmd_schedule(const RunConfig& cfg);
/// metrics.csv, curves.csv, manifest.json, config.resolved.txt
std::vector<BacktestReport> cmd_backtest(const RunConfig& cfg);
/// All four stages in order.
std::vector<BacktestReport> cmd_run(const RunConfig& cfg);

/// Rerun the configuration stored in a manifest into `out`. Returns true when
/// the regenerated metrics.csv hashes to the value recorded in the manifest.
bool cmd_replay(const std::filesystem::path& manifest, const std::filesystem::path& out);

}  // namespace qrebal
