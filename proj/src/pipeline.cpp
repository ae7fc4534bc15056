#include "qrebal/pipeline.hpp"

#include <fstream>
#include <functional>
#include <sstream>

#include <fmt/format.h>
#include <fmt/ranges.h>
#include <spdlog/spdlog.h>

#include "qrebal/clustering.hpp"
#include "qrebal/io.hpp"
#include "qrebal/random.hpp"
#include "qrebal/shrinkage.hpp"

namespace qrebal {

namespace fs = std::filesystem;

namespace {

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        T out{};
        if constexpr (std::is_same_v<T, double>) {
            out = std::stod(value, &used);
        } else if constexpr (std::is_same_v<T, std::uint64_t>) {
            if (!value.empty() && value.front() == '-') throw std::invalid_argument("negative");
            out = std::stoull(value, &used);
        } else {
            const long long v = std::stoll(value, &used);
            out = static_cast<T>(v);
            if (static_cast<long long>(out) != v) throw std::out_of_range("range");
        }
        if (used != value.size()) throw std::invalid_argument("trailing");
        return out;
    } catch (const std::exception&) {
        throw ValidationError(fmt::format("config key '{}': cannot parse '{}'", key, value));
    }
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    throw ValidationError(fmt::format("config key '{}': expected true/false, got '{}'", key, value));
}

std::vector<int> parse_int_list(const std::string& key, const std::string& value) {
    std::vector<int> out;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto first = item.find_first_not_of(' ');
        const auto last = item.find_last_not_of(' ');
        if (first == std::string::npos) continue;
        out.push_back(parse_number<int>(key, item.substr(first, last - first + 1)));
    }
    return out;
}

Date parse_config_date(const std::string& key, const std::string& value) {
    try {
        return parse_date(value);
    } catch (const std::invalid_argument& e) {
        throw ValidationError(fmt::format("config key '{}': {}", key, e.what()));
    }
}

using Setter = std::function<void(RunConfig&, const std::string&, const std::string&)>;

const std::vector<std::pair<std::string, Setter>>& setters() {
    static const std::vector<std::pair<std::string, Setter>> table = {
        {"prices", [](RunConfig& c, const auto&, const auto& v) { c.prices = v; }},
        {"out", [](RunConfig& c, const auto&, const auto& v) { c.out = v; }},
        {"train_end", [](RunConfig& c, const auto& k, const auto& v) { c.train_end = parse_config_date(k, v); }},
        {"test_end", [](RunConfig& c, const auto& k, const auto& v) { c.test_end = parse_config_date(k, v); }},
        {"n_clusters", [](RunConfig& c, const auto& k, const auto& v) { c.n_clusters = parse_number<int>(k, v); }},
        {"seed", [](RunConfig& c, const auto& k, const auto& v) { c.seed = parse_number<std::uint64_t>(k, v); }},
        {"ga_population", [](RunConfig& c, const auto& k, const auto& v) { c.ga.population = parse_number<int>(k, v); }},
        {"ga_generations", [](RunConfig& c, const auto& k, const auto& v) { c.ga.generations = parse_number<int>(k, v); }},
        {"ga_mutation_rate", [](RunConfig& c, const auto& k, const auto& v) { c.ga.mutation_rate = parse_number<double>(k, v); }},
        {"ga_gene_low", [](RunConfig& c, const auto& k, const auto& v) { c.ga.gene_low = parse_number<double>(k, v); }},
        {"ga_gene_high", [](RunConfig& c, const auto& k, const auto& v) { c.ga.gene_high = parse_number<double>(k, v); }},
        {"lambda_ent", [](RunConfig& c, const auto& k, const auto& v) { c.ga.lambda_ent = parse_number<double>(k, v); }},
        {"depth_p", [](RunConfig& c, const auto& k, const auto& v) { c.qaoa.depth = parse_number<int>(k, v); }},
        {"candidates_W", [](RunConfig& c, const auto& k, const auto& v) { c.candidates = parse_number<Index>(k, v); }},
        {"windows_K", [](RunConfig& c, const auto& k, const auto& v) { c.windows = parse_number<Index>(k, v); }},
        {"restarts_R", [](RunConfig& c, const auto& k, const auto& v) { c.qaoa.restarts = parse_number<int>(k, v); }},
        {"opt_shots", [](RunConfig& c, const auto& k, const auto& v) { c.qaoa.opt_shots = parse_number<int>(k, v); }},
        {"eval_shots", [](RunConfig& c, const auto& k, const auto& v) { c.qaoa.eval_shots = parse_number<int>(k, v); }},
        {"max_iter", [](RunConfig& c, const auto& k, const auto& v) { c.qaoa.max_iters = parse_number<int>(k, v); }},
        {"initial_step", [](RunConfig& c, const auto& k, const auto& v) { c.qaoa.initial_step = parse_number<double>(k, v); }},
        {"exact_expectation", [](RunConfig& c, const auto& k, const auto& v) { c.qaoa.exact_expectation = parse_bool(k, v); }},
        {"lambda1", [](RunConfig& c, const auto& k, const auto& v) { c.qubo.lambda1 = parse_number<double>(k, v); }},
        {"lambda2", [](RunConfig& c, const auto& k, const auto& v) { c.qubo.lambda2 = parse_number<double>(k, v); }},
        {"lambda3", [](RunConfig& c, const auto& k, const auto& v) { c.qubo.lambda3 = parse_number<double>(k, v); }},
        {"cost_c", [](RunConfig& c, const auto& k, const auto& v) { c.qubo.cost_c = parse_number<double>(k, v); }},
        {"periods", [](RunConfig& c, const auto& k, const auto& v) { c.grid.periods = parse_int_list(k, v); }},
        {"threshold", [](RunConfig& c, const auto& k, const auto& v) { c.grid.threshold = parse_number<double>(k, v); }},
    };
    return table;
}

std::string method_file(std::string_view stem, WeightMethod m, std::string_view ext) {
    return fmt::format("{}_{}.{}", stem, to_string(m), ext);
}

template <typename F>
auto wrap_module_error(std::string_view stage, F&& f) {
    try {
        return f();
    } catch (const ValidationError&) {
        throw;
    } catch (const std::exception& e) {
        throw std::runtime_error(fmt::format("{}: {}", stage, e.what()));
    }
}

void ensure_out_dir(const RunConfig& cfg) { fs::create_directories(cfg.out); }

std::vector<WeightVector> read_weights(const RunConfig& cfg) {
    std::vector<WeightVector> out;
    for (auto m : kAllMethods) {
        const auto path = cfg.out / method_file("weights", m, "json");
        if (!fs::exists(path)) {
            throw ValidationError(fmt::format("missing '{}'; run the weights stage first", path.string()));
        }
        out.push_back(io::weights_from_json(io::read_json(path)));
    }
    return out;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

std::string RunConfig::to_text() const {
    std::string s;
    auto line = [&s](std::string_view k, const auto& v) { s += fmt::format("{} = {}\n", k, v); };
    line("prices", prices.string());
    if (train_end.ok()) line("train_end", format_date(train_end));
    if (test_end.ok()) line("test_end", format_date(test_end));
    line("n_clusters", n_clusters);
    line("seed", seed);
    line("ga_population", ga.population);
    line("ga_generations", ga.generations);
    line("ga_mutation_rate", ga.mutation_rate);
    line("ga_gene_low", ga.gene_low);
    line("ga_gene_high", ga.gene_high);
    line("lambda_ent", ga.lambda_ent);
    line("depth_p", qaoa.depth);
    line("candidates_W", candidates);
    line("windows_K", windows);
    line("restarts_R", qaoa.restarts);
    line("opt_shots", qaoa.opt_shots);
    line("eval_shots", qaoa.eval_shots);
    line("max_iter", qaoa.max_iters);
    line("initial_step", qaoa.initial_step);
    line("exact_expectation", qaoa.exact_expectation ? "true" : "false");
    line("lambda1", qubo.lambda1);
    line("lambda2", qubo.lambda2);
    line("lambda3", qubo.lambda3);
    line("cost_c", qubo.cost_c);
    line("periods", fmt::format("{}", fmt::join(grid.periods, ",")));
    line("threshold", grid.threshold);
    return s;
}

std::string RunConfig::hash() const { return io::fnv1a_hex(to_text()); }

void RunConfig::validate() const {
    if (prices.empty()) throw ValidationError("config: 'prices' is required");
    if (!fs::exists(prices)) throw ValidationError(fmt::format("price file '{}' does not exist", prices.string()));
    if (!train_end.ok() || !test_end.ok()) throw ValidationError("config: 'train_end' and 'test_end' are required");
    if (!(train_end < test_end)) throw ValidationError("config: train_end must precede test_end");
    if (n_clusters < 1) throw ValidationError("config: n_clusters must be >= 1");
    if (candidates < 1 || candidates > kMaxSimulatedQubits) {
        throw ValidationError(fmt::format("config: candidates_W must lie in [1, {}]", kMaxSimulatedQubits));
    }
    if (windows < 1) throw ValidationError("config: windows_K must be >= 1");
    if (qubo.cost_c < 0.0 || qubo.cost_c >= 0.5) throw ValidationError("config: cost_c must lie in [0, 0.5)");
    if (!(grid.threshold > 0.0 && grid.threshold < 1.0)) throw ValidationError("config: threshold must lie in (0, 1)");
    for (int p : grid.periods) {
        if (p < 1) throw ValidationError("config: periods must be >= 1");
    }
    try {
        ga.validate();
        qaoa.validate();
    } catch (const std::invalid_argument& e) {
        throw ValidationError(e.what());
    }
}

RunConfig parse_config(const std::string& text, const fs::path& base_dir) {
    std::istringstream in(text);
    std::map<std::string, std::string> kv;
    try {
        kv = io::parse_key_values(in);
    } catch (const std::invalid_argument& e) {
        throw ValidationError(e.what());
    }
    RunConfig cfg;
    for (const auto& [key, value] : kv) {
        const auto& table = setters();
        const auto it = std::find_if(table.begin(), table.end(), [&](const auto& e) { return e.first == key; });
        if (it == table.end()) throw ValidationError(fmt::format("config: unknown key '{}'", key));
        it->second(cfg, key, value);
    }
    if (!cfg.prices.empty() && cfg.prices.is_relative()) cfg.prices = fs::absolute(base_dir / cfg.prices);
    cfg.prices = cfg.prices.lexically_normal();
    return cfg;
}

RunConfig load_config(const fs::path& path) {
    if (!fs::exists(path)) throw ValidationError(fmt::format("config file '{}' does not exist", path.string()));
    return parse_config(slurp(path), fs::absolute(path).parent_path());
}

std::uint64_t ga_seed(const RunConfig& cfg) { return derive_seed(cfg.seed, {1}); }

std::uint64_t qaoa_seed(const RunConfig& cfg, WeightMethod method) {
    return derive_seed(cfg.seed, {2, static_cast<std::uint64_t>(method)});
}

PreparedData prepare(const RunConfig& cfg) {
    cfg.validate();
    return wrap_module_error("market-data", [&] {
        PreparedData d;
        d.loaded = load_csv(cfg.prices);
        if (!d.loaded.dropped.empty()) {
            spdlog::warn("dropped {} ticker(s) with incomplete prices: {}", d.loaded.dropped.size(),
                         fmt::join(d.loaded.dropped, ", "));
        }
        auto [train, test] = split(to_returns(d.loaded.panel), SplitSpec{cfg.train_end, cfg.test_end});
        d.train = std::move(train);
        d.test = std::move(test);
        return d;
    });
}

SelectionResult cmd_select(const RunConfig& cfg) {
    const auto data = prepare(cfg);
    ensure_out_dir(cfg);
    const auto cov = wrap_module_error("shrinkage", [&] { return ledoit_wolf(data.train); });
    const auto assign = wrap_module_error("clustering", [&] { return ward_cluster(cov.dist, cfg.n_clusters); });
    const auto selection = wrap_module_error("clustering", [&] { return select_representatives(assign, data.train); });

    io::Json j;
    j["tickers"] = selection.tickers;
    j["per_cluster_sharpe"] = selection.per_cluster_sharpe;
    j["shrinkage_alpha"] = cov.alpha;
    j["universe"] = data.train.tickers;
    j["labels"] = assign.labels;
    j["dropped"] = data.loaded.dropped;
    io::write_json(j, cfg.out / "selection.json");

    std::ofstream csv(cfg.out / "selection.csv");
    csv << "cluster,ticker,train_sharpe\n";
    for (std::size_t k = 0; k < selection.tickers.size(); ++k) {
        csv << k << ',' << selection.tickers[k] << ',' << io::fmt_num(selection.per_cluster_sharpe[k]) << '\n';
    }
    io::write_matrix_csv(cov.corr, cov.tickers, cfg.out / "correlation.csv");
    io::write_matrix_csv(cov.dist, cov.tickers, cfg.out / "distance.csv");
    spdlog::info("selected {} assets (shrinkage alpha {:.4f}): {}", selection.tickers.size(), cov.alpha,
                 fmt::join(selection.tickers, ", "));
    return selection;
}

std::vector<WeightVector> cmd_weights(const RunConfig& cfg) {
    const auto sel_path = cfg.out / "selection.json";
    if (!fs::exists(sel_path)) {
        throw ValidationError(fmt::format("missing '{}'; run the select stage first", sel_path.string()));
    }
    const auto tickers = io::read_json(sel_path).at("tickers").get<std::vector<std::string>>();
    const auto data = prepare(cfg);

    return wrap_module_error("allocation", [&] {
        const ReturnPanel train = data.train.select(tickers);
        GaConfig ga_cfg = cfg.ga;
        ga_cfg.seed = ga_seed(cfg);
        WeightVector ga = tickers.size() >= 2 ? ga_optimise(train, ga_cfg) : equal_weights(tickers);
        ga.method = WeightMethod::GA;
        WeightVector mv = minvar(ledoit_wolf(data.train).restrict_to(tickers));
        WeightVector eq = equal_weights(tickers);
        WeightVector ens = ensemble(ga, mv, eq);
        std::vector<WeightVector> all{ga, mv, eq, ens};
        for (auto& w : all) {
            annotate_train_sharpe(w, train);
            io::write_json(io::to_json(w), cfg.out / method_file("weights", w.method, "json"));
        }
        std::ofstream csv(cfg.out / "weights.csv");
        csv << "ticker,GA,MinVar,Equal,Ensemble\n";
        for (std::size_t i = 0; i < tickers.size(); ++i) {
            csv << tickers[i];
            for (const auto& w : all) csv << ',' << io::fmt_num(w.weights(static_cast<Index>(i)));
            csv << '\n';
        }
        for (const auto& w : all) spdlog::info("{} weights: train Sharpe {:.3f}", to_string(w.method), w.train_sharpe);
        return all;
    });
}

std::vector<ScheduleResult> cmd_schedule(const RunConfig& cfg) {
    const auto weights = read_weights(cfg);
    const auto data = prepare(cfg);

    return wrap_module_error("qaoa-engine", [&] {
        std::vector<ScheduleResult> out;
        std::ofstream diag(cfg.out / "schedule_diagnostics.csv");
        diag << "method,window,start,end,candidates,best_bits,best_energy,expected_energy,brute_force_bits,"
                "brute_force_energy,gap\n";
        for (const auto& w : weights) {
            const ReturnPanel test = data.test.select(w.tickers);
            QaoaConfig qcfg = cfg.qaoa;
            qcfg.seed = qaoa_seed(cfg, w.method);
            ScheduleResult s = walk_forward(test, w.weights, cfg.windows, cfg.candidates, qcfg, cfg.qubo);
            io::write_json(io::to_json(s), cfg.out / method_file("schedule", w.method, "json"));

            std::ofstream hist(cfg.out / method_file("histogram", w.method, "csv"));
            hist << "window,rank,bitstring,count,energy\n";
            for (std::size_t k = 0; k < s.windows.size(); ++k) {
                const auto& win = s.windows[k];
                const int width = static_cast<int>(win.qubo.size());
                int rank = 0;
                std::uint64_t shown = 0;
                std::uint64_t total = 0;
                for (const auto& [x, c] : win.outcome.histogram) total += c;
                for (const auto& [x, c] : io::top_entries(win.outcome.histogram, 20)) {
                    hist << k << ',' << ++rank << ',' << io::bitstring(x, width) << ',' << c << ','
                         << io::fmt_num(qubo_energy(win.qubo.q, x)) << '\n';
                    shown += c;
                }
                // remaining shots folded into one row so the counts add up
                if (total > shown) hist << k << ",other,," << total - shown << ",\n";
                io::write_matrix_csv(win.qubo.q, [&] {
                    std::vector<std::string> labels;
                    for (auto t : win.qubo.candidates.indices) labels.push_back(fmt::format("t{}", win.start + t));
                    return labels;
                }(), cfg.out / fmt::format("qubo_{}_window{}.csv", to_string(w.method), k));

                diag << to_string(w.method) << ',' << k << ',' << win.start << ',' << win.end << ','
                     << fmt::format("{}", fmt::join(win.qubo.candidates.indices, " ")) << ','
                     << win.outcome.best_bits.to_string() << ',' << io::fmt_num(win.outcome.best_bits.energy) << ','
                     << io::fmt_num(win.outcome.expected_energy) << ',';
                if (win.exact) {
                    diag << win.exact->to_string() << ',' << io::fmt_num(win.exact->energy) << ','
                         << io::fmt_num(win.outcome.best_bits.energy - win.exact->energy) << '\n';
                } else {
                    diag << ",undefined,undefined\n";
                }
            }
            spdlog::info("{} + QAOA: {} rebalances over {} windows", to_string(w.method), s.rebalance_count(),
                         s.windows.size());
            out.push_back(std::move(s));
        }
        return out;
    });
}

std::vector<BacktestReport> cmd_backtest(const RunConfig& cfg) {
    const auto weights = read_weights(cfg);
    std::vector<std::vector<std::uint8_t>> schedules;
    for (const auto& w : weights) {
        const auto path = cfg.out / method_file("schedule", w.method, "json");
        if (!fs::exists(path)) {
            throw ValidationError(fmt::format("missing '{}'; run the schedule stage first", path.string()));
        }
        schedules.push_back(io::schedule_bits_from_json(io::read_json(path)));
    }
    const auto data = prepare(cfg);

    return wrap_module_error("backtest", [&] {
        const ReturnPanel test = data.test.select(weights.front().tickers);
        auto reports = run_grid(test, weights, schedules, cfg.qubo.cost_c, cfg.grid);
        io::write_metrics_csv(reports, cfg.out / "metrics.csv");
        io::write_curves_csv(reports, test.dates, cfg.out / "curves.csv");

        const std::string text = cfg.to_text();
        {
            std::ofstream resolved(cfg.out / "config.resolved.txt");
            resolved << text;
        }
        io::Json manifest;
        manifest["software"] = "qrebal";
        manifest["version"] = QREBAL_VERSION;
        manifest["seed"] = cfg.seed;
        manifest["config_hash"] = cfg.hash();
        manifest["angle_optimizer"] = kAngleOptimizer;
        manifest["sharpe_returns"] = "log";
        manifest["metrics_hash"] = io::fnv1a_hex(slurp(cfg.out / "metrics.csv"));
        manifest["config"] = text;
        io::write_json(manifest, cfg.out / "manifest.json");
        return reports;
    });
}

std::vector<BacktestReport> cmd_run(const RunConfig& cfg) {
    cmd_select(cfg);
    cmd_weights(cfg);
    cmd_schedule(cfg);
    return cmd_backtest(cfg);
}

bool cmd_replay(const fs::path& manifest_path, const fs::path& out) {
    if (!fs::exists(manifest_path)) {
        throw ValidationError(fmt::format("manifest '{}' does not exist", manifest_path.string()));
    }
    const auto manifest = io::read_json(manifest_path);
    RunConfig cfg = parse_config(manifest.at("config").get<std::string>(), fs::current_path());
    cfg.out = out;
    if (cfg.hash() != manifest.at("config_hash").get<std::string>()) {
        throw ValidationError("manifest config does not match its recorded hash");
    }
    cmd_run(cfg);
    return io::fnv1a_hex(slurp(out / "metrics.csv")) == manifest.at("metrics_hash").get<std::string>();
}

}  // namespace qrebal
