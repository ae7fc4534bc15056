#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <fmt/format.h>

#include "qrebal/allocation.hpp"
#include "qrebal/backtest.hpp"
#include "qrebal/clustering.hpp"
#include "qrebal/pipeline.hpp"
#include "qrebal/qaoa.hpp"
#include "qrebal/schedule_qubo.hpp"
#include "qrebal/shrinkage.hpp"

namespace py = pybind11;
using namespace qrebal;

namespace {

std::vector<std::string> default_tickers(Index m) {
    std::vector<std::string> out;
    for (Index j = 0; j < m; ++j) out.push_back(fmt::format("A{}", j));
    return out;
}

// Panels from plain arrays get placeholder tickers and consecutive calendar dates.
ReturnPanel panel_from_gross(const Matrix& gross) {
    if (!(gross.array() > 0.0).all()) throw std::invalid_argument("gross returns must be strictly positive");
    ReturnPanel p;
    p.tickers = default_tickers(gross.cols());
    p.gross_returns = gross;
    p.log_returns = gross.array().log();
    std::chrono::sys_days day{std::chrono::year{2000} / 1 / 3};
    for (Index t = 0; t < gross.rows(); ++t) p.dates.emplace_back(day + std::chrono::days{t});
    return p;
}

py::dict to_dict(const Metrics& m) {
    py::dict d;
    auto opt = [](const std::optional<double>& v) -> py::object {
        return v ? py::object(py::float_(*v)) : py::object(py::none());
    };
    d["total_return"] = m.total_return;
    d["sharpe"] = opt(m.sharpe);
    d["sortino"] = opt(m.sortino);
    d["mdd"] = m.mdd;
    d["calmar"] = opt(m.calmar);
    d["degenerate"] = m.degenerate;
    return d;
}

py::dict to_dict(const BacktestReport& r) {
    py::dict d;
    d["label"] = r.label;
    d["equity_curve"] = r.equity_curve;
    d["metrics"] = to_dict(r.metrics);
    d["rebalance_count"] = r.rebalance_count;
    d["total_cost_bp"] = r.total_cost_bp;
    d["rebalance_days"] = r.rebalance_days;
    return d;
}

Scheduler parse_scheduler(const py::object& spec) {
    if (spec.is_none()) return BuyAndHold{};
    if (py::isinstance<py::str>(spec)) {
        const auto s = spec.cast<std::string>();
        if (s == "buy_and_hold") return BuyAndHold{};
        throw std::invalid_argument("unknown scheduler '" + s + "'");
    }
    if (py::isinstance<py::dict>(spec)) {
        const auto d = spec.cast<py::dict>();
        if (d.contains("periodic")) return Periodic{d["periodic"].cast<int>()};
        if (d.contains("threshold")) return Threshold{d["threshold"].cast<double>()};
    }
    // any other sequence is a per-row 0/1 schedule
    return ExplicitSchedule{spec.cast<std::vector<std::uint8_t>>()};
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Quantum-assisted portfolio rebalancing core";
    m.attr("__version__") = QREBAL_VERSION;

    py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
    py::register_exception<UndefinedRatio>(m, "UndefinedRatio", PyExc_ArithmeticError);

    m.def(
        "synth_panel",
        [](std::uint64_t seed, Index rows, const Matrix& corr, const Vector& vol, const Vector& drift) {
            return synth_panel(seed, rows, corr.rows(), corr, vol, drift).prices;
        },
        py::arg("seed"), py::arg("rows"), py::arg("corr"), py::arg("ann_vol"), py::arg("ann_drift"),
        "Seeded correlated GBM prices, rows x assets.");

    m.def(
        "ledoit_wolf",
        [](const Matrix& log_returns) {
            ReturnPanel p = panel_from_gross(log_returns.array().exp().matrix());
            p.log_returns = log_returns;
            const auto c = ledoit_wolf(p);
            py::dict d;
            d["sigma"] = c.sigma;
            d["sample"] = c.sample;
            d["alpha"] = c.alpha;
            d["mu_target"] = c.mu_target;
            d["corr"] = c.corr;
            d["dist"] = c.dist;
            return d;
        },
        py::arg("log_returns"));
    m.def("angular_distance", &angular_distance, py::arg("rho"));
    m.def(
        "ward_cluster", [](const Matrix& dist, int n) { return ward_cluster(dist, n).labels; }, py::arg("dist"),
        py::arg("n"));

    m.def(
        "ga_optimise",
        [](const Matrix& gross, int population, int generations, double mutation_rate, double lambda_ent,
           std::uint64_t seed) {
            GaConfig cfg;
            cfg.population = population;
            cfg.generations = generations;
            cfg.mutation_rate = mutation_rate;
            cfg.lambda_ent = lambda_ent;
            cfg.seed = seed;
            const auto r = ga_run(panel_from_gross(gross), cfg);
            return py::make_tuple(r.best.weights, r.best_fitness, r.best_per_generation);
        },
        py::arg("gross_returns"), py::arg("population") = 300, py::arg("generations") = 200,
        py::arg("mutation_rate") = 0.15, py::arg("lambda_ent") = 0.05, py::arg("seed") = 0,
        "Returns (weights, fitness, best fitness per generation).");
    m.def(
        "minvar",
        [](const Matrix& sigma) {
            ShrunkCovariance c;
            c.tickers = default_tickers(sigma.rows());
            c.sigma = sigma;
            return minvar(c).weights;
        },
        py::arg("sigma"));
    m.def(
        "ensemble",
        [](const Vector& ga, const Vector& mv, const Vector& eq) {
            const auto t = default_tickers(ga.size());
            return ensemble({t, ga, WeightMethod::GA, 0.0}, {t, mv, WeightMethod::MinVar, 0.0},
                            {t, eq, WeightMethod::Equal, 0.0})
                .weights;
        },
        py::arg("ga"), py::arg("minvar"), py::arg("equal"));

    py::class_<BitSchedule>(m, "BitSchedule")
        .def_readonly("bits", &BitSchedule::bits)
        .def_readonly("energy", &BitSchedule::energy)
        .def_property_readonly("packed", &BitSchedule::packed)
        .def("__str__", &BitSchedule::to_string)
        .def("__repr__", [](const BitSchedule& b) {
            return fmt::format("BitSchedule('{}', energy={:.6g})", b.to_string(), b.energy);
        });

    py::class_<QuboProblem>(m, "QuboProblem")
        .def_readonly("q", &QuboProblem::q)
        .def_readonly("raw_max_abs", &QuboProblem::raw_max_abs)
        .def_property_readonly("candidates", [](const QuboProblem& q) { return q.candidates.indices; })
        .def_readonly("gains", &QuboProblem::gains)
        .def_readonly("delta_t", &QuboProblem::delta_t);

    m.def(
        "candidate_dates", [](Index window_len, Index count) { return candidate_dates(window_len, count).indices; },
        py::arg("window_len"), py::arg("count"));
    m.def(
        "build_qubo",
        [](const Vector& target, const Matrix& gross, Index count, double lambda1, double lambda2, double lambda3,
           double cost_c) { return build_qubo(target, gross, count, {lambda1, lambda2, lambda3, cost_c}); },
        py::arg("target"), py::arg("gross_returns"), py::arg("count") = 8, py::arg("lambda1") = 1.0,
        py::arg("lambda2") = 0.5, py::arg("lambda3") = 0.3, py::arg("cost_c") = 0.001);
    m.def(
        "qubo_energy", [](const Matrix& q, std::uint64_t x) { return qubo_energy(q, x); }, py::arg("q"),
        py::arg("packed"));
    m.def("brute_force", &brute_force, py::arg("q"));

    py::class_<IsingModel>(m, "IsingModel")
        .def_readonly("h", &IsingModel::h)
        .def_readonly("j", &IsingModel::j)
        .def_readonly("offset", &IsingModel::offset)
        .def("energy", &IsingModel::energy, py::arg("packed"));
    m.def("to_ising", &to_ising, py::arg("q"));

    py::class_<QaoaConfig>(m, "QaoaConfig")
        .def(py::init<>())
        .def_readwrite("depth", &QaoaConfig::depth)
        .def_readwrite("restarts", &QaoaConfig::restarts)
        .def_readwrite("opt_shots", &QaoaConfig::opt_shots)
        .def_readwrite("eval_shots", &QaoaConfig::eval_shots)
        .def_readwrite("max_iters", &QaoaConfig::max_iters)
        .def_readwrite("initial_step", &QaoaConfig::initial_step)
        .def_readwrite("exact_expectation", &QaoaConfig::exact_expectation)
        .def_readwrite("seed", &QaoaConfig::seed);

    py::class_<QaoaOutcome>(m, "QaoaOutcome")
        .def_readonly("best_bits", &QaoaOutcome::best_bits)
        .def_readonly("histogram", &QaoaOutcome::histogram)
        .def_readonly("expected_energy", &QaoaOutcome::expected_energy)
        .def_readonly("gammas", &QaoaOutcome::gammas)
        .def_readonly("betas", &QaoaOutcome::betas)
        .def_readonly("restart_energies", &QaoaOutcome::restart_energies)
        .def_readonly("winning_restart", &QaoaOutcome::winning_restart);
    m.def(
        "optimise_angles",
        [](const Matrix& q, const QaoaConfig& cfg) {
            py::gil_scoped_release release;
            return optimise_angles(to_ising(q), q, cfg);
        },
        py::arg("q"), py::arg("config") = QaoaConfig{});

    m.def(
        "walk_forward",
        [](const Matrix& gross, const Vector& target, Index windows, Index candidates, const QaoaConfig& cfg) {
            const auto panel = panel_from_gross(gross);
            ScheduleResult s;
            {
                py::gil_scoped_release release;
                s = walk_forward(panel, target, windows, candidates, cfg, QuboParams{});
            }
            py::list exact;
            for (const auto& w : s.windows) {
                exact.append(w.exact ? py::cast(*w.exact) : py::none());
            }
            py::dict d;
            d["schedule"] = s.schedule;
            d["rebalances"] = s.rebalance_count();
            d["exact"] = exact;
            py::list outcomes;
            for (const auto& w : s.windows) outcomes.append(py::cast(w.outcome));
            d["outcomes"] = outcomes;
            return d;
        },
        py::arg("gross_returns"), py::arg("target"), py::arg("windows") = 3, py::arg("candidates") = 8,
        py::arg("config") = QaoaConfig{});

    m.def(
        "backtest",
        [](const Matrix& gross, const Vector& weights, const py::object& scheduler, double cost_c) {
            const auto panel = panel_from_gross(gross);
            Strategy s{"python", {panel.tickers, weights, WeightMethod::Equal, 0.0}, parse_scheduler(scheduler)};
            return to_dict(run(panel, s, cost_c));
        },
        py::arg("gross_returns"), py::arg("weights"), py::arg("scheduler") = py::none(), py::arg("cost_c") = 0.001,
        "scheduler: None / 'buy_and_hold', {'periodic': N}, {'threshold': x}, or a 0/1 list per row.");
    m.def(
        "metrics", [](const std::vector<double>& curve) { return to_dict(metrics(curve)); },
        py::arg("equity_curve"));

    m.def(
        "run_pipeline",
        [](const std::filesystem::path& config, std::optional<std::filesystem::path> out,
           std::optional<std::uint64_t> seed) {
            auto cfg = load_config(config);
            if (out) cfg.out = *out;
            if (seed) cfg.seed = *seed;
            std::vector<BacktestReport> reports;
            {
                py::gil_scoped_release release;
                reports = cmd_run(cfg);
            }
            py::list rows;
            for (const auto& r : reports) rows.append(to_dict(r));
            return rows;
        },
        py::arg("config"), py::arg("out") = py::none(), py::arg("seed") = py::none(),
        "Run every stage from a config file; returns one dict per strategy.");
}
