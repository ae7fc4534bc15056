#include "qrebal/io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

namespace qrebal::io {

namespace {

std::vector<double> to_std(const Vector& v) { return {v.data(), v.data() + v.size()}; }

Json matrix_rows(const Matrix& m) {
    Json rows = Json::array();
    for (Index i = 0; i < m.rows(); ++i) {
        Json row = Json::array();
        for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    return out;
}

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) return {};
    return s.substr(first, s.find_last_not_of(" \t\r\n") - first + 1);
}

}  // namespace

Json to_json(const WeightVector& w) {
    Json j;
    j["method"] = std::string(to_string(w.method));
    j["tickers"] = w.tickers;
    j["weights"] = to_std(w.weights);
    j["train_sharpe"] = w.train_sharpe;
    return j;
}

WeightVector weights_from_json(const Json& j) {
    WeightVector w;
    w.method = parse_weight_method(j.at("method").get<std::string>());
    w.tickers = j.at("tickers").get<std::vector<std::string>>();
    const auto v = j.at("weights").get<std::vector<double>>();
    if (v.size() != w.tickers.size()) {
        throw std::invalid_argument("weights file: ticker and weight counts differ");
    }
    w.weights = Eigen::Map<const Vector>(v.data(), static_cast<Index>(v.size()));
    w.train_sharpe = j.at("train_sharpe").is_null() ? std::nan("") : j.at("train_sharpe").get<double>();
    return w;
}

Json to_json(const QuboProblem& q) {
    Json j;
    j["size"] = q.size();
    j["matrix"] = matrix_rows(q.q);
    j["raw_max_abs"] = q.raw_max_abs;
    j["candidates"] = q.candidates.indices;
    j["window_len"] = q.candidates.window_len;
    j["gains"] = q.gains;
    j["params"] = {{"lambda1", q.params.lambda1},
                   {"lambda2", q.params.lambda2},
                   {"lambda3", q.params.lambda3},
                   {"cost_c", q.params.cost_c},
                   {"n_assets", q.n_assets},
                   {"delta_t", q.delta_t}};
    return j;
}

std::string bitstring(std::uint64_t packed, int width) {
    std::string s;
    for (int k = 0; k < width; ++k) s.push_back(((packed >> k) & 1U) ? '1' : '0');
    return s;
}

std::vector<std::pair<std::uint64_t, std::uint64_t>> top_entries(const Histogram& h, int k) {
    std::vector<std::pair<std::uint64_t, std::uint64_t>> v(h.begin(), h.end());
    std::stable_sort(v.begin(), v.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
    if (static_cast<int>(v.size()) > k) v.resize(static_cast<std::size_t>(k));
    return v;
}

Json to_json(const QaoaOutcome& o, int top_k) {
    const int width = static_cast<int>(o.best_bits.bits.size());
    Json j;
    j["best_bits"] = o.best_bits.to_string();
    j["best_energy"] = o.best_bits.energy;
    j["expected_energy"] = o.expected_energy;
    j["gammas"] = o.gammas;
    j["betas"] = o.betas;
    j["restart_energies"] = o.restart_energies;
    j["winning_restart"] = o.winning_restart;
    j["evaluations"] = o.evaluations;
    std::uint64_t shots = 0;
    for (const auto& [x, c] : o.histogram) shots += c;
    j["shots"] = shots;
    Json top = Json::array();
    for (const auto& [x, c] : top_entries(o.histogram, top_k)) {
        top.push_back({{"bits", bitstring(x, width)}, {"count", c}});
    }
    j["top_histogram"] = std::move(top);
    return j;
}

Json to_json(const ScheduleResult& s, int top_k) {
    Json j;
    j["optimizer"] = s.optimizer;
    std::string bits;
    for (auto b : s.schedule) bits.push_back(b ? '1' : '0');
    j["schedule"] = bits;
    j["rebalances"] = s.rebalance_count();
    Json windows = Json::array();
    for (const auto& w : s.windows) {
        Json wj;
        wj["start"] = w.start;
        wj["end"] = w.end;
        wj["candidates"] = w.qubo.candidates.indices;
        wj["qaoa"] = to_json(w.outcome, top_k);
        if (w.exact) {
            wj["brute_force_bits"] = w.exact->to_string();
            wj["brute_force_energy"] = w.exact->energy;
            wj["gap"] = w.outcome.best_bits.energy - w.exact->energy;
        } else {
            wj["brute_force_energy"] = nullptr;
            wj["gap"] = nullptr;
        }
        wj["qubo"] = to_json(w.qubo);
        windows.push_back(std::move(wj));
    }
    j["windows"] = std::move(windows);
    return j;
}

std::vector<std::uint8_t> schedule_bits_from_json(const Json& j) {
    const auto s = j.at("schedule").get<std::string>();
    std::vector<std::uint8_t> bits;
    bits.reserve(s.size());
    for (char c : s) {
        if (c != '0' && c != '1') throw std::invalid_argument("schedule file: schedule must be a 0/1 string");
        bits.push_back(c == '1');
    }
    return bits;
}

Json read_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read '" + path.string() + "'");
    try {
        return Json::parse(in);
    } catch (const Json::exception& e) {
        throw std::invalid_argument("malformed JSON in '" + path.string() + "': " + e.what());
    }
}

void write_json(const Json& j, const std::filesystem::path& path) {
    auto out = open_out(path);
    out << j.dump(2) << '\n';
}

std::string fmt_num(double v) {
    if (std::isnan(v)) return "undefined";
    if (v == 0.0) return "0";  // avoids "-0"
    return fmt::format("{:.12g}", v);
}

std::string fmt_num(const std::optional<double>& v) { return v ? fmt_num(*v) : std::string("undefined"); }

void write_matrix_csv(const Matrix& m, const std::vector<std::string>& labels, const std::filesystem::path& path) {
    auto out = open_out(path);
    out << "ticker";
    for (const auto& l : labels) out << ',' << l;
    out << '\n';
    for (Index i = 0; i < m.rows(); ++i) {
        out << labels[static_cast<std::size_t>(i)];
        for (Index j = 0; j < m.cols(); ++j) out << ',' << fmt_num(m(i, j));
        out << '\n';
    }
}

void write_metrics_csv(const std::vector<BacktestReport>& reports, std::ostream& out) {
    out << "Strategy,Return (%),Sharpe,Sortino,MDD (%),Calmar,Rebalances,Cost (bp)\n";
    for (const auto& r : reports) {
        const auto& m = r.metrics;
        out << r.label << ',' << fmt_num(100.0 * m.total_return) << ',' << fmt_num(m.sharpe) << ','
            << fmt_num(m.sortino) << ',' << fmt_num(100.0 * m.mdd) << ',' << fmt_num(m.calmar) << ','
            << r.rebalance_count << ',' << fmt_num(r.total_cost_bp) << '\n';
    }
}

void write_metrics_csv(const std::vector<BacktestReport>& reports, const std::filesystem::path& path) {
    auto out = open_out(path);
    write_metrics_csv(reports, out);
}

void write_curves_csv(const std::vector<BacktestReport>& reports, const std::vector<Date>& test_dates,
                      const std::filesystem::path& path) {
    auto out = open_out(path);
    out << "strategy,day,date,value,drawdown\n";
    for (const auto& r : reports) {
        const auto dd = drawdown_series(r.equity_curve);
        for (std::size_t t = 0; t < r.equity_curve.size(); ++t) {
            // Value t is the close of test row t-1; day 0 is the starting allocation.
            const std::string date = t == 0 ? "" : format_date(test_dates.at(t - 1));
            out << r.label << ',' << t << ',' << date << ',' << fmt_num(r.equity_curve[t]) << ',' << fmt_num(dd[t])
                << '\n';
        }
    }
}

std::map<std::string, std::string> parse_key_values(std::istream& in) {
    std::map<std::string, std::string> out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw std::invalid_argument(fmt::format("config line {}: expected 'key = value'", lineno));
        }
        auto key = trim(line.substr(0, eq));
        auto value = trim(line.substr(eq + 1));
        if (key.empty()) {
            throw std::invalid_argument(fmt::format("config line {}: empty key", lineno));
        }
        if (!out.emplace(key, value).second) {
            throw std::invalid_argument(fmt::format("config line {}: duplicate key '{}'", lineno, key));
        }
    }
    return out;
}

std::string fnv1a_hex(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return fmt::format("{:016x}", h);
}

}  // namespace qrebal::io
