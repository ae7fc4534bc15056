#include "qrebal/market_data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "qrebal/random.hpp"

namespace qrebal {

namespace {

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ',')) {
        out.push_back(trim(field));
    }
    if (!line.empty() && line.back() == ',') {
        out.emplace_back();
    }
    return out;
}

// Returns NaN for anything that is not a finite number.
double parse_cell(const std::string& cell) {
    if (cell.empty()) {
        return std::nan("");
    }
    double value = 0.0;
    const char* begin = cell.data();
    const char* end = begin + cell.size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{} || ptr != end || !std::isfinite(value)) {
        return std::nan("");
    }
    return value;
}

Date next_weekday(Date d) {
    std::chrono::sys_days day{d};
    do {
        day += std::chrono::days{1};
    } while (std::chrono::weekday{day} == std::chrono::Saturday ||
             std::chrono::weekday{day} == std::chrono::Sunday);
    return Date{day};
}

}  // namespace

Date parse_date(const std::string& text) {
    int y = 0;
    unsigned m = 0;
    unsigned d = 0;
    char tail = 0;
    if (std::sscanf(text.c_str(), "%d-%u-%u%c", &y, &m, &d, &tail) != 3) {
        throw std::invalid_argument("not an ISO-8601 date: '" + text + "'");
    }
    Date date{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
    if (!date.ok()) {
        throw std::invalid_argument("invalid calendar date: '" + text + "'");
    }
    return date;
}

std::string format_date(Date d) {
    return fmt::format("{:04d}-{:02d}-{:02d}", static_cast<int>(d.year()),
                       static_cast<unsigned>(d.month()), static_cast<unsigned>(d.day()));
}

void PricePanel::validate() const {
    if (prices.rows() < 2) {
        throw std::invalid_argument("price panel needs at least 2 rows");
    }
    if (prices.cols() < 1) {
        throw std::invalid_argument("price panel has no assets");
    }
    if (static_cast<Index>(dates.size()) != prices.rows() ||
        static_cast<Index>(tickers.size()) != prices.cols()) {
        throw std::invalid_argument("price panel labels do not match matrix shape");
    }
    for (std::size_t t = 1; t < dates.size(); ++t) {
        if (!(dates[t - 1] < dates[t])) {
            throw std::invalid_argument("dates not strictly increasing at " + format_date(dates[t]));
        }
    }
    if (!(prices.array() > 0.0).all()) {
        throw std::invalid_argument("price panel contains non-positive prices");
    }
}

ReturnPanel ReturnPanel::slice(Index begin, Index end) const {
    if (begin < 0 || end > rows() || begin > end) {
        throw std::out_of_range(fmt::format("slice [{}, {}) outside {} rows", begin, end, rows()));
    }
    ReturnPanel out;
    out.dates.assign(dates.begin() + begin, dates.begin() + end);
    out.tickers = tickers;
    out.log_returns = log_returns.middleRows(begin, end - begin);
    out.gross_returns = gross_returns.middleRows(begin, end - begin);
    return out;
}

ReturnPanel ReturnPanel::select(const std::vector<std::string>& names) const {
    ReturnPanel out;
    out.dates = dates;
    out.tickers = names;
    out.log_returns.resize(rows(), static_cast<Index>(names.size()));
    out.gross_returns.resize(rows(), static_cast<Index>(names.size()));
    for (std::size_t j = 0; j < names.size(); ++j) {
        const auto it = std::find(tickers.begin(), tickers.end(), names[j]);
        if (it == tickers.end()) {
            throw std::invalid_argument("unknown ticker '" + names[j] + "'");
        }
        const auto src = static_cast<Index>(it - tickers.begin());
        out.log_returns.col(static_cast<Index>(j)) = log_returns.col(src);
        out.gross_returns.col(static_cast<Index>(j)) = gross_returns.col(src);
    }
    return out;
}

LoadResult load_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot read price file '" + path.string() + "'");
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw std::invalid_argument("price file '" + path.string() + "' is empty");
    }
    const auto header = split_fields(line);
    if (header.empty() || header.front() != "date") {
        throw std::invalid_argument("price file '" + path.string() + "' must start with a 'date' column");
    }
    const std::size_t n_tickers = header.size() - 1;

    std::vector<Date> dates;
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        if (trim(line).empty()) {
            continue;
        }
        auto fields = split_fields(line);
        dates.push_back(parse_date(fields.front()));
        std::vector<double> row(n_tickers, std::nan(""));
        for (std::size_t j = 0; j < n_tickers && j + 1 < fields.size(); ++j) {
            row[j] = parse_cell(fields[j + 1]);
        }
        rows.push_back(std::move(row));
    }
    if (rows.size() < 2) {
        throw std::invalid_argument(
            fmt::format("price file '{}' has {} data rows, need at least 2", path.string(), rows.size()));
    }

    LoadResult result;
    std::vector<std::size_t> keep;
    for (std::size_t j = 0; j < n_tickers; ++j) {
        const bool complete = std::all_of(rows.begin(), rows.end(),
                                          [j](const auto& r) { return std::isfinite(r[j]) && r[j] > 0.0; });
        if (complete) {
            keep.push_back(j);
        } else {
            result.dropped.push_back(header[j + 1]);
        }
    }
    if (keep.empty()) {
        throw std::invalid_argument("no ticker in '" + path.string() + "' has a complete price history");
    }

    PricePanel& panel = result.panel;
    panel.dates = std::move(dates);
    panel.prices.resize(static_cast<Index>(rows.size()), static_cast<Index>(keep.size()));
    for (std::size_t k = 0; k < keep.size(); ++k) {
        panel.tickers.push_back(header[keep[k] + 1]);
        for (std::size_t t = 0; t < rows.size(); ++t) {
            panel.prices(static_cast<Index>(t), static_cast<Index>(k)) = rows[t][keep[k]];
        }
    }
    panel.validate();
    return result;
}

void write_csv(const PricePanel& panel, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write '" + path.string() + "'");
    }
    out << "date";
    for (const auto& t : panel.tickers) {
        out << ',' << t;
    }
    out << '\n';
    for (Index t = 0; t < panel.rows(); ++t) {
        out << format_date(panel.dates[static_cast<std::size_t>(t)]);
        for (Index j = 0; j < panel.assets(); ++j) {
            out << ',' << fmt::format("{:.12g}", panel.prices(t, j));
        }
        out << '\n';
    }
}

ReturnPanel to_returns(const PricePanel& panel) {
    panel.validate();
    const Index n = panel.rows() - 1;
    ReturnPanel out;
    out.dates.assign(panel.dates.begin() + 1, panel.dates.end());
    out.tickers = panel.tickers;
    out.gross_returns = panel.prices.bottomRows(n).array() / panel.prices.topRows(n).array();
    out.log_returns = out.gross_returns.array().log();
    return out;
}

std::pair<ReturnPanel, ReturnPanel> split(const ReturnPanel& returns, const SplitSpec& spec) {
    if (!(spec.train_end < spec.test_end)) {
        throw std::invalid_argument("train_end must precede test_end");
    }
    const auto& d = returns.dates;
    const auto train_rows = static_cast<Index>(std::upper_bound(d.begin(), d.end(), spec.train_end) - d.begin());
    const auto test_stop = static_cast<Index>(std::upper_bound(d.begin(), d.end(), spec.test_end) - d.begin());
    if (train_rows == 0) {
        throw std::invalid_argument("empty train segment: train_end precedes the first return date");
    }
    if (test_stop <= train_rows) {
        throw std::invalid_argument("empty test segment: no return dates after train_end");
    }
    return {returns.slice(0, train_rows), returns.slice(train_rows, test_stop)};
}

PricePanel synth_panel(std::uint64_t seed, Index rows, Index assets, const Matrix& target_corr,
                       const Vector& ann_vol, const Vector& ann_drift) {
    if (rows < 2 || assets < 1) {
        throw std::invalid_argument("synthetic panel needs rows >= 2 and assets >= 1");
    }
    if (target_corr.rows() != assets || target_corr.cols() != assets || ann_vol.size() != assets ||
        ann_drift.size() != assets) {
        throw std::invalid_argument("synthetic panel parameter sizes do not match asset count");
    }
    if (!target_corr.isApprox(target_corr.transpose(), 1e-12) ||
        !((target_corr.diagonal().array() - 1.0).abs() < 1e-12).all()) {
        throw std::invalid_argument("target correlation must be symmetric with unit diagonal");
    }
    Eigen::LLT<Matrix> llt(target_corr);
    if (llt.info() != Eigen::Success) {
        throw std::invalid_argument("target correlation is not positive definite");
    }
    const Matrix chol = llt.matrixL();

    const double dt = 1.0 / kTradingDaysPerYear;
    const Vector mean = (ann_drift.array() - 0.5 * ann_vol.array().square()) * dt;
    const Vector scale = ann_vol.array() * std::sqrt(dt);

    Rng rng(derive_seed(seed, {0x5359'4E54ULL}));
    PricePanel panel;
    panel.prices.resize(rows, assets);
    panel.prices.row(0).setConstant(100.0);
    Date day{std::chrono::year{2010}, std::chrono::January, std::chrono::day{4}};
    panel.dates.push_back(day);
    Vector shock(assets);
    for (Index t = 1; t < rows; ++t) {
        for (Index j = 0; j < assets; ++j) {
            shock(j) = rng.normal();
        }
        const Vector step = mean.array() + scale.array() * (chol * shock).array();
        panel.prices.row(t) = panel.prices.row(t - 1).array() * step.transpose().array().exp();
        day = next_weekday(day);
        panel.dates.push_back(day);
    }
    const int width = assets < 100 ? 2 : (assets < 1000 ? 3 : 4);
    for (Index j = 0; j < assets; ++j) {
        panel.tickers.push_back(fmt::format("SYN{:0{}d}", j, width));
    }
    return panel;
}

Matrix block_correlation(Index blocks, Index per_block, double intra, double inter) {
    const Index m = blocks * per_block;
    Matrix c(m, m);
    for (Index i = 0; i < m; ++i) {
        for (Index j = 0; j < m; ++j) {
            c(i, j) = i == j ? 1.0 : (i / per_block == j / per_block ? intra : inter);
        }
    }
    return c;
}

}  // namespace qrebal
