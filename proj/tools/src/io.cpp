#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "pqr/errors.hpp"
#include "pqr_cli/cli.hpp"

namespace pqr::cli {

using Eigen::Index;

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const auto comma = line.find(',', start);
        out.push_back(trim(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

std::string unquote(std::string_view s) {
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
    return std::string(s);
}

std::string tau_label(double tau) { return format_number(tau); }

}  // namespace

std::string format_number(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::optional<double> parse_number(std::string_view cell) {
    cell = trim(cell);
    if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
    if (cell.empty()) return std::nullopt;
    double v = 0.0;
    const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (res.ec != std::errc() || res.ptr != cell.data() + cell.size() || !std::isfinite(v)) return std::nullopt;
    return v;
}

Table parse_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw InvalidInput("input file is empty");
    std::vector<std::string> header;
    for (auto cell : split(line)) header.push_back(unquote(cell));
    const auto y_pos = std::find(header.begin(), header.end(), "y");
    if (y_pos == header.end()) throw InvalidInput("input header has no column named \"y\"");
    if (std::count(header.begin(), header.end(), "y") > 1) throw InvalidInput("input header names \"y\" twice");
    const auto y_col = static_cast<std::size_t>(y_pos - header.begin());

    Table table;
    for (std::size_t c = 0; c < header.size(); ++c)
        if (c != y_col) table.covariate_names.push_back(header[c]);

    std::vector<double> ys;
    std::vector<double> xs;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto cells = split(line);
        if (cells.size() != header.size()) {
            std::ostringstream msg;
            msg << "row " << line_no << " has " << cells.size() << " cells, expected " << header.size();
            throw InvalidInput(msg.str());
        }
        for (std::size_t c = 0; c < cells.size(); ++c) {
            const auto v = parse_number(cells[c]);
            if (!v) {
                std::ostringstream msg;
                msg << "row " << line_no << ", column \"" << header[c] << "\": not a finite number: \""
                    << cells[c] << "\"";
                throw InvalidInput(msg.str());
            }
            if (c == y_col)
                ys.push_back(*v);
            else
                xs.push_back(*v);
        }
    }
    const auto n = static_cast<Index>(ys.size());
    const auto p = static_cast<Index>(table.covariate_names.size());
    table.y = Eigen::Map<const Eigen::VectorXd>(ys.data(), n);
    table.x = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(xs.data(), n, p);
    return table;
}

Table ingest_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot open input file " + path.string());
    return parse_csv(in);
}

void write_samples(std::ostream& out, const std::vector<RegressionState>& states,
                   const std::vector<double>& log_posterior, const QuantileGrid& grid, CenteringKind centering) {
    if (states.size() != log_posterior.size()) throw InvalidInput("one log-posterior value per state is required");
    const Index pivots = states.empty() ? 0 : states.front().pivot_count();
    const Index levels = static_cast<Index>(grid.size());
    std::string header;
    for (Index p = 0; p < pivots; ++p)
        for (Index t = 0; t < levels; ++t)
            header += "Q_p" + std::to_string(p) + "_tau" + tau_label(grid[static_cast<std::size_t>(t)]) + ",";
    for (Index p = 0; p < pivots; ++p) header += "mu_p" + std::to_string(p) + ",";
    for (Index p = 0; p < pivots; ++p) header += "sigma_p" + std::to_string(p) + ",";
    if (centering == CenteringKind::Gpd)
        for (Index p = 0; p < pivots; ++p) header += "xi_p" + std::to_string(p) + ",";
    out << header << "log_posterior\n";
    for (std::size_t s = 0; s < states.size(); ++s) {
        const RegressionState& st = states[s];
        std::string row;
        for (Index p = 0; p < pivots; ++p)
            for (Index t = 0; t < levels; ++t) row += format_number(st.quantiles(p, t)) + ",";
        for (Index p = 0; p < pivots; ++p) row += format_number(st.location(p)) + ",";
        for (Index p = 0; p < pivots; ++p) row += format_number(st.scale(p)) + ",";
        if (centering == CenteringKind::Gpd)
            for (Index p = 0; p < pivots; ++p) row += format_number(st.shape(p)) + ",";
        out << row << format_number(log_posterior[s]) << '\n';
    }
}

SamplesFile read_samples(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw InvalidInput("samples file is empty");
    const std::string header_line = line;
    const auto header = split(header_line);
    SamplesFile file;
    Index pivots = 0;
    std::vector<std::string> tau_text;
    for (auto name : header) {
        if (name.rfind("Q_p", 0) == 0) {
            const auto sep = name.find("_tau");
            const Index p = std::stol(std::string(name.substr(3, sep - 3)));
            pivots = std::max(pivots, p + 1);
            const std::string tau(name.substr(sep + 4));
            if (p == 0) tau_text.push_back(tau);
        }
    }
    for (const auto& t : tau_text) {
        const auto v = parse_number(t);
        if (!v) throw InvalidInput("bad quantile level in samples header: " + t);
        file.taus.push_back(*v);
    }
    const auto levels = static_cast<Index>(file.taus.size());
    const bool gpd = std::any_of(header.begin(), header.end(), [](auto n) { return n.rfind("xi_p", 0) == 0; });
    const std::size_t expected = static_cast<std::size_t>(pivots * levels + pivots * (gpd ? 3 : 2) + 1);
    if (header.size() != expected) throw InvalidInput("samples header has an unexpected layout");

    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto cells = split(line);
        if (cells.size() != expected) throw InvalidInput("samples row " + std::to_string(line_no) + " is malformed");
        std::vector<double> v(cells.size());
        for (std::size_t c = 0; c < cells.size(); ++c) {
            const auto parsed = parse_number(cells[c]);
            if (!parsed) throw InvalidInput("samples row " + std::to_string(line_no) + " has a bad cell");
            v[c] = *parsed;
        }
        RegressionState st = RegressionState::zeros(pivots, levels);
        std::size_t k = 0;
        for (Index p = 0; p < pivots; ++p)
            for (Index t = 0; t < levels; ++t) st.quantiles(p, t) = v[k++];
        for (Index p = 0; p < pivots; ++p) st.location(p) = v[k++];
        for (Index p = 0; p < pivots; ++p) st.scale(p) = v[k++];
        if (gpd)
            for (Index p = 0; p < pivots; ++p) st.shape(p) = v[k++];
        file.states.push_back(std::move(st));
        file.log_posterior.push_back(v[k]);
    }
    return file;
}

void write_summary(std::ostream& out, const std::vector<CoefficientSummary>& rows,
                   const std::vector<std::string>& coefficient_names) {
    out << "tau,coefficient,mean,sd,median,lower,upper\n";
    for (const auto& r : rows) {
        const auto j = static_cast<std::size_t>(r.coefficient);
        const std::string name = j < coefficient_names.size() ? coefficient_names[j] : std::to_string(j);
        out << format_number(r.tau) << ',' << name << ',' << format_number(r.stats.mean) << ','
            << format_number(r.stats.sd) << ',' << format_number(r.stats.median) << ','
            << format_number(r.stats.lower) << ',' << format_number(r.stats.upper) << '\n';
    }
}

}  // namespace pqr::cli
