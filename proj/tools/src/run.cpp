#include <CLI11.hpp>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "pqr/dataset.hpp"
#include "pqr/errors.hpp"
#include "pqr/model.hpp"
#include "pqr/simulation.hpp"
#include "pqr/spline.hpp"
#include "pqr_cli/cli.hpp"

namespace pqr::cli {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

constexpr int kLineGrid = 100;

std::ofstream open_output(const std::filesystem::path& dir, const std::string& name) {
    std::ofstream out(dir / name);
    if (!out) throw InvalidInput("cannot write " + (dir / name).string());
    return out;
}

// Tees report lines to the caller's log and report.txt.
class Report {
public:
    Report(std::ostream& log, const std::filesystem::path& dir) : log_(log), file_(open_output(dir, "report.txt")) {}
    template <typename T>
    Report& operator<<(const T& v) {
        log_ << v;
        file_ << v;
        return *this;
    }

private:
    std::ostream& log_;
    std::ofstream file_;
};

PosteriorSamples sample(const QuantileModel& model, const RunConfig& cfg, Report& report) {
    if (cfg.chains <= 1) return run_chain(model, cfg.mcmc);
    auto chains = run_chains(model, cfg.mcmc, cfg.chains, cfg.threads);
    PosteriorSamples merged = chains.front();
    for (std::size_t c = 1; c < chains.size(); ++c) {
        merged.states.insert(merged.states.end(), chains[c].states.begin(), chains[c].states.end());
        merged.log_posterior.insert(merged.log_posterior.end(), chains[c].log_posterior.begin(),
                                    chains[c].log_posterior.end());
    }
    if (chains.front().size() >= 2) {
        std::vector<std::vector<double>> lp;
        for (const auto& c : chains) lp.push_back(c.log_posterior);
        report << "chains: " << chains.size() << ", R-hat of log posterior " << format_number(gelman_rubin(lp)) << "\n";
    }
    return merged;
}

void report_chain(Report& report, const PosteriorSamples& s) {
    report << "update mode: " << std::string(to_string(s.mode)) << "\n";
    if (s.mode == UpdateMode::Reparametrized) report << "reparametrization offset c: " << format_number(s.reparam_offset) << "\n";
    report << "stored draws: " << s.size() << "\n";
    report << "acceptance (quantiles, pivot x level):\n";
    for (Index p = 0; p < s.acceptance.quantiles.rows(); ++p) {
        report << "  pivot " << p << ":";
        for (Index t = 0; t < s.acceptance.quantiles.cols(); ++t)
            report << " " << format_number(std::round(s.acceptance.quantiles(p, t) * 1000.0) / 1000.0);
        report << "\n";
    }
}

void write_lines(std::ostream& out, const std::string& x_name, const std::vector<double>& xs,
                 const std::vector<std::vector<VectorXd>>& draws_per_x, const QuantileGrid& grid, double credibility) {
    out << (x_name.empty() ? "" : x_name + ",") << "tau,mean,median,lower,upper\n";
    for (std::size_t t = 0; t < grid.size(); ++t) {
        for (std::size_t k = 0; k < draws_per_x.size(); ++k) {
            std::vector<double> v;
            v.reserve(draws_per_x[k].size());
            for (const auto& q : draws_per_x[k]) v.push_back(q(static_cast<Index>(t)));
            const IntervalSummary s = summarize_draws(v, credibility);
            if (!x_name.empty()) out << format_number(xs[k]) << ',';
            out << format_number(grid[t]) << ',' << format_number(s.mean) << ',' << format_number(s.median) << ','
                << format_number(s.lower) << ',' << format_number(s.upper) << '\n';
        }
    }
}

std::vector<double> line_grid(double lo, double hi) {
    std::vector<double> xs(kLineGrid);
    for (int k = 0; k < kLineGrid; ++k) xs[static_cast<std::size_t>(k)] = lo + (hi - lo) * k / (kLineGrid - 1);
    xs.back() = hi;
    return xs;
}

void write_sample_files(const RunConfig& cfg, const PosteriorSamples& s, const QuantileGrid& grid,
                        CenteringKind centering) {
    auto out = open_output(cfg.output, "samples.csv");
    write_samples(out, s.states, s.log_posterior, grid, centering);
}

void fit_linear(const RunConfig& cfg, Table table, CenteringKind centering, Report& report) {
    const Dataset data = make_dataset(std::move(table.y), std::move(table.x), table.covariate_names);
    report << "observations N: " << data.size() << ", covariates P: " << data.dimension()
           << ", hull vertices: " << data.hull.size() << "\n";
    if (!data.hull.diagnostic.empty()) report << "hull: " << data.hull.diagnostic << "\n";

    const QuantileGrid grid(cfg.taus);
    const QuantileModel model = make_linear_model(data, ModelSpec::make(grid, centering, cfg.threshold));
    const auto start = std::chrono::steady_clock::now();
    const PosteriorSamples s = sample(model, cfg, report);
    report << "sampling seconds: "
           << format_number(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count()) << "\n";
    report_chain(report, s);

    write_sample_files(cfg, s, grid, centering);
    std::vector<std::string> names{"intercept"};
    names.insert(names.end(), data.covariate_names.begin(), data.covariate_names.end());
    {
        auto out = open_output(cfg.output, "summary.csv");
        write_summary(out, summarize(s.states, data.frame, grid, cfg.credibility), names);
    }

    auto out = open_output(cfg.output, "quantile_lines.csv");
    const Index dim = data.dimension();
    if (dim == 0) {
        std::vector<VectorXd> draws;
        for (const auto& st : s.states) draws.push_back(st.quantiles.row(0).transpose());
        write_lines(out, "", {}, {draws}, grid, cfg.credibility);
        return;
    }
    // First covariate varies over its range, the others sit at their means.
    const VectorXd centre = data.x.colwise().mean().transpose();
    const std::vector<double> xs = line_grid(data.x.col(0).minCoeff(), data.x.col(0).maxCoeff());
    std::vector<std::vector<VectorXd>> per_x;
    for (double xv : xs) {
        VectorXd raw = centre;
        raw(0) = xv;
        const VectorXd z = data.frame.to_pivot(raw);
        std::vector<VectorXd> draws;
        draws.reserve(s.size());
        for (const auto& st : s.states) draws.push_back(conditional_quantiles(st, z));
        per_x.push_back(std::move(draws));
    }
    write_lines(out, data.covariate_names.front(), xs, per_x, grid, cfg.credibility);
}

void fit_spline(const RunConfig& cfg, const Table& table, Report& report) {
    if (table.x.cols() != 1) throw InvalidInput("spline-fit needs exactly one covariate column");
    if (table.y.size() < 1) throw InvalidInput("spline-fit needs at least one observation");
    if (cfg.knots < 2) throw InvalidInput("spline-fit needs at least two knots");
    const VectorXd x = table.x.col(0);
    const SplineKnots knots = SplineKnots::equally_spaced(x.minCoeff(), x.maxCoeff(), cfg.knots);
    const QuantileGrid grid(cfg.taus);
    const QuantileModel model = make_spline_model(table.y, x, knots, ModelSpec::make(grid, cfg.centering, cfg.threshold));
    report << "observations N: " << table.y.size() << ", knots: " << knots.size() << "\n";
    const auto start = std::chrono::steady_clock::now();
    const PosteriorSamples s = sample(model, cfg, report);
    report << "sampling seconds: "
           << format_number(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count()) << "\n";
    report_chain(report, s);

    write_sample_files(cfg, s, grid, cfg.centering);
    std::vector<std::string> names;
    for (std::size_t k = 0; k < knots.size(); ++k) names.push_back("knot_" + format_number(knots[k]));
    {
        auto out = open_output(cfg.output, "summary.csv");
        write_summary(out, summarize_knots(s.states, grid, cfg.credibility), names);
    }
    auto out = open_output(cfg.output, "quantile_lines.csv");
    const std::vector<double> xs = line_grid(knots[0], knots[knots.size() - 1]);
    std::vector<std::vector<VectorXd>> per_x;
    for (double xv : xs) {
        std::vector<VectorXd> draws;
        draws.reserve(s.size());
        for (const auto& st : s.states) draws.push_back(spline_quantiles(knots, st, xv));
        per_x.push_back(std::move(draws));
    }
    write_lines(out, table.covariate_names.front(), xs, per_x, grid, cfg.credibility);
}

void fit_extreme(const RunConfig& cfg, const Table& table, Report& report) {
    Table kept;
    kept.covariate_names = table.covariate_names;
    std::vector<Index> rows;
    for (Index i = 0; i < table.y.size(); ++i)
        if (table.y(i) > cfg.threshold) rows.push_back(i);
    kept.y.resize(static_cast<Index>(rows.size()));
    kept.x.resize(static_cast<Index>(rows.size()), table.x.cols());
    for (std::size_t k = 0; k < rows.size(); ++k) {
        kept.y(static_cast<Index>(k)) = table.y(rows[k]);
        kept.x.row(static_cast<Index>(k)) = table.x.row(rows[k]);
    }
    report << "threshold: " << format_number(cfg.threshold) << ", exceedances used: " << rows.size() << " of "
           << table.y.size() << "\n";
    if (rows.empty()) throw InvalidInput("no responses exceed the threshold");
    fit_linear(cfg, std::move(kept), CenteringKind::Gpd, report);
}

void bench(const RunConfig& cfg, Report& report) {
    BenchConfig bc;
    bc.design.design = cfg.design;
    bc.design.n = cfg.sample_size;
    bc.design.replicates = cfg.replicates;
    bc.design.taus = cfg.taus;
    bc.design.seed = cfg.mcmc.seed;
    bc.mcmc = cfg.mcmc;
    bc.centering = cfg.centering;
    bc.credibility = cfg.credibility;
    bc.threads = cfg.threads;
    const BenchReport r = run_bench(bc);
    report << "design " << cfg.design << ", N " << cfg.sample_size << ", replicates " << cfg.replicates
           << ", seconds " << format_number(r.seconds) << "\n";

    {
        auto out = open_output(cfg.output, "bench_report.csv");
        out << "method,tau,coefficient,truth,mean_estimate,rmse100,coverage\n";
        for (const auto& row : r.rows)
            out << row.method << ',' << format_number(row.tau) << ",beta" << row.coefficient << ','
                << format_number(row.truth) << ',' << format_number(row.mean_estimate) << ','
                << format_number(row.rmse100) << ',' << (std::isnan(row.coverage) ? "" : format_number(row.coverage))
                << '\n';
    }
    {
        auto out = open_output(cfg.output, "bench_replicates.csv");
        out << "replicate,tau,coefficient,posterior_mean,lower,upper,checkloss,seconds\n";
        for (const auto& rep : r.replicates)
            for (Index t = 0; t < rep.posterior_mean.rows(); ++t)
                for (Index j = 0; j < rep.posterior_mean.cols(); ++j)
                    out << rep.replicate << ',' << format_number(cfg.taus[static_cast<std::size_t>(t)]) << ",beta" << j
                        << ',' << format_number(rep.posterior_mean(t, j)) << ',' << format_number(rep.lower(t, j))
                        << ',' << format_number(rep.upper(t, j)) << ','
                        << (rep.checkloss.size() ? format_number(rep.checkloss(t, j)) : "") << ','
                        << format_number(rep.seconds) << '\n';
    }
    // Rows = methods, columns = coefficients, one block per level.
    auto out = open_output(cfg.output, "bench_table.txt");
    const Index coefs = design_dimension(cfg.design) + 1;
    for (const char* metric : {"RMSE x 100", "coverage"}) {
        out << metric << "\n";
        for (double tau : cfg.taus) {
            out << "tau = " << tau << "\n" << std::left;
            out << "  " << std::setw(10) << "method";
            for (Index j = 0; j < coefs; ++j) out << std::setw(10) << ("beta" + std::to_string(j));
            out << "\n";
            for (const std::string method : {"pqr", "checkloss"}) {
                if (std::string(metric) == "coverage" && method == "checkloss") continue;
                std::ostringstream line;
                line << std::left << "  " << std::setw(10) << method;
                bool any = false;
                for (const auto& row : r.rows) {
                    if (row.method != method || row.tau != tau) continue;
                    any = true;
                    const double v = std::string(metric) == "coverage" ? row.coverage : row.rmse100;
                    std::ostringstream cell;
                    cell << std::fixed << std::setprecision(2) << v;
                    line << std::setw(10) << cell.str();
                }
                if (any) out << line.str() << "\n";
            }
        }
        out << "\n";
    }
}

void prior_draw(const RunConfig& cfg, Report& report) {
    const QuantileGrid grid(cfg.taus);
    const PyramidTree tree = make_pyramid(grid);
    const ModelSpec spec = ModelSpec::make(grid, cfg.centering, cfg.threshold);
    const auto dist = make_centering(spec, {cfg.location, cfg.scale, cfg.shape});
    if (!dist) throw InvalidInput("centering scale must be positive");
    Rng rng = make_stream(cfg.mcmc.seed, 0);
    auto out = open_output(cfg.output, "prior_draws.csv");
    out << "draw,tau,quantile\n";
    for (std::size_t d = 0; d < cfg.draws; ++d) {
        const std::vector<double> q = transform_unit(*dist, sample_unit_pyramid(tree, rng));
        for (std::size_t t = 0; t < grid.size(); ++t)
            out << d << ',' << format_number(grid[t]) << ',' << format_number(q[t]) << '\n';
    }
    report << "prior draws: " << cfg.draws << ", centering " << std::string(to_string(cfg.centering)) << "\n";
}

std::string kind_of(const std::exception& e) {
    if (dynamic_cast<const InvalidInput*>(&e)) return "invalid_input";
    if (dynamic_cast<const DegenerateData*>(&e)) return "degenerate_data";
    if (dynamic_cast<const InitializationError*>(&e)) return "initialization";
    if (dynamic_cast<const SolverError*>(&e)) return "solver";
    if (dynamic_cast<const LogicError*>(&e)) return "internal";
    if (dynamic_cast<const CLI::Error*>(&e)) return "usage";
    return "error";
}

}  // namespace

std::optional<RunConfig> parse_args(int argc, const char* const* argv, std::ostream& out) {
    RunConfig cfg;
    CLI::App app{"Simultaneous Bayesian linear quantile regression with quantile pyramids", "pqr"};
    app.set_config("--config", "", "key=value configuration file; command-line flags take precedence");
    app.require_subcommand(1, 1);
    app.fallthrough();

    auto* fit = app.add_subcommand("fit", "linear quantile regression on a CSV with a y column");
    auto* spline = app.add_subcommand("spline-fit", "piecewise-linear quantile curves on one covariate");
    auto* extreme = app.add_subcommand("extreme-fit", "GPD-centred fit on the responses above --threshold");
    auto* bench_cmd = app.add_subcommand("bench", "simulation study on one of the four designs");
    auto* prior = app.add_subcommand("prior-draw", "draws of the prior quantile function");

    std::string input, center = "normal", mode = "auto";
    app.add_option("--input,-i", input, "input CSV");
    for (auto* sub : {fit, spline, extreme}) sub->add_option("input", input, "input CSV");
    app.add_option("--out,-o", cfg.output, "output directory");
    app.add_option("--tau", cfg.taus, "quantile levels, comma separated")->delimiter(',');
    app.add_option("--center", center, "centering distribution: normal, gpd or uniform");
    app.add_option("--iters", cfg.mcmc.iterations, "MCMC iterations including burn-in");
    app.add_option("--burnin", cfg.mcmc.burn_in, "burn-in iterations");
    app.add_option("--thin", cfg.mcmc.thin, "thinning interval");
    app.add_option("--seed", cfg.mcmc.seed, "random seed");
    app.add_option("--mode", mode, "quantile updates: auto, coordinate or reparam");
    app.add_option("--chains", cfg.chains, "independent chains, pooled in the output");
    app.add_option("--threads", cfg.threads, "maximum concurrent chains or replicates");
    app.add_option("--credibility", cfg.credibility, "equal-tailed interval probability");
    app.add_option("--knots", cfg.knots, "spline knots, equally spaced over the covariate range");
    app.add_option("--threshold", cfg.threshold, "GPD threshold");
    app.add_option("--design", cfg.design, "simulation design 1..4");
    app.add_option("--replicates", cfg.replicates, "simulation replicates");
    app.add_option("--n", cfg.sample_size, "simulation sample size");
    app.add_option("--draws", cfg.draws, "prior-draw: number of draws");
    app.add_option("--location", cfg.location, "prior-draw: centering location");
    app.add_option("--scale", cfg.scale, "prior-draw: centering scale");
    app.add_option("--shape", cfg.shape, "prior-draw: GPD shape");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return std::nullopt;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return std::nullopt;
    }

    if (fit->parsed()) cfg.command = Command::Fit;
    if (spline->parsed()) cfg.command = Command::SplineFit;
    if (extreme->parsed()) cfg.command = Command::ExtremeFit;
    if (bench_cmd->parsed()) cfg.command = Command::Bench;
    if (prior->parsed()) cfg.command = Command::PriorDraw;
    cfg.input = input;
    cfg.centering = parse_centering_kind(center);
    if (cfg.command == Command::ExtremeFit) cfg.centering = CenteringKind::Gpd;
    if (mode == "coordinate")
        cfg.mcmc.mode = UpdateMode::CoordinateUniform;
    else if (mode == "reparam")
        cfg.mcmc.mode = UpdateMode::Reparametrized;
    else if (mode != "auto")
        throw InvalidInput("--mode must be auto, coordinate or reparam");
    QuantileGrid check(cfg.taus);
    (void)check;
    const bool needs_input =
        cfg.command == Command::Fit || cfg.command == Command::SplineFit || cfg.command == Command::ExtremeFit;
    if (needs_input && cfg.input.empty()) throw InvalidInput("an input CSV is required");
    if (cfg.command != Command::PriorDraw) cfg.mcmc.validate();
    return cfg;
}

void run(const RunConfig& cfg, std::ostream& log) {
    std::filesystem::create_directories(cfg.output);
    Report report(log, cfg.output);
    switch (cfg.command) {
        case Command::Fit: fit_linear(cfg, ingest_csv(cfg.input), cfg.centering, report); break;
        case Command::SplineFit: fit_spline(cfg, ingest_csv(cfg.input), report); break;
        case Command::ExtremeFit: fit_extreme(cfg, ingest_csv(cfg.input), report); break;
        case Command::Bench: bench(cfg, report); break;
        case Command::PriorDraw: prior_draw(cfg, report); break;
    }
}

std::string error_line(const std::exception& e) {
    std::string msg = e.what();
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    std::replace(msg.begin(), msg.end(), '\r', ' ');
    return "error kind=" + kind_of(e) + " message=" + msg;
}

int exit_code(const std::exception& e) {
    const std::string kind = kind_of(e);
    if (kind == "invalid_input" || kind == "usage") return 2;
    if (kind == "degenerate_data") return 3;
    if (kind == "initialization") return 4;
    if (kind == "solver") return 5;
    if (kind == "internal") return 6;
    return 1;
}

int main_entry(int argc, const char* const* argv) {
    try {
        const auto cfg = parse_args(argc, argv, std::cout);
        if (!cfg) return 0;
        run(*cfg, std::cout);
        return 0;
    } catch (const std::exception& e) {
        std::cerr << error_line(e) << std::endl;
        return exit_code(e);
    }
}

}  // namespace pqr::cli
