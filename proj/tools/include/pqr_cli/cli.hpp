#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "pqr/centering.hpp"
#include "pqr/quantile_pyramid.hpp"
#include "pqr/sampler.hpp"
#include "pqr/state.hpp"
#include "pqr/summary.hpp"

namespace pqr::cli {

enum class Command { Fit, SplineFit, ExtremeFit, Bench, PriorDraw };

struct RunConfig {
    Command command = Command::Fit;
    std::filesystem::path input;
    std::filesystem::path output = ".";
    std::vector<double> taus{0.1, 0.5, 0.9};
    CenteringKind centering = CenteringKind::Normal;
    std::size_t knots = 7;
    double threshold = 0.0;
    McmcConfig mcmc;
    std::size_t chains = 1;
    std::size_t threads = 1;
    double credibility = 0.95;

    int design = 1;
    Eigen::Index sample_size = 350;
    std::size_t replicates = 20;

    std::size_t draws = 100;
    double location = 0.0;
    double scale = 1.0;
    double shape = 0.0;
};

/// Responses and covariates read from a headered CSV.
struct Table {
    Eigen::VectorXd y;
    Eigen::MatrixXd x;
    std::vector<std::string> covariate_names;
};

/// First line is the header; exactly one column is named `y`, the others are
/// covariates. Throws InvalidInput naming row and column for unparsable or
/// non-finite cells.
Table ingest_csv(const std::filesystem::path& path);
Table parse_csv(std::istream& in);

/// Shortest text that parses back to the same double (never more than 17 significant digits).
std::string format_number(double v);
/// Locale-independent parse of a whole cell; nullopt if anything is left over or the value is not finite.
std::optional<double> parse_number(std::string_view cell);

/// Column layout of samples.csv: Q_p<p>_tau<tau> per pivot and level, then
/// mu_p<p>, sigma_p<p> (xi_p<p> for GPD), then log_posterior.
void write_samples(std::ostream& out, const std::vector<RegressionState>& states,
                   const std::vector<double>& log_posterior, const QuantileGrid& grid, CenteringKind centering);

struct SamplesFile {
    std::vector<double> taus;
    std::vector<RegressionState> states;
    std::vector<double> log_posterior;
};
SamplesFile read_samples(std::istream& in);

/// summary.csv: tau, coefficient name, mean, sd, median, lower, upper.
void write_summary(std::ostream& out, const std::vector<CoefficientSummary>& rows,
                   const std::vector<std::string>& coefficient_names);

/// Parses flags (and a key=value config file given by --config; flags win).
/// Returns nullopt when help was printed.
std::optional<RunConfig> parse_args(int argc, const char* const* argv, std::ostream& out);

/// Executes a run; progress and diagnostics go to `log` and report.txt.
void run(const RunConfig& config, std::ostream& log);

/// Single-line error text for an exception, e.g. "error kind=invalid_input message=...".
std::string error_line(const std::exception& e);
int exit_code(const std::exception& e);

/// Whole CLI: parse, run, print a one-line error and return nonzero on failure.
int main_entry(int argc, const char* const* argv);

}  // namespace pqr::cli
