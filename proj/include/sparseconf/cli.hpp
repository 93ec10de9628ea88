#pragma once

#include "sparseconf/data.hpp"
#include "sparseconf/loss.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace sparseconf {

enum class Command { Path, Conformal, Baseline, Diagnose, Bench };

std::string to_string(Command command);

struct RunConfig {
    Command command = Command::Conformal;

    std::string dataset = "synthetic"; // synthetic | large | friedman1 | friedman2 | csv
    std::string csv_path;
    std::string label;
    long n = 100;
    long p = 100;
    std::uint64_t seed = 0;
    double noise_sd = -1.0; // < 0: generator default
    bool center = false;

    std::string loss = "quadratic";
    double q = 1.5;
    double gamma = 1.0;

    double lambda = 0.0;  // <= 0: 0.1 * lambda_max at z = max(y)
    double alpha = 0.1;
    double eps_tol = 0.0; // <= 0: loss default
    int grid_points = 100;
    double split_fraction = 0.5;
    int trials = 60;
    std::vector<std::string> methods{"homotopy", "grid", "split", "oracle"};
    int jobs = 1;
    int probes = 200;
    int curve_points = 1000;
    std::string out = ".";

    LossModel loss_model() const;
    // Throws Error(InvalidArgument) on an inconsistent configuration.
    void validate() const;
};

// Aggregate of one method over the bench trials.
struct BenchRow {
    std::string method;
    std::string dataset;
    std::string loss;
    double coverage = 0.0;
    double length = 0.0;   // mean interval width
    double time_s = 0.0;   // mean wall seconds per trial
    int trials = 0;
    int empty = 0;         // trials with an empty set
};

// A dataset of n + 1 rows whose last row is split off as the query.
struct Problem {
    Dataset data;
    Vector x_query;
    double y_query = 0.0;
    double lambda = 0.0;
};

Problem make_problem(const RunConfig& cfg, std::uint64_t seed);

std::vector<BenchRow> run_bench(const RunConfig& cfg);

// Parses argv into a config. Returns false after printing help or a usage
// error; `exit_code` is what main should return in that case.
bool parse_args(int argc, const char* const* argv, RunConfig& cfg, int& exit_code);

// Executes the command and writes its artifacts under cfg.out. On failure a
// JSON error object goes to `err`, files written so far are removed, and 1 is
// returned.
int run(const RunConfig& cfg, std::ostream& err);

} // namespace sparseconf
