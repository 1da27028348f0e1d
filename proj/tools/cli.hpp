#pragma once

// Scenario-driven command front end. A scenario is a JSON object with a "kind" in
// {witness, thresholds, map, weight, channel, sweep}; see README.md for the fields.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "hdsteer/io.hpp"

namespace hdsteer::cli {

enum ExitCode : int { kOk = 0, kInternal = 1, kParse = 2, kValidation = 3, kSolver = 4 };

struct RunOptions {
    std::uint64_t seed = 0;
    bool seed_given = false;  // --seed overrides the scenario's "seed"
    double tol = 1e-9;
    unsigned threads = 0;  // 0: hardware concurrency, capped by HDSTEER_THREADS
};

/// Report text (JSON or CSV) for one scenario. Throws io::ParseError,
/// ValidationError, UnsupportedError or SolverError.
std::string run_scenario(const io::Json& scenario, const RunOptions& options);

/// Sweep CSV for isotropic states iso(eta) in dimension d, ordered by grid index.
std::string sweep_csv(std::size_t d, const std::vector<double>& etas, double tol, unsigned threads);

/// Full command line: parses flags, runs, writes the report, maps errors to exit codes.
int run(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace hdsteer::cli
