#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "chanest/builtins.hpp"
#include "chanest/channel.hpp"
#include "chanest/povm.hpp"
#include "chanest/state.hpp"

namespace chanest::cli {

/// Everything one invocation needs. Filled from a flat key=value file and
/// command-line flags; flags win.
struct RunConfig {
    std::string command;                 // bound | distance-curve | optimality-check | simulate | channels
    std::string channel = "depolarizing";
    std::string extension = "none";      // none | identity | square
    std::optional<std::size_t> dim;      // random-shift
    std::optional<std::size_t> n_max;    // damping
    double theta_max = 4.0;              // random-shift
    std::string input;                   // empty: channel default
    std::string povm;                    // empty: channel default
    std::string decomposition = "canonical";  // bound: canonical | raw
    std::optional<double> theta_start;
    std::optional<double> theta_stop;
    std::size_t points = 19;
    std::optional<double> theta;         // simulate
    std::uint64_t shots = 1000;
    std::size_t trials = 100;
    std::uint64_t seed = 0;
    unsigned threads = 0;
    std::string out;                     // empty: standard output
    std::string format;                  // csv | json; empty: command default
};

/// Parses flags (and the file named by --config). Returns nullopt when help
/// was requested and printed to `out`. Throws ValidationError on bad input.
std::optional<RunConfig> parse_args(int argc, const char* const* argv, std::ostream& out);

/// Family described by the channel, parameter and extension fields.
ParamKrausFamily make_family(const RunConfig& config);

/// basis:N | plus | minus | bell:K | amps:re,im;re,im;...
QuantumState parse_input(const std::string& descriptor, std::size_t dim);

/// Input used when the config names none.
std::string default_input(const RunConfig& config, std::size_t dim);

/// POVM preset used when the config names none.
std::string default_povm(const RunConfig& config);

/// Named preset or file:PATH. "eigenframe" depends on theta and is resolved
/// by the caller.
Povm parse_povm(const std::string& descriptor, std::size_t dim);

/// theta_start..theta_stop with `points` entries, each pulled inside the
/// domain by domain_inset. Without theta_stop the grid is theta_start alone.
std::vector<double> theta_grid(const RunConfig& config, const ThetaDomain& domain);

/// Known closed form of the optimal Fisher information for this
/// configuration, if any.
std::optional<double> closed_form(const RunConfig& config, double theta);

/// Runs the command and returns the report text.
std::string render(const RunConfig& config);

/// Writes text to path through a temporary file and a rename.
void write_atomically(const std::string& path, const std::string& text);

/// "%.17g"
std::string format_number(double x);

/// Whole program: parse, run, write, report errors as one JSON line on `err`.
/// Returns the process exit status.
int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace chanest::cli
