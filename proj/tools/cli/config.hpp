#pragma once

// Run configuration shared by all subcommands, the key=value config file
// format, and the mapping from library errors to exit codes.

#include <map>
#include <optional>
#include <stdexcept>
#include <string>

#include "ptorus/elliptic.hpp"
#include "ptorus/error.hpp"
#include "ptorus/index.hpp"

namespace ptorus::cli {

enum ExitCode { kOk = 0, kUsage = 1, kNoConvergence = 2, kInfeasible = 3 };

enum class Format { Json, Csv };

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    /// Classification and unitarity tolerance.
    double tolerance = 1e-6;
    /// Relative tolerance of every ODE integration; absolute is 1e-2 of it.
    double ode_rel_tol = 1e-10;
    /// Detour clearance for monodromy paths; 0 selects it automatically.
    double clearance = 0.0;
    int newton_max_iter = 40;
    double series_tol = kDefaultTol;
    std::optional<Format> output_format;
    /// 0 keeps the library default.
    int threads = 0;

    /// Throws UsageError.
    void validate() const;
};

/// Parses `key = value` lines; blank lines and lines starting with '#' are
/// skipped. Throws UsageError on malformed lines or unknown keys.
std::map<std::string, std::string> parse_config_text(const std::string& text);
std::map<std::string, std::string> read_config_file(const std::string& path);

/// Applies parsed entries on top of cfg.
void apply_config(RunConfig& cfg, const std::map<std::string, std::string>& entries);

Format parse_format(const std::string& text);
/// Format implied by a file name (".csv" or ".json"), if any.
std::optional<Format> format_from_path(const std::string& path);

/// "re,im" (or a single real number).
cplx parse_complex(const std::string& text);
/// Throws UsageError when Im tau <= 0.
Tau parse_tau(const std::string& text);
PVIIndex parse_index(const std::string& text);

int exit_code_for(ErrorKind kind);

} // namespace ptorus::cli
