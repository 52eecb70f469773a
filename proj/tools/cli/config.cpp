#include "config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

namespace ptorus::cli {

namespace {

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& text)
{
    const std::string t = trim(text);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size() || t.empty())
        throw UsageError(key + ": expected a number, got '" + text + "'");
    return v;
}

int parse_int(const std::string& key, const std::string& text)
{
    const std::string t = trim(text);
    int v = 0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size() || t.empty())
        throw UsageError(key + ": expected an integer, got '" + text + "'");
    return v;
}

} // namespace

void RunConfig::validate() const
{
    if (!(tolerance > 0.0))
        throw UsageError("tolerance must be positive");
    if (!(ode_rel_tol > 0.0))
        throw UsageError("ode_rel_tol must be positive");
    if (!(clearance >= 0.0))
        throw UsageError("clearance must be non-negative");
    if (newton_max_iter < 1)
        throw UsageError("newton_max_iter must be at least 1");
    if (!(series_tol > 0.0))
        throw UsageError("series_tol must be positive");
    if (threads < 0)
        throw UsageError("threads must be non-negative");
}

std::map<std::string, std::string> parse_config_text(const std::string& text)
{
    static const char* known[] = {"tolerance",  "ode_rel_tol",   "clearance", "newton_max_iter",
                                  "series_tol", "output_format", "threads"};
    std::map<std::string, std::string> out;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#')
            continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw UsageError("config line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(t.substr(0, eq)), value = trim(t.substr(eq + 1));
        if (std::find(std::begin(known), std::end(known), key) == std::end(known))
            throw UsageError("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
        out[key] = value;
    }
    return out;
}

std::map<std::string, std::string> read_config_file(const std::string& path)
{
    std::ifstream f(path);
    if (!f)
        throw UsageError("cannot read config file '" + path + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_config_text(ss.str());
}

void apply_config(RunConfig& cfg, const std::map<std::string, std::string>& entries)
{
    for (const auto& [key, value] : entries) {
        if (key == "tolerance")
            cfg.tolerance = parse_double(key, value);
        else if (key == "ode_rel_tol")
            cfg.ode_rel_tol = parse_double(key, value);
        else if (key == "clearance")
            cfg.clearance = parse_double(key, value);
        else if (key == "newton_max_iter")
            cfg.newton_max_iter = parse_int(key, value);
        else if (key == "series_tol")
            cfg.series_tol = parse_double(key, value);
        else if (key == "output_format")
            cfg.output_format = parse_format(value);
        else if (key == "threads")
            cfg.threads = parse_int(key, value);
        else
            throw UsageError("unknown config key '" + key + "'");
    }
}

Format parse_format(const std::string& text)
{
    if (text == "json")
        return Format::Json;
    if (text == "csv")
        return Format::Csv;
    throw UsageError("format must be json or csv, got '" + text + "'");
}

std::optional<Format> format_from_path(const std::string& path)
{
    auto ends_with = [&](const std::string& suffix) {
        return path.size() >= suffix.size() &&
               path.compare(path.size() - suffix.size(), suffix.size(), suffix) == 0;
    };
    if (ends_with(".csv"))
        return Format::Csv;
    if (ends_with(".json"))
        return Format::Json;
    return std::nullopt;
}

cplx parse_complex(const std::string& text)
{
    const auto comma = text.find(',');
    if (comma == std::string::npos)
        return {parse_double("complex", text), 0.0};
    if (text.find(',', comma + 1) != std::string::npos)
        throw UsageError("complex numbers are written re,im; got '" + text + "'");
    return {parse_double("complex", text.substr(0, comma)),
            parse_double("complex", text.substr(comma + 1))};
}

Tau parse_tau(const std::string& text)
{
    const cplx t = parse_complex(text);
    if (!(t.imag() > 0.0))
        throw UsageError("--tau must have positive imaginary part, got '" + text + "'");
    return Tau(t);
}

PVIIndex parse_index(const std::string& text)
{
    try {
        return PVIIndex::parse(text);
    } catch (const NumericError& e) {
        throw UsageError(std::string("--n: ") + e.what());
    }
}

int exit_code_for(ErrorKind kind)
{
    switch (kind) {
    case ErrorKind::InvalidTau:
    case ErrorKind::InvalidArgument:
    case ErrorKind::HalfLatticeInput:
    case ErrorKind::UnsupportedIndex:
        return kUsage;
    case ErrorKind::NoConvergence:
    case ErrorKind::StepFailure:
    case ErrorKind::StepTooLarge:
    case ErrorKind::IntegrationFailure:
    case ErrorKind::BranchJump:
    case ErrorKind::HalfPeriodCollision:
        return kNoConvergence;
    case ErrorKind::PoleProximity:
    case ErrorKind::DegenerateZ:
    case ErrorKind::DegenerateDenominator:
    case ErrorKind::NoValidBasepoint:
    case ErrorKind::IllConditioned:
    case ErrorKind::NotUnitary:
    case ErrorKind::CircleIntersectsSingularity:
        return kInfeasible;
    }
    return kNoConvergence;
}

} // namespace ptorus::cli
