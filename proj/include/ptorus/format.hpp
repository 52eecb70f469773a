#pragma once

// Fixed-precision text output shared by the CSV and JSON writers.

#include <complex>
#include <string>

namespace ptorus {

/// %.17g, with "NaN", "Infinity", "-Infinity" for non-finite values.
std::string fmt17(double x);

/// JSON number, or null when x is not finite.
std::string json_number(double x);

/// {"re": .., "im": ..}
std::string json_complex(std::complex<double> z);

std::string json_string(const std::string& s);

} // namespace ptorus
