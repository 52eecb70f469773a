#pragma once

// Index n = (n0, n1, n2, n3) of the Lame-type equation and the associated
// Painleve VI parameters alpha_k = (2 n_k + 1)^2 / 8.

#include <array>
#include <string>

#include <boost/rational.hpp>

namespace ptorus {

class PVIIndex {
public:
    PVIIndex() = default;
    /// Throws NumericError(InvalidArgument) on negative entries.
    explicit PVIIndex(std::array<int, 4> n);

    static PVIIndex zero() { return {}; }
    static PVIIndex okamoto_1000() { return PVIIndex({1, 0, 0, 0}); }

    int n(int k) const { return n_.at(k); }
    const std::array<int, 4>& entries() const noexcept { return n_; }
    /// n_k (n_k + 1), the weight of the half period omega_k / 2.
    int weight(int k) const { return n_.at(k) * (n_.at(k) + 1); }

    boost::rational<long long> alpha(int k) const;
    double alpha_value(int k) const;

    bool is_zero() const noexcept { return n_ == std::array<int, 4>{0, 0, 0, 0}; }
    bool is_okamoto_1000() const noexcept { return n_ == std::array<int, 4>{1, 0, 0, 0}; }

    /// "0" or "1,0,0,0" style text.
    std::string to_string() const;
    /// Accepts "0" (all zero) or four comma separated non-negative integers.
    static PVIIndex parse(const std::string& text);

    bool operator==(const PVIIndex& o) const noexcept { return n_ == o.n_; }

private:
    std::array<int, 4> n_{0, 0, 0, 0};
};

} // namespace ptorus
