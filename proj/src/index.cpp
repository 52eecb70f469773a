#include "ptorus/index.hpp"

#include <sstream>

#include "ptorus/error.hpp"

namespace ptorus {

PVIIndex::PVIIndex(std::array<int, 4> n)
    : n_(n)
{
    for (int v : n_)
        if (v < 0)
            fail(ErrorKind::InvalidArgument, "index entries must be non-negative");
}

boost::rational<long long> PVIIndex::alpha(int k) const
{
    const long long m = 2LL * n(k) + 1;
    return {m * m, 8};
}

double PVIIndex::alpha_value(int k) const
{
    return boost::rational_cast<double>(alpha(k));
}

std::string PVIIndex::to_string() const
{
    if (is_zero())
        return "0";
    std::ostringstream os;
    os << n_[0] << ',' << n_[1] << ',' << n_[2] << ',' << n_[3];
    return os.str();
}

PVIIndex PVIIndex::parse(const std::string& text)
{
    if (text == "0")
        return {};
    std::array<int, 4> n{};
    std::istringstream is(text);
    for (int k = 0; k < 4; ++k) {
        char comma = ',';
        if (k > 0)
            is >> comma;
        if (!(is >> n[k]) || comma != ',')
            fail(ErrorKind::InvalidArgument, "index must be 0 or n0,n1,n2,n3: '" + text + "'");
    }
    is >> std::ws;
    if (!is.eof())
        fail(ErrorKind::InvalidArgument, "index must be 0 or n0,n1,n2,n3: '" + text + "'");
    return PVIIndex(n);
}

} // namespace ptorus
