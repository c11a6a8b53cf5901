// Exact rational arithmetic used throughout the certified paths.
// Backed by boost::multiprecision with expression templates off so the
// type behaves like a plain arithmetic value in generic code.
#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <stdexcept>
#include <string>

namespace tap {

using Rat = boost::multiprecision::number<
    boost::multiprecision::backends::rational_adaptor<
        boost::multiprecision::backends::cpp_int_backend<>>,
    boost::multiprecision::et_off>;

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Always prints the canonical "p/q" form, e.g. "2/1", "-3/4".
inline std::string rat_str(const Rat& r) {
    return numerator(r).str() + "/" + denominator(r).str();
}

// Accepts "p" or "p/q" with q > 0 after normalization.
inline Rat parse_rat(const std::string& s) {
    auto slash = s.find('/');
    try {
        if (slash == std::string::npos)
            return Rat(boost::multiprecision::cpp_int(s));
        boost::multiprecision::cpp_int p(s.substr(0, slash));
        boost::multiprecision::cpp_int q(s.substr(slash + 1));
        if (q == 0) throw Error("rational with zero denominator: " + s);
        return Rat(p) / Rat(q);
    } catch (const std::runtime_error&) {
        throw Error("malformed rational: " + s);
    }
}

}  // namespace tap
