#pragma once

#include <gmpxx.h>

#include <string>

namespace jkit {

/// Exact arbitrary-precision rational scalar. Arithmetic results are always
/// in canonical form (reduced, positive denominator).
using Rat = mpq_class;

/// num/den with canonicalization (mpq_class(n,d) alone does not reduce).
inline Rat rat(long num, long den = 1) {
    Rat r(num, den);
    r.canonicalize();
    return r;
}

inline bool rat_is_zero(const Rat& r) { return sgn(r) == 0; }

/// Canonical text form: "p" or "p/q" with q > 1.
inline std::string rat_str(const Rat& r) { return r.get_str(); }

/// Parses "p" or "p/q"; returns canonical value.
inline Rat rat_parse(const std::string& s) {
    Rat r(s);
    r.canonicalize();
    return r;
}

}  // namespace jkit
