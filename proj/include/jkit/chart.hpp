#pragma once

#include <memory>
#include <string>
#include <vector>

#include "jkit/errors.hpp"

namespace jkit {

struct Chart;
using ChartPtr = std::shared_ptr<const Chart>;

/// A coordinate chart: an ordered list of variable names. A lifted chart is
/// the product with a line; its LAST coordinate is the exponential weight
/// variable, and coefficient functions on it use the exponential-graded
/// flavor.
struct Chart {
    std::vector<std::string> coords;
    bool lifted = false;

    int dim() const { return static_cast<int>(coords.size()); }

    /// Index of a coordinate name, or -1.
    int find(const std::string& name) const {
        for (int i = 0; i < dim(); ++i)
            if (coords[i] == name) return i;
        return -1;
    }

    static ChartPtr make(std::vector<std::string> names, bool lifted = false) {
        auto c = std::make_shared<Chart>();
        c->coords = std::move(names);
        c->lifted = lifted;
        for (std::size_t i = 0; i < c->coords.size(); ++i)
            for (std::size_t j = i + 1; j < c->coords.size(); ++j)
                if (c->coords[i] == c->coords[j])
                    throw StructuralError("duplicate coordinate name '" +
                                          c->coords[i] + "'");
        return c;
    }

    /// Chart with default names x0..x(n-1).
    static ChartPtr make_default(int n) {
        std::vector<std::string> names;
        names.reserve(n);
        for (int i = 0; i < n; ++i) names.push_back("x" + std::to_string(i));
        return make(std::move(names));
    }

    /// Product with a line: same coordinates plus a trailing weight variable.
    static ChartPtr lift(const ChartPtr& base, const std::string& tname = "t") {
        if (base->lifted)
            throw StructuralError("chart is already a product with a line");
        std::vector<std::string> names = base->coords;
        names.push_back(tname);
        return make(std::move(names), /*lifted=*/true);
    }
};

inline bool same_chart(const ChartPtr& a, const ChartPtr& b) {
    return a == b || (a && b && a->coords == b->coords && a->lifted == b->lifted);
}

inline void require_same_chart(const ChartPtr& a, const ChartPtr& b) {
    if (!same_chart(a, b)) throw StructuralError("operands live on different charts");
}

}  // namespace jkit
