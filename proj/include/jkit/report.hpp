#pragma once

#include <string>
#include <utility>
#include <vector>

namespace jkit {

/// One checked identity: the value that must vanish, pretty-printed, plus
/// the degree of the tensor it came from (0 for scalar residuals).
struct Residual {
    std::string label;
    int degree = 0;
    std::string expr;
    bool zero = false;
};

/// Outcome of a structure/bracket/axiom verification. pass is the AND of
/// all residual zero flags; note carries extra human-readable context that
/// does not participate in the JSON schema.
struct VerificationReport {
    std::string name;
    bool pass = true;
    std::vector<Residual> residuals;
    double ms = 0.0;
    std::string note;

    void add(Residual r) {
        pass = pass && r.zero;
        residuals.push_back(std::move(r));
    }

    void add(const std::string& label, int degree, std::string expr, bool zero) {
        add(Residual{label, degree, std::move(expr), zero});
    }

    void merge(const VerificationReport& other) {
        for (const auto& r : other.residuals) add(r);
    }
};

}  // namespace jkit
