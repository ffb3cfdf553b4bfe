#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "jkit/chart.hpp"
#include "jkit/errors.hpp"
#include "jkit/rational.hpp"

namespace jkit {

/// Exponent vector; size equals the chart dimension.
using Exps = std::vector<std::uint32_t>;

/// Sparse multivariate polynomial with exact rational coefficients over a
/// chart. Canonical form: the term map never stores a zero coefficient, keys
/// are full-length exponent vectors ordered lexicographically by std::map.
class Polynomial {
public:
    Polynomial() = default;
    explicit Polynomial(ChartPtr chart) : chart_(std::move(chart)) {}

    static Polynomial zero(const ChartPtr& c) { return Polynomial(c); }

    static Polynomial constant(const ChartPtr& c, const Rat& r) {
        Polynomial p(c);
        if (!rat_is_zero(r)) p.terms_[Exps(c->dim(), 0)] = r;
        return p;
    }

    static Polynomial one(const ChartPtr& c) { return constant(c, 1); }

    static Polynomial variable(const ChartPtr& c, int i) {
        if (i < 0 || i >= c->dim()) throw StructuralError("variable index out of range");
        Polynomial p(c);
        Exps e(c->dim(), 0);
        e[i] = 1;
        p.terms_[e] = 1;
        return p;
    }

    static Polynomial monomial(const ChartPtr& c, const Exps& e, const Rat& r) {
        if (static_cast<int>(e.size()) != c->dim())
            throw StructuralError("exponent vector length does not match chart");
        Polynomial p(c);
        if (!rat_is_zero(r)) p.terms_[e] = r;
        return p;
    }

    const ChartPtr& chart() const { return chart_; }
    const std::map<Exps, Rat>& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }

    bool is_constant() const {
        if (terms_.empty()) return true;
        if (terms_.size() != 1) return false;
        const auto& e = terms_.begin()->first;
        for (auto v : e)
            if (v != 0) return false;
        return true;
    }

    /// Constant value; zero polynomial gives 0, non-constant input is a
    /// degree error.
    Rat constant_value() const {
        if (is_zero()) return Rat(0);
        if (!is_constant()) throw DegreeError("polynomial is not constant");
        return terms_.begin()->second;
    }

    int total_degree() const {
        int d = 0;
        for (const auto& [e, c] : terms_) {
            int s = 0;
            for (auto v : e) s += static_cast<int>(v);
            if (s > d) d = s;
        }
        return d;
    }

    friend Polynomial operator+(const Polynomial& a, const Polynomial& b) {
        require_same_chart(a.chart_, b.chart_);
        Polynomial r = a;
        for (const auto& [e, c] : b.terms_) r.add_term(e, c);
        return r;
    }

    friend Polynomial operator-(const Polynomial& a, const Polynomial& b) {
        require_same_chart(a.chart_, b.chart_);
        Polynomial r = a;
        for (const auto& [e, c] : b.terms_) r.add_term(e, -c);
        return r;
    }

    friend Polynomial operator-(const Polynomial& a) {
        Polynomial r(a.chart_);
        for (const auto& [e, c] : a.terms_) r.terms_[e] = -c;
        return r;
    }

    friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
        require_same_chart(a.chart_, b.chart_);
        Polynomial r(a.chart_);
        for (const auto& [ea, ca] : a.terms_) {
            for (const auto& [eb, cb] : b.terms_) {
                Exps e = ea;
                for (std::size_t i = 0; i < e.size(); ++i) e[i] += eb[i];
                r.add_term(e, ca * cb);
            }
            guard_terms(r.terms_.size());
        }
        return r;
    }

    friend Polynomial operator*(const Rat& c, const Polynomial& a) {
        Polynomial r(a.chart_);
        if (rat_is_zero(c)) return r;
        for (const auto& [e, v] : a.terms_) r.terms_[e] = c * v;
        return r;
    }

    friend bool operator==(const Polynomial& a, const Polynomial& b) {
        return same_chart(a.chart_, b.chart_) && a.terms_ == b.terms_;
    }

    friend bool operator!=(const Polynomial& a, const Polynomial& b) { return !(a == b); }

    friend bool operator==(const Polynomial& a, const Rat& r) {
        return a.is_constant() && a.constant_value() == r;
    }
    friend bool operator==(const Rat& r, const Polynomial& a) { return a == r; }
    friend bool operator!=(const Polynomial& a, const Rat& r) { return !(a == r); }
    friend bool operator!=(const Rat& r, const Polynomial& a) { return !(a == r); }

    /// Partial derivative with respect to coordinate i.
    Polynomial partial(int i) const {
        if (i < 0 || i >= chart_->dim()) throw StructuralError("partial index out of range");
        Polynomial r(chart_);
        for (const auto& [e, c] : terms_) {
            if (e[i] == 0) continue;
            Exps d = e;
            d[i] -= 1;
            r.add_term(d, c * Rat(static_cast<long>(e[i])));
        }
        return r;
    }

    /// Value at a rational point (componentwise).
    Rat eval(const std::vector<Rat>& x) const {
        Rat total(0);
        for (const auto& [e, c] : terms_) {
            Rat m = c;
            for (std::size_t i = 0; i < e.size(); ++i)
                for (std::uint32_t k = 0; k < e[i]; ++k) m *= x[i];
            total += m;
        }
        return total;
    }

    std::string str() const {
        if (terms_.empty()) return "0";
        std::string out;
        bool first = true;
        for (const auto& [e, c] : terms_) {
            Rat a = c;
            bool neg = sgn(a) < 0;
            if (neg) a = -a;
            if (first) {
                if (neg) out += "-";
                first = false;
            } else {
                out += neg ? " - " : " + ";
            }
            std::string vars;
            for (std::size_t i = 0; i < e.size(); ++i) {
                if (e[i] == 0) continue;
                if (!vars.empty()) vars += "*";
                vars += chart_->coords[i];
                if (e[i] > 1) vars += "^" + std::to_string(e[i]);
            }
            if (vars.empty()) {
                out += rat_str(a);
            } else if (a == 1) {
                out += vars;
            } else {
                out += rat_str(a) + "*" + vars;
            }
        }
        return out;
    }

private:
    void add_term(const Exps& e, const Rat& c) {
        auto it = terms_.find(e);
        if (it == terms_.end()) {
            if (!rat_is_zero(c)) terms_[e] = c;
        } else {
            it->second += c;
            if (rat_is_zero(it->second)) terms_.erase(it);
        }
    }

    ChartPtr chart_;
    std::map<Exps, Rat> terms_;
};

/// Exponential-graded coefficient on a lifted chart: a finite sum of
/// integer-weight layers, weight k standing for the exponential of k times
/// the weight variable, each with a polynomial factor (which may itself use
/// the weight variable as an ordinary polynomial variable). Canonical form:
/// no zero layers.
class ExpCoeff {
public:
    ExpCoeff() = default;
    explicit ExpCoeff(ChartPtr chart) : chart_(std::move(chart)) {
        if (!chart_->lifted)
            throw StructuralError("exponential coefficients require a lifted chart");
    }

    static ExpCoeff zero(const ChartPtr& c) { return ExpCoeff(c); }

    static ExpCoeff constant(const ChartPtr& c, const Rat& r) {
        ExpCoeff x(c);
        if (!rat_is_zero(r)) x.parts_[0] = Polynomial::constant(c, r);
        return x;
    }

    static ExpCoeff one(const ChartPtr& c) { return constant(c, 1); }

    static ExpCoeff variable(const ChartPtr& c, int i) {
        ExpCoeff x(c);
        x.parts_[0] = Polynomial::variable(c, i);
        return x;
    }

    static ExpCoeff from_poly(const Polynomial& p) {
        ExpCoeff x(p.chart());
        if (!p.is_zero()) x.parts_[0] = p;
        return x;
    }

    /// Pure exponential layer of weight k.
    static ExpCoeff exp_weight(const ChartPtr& c, long k) {
        ExpCoeff x(c);
        x.parts_[k] = Polynomial::one(c);
        return x;
    }

    const ChartPtr& chart() const { return chart_; }
    const std::map<long, Polynomial>& parts() const { return parts_; }
    bool is_zero() const { return parts_.empty(); }

    bool is_constant() const {
        if (parts_.empty()) return true;
        if (parts_.size() != 1 || parts_.begin()->first != 0) return false;
        return parts_.begin()->second.is_constant();
    }

    Rat constant_value() const {
        if (is_zero()) return Rat(0);
        if (!is_constant()) throw DegreeError("coefficient is not constant");
        return parts_.begin()->second.constant_value();
    }

    friend ExpCoeff operator+(const ExpCoeff& a, const ExpCoeff& b) {
        require_same_chart(a.chart_, b.chart_);
        ExpCoeff r = a;
        for (const auto& [k, p] : b.parts_) r.add_part(k, p);
        return r;
    }

    friend ExpCoeff operator-(const ExpCoeff& a, const ExpCoeff& b) {
        require_same_chart(a.chart_, b.chart_);
        ExpCoeff r = a;
        for (const auto& [k, p] : b.parts_) r.add_part(k, -p);
        return r;
    }

    friend ExpCoeff operator-(const ExpCoeff& a) {
        ExpCoeff r(a.chart_);
        for (const auto& [k, p] : a.parts_) r.parts_[k] = -p;
        return r;
    }

    friend ExpCoeff operator*(const ExpCoeff& a, const ExpCoeff& b) {
        require_same_chart(a.chart_, b.chart_);
        ExpCoeff r(a.chart_);
        for (const auto& [ka, pa] : a.parts_)
            for (const auto& [kb, pb] : b.parts_) r.add_part(ka + kb, pa * pb);
        return r;
    }

    friend ExpCoeff operator*(const Rat& c, const ExpCoeff& a) {
        ExpCoeff r(a.chart_);
        if (rat_is_zero(c)) return r;
        for (const auto& [k, p] : a.parts_) r.parts_[k] = c * p;
        return r;
    }

    friend bool operator==(const ExpCoeff& a, const ExpCoeff& b) {
        return same_chart(a.chart_, b.chart_) && a.parts_ == b.parts_;
    }

    friend bool operator!=(const ExpCoeff& a, const ExpCoeff& b) { return !(a == b); }

    friend bool operator==(const ExpCoeff& a, const Rat& r) {
        return a.is_constant() && a.constant_value() == r;
    }
    friend bool operator==(const Rat& r, const ExpCoeff& a) { return a == r; }
    friend bool operator!=(const ExpCoeff& a, const Rat& r) { return !(a == r); }
    friend bool operator!=(const Rat& r, const ExpCoeff& a) { return !(a == r); }

    /// Partial derivative. For the weight variable (last coordinate) each
    /// layer obeys the product rule: weight k contributes k times itself plus
    /// the ordinary derivative of its polynomial factor.
    ExpCoeff partial(int i) const {
        ExpCoeff r(chart_);
        const int tindex = chart_->dim() - 1;
        for (const auto& [k, p] : parts_) {
            if (i == tindex) {
                Polynomial q = Rat(k) * p + p.partial(i);
                r.add_part(k, q);
            } else {
                r.add_part(k, p.partial(i));
            }
        }
        return r;
    }

    std::string str() const {
        if (parts_.empty()) return "0";
        std::string out;
        bool first = true;
        for (const auto& [k, p] : parts_) {
            if (!first) out += " + ";
            first = false;
            if (k == 0) {
                out += p.str();
            } else {
                out += "expt(" + std::to_string(k) + ")*(" + p.str() + ")";
            }
        }
        return out;
    }

private:
    void add_part(long k, const Polynomial& p) {
        if (p.is_zero()) return;
        auto it = parts_.find(k);
        if (it == parts_.end()) {
            parts_[k] = p;
        } else {
            it->second = it->second + p;
            if (it->second.is_zero()) parts_.erase(it);
        }
    }

    ChartPtr chart_;
    std::map<long, Polynomial> parts_;
};

/// True when the coefficient equals the rational constant r.
template <class K>
inline bool coeff_is_const(const K& k, const Rat& r) {
    return k.is_constant() && k.constant_value() == r;
}

/// Embeds a polynomial on a base chart into the exponential flavor on the
/// lifted chart (weight zero, weight variable unused).
inline ExpCoeff lift_coeff(const Polynomial& p, const ChartPtr& lifted) {
    if (!lifted->lifted) throw StructuralError("target chart is not lifted");
    if (lifted->dim() != p.chart()->dim() + 1)
        throw StructuralError("lifted chart dimension mismatch");
    Polynomial q(lifted);
    for (const auto& [e, c] : p.terms()) {
        Exps ext = e;
        ext.push_back(0);
        q = q + Polynomial::monomial(lifted, ext, c);
    }
    return ExpCoeff::from_poly(q);
}

}  // namespace jkit
