#pragma once

#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include "jkit/chart.hpp"
#include "jkit/coeff.hpp"
#include "jkit/errors.hpp"
#include "jkit/rational.hpp"

namespace jkit {

enum class Kind { MV, FORM };

/// Slot-index key: strictly increasing, length = tensor degree.
using Key = std::vector<int>;

/// Antisymmetric coordinate tensor over a chart with coefficient flavor K
/// (Polynomial on plain charts, ExpCoeff on lifted charts). Kind tags
/// multivector vs form. When ext is set the tensor has one extra odd slot
/// beyond the chart coordinates, stored at index dim(); that slot carries the
/// scalar direction of the extended bundle and has no coordinate derivative.
/// Canonical form: no zero coefficients, keys strictly increasing.
template <class K>
class Tensor {
public:
    Tensor() = default;

    Tensor(ChartPtr chart, Kind kind, bool ext, int degree)
        : chart_(std::move(chart)), kind_(kind), ext_(ext), degree_(degree) {
        if (degree_ < 0) throw DegreeError("negative tensor degree");
    }

    static Tensor zero(const ChartPtr& c, Kind k, bool ext, int degree) {
        return Tensor(c, k, ext, degree);
    }

    static Tensor scalar(const ChartPtr& c, Kind k, bool ext, const K& v) {
        Tensor t(c, k, ext, 0);
        if (!v.is_zero()) t.terms_[Key{}] = v;
        return t;
    }

    /// Degree-1 basis element on slot i (coordinate slots 0..dim-1; the
    /// extra slot dim() is allowed only when ext is set).
    static Tensor basis(const ChartPtr& c, Kind k, bool ext, int i) {
        Tensor t(c, k, ext, 1);
        t.check_slot(i);
        t.terms_[Key{i}] = K::one(c);
        return t;
    }

    const ChartPtr& chart() const { return chart_; }
    Kind kind() const { return kind_; }
    bool ext() const { return ext_; }
    int degree() const { return degree_; }
    const std::map<Key, K>& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }

    int n_slots() const { return chart_->dim() + (ext_ ? 1 : 0); }
    int ext_slot() const { return chart_->dim(); }

    /// Coefficient on a key (zero when absent).
    K coefficient(const Key& key) const {
        auto it = terms_.find(key);
        return it == terms_.end() ? K::zero(chart_) : it->second;
    }

    /// Adds c on key (key must be strictly increasing, in range, of the
    /// tensor's degree); merges with any existing term.
    void add_term(const Key& key, const K& c) {
        if (static_cast<int>(key.size()) != degree_)
            throw DegreeError("key length does not match tensor degree");
        for (std::size_t i = 0; i < key.size(); ++i) {
            check_slot(key[i]);
            if (i > 0 && key[i - 1] >= key[i])
                throw StructuralError("tensor key is not strictly increasing");
        }
        if (c.is_zero()) return;
        auto it = terms_.find(key);
        if (it == terms_.end()) {
            terms_[key] = c;
        } else {
            it->second = it->second + c;
            if (it->second.is_zero()) terms_.erase(it);
        }
        guard_terms(terms_.size());
    }

    /// Adds c on an arbitrary (possibly unordered) index tuple, with the
    /// antisymmetry sign; repeated indices contribute nothing.
    void add_term_signed(Key key, K c) {
        int sign = sort_with_sign(key);
        if (sign == 0) return;
        if (sign < 0) c = Rat(-1) * c;
        add_term(key, c);
    }

    K scalar_value() const {
        if (degree_ != 0) throw DegreeError("tensor is not degree 0");
        if (terms_.empty()) return K::zero(chart_);
        return terms_.begin()->second;
    }

    friend Tensor operator+(const Tensor& a, const Tensor& b) {
        a.require_compatible(b, true);
        Tensor r = a;
        for (const auto& [k, c] : b.terms_) r.add_term(k, c);
        return r;
    }

    friend Tensor operator-(const Tensor& a, const Tensor& b) { return a + (-b); }

    friend Tensor operator-(const Tensor& a) {
        Tensor r(a.chart_, a.kind_, a.ext_, a.degree_);
        for (const auto& [k, c] : a.terms_) r.terms_[k] = -c;
        return r;
    }

    friend Tensor operator*(const K& s, const Tensor& a) {
        Tensor r(a.chart_, a.kind_, a.ext_, a.degree_);
        if (s.is_zero()) return r;
        for (const auto& [k, c] : a.terms_) {
            K v = s * c;
            if (!v.is_zero()) r.terms_[k] = v;
        }
        return r;
    }

    friend Tensor operator*(const Rat& s, const Tensor& a) {
        Tensor r(a.chart_, a.kind_, a.ext_, a.degree_);
        if (rat_is_zero(s)) return r;
        for (const auto& [k, c] : a.terms_) r.terms_[k] = s * c;
        return r;
    }

    friend bool operator==(const Tensor& a, const Tensor& b) {
        if (!same_chart(a.chart_, b.chart_)) return false;
        if (a.ext_ != b.ext_ || a.degree_ != b.degree_) return false;
        if (a.kind_ != b.kind_ && a.degree_ != 0) return false;
        return a.terms_ == b.terms_;
    }

    friend bool operator!=(const Tensor& a, const Tensor& b) { return !(a == b); }

    /// Coefficient-wise partial derivative along coordinate i.
    Tensor coeff_partial(int i) const {
        if (i < 0 || i >= chart_->dim())
            throw StructuralError("coefficient derivative index out of range");
        Tensor r(chart_, kind_, ext_, degree_);
        for (const auto& [k, c] : terms_) {
            K d = c.partial(i);
            if (!d.is_zero()) r.add_term(k, d);
        }
        return r;
    }

    /// Left odd derivative on slot i: a key containing i at position s maps
    /// to the key without i, with sign (-1)^s.
    Tensor theta_lderiv(int i) const {
        check_slot(i);
        if (degree_ == 0) return Tensor(chart_, kind_, ext_, 0);
        Tensor r(chart_, kind_, ext_, degree_ - 1);
        for (const auto& [k, c] : terms_) {
            auto it = std::find(k.begin(), k.end(), i);
            if (it == k.end()) continue;
            int s = static_cast<int>(it - k.begin());
            Key nk;
            nk.reserve(k.size() - 1);
            for (int v : k)
                if (v != i) nk.push_back(v);
            r.add_term(nk, (s % 2 == 0) ? c : -c);
        }
        return r;
    }

    /// Right odd derivative on slot i: sign (-1)^(len-1-s).
    Tensor theta_rderiv(int i) const {
        check_slot(i);
        if (degree_ == 0) return Tensor(chart_, kind_, ext_, 0);
        Tensor r(chart_, kind_, ext_, degree_ - 1);
        for (const auto& [k, c] : terms_) {
            auto it = std::find(k.begin(), k.end(), i);
            if (it == k.end()) continue;
            int s = static_cast<int>(it - k.begin());
            int e = static_cast<int>(k.size()) - 1 - s;
            Key nk;
            nk.reserve(k.size() - 1);
            for (int v : k)
                if (v != i) nk.push_back(v);
            r.add_term(nk, (e % 2 == 0) ? c : -c);
        }
        return r;
    }

    std::string str() const;

private:
    void check_slot(int i) const {
        if (i < 0 || i >= n_slots()) throw StructuralError("tensor slot index out of range");
    }

    void require_compatible(const Tensor& b, bool same_degree) const {
        require_same_chart(chart_, b.chart_);
        if (ext_ != b.ext_) throw StructuralError("extended/plain tensor mix");
        if (kind_ != b.kind_ && degree_ != 0 && b.degree_ != 0)
            throw StructuralError("multivector/form kind mismatch");
        if (same_degree && degree_ != b.degree_)
            throw DegreeError("tensor degree mismatch");
    }

    /// Sorts key in place; returns the permutation sign, or 0 on repeats.
    static int sort_with_sign(Key& key) {
        int sign = 1;
        for (std::size_t i = 1; i < key.size(); ++i) {
            std::size_t j = i;
            while (j > 0 && key[j - 1] > key[j]) {
                std::swap(key[j - 1], key[j]);
                sign = -sign;
                --j;
            }
            if (j > 0 && key[j - 1] == key[j]) return 0;
        }
        return sign;
    }

    template <class K2>
    friend Tensor<K2> wedge(const Tensor<K2>&, const Tensor<K2>&);

    ChartPtr chart_;
    Kind kind_ = Kind::MV;
    bool ext_ = false;
    int degree_ = 0;
    std::map<Key, K> terms_;
};

/// Exterior product. Degree-0 factors act as scalars regardless of kind; for
/// positive degrees the kinds must agree. The result is extended when either
/// factor is.
template <class K>
Tensor<K> wedge(const Tensor<K>& a, const Tensor<K>& b) {
    require_same_chart(a.chart(), b.chart());
    if (a.degree() > 0 && b.degree() > 0) {
        if (a.kind() != b.kind()) throw StructuralError("wedge of mixed kinds");
        if (a.ext() != b.ext()) throw StructuralError("wedge of extended with plain tensor");
    }
    Kind kind = a.degree() > 0 ? a.kind() : b.kind();
    bool ext = a.ext() || b.ext();
    Tensor<K> r(a.chart(), kind, ext, a.degree() + b.degree());
    for (const auto& [ka, ca] : a.terms()) {
        for (const auto& [kb, cb] : b.terms()) {
            int inv = 0;
            bool repeat = false;
            for (int x : ka)
                for (int y : kb) {
                    if (x == y) repeat = true;
                    if (x > y) ++inv;
                }
            if (repeat) continue;
            Key k;
            k.reserve(ka.size() + kb.size());
            std::merge(ka.begin(), ka.end(), kb.begin(), kb.end(), std::back_inserter(k));
            K c = ca * cb;
            r.add_term(k, (inv % 2 == 0) ? c : -c);
        }
    }
    return r;
}

/// Contraction of a degree-1 tensor against a tensor of the dual kind: the
/// coefficient-weighted sum of left odd derivatives over every slot. This is
/// the interior product for both orientations and drives pairing/evaluation.
template <class K>
Tensor<K> contract1(const Tensor<K>& a, const Tensor<K>& t) {
    require_same_chart(a.chart(), t.chart());
    if (a.degree() != 1) throw DegreeError("contraction argument must have degree 1");
    if (a.kind() == t.kind()) throw StructuralError("contraction needs dual kinds");
    if (a.ext() != t.ext()) throw StructuralError("contraction of extended with plain tensor");
    if (t.degree() == 0) throw DegreeError("cannot contract a degree-0 tensor");
    Tensor<K> r(t.chart(), t.kind(), t.ext(), t.degree() - 1);
    for (const auto& [k, c] : a.terms()) {
        Tensor<K> part = c * t.theta_lderiv(k[0]);
        r = r + part;
    }
    return r;
}

/// Interior product of a vector field into a form (or a 1-form into a
/// multivector): first-slot evaluation.
template <class K>
Tensor<K> interior(const Tensor<K>& x, const Tensor<K>& w) {
    return contract1(x, w);
}

/// Full pairing of a form against a multivector of equal degree: basis
/// covectors evaluated on basis vectors in matching increasing slot order
/// give the diagonal sum.
template <class K>
K pairing(const Tensor<K>& f, const Tensor<K>& m) {
    require_same_chart(f.chart(), m.chart());
    if (f.kind() == m.kind() && f.degree() > 0)
        throw StructuralError("pairing needs dual kinds");
    if (f.ext() != m.ext()) throw StructuralError("pairing of extended with plain tensor");
    if (f.degree() != m.degree()) throw DegreeError("pairing degree mismatch");
    K total = K::zero(f.chart());
    for (const auto& [k, c] : f.terms()) {
        auto it = m.terms().find(k);
        if (it != m.terms().end()) total = total + c * it->second;
    }
    return total;
}

/// Evaluation of a degree-k tensor on k degree-1 arguments of the dual kind,
/// first argument in the first slot.
template <class K>
K eval_on(const Tensor<K>& t, const std::vector<Tensor<K>>& args) {
    if (static_cast<int>(args.size()) != t.degree())
        throw StructuralError("evaluation arity mismatch");
    Tensor<K> cur = t;
    for (const auto& a : args) cur = contract1(a, cur);
    return cur.scalar_value();
}

/// de Rham differential: sum over chart coordinates of the basis covector
/// wedged with the coefficient derivative. The extra odd slot of extended
/// tensors has no coordinate and is skipped.
template <class K>
Tensor<K> de_rham(const Tensor<K>& w) {
    if (w.kind() != Kind::FORM && w.degree() > 0)
        throw StructuralError("de Rham differential applies to forms");
    Tensor<K> r(w.chart(), Kind::FORM, w.ext(), w.degree() + 1);
    for (int i = 0; i < w.chart()->dim(); ++i) {
        Tensor<K> di = w.coeff_partial(i);
        if (di.is_zero()) continue;
        r = r + wedge(Tensor<K>::basis(w.chart(), Kind::FORM, w.ext(), i), di);
    }
    return r;
}

/// Schouten bracket of multivectors via the odd-variable engine: right odd
/// derivative against coefficient derivative, summed over chart coordinates
/// only (the extended slot has no coordinate).
///
/// [P,Q] = sum_i rd_i(P) ^ dc_i(Q) - (-1)^((p-1)(q-1)) sum_i rd_i(Q) ^ dc_i(P)
template <class K>
Tensor<K> sn_bracket(const Tensor<K>& p, const Tensor<K>& q) {
    require_same_chart(p.chart(), q.chart());
    if ((p.kind() != Kind::MV && p.degree() > 0) || (q.kind() != Kind::MV && q.degree() > 0))
        throw StructuralError("Schouten bracket applies to multivectors");
    if (p.ext() != q.ext()) throw StructuralError("Schouten bracket of extended with plain");
    int pd = p.degree(), qd = q.degree();
    int out = pd + qd - 1;
    if (out < 0) return Tensor<K>(p.chart(), Kind::MV, p.ext(), 0);
    Tensor<K> r(p.chart(), Kind::MV, p.ext(), out);
    for (int i = 0; i < p.chart()->dim(); ++i) {
        if (pd > 0) {
            Tensor<K> lhs = p.theta_rderiv(i);
            Tensor<K> rhs = q.coeff_partial(i);
            if (!lhs.is_zero() && !rhs.is_zero()) r = r + wedge(lhs, rhs);
        }
        if (qd > 0) {
            Tensor<K> lhs = q.theta_rderiv(i);
            Tensor<K> rhs = p.coeff_partial(i);
            if (!lhs.is_zero() && !rhs.is_zero()) {
                Tensor<K> term = wedge(lhs, rhs);
                if (((pd - 1) * (qd - 1)) % 2 == 0) term = -term;
                r = r + term;
            }
        }
    }
    return r;
}

/// Lie derivative of a form along a vector field, by Cartan's formula.
template <class K>
Tensor<K> lie_form(const Tensor<K>& x, const Tensor<K>& w) {
    if (x.degree() != 1) throw DegreeError("Lie derivative needs a degree-1 field");
    Tensor<K> dw = de_rham(w);
    Tensor<K> a = contract1(x, dw);
    if (w.degree() == 0) return a;
    return a + de_rham(contract1(x, w));
}

template <class K>
std::string Tensor<K>::str() const {
    if (terms_.empty()) return "0";
    const char* base = (kind_ == Kind::MV) ? "d" : "dx";
    std::string out;
    bool first = true;
    for (const auto& [k, c] : terms_) {
        std::string cs = c.str();
        bool neg = false;
        if (cs.size() > 1 && cs[0] == '-' && cs.find_first_of("+- ", 1) == std::string::npos) {
            neg = true;
            cs = cs.substr(1);
        }
        if (first) {
            if (neg) out += "-";
            first = false;
        } else {
            out += neg ? " - " : " + ";
        }
        std::string basis;
        for (std::size_t i = 0; i < k.size(); ++i) {
            if (i) basis += "^";
            basis += base + std::to_string(k[i]);
        }
        if (k.empty()) {
            out += (cs.find_first_of("+- ") != std::string::npos) ? "(" + cs + ")" : cs;
        } else if (cs == "1") {
            out += basis;
        } else if (cs.find_first_of("+-*/ ^(") != std::string::npos) {
            out += "(" + cs + ")*" + basis;
        } else {
            out += cs + "*" + basis;
        }
    }
    return out;
}

}  // namespace jkit
