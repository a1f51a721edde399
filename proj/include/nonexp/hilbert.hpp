#pragma once

// Real Hilbert-space arithmetic over two representations:
//   dense  - R^d with the Euclidean inner product
//   sparse - finitely supported sequences in l2, stored as sorted (index, value)
// Indices are 0-based internally; config literals use 1-based keys.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <initializer_list>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "nonexp/errors.hpp"

namespace nonexp {

class Vector {
public:
    using Entry = std::pair<std::size_t, double>;

    /// The empty sparse vector (the zero of l2).
    Vector() = default;

    static Vector dense(std::vector<double> values) {
        Vector v;
        v.sparse_ = false;
        v.dense_ = std::move(values);
        return v;
    }

    static Vector dense(std::initializer_list<double> values) {
        return dense(std::vector<double>(values));
    }

    static Vector zeros(std::size_t dim) { return dense(std::vector<double>(dim, 0.0)); }

    static Vector unit(std::size_t dim, std::size_t index) {
        if (index >= dim) throw IncompatibleSpace("unit: index outside dimension");
        auto v = zeros(dim);
        v.dense_[index] = 1.0;
        return v;
    }

    /// Builds a sparse vector. Entries may come in any order; explicit zeros
    /// are dropped and repeated indices are rejected.
    static Vector sparse(std::vector<Entry> entries) {
        std::sort(entries.begin(), entries.end(),
                  [](const Entry& a, const Entry& b) { return a.first < b.first; });
        Vector v;
        v.sparse_ = true;
        v.entries_.reserve(entries.size());
        for (std::size_t k = 0; k < entries.size(); ++k) {
            if (k > 0 && entries[k].first == entries[k - 1].first)
                throw InvalidArgument("sparse: repeated index " + std::to_string(entries[k].first));
            if (entries[k].second != 0.0) v.entries_.push_back(entries[k]);
        }
        return v;
    }

    static Vector sparse(std::initializer_list<Entry> entries) {
        return sparse(std::vector<Entry>(entries));
    }

    static Vector sparse_unit(std::size_t index) { return sparse({{index, 1.0}}); }

    bool is_sparse() const noexcept { return sparse_; }

    /// Dense: the length. Sparse: one past the largest stored index (0 when empty).
    std::size_t dimension() const noexcept {
        if (!sparse_) return dense_.size();
        return entries_.empty() ? 0 : entries_.back().first + 1;
    }

    double operator[](std::size_t i) const {
        if (!sparse_) return i < dense_.size() ? dense_[i] : 0.0;
        auto it = std::lower_bound(entries_.begin(), entries_.end(), i,
                                   [](const Entry& e, std::size_t idx) { return e.first < idx; });
        return (it != entries_.end() && it->first == i) ? it->second : 0.0;
    }

    std::span<const double> values() const {
        if (sparse_) throw IncompatibleSpace("values: vector is sparse");
        return dense_;
    }

    std::span<const Entry> entries() const {
        if (!sparse_) throw IncompatibleSpace("entries: vector is dense");
        return entries_;
    }

    /// Coordinates 0..dim-1, zero padded. Throws if the vector does not fit.
    std::vector<double> to_dense(std::size_t dim) const {
        if (dimension() > dim)
            throw IncompatibleSpace("to_dense: support exceeds dimension " + std::to_string(dim));
        std::vector<double> out(dim, 0.0);
        if (sparse_) {
            for (const auto& [i, x] : entries_) out[i] = x;
        } else {
            std::copy(dense_.begin(), dense_.end(), out.begin());
        }
        return out;
    }

    Vector densified(std::size_t dim) const { return dense(to_dense(dim)); }

    /// Mutable coordinate access for dense vectors.
    double& at(std::size_t i) {
        if (sparse_) throw IncompatibleSpace("at: vector is sparse");
        if (i >= dense_.size()) throw IncompatibleSpace("at: index out of range");
        return dense_[i];
    }

    bool is_finite() const noexcept {
        if (sparse_)
            return std::all_of(entries_.begin(), entries_.end(),
                               [](const Entry& e) { return std::isfinite(e.second); });
        return std::all_of(dense_.begin(), dense_.end(), [](double x) { return std::isfinite(x); });
    }

    /// Exact representation-aware equality.
    friend bool operator==(const Vector& a, const Vector& b) {
        return a.sparse_ == b.sparse_ && a.dense_ == b.dense_ && a.entries_ == b.entries_;
    }

    std::string to_string() const {
        std::string s;
        char buf[40];
        if (sparse_) {
            s = "{";
            for (std::size_t k = 0; k < entries_.size(); ++k) {
                std::snprintf(buf, sizeof buf, "%s%zu:%.17g", k ? ", " : "", entries_[k].first + 1,
                              entries_[k].second);
                s += buf;
            }
            return s + "}";
        }
        s = "[";
        for (std::size_t k = 0; k < dense_.size(); ++k) {
            std::snprintf(buf, sizeof buf, "%s%.17g", k ? ", " : "", dense_[k]);
            s += buf;
        }
        return s + "]";
    }

private:
    bool sparse_ = true;
    std::vector<double> dense_;
    std::vector<Entry> entries_;
};

namespace detail {

inline void require_compatible(const Vector& x, const Vector& y, const char* op) {
    if (!x.is_sparse() && !y.is_sparse()) {
        if (x.dimension() != y.dimension())
            throw IncompatibleSpace(std::string(op) + ": dense dimensions " +
                                    std::to_string(x.dimension()) + " and " +
                                    std::to_string(y.dimension()));
        return;
    }
    if (x.is_sparse() && y.is_sparse()) return;
    const Vector& d = x.is_sparse() ? y : x;
    const Vector& s = x.is_sparse() ? x : y;
    if (s.dimension() > d.dimension())
        throw IncompatibleSpace(std::string(op) + ": sparse support reaches index " +
                                std::to_string(s.dimension()) + " beyond dense dimension " +
                                std::to_string(d.dimension()));
}

inline double checked(double v, const char* op) {
    if (!std::isfinite(v)) throw NonFinite(std::string(op) + ": non-finite result");
    return v;
}

inline Vector checked(Vector v, const char* op) {
    if (!v.is_finite()) throw NonFinite(std::string(op) + ": non-finite coordinate");
    return v;
}

/// a*x + b*y with the representation rules of require_compatible.
inline Vector linear(double a, const Vector& x, double b, const Vector& y, const char* op) {
    require_compatible(x, y, op);
    if (x.is_sparse() && y.is_sparse()) {
        auto ex = x.entries();
        auto ey = y.entries();
        std::vector<Vector::Entry> out;
        out.reserve(ex.size() + ey.size());
        std::size_t i = 0, j = 0;
        while (i < ex.size() || j < ey.size()) {
            if (j == ey.size() || (i < ex.size() && ex[i].first < ey[j].first)) {
                out.emplace_back(ex[i].first, a * ex[i].second);
                ++i;
            } else if (i == ex.size() || ey[j].first < ex[i].first) {
                out.emplace_back(ey[j].first, b * ey[j].second);
                ++j;
            } else {
                out.emplace_back(ex[i].first, a * ex[i].second + b * ey[j].second);
                ++i;
                ++j;
            }
        }
        return checked(Vector::sparse(std::move(out)), op);
    }
    const std::size_t d = x.is_sparse() ? y.dimension() : x.dimension();
    std::vector<double> out(d);
    if (!x.is_sparse() && !y.is_sparse()) {
        auto vx = x.values();
        auto vy = y.values();
        for (std::size_t k = 0; k < d; ++k) out[k] = a * vx[k] + b * vy[k];
    } else {
        const auto vx = x.to_dense(d);
        const auto vy = y.to_dense(d);
        for (std::size_t k = 0; k < d; ++k) out[k] = a * vx[k] + b * vy[k];
    }
    return checked(Vector::dense(std::move(out)), op);
}

} // namespace detail

inline double inner(const Vector& x, const Vector& y) {
    detail::require_compatible(x, y, "inner");
    double s = 0.0;
    if (!x.is_sparse() && !y.is_sparse()) {
        auto vx = x.values();
        auto vy = y.values();
        for (std::size_t k = 0; k < vx.size(); ++k) s += vx[k] * vy[k];
    } else if (x.is_sparse() && y.is_sparse()) {
        auto ex = x.entries();
        auto ey = y.entries();
        std::size_t i = 0, j = 0;
        while (i < ex.size() && j < ey.size()) {
            if (ex[i].first < ey[j].first) {
                ++i;
            } else if (ey[j].first < ex[i].first) {
                ++j;
            } else {
                s += ex[i++].second * ey[j++].second;
            }
        }
    } else {
        const Vector& sp = x.is_sparse() ? x : y;
        const Vector& de = x.is_sparse() ? y : x;
        auto vd = de.values();
        for (const auto& [i, v] : sp.entries()) s += v * vd[i];
    }
    return detail::checked(s, "inner");
}

inline double squared_norm(const Vector& x) {
    double s = 0.0;
    if (x.is_sparse()) {
        for (const auto& e : x.entries()) s += e.second * e.second;
    } else {
        for (double v : x.values()) s += v * v;
    }
    return detail::checked(s, "squared_norm");
}

inline double norm(const Vector& x) { return std::sqrt(squared_norm(x)); }

inline Vector operator+(const Vector& x, const Vector& y) { return detail::linear(1.0, x, 1.0, y, "add"); }
inline Vector operator-(const Vector& x, const Vector& y) { return detail::linear(1.0, x, -1.0, y, "subtract"); }

inline Vector operator*(double a, const Vector& x) {
    if (x.is_sparse()) {
        std::vector<Vector::Entry> out(x.entries().begin(), x.entries().end());
        for (auto& e : out) e.second *= a;
        return detail::checked(Vector::sparse(std::move(out)), "scale");
    }
    std::vector<double> out(x.values().begin(), x.values().end());
    for (double& v : out) v *= a;
    return detail::checked(Vector::dense(std::move(out)), "scale");
}

inline Vector operator-(const Vector& x) { return -1.0 * x; }

/// lambda*x + (1-lambda)*y. lambda is any real; values outside [0,1]
/// extrapolate along the line through x and y.
inline Vector combine(double lambda, const Vector& x, const Vector& y) {
    return detail::linear(lambda, x, 1.0 - lambda, y, "combine");
}

inline double distance(const Vector& x, const Vector& y) { return norm(x - y); }

/// A zero vector in the same space as `like`.
inline Vector zero_like(const Vector& like) {
    return like.is_sparse() ? Vector{} : Vector::zeros(like.dimension());
}

/// Max-abs coordinate difference, used for approximate equality in tests and
/// trace comparisons.
inline double max_abs_diff(const Vector& x, const Vector& y) {
    const Vector d = x - y;
    double m = 0.0;
    if (d.is_sparse()) {
        for (const auto& e : d.entries()) m = std::max(m, std::abs(e.second));
    } else {
        for (double v : d.values()) m = std::max(m, std::abs(v));
    }
    return m;
}

inline std::ostream& operator<<(std::ostream& os, const Vector& v) { return os << v.to_string(); }

} // namespace nonexp
