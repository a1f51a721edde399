#pragma once

// Discrete semigroups acting on a convex set: N^k through k commuting
// generators, and free word semigroups. Elements are enumerated in graded
// order (total degree / word length first).

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "nonexp/convex.hpp"
#include "nonexp/errors.hpp"
#include "nonexp/hilbert.hpp"
#include "nonexp/mappings.hpp"

namespace nonexp {

/// (n_1, ..., n_k) in N^k, standing for T_1^{n_1} ... T_k^{n_k}.
struct MultiIndex {
    std::vector<std::size_t> counts;
    friend bool operator==(const MultiIndex&, const MultiIndex&) = default;
};

/// Generator indices w_1 ... w_m, standing for T_{w_1} o ... o T_{w_m}.
struct Word {
    std::vector<std::size_t> letters;
    friend bool operator==(const Word&, const Word&) = default;
};

using Address = std::variant<MultiIndex, Word>;

/// "n" on N, "(n1,n2,...)" on N^k, "w1.w2..." (1-based generators) for words.
inline std::string to_string(const Address& a) {
    if (const auto* m = std::get_if<MultiIndex>(&a)) {
        if (m->counts.size() == 1) return std::to_string(m->counts[0]);
        std::string s = "(";
        for (std::size_t i = 0; i < m->counts.size(); ++i) s += (i ? "," : "") + std::to_string(m->counts[i]);
        return s + ")";
    }
    const auto& w = std::get<Word>(a);
    std::string s;
    for (std::size_t i = 0; i < w.letters.size(); ++i) s += (i ? "." : "") + std::to_string(w.letters[i] + 1);
    return s;
}

/// The product s*t, so that T_{st} = T_s o T_t.
inline Address compose(const Address& s, const Address& t) {
    if (s.index() != t.index()) throw InvalidAddress("compose: mixed address kinds");
    if (const auto* ms = std::get_if<MultiIndex>(&s)) {
        const auto& mt = std::get<MultiIndex>(t);
        if (ms->counts.size() != mt.counts.size()) throw InvalidAddress("compose: rank mismatch");
        MultiIndex out = *ms;
        for (std::size_t i = 0; i < out.counts.size(); ++i) out.counts[i] += mt.counts[i];
        return out;
    }
    Word out = std::get<Word>(s);
    const auto& wt = std::get<Word>(t).letters;
    out.letters.insert(out.letters.end(), wt.begin(), wt.end());
    return out;
}

inline std::size_t degree(const Address& a) {
    if (const auto* m = std::get_if<MultiIndex>(&a)) return std::accumulate(m->counts.begin(), m->counts.end(), std::size_t{0});
    return std::get<Word>(a).letters.size();
}

/// Elements t with g*t = a for a single generator g (its immediate
/// predecessors in the order generated by left multiplication).
inline std::vector<Address> predecessors(const Address& a) {
    std::vector<Address> out;
    if (degree(a) <= 1) return out;
    if (const auto* m = std::get_if<MultiIndex>(&a)) {
        for (std::size_t j = 0; j < m->counts.size(); ++j) {
            if (m->counts[j] == 0) continue;
            MultiIndex p = *m;
            --p.counts[j];
            out.emplace_back(std::move(p));
        }
        return out;
    }
    const auto& w = std::get<Word>(a).letters;
    out.emplace_back(Word{{w.begin() + 1, w.end()}});
    return out;
}

enum class Structure { commutative, free_words };

/// Sample budget and tolerance used to verify pairwise commutation when a
/// commutative action is built.
struct CommutationCheck {
    std::size_t samples = 16;
    double radius = 10.0;
    double tol = 1e-9;
    std::uint64_t seed = 0xc0ffeeULL;
};

/// ||T_i T_j x - T_j T_i x|| <= tol over sampled x and all pairs i < j.
inline PropertyReport check_commuting(std::span<const Mapping> gens, std::span<const Vector> points, double tol) {
    PropertyReport rep;
    for (std::size_t i = 0; i < gens.size(); ++i)
        for (std::size_t j = i + 1; j < gens.size(); ++j)
            for (const auto& x : points) {
                const Vector ij = gens[i](gens[j](x));
                const Vector ji = gens[j](gens[i](x));
                detail::record(rep, distance(ij, ji), tol, ij, ji,
                               "generators " + std::to_string(i + 1) + " and " + std::to_string(j + 1) + " at " +
                                   x.to_string());
            }
    return rep;
}

inline PropertyReport check_commuting(std::span<const Mapping> gens, std::size_t samples, double radius, double tol,
                                      std::uint64_t seed) {
    if (gens.size() < 2) return {};
    const auto pts = sample(gens.front().domain(), samples, radius, seed);
    return check_commuting(gens, pts, tol);
}

/// Representation of N^k (commuting generators) or of the free semigroup on
/// k letters on the generators' shared domain.
class SemigroupAction {
public:
    static SemigroupAction commutative(std::vector<Mapping> generators, CommutationCheck check = {}) {
        validate(generators);
        auto rep = check_commuting(generators, check.samples, check.radius, check.tol, check.seed);
        if (!rep.holds)
            throw InvalidArgument("commutative action: generators do not commute (" + rep.witness->detail + ")");
        return SemigroupAction(std::move(generators), Structure::commutative);
    }

    static SemigroupAction free_words(std::vector<Mapping> generators) {
        validate(generators);
        return SemigroupAction(std::move(generators), Structure::free_words);
    }

    /// N acting through powers of a single map.
    static SemigroupAction cyclic(Mapping generator) { return commutative({std::move(generator)}); }

    Structure structure() const noexcept { return structure_; }
    std::span<const Mapping> generators() const noexcept { return generators_; }
    std::size_t rank() const noexcept { return generators_.size(); }
    const ConvexSet& domain() const { return generators_.front().domain(); }

    /// Address of the i-th generator.
    Address generator_address(std::size_t i) const {
        if (i >= rank()) throw InvalidAddress("generator index out of range");
        if (structure_ == Structure::commutative) {
            MultiIndex m{std::vector<std::size_t>(rank(), 0)};
            m.counts[i] = 1;
            return m;
        }
        return Word{{i}};
    }

    void validate(const Address& s) const {
        if (structure_ == Structure::commutative) {
            const auto* m = std::get_if<MultiIndex>(&s);
            if (!m) throw InvalidAddress("commutative action expects a multi-index");
            if (m->counts.size() != rank())
                throw InvalidAddress("multi-index has " + std::to_string(m->counts.size()) + " entries, expected " +
                                     std::to_string(rank()));
            if (degree(s) == 0) throw InvalidAddress("multi-index must have positive total degree");
        } else {
            const auto* w = std::get_if<Word>(&s);
            if (!w) throw InvalidAddress("free action expects a word");
            if (w->letters.empty()) throw InvalidAddress("empty word");
            for (auto l : w->letters)
                if (l >= rank()) throw InvalidAddress("word letter " + std::to_string(l + 1) + " out of range");
        }
    }

    /// T_s x by repeated generator application.
    Vector act(const Address& s, const Vector& x) const {
        validate(s);
        Vector cur = x;
        if (const auto* m = std::get_if<MultiIndex>(&s)) {
            for (std::size_t j = rank(); j-- > 0;)
                for (std::size_t n = 0; n < m->counts[j]; ++n) cur = generators_[j](cur);
            return cur;
        }
        const auto& w = std::get<Word>(s).letters;
        for (auto it = w.rbegin(); it != w.rend(); ++it) cur = generators_[*it](cur);
        return cur;
    }

    /// The first `budget` elements in graded order: multi-indices by total
    /// degree, then lexicographically descending ((1,0) before (0,1)); words
    /// by length, then lexicographically.
    std::vector<Address> enumerate(std::size_t budget) const {
        std::vector<Address> out;
        out.reserve(budget);
        const std::size_t k = rank();
        for (std::size_t deg = 1; out.size() < budget; ++deg) {
            if (structure_ == Structure::commutative) {
                std::vector<std::size_t> counts(k, 0);
                emit_compositions(counts, 0, deg, budget, out);
            } else {
                std::vector<std::size_t> letters(deg, 0);
                while (out.size() < budget) {
                    out.emplace_back(Word{letters});
                    std::size_t pos = deg;
                    while (pos > 0 && letters[pos - 1] + 1 == k) letters[--pos] = 0;
                    if (pos == 0) break;
                    ++letters[pos - 1];
                }
            }
        }
        return out;
    }

private:
    SemigroupAction(std::vector<Mapping> gens, Structure s) : generators_(std::move(gens)), structure_(s) {}

    static void validate(const std::vector<Mapping>& gens) {
        if (gens.empty()) throw InvalidArgument("semigroup action: no generators");
    }

    void emit_compositions(std::vector<std::size_t>& counts, std::size_t pos, std::size_t remaining,
                           std::size_t budget, std::vector<Address>& out) const {
        if (out.size() >= budget) return;
        if (pos + 1 == counts.size()) {
            counts[pos] = remaining;
            out.emplace_back(MultiIndex{counts});
            counts[pos] = 0;
            return;
        }
        for (std::size_t v = remaining + 1; v-- > 0;) {
            counts[pos] = v;
            emit_compositions(counts, pos + 1, remaining - v, budget, out);
            if (out.size() >= budget) break;
        }
        counts[pos] = 0;
    }

    std::vector<Mapping> generators_;
    Structure structure_;
};

inline Vector act(const SemigroupAction& a, const Address& s, const Vector& x) { return a.act(s, x); }

enum class Boundedness { yes, no, unknown };

inline const char* to_string(Boundedness b) {
    switch (b) {
    case Boundedness::yes: return "yes";
    case Boundedness::no: return "no";
    default: return "unknown";
    }
}

struct OrbitTrace {
    std::vector<std::pair<Address, Vector>> points;
    double max_norm = 0.0;
    /// `yes` is never produced: boundedness cannot be decided from finitely
    /// many iterates.
    Boundedness verdict = Boundedness::unknown;
};

/// Default norm above which an orbit is declared unbounded.
inline constexpr double kBlowUpThreshold = 1e6;

/// Walks the first `budget` elements in graded order, computing each T_s x
/// from an already visited predecessor.
inline OrbitTrace orbit(const SemigroupAction& a, const Vector& x, std::size_t budget,
                        double blowup_threshold = kBlowUpThreshold) {
    if (budget < 1) throw InvalidArgument("orbit: budget must be >= 1");
    OrbitTrace trace;
    const auto elements = a.enumerate(budget);
    trace.points.reserve(elements.size());
    std::map<std::vector<std::size_t>, std::size_t> seen;
    for (const auto& s : elements) {
        Vector p;
        if (const auto* m = std::get_if<MultiIndex>(&s)) {
            const auto j = static_cast<std::size_t>(
                std::find_if(m->counts.begin(), m->counts.end(), [](std::size_t c) { return c > 0; }) -
                m->counts.begin());
            auto prev = m->counts;
            --prev[j];
            const auto it = seen.find(prev);
            p = a.generators()[j](it == seen.end() ? x : trace.points[it->second].second);
            seen.emplace(m->counts, trace.points.size());
        } else {
            const auto& w = std::get<Word>(s).letters;
            const std::vector<std::size_t> rest(w.begin() + 1, w.end());
            const auto it = seen.find(rest);
            p = a.generators()[w.front()](it == seen.end() ? x : trace.points[it->second].second);
            seen.emplace(w, trace.points.size());
        }
        trace.max_norm = std::max(trace.max_norm, norm(p));
        trace.points.emplace_back(s, std::move(p));
    }
    trace.verdict = trace.max_norm > blowup_threshold ? Boundedness::no : Boundedness::unknown;
    return trace;
}

} // namespace nonexp
