#pragma once

#include <algorithm>
#include <numeric>
#include <optional>
#include <vector>

#include "fmw/structure.hpp"

namespace fmw {

// Injective partial map between universes; carrier for back-and-forth systems.
class PartialMap {
public:
    PartialMap(int dom_size, int cod_size)
        : fwd_(static_cast<size_t>(dom_size), -1), bwd_(static_cast<size_t>(cod_size), -1) {}

    bool defined(int a) const { return fwd_[static_cast<size_t>(a)] >= 0; }
    bool hit(int b) const { return bwd_[static_cast<size_t>(b)] >= 0; }
    int image(int a) const { return fwd_[static_cast<size_t>(a)]; }
    int preimage(int b) const { return bwd_[static_cast<size_t>(b)]; }

    // false if the pair would break injectivity or conflict
    bool extend(int a, int b) {
        if (a < 0 || b < 0 || static_cast<size_t>(a) >= fwd_.size() ||
            static_cast<size_t>(b) >= bwd_.size())
            return false;
        if (defined(a)) return image(a) == b;
        if (hit(b)) return false;
        fwd_[static_cast<size_t>(a)] = b;
        bwd_[static_cast<size_t>(b)] = a;
        return true;
    }

    void remove(int a) {
        if (!defined(a)) return;
        bwd_[static_cast<size_t>(image(a))] = -1;
        fwd_[static_cast<size_t>(a)] = -1;
    }

    size_t domain_size() const {
        size_t c = 0;
        for (int v : fwd_)
            if (v >= 0) ++c;
        return c;
    }

    std::vector<int> domain() const {
        std::vector<int> out;
        for (size_t a = 0; a < fwd_.size(); ++a)
            if (fwd_[a] >= 0) out.push_back(static_cast<int>(a));
        return out;
    }

private:
    std::vector<int> fwd_, bwd_;
};

inline bool is_isomorphism(const FiniteStructure& m, const FiniteStructure& n,
                           const std::vector<int>& f) {
    const Signature& sig = m.signature();
    for (size_t s = 0; s < sig.size(); ++s) {
        int r = sig.arity(static_cast<int>(s));
        std::vector<int> tuple(static_cast<size_t>(r), 0);
        size_t total = m.cells(r);
        std::vector<int> mapped(static_cast<size_t>(r));
        for (size_t cell = 0; cell < total; ++cell) {
            size_t rem = cell;
            for (int i = r - 1; i >= 0; --i) {
                tuple[static_cast<size_t>(i)] = static_cast<int>(rem % static_cast<size_t>(m.size()));
                rem /= static_cast<size_t>(m.size());
            }
            for (int i = 0; i < r; ++i) mapped[static_cast<size_t>(i)] = f[static_cast<size_t>(tuple[static_cast<size_t>(i)])];
            if (m.holds(static_cast<int>(s), tuple) != n.holds(static_cast<int>(s), mapped))
                return false;
        }
    }
    return true;
}

// Exhaustive isomorphism oracle. Returns the first witnessing bijection in
// lexicographic permutation order, or nothing.
inline std::optional<std::vector<int>> isomorphic_bruteforce(const FiniteStructure& m,
                                                             const FiniteStructure& n) {
    if (m.signature() != n.signature()) throw StructureError("signature mismatch");
    if (m.size() != n.size()) return std::nullopt;
    std::vector<int> perm(static_cast<size_t>(m.size()));
    std::iota(perm.begin(), perm.end(), 0);
    do {
        if (is_isomorphism(m, n, perm)) return perm;
    } while (std::next_permutation(perm.begin(), perm.end()));
    return std::nullopt;
}

inline std::vector<std::vector<int>> automorphisms(const FiniteStructure& m) {
    std::vector<std::vector<int>> out;
    std::vector<int> perm(static_cast<size_t>(m.size()));
    std::iota(perm.begin(), perm.end(), 0);
    do {
        if (is_isomorphism(m, m, perm)) out.push_back(perm);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return out;
}

inline std::vector<std::vector<int>> all_tuples(int n, int len) {
    std::vector<std::vector<int>> out;
    std::vector<int> t(static_cast<size_t>(len), 0);
    size_t total = 1;
    for (int i = 0; i < len; ++i) total *= static_cast<size_t>(n);
    out.reserve(total);
    for (size_t cell = 0; cell < total; ++cell) {
        size_t rem = cell;
        for (int i = len - 1; i >= 0; --i) {
            t[static_cast<size_t>(i)] = static_cast<int>(rem % static_cast<size_t>(n));
            rem /= static_cast<size_t>(n);
        }
        out.push_back(t);
    }
    return out;
}

// Orbits of Aut(M) acting coordinatewise on M^len; classes ordered by least
// member tuple.
inline std::vector<std::vector<std::vector<int>>> automorphism_orbits(const FiniteStructure& m,
                                                                      int tuple_len) {
    auto autos = automorphisms(m);
    auto tuples = all_tuples(m.size(), tuple_len);
    std::vector<char> seen(tuples.size(), 0);
    std::vector<std::vector<std::vector<int>>> orbits;
    for (size_t i = 0; i < tuples.size(); ++i) {
        if (seen[i]) continue;
        std::set<std::vector<int>> orbit;
        for (const auto& g : autos) {
            std::vector<int> img(tuples[i].size());
            for (size_t j = 0; j < tuples[i].size(); ++j)
                img[j] = g[static_cast<size_t>(tuples[i][j])];
            orbit.insert(img);
        }
        std::vector<std::vector<int>> cls(orbit.begin(), orbit.end());
        for (const auto& t : cls) {
            size_t idx = 0;
            for (int e : t) idx = idx * static_cast<size_t>(m.size()) + static_cast<size_t>(e);
            if (tuple_len > 0) seen[idx] = 1;
        }
        if (tuple_len == 0) seen[0] = 1;
        orbits.push_back(std::move(cls));
    }
    // tuples are generated in lexicographic order, so orbits are already
    // ordered by least member
    return orbits;
}

// Lexicographically least relabeled table vector; equal canonical forms iff
// isomorphic. Used to prune the exhaustive pair check.
inline std::vector<std::vector<std::vector<int>>> canonical_form(const FiniteStructure& m) {
    std::vector<int> perm(static_cast<size_t>(m.size()));
    std::iota(perm.begin(), perm.end(), 0);
    std::optional<std::vector<std::vector<std::vector<int>>>> best;
    do {
        FiniteStructure r = m.relabeled(perm);
        std::vector<std::vector<std::vector<int>>> tabs;
        tabs.reserve(m.signature().size());
        for (size_t s = 0; s < m.signature().size(); ++s) tabs.push_back(r.table(static_cast<int>(s)));
        if (!best || tabs < *best) best = std::move(tabs);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return *best;
}

} // namespace fmw
