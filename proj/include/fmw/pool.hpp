#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "fmw/formula.hpp"
#include "fmw/signature.hpp"

namespace fmw {

// Candidate-formula pool: quantifier-free formulas over a fixed tuple of
// free variables, plus single-exists formulas (one Exists wrapping a
// quantifier-free body over the extra bound variable). Enumeration is by
// AST size, then canonical digest, truncated at count_cap. Conjunctions in
// the pool have at most conj_arity children; gen_cap bounds the raw
// candidates materialized per size level before sorting. Reports quote
// these parameters, so the pool in use is always documented.
struct PoolSpec {
    int size_bound = 8;
    size_t count_cap = 2000;
    size_t gen_cap = 20000;
    int conj_arity = 3;
    bool allow_exists = true;
};

namespace detail {

inline void sort_by_digest(std::vector<FormulaRef>& fs) {
    std::vector<std::pair<std::string, FormulaRef>> keyed;
    keyed.reserve(fs.size());
    for (FormulaRef f : fs) keyed.emplace_back(canonical_digest(f), f);
    std::sort(keyed.begin(), keyed.end());
    keyed.erase(std::unique(keyed.begin(), keyed.end()), keyed.end());
    fs.clear();
    for (auto& [d, f] : keyed) fs.push_back(f);
}

inline std::vector<FormulaRef> atoms_over(const Signature& sig, const std::vector<int>& vars,
                                          size_t gen_cap) {
    std::vector<FormulaRef> out;
    for (size_t s = 0; s < sig.size() && out.size() < gen_cap; ++s) {
        int r = sig.arity(static_cast<int>(s));
        if (r > 0 && vars.empty()) continue;
        size_t total = 1;
        for (int i = 0; i < r; ++i) total *= vars.size();
        for (size_t cell = 0; cell < total && out.size() < gen_cap; ++cell) {
            std::vector<int> args(static_cast<size_t>(r));
            size_t rem = cell;
            for (int i = r - 1; i >= 0; --i) {
                args[static_cast<size_t>(i)] = vars[rem % vars.size()];
                rem /= vars.size();
            }
            out.push_back(mk_atom(sig.name(static_cast<int>(s)), args));
        }
    }
    for (size_t i = 0; i < vars.size() && out.size() < gen_cap; ++i)
        for (size_t j = i + 1; j < vars.size() && out.size() < gen_cap; ++j)
            out.push_back(mk_equal(vars[i], vars[j]));
    return out;
}

} // namespace detail

// Deterministic candidate pool over the given free-variable tuple.
inline std::vector<FormulaRef> enumerate_pool(const Signature& sig, const std::vector<int>& vars,
                                              const PoolSpec& spec = {}) {
    int qvar = 0;
    while (std::find(vars.begin(), vars.end(), qvar) != vars.end()) ++qvar;
    std::vector<int> with_q = vars;
    with_q.push_back(qvar);
    std::sort(with_q.begin(), with_q.end());

    // by_size[s]: quantifier-free formulas over vars of AST size s;
    // body_by_size[s]: quantifier-free formulas over vars + qvar
    std::vector<std::vector<FormulaRef>> by_size(static_cast<size_t>(spec.size_bound) + 1);
    std::vector<std::vector<FormulaRef>> body_by_size(static_cast<size_t>(spec.size_bound) + 1);
    if (spec.size_bound >= 1) {
        by_size[1] = detail::atoms_over(sig, vars, spec.gen_cap);
        by_size[1].push_back(mk_true()); // the empty conjunction
        detail::sort_by_digest(by_size[1]);
        if (spec.allow_exists) {
            body_by_size[1] = detail::atoms_over(sig, with_q, spec.gen_cap);
            detail::sort_by_digest(body_by_size[1]);
        }
    }

    auto build_level = [&](std::vector<std::vector<FormulaRef>>& strata, int s) {
        std::vector<FormulaRef> fresh;
        for (FormulaRef f : strata[static_cast<size_t>(s) - 1]) {
            if (fresh.size() >= spec.gen_cap) break;
            fresh.push_back(mk_neg(f));
        }
        // conjunctions of 2 or 3 children with total child size s-1
        for (int a = 1; a <= s - 2; ++a) {
            int b = s - 1 - a;
            if (b < a) break;
            for (FormulaRef fa : strata[static_cast<size_t>(a)]) {
                if (fresh.size() >= spec.gen_cap) break;
                for (FormulaRef fb : strata[static_cast<size_t>(b)]) {
                    if (fresh.size() >= spec.gen_cap) break;
                    if (a == b && fb <= fa) continue;
                    fresh.push_back(mk_conj({fa, fb}));
                }
            }
        }
        if (spec.conj_arity >= 3) {
            for (int a = 1; a <= s - 3; ++a)
                for (int b = a; a + b <= s - 1 - 1; ++b) {
                    int cz = s - 1 - a - b;
                    if (cz < b) break;
                    for (FormulaRef fa : strata[static_cast<size_t>(a)]) {
                        if (fresh.size() >= spec.gen_cap) break;
                        for (FormulaRef fb : strata[static_cast<size_t>(b)]) {
                            if (fresh.size() >= spec.gen_cap) break;
                            if (a == b && fb < fa) continue;
                            for (FormulaRef fc : strata[static_cast<size_t>(cz)]) {
                                if (fresh.size() >= spec.gen_cap) break;
                                if (b == cz && fc < fb) continue;
                                FormulaRef conj = mk_conj({fa, fb, fc});
                                if (arena().node(conj).kids.size() == 3) fresh.push_back(conj);
                            }
                        }
                    }
                }
        }
        detail::sort_by_digest(fresh);
        strata[static_cast<size_t>(s)] = std::move(fresh);
    };

    for (int s = 2; s <= spec.size_bound; ++s) {
        build_level(by_size, s);
        if (spec.allow_exists) build_level(body_by_size, s);
    }

    // stitch: per size, quantifier-free candidates then single-exists ones,
    // each digest-sorted; overall order is size then digest within family
    std::vector<FormulaRef> pool;
    for (int s = 1; s <= spec.size_bound && pool.size() < spec.count_cap; ++s) {
        std::vector<FormulaRef> level = by_size[static_cast<size_t>(s)];
        if (spec.allow_exists && s >= 2)
            for (FormulaRef body : body_by_size[static_cast<size_t>(s) - 1])
                level.push_back(mk_exists(qvar, body));
        detail::sort_by_digest(level);
        for (FormulaRef f : level) {
            if (pool.size() >= spec.count_cap) break;
            pool.push_back(f);
        }
    }
    return pool;
}

} // namespace fmw
