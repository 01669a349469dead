#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "fmw/bruteforce.hpp"
#include "fmw/isolation.hpp"
#include "fmw/pool.hpp"
#include "fmw/theory.hpp"

namespace fmw {

struct AtomicityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Verdict { Isolated, NotIsolated, UnknownAtBound };

inline const char* verdict_name(Verdict v) {
    switch (v) {
    case Verdict::Isolated: return "isolated";
    case Verdict::NotIsolated: return "not-isolated";
    default: return "unknown-at-bound";
    }
}

struct TupleVerdict {
    std::vector<int> tuple;
    Verdict verdict = Verdict::UnknownAtBound;
    std::optional<FormulaRef> witness; // least isolating pool formula
};

struct AtomicityReport {
    std::vector<TupleVerdict> verdicts;
    PoolSpec pool;
    int tuple_len = 0;
    bool surrogate_note = false; // set by the acl pipeline

    bool all_isolated() const {
        for (const TupleVerdict& v : verdicts)
            if (v.verdict != Verdict::Isolated) return false;
        return true;
    }
};

// the pool-restricted type of a tuple: every pool formula it satisfies
inline std::vector<FormulaRef> pool_type(const FiniteStructure& m, const std::vector<int>& tuple,
                                         const std::vector<FormulaRef>& pool) {
    Assignment asg;
    for (size_t i = 0; i < tuple.size(); ++i) asg.bind(static_cast<int>(i), tuple[i]);
    std::vector<FormulaRef> out;
    for (FormulaRef f : pool)
        if (evaluate(m, f, asg)) out.push_back(f);
    return out;
}

inline std::vector<int> prefix_vars(int k) {
    std::vector<int> vars(static_cast<size_t>(k));
    for (int i = 0; i < k; ++i) vars[static_cast<size_t>(i)] = i;
    return vars;
}

// Least pool formula isolating the pool-type of the tuple, if any.
inline std::optional<FormulaRef> find_isolator(const FiniteStructure& m,
                                               const std::vector<int>& tuple,
                                               const TheoryHandle& t,
                                               const std::vector<FormulaRef>& pool) {
    std::vector<int> vars = prefix_vars(static_cast<int>(tuple.size()));
    std::vector<FormulaRef> type = pool_type(m, tuple, pool);
    for (FormulaRef theta : pool)
        if (isolates(theta, type, vars, t)) return theta;
    return std::nullopt;
}

// Per-tuple isolation verdicts for tuples drawn from `support` (all of M by
// default), lengths 0..tuple_len. "Complete type" means: decides every
// formula of the declared pool; the report carries the pool bound.
inline AtomicityReport is_atomic(const FiniteStructure& m, const TheoryHandle& t,
                                 const PoolSpec& spec = {}, int tuple_len = 3,
                                 std::optional<std::vector<int>> support = std::nullopt) {
    if (!t.is_complete()) {
        for (FormulaRef ax : t.axioms())
            if (!evaluate_sentence(m, ax)) throw AtomicityError("structure fails the theory axioms");
    }
    std::vector<int> base;
    if (support)
        base = *support;
    else
        for (int e = 0; e < m.size(); ++e) base.push_back(e);
    AtomicityReport report;
    report.pool = spec;
    report.tuple_len = tuple_len;
    for (int k = 0; k <= tuple_len; ++k) {
        std::vector<FormulaRef> pool = enumerate_pool(m.signature(), prefix_vars(k), spec);
        // tuples over the support set, lex order
        size_t total = 1;
        for (int i = 0; i < k; ++i) total *= base.size();
        for (size_t cell = 0; cell < total; ++cell) {
            std::vector<int> tuple(static_cast<size_t>(k));
            size_t rem = cell;
            for (int i = k - 1; i >= 0; --i) {
                tuple[static_cast<size_t>(i)] = base[rem % base.size()];
                rem /= base.size();
            }
            TupleVerdict tv;
            tv.tuple = tuple;
            auto theta = find_isolator(m, tuple, t, pool);
            if (theta) {
                tv.verdict = Verdict::Isolated;
                tv.witness = *theta;
            } else {
                tv.verdict = t.is_complete() ? Verdict::NotIsolated : Verdict::UnknownAtBound;
            }
            report.verdicts.push_back(std::move(tv));
        }
    }
    return report;
}

struct DensityEntry {
    FormulaRef phi;
    Verdict verdict = Verdict::UnknownAtBound; // Isolated = a complete-type isolator lies below phi
    std::optional<FormulaRef> witness;
};

struct DensityReport {
    bool theory_consistent = true;
    std::vector<DensityEntry> entries;
    PoolSpec pool;
    std::vector<int> vars;
};

// Density of isolated types at the pool bound: for every consistent pool
// formula phi, search the pool for a consistent theta with T |- theta -> phi
// that decides every pool formula.
inline DensityReport isolated_types_dense(const TheoryHandle& t, const std::vector<int>& vars,
                                          const PoolSpec& spec = {}) {
    DensityReport report;
    report.pool = spec;
    report.vars = vars;
    if (!t.is_complete() && !t.consistent()) {
        report.theory_consistent = false;
        return report;
    }
    std::vector<FormulaRef> pool = enumerate_pool(t.signature(), vars, spec);

    auto closed_exists = [&vars](FormulaRef f) {
        FormulaRef out = f;
        for (auto it = vars.rbegin(); it != vars.rend(); ++it) out = mk_exists(*it, out);
        return out;
    };
    auto closed_all = [&vars](FormulaRef f) {
        FormulaRef out = f;
        for (auto it = vars.rbegin(); it != vars.rend(); ++it) out = mk_forall(*it, out);
        return out;
    };

    std::vector<char> consistent(pool.size());
    for (size_t i = 0; i < pool.size(); ++i)
        consistent[i] = t.consistent_with({closed_exists(pool[i])}) ? 1 : 0;

    // decider candidates: consistent formulas deciding every pool formula
    std::vector<char> decider(pool.size(), 0);
    for (size_t i = 0; i < pool.size(); ++i) {
        if (!consistent[i]) continue;
        bool decides_all = true;
        for (size_t j = 0; j < pool.size() && decides_all; ++j) {
            bool pos = t.entails(closed_all(mk_implies(pool[i], pool[j])));
            if (pos) continue;
            if (!t.entails(closed_all(mk_implies(pool[i], mk_neg(pool[j]))))) decides_all = false;
        }
        decider[i] = decides_all ? 1 : 0;
    }

    for (size_t i = 0; i < pool.size(); ++i) {
        if (!consistent[i]) continue;
        DensityEntry entry;
        entry.phi = pool[i];
        for (size_t j = 0; j < pool.size(); ++j) {
            if (!decider[j]) continue;
            if (t.entails(closed_all(mk_implies(pool[j], pool[i])))) {
                entry.verdict = Verdict::Isolated;
                entry.witness = pool[j];
                break;
            }
        }
        if (!entry.witness)
            entry.verdict = t.is_complete() ? Verdict::NotIsolated : Verdict::UnknownAtBound;
        report.entries.push_back(entry);
    }
    return report;
}

namespace atomicity_detail {

// theta_psi chooser: least consistent pool formula that implies psi and
// decides every pool formula; deterministic by pool order.
inline std::optional<FormulaRef> choose_theta(FormulaRef psi, const std::vector<int>& vars,
                                              const TheoryHandle& t,
                                              const std::vector<FormulaRef>& pool) {
    auto closed_exists = [&vars](FormulaRef f) {
        FormulaRef out = f;
        for (auto it = vars.rbegin(); it != vars.rend(); ++it) out = mk_exists(*it, out);
        return out;
    };
    auto closed_all = [&vars](FormulaRef f) {
        FormulaRef out = f;
        for (auto it = vars.rbegin(); it != vars.rend(); ++it) out = mk_forall(*it, out);
        return out;
    };
    for (FormulaRef theta : pool) {
        if (!t.consistent_with({closed_exists(mk_conj({theta, psi}))})) continue;
        if (!t.entails(closed_all(mk_implies(theta, psi)))) continue;
        bool decides_all = true;
        for (FormulaRef other : pool) {
            if (t.entails(closed_all(mk_implies(theta, other)))) continue;
            if (!t.entails(closed_all(mk_implies(theta, mk_neg(other))))) {
                decides_all = false;
                break;
            }
        }
        if (decides_all) return theta;
    }
    return std::nullopt;
}

} // namespace atomicity_detail

// One Tarski-Vaught extension step, the finite truncation of the formula
// chain from the greedy atomic-set construction. Variable convention: x0 is
// the new element, x1..xi name the enumerated elements of A (the tuple
// b-bar first). Returns c with M |= phi(c, b-bar) and A + {c} atomic.
inline int extend_atomic(const std::vector<int>& atomic_set, const std::vector<int>& b_tuple,
                         FormulaRef phi, const FiniteStructure& m, const TheoryHandle& t,
                         const PoolSpec& spec = {}) {
    // enumerate A with b-bar first
    std::vector<int> enumeration = b_tuple;
    for (int a : atomic_set)
        if (std::find(enumeration.begin(), enumeration.end(), a) == enumeration.end())
            enumeration.push_back(a);
    size_t n0 = b_tuple.size();

    uint64_t allowed = 1; // x0
    for (size_t i = 0; i < n0; ++i) allowed |= 1ull << (i + 1);
    if (free_mask(phi) & ~allowed)
        throw AtomicityError("extend_atomic: phi must use x0 (new element) and x1..xn (b-bar)");

    {
        // precondition: M |= exists x0 phi(x0, b-bar)
        Assignment asg;
        bool realized = false;
        for (size_t i = 0; i < n0; ++i) asg.bind(static_cast<int>(i) + 1, b_tuple[i]);
        for (int c = 0; c < m.size() && !realized; ++c) {
            asg.bind(0, c);
            if (evaluate(m, phi, asg)) realized = true;
        }
        if (!realized) throw AtomicityError("extend_atomic: phi has no witness over b-bar");
    }

    // theta_i isolates the pool-type of (a_1..a_i); psi chain per the greedy
    // construction, truncated at |A|
    FormulaRef psi = phi;
    for (size_t i = n0; i <= enumeration.size(); ++i) {
        std::vector<int> prefix(enumeration.begin(), enumeration.begin() + static_cast<long>(i));
        // variables x1..xi for the prefix
        std::vector<int> tvars;
        for (size_t j = 1; j <= i; ++j) tvars.push_back(static_cast<int>(j));
        std::vector<FormulaRef> tuple_pool = enumerate_pool(m.signature(), tvars, spec);
        std::optional<FormulaRef> theta_i;
        {
            // least pool formula isolating the prefix's pool-type
            std::vector<FormulaRef> type;
            Assignment asg;
            for (size_t j = 0; j < i; ++j) asg.bind(static_cast<int>(j) + 1, prefix[j]);
            for (FormulaRef f : tuple_pool)
                if (evaluate(m, f, asg)) type.push_back(f);
            for (FormulaRef cand : tuple_pool) {
                Assignment a2;
                for (size_t j = 0; j < i; ++j) a2.bind(static_cast<int>(j) + 1, prefix[j]);
                if (!evaluate(m, cand, a2)) continue;
                if (isolates(cand, type, tvars, t)) {
                    theta_i = cand;
                    break;
                }
            }
        }
        if (!theta_i)
            throw AtomicityError("extend_atomic: no isolator for the enumeration prefix at the pool bound");
        std::vector<int> vars = {0};
        for (int v : tvars) vars.push_back(v);
        std::vector<FormulaRef> step_pool = enumerate_pool(m.signature(), vars, spec);
        std::optional<FormulaRef> next =
            atomicity_detail::choose_theta(mk_conj({psi, *theta_i}), vars, t, step_pool);
        if (!next)
            throw AtomicityError("extend_atomic: no isolating refinement found at the pool bound");
        psi = *next;
    }

    // least realization of the final psi over the full enumeration
    Assignment asg;
    for (size_t j = 0; j < enumeration.size(); ++j)
        asg.bind(static_cast<int>(j) + 1, enumeration[j]);
    for (int c = 0; c < m.size(); ++c) {
        asg.bind(0, c);
        if (evaluate(m, psi, asg)) return c;
    }
    throw AtomicityError("extend_atomic: the isolated type is not realized in M (saturation "
                         "surrogate violated)");
}

struct AtomicSetResult {
    std::vector<int> set;
    bool closed = false;       // Tarski-Vaught closure reached within budget
    int extensions = 0;
    AtomicityReport report;    // verdicts over the resulting set
};

// Greedy atomic-set construction: close the set under witnesses for every
// pool formula phi(x0, b-bar) with parameters from the set, each witness
// chosen through extend_atomic. budget bounds the number of extensions.
inline AtomicSetResult build_atomic_set(const FiniteStructure& m, const TheoryHandle& t,
                                        int budget, const PoolSpec& spec = {},
                                        int max_params = 2) {
    AtomicSetResult result;
    std::set<int> members;
    bool changed = true;
    while (changed && result.extensions < budget) {
        changed = false;
        for (int k = 0; k <= max_params && result.extensions < budget; ++k) {
            std::vector<int> vars = {0};
            for (int j = 1; j <= k; ++j) vars.push_back(j);
            std::vector<FormulaRef> pool = enumerate_pool(m.signature(), vars, spec);
            // parameter tuples from the current set, lex order
            std::vector<int> base(members.begin(), members.end());
            size_t total = 1;
            for (int j = 0; j < k; ++j) total *= base.size();
            if (k > 0 && base.empty()) continue;
            for (size_t cell = 0; cell < total && result.extensions < budget; ++cell) {
                std::vector<int> b_tuple(static_cast<size_t>(k));
                size_t rem = cell;
                for (int j = k - 1; j >= 0; --j) {
                    b_tuple[static_cast<size_t>(j)] = base[rem % base.size()];
                    rem /= base.size();
                }
                for (FormulaRef phi : pool) {
                    if (result.extensions >= budget) break;
                    // needs a witness?
                    Assignment asg;
                    for (size_t j = 0; j < b_tuple.size(); ++j)
                        asg.bind(static_cast<int>(j) + 1, b_tuple[j]);
                    bool realizable = false, satisfied = false;
                    for (int c = 0; c < m.size() && !satisfied; ++c) {
                        asg.bind(0, c);
                        if (evaluate(m, phi, asg)) {
                            realizable = true;
                            if (members.count(c)) satisfied = true;
                        }
                    }
                    if (!realizable || satisfied) continue;
                    std::vector<int> as_vec(members.begin(), members.end());
                    int c = extend_atomic(as_vec, b_tuple, phi, m, t, spec);
                    ++result.extensions;
                    if (members.insert(c).second) changed = true;
                }
            }
        }
    }
    result.set.assign(members.begin(), members.end());
    // closure check
    result.closed = true;
    for (int k = 0; k <= max_params && result.closed; ++k) {
        std::vector<int> vars = {0};
        for (int j = 1; j <= k; ++j) vars.push_back(j);
        std::vector<FormulaRef> pool = enumerate_pool(m.signature(), vars, spec);
        std::vector<int> base = result.set;
        size_t total = 1;
        for (int j = 0; j < k; ++j) total *= base.size();
        if (k > 0 && base.empty()) continue;
        for (size_t cell = 0; cell < total && result.closed; ++cell) {
            std::vector<int> b_tuple(static_cast<size_t>(k));
            size_t rem = cell;
            for (int j = k - 1; j >= 0; --j) {
                b_tuple[static_cast<size_t>(j)] = base[rem % base.size()];
                rem /= base.size();
            }
            for (FormulaRef phi : pool) {
                Assignment asg;
                for (size_t j = 0; j < b_tuple.size(); ++j)
                    asg.bind(static_cast<int>(j) + 1, b_tuple[j]);
                bool realizable = false, satisfied = false;
                for (int c = 0; c < m.size() && !satisfied; ++c) {
                    asg.bind(0, c);
                    if (evaluate(m, phi, asg)) {
                        realizable = true;
                        if (std::find(result.set.begin(), result.set.end(), c) != result.set.end())
                            satisfied = true;
                    }
                }
                if (realizable && !satisfied) {
                    result.closed = false;
                    break;
                }
            }
        }
    }
    result.report = is_atomic(m, t, spec, std::min(3, static_cast<int>(result.set.size())),
                              result.set);
    return result;
}

// Orbit of b under the automorphisms fixing A pointwise.
inline std::vector<std::vector<int>> automorphisms_fixing(const FiniteStructure& m,
                                                          const std::vector<int>& fixed) {
    std::vector<std::vector<int>> out;
    for (const auto& g : automorphisms(m)) {
        bool ok = true;
        for (int a : fixed)
            if (g[static_cast<size_t>(a)] != a) {
                ok = false;
                break;
            }
        if (ok) out.push_back(g);
    }
    return out;
}

struct AclResult {
    std::vector<int> closure;
    bool closure_atomic = false;
    AtomicityReport report;
};

// Algebraic-closure surrogate: an element is algebraic over A when its
// orbit under Aut(M/A) has size <= threshold. The closure is then re-checked
// for atomicity; the report is labeled a surrogate.
inline AclResult acl_atomic_check(const FiniteStructure& m, const std::vector<int>& a_set,
                                  const TheoryHandle& t, int threshold,
                                  const PoolSpec& spec = {}) {
    auto autos = automorphisms_fixing(m, a_set);
    std::set<int> closure;
    for (int b = 0; b < m.size(); ++b) {
        std::set<int> orbit;
        for (const auto& g : autos) orbit.insert(g[static_cast<size_t>(b)]);
        if (static_cast<int>(orbit.size()) <= threshold) closure.insert(b);
    }
    AclResult result;
    result.closure.assign(closure.begin(), closure.end());
    result.report = is_atomic(m, t, spec, std::min(2, static_cast<int>(result.closure.size())),
                              result.closure);
    result.report.surrogate_note = true;
    result.closure_atomic = result.report.all_isolated();
    return result;
}

} // namespace fmw
