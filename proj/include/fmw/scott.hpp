#pragma once

#include <deque>
#include <map>
#include <optional>
#include <unordered_map>
#include <vector>

#include "fmw/bruteforce.hpp"
#include "fmw/evaluate.hpp"
#include "fmw/formula.hpp"
#include "fmw/structure.hpp"

namespace fmw {

struct ScottError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace scott_detail {

// Content-addressed store for label-free class keys. A key mirrors the
// content of a back-and-forth stage formula: two tuples (possibly in two
// different structures over the same signature) get equal keys iff their
// set-coded stage formulas are equal ASTs. Entries are either raw integers
// or child key references, flagged in the top bit.
class KeyArena {
public:
    static constexpr uint64_t kChild = 1ull << 63;

    enum Tag : uint64_t { K0 = 1, KS = 2, DUP = 3, PAT = 4, IMP = 5, SC = 6 };

    uint32_t intern(std::vector<uint64_t> content) {
        auto it = map_.find(content);
        if (it != map_.end()) return it->second;
        uint32_t id = static_cast<uint32_t>(contents_.size());
        contents_.push_back(content);
        digests_.emplace_back();
        ok_.push_back(false);
        map_.emplace(std::move(content), id);
        return id;
    }

    const std::vector<uint64_t>& content(uint32_t id) const { return contents_[id]; }

    Digest digest(uint32_t root) {
        std::vector<uint32_t> stack = {root};
        while (!stack.empty()) {
            uint32_t cur = stack.back();
            if (ok_[cur]) {
                stack.pop_back();
                continue;
            }
            bool ready = true;
            for (uint64_t e : contents_[cur])
                if ((e & kChild) && !ok_[static_cast<uint32_t>(e & ~kChild)]) {
                    stack.push_back(static_cast<uint32_t>(e & ~kChild));
                    ready = false;
                }
            if (!ready) continue;
            // Set-valued tails (the extension set of KS, the conjunct set of
            // SC) hash as sorted child digests, so the digest is independent
            // of local intern order and hence of element labels.
            const std::vector<uint64_t>& c = contents_[cur];
            uint64_t tag = c[0];
            size_t set_from = c.size();
            if (tag == KS) set_from = 2;
            if (tag == SC) set_from = 3;
            HashBuf h;
            h.tag('K');
            for (size_t i = 0; i < std::min(set_from, c.size()); ++i) {
                if (c[i] & kChild)
                    h.digest(digests_[static_cast<uint32_t>(c[i] & ~kChild)]);
                else
                    h.u64(c[i]);
            }
            if (set_from < c.size()) {
                std::vector<Digest> rest;
                rest.reserve(c.size() - set_from);
                for (size_t i = set_from; i < c.size(); ++i)
                    rest.push_back(digests_[static_cast<uint32_t>(c[i] & ~kChild)]);
                std::sort(rest.begin(), rest.end());
                h.u32(static_cast<uint32_t>(rest.size()));
                for (const Digest& d : rest) h.digest(d);
            }
            digests_[cur] = h.finish();
            ok_[cur] = true;
            stack.pop_back();
        }
        return digests_[root];
    }

private:
    struct VecHash {
        size_t operator()(const std::vector<uint64_t>& v) const {
            size_t h = v.size();
            for (uint64_t x : v) h ^= x + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
            return h;
        }
    };
    std::deque<std::vector<uint64_t>> contents_;
    std::vector<Digest> digests_;
    std::vector<uint8_t> ok_;
    std::unordered_map<std::vector<uint64_t>, uint32_t, VecHash> map_;
};

inline uint64_t signature_fingerprint(const Signature& sig) {
    HashBuf h;
    h.tag('S');
    for (size_t s = 0; s < sig.size(); ++s) {
        h.str(sig.name(static_cast<int>(s)));
        h.u32(static_cast<uint32_t>(sig.arity(static_cast<int>(s))));
    }
    Digest d = h.finish();
    uint64_t out = 0;
    for (int i = 0; i < 8; ++i) out = (out << 8) | d[static_cast<size_t>(i)];
    return out >> 1; // keep clear of the child-reference flag bit
}

} // namespace scott_detail

struct ScottInvariant {
    std::string digest;
    int beta = 0;
    std::vector<int> class_counts; // stage-beta classes of M^k, k = 0..cap

    bool operator==(const ScottInvariant& o) const { return digest == o.digest; }
};

// The phi_{alpha,a-bar} refinement record: per stage and tuple length, the
// partition of M^k by stage-formula equality. Tuples with duplicates are
// keyed through their duplicate pattern plus the deduplicated tuple, so the
// refinement itself runs on injective tuples only.
class PartitionSystem {
public:
    PartitionSystem(const FiniteStructure& m, int cap_override = -1)
        : m_(&m), n_(m.size()), cap_(cap_override < 0 ? m.size() : cap_override) {
        enumerate_injective();
        compute_stage0();
        refine_all();
    }

    int beta() const { return beta_; }
    int cap() const { return cap_; }
    int stages() const { return static_cast<int>(keys_.size()); } // beta + 2

    // Partition of all of M^k (duplicates included) at the given stage;
    // class ids are assigned in order of least member tuple.
    std::vector<int> partition(int stage, int k) const {
        auto tuples = all_tuples(n_, k);
        std::vector<int> out(tuples.size());
        std::map<uint32_t, int> renumber;
        for (size_t i = 0; i < tuples.size(); ++i) {
            uint32_t key = tuple_key(stage, tuples[i]);
            auto it = renumber.find(key);
            if (it == renumber.end())
                it = renumber.emplace(key, static_cast<int>(renumber.size())).first;
            out[i] = it->second;
        }
        return out;
    }

    int class_count(int stage, int k) const {
        std::vector<int> p = partition(stage, k);
        int mx = -1;
        for (int c : p) mx = std::max(mx, c);
        return mx + 1;
    }

    // Stage key of an arbitrary tuple (duplicates allowed, any length whose
    // deduplication fits under the cap).
    uint32_t tuple_key(int stage, const std::vector<int>& t) const {
        std::vector<int> pattern;
        std::vector<int> dedup;
        pattern.reserve(t.size());
        for (int e : t) {
            int hit = -1;
            for (size_t j = 0; j < dedup.size(); ++j)
                if (dedup[j] == e) {
                    hit = static_cast<int>(j);
                    break;
                }
            if (hit < 0) {
                hit = static_cast<int>(dedup.size());
                dedup.push_back(e);
            }
            pattern.push_back(hit);
        }
        if (static_cast<int>(dedup.size()) > cap_)
            throw ScottError("tuple support exceeds the refinement cap");
        uint32_t base = keys_[static_cast<size_t>(stage)][dedup.size()][inj_index(dedup)];
        if (dedup.size() == t.size()) return base;
        std::vector<uint64_t> content;
        content.push_back(scott_detail::KeyArena::PAT);
        content.push_back(t.size());
        for (int p : pattern) content.push_back(static_cast<uint64_t>(p));
        content.push_back(scott_detail::KeyArena::kChild | base);
        return keys_arena_.intern(std::move(content));
    }

    ScottInvariant invariant() const {
        ScottInvariant inv;
        inv.beta = beta_;
        std::vector<uint64_t> conjuncts;
        for (int k = 0; k <= cap_; ++k) {
            std::set<uint32_t> seen;
            auto tuples = all_tuples(n_, k);
            int classes = 0;
            for (const auto& t : tuples) {
                uint32_t kb = tuple_key(beta_, t);
                if (!seen.insert(kb).second) continue;
                ++classes;
                uint32_t kb1 = tuple_key(beta_ + 1, t);
                conjuncts.push_back(scott_detail::KeyArena::kChild |
                                    keys_arena_.intern({scott_detail::KeyArena::IMP,
                                                        scott_detail::KeyArena::kChild | kb,
                                                        scott_detail::KeyArena::kChild | kb1}));
            }
            inv.class_counts.push_back(classes);
        }
        std::sort(conjuncts.begin(), conjuncts.end());
        conjuncts.erase(std::unique(conjuncts.begin(), conjuncts.end()), conjuncts.end());
        std::vector<uint64_t> top;
        top.push_back(scott_detail::KeyArena::SC);
        top.push_back(scott_detail::signature_fingerprint(m_->signature()));
        top.push_back(scott_detail::KeyArena::kChild |
                      keys_[static_cast<size_t>(beta_)][0][0]);
        for (uint64_t c : conjuncts) top.push_back(c);
        uint32_t root = keys_arena_.intern(std::move(top));
        inv.digest = hex(keys_arena_.digest(root));
        return inv;
    }

    // Least member of each stage-beta class of M^k, in class order.
    std::vector<std::vector<int>> class_representatives(int stage, int k) const {
        auto tuples = all_tuples(n_, k);
        std::vector<int> part = partition(stage, k);
        int classes = 0;
        for (int c : part) classes = std::max(classes, c + 1);
        std::vector<std::vector<int>> reps(static_cast<size_t>(classes));
        std::vector<char> seen(static_cast<size_t>(classes), 0);
        for (size_t i = 0; i < tuples.size(); ++i)
            if (!seen[static_cast<size_t>(part[i])]) {
                seen[static_cast<size_t>(part[i])] = 1;
                reps[static_cast<size_t>(part[i])] = tuples[i];
            }
        return reps;
    }

private:
    void enumerate_injective() {
        inj_.resize(static_cast<size_t>(cap_) + 1);
        inj_index_.resize(static_cast<size_t>(cap_) + 1);
        for (int k = 0; k <= cap_; ++k) {
            auto tuples = all_tuples(n_, k);
            inj_index_[static_cast<size_t>(k)].assign(tuples.size(), -1);
            for (size_t i = 0; i < tuples.size(); ++i) {
                bool inj = true;
                for (size_t a = 0; a < tuples[i].size() && inj; ++a)
                    for (size_t b = a + 1; b < tuples[i].size(); ++b)
                        if (tuples[i][a] == tuples[i][b]) {
                            inj = false;
                            break;
                        }
                if (inj) {
                    inj_index_[static_cast<size_t>(k)][i] =
                        static_cast<int>(inj_[static_cast<size_t>(k)].size());
                    inj_[static_cast<size_t>(k)].push_back(tuples[i]);
                }
            }
        }
    }

    size_t inj_index(const std::vector<int>& t) const {
        size_t cell = 0;
        for (int e : t) cell = cell * static_cast<size_t>(n_) + static_cast<size_t>(e);
        int idx = inj_index_[t.size()][cell];
        return static_cast<size_t>(idx);
    }

    void compute_stage0() {
        const Signature& sig = m_->signature();
        keys_.emplace_back(static_cast<size_t>(cap_) + 1);
        for (int k = 0; k <= cap_; ++k) {
            auto& out = keys_.back()[static_cast<size_t>(k)];
            for (const auto& t : inj_[static_cast<size_t>(k)]) {
                std::vector<uint64_t> content;
                content.push_back(scott_detail::KeyArena::K0);
                content.push_back(static_cast<uint64_t>(k));
                // true atom shapes, in deterministic shape order
                uint64_t shape_id = 0;
                std::vector<int> w;
                for (size_t s = 0; s < sig.size(); ++s) {
                    int r = sig.arity(static_cast<int>(s));
                    size_t total = 1;
                    for (int i = 0; i < r; ++i) total *= static_cast<size_t>(k);
                    if (r > 0 && k == 0) {
                        continue; // no shapes over an empty variable tuple
                    }
                    w.assign(static_cast<size_t>(r), 0);
                    for (size_t cell = 0; cell < total; ++cell) {
                        size_t rem = cell;
                        for (int i = r - 1; i >= 0; --i) {
                            w[static_cast<size_t>(i)] = static_cast<int>(rem % static_cast<size_t>(k == 0 ? 1 : k));
                            rem /= static_cast<size_t>(k == 0 ? 1 : k);
                        }
                        std::vector<int> args(static_cast<size_t>(r));
                        for (int i = 0; i < r; ++i) args[static_cast<size_t>(i)] = t[static_cast<size_t>(w[static_cast<size_t>(i)])];
                        if (m_->holds(static_cast<int>(s), args)) content.push_back(1000 + shape_id);
                        ++shape_id;
                    }
                }
                out.push_back(keys_arena_.intern(std::move(content)));
            }
        }
    }

    void refine_all() {
        while (true) {
            const auto& prev = keys_.back();
            std::vector<std::vector<uint32_t>> next(static_cast<size_t>(cap_) + 1);
            for (int k = 0; k <= cap_; ++k) {
                next[static_cast<size_t>(k)].reserve(inj_[static_cast<size_t>(k)].size());
                for (size_t i = 0; i < inj_[static_cast<size_t>(k)].size(); ++i) {
                    const auto& t = inj_[static_cast<size_t>(k)][i];
                    std::vector<uint64_t> exts;
                    exts.reserve(static_cast<size_t>(n_));
                    for (int b = 0; b < n_; ++b) {
                        int dup = -1;
                        for (size_t j = 0; j < t.size(); ++j)
                            if (t[j] == b) {
                                dup = static_cast<int>(j);
                                break;
                            }
                        if (dup >= 0) {
                            uint32_t e = keys_arena_.intern(
                                {scott_detail::KeyArena::DUP, static_cast<uint64_t>(dup),
                                 scott_detail::KeyArena::kChild | prev[static_cast<size_t>(k)][i]});
                            exts.push_back(scott_detail::KeyArena::kChild | e);
                        } else {
                            std::vector<int> ext = t;
                            ext.push_back(b);
                            exts.push_back(scott_detail::KeyArena::kChild |
                                           prev[static_cast<size_t>(k) + 1][inj_index(ext)]);
                        }
                    }
                    std::sort(exts.begin(), exts.end());
                    exts.erase(std::unique(exts.begin(), exts.end()), exts.end());
                    std::vector<uint64_t> content;
                    content.push_back(scott_detail::KeyArena::KS);
                    content.push_back(scott_detail::KeyArena::kChild | prev[static_cast<size_t>(k)][i]);
                    for (uint64_t e : exts) content.push_back(e);
                    next[static_cast<size_t>(k)].push_back(keys_arena_.intern(std::move(content)));
                }
            }
            bool stable = true;
            for (int k = 0; k <= cap_ && stable; ++k)
                if (distinct(prev[static_cast<size_t>(k)]) != distinct(next[static_cast<size_t>(k)]))
                    stable = false;
            keys_.push_back(std::move(next));
            if (stable) {
                beta_ = static_cast<int>(keys_.size()) - 2;
                return;
            }
        }
    }

    static size_t distinct(const std::vector<uint32_t>& v) {
        std::vector<uint32_t> c = v;
        std::sort(c.begin(), c.end());
        c.erase(std::unique(c.begin(), c.end()), c.end());
        return c.size();
    }

    // note: for k = cap there are no fresh extensions, so refinement closes
    // over injective tuples of length <= cap exactly

    const FiniteStructure* m_;
    int n_;
    int cap_;
    int beta_ = 0;
    std::vector<std::vector<std::vector<int>>> inj_;      // per k: injective tuples (lex order)
    std::vector<std::vector<int>> inj_index_;             // per k: cell -> injective index
    std::vector<std::vector<std::vector<uint32_t>>> keys_; // per stage, per k, per injective tuple
    mutable scott_detail::KeyArena keys_arena_;
};

inline PartitionSystem refine_to_fixpoint(const FiniteStructure& m) { return PartitionSystem(m); }

// Exact AST of phi_{alpha,a-bar} per the canonical construction: stage 0 is
// the set of atomic/negated-atomic literals (relation atoms over all variable
// shapes, equalities between distinct positions); a successor stage conjoins
// the previous stage with the universal and existential extension clauses,
// with the disjunction and universal quantifier expanded as abbreviations.
class StageFormulaBuilder {
public:
    explicit StageFormulaBuilder(const FiniteStructure& m) : m_(&m) {}

    FormulaRef stage_formula(const std::vector<int>& tuple, int alpha) {
        for (int e : tuple)
            if (e < 0 || e >= m_->size()) throw ScottError("tuple entry out of range");
        return build(tuple, alpha);
    }

private:
    FormulaRef build(const std::vector<int>& tuple, int alpha) {
        auto memo_key = std::make_pair(alpha, tuple);
        auto it = memo_.find(memo_key);
        if (it != memo_.end()) return it->second;
        FormulaRef out;
        int k = static_cast<int>(tuple.size());
        if (alpha == 0) {
            const Signature& sig = m_->signature();
            std::vector<FormulaRef> lits;
            for (size_t s = 0; s < sig.size(); ++s) {
                int r = sig.arity(static_cast<int>(s));
                if (r > 0 && k == 0) continue;
                size_t total = 1;
                for (int i = 0; i < r; ++i) total *= static_cast<size_t>(k);
                for (size_t cell = 0; cell < total; ++cell) {
                    size_t rem = cell;
                    std::vector<int> w(static_cast<size_t>(r));
                    for (int i = r - 1; i >= 0; --i) {
                        w[static_cast<size_t>(i)] = static_cast<int>(rem % static_cast<size_t>(k == 0 ? 1 : k));
                        rem /= static_cast<size_t>(k == 0 ? 1 : k);
                    }
                    std::vector<int> args(static_cast<size_t>(r));
                    for (int i = 0; i < r; ++i) args[static_cast<size_t>(i)] = tuple[static_cast<size_t>(w[static_cast<size_t>(i)])];
                    FormulaRef atom = mk_atom(sig.name(static_cast<int>(s)), w);
                    lits.push_back(m_->holds(static_cast<int>(s), args) ? atom : mk_neg(atom));
                }
            }
            for (int i = 0; i < k; ++i)
                for (int j = i + 1; j < k; ++j) {
                    FormulaRef eq = mk_equal(i, j);
                    lits.push_back(tuple[static_cast<size_t>(i)] == tuple[static_cast<size_t>(j)] ? eq
                                                                                                  : mk_neg(eq));
                }
            out = mk_conj(std::move(lits));
        } else {
            FormulaRef prev = build(tuple, alpha - 1);
            std::vector<FormulaRef> exts;
            exts.reserve(static_cast<size_t>(m_->size()));
            for (int b = 0; b < m_->size(); ++b) {
                std::vector<int> ext = tuple;
                ext.push_back(b);
                exts.push_back(build(ext, alpha - 1));
            }
            std::sort(exts.begin(), exts.end());
            exts.erase(std::unique(exts.begin(), exts.end()), exts.end());
            FormulaRef forall_part = mk_forall(k, mk_or(exts));
            std::vector<FormulaRef> witnesses;
            witnesses.reserve(exts.size());
            for (FormulaRef e : exts) witnesses.push_back(mk_exists(k, e));
            FormulaRef exists_part = mk_conj(std::move(witnesses));
            out = mk_conj({prev, forall_part, exists_part});
        }
        memo_.emplace(memo_key, out);
        return out;
    }

    const FiniteStructure* m_;
    std::map<std::pair<int, std::vector<int>>, FormulaRef> memo_;
};

inline FormulaRef stage_formula(const FiniteStructure& m, const std::vector<int>& tuple, int alpha) {
    return StageFormulaBuilder(m).stage_formula(tuple, alpha);
}

// Sc(M) = phi_{beta,()} and the conjunction over class representatives of
// forall x-bar (phi_{beta,a-bar} -> phi_{beta+1,a-bar}). Stage-beta-equivalent
// tuples would contribute identical set-coded conjuncts, so one representative
// per class leaves the coded set unchanged.
inline FormulaRef scott_sentence(const FiniteStructure& m) {
    PartitionSystem ps(m);
    int beta = ps.beta();
    StageFormulaBuilder builder(m);
    std::vector<FormulaRef> conjuncts;
    for (int k = 0; k <= ps.cap(); ++k) {
        for (const auto& rep : ps.class_representatives(beta, k)) {
            FormulaRef imp = mk_implies(builder.stage_formula(rep, beta),
                                        builder.stage_formula(rep, beta + 1));
            conjuncts.push_back(mk_forall_prefix(k, imp));
        }
    }
    FormulaRef inner = mk_conj(std::move(conjuncts));
    FormulaRef empty_beta = builder.stage_formula({}, beta);
    return mk_conj({empty_beta, inner});
}

inline ScottInvariant scott_invariant(const FiniteStructure& m) {
    return PartitionSystem(m).invariant();
}

inline bool iso_via_invariant(const FiniteStructure& m, const FiniteStructure& n) {
    if (m.signature() != n.signature()) throw StructureError("signature mismatch");
    return scott_invariant(m).digest == scott_invariant(n).digest;
}

inline bool check_models_scott(const FiniteStructure& n, FormulaRef sc) {
    if (!is_sentence(sc)) throw EvalError("Scott sentence has free variables");
    return evaluate_sentence(n, sc);
}

} // namespace fmw
