#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <unordered_map>
#include <vector>

#include "fmw/evaluate.hpp"
#include "fmw/formula.hpp"
#include "fmw/sat.hpp"
#include "fmw/structure.hpp"

namespace fmw {

struct TheoryError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

// MACE-style grounder: flattens a first-order sentence over a finite
// universe into CNF via Tseitin auxiliaries. Relation-cell variables come
// first in a fixed order, so models decode deterministically.
class Grounder {
public:
    void rebind(SatSolver& solver) { solver_ = &solver; }

    Grounder(const Signature& sig, int m, SatSolver& solver)
        : sig_(&sig), m_(m), solver_(&solver) {
        true_var_ = solver_->new_var();
        solver_->add_clause({true_var_});
        cell_base_.resize(sig.size());
        for (size_t s = 0; s < sig.size(); ++s) {
            cell_base_[s] = next_;
            size_t cells = 1;
            for (int i = 0; i < sig.arity(static_cast<int>(s)); ++i)
                cells *= static_cast<size_t>(m_);
            for (size_t c = 0; c < cells; ++c) solver_->new_var();
            next_ += static_cast<int>(cells);
        }
    }

    int cell_var(int sym, size_t cell) const {
        return cell_base_[static_cast<size_t>(sym)] + static_cast<int>(cell);
    }

    int universe() const { return m_; }

    void assert_sentence(FormulaRef f) {
        std::vector<int> asg(kMaxVar, -1);
        solver_->add_clause({ground(f, asg)});
    }

    // literal equivalent to the sentence, for assumption-based queries;
    // the Tseitin definitions stay in the solver and are reused
    int sentence_literal(FormulaRef f) {
        std::vector<int> asg(kMaxVar, -1);
        return ground(f, asg);
    }

    // decode a satisfying assignment into a structure
    FiniteStructure decode() const {
        std::vector<std::vector<std::vector<int>>> tables(sig_->size());
        for (size_t s = 0; s < sig_->size(); ++s) {
            int r = sig_->arity(static_cast<int>(s));
            size_t cells = 1;
            for (int i = 0; i < r; ++i) cells *= static_cast<size_t>(m_);
            for (size_t c = 0; c < cells; ++c) {
                if (!solver_->value(cell_var(static_cast<int>(s), c))) continue;
                std::vector<int> tuple(static_cast<size_t>(r));
                size_t rem = c;
                for (int i = r - 1; i >= 0; --i) {
                    tuple[static_cast<size_t>(i)] = static_cast<int>(rem % static_cast<size_t>(m_));
                    rem /= static_cast<size_t>(m_);
                }
                tables[s].push_back(std::move(tuple));
            }
        }
        return FiniteStructure(*sig_, m_, std::move(tables));
    }

private:
    int ground(FormulaRef f, std::vector<int>& asg) {
        const FormulaNode& n = arena().node(f);
        uint64_t key = 0;
        for (int v = 0; v < kMaxVar; ++v)
            if ((n.free_mask >> v) & 1)
                key = key * static_cast<uint64_t>(m_ + 1) + static_cast<uint64_t>(asg[static_cast<size_t>(v)] + 1);
        auto memo_it = memo_.find({f, key});
        if (memo_it != memo_.end()) return memo_it->second;
        int lit = 0;
        switch (n.kind) {
        case FKind::Atom: {
            int sym = sig_->find(arena().symbol_name(n.symbol));
            if (sym < 0)
                throw TheoryError("symbol '" + arena().symbol_name(n.symbol) + "' not in signature");
            if (sig_->arity(sym) != static_cast<int>(n.args.size()))
                throw TheoryError("arity mismatch for '" + arena().symbol_name(n.symbol) + "'");
            size_t cell = 0;
            for (uint8_t v : n.args) {
                if (asg[v] < 0) throw TheoryError("unbound variable in grounding");
                cell = cell * static_cast<size_t>(m_) + static_cast<size_t>(asg[v]);
            }
            lit = cell_var(sym, cell);
            break;
        }
        case FKind::Equal:
            lit = (asg[n.var] == asg[n.var2]) ? true_var_ : -true_var_;
            break;
        case FKind::Neg:
            lit = -ground(n.kids[0], asg);
            break;
        case FKind::Conj: {
            std::vector<int> lits;
            bool constant_false = false;
            for (FormulaRef k : n.kids) {
                int l = ground(k, asg);
                if (l == true_var_) continue;
                if (l == -true_var_) {
                    constant_false = true;
                    break;
                }
                lits.push_back(l);
            }
            if (constant_false)
                lit = -true_var_;
            else if (lits.empty())
                lit = true_var_;
            else if (lits.size() == 1)
                lit = lits[0];
            else {
                int aux = solver_->new_var();
                std::vector<int> big = {aux};
                for (int l : lits) {
                    solver_->add_clause({-aux, l});
                    big.push_back(-l);
                }
                solver_->add_clause(big);
                lit = aux;
            }
            break;
        }
        case FKind::Exists: {
            std::vector<int> lits;
            bool constant_true = false;
            int saved = asg[n.var];
            for (int b = 0; b < m_ && !constant_true; ++b) {
                asg[n.var] = b;
                int l = ground(n.kids[0], asg);
                if (l == true_var_) constant_true = true;
                if (l != -true_var_) lits.push_back(l);
            }
            asg[n.var] = saved;
            if (constant_true)
                lit = true_var_;
            else if (lits.empty())
                lit = -true_var_;
            else if (lits.size() == 1)
                lit = lits[0];
            else {
                int aux = solver_->new_var();
                std::vector<int> big = {-aux};
                for (int l : lits) {
                    solver_->add_clause({aux, -l});
                    big.push_back(l);
                }
                solver_->add_clause(big);
                lit = aux;
            }
            break;
        }
        }
        memo_.emplace(MemoKey{f, key}, lit);
        return lit;
    }

    struct MemoKey {
        FormulaRef f;
        uint64_t asg;
        bool operator==(const MemoKey& o) const { return f == o.f && asg == o.asg; }
    };
    struct MemoKeyHash {
        size_t operator()(const MemoKey& k) const {
            return std::hash<uint64_t>()(k.asg * 0x9e3779b97f4a7c15ull + k.f);
        }
    };

    const Signature* sig_;
    int m_;
    SatSolver* solver_;
    int true_var_;
    int next_ = 2; // var 1 is the true constant
    std::vector<int> cell_base_;
    std::unordered_map<MemoKey, int, MemoKeyHash> memo_;
};

// axioms grounded once per universe size; queries clone the solver
struct GroundBase {
    SatSolver solver;
    Grounder grounder;
    GroundBase(const Signature& sig, int m) : solver(), grounder(sig, m, solver) {}
};

struct GroundCache {
    explicit GroundCache(Signature s) : sig(std::move(s)) {}
    Signature sig;
    std::map<int, std::unique_ptr<GroundBase>> per_size;
    std::mutex mu;
};

} // namespace detail

// Theory handle, two representations:
//  (a) complete: a concrete finite model, sentences decided by evaluation;
//  (b) bounded: an axiom list with parameter k, "consistent" meaning some
//      model of size <= k satisfies all axioms and "entails" meaning true in
//      all such models. The bounded semantics is an approximation and every
//      report that uses it says so.
class TheoryHandle {
public:
    static TheoryHandle complete(FiniteStructure m) {
        TheoryHandle t;
        t.model_ = std::make_shared<FiniteStructure>(std::move(m));
        return t;
    }

    static TheoryHandle bounded(Signature sig, std::vector<FormulaRef> axioms, int k) {
        if (k < 1) throw TheoryError("bounded handle needs k >= 1");
        TheoryHandle t;
        t.sig_ = std::move(sig);
        t.axioms_ = std::move(axioms);
        t.k_ = k;
        t.cache_ = std::make_shared<detail::GroundCache>(t.sig_);
        return t;
    }

    bool is_complete() const { return model_ != nullptr; }
    const FiniteStructure& model() const { return *model_; }
    const std::vector<FormulaRef>& axioms() const { return axioms_; }
    int bound() const { return k_; }
    const Signature& signature() const { return is_complete() ? model_->signature() : sig_; }

    bool has_axiom(FormulaRef f) const {
        for (FormulaRef a : axioms_)
            if (a == f) return true;
        return false;
    }

    TheoryHandle extended(const std::vector<FormulaRef>& extra) const {
        if (is_complete()) throw TheoryError("cannot extend a complete handle");
        std::vector<FormulaRef> axioms = axioms_;
        for (FormulaRef f : extra) axioms.push_back(f);
        return bounded(sig_, std::move(axioms), k_);
    }

    // some model (of size <= k for bounded handles) satisfies the theory
    // plus the extra sentences
    bool consistent_with(const std::vector<FormulaRef>& extra) const {
        if (is_complete()) {
            for (FormulaRef f : extra)
                if (!evaluate_sentence(*model_, f)) return false;
            return true;
        }
        return find_model(extra).has_value();
    }

    bool consistent() const { return consistent_with({}); }

    // sentence true in every admitted model
    bool entails(FormulaRef sentence) const {
        if (is_complete()) return evaluate_sentence(*model_, sentence);
        return !consistent_with({mk_neg(sentence)});
    }

    // smallest-universe model found by the deterministic search; the base
    // CNF (axioms grounded at universe size m) is built once per size,
    // queries run incrementally under assumption literals
    std::optional<FiniteStructure> find_model(const std::vector<FormulaRef>& extra) const {
        if (is_complete()) throw TheoryError("find_model on a complete handle");
        std::lock_guard<std::mutex> lk(cache_->mu);
        for (int m = 1; m <= k_; ++m) {
            detail::GroundBase& base = ground_base_locked(m);
            std::vector<int> assumptions;
            assumptions.reserve(extra.size());
            for (FormulaRef f : extra) assumptions.push_back(base.grounder.sentence_literal(f));
            if (base.solver.solve(assumptions)) return base.grounder.decode();
        }
        return std::nullopt;
    }

private:
    TheoryHandle() = default;

    detail::GroundBase& ground_base_locked(int m) const {
        auto it = cache_->per_size.find(m);
        if (it == cache_->per_size.end()) {
            auto base = std::make_unique<detail::GroundBase>(cache_->sig, m);
            for (FormulaRef f : axioms_) base->grounder.assert_sentence(f);
            it = cache_->per_size.emplace(m, std::move(base)).first;
        }
        return *it->second;
    }

    std::shared_ptr<const FiniteStructure> model_;
    Signature sig_;
    std::vector<FormulaRef> axioms_;
    int k_ = 0;
    std::shared_ptr<detail::GroundCache> cache_;
};

inline TheoryHandle complete_theory_of(const FiniteStructure& m) {
    return TheoryHandle::complete(m);
}

} // namespace fmw
