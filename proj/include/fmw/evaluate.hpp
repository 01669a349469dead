#pragma once

#include <map>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "fmw/formula.hpp"
#include "fmw/structure.hpp"

namespace fmw {

struct EvalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Variable assignment var -> element.
class Assignment {
public:
    Assignment() = default;

    void bind(int var, int value) {
        if (var < 0 || var >= kMaxVar) throw EvalError("variable out of range");
        if (static_cast<size_t>(var) >= vals_.size()) vals_.resize(static_cast<size_t>(var) + 1, -1);
        vals_[static_cast<size_t>(var)] = value;
        mask_ |= 1ull << var;
    }

    void unbind(int var) {
        mask_ &= ~(1ull << var);
        vals_[static_cast<size_t>(var)] = -1;
    }

    bool bound(int var) const { return (mask_ >> var) & 1; }
    int value(int var) const {
        if (!bound(var)) return -1;
        return vals_[static_cast<size_t>(var)];
    }
    uint64_t mask() const { return mask_; }

private:
    std::vector<int> vals_;
    uint64_t mask_ = 0;
};

namespace detail {

class Evaluator {
public:
    Evaluator(const FiniteStructure& m) : m_(m) {}

    bool eval(FormulaRef f, Assignment& asg) {
        const FormulaNode& n = arena().node(f);
        // memo keyed by the assignment restricted to free variables
        uint64_t fm = n.free_mask;
        uint64_t key = 0;
        if (fm) {
            for (int v = 0; v < kMaxVar; ++v)
                if ((fm >> v) & 1) key = key * static_cast<uint64_t>(m_.size() + 1) +
                                         static_cast<uint64_t>(asg.value(v) + 1);
        }
        auto [it, fresh] = memo_.try_emplace(MemoKey{f, key}, false);
        if (!fresh) return it->second;
        bool r = eval_raw(n, asg);
        memo_[MemoKey{f, key}] = r;
        return r;
    }

private:
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

    bool eval_raw(const FormulaNode& n, Assignment& asg) {
        switch (n.kind) {
        case FKind::Atom: {
            int sym = m_.signature().find(arena().symbol_name(n.symbol));
            if (sym < 0)
                throw EvalError("symbol '" + arena().symbol_name(n.symbol) +
                                "' not in structure signature");
            if (m_.signature().arity(sym) != static_cast<int>(n.args.size()))
                throw EvalError("arity mismatch for symbol '" + arena().symbol_name(n.symbol) + "'");
            std::vector<int> tuple;
            tuple.reserve(n.args.size());
            for (uint8_t v : n.args) {
                if (!asg.bound(v)) throw EvalError("unbound free variable x" + std::to_string(v));
                tuple.push_back(asg.value(v));
            }
            return m_.holds(sym, tuple);
        }
        case FKind::Equal: {
            if (!asg.bound(n.var)) throw EvalError("unbound free variable x" + std::to_string(n.var));
            if (!asg.bound(n.var2)) throw EvalError("unbound free variable x" + std::to_string(n.var2));
            return asg.value(n.var) == asg.value(n.var2);
        }
        case FKind::Neg:
            return !eval(n.kids[0], asg);
        case FKind::Conj:
            for (FormulaRef k : n.kids)
                if (!eval(k, asg)) return false;
            return true;
        case FKind::Exists: {
            bool was = asg.bound(n.var);
            int old = was ? asg.value(n.var) : -1;
            bool found = false;
            for (int e = 0; e < m_.size() && !found; ++e) {
                asg.bind(n.var, e);
                if (eval(n.kids[0], asg)) found = true;
            }
            if (was)
                asg.bind(n.var, old);
            else
                asg.unbind(n.var);
            return found;
        }
        }
        return false;
    }

    const FiniteStructure& m_;
    std::unordered_map<MemoKey, bool, MemoKeyHash> memo_;
};

} // namespace detail

inline bool evaluate(const FiniteStructure& m, FormulaRef f, const Assignment& asg) {
    uint64_t need = free_mask(f);
    if ((need & asg.mask()) != need) {
        for (int v = 0; v < kMaxVar; ++v)
            if (((need >> v) & 1) && !asg.bound(v))
                throw EvalError("unbound free variable x" + std::to_string(v));
    }
    Assignment copy = asg;
    detail::Evaluator ev(m);
    return ev.eval(f, copy);
}

inline bool evaluate_sentence(const FiniteStructure& m, FormulaRef f) {
    if (!is_sentence(f)) throw EvalError("formula has free variables");
    Assignment asg;
    return evaluate(m, f, asg);
}

} // namespace fmw
