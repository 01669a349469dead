#pragma once

#include <map>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "fmw/evaluate.hpp"
#include "fmw/formula.hpp"
#include "fmw/printer.hpp"
#include "fmw/structure.hpp"

namespace fmw {

struct CompileError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Saturation conjunct: for every relation symbol P the sentence
// forall x-bar (P(x-bar) or not P(x-bar)), so that every atom over the
// signature occurs as a sub-formula of the compiled sentence.
inline FormulaRef saturation_conjunct(const Signature& sig) {
    std::vector<FormulaRef> parts;
    for (size_t s = 0; s < sig.size(); ++s) {
        int r = sig.arity(static_cast<int>(s));
        std::vector<int> vars(static_cast<size_t>(r));
        for (int i = 0; i < r; ++i) vars[static_cast<size_t>(i)] = i;
        FormulaRef atom = mk_atom(sig.name(static_cast<int>(s)), vars);
        parts.push_back(mk_forall_prefix(r, mk_or({atom, mk_neg(atom)})));
    }
    return mk_conj(std::move(parts));
}

inline FormulaRef saturate(FormulaRef psi, const Signature& sig) {
    return mk_conj({psi, saturation_conjunct(sig)});
}

// Sub-formula closure of the saturated sentence. Children of a conjunction
// are its member formulas, never sub-conjunctions. Deterministic order:
// post-order with children visited by digest.
inline std::vector<FormulaRef> subformulas(FormulaRef psi, const Signature& sig) {
    if (!is_sentence(psi)) throw CompileError("subformulas: input must be a sentence");
    FormulaRef root = saturate(psi, sig);
    std::vector<FormulaRef> out;
    std::set<FormulaRef> seen;
    std::function<void(FormulaRef)> visit = [&](FormulaRef f) {
        if (seen.count(f)) return;
        seen.insert(f);
        const FormulaNode& n = arena().node(f);
        std::vector<std::pair<std::string, FormulaRef>> kids;
        for (FormulaRef k : n.kids) kids.emplace_back(canonical_digest(k), k);
        std::sort(kids.begin(), kids.end());
        for (auto& [d, k] : kids) visit(k);
        out.push_back(f);
    };
    visit(root);
    return out;
}

struct OmittedType {
    std::string key;                  // digest of the conjunction sub-formula
    FormulaRef conj;                  // the sub-formula Phi
    std::vector<int> vars;            // sorted free variables of Phi
    std::vector<FormulaRef> literals; // R_{phi_i}(...) for each conjunct, plus Not R_Phi(...)
};

// (L_Psi, T_Psi, Gamma_Psi) plus the naming that realizes H_Psi.
struct CompiledTheory {
    FormulaRef source;
    FormulaRef saturated;
    Signature source_sig;
    Signature lpsi;
    std::vector<FormulaRef> subs;                  // closure, deterministic order
    std::vector<std::string> names;                // R_... symbol per sub
    std::unordered_map<FormulaRef, int> sub_index;
    std::vector<FormulaRef> axioms;                // first-order sentences over lpsi
    std::vector<OmittedType> omitted;

    const std::string& name_of(FormulaRef sub) const {
        auto it = sub_index.find(sub);
        if (it == sub_index.end()) throw CompileError("not a sub-formula of the compiled sentence");
        return names[static_cast<size_t>(it->second)];
    }

    // R_phi applied to phi's sorted free variables
    FormulaRef r_atom(FormulaRef sub) const { return mk_atom(name_of(sub), free_vars(sub)); }
};

inline CompiledTheory compile_sentence(FormulaRef psi, const Signature& sig) {
    if (!is_sentence(psi)) throw CompileError("compile_sentence: input must be a sentence");
    CompiledTheory c;
    c.source = psi;
    c.source_sig = sig;
    c.saturated = saturate(psi, sig);
    c.subs = subformulas(psi, sig);

    // relation names from digest prefixes; lengthen on prefix collision
    std::map<std::string, std::vector<size_t>> by_prefix;
    c.names.resize(c.subs.size());
    for (size_t i = 0; i < c.subs.size(); ++i)
        by_prefix[canonical_digest(c.subs[i]).substr(0, 16)].push_back(i);
    for (auto& [prefix, idxs] : by_prefix)
        for (size_t i : idxs)
            c.names[i] = "R_" + (idxs.size() == 1 ? prefix : canonical_digest(c.subs[i]));

    for (size_t i = 0; i < c.subs.size(); ++i) {
        c.sub_index.emplace(c.subs[i], static_cast<int>(i));
        c.lpsi.add(c.names[i], static_cast<int>(free_vars(c.subs[i]).size()));
    }

    auto close = [](const std::vector<int>& vars, FormulaRef body) {
        for (auto it = vars.rbegin(); it != vars.rend(); ++it) body = mk_forall(*it, body);
        return body;
    };
    auto iff = [](FormulaRef a, FormulaRef b) {
        return mk_conj({mk_implies(a, b), mk_implies(b, a)});
    };

    for (FormulaRef sub : c.subs) {
        const FormulaNode& n = arena().node(sub);
        std::vector<int> fv = free_vars(sub);
        switch (n.kind) {
        case FKind::Exists: {
            // exists x_j R_phi(...) <-> R_{exists x_j phi}(...)
            FormulaRef body = iff(mk_exists(n.var, c.r_atom(n.kids[0])), c.r_atom(sub));
            c.axioms.push_back(close(fv, body));
            break;
        }
        case FKind::Neg: {
            FormulaRef body = iff(mk_neg(c.r_atom(n.kids[0])), c.r_atom(sub));
            c.axioms.push_back(close(fv, body));
            break;
        }
        case FKind::Conj: {
            std::vector<std::pair<std::string, FormulaRef>> kids;
            for (FormulaRef k : n.kids) kids.emplace_back(canonical_digest(k), k);
            std::sort(kids.begin(), kids.end());
            for (auto& [d, k] : kids)
                c.axioms.push_back(close(fv, mk_implies(c.r_atom(sub), c.r_atom(k))));
            OmittedType om;
            om.key = canonical_digest(sub);
            om.conj = sub;
            om.vars = fv;
            for (auto& [d, k] : kids) om.literals.push_back(c.r_atom(k));
            om.literals.push_back(mk_neg(c.r_atom(sub)));
            c.omitted.push_back(std::move(om));
            break;
        }
        default:
            break;
        }
    }
    // the unit axiom for the saturated sentence
    c.axioms.push_back(c.r_atom(c.saturated));
    return c;
}

namespace detail {

// truth table of a sub-formula over M, one bit per assignment of the sorted
// free variables (mixed-radix cells, first variable most significant)
struct TruthTable {
    std::vector<int> vars;
    std::vector<uint8_t> bits;
};

class TableEvaluator {
public:
    explicit TableEvaluator(const FiniteStructure& m) : m_(&m) {}

    const TruthTable& table(FormulaRef f) {
        auto it = memo_.find(f);
        if (it != memo_.end()) return it->second;
        TruthTable t;
        t.vars = free_vars(f);
        size_t cells = 1;
        for (size_t i = 0; i < t.vars.size(); ++i) cells *= static_cast<size_t>(m_->size());
        t.bits.assign(cells, 0);
        const FormulaNode& n = arena().node(f);
        switch (n.kind) {
        case FKind::Atom: {
            int sym = m_->signature().find(arena().symbol_name(n.symbol));
            if (sym < 0)
                throw EvalError("symbol '" + arena().symbol_name(n.symbol) + "' not in signature");
            if (m_->signature().arity(sym) != static_cast<int>(n.args.size()))
                throw EvalError("arity mismatch for '" + arena().symbol_name(n.symbol) + "'");
            std::vector<int> asg(t.vars.size());
            std::vector<int> tuple(n.args.size());
            for (size_t cell = 0; cell < t.bits.size(); ++cell) {
                decode(cell, t.vars.size(), asg);
                for (size_t i = 0; i < n.args.size(); ++i)
                    tuple[i] = asg[pos(t.vars, n.args[i])];
                t.bits[cell] = m_->holds(sym, tuple);
            }
            break;
        }
        case FKind::Equal: {
            std::vector<int> asg(t.vars.size());
            for (size_t cell = 0; cell < t.bits.size(); ++cell) {
                decode(cell, t.vars.size(), asg);
                t.bits[cell] = asg[pos(t.vars, n.var)] == asg[pos(t.vars, n.var2)];
            }
            break;
        }
        case FKind::Neg: {
            const TruthTable& k = table(n.kids[0]);
            for (size_t cell = 0; cell < t.bits.size(); ++cell) t.bits[cell] = !k.bits[cell];
            break;
        }
        case FKind::Conj: {
            std::vector<const TruthTable*> kids;
            for (FormulaRef k : n.kids) kids.push_back(&table(k));
            std::vector<int> asg(t.vars.size());
            for (size_t cell = 0; cell < t.bits.size(); ++cell) {
                decode(cell, t.vars.size(), asg);
                uint8_t v = 1;
                for (const TruthTable* k : kids) {
                    if (!k->bits[project(*k, t.vars, asg)]) {
                        v = 0;
                        break;
                    }
                }
                t.bits[cell] = v;
            }
            break;
        }
        case FKind::Exists: {
            const TruthTable& k = table(n.kids[0]);
            std::vector<int> asg(t.vars.size());
            std::vector<int> kasg(k.vars.size());
            for (size_t cell = 0; cell < t.bits.size(); ++cell) {
                decode(cell, t.vars.size(), asg);
                uint8_t v = 0;
                for (int b = 0; b < m_->size() && !v; ++b) {
                    for (size_t i = 0; i < k.vars.size(); ++i)
                        kasg[i] = k.vars[i] == n.var ? b : asg[pos(t.vars, k.vars[i])];
                    size_t kcell = 0;
                    for (size_t i = 0; i < kasg.size(); ++i)
                        kcell = kcell * static_cast<size_t>(m_->size()) + static_cast<size_t>(kasg[i]);
                    if (k.bits[kcell]) v = 1;
                }
                t.bits[cell] = v;
            }
            break;
        }
        }
        return memo_.emplace(f, std::move(t)).first->second;
    }

private:
    void decode(size_t cell, size_t nvars, std::vector<int>& asg) const {
        for (size_t i = nvars; i-- > 0;) {
            asg[i] = static_cast<int>(cell % static_cast<size_t>(m_->size()));
            cell /= static_cast<size_t>(m_->size());
        }
    }

    static size_t pos(const std::vector<int>& vars, int v) {
        for (size_t i = 0; i < vars.size(); ++i)
            if (vars[i] == v) return i;
        throw EvalError("variable lookup failed");
    }

    size_t project(const TruthTable& k, const std::vector<int>& vars,
                   const std::vector<int>& asg) const {
        size_t cell = 0;
        for (int v : k.vars)
            cell = cell * static_cast<size_t>(m_->size()) + static_cast<size_t>(asg[pos(vars, v)]);
        return cell;
    }

    const FiniteStructure* m_;
    std::unordered_map<FormulaRef, TruthTable> memo_;
};

} // namespace detail

// H_Psi: same universe, R_phi interpreted as the satisfying assignments of
// phi in M (coordinates in sorted-free-variable order).
inline FiniteStructure transform_structure(const FiniteStructure& m, const CompiledTheory& c) {
    if (m.signature() != c.source_sig) throw CompileError("transform: signature mismatch");
    detail::TableEvaluator ev(m);
    std::vector<std::vector<std::vector<int>>> tables(c.lpsi.size());
    for (size_t i = 0; i < c.subs.size(); ++i) {
        const detail::TruthTable& t = ev.table(c.subs[i]);
        int sym = c.lpsi.find(c.names[i]);
        std::vector<int> asg(t.vars.size());
        for (size_t cell = 0; cell < t.bits.size(); ++cell) {
            if (!t.bits[cell]) continue;
            size_t rem = cell;
            for (size_t j = t.vars.size(); j-- > 0;) {
                asg[j] = static_cast<int>(rem % static_cast<size_t>(m.size()));
                rem /= static_cast<size_t>(m.size());
            }
            tables[static_cast<size_t>(sym)].push_back(asg);
        }
    }
    return FiniteStructure(c.lpsi, m.size(), std::move(tables));
}

// Reads the source structure back off the atom relations.
inline FiniteStructure inverse_transform(const FiniteStructure& n, const CompiledTheory& c) {
    if (n.signature() != c.lpsi) throw CompileError("inverse_transform: not an L_Psi structure");
    const Signature& sig = c.source_sig;
    std::vector<std::vector<std::vector<int>>> tables(sig.size());
    for (size_t s = 0; s < sig.size(); ++s) {
        int r = sig.arity(static_cast<int>(s));
        std::vector<int> vars(static_cast<size_t>(r));
        for (int i = 0; i < r; ++i) vars[static_cast<size_t>(i)] = i;
        FormulaRef atom = mk_atom(sig.name(static_cast<int>(s)), vars);
        auto it = c.sub_index.find(atom);
        if (it == c.sub_index.end())
            throw CompileError("inverse_transform: missing atom relation for '" +
                               sig.name(static_cast<int>(s)) + "'");
        int sym = n.signature().find(c.names[static_cast<size_t>(it->second)]);
        // relation coordinates and variable order coincide for canonical atoms
        tables[s] = n.table(sym);
    }
    return FiniteStructure(sig, n.size(), std::move(tables));
}

// true iff no tuple of N realizes any Sigma_Phi
inline bool omits_type(const FiniteStructure& n, const OmittedType& om) {
    size_t cells = 1;
    for (size_t i = 0; i < om.vars.size(); ++i) cells *= static_cast<size_t>(n.size());
    for (size_t cell = 0; cell < cells; ++cell) {
        Assignment asg;
        size_t rem = cell;
        for (size_t i = om.vars.size(); i-- > 0;) {
            asg.bind(om.vars[i], static_cast<int>(rem % static_cast<size_t>(n.size())));
            rem /= static_cast<size_t>(n.size());
        }
        bool realizes = true;
        for (FormulaRef lit : om.literals)
            if (!evaluate(n, lit, asg)) {
                realizes = false;
                break;
            }
        if (realizes) return false;
    }
    return true;
}

inline bool omits_all(const FiniteStructure& n, const std::vector<OmittedType>& gamma) {
    for (const OmittedType& om : gamma)
        if (!omits_type(n, om)) return false;
    return true;
}

inline bool models_axioms(const FiniteStructure& n, const CompiledTheory& c) {
    for (FormulaRef ax : c.axioms)
        if (!evaluate_sentence(n, ax)) return false;
    return true;
}

} // namespace fmw
