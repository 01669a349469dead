#pragma once

#include <string>

#include "fmw/formula.hpp"

namespace fmw {

// Canonical printer for the concrete grammar:
//   NAME(v,...)   v = w   Not F   And{F, F, ...}   Exists v . F
// Conj children are printed in digest order so printing is deterministic
// and independent of construction order.
inline void print_to(FormulaRef f, std::string& out) {
    FormulaArena& a = arena();
    const FormulaNode& n = a.node(f);
    switch (n.kind) {
    case FKind::Atom: {
        out += a.symbol_name(n.symbol);
        out += '(';
        for (size_t i = 0; i < n.args.size(); ++i) {
            if (i) out += ", ";
            out += 'x';
            out += std::to_string(static_cast<int>(n.args[i]));
        }
        out += ')';
        break;
    }
    case FKind::Equal:
        out += 'x';
        out += std::to_string(static_cast<int>(n.var));
        out += " = x";
        out += std::to_string(static_cast<int>(n.var2));
        break;
    case FKind::Neg:
        out += "Not ";
        print_to(n.kids[0], out);
        break;
    case FKind::Conj: {
        std::vector<std::pair<Digest, FormulaRef>> order;
        order.reserve(n.kids.size());
        for (FormulaRef k : n.kids) order.emplace_back(a.digest(k), k);
        std::sort(order.begin(), order.end());
        out += "And{";
        for (size_t i = 0; i < order.size(); ++i) {
            if (i) out += ", ";
            print_to(order[i].second, out);
        }
        out += '}';
        break;
    }
    case FKind::Exists:
        out += "Exists x";
        out += std::to_string(static_cast<int>(n.var));
        out += " . ";
        print_to(n.kids[0], out);
        break;
    }
}

inline std::string print_formula(FormulaRef f) {
    std::string out;
    print_to(f, out);
    return out;
}

} // namespace fmw
