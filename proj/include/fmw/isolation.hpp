#pragma once

#include <vector>

#include "fmw/formula.hpp"
#include "fmw/theory.hpp"

namespace fmw {

// theta isolates Sigma in T: T + exists x-bar theta is consistent, and
// T entails theta -> psi for every psi in Sigma. theta and Sigma share the
// given free-variable tuple.
inline bool isolates(FormulaRef theta, const std::vector<FormulaRef>& sigma,
                     const std::vector<int>& vars, const TheoryHandle& t) {
    uint64_t allowed = 0;
    for (int v : vars) allowed |= 1ull << v;
    if (free_mask(theta) & ~allowed) throw TheoryError("isolates: unbound variables in theta");
    for (FormulaRef psi : sigma)
        if (free_mask(psi) & ~allowed) throw TheoryError("isolates: unbound variables in Sigma");
    FormulaRef witness = theta;
    for (auto it = vars.rbegin(); it != vars.rend(); ++it) witness = mk_exists(*it, witness);
    if (!t.consistent_with({witness})) return false;
    // T entails theta -> psi for every psi in Sigma; equivalently theta
    // entails the conjunction, checked as one query
    FormulaRef imp = mk_implies(theta, mk_conj(sigma));
    for (auto it = vars.rbegin(); it != vars.rend(); ++it) imp = mk_forall(*it, imp);
    return t.entails(imp);
}

struct IsolationCertificate {
    FormulaRef theta;
    std::vector<FormulaRef> sigma;
    std::vector<int> vars;
};

} // namespace fmw
