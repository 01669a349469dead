#pragma once

#include <string>
#include <vector>

#include "fmw/compiler.hpp"
#include "fmw/isolation.hpp"
#include "fmw/pool.hpp"
#include "fmw/theory.hpp"

namespace fmw {

struct CompletionStepResult {
    TheoryHandle handle;
    std::vector<FormulaRef> added; // the new  not-exists axioms, in pool order
};

// One step of the completion chain: for every candidate formula that
// isolates some Sigma_Phi under the handle's bounded semantics, add the
// axiom not exists x-bar phi. Idempotent at the fixpoint: once the axiom is
// present, the candidate is inconsistent with the handle and no longer
// isolates anything.
inline CompletionStepResult completion_step(const TheoryHandle& t, const CompiledTheory& c,
                                            const PoolSpec& spec = {}) {
    if (t.is_complete()) throw TheoryError("completion_step needs a bounded handle");
    if (!t.consistent()) throw TheoryError("inconsistent handle: no model within the bound");
    // isolation is judged against the input theory; the step adds all the
    // axioms at once, matching T^{alpha+1} = T^alpha + {...}
    CompletionStepResult result{t, {}};
    std::map<std::vector<int>, std::vector<FormulaRef>> pools;
    for (const OmittedType& om : c.omitted) {
        auto pit = pools.find(om.vars);
        if (pit == pools.end())
            pit = pools.emplace(om.vars, enumerate_pool(c.lpsi, om.vars, spec)).first;
        for (FormulaRef cand : pit->second) {
            if (!isolates(cand, om.literals, om.vars, t)) continue;
            FormulaRef body = cand;
            for (auto it = om.vars.rbegin(); it != om.vars.rend(); ++it) body = mk_exists(*it, body);
            FormulaRef axiom = mk_neg(body);
            if (t.has_axiom(axiom)) continue;
            bool fresh = std::find(result.added.begin(), result.added.end(), axiom) ==
                         result.added.end();
            if (fresh) result.added.push_back(axiom);
        }
    }
    if (!result.added.empty()) result.handle = t.extended(result.added);
    return result;
}

struct CompletionRun {
    TheoryHandle handle;
    int steps = 0;
    bool reached_fixpoint = false;
    std::vector<FormulaRef> added;
};

inline CompletionRun run_completion(const TheoryHandle& t, const CompiledTheory& c,
                                    int max_steps, const PoolSpec& spec = {}) {
    CompletionRun run{t, 0, false, {}};
    for (int i = 0; i < max_steps; ++i) {
        CompletionStepResult step = completion_step(run.handle, c, spec);
        run.handle = step.handle;
        ++run.steps;
        if (step.added.empty()) {
            run.reached_fixpoint = true;
            break;
        }
        for (FormulaRef f : step.added) run.added.push_back(f);
    }
    return run;
}

inline TheoryHandle bounded_handle_of(const CompiledTheory& c, int k) {
    return TheoryHandle::bounded(c.lpsi, c.axioms, k);
}

} // namespace fmw
