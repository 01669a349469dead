#include <catch2/catch_amalgamated.hpp>

#include "fmw/compiler.hpp"
#include "fmw/parser.hpp"
#include "fmw/printer.hpp"
#include "fmw/scott.hpp"
#include "fmw/theory.hpp"

#include "support/builders.hpp"

using namespace fmw;
using namespace fmw::testing;

namespace {

bool contains(const std::vector<FormulaRef>& v, FormulaRef f) {
    return std::find(v.begin(), v.end(), f) != v.end();
}

} // namespace

TEST_CASE("subformula closure basics") {
    Signature sig({{"P", 1}});
    FormulaRef atom = parse_formula("P(x0)", sig);
    FormulaRef psi = mk_exists(0, atom);
    auto subs = subformulas(psi, sig);
    CHECK(contains(subs, atom));
    CHECK(contains(subs, psi));
    // closed under children: every child of every sub is a sub
    for (FormulaRef f : subs)
        for (FormulaRef k : arena().node(f).kids) CHECK(contains(subs, k));
    // post-order: children precede parents
    for (size_t i = 0; i < subs.size(); ++i)
        for (FormulaRef k : arena().node(subs[i]).kids) {
            size_t kpos = static_cast<size_t>(
                std::find(subs.begin(), subs.end(), k) - subs.begin());
            CHECK(kpos < i);
        }
}

TEST_CASE("sub-conjunctions are not sub-formulas") {
    Signature sig({{"A", 0}, {"B", 0}});
    FormulaRef a = parse_formula("A()", sig);
    FormulaRef b = parse_formula("B()", sig);
    FormulaRef conj = mk_conj({a, b});
    auto subs = subformulas(conj, sig);
    CHECK(contains(subs, conj));
    CHECK(contains(subs, a));
    CHECK(contains(subs, b));
    CHECK_FALSE(contains(subs, mk_conj({a})));
}

TEST_CASE("compile of exists-P has the bridge and unit axioms") {
    Signature sig({{"P", 1}});
    FormulaRef atom = parse_formula("P(x0)", sig);
    FormulaRef psi = mk_exists(0, atom);
    CompiledTheory c = compile_sentence(psi, sig);

    CHECK(c.lpsi.find(c.name_of(atom)) >= 0);
    CHECK(c.lpsi.arity(c.lpsi.find(c.name_of(atom))) == 1);
    CHECK(c.lpsi.arity(c.lpsi.find(c.name_of(psi))) == 0);

    // exists-bridge for psi: exists x0 R_P(x0) <-> R_psi
    FormulaRef bridge = mk_conj({mk_implies(mk_exists(0, c.r_atom(atom)), c.r_atom(psi)),
                                 mk_implies(c.r_atom(psi), mk_exists(0, c.r_atom(atom)))});
    CHECK(contains(c.axioms, bridge));
    // unit axiom for the saturated sentence
    CHECK(contains(c.axioms, c.r_atom(c.saturated)));
    // omitted types come only from the mandated saturation wrapper
    for (const OmittedType& om : c.omitted) {
        bool from_original = om.conj == psi || om.conj == atom;
        CHECK_FALSE(from_original);
    }
}

TEST_CASE("compile of a negation has the neg bridge") {
    Signature sig({{"A", 0}});
    FormulaRef a = parse_formula("A()", sig);
    FormulaRef psi = mk_neg(a);
    CompiledTheory c = compile_sentence(psi, sig);
    FormulaRef bridge = mk_conj({mk_implies(mk_neg(c.r_atom(a)), c.r_atom(psi)),
                                 mk_implies(c.r_atom(psi), mk_neg(c.r_atom(a)))});
    CHECK(contains(c.axioms, bridge));
    // R_{not A} holds in the transform of a model of psi
    std::vector<std::vector<std::vector<int>>> empty_tables(1);
    FiniteStructure m(sig, 1, std::move(empty_tables));
    FiniteStructure h = transform_structure(m, c);
    CHECK(evaluate_sentence(h, c.r_atom(psi)));
}

TEST_CASE("compile of the empty conjunction") {
    Signature sig;
    FormulaRef psi = mk_conj({});
    CompiledTheory c = compile_sentence(psi, sig);
    // Sigma for the empty conjunction holds only the negative literal
    bool found = false;
    for (const OmittedType& om : c.omitted)
        if (om.conj == psi) {
            found = true;
            CHECK(om.literals.size() == 1);
            CHECK(om.literals[0] == mk_neg(c.r_atom(psi)));
        }
    CHECK(found);
    // omission is vacuous alongside the unit axiom
    Signature esig;
    FiniteStructure m(esig, 1, {});
    FiniteStructure h = transform_structure(m, c);
    CHECK(models_axioms(h, c));
    CHECK(omits_all(h, c.omitted));
}

TEST_CASE("transform of the one-point P structure") {
    Signature sig({{"P", 1}});
    FormulaRef atom = parse_formula("P(x0)", sig);
    FormulaRef psi = mk_exists(0, atom);
    CompiledTheory c = compile_sentence(psi, sig);
    std::vector<std::vector<std::vector<int>>> tables(1);
    tables[0].push_back({0});
    FiniteStructure m(sig, 1, std::move(tables));
    FiniteStructure h = transform_structure(m, c);

    int rp = h.signature().find(c.name_of(atom));
    REQUIRE(rp >= 0);
    CHECK(h.table(rp) == std::vector<std::vector<int>>{{0}});
    CHECK(evaluate_sentence(h, c.r_atom(psi)));
    CHECK(models_axioms(h, c));
    CHECK(omits_all(h, c.omitted));

    // query through the complete-theory handle
    TheoryHandle th = complete_theory_of(h);
    CHECK(th.entails(mk_exists(0, c.r_atom(atom))));
    CHECK_FALSE(th.entails(mk_neg(mk_exists(0, c.r_atom(atom)))));
}

TEST_CASE("failing unit axiom when M does not model Psi") {
    Signature sig({{"P", 1}});
    FormulaRef psi = mk_exists(0, parse_formula("P(x0)", sig));
    CompiledTheory c = compile_sentence(psi, sig);
    std::vector<std::vector<std::vector<int>>> tables(1); // P empty
    FiniteStructure m(sig, 1, std::move(tables));
    FiniteStructure h = transform_structure(m, c);
    CHECK_FALSE(evaluate_sentence(h, c.r_atom(psi)));
    CHECK_FALSE(models_axioms(h, c)); // the unit axiom fails
}

TEST_CASE("round trip inverse_transform . transform_structure = id") {
    Signature sig({{"R", 2}});
    FormulaRef psi = parse_formula("Exists x0 . Exists x1 . R(x0,x1)", sig);
    CompiledTheory c = compile_sentence(psi, sig);
    uint64_t state = 3;
    auto rnd = [&state]() {
        state = state * 6364136223846793005ull + 1442695040888963407ull;
        return state >> 33;
    };
    for (int trial = 0; trial < 30; ++trial) {
        int n = 1 + static_cast<int>(rnd() % 4);
        FiniteStructure m = digraph_from_mask(n, rnd());
        FiniteStructure h = transform_structure(m, c);
        CHECK(inverse_transform(h, c) == m);
    }
    // empty atom relation reads back as an empty table
    FiniteStructure empty = antichain(2);
    CHECK(inverse_transform(transform_structure(empty, c), c) == empty);
}

TEST_CASE("isomorphism transport through the transform") {
    Signature sig({{"R", 2}});
    FormulaRef psi = parse_formula("Exists x0 . R(x0,x0)", sig);
    CompiledTheory c = compile_sentence(psi, sig);
    FiniteStructure m = chain(3);
    std::vector<int> perm = {2, 0, 1};
    FiniteStructure k = m.relabeled(perm);
    FiniteStructure hm = transform_structure(m, c);
    FiniteStructure hk = transform_structure(k, c);
    CHECK(is_isomorphism(hm, hk, perm));
}

TEST_CASE("omits_all flags a tuple realizing Sigma") {
    Signature sig({{"A", 0}, {"B", 0}});
    FormulaRef a = parse_formula("A()", sig);
    FormulaRef b = parse_formula("B()", sig);
    FormulaRef psi = mk_conj({a, b});
    CompiledTheory c = compile_sentence(psi, sig);

    std::vector<std::vector<std::vector<int>>> tables(2);
    tables[0].push_back({});
    tables[1].push_back({});
    FiniteStructure m(sig, 1, std::move(tables));
    FiniteStructure h = transform_structure(m, c);
    CHECK(omits_all(h, c.omitted));

    // drop the R_{A and B} bit while keeping R_A, R_B: realizes Sigma_Phi
    std::vector<std::vector<std::vector<int>>> broken(h.signature().size());
    for (size_t s = 0; s < h.signature().size(); ++s) broken[s] = h.table(static_cast<int>(s));
    int conj_sym = h.signature().find(c.name_of(psi));
    broken[static_cast<size_t>(conj_sym)].clear();
    FiniteStructure hb(h.signature(), h.size(), std::move(broken));
    CHECK_FALSE(omits_all(hb, c.omitted));

    CHECK(omits_all(h, {}));
}

TEST_CASE("semantic equivalence: M models Psi iff H(M) models T and omits Gamma") {
    Signature sig({{"R", 2}});
    std::vector<FormulaRef> psis = {
        parse_formula("Exists x0 . R(x0,x0)", sig),
        parse_formula("Not Exists x0 . R(x0,x0)", sig),
        parse_formula("Exists x0 . And{Not R(x0,x0), Exists x1 . R(x0,x1)}", sig),
        parse_formula("And{Exists x0 . R(x0,x0), Not Exists x0 . Exists x1 . And{R(x0,x1), R(x1,x0), Not x0 = x1}}", sig),
    };
    for (FormulaRef psi : psis) {
        CompiledTheory c = compile_sentence(psi, sig);
        for (int n = 1; n <= 3; ++n)
            for (uint64_t mask = 0; mask < (1ull << (n * n)); mask += (n == 3 ? 37 : 1)) {
                FiniteStructure m = digraph_from_mask(n, mask);
                FiniteStructure h = transform_structure(m, c);
                bool lhs = evaluate_sentence(m, psi);
                bool rhs = models_axioms(h, c) && omits_all(h, c.omitted);
                CHECK(lhs == rhs);
            }
    }
}

TEST_CASE("compile rejects non-sentences") {
    Signature sig({{"P", 1}});
    CHECK_THROWS_AS(compile_sentence(parse_formula("P(x0)", sig), sig), CompileError);
    CHECK_THROWS_AS(subformulas(parse_formula("P(x0)", sig), sig), CompileError);
}
