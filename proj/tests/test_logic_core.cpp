#include <catch2/catch_amalgamated.hpp>

#include <functional>
#include <set>

#include "fmw/bruteforce.hpp"
#include "fmw/evaluate.hpp"
#include "fmw/formula.hpp"
#include "fmw/json_io.hpp"
#include "fmw/parser.hpp"
#include "fmw/printer.hpp"

#include "support/builders.hpp"
#include "support/naive_eval.hpp"

using namespace fmw;
using namespace fmw::testing;

TEST_CASE("parse single atom") {
    Signature sig({{"P", 1}});
    FormulaRef f = parse_formula("P(x0)", sig);
    const FormulaNode& n = arena().node(f);
    CHECK(n.kind == FKind::Atom);
    CHECK(arena().symbol_name(n.symbol) == "P");
    REQUIRE(n.args.size() == 1);
    CHECK(n.args[0] == 0);
}

TEST_CASE("conj children are a set: duplicates collapse") {
    Signature sig({{"P", 1}});
    FormulaRef f = parse_formula("And{P(x0), P(x0)}", sig);
    const FormulaNode& n = arena().node(f);
    REQUIRE(n.kind == FKind::Conj);
    CHECK(n.kids.size() == 1);
    CHECK(f == mk_conj({parse_formula("P(x0)", sig)}));
}

TEST_CASE("hand parse of nested exists/conj") {
    Signature sig({{"R", 2}});
    FormulaRef f = parse_formula("Exists x1 . And{R(x0,x1), Not R(x1,x0)}", sig);
    const FormulaNode& n = arena().node(f);
    REQUIRE(n.kind == FKind::Exists);
    CHECK(n.var == 1);
    const FormulaNode& body = arena().node(n.kids[0]);
    REQUIRE(body.kind == FKind::Conj);
    CHECK(body.kids.size() == 2);
    CHECK(free_vars(f) == std::vector<int>{0});
}

TEST_CASE("parse errors carry positions") {
    Signature sig({{"P", 1}});
    CHECK_THROWS_AS(parse_formula("P(x0", sig), ParseError);
    CHECK_THROWS_AS(parse_formula("Q(x0)", sig), ParseError);   // unknown symbol
    CHECK_THROWS_AS(parse_formula("P(x0,x1)", sig), ParseError); // arity mismatch
    CHECK_THROWS_AS(parse_formula("", sig), ParseError);
    try {
        parse_formula("And{P(x0), Q(x1)}", sig);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.position == 11);
    }
}

TEST_CASE("print/parse round trips") {
    Signature sig({{"R", 2}, {"P", 1}, {"Q", 0}});
    std::vector<std::string> texts = {
        "P(x0)",
        "Q()",
        "x0 = x1",
        "Not And{}",
        "And{P(x0), R(x0, x1), Exists x2 . R(x1, x2)}",
        "Exists x0 . Not Exists x1 . And{R(x0, x1), Not x0 = x1}",
    };
    for (const auto& t : texts) {
        FormulaRef f = parse_formula(t, sig);
        CHECK(parse_formula(print_formula(f), sig) == f);
    }
}

TEST_CASE("evaluate basics") {
    Signature psig({{"P", 1}});
    std::vector<std::vector<std::vector<int>>> ptables(1);
    ptables[0].push_back({0});
    FiniteStructure m(psig, 1, std::move(ptables));
    Assignment a;
    a.bind(0, 0);
    CHECK(evaluate(m, parse_formula("P(x0)", psig), a));
    CHECK(evaluate(m, mk_true(), a));
    CHECK(evaluate_sentence(m, mk_true()));

    FiniteStructure two = chain(2);
    Assignment b;
    b.bind(0, 1);
    CHECK_FALSE(evaluate(two, parse_formula("Exists x1 . R(x0,x1)", sig_r2()), b));
    b.bind(0, 0);
    CHECK(evaluate(two, parse_formula("Exists x1 . R(x0,x1)", sig_r2()), b));
}

TEST_CASE("evaluate error paths") {
    FiniteStructure two = chain(2);
    Assignment empty;
    CHECK_THROWS_AS(evaluate(two, parse_formula("R(x0,x1)", sig_r2()), empty), EvalError);
    Signature other({{"S", 1}});
    Assignment a;
    a.bind(0, 0);
    CHECK_THROWS_AS(evaluate(two, parse_formula("S(x0)", other), a), EvalError);
}

TEST_CASE("evaluate agrees with the naive oracle on random formulas") {
    // hand-rolled generator over sig {R:2, P:1}, structures n <= 3
    Signature sig({{"R", 2}, {"P", 1}});
    uint64_t state = 0x12345678;
    auto rnd = [&state](uint64_t bound) {
        state += 0x9e3779b97f4a7c15ull;
        uint64_t z = state;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        z = z ^ (z >> 31);
        return z % bound;
    };
    std::function<FormulaRef(int, int)> gen = [&](int depth, int maxvar) -> FormulaRef {
        uint64_t pick = rnd(depth == 0 ? 3 : 6);
        switch (pick) {
        case 0:
            return mk_atom("P", {static_cast<int>(rnd(static_cast<uint64_t>(maxvar)))});
        case 1:
            return mk_atom("R", {static_cast<int>(rnd(static_cast<uint64_t>(maxvar))),
                                 static_cast<int>(rnd(static_cast<uint64_t>(maxvar)))});
        case 2:
            return mk_equal(static_cast<int>(rnd(static_cast<uint64_t>(maxvar))),
                            static_cast<int>(rnd(static_cast<uint64_t>(maxvar))));
        case 3:
            return mk_neg(gen(depth - 1, maxvar));
        case 4: {
            std::vector<FormulaRef> kids;
            uint64_t cnt = rnd(3);
            for (uint64_t i = 0; i < cnt; ++i) kids.push_back(gen(depth - 1, maxvar));
            return mk_conj(std::move(kids));
        }
        default:
            return mk_exists(maxvar, gen(depth - 1, maxvar + 1));
        }
    };
    for (int trial = 0; trial < 1000; ++trial) {
        int n = 1 + static_cast<int>(rnd(3));
        // symbol ids are sorted by name: P = 0, R = 1
        std::vector<std::vector<std::vector<int>>> tables(2);
        for (int i = 0; i < n; ++i) {
            if (rnd(2)) tables[0].push_back({i});
            for (int j = 0; j < n; ++j)
                if (rnd(2)) tables[1].push_back({i, j});
        }
        FiniteStructure m(sig, n, std::move(tables));
        FormulaRef f = gen(3, 2);
        Assignment a;
        std::map<int, int> na;
        for (int v = 0; v < 2; ++v) {
            int e = static_cast<int>(rnd(static_cast<uint64_t>(n)));
            a.bind(v, e);
            na[v] = e;
        }
        CHECK(evaluate(m, f, a) == naive_eval(m, f, na));
    }
}

TEST_CASE("isomorphic_bruteforce on small cases") {
    FiniteStructure a2 = antichain(2);
    auto id = isomorphic_bruteforce(a2, a2);
    REQUIRE(id.has_value());
    CHECK(*id == std::vector<int>{0, 1});

    CHECK_FALSE(isomorphic_bruteforce(chain(3), antichain(3)).has_value());

    FiniteStructure rev = digraph(2, {{1, 0}});
    auto f = isomorphic_bruteforce(chain(2), rev);
    REQUIRE(f.has_value());
    CHECK(*f == std::vector<int>{1, 0});
}

TEST_CASE("isomorphic_bruteforce is symmetric in presence") {
    uint64_t state = 7;
    auto rnd = [&state]() {
        state = state * 6364136223846793005ull + 1442695040888963407ull;
        return state >> 33;
    };
    for (int trial = 0; trial < 60; ++trial) {
        int n = 2 + static_cast<int>(rnd() % 3);
        FiniteStructure m = digraph_from_mask(n, rnd());
        FiniteStructure k = digraph_from_mask(n, rnd());
        CHECK(isomorphic_bruteforce(m, k).has_value() == isomorphic_bruteforce(k, m).has_value());
    }
}

TEST_CASE("signature mismatch is an error") {
    Signature s1({{"R", 2}});
    Signature s2({{"S", 2}});
    FiniteStructure a(s1, 1, {{}});
    FiniteStructure b(s2, 1, {{}});
    CHECK_THROWS_AS(isomorphic_bruteforce(a, b), StructureError);
}

TEST_CASE("automorphism orbits") {
    auto orbits1 = automorphism_orbits(antichain(2), 1);
    REQUIRE(orbits1.size() == 1);
    CHECK(orbits1[0].size() == 2);

    auto orbits2 = automorphism_orbits(chain(2), 1);
    CHECK(orbits2.size() == 2);

    // 4-cycle, pairs: diagonal, adjacent, opposite
    auto orbits3 = automorphism_orbits(cycle(4), 2);
    CHECK(orbits3.size() == 3);

    auto orbits0 = automorphism_orbits(chain(3), 0);
    REQUIRE(orbits0.size() == 1);
    CHECK(orbits0[0] == std::vector<std::vector<int>>{{}});
}

TEST_CASE("canonical digest is set-insensitive and code-sensitive") {
    Signature sig({{"P", 1}, {"Q", 1}});
    FormulaRef a = parse_formula("P(x0)", sig);
    FormulaRef b = parse_formula("Q(x0)", sig);
    CHECK(canonical_digest(mk_conj({a, b})) == canonical_digest(mk_conj({b, a})));
    CHECK(canonical_digest(mk_conj({a})) != canonical_digest(a));
    CHECK(canonical_digest(a) != canonical_digest(b));
}

TEST_CASE("digest collision referee over a generated corpus") {
    // distinct interned nodes must have distinct digests
    Signature sig({{"R", 2}});
    std::vector<FormulaRef> corpus;
    for (int v = 0; v < 3; ++v)
        for (int w = 0; w < 3; ++w) corpus.push_back(mk_atom("R", {v, w}));
    size_t base = corpus.size();
    for (size_t i = 0; i < base; ++i) {
        corpus.push_back(mk_neg(corpus[i]));
        for (size_t j = i + 1; j < base; ++j) {
            corpus.push_back(mk_conj({corpus[i], corpus[j]}));
            corpus.push_back(mk_exists(0, mk_conj({corpus[i], mk_neg(corpus[j])})));
        }
    }
    std::set<FormulaRef> uniq(corpus.begin(), corpus.end());
    std::set<std::string> digests;
    for (FormulaRef f : uniq) digests.insert(canonical_digest(f));
    CHECK(digests.size() == uniq.size());
}

TEST_CASE("structure json round trip and validation") {
    json j = json::parse(R"({
      "signature": {"relations": {"R": 2}},
      "size": 2,
      "tables": {"R": [[0,1]]}
    })");
    FiniteStructure m = structure_from_json(j);
    CHECK(m == chain(2));
    CHECK(structure_from_json(structure_to_json(m)) == m);

    json bad = j;
    bad["tables"]["R"].push_back(json::array({0, 5}));
    CHECK_THROWS_AS(structure_from_json(bad), IoError);

    json badar = j;
    badar["tables"]["R"].push_back(json::array({0}));
    CHECK_THROWS_AS(structure_from_json(badar), IoError);
}

TEST_CASE("function relationalization validates totality and functionality") {
    json j = json::parse(R"({
      "signature": {"relations": {}, "functions": {"F": 1}},
      "size": 2,
      "tables": {"F": [[0,1],[1,0]]}
    })");
    FiniteStructure m = structure_from_json(j);
    CHECK(m.signature().arity(m.signature().find("F")) == 2);

    json partial = j;
    partial["tables"]["F"] = json::array({json::array({0, 1})});
    CHECK_THROWS_AS(structure_from_json(partial), IoError);

    json multi = j;
    multi["tables"]["F"].push_back(json::array({0, 0}));
    CHECK_THROWS_AS(structure_from_json(multi), IoError);
}

TEST_CASE("partial map stays injective") {
    PartialMap pm(3, 3);
    CHECK(pm.extend(0, 1));
    CHECK(pm.extend(0, 1));
    CHECK_FALSE(pm.extend(1, 1));
    CHECK(pm.extend(1, 2));
    CHECK(pm.domain_size() == 2);
    pm.remove(0);
    CHECK(pm.extend(2, 1));
}
