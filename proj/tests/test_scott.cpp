#include <catch2/catch_amalgamated.hpp>

#include <map>
#include <set>

#include "fmw/printer.hpp"
#include "fmw/scott.hpp"

#include "support/builders.hpp"

using namespace fmw;
using namespace fmw::testing;

namespace {

// partition as a set of classes (sets of tuples), for order-free comparison
std::set<std::set<std::vector<int>>> as_classes(const std::vector<int>& part, int n, int k) {
    auto tuples = all_tuples(n, k);
    std::map<int, std::set<std::vector<int>>> by_class;
    for (size_t i = 0; i < tuples.size(); ++i) by_class[part[i]].insert(tuples[i]);
    std::set<std::set<std::vector<int>>> out;
    for (auto& [c, members] : by_class) out.insert(members);
    return out;
}

std::set<std::set<std::vector<int>>> orbit_classes(const FiniteStructure& m, int k) {
    std::set<std::set<std::vector<int>>> out;
    for (const auto& orbit : automorphism_orbits(m, k))
        out.insert(std::set<std::vector<int>>(orbit.begin(), orbit.end()));
    return out;
}

} // namespace

TEST_CASE("stage-0 formula of the 2-antichain is the literal conjunction") {
    FiniteStructure m = antichain(2);
    FormulaRef f = stage_formula(m, {0}, 0);
    FormulaRef expected = mk_conj({mk_neg(mk_atom("R", {0, 0}))});
    CHECK(f == expected);
}

TEST_CASE("stage-0 formula of the empty tuple over an atom-free signature is true") {
    FiniteStructure m = antichain(2);
    CHECK(stage_formula(m, {}, 0) == mk_true());
}

TEST_CASE("stage-1 separates the two ends of the 2-chain") {
    FiniteStructure m = chain(2);
    CHECK(canonical_digest(stage_formula(m, {0}, 1)) != canonical_digest(stage_formula(m, {1}, 1)));
    CHECK(canonical_digest(stage_formula(m, {0}, 0)) == canonical_digest(stage_formula(m, {1}, 0)));
}

TEST_CASE("refine_to_fixpoint on the 2-chain") {
    FiniteStructure m = chain(2);
    PartitionSystem ps(m);
    auto part = ps.partition(ps.beta(), 1);
    CHECK(part == std::vector<int>{0, 1});
}

TEST_CASE("antichain is a single class per pattern, beta = 0 for 1-tuples") {
    for (int n = 2; n <= 4; ++n) {
        FiniteStructure m = antichain(n);
        PartitionSystem ps(m);
        CHECK(ps.class_count(ps.beta(), 1) == 1);
        CHECK(ps.beta() == 0);
    }
}

TEST_CASE("4-cycle stable 2-tuple classes equal automorphism orbits") {
    FiniteStructure m = cycle(4);
    PartitionSystem ps(m);
    CHECK(as_classes(ps.partition(ps.beta(), 2), 4, 2) == orbit_classes(m, 2));
    // equal, adjacent, opposite
    CHECK(ps.class_count(ps.beta(), 2) == 3);
}

TEST_CASE("refinement monotonicity and beta <= n on random structures") {
    uint64_t state = 99;
    auto rnd = [&state]() {
        state = state * 6364136223846793005ull + 1442695040888963407ull;
        return state >> 33;
    };
    for (int trial = 0; trial < 40; ++trial) {
        int n = 1 + static_cast<int>(rnd() % 5);
        FiniteStructure m = digraph_from_mask(n, rnd());
        PartitionSystem ps(m);
        CHECK(ps.beta() <= n);
        for (int stage = 0; stage + 1 < ps.stages(); ++stage)
            for (int k = 0; k <= std::min(3, ps.cap()); ++k) {
                // refinement: same class at stage+1 implies same class at stage
                auto coarse = ps.partition(stage, k);
                auto fine = ps.partition(stage + 1, k);
                std::map<int, int> image;
                for (size_t i = 0; i < fine.size(); ++i) {
                    auto it = image.find(fine[i]);
                    if (it == image.end())
                        image.emplace(fine[i], coarse[i]);
                    else
                        CHECK(it->second == coarse[i]);
                }
            }
    }
}

TEST_CASE("orbit coincidence at the fixpoint, n <= 4 sampled") {
    std::vector<FiniteStructure> ms = {chain(2), chain(3), chain(4), antichain(3), cycle(3),
                                       cycle(4), digraph(3, {{0, 1}, {1, 2}, {2, 0}}),
                                       digraph(4, {{0, 1}, {1, 0}, {2, 3}})};
    for (const auto& m : ms) {
        PartitionSystem ps(m);
        for (int k = 0; k <= std::min(3, m.size()); ++k)
            CHECK(as_classes(ps.partition(ps.beta(), k), m.size(), k) == orbit_classes(m, k));
    }
}

TEST_CASE("scott invariant equals under relabeling, differs for non-isomorphic") {
    FiniteStructure m = chain(3);
    FiniteStructure relabeled = m.relabeled({2, 0, 1});
    CHECK(scott_invariant(m).digest == scott_invariant(relabeled).digest);
    CHECK(scott_invariant(chain(3)).digest != scott_invariant(antichain(3)).digest);
    CHECK(iso_via_invariant(chain(2), digraph(2, {{1, 0}})));
    CHECK_FALSE(iso_via_invariant(chain(3), antichain(3)));
    CHECK(iso_via_invariant(chain(3), chain(3)));
}

TEST_CASE("scott sentence digest is relabeling-invariant") {
    FiniteStructure m = chain(3);
    FiniteStructure k = m.relabeled({1, 2, 0});
    CHECK(canonical_digest(scott_sentence(m)) == canonical_digest(scott_sentence(k)));
    CHECK(canonical_digest(scott_sentence(chain(3))) !=
          canonical_digest(scott_sentence(antichain(3))));
}

TEST_CASE("1-point structure over the empty signature has a stable scott sentence") {
    Signature empty;
    FiniteStructure one(empty, 1, {});
    FormulaRef sc1 = scott_sentence(one);
    FormulaRef sc2 = scott_sentence(FiniteStructure(empty, 1, {}));
    CHECK(sc1 == sc2);
    CHECK(evaluate_sentence(one, sc1));
    FiniteStructure two(empty, 2, {});
    CHECK_FALSE(evaluate_sentence(two, sc1));
    CHECK_FALSE(evaluate_sentence(one, scott_sentence(two)));
}

TEST_CASE("M satisfies its own scott sentence; models decide isomorphism") {
    std::vector<FiniteStructure> ms = {chain(2), chain(3), antichain(3), cycle(3),
                                       digraph(3, {{0, 1}, {1, 2}, {2, 0}}),
                                       digraph(3, {{0, 0}, {0, 1}})};
    for (const auto& m : ms) {
        FormulaRef sc = scott_sentence(m);
        CHECK(check_models_scott(m, sc));
        for (const auto& k : ms) {
            bool expected = isomorphic_bruteforce(m, k).has_value();
            CHECK(check_models_scott(k, sc) == expected);
            CHECK(iso_via_invariant(m, k) == expected);
        }
    }
}

// Ties the fast invariant path to the exact ASTs: class keys agree with
// stage-formula digest equality for every pair of tuples.
TEST_CASE("derived class keys match stage-formula digests") {
    std::vector<FiniteStructure> ms = {chain(3), cycle(3), antichain(2),
                                       digraph(3, {{0, 1}, {1, 1}})};
    for (const auto& m : ms) {
        PartitionSystem ps(m);
        StageFormulaBuilder builder(m);
        for (int stage = 0; stage <= ps.beta() + 1; ++stage)
            for (int k = 0; k <= 3; ++k) {
                auto tuples = all_tuples(m.size(), k);
                auto part = ps.partition(stage, k);
                for (size_t i = 0; i < tuples.size(); ++i)
                    for (size_t j = i; j < tuples.size(); ++j) {
                        bool same_key = part[i] == part[j];
                        bool same_formula = builder.stage_formula(tuples[i], stage) ==
                                            builder.stage_formula(tuples[j], stage);
                        CHECK(same_key == same_formula);
                    }
            }
    }
}

TEST_CASE("scott invariant equality matches scott sentence equality") {
    std::vector<FiniteStructure> ms;
    for (uint64_t mask = 0; mask < 16; ++mask) ms.push_back(digraph_from_mask(2, mask));
    ms.push_back(chain(3));
    ms.push_back(antichain(3));
    ms.push_back(cycle(3));
    std::vector<std::string> inv, sc;
    for (const auto& m : ms) {
        inv.push_back(scott_invariant(m).digest);
        sc.push_back(canonical_digest(scott_sentence(m)));
    }
    for (size_t i = 0; i < ms.size(); ++i)
        for (size_t j = 0; j < ms.size(); ++j)
            CHECK((inv[i] == inv[j]) == (sc[i] == sc[j]));
}
