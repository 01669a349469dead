#pragma once

#include <cstdint>
#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "fmw/signature.hpp"

namespace fmw {

struct StructureError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Finite relational structure with universe 0..n-1. Tables are stored both
// as sorted tuple lists (for deterministic iteration and printing) and as
// flat bitsets (for O(1) membership during evaluation). Immutable after
// construction.
class FiniteStructure {
public:
    FiniteStructure(Signature sig, int n,
                    std::vector<std::vector<std::vector<int>>> tables)
        : sig_(std::move(sig)), n_(n), tuples_(std::move(tables)) {
        if (n_ < 1) throw StructureError("universe must have size >= 1");
        if (tuples_.size() != sig_.size())
            throw StructureError("table count does not match signature");
        bits_.resize(sig_.size());
        for (size_t s = 0; s < sig_.size(); ++s) {
            int r = sig_.arity(static_cast<int>(s));
            bits_[s].assign(cells(r), 0);
            for (auto& t : tuples_[s]) {
                if (static_cast<int>(t.size()) != r)
                    throw StructureError("tuple arity mismatch in table for '" +
                                         sig_.name(static_cast<int>(s)) + "'");
                for (int e : t)
                    if (e < 0 || e >= n_)
                        throw StructureError("tuple entry out of universe in table for '" +
                                             sig_.name(static_cast<int>(s)) + "'");
                bits_[s][index(t)] = 1;
            }
            std::sort(tuples_[s].begin(), tuples_[s].end());
            tuples_[s].erase(std::unique(tuples_[s].begin(), tuples_[s].end()),
                             tuples_[s].end());
        }
    }

    const Signature& signature() const { return sig_; }
    int size() const { return n_; }

    bool holds(int sym, const std::vector<int>& tuple) const {
        return bits_[static_cast<size_t>(sym)][index(tuple)] != 0;
    }

    bool holds_raw(int sym, size_t cell) const {
        return bits_[static_cast<size_t>(sym)][cell] != 0;
    }

    const std::vector<std::vector<int>>& table(int sym) const {
        return tuples_[static_cast<size_t>(sym)];
    }

    size_t cells(int arity) const {
        size_t c = 1;
        for (int i = 0; i < arity; ++i) c *= static_cast<size_t>(n_);
        return c;
    }

    size_t index(const std::vector<int>& tuple) const {
        size_t idx = 0;
        for (size_t i = 0; i < tuple.size(); ++i)
            idx = idx * static_cast<size_t>(n_) + static_cast<size_t>(tuple[i]);
        return idx;
    }

    // Relabel by a permutation of the universe: element i becomes perm[i].
    FiniteStructure relabeled(const std::vector<int>& perm) const {
        std::vector<std::vector<std::vector<int>>> tabs(sig_.size());
        for (size_t s = 0; s < sig_.size(); ++s)
            for (const auto& t : tuples_[s]) {
                std::vector<int> u(t.size());
                for (size_t i = 0; i < t.size(); ++i) u[i] = perm[static_cast<size_t>(t[i])];
                tabs[s].push_back(std::move(u));
            }
        return FiniteStructure(sig_, n_, std::move(tabs));
    }

    bool operator==(const FiniteStructure& o) const {
        return sig_ == o.sig_ && n_ == o.n_ && tuples_ == o.tuples_;
    }

private:
    Signature sig_;
    int n_;
    std::vector<std::vector<std::vector<int>>> tuples_;
    std::vector<std::vector<uint8_t>> bits_;
};

} // namespace fmw
