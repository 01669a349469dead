#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <mutex>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "fmw/sha256.hpp"

namespace fmw {

// Infinitary-formula AST with set-coded conjunction nodes. Nodes are
// hash-consed into a process-wide arena; a FormulaRef is an index, and
// structural equality (under set semantics for Conj children) is exactly
// reference equality. Conj children are stored sorted and deduplicated.
using FormulaRef = uint32_t;

enum class FKind : uint8_t { Atom, Equal, Neg, Conj, Exists };

struct FormulaError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

constexpr int kMaxVar = 64;

struct FormulaNode {
    FKind kind;
    uint8_t var = 0;                 // Exists: bound variable; Equal: lhs
    uint8_t var2 = 0;                // Equal: rhs
    uint32_t symbol = 0;             // Atom: interned symbol-name id
    std::vector<uint8_t> args;       // Atom: variable tuple
    std::vector<FormulaRef> kids;    // Neg: 1, Exists: 1, Conj: sorted unique
    uint64_t free_mask = 0;          // cached free-variable set
    uint64_t ast_size = 1;           // node count, conj = 1 + sum(children)
};

class FormulaArena {
public:
    static FormulaArena& instance() {
        static FormulaArena arena;
        return arena;
    }

    FormulaRef atom(const std::string& symbol, const std::vector<int>& vars) {
        std::lock_guard<std::mutex> lk(mu_);
        FormulaNode n;
        n.kind = FKind::Atom;
        n.symbol = intern_name(symbol);
        n.args.reserve(vars.size());
        for (int v : vars) {
            check_var(v);
            n.args.push_back(static_cast<uint8_t>(v));
            n.free_mask |= 1ull << v;
        }
        return intern(std::move(n));
    }

    FormulaRef equal(int v, int w) {
        std::lock_guard<std::mutex> lk(mu_);
        check_var(v);
        check_var(w);
        FormulaNode n;
        n.kind = FKind::Equal;
        n.var = static_cast<uint8_t>(v);
        n.var2 = static_cast<uint8_t>(w);
        n.free_mask = (1ull << v) | (1ull << w);
        return intern(std::move(n));
    }

    FormulaRef neg(FormulaRef f) {
        std::lock_guard<std::mutex> lk(mu_);
        FormulaNode n;
        n.kind = FKind::Neg;
        n.kids = {f};
        n.free_mask = nodes_[f].free_mask;
        n.ast_size = 1 + nodes_[f].ast_size;
        return intern(std::move(n));
    }

    // Set coding: children are sorted and deduplicated, so insertion order
    // and duplicates do not affect identity.
    FormulaRef conj(std::vector<FormulaRef> kids) {
        std::lock_guard<std::mutex> lk(mu_);
        std::sort(kids.begin(), kids.end());
        kids.erase(std::unique(kids.begin(), kids.end()), kids.end());
        FormulaNode n;
        n.kind = FKind::Conj;
        for (FormulaRef k : kids) {
            n.free_mask |= nodes_[k].free_mask;
            n.ast_size += nodes_[k].ast_size;
        }
        n.kids = std::move(kids);
        return intern(std::move(n));
    }

    FormulaRef exists(int v, FormulaRef body) {
        std::lock_guard<std::mutex> lk(mu_);
        check_var(v);
        FormulaNode n;
        n.kind = FKind::Exists;
        n.var = static_cast<uint8_t>(v);
        n.kids = {body};
        n.free_mask = nodes_[body].free_mask & ~(1ull << v);
        n.ast_size = 1 + nodes_[body].ast_size;
        return intern(std::move(n));
    }

    const FormulaNode& node(FormulaRef f) const {
        std::lock_guard<std::mutex> lk(mu_);
        return nodes_.at(f);
    }

    const std::string& symbol_name(uint32_t id) const {
        std::lock_guard<std::mutex> lk(mu_);
        return names_.at(id);
    }

    size_t node_count() const {
        std::lock_guard<std::mutex> lk(mu_);
        return nodes_.size();
    }

    // Canonical content digest: SHA-256 over the node kind, payload and the
    // sorted child digests. Equal digests iff equal interned nodes (verified
    // by the collision referee in the test suite).
    Digest digest(FormulaRef f) {
        {
            std::lock_guard<std::mutex> lk(mu_);
            if (digest_ok_[f]) return digests_[f];
        }
        // compute iteratively to avoid deep recursion on big sentences
        std::vector<FormulaRef> stack = {f};
        while (!stack.empty()) {
            FormulaRef cur = stack.back();
            std::lock_guard<std::mutex> lk(mu_);
            if (digest_ok_[cur]) {
                stack.pop_back();
                continue;
            }
            const FormulaNode& n = nodes_[cur];
            bool ready = true;
            for (FormulaRef k : n.kids)
                if (!digest_ok_[k]) {
                    stack.push_back(k);
                    ready = false;
                }
            if (!ready) continue;
            HashBuf h;
            switch (n.kind) {
            case FKind::Atom:
                h.tag('A');
                h.str(names_[n.symbol]);
                h.u32(static_cast<uint32_t>(n.args.size()));
                for (uint8_t a : n.args) h.u32(a);
                break;
            case FKind::Equal:
                h.tag('E');
                h.u32(n.var);
                h.u32(n.var2);
                break;
            case FKind::Neg:
                h.tag('N');
                h.digest(digests_[n.kids[0]]);
                break;
            case FKind::Conj: {
                h.tag('C');
                std::vector<Digest> kd;
                kd.reserve(n.kids.size());
                for (FormulaRef k : n.kids) kd.push_back(digests_[k]);
                std::sort(kd.begin(), kd.end());
                h.u32(static_cast<uint32_t>(kd.size()));
                for (const Digest& d : kd) h.digest(d);
                break;
            }
            case FKind::Exists:
                h.tag('X');
                h.u32(n.var);
                h.digest(digests_[n.kids[0]]);
                break;
            }
            digests_[cur] = h.finish();
            digest_ok_[cur] = true;
            stack.pop_back();
        }
        std::lock_guard<std::mutex> lk(mu_);
        return digests_[f];
    }

private:
    FormulaArena() = default;

    void check_var(int v) {
        if (v < 0 || v >= kMaxVar) throw FormulaError("variable index out of range: x" + std::to_string(v));
    }

    uint32_t intern_name(const std::string& s) {
        auto it = name_ids_.find(s);
        if (it != name_ids_.end()) return it->second;
        uint32_t id = static_cast<uint32_t>(names_.size());
        names_.push_back(s);
        name_ids_.emplace(s, id);
        return id;
    }

    struct NodeKey {
        FKind kind;
        uint8_t var, var2;
        uint32_t symbol;
        std::vector<uint8_t> args;
        std::vector<FormulaRef> kids;
        bool operator==(const NodeKey& o) const {
            return kind == o.kind && var == o.var && var2 == o.var2 && symbol == o.symbol &&
                   args == o.args && kids == o.kids;
        }
    };

    struct NodeKeyHash {
        size_t operator()(const NodeKey& k) const {
            size_t h = static_cast<size_t>(k.kind) * 0x9e3779b97f4a7c15ull;
            h ^= k.var + 0x9e3779b9 + (h << 6) + (h >> 2);
            h ^= k.var2 + 0x9e3779b9 + (h << 6) + (h >> 2);
            h ^= k.symbol + 0x9e3779b9 + (h << 6) + (h >> 2);
            for (uint8_t a : k.args) h ^= a + 0x9e3779b9 + (h << 6) + (h >> 2);
            for (FormulaRef f : k.kids) h ^= f + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
            return h;
        }
    };

    FormulaRef intern(FormulaNode&& n) {
        NodeKey key{n.kind, n.var, n.var2, n.symbol, n.args, n.kids};
        auto it = map_.find(key);
        if (it != map_.end()) return it->second;
        FormulaRef id = static_cast<FormulaRef>(nodes_.size());
        nodes_.push_back(std::move(n));
        digests_.emplace_back();
        digest_ok_.push_back(false);
        map_.emplace(std::move(key), id);
        return id;
    }

    mutable std::mutex mu_;
    std::deque<FormulaNode> nodes_;   // deque: node references stay valid as the arena grows
    std::vector<Digest> digests_;
    std::vector<uint8_t> digest_ok_;
    std::unordered_map<NodeKey, FormulaRef, NodeKeyHash> map_;
    std::deque<std::string> names_;
    std::unordered_map<std::string, uint32_t> name_ids_;
};

inline FormulaArena& arena() { return FormulaArena::instance(); }

inline FormulaRef mk_atom(const std::string& sym, const std::vector<int>& vars) {
    return arena().atom(sym, vars);
}
inline FormulaRef mk_equal(int v, int w) { return arena().equal(v, w); }
inline FormulaRef mk_neg(FormulaRef f) { return arena().neg(f); }
inline FormulaRef mk_conj(std::vector<FormulaRef> kids) { return arena().conj(std::move(kids)); }
inline FormulaRef mk_exists(int v, FormulaRef f) { return arena().exists(v, f); }

// Empty conjunction; evaluates to true everywhere.
inline FormulaRef mk_true() { return mk_conj({}); }

// The abbreviations of the coding: disjunction, implication and universal
// quantification are sugar over Neg/Conj/Exists and expand literally.
inline FormulaRef mk_or(std::vector<FormulaRef> kids) {
    std::vector<FormulaRef> negged;
    negged.reserve(kids.size());
    for (FormulaRef k : kids) negged.push_back(mk_neg(k));
    return mk_neg(mk_conj(std::move(negged)));
}

inline FormulaRef mk_implies(FormulaRef a, FormulaRef b) { return mk_or({mk_neg(a), b}); }

inline FormulaRef mk_forall(int v, FormulaRef f) { return mk_neg(mk_exists(v, mk_neg(f))); }

// Forall over x0..x(k-1), outermost first.
inline FormulaRef mk_forall_prefix(int k, FormulaRef f) {
    for (int v = k - 1; v >= 0; --v) f = mk_forall(v, f);
    return f;
}

inline uint64_t free_mask(FormulaRef f) { return arena().node(f).free_mask; }

inline std::vector<int> free_vars(FormulaRef f) {
    std::vector<int> out;
    uint64_t m = free_mask(f);
    for (int v = 0; v < kMaxVar; ++v)
        if (m & (1ull << v)) out.push_back(v);
    return out;
}

inline bool is_sentence(FormulaRef f) { return free_mask(f) == 0; }

inline uint64_t ast_size(FormulaRef f) { return arena().node(f).ast_size; }

inline std::string canonical_digest(FormulaRef f) { return hex(arena().digest(f)); }

} // namespace fmw
