#pragma once

#include <algorithm>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace fmw {

struct SignatureError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline bool is_variable_name(const std::string& s) {
    if (s.size() < 2 || s[0] != 'x') return false;
    for (size_t i = 1; i < s.size(); ++i)
        if (!isdigit(static_cast<unsigned char>(s[i]))) return false;
    return true;
}

inline bool is_symbol_name(const std::string& s) {
    if (s.empty()) return false;
    if (!isalpha(static_cast<unsigned char>(s[0])) && s[0] != '_') return false;
    for (char c : s)
        if (!isalnum(static_cast<unsigned char>(c)) && c != '_') return false;
    if (s == "And" || s == "Not" || s == "Exists") return false;
    if (is_variable_name(s)) return false;
    return true;
}

// Purely relational signature. Symbols are indexed in sorted-name order so
// that symbol ids are deterministic across loads.
class Signature {
public:
    Signature() = default;

    explicit Signature(const std::map<std::string, int>& relations) {
        for (const auto& [name, arity] : relations) add(name, arity);
    }

    void add(const std::string& name, int arity) {
        if (!is_symbol_name(name))
            throw SignatureError("bad relation symbol name: '" + name + "'");
        if (arity < 0)
            throw SignatureError("negative arity for symbol '" + name + "'");
        auto it = std::lower_bound(names_.begin(), names_.end(), name);
        if (it != names_.end() && *it == name)
            throw SignatureError("duplicate relation symbol '" + name + "'");
        size_t pos = static_cast<size_t>(it - names_.begin());
        names_.insert(it, name);
        arities_.insert(arities_.begin() + static_cast<long>(pos), arity);
    }

    size_t size() const { return names_.size(); }

    int find(const std::string& name) const {
        auto it = std::lower_bound(names_.begin(), names_.end(), name);
        if (it == names_.end() || *it != name) return -1;
        return static_cast<int>(it - names_.begin());
    }

    const std::string& name(int sym) const { return names_.at(static_cast<size_t>(sym)); }
    int arity(int sym) const { return arities_.at(static_cast<size_t>(sym)); }

    bool operator==(const Signature& o) const {
        return names_ == o.names_ && arities_ == o.arities_;
    }
    bool operator!=(const Signature& o) const { return !(*this == o); }

private:
    std::vector<std::string> names_;
    std::vector<int> arities_;
};

} // namespace fmw
