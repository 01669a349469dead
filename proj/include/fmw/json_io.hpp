#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "fmw/structure.hpp"

namespace fmw {

// map-backed json: object keys always serialize in sorted order
using json = nlohmann::json;

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline json parse_json_text(const std::string& text, const std::string& what) {
    try {
        return json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw IoError("malformed JSON in " + what + ": " + e.what());
    }
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write file: " + path);
    out << content;
}

// Structure file format:
//   {"signature": {"relations": {"R": 2}, "functions": {"F": 1}},
//    "size": n, "tables": {"R": [[0,1], ...], "F": [[0,1], ...]}}
// A declared n-ary function is relationalized at ingestion as its graph, an
// (n+1)-ary relation, with totality and functionality validated here.
inline FiniteStructure structure_from_json(const json& j) {
    if (!j.is_object()) throw IoError("structure: expected a JSON object");
    if (!j.contains("signature") || !j["signature"].is_object())
        throw IoError("structure: missing 'signature' object");
    if (!j.contains("size") || !j["size"].is_number_integer())
        throw IoError("structure: missing integer 'size'");
    int n = j["size"].get<int>();
    Signature sig;
    std::vector<std::string> function_names;
    std::vector<int> function_arities;
    const json& sj = j["signature"];
    if (sj.contains("relations")) {
        if (!sj["relations"].is_object()) throw IoError("structure: 'relations' must be an object");
        for (auto it = sj["relations"].begin(); it != sj["relations"].end(); ++it) {
            if (!it.value().is_number_integer()) throw IoError("structure: relation arity must be an integer");
            sig.add(it.key(), it.value().get<int>());
        }
    }
    if (sj.contains("functions")) {
        if (!sj["functions"].is_object()) throw IoError("structure: 'functions' must be an object");
        for (auto it = sj["functions"].begin(); it != sj["functions"].end(); ++it) {
            if (!it.value().is_number_integer()) throw IoError("structure: function arity must be an integer");
            int r = it.value().get<int>();
            if (r < 0) throw IoError("structure: negative function arity");
            sig.add(it.key(), r + 1);
            function_names.push_back(it.key());
            function_arities.push_back(r);
        }
    }
    std::vector<std::vector<std::vector<int>>> tables(sig.size());
    if (j.contains("tables")) {
        if (!j["tables"].is_object()) throw IoError("structure: 'tables' must be an object");
        for (auto it = j["tables"].begin(); it != j["tables"].end(); ++it) {
            int sym = sig.find(it.key());
            if (sym < 0) throw IoError("structure: table for undeclared symbol '" + it.key() + "'");
            if (!it.value().is_array()) throw IoError("structure: table must be an array");
            for (const json& tj : it.value()) {
                if (!tj.is_array()) throw IoError("structure: tuple must be an array");
                std::vector<int> tuple;
                for (const json& e : tj) {
                    if (!e.is_number_integer()) throw IoError("structure: tuple entry must be an integer");
                    tuple.push_back(e.get<int>());
                }
                tables[static_cast<size_t>(sym)].push_back(std::move(tuple));
            }
        }
    }
    try {
        FiniteStructure m(sig, n, std::move(tables));
        // totality/functionality of relationalized functions
        for (size_t f = 0; f < function_names.size(); ++f) {
            int sym = m.signature().find(function_names[f]);
            int args = function_arities[f];
            size_t total = m.cells(args);
            std::vector<int> count(total, 0);
            for (const auto& t : m.table(sym)) {
                std::vector<int> prefix(t.begin(), t.end() - 1);
                count[m.index(prefix)] += 1;
            }
            for (size_t c = 0; c < total; ++c) {
                if (count[c] == 0)
                    throw IoError("structure: function '" + function_names[f] + "' is not total");
                if (count[c] > 1)
                    throw IoError("structure: function '" + function_names[f] + "' is not functional");
            }
        }
        return m;
    } catch (const StructureError& e) {
        throw IoError(std::string("structure: ") + e.what());
    }
}

inline FiniteStructure load_structure(const std::string& path) {
    return structure_from_json(parse_json_text(read_file(path), path));
}

inline json structure_to_json(const FiniteStructure& m) {
    json rel = json::object();
    json tabs = json::object();
    const Signature& sig = m.signature();
    for (size_t s = 0; s < sig.size(); ++s) {
        rel[sig.name(static_cast<int>(s))] = sig.arity(static_cast<int>(s));
        json rows = json::array();
        for (const auto& t : m.table(static_cast<int>(s))) rows.push_back(t);
        tabs[sig.name(static_cast<int>(s))] = rows;
    }
    json out;
    out["signature"] = json::object();
    out["signature"]["relations"] = rel;
    out["size"] = m.size();
    out["tables"] = tabs;
    return out;
}

} // namespace fmw
