#pragma once

#include <cctype>
#include <stdexcept>
#include <string>
#include <vector>

#include "fmw/formula.hpp"
#include "fmw/signature.hpp"

namespace fmw {

struct ParseError : std::runtime_error {
    size_t position;
    ParseError(size_t pos, const std::string& msg)
        : std::runtime_error("parse error at offset " + std::to_string(pos) + ": " + msg),
          position(pos) {}
};

namespace detail {

class Parser {
public:
    Parser(const std::string& text, const Signature& sig) : text_(text), sig_(sig) {}

    FormulaRef parse() {
        FormulaRef f = formula();
        skip_ws();
        if (pos_ != text_.size()) fail("trailing input");
        return f;
    }

private:
    FormulaRef formula() {
        skip_ws();
        size_t start = pos_;
        std::string word = peek_word();
        if (word.empty()) fail("expected a formula");
        if (word == "Not") {
            take_word();
            return mk_neg(formula());
        }
        if (word == "And") {
            take_word();
            expect('{');
            std::vector<FormulaRef> kids;
            skip_ws();
            if (!eat('}')) {
                kids.push_back(formula());
                skip_ws();
                while (eat(',')) kids.push_back(formula());
                skip_ws();
                expect('}');
            }
            return mk_conj(std::move(kids));
        }
        if (word == "Exists") {
            take_word();
            int v = variable();
            skip_ws();
            expect('.');
            return mk_exists(v, formula());
        }
        if (is_variable_name(word)) {
            int v = variable();
            skip_ws();
            expect('=');
            int w = variable();
            return mk_equal(v, w);
        }
        // relation atom
        take_word();
        int sym = sig_.find(word);
        if (sym < 0) fail_at(start, "unknown symbol '" + word + "'");
        expect('(');
        std::vector<int> args;
        skip_ws();
        if (!eat(')')) {
            args.push_back(variable());
            skip_ws();
            while (eat(',')) args.push_back(variable());
            skip_ws();
            expect(')');
        }
        if (static_cast<int>(args.size()) != sig_.arity(sym))
            fail_at(start, "arity mismatch for '" + word + "': expected " +
                               std::to_string(sig_.arity(sym)) + ", got " +
                               std::to_string(args.size()));
        return mk_atom(word, args);
    }

    int variable() {
        skip_ws();
        size_t start = pos_;
        std::string word = take_word();
        if (!is_variable_name(word)) fail_at(start, "expected a variable (x<digits>)");
        long idx = std::stol(word.substr(1));
        if (idx >= kMaxVar) fail_at(start, "variable index out of range");
        return static_cast<int>(idx);
    }

    void skip_ws() {
        while (pos_ < text_.size() && isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    std::string peek_word() const {
        size_t p = pos_;
        std::string w;
        while (p < text_.size() &&
               (isalnum(static_cast<unsigned char>(text_[p])) || text_[p] == '_')) {
            w.push_back(text_[p]);
            ++p;
        }
        return w;
    }

    std::string take_word() {
        skip_ws();
        std::string w = peek_word();
        if (w.empty()) fail("expected a name");
        pos_ += w.size();
        return w;
    }

    bool eat(char c) {
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect(char c) {
        if (!eat(c)) fail(std::string("expected '") + c + "'");
    }

    [[noreturn]] void fail(const std::string& msg) const { throw ParseError(pos_, msg); }
    [[noreturn]] void fail_at(size_t pos, const std::string& msg) const {
        throw ParseError(pos, msg);
    }

    const std::string& text_;
    const Signature& sig_;
    size_t pos_ = 0;
};

} // namespace detail

inline FormulaRef parse_formula(const std::string& text, const Signature& sig) {
    return detail::Parser(text, sig).parse();
}

} // namespace fmw
