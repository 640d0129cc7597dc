#ifndef UNSEMI_PARSER_HPP
#define UNSEMI_PARSER_HPP

#include "formula.hpp"
#include "polynomial.hpp"

#include <cctype>
#include <stdexcept>
#include <string>
#include <vector>

namespace unsemi {

struct ParseError : std::runtime_error {
    int line, col;
    ParseError(int l, int c, const std::string& msg)
        : std::runtime_error("syntax error at " + std::to_string(l) + ":" + std::to_string(c) +
                             ": " + msg),
          line(l), col(c) {}
};

namespace detail {

struct Token {
    enum class Kind { Int, Ident, Op, End } kind;
    std::string text;
    int line, col;
};

class Lexer {
public:
    explicit Lexer(const std::string& src) : src_(src) { advance(); }

    const Token& peek() const { return tok_; }

    Token next() {
        Token t = tok_;
        advance();
        return t;
    }

    // Position save/restore for the formula-vs-polynomial '(' ambiguity.
    struct State { std::size_t pos; int line, col; Token tok; };
    State save() const { return {pos_, line_, col_, tok_}; }
    void restore(const State& s) { pos_ = s.pos; line_ = s.line; col_ = s.col; tok_ = s.tok; }

private:
    void advance() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) bump();
        tok_.line = line_;
        tok_.col = col_;
        if (pos_ >= src_.size()) {
            tok_.kind = Token::Kind::End;
            tok_.text.clear();
            return;
        }
        char c = src_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c))) {
            std::string s;
            while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
                s += src_[pos_];
                bump();
            }
            tok_ = {Token::Kind::Int, s, tok_.line, tok_.col};
            return;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::string s;
            while (pos_ < src_.size() &&
                   (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) {
                s += src_[pos_];
                bump();
            }
            tok_ = {Token::Kind::Ident, s, tok_.line, tok_.col};
            return;
        }
        // two-char operators first
        if (pos_ + 1 < src_.size()) {
            std::string two = src_.substr(pos_, 2);
            if (two == ">=" || two == "<=" || two == "!=") {
                bump(); bump();
                tok_ = {Token::Kind::Op, two, tok_.line, tok_.col};
                return;
            }
        }
        static const std::string singles = "+-*/^()&|!\\=<>";
        if (singles.find(c) != std::string::npos) {
            bump();
            tok_ = {Token::Kind::Op, std::string(1, c), tok_.line, tok_.col};
            return;
        }
        throw ParseError(line_, col_, std::string("unexpected character '") + c + "'");
    }

    void bump() {
        if (src_[pos_] == '\n') { ++line_; col_ = 1; } else { ++col_; }
        ++pos_;
    }

    const std::string& src_;
    std::size_t pos_ = 0;
    int line_ = 1, col_ = 1;
    Token tok_;
};

// Polynomial ASTs are built over the variables seen so far and re-aligned at
// the end; a parser instance tracks the highest x-index referenced.
class FormulaParser {
public:
    explicit FormulaParser(const std::string& src) : lex_(src) {}

    FormulaPtr parse() {
        FormulaPtr f = parse_or();
        expect_end();
        return align(f);
    }

    std::size_t base_dim() const { return max_index_; }

private:
    [[noreturn]] void fail(const Token& t, const std::string& msg) {
        throw ParseError(t.line, t.col, msg);
    }

    bool eat_op(const std::string& s) {
        if (lex_.peek().kind == Token::Kind::Op && lex_.peek().text == s) {
            lex_.next();
            return true;
        }
        return false;
    }

    void expect_op(const std::string& s) {
        if (!eat_op(s)) fail(lex_.peek(), "expected '" + s + "'");
    }

    void expect_end() {
        if (lex_.peek().kind != Token::Kind::End) fail(lex_.peek(), "trailing input");
    }

    FormulaPtr parse_or() {
        std::vector<FormulaPtr> parts{parse_and()};
        while (eat_op("|")) parts.push_back(parse_and());
        if (parts.size() == 1) return parts[0];
        return Formula::disj(std::move(parts));
    }

    // '&' and '\' share one precedence level, left-associative. Runs of '&'
    // are flattened into one And node.
    FormulaPtr parse_and() {
        FormulaPtr cur = parse_unary();
        std::vector<FormulaPtr> run{cur};
        for (;;) {
            if (eat_op("&")) {
                run.push_back(parse_unary());
            } else if (eat_op("\\")) {
                FormulaPtr left = run.size() == 1 ? run[0] : Formula::conj(std::move(run));
                cur = Formula::difference(left, parse_unary());
                run = {cur};
            } else {
                break;
            }
        }
        return run.size() == 1 ? run[0] : Formula::conj(std::move(run));
    }

    FormulaPtr parse_unary() {
        if (eat_op("!")) return Formula::negation(parse_unary());
        if (lex_.peek().kind == Token::Kind::Op && lex_.peek().text == "(") {
            // '(' may open a subformula or a parenthesized polynomial.
            auto state = lex_.save();
            try {
                lex_.next(); // '('
                FormulaPtr inner = parse_or();
                expect_op(")");
                const Token& t = lex_.peek();
                bool formula_follows = t.kind == Token::Kind::End ||
                    (t.kind == Token::Kind::Op &&
                     (t.text == "&" || t.text == "|" || t.text == "\\" || t.text == ")"));
                if (formula_follows) return inner;
            } catch (const ParseError&) {
                // fall through to atom
            }
            lex_.restore(state);
        }
        return parse_atom();
    }

    FormulaPtr parse_atom() {
        Polynomial lhs = parse_poly();
        const Token& t = lex_.peek();
        Rel rel;
        if (t.kind != Token::Kind::Op) fail(t, "expected relation operator");
        if (t.text == "=") rel = Rel::Eq;
        else if (t.text == ">=") rel = Rel::Ge;
        else if (t.text == ">") rel = Rel::Gt;
        else if (t.text == "<=") rel = Rel::Le;
        else if (t.text == "<") rel = Rel::Lt;
        else if (t.text == "!=") rel = Rel::Ne;
        else fail(t, "expected relation operator");
        lex_.next();
        Polynomial rhs = parse_poly();
        auto [a, b] = align_pair(lhs, rhs);
        return Formula::atom(a - b, rel);
    }

    // poly := term (('+'|'-') term)*
    Polynomial parse_poly() {
        Polynomial p = parse_term();
        for (;;) {
            if (eat_op("+")) {
                auto [a, b] = align_pair(p, parse_term());
                p = a + b;
            } else if (eat_op("-")) {
                auto [a, b] = align_pair(p, parse_term());
                p = a - b;
            } else {
                return p;
            }
        }
    }

    Polynomial parse_term() {
        Polynomial p = parse_factor();
        while (eat_op("*")) {
            auto [a, b] = align_pair(p, parse_factor());
            p = a * b;
        }
        return p;
    }

    Polynomial parse_factor() {
        bool neg = false;
        while (eat_op("-")) neg = !neg;
        Polynomial p = parse_primary();
        if (eat_op("^")) {
            const Token& t = lex_.peek();
            if (t.kind != Token::Kind::Int) fail(t, "expected integer exponent");
            p = p.pow(static_cast<std::uint32_t>(std::stoul(lex_.next().text)));
        }
        return neg ? -p : p;
    }

    Polynomial parse_primary() {
        const Token& t = lex_.peek();
        if (t.kind == Token::Kind::Int) {
            Integer num(lex_.next().text);
            Rational c(num);
            if (eat_op("/")) {
                const Token& d = lex_.peek();
                if (d.kind != Token::Kind::Int) fail(d, "expected integer denominator");
                Integer den(lex_.next().text);
                if (den == 0) fail(d, "zero denominator");
                c = Rational(num, den);
            }
            return Polynomial::constant({}, c);
        }
        if (t.kind == Token::Kind::Ident) {
            Token v = lex_.next();
            std::size_t idx = var_index(v);
            max_index_ = std::max(max_index_, idx);
            std::vector<std::string> vars;
            for (std::size_t i = 1; i <= idx; ++i) vars.push_back("x" + std::to_string(i));
            return Polynomial::variable(vars, idx - 1);
        }
        if (t.kind == Token::Kind::Op && t.text == "(") {
            lex_.next();
            Polynomial p = parse_poly();
            expect_op(")");
            return p;
        }
        fail(t, "expected number, variable, or '('");
    }

    std::size_t var_index(const Token& v) {
        const std::string& s = v.text;
        if (s.size() < 2 || s[0] != 'x' || s[1] == '0')
            throw ParseError(v.line, v.col, "unknown variable '" + s + "' (expected x1..xm)");
        for (std::size_t i = 1; i < s.size(); ++i)
            if (!std::isdigit(static_cast<unsigned char>(s[i])))
                throw ParseError(v.line, v.col, "unknown variable '" + s + "' (expected x1..xm)");
        return std::stoul(s.substr(1));
    }

    static std::pair<Polynomial, Polynomial> align_pair(const Polynomial& a, const Polynomial& b) {
        std::size_t n = std::max(a.var_count(), b.var_count());
        std::vector<std::string> vars;
        for (std::size_t i = 1; i <= n; ++i) vars.push_back("x" + std::to_string(i));
        return {a.extend_to(vars), b.extend_to(vars)};
    }

    FormulaPtr align(const FormulaPtr& f) {
        std::vector<std::string> vars;
        for (std::size_t i = 1; i <= max_index_; ++i) vars.push_back("x" + std::to_string(i));
        return align_rec(*f, vars);
    }

    static FormulaPtr align_rec(const Formula& f, const std::vector<std::string>& vars) {
        if (f.kind == Formula::Kind::Atom)
            return Formula::atom(f.poly.extend_to(vars), f.rel);
        std::vector<FormulaPtr> cs;
        cs.reserve(f.children.size());
        for (const auto& c : f.children) cs.push_back(align_rec(*c, vars));
        switch (f.kind) {
            case Formula::Kind::And: return Formula::conj(std::move(cs));
            case Formula::Kind::Or: return Formula::disj(std::move(cs));
            case Formula::Kind::Not: return Formula::negation(cs[0]);
            case Formula::Kind::Diff: return Formula::difference(cs[0], cs[1]);
            default: throw std::logic_error("unreachable");
        }
    }

    Lexer lex_;
    std::size_t max_index_ = 0;
};

} // namespace detail

/// Parse a formula; atoms come out as p <rel> 0 with p in canonical form over
/// x1..xm, where m is the highest variable index referenced anywhere.
inline FormulaPtr parse_formula(const std::string& text) {
    detail::FormulaParser p(text);
    return p.parse();
}

/// Parse a polynomial expression over an explicit variable list (used when
/// reading serialized lifts, whose polynomials mention aux variables).
inline Polynomial parse_polynomial(const std::string& text, const std::vector<std::string>& vars) {
    detail::Lexer lex(text);
    // Reuse the expression machinery via a tiny recursive-descent copy that
    // resolves identifiers against `vars`.
    struct P {
        detail::Lexer& lex;
        const std::vector<std::string>& vars;

        [[noreturn]] void fail(const detail::Token& t, const std::string& m) {
            throw ParseError(t.line, t.col, m);
        }
        bool eat(const std::string& s) {
            if (lex.peek().kind == detail::Token::Kind::Op && lex.peek().text == s) {
                lex.next();
                return true;
            }
            return false;
        }
        Polynomial poly() {
            Polynomial p = term();
            for (;;) {
                if (eat("+")) p = p + term();
                else if (eat("-")) p = p - term();
                else return p;
            }
        }
        Polynomial term() {
            Polynomial p = factor();
            while (eat("*")) p = p * factor();
            return p;
        }
        Polynomial factor() {
            bool neg = false;
            while (eat("-")) neg = !neg;
            Polynomial p = primary();
            if (eat("^")) {
                auto t = lex.peek();
                if (t.kind != detail::Token::Kind::Int) fail(t, "expected integer exponent");
                p = p.pow(static_cast<std::uint32_t>(std::stoul(lex.next().text)));
            }
            return neg ? -p : p;
        }
        Polynomial primary() {
            auto t = lex.peek();
            if (t.kind == detail::Token::Kind::Int) {
                Integer num(lex.next().text);
                Rational c(num);
                if (eat("/")) {
                    auto d = lex.peek();
                    if (d.kind != detail::Token::Kind::Int) fail(d, "expected integer denominator");
                    c = Rational(num, Integer(lex.next().text));
                }
                return Polynomial::constant(vars, c);
            }
            if (t.kind == detail::Token::Kind::Ident) {
                auto v = lex.next();
                auto it = std::find(vars.begin(), vars.end(), v.text);
                if (it == vars.end()) fail(v, "unknown variable '" + v.text + "'");
                return Polynomial::variable(vars, static_cast<std::size_t>(it - vars.begin()));
            }
            if (t.kind == detail::Token::Kind::Op && t.text == "(") {
                lex.next();
                Polynomial p = poly();
                if (!eat(")")) fail(lex.peek(), "expected ')'");
                return p;
            }
            fail(t, "expected number, variable, or '('");
        }
    } parser{lex, vars};
    Polynomial p = parser.poly();
    if (lex.peek().kind != detail::Token::Kind::End)
        throw ParseError(lex.peek().line, lex.peek().col, "trailing input");
    return p;
}

} // namespace unsemi

#endif // UNSEMI_PARSER_HPP
