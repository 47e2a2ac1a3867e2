#include "flowctl/expression.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>

namespace flowctl {

namespace {

const double kPi = 3.14159265358979323846;

struct Token {
    enum Kind { number, ident, op, lparen, rparen, end } kind;
    size_t pos;
    double value = 0.0;   // number
    char ch = 0;          // op
    std::string name;     // ident

    Token(Kind k, size_t p) : kind(k), pos(p) {}
};

[[noreturn]] void fail(const std::string& src, size_t pos, const std::string& what) {
    throw config_error("expression error at offset " + std::to_string(pos) + " in \"" + src +
                       "\": " + what);
}

class Lexer {
public:
    Lexer(const std::string& src) : src_(src) {}

    Token next() {
        while (i_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[i_]))) ++i_;
        if (i_ >= src_.size()) return {Token::end, i_};
        const size_t pos = i_;
        const char c = src_[i_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            const char* begin = src_.c_str() + i_;
            char* after = nullptr;
            const double v = std::strtod(begin, &after);
            if (after == begin) fail(src_, pos, "bad numeric literal");
            i_ += static_cast<size_t>(after - begin);
            Token t{Token::number, pos};
            t.value = v;
            return t;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            size_t j = i_;
            while (j < src_.size() &&
                   (std::isalnum(static_cast<unsigned char>(src_[j])) || src_[j] == '_'))
                ++j;
            Token t{Token::ident, pos};
            t.name = src_.substr(i_, j - i_);
            i_ = j;
            return t;
        }
        ++i_;
        switch (c) {
            case '(': return {Token::lparen, pos};
            case ')': return {Token::rparen, pos};
            case '+': case '-': case '*': case '/': case '^': {
                Token t{Token::op, pos};
                t.ch = c;
                return t;
            }
            default: fail(src_, pos, std::string("unexpected character '") + c + "'");
        }
    }

private:
    const std::string& src_;
    size_t i_ = 0;
};

} // namespace

class ExprParser {
public:
    ExprParser(const std::string& src, const std::vector<std::string>& vars)
        : src_(src), vars_(vars), lex_(src) {
        advance();
    }

    Expression run() {
        Expression e;
        e.src_ = src_;
        e.n_vars_ = vars_.size();
        parse_sum();
        if (tok_.kind != Token::end) fail(src_, tok_.pos, "trailing input");
        e.code_ = std::move(code_);
        return e;
    }

private:
    using Op = Expression::Op;

    void advance() { tok_ = lex_.next(); }

    void emit(Op op) { code_.push_back({op, 0, 0.0}); }
    void emit_const(double v) { code_.push_back({Op::push_const, 0, v}); }
    void emit_var(uint32_t slot) { code_.push_back({Op::push_var, slot, 0.0}); }

    void parse_sum() {
        parse_product();
        while (tok_.kind == Token::op && (tok_.ch == '+' || tok_.ch == '-')) {
            const char c = tok_.ch;
            advance();
            parse_product();
            emit(c == '+' ? Op::add : Op::sub);
        }
    }

    void parse_product() {
        parse_unary();
        while (tok_.kind == Token::op && (tok_.ch == '*' || tok_.ch == '/')) {
            const char c = tok_.ch;
            advance();
            parse_unary();
            emit(c == '*' ? Op::mul : Op::div);
        }
    }

    // unary minus binds looser than ^ so that -x^2 == -(x^2)
    void parse_unary() {
        if (tok_.kind == Token::op && tok_.ch == '-') {
            advance();
            parse_unary();
            emit(Op::neg);
            return;
        }
        if (tok_.kind == Token::op && tok_.ch == '+') {
            advance();
            parse_unary();
            return;
        }
        parse_power();
    }

    void parse_power() {
        parse_primary();
        if (tok_.kind == Token::op && tok_.ch == '^') {
            advance();
            parse_unary(); // right associative, accepts 2^-3
            emit(Op::pow);
        }
    }

    void parse_primary() {
        switch (tok_.kind) {
            case Token::number: {
                emit_const(tok_.value);
                advance();
                return;
            }
            case Token::lparen: {
                advance();
                parse_sum();
                if (tok_.kind != Token::rparen) fail(src_, tok_.pos, "expected ')'");
                advance();
                return;
            }
            case Token::ident: {
                const std::string name = tok_.name;
                const size_t pos = tok_.pos;
                advance();
                if (tok_.kind == Token::lparen) {
                    advance();
                    parse_sum();
                    if (tok_.kind != Token::rparen) fail(src_, tok_.pos, "expected ')'");
                    advance();
                    if (name == "sin") emit(Op::sin);
                    else if (name == "cos") emit(Op::cos);
                    else if (name == "tan") emit(Op::tan);
                    else if (name == "exp") emit(Op::exp);
                    else if (name == "ln") emit(Op::ln);
                    else if (name == "atan") emit(Op::atan);
                    else fail(src_, pos, "unknown function '" + name + "'");
                    return;
                }
                if (name == "pi") {
                    emit_const(kPi);
                    return;
                }
                for (uint32_t s = 0; s < vars_.size(); ++s) {
                    if (vars_[s] == name) {
                        emit_var(s);
                        return;
                    }
                }
                fail(src_, pos, "unknown variable '" + name + "'");
            }
            default:
                fail(src_, tok_.pos, "expected a value");
        }
    }

    const std::string& src_;
    const std::vector<std::string>& vars_;
    Lexer lex_;
    Token tok_{Token::end, 0};
    std::vector<Expression::Instr> code_;
};

Expression Expression::parse(const std::string& source, const std::vector<std::string>& variables) {
    return ExprParser(source, variables).run();
}

double Expression::eval(const double* args) const {
    double stack[64];
    size_t sp = 0;
    for (const Instr& in : code_) {
        switch (in.op) {
            case Op::push_const: stack[sp++] = in.value; break;
            case Op::push_var: stack[sp++] = args[in.slot]; break;
            case Op::add: --sp; stack[sp - 1] += stack[sp]; break;
            case Op::sub: --sp; stack[sp - 1] -= stack[sp]; break;
            case Op::mul: --sp; stack[sp - 1] *= stack[sp]; break;
            case Op::div: --sp; stack[sp - 1] /= stack[sp]; break;
            case Op::pow: --sp; stack[sp - 1] = std::pow(stack[sp - 1], stack[sp]); break;
            case Op::neg: stack[sp - 1] = -stack[sp - 1]; break;
            case Op::sin: stack[sp - 1] = std::sin(stack[sp - 1]); break;
            case Op::cos: stack[sp - 1] = std::cos(stack[sp - 1]); break;
            case Op::tan: stack[sp - 1] = std::tan(stack[sp - 1]); break;
            case Op::exp: stack[sp - 1] = std::exp(stack[sp - 1]); break;
            case Op::ln: stack[sp - 1] = std::log(stack[sp - 1]); break;
            case Op::atan: stack[sp - 1] = std::atan(stack[sp - 1]); break;
        }
        if (sp >= 64) throw config_error("expression too deep: " + src_);
    }
    return stack[0];
}

} // namespace flowctl
