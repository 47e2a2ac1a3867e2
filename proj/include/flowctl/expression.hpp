#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "flowctl/errors.hpp"

namespace flowctl {

// Compiled scalar expression in named variables.
//
// Grammar: + - * / ^ (right assoc), unary minus, parentheses,
// functions sin cos tan exp ln atan, constant pi, decimal literals.
// Parse errors carry a character offset into the source string.
class Expression {
public:
    // `variables` fixes the argument order of eval()
    static Expression parse(const std::string& source, const std::vector<std::string>& variables);

    double eval(const double* args) const;
    double eval(const std::vector<double>& args) const { return eval(args.data()); }

    const std::string& source() const { return src_; }

private:
    enum class Op : uint8_t {
        push_const, push_var,
        add, sub, mul, div, pow, neg,
        sin, cos, tan, exp, ln, atan,
    };
    struct Instr {
        Op op;
        uint32_t slot = 0;  // variable index for push_var
        double value = 0.0; // literal for push_const
    };

    std::string src_;
    std::vector<Instr> code_;
    size_t n_vars_ = 0;

    friend class ExprParser;
};

} // namespace flowctl
