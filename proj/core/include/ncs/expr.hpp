#pragma once

#include <map>
#include <string>
#include <vector>

namespace ncs {

// Arithmetic expression compiled to a small stack program.
// Grammar: + - * / ^, unary minus, parentheses, numeric literals, named variables,
// named constants, and calls to sin cos tan asin acos atan atan2 sinh cosh tanh exp log
// sqrt abs pow min max.
class Expression {
public:
    static Expression parse(const std::string& text, const std::vector<std::string>& variables,
                            const std::map<std::string, double>& constants = {});

    double eval(const double* vars) const;
    double eval(const std::vector<double>& vars) const { return eval(vars.data()); }
    const std::string& text() const { return text_; }

    enum class Op : unsigned char {
        Push, Var, Neg, Add, Sub, Mul, Div, Pow,
        Sin, Cos, Tan, Asin, Acos, Atan, Atan2, Sinh, Cosh, Tanh, Exp, Log, Sqrt, Abs, Min, Max
    };
    struct Instr {
        Op op;
        double value = 0.0;
        int index = 0;
    };

private:
    std::string text_;
    std::vector<Instr> code_;
    std::size_t max_depth_ = 0;
};

}  // namespace ncs
