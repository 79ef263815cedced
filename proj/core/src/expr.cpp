#include "ncs/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>

#include "ncs/error.hpp"

namespace ncs {

namespace {

struct FunctionInfo {
    const char* name;
    Expression::Op op;
    int arity;
};

constexpr FunctionInfo kFunctions[] = {
    {"sin", Expression::Op::Sin, 1},     {"cos", Expression::Op::Cos, 1},
    {"tan", Expression::Op::Tan, 1},     {"asin", Expression::Op::Asin, 1},
    {"acos", Expression::Op::Acos, 1},   {"atan", Expression::Op::Atan, 1},
    {"atan2", Expression::Op::Atan2, 2}, {"sinh", Expression::Op::Sinh, 1},
    {"cosh", Expression::Op::Cosh, 1},   {"tanh", Expression::Op::Tanh, 1},
    {"exp", Expression::Op::Exp, 1},     {"log", Expression::Op::Log, 1},
    {"sqrt", Expression::Op::Sqrt, 1},   {"abs", Expression::Op::Abs, 1},
    {"pow", Expression::Op::Pow, 2},     {"min", Expression::Op::Min, 2},
    {"max", Expression::Op::Max, 2},
};

class Parser {
public:
    Parser(const std::string& text, const std::vector<std::string>& vars,
           const std::map<std::string, double>& consts, std::vector<Expression::Instr>& code)
        : s_(text), vars_(vars), consts_(consts), code_(code) {}

    void run() {
        expr();
        skip();
        if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
    }

private:
    void fail(const std::string& what) const {
        throw ConfigError("expression '" + s_ + "' at column " + std::to_string(pos_ + 1) + ": " + what);
    }
    void skip() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }
    bool accept(char c) {
        skip();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }
    void emit(Expression::Op op, double v = 0.0, int idx = 0) { code_.push_back({op, v, idx}); }

    void expr() {
        term();
        while (true) {
            if (accept('+')) {
                term();
                emit(Expression::Op::Add);
            } else if (accept('-')) {
                term();
                emit(Expression::Op::Sub);
            } else {
                return;
            }
        }
    }
    void term() {
        unary();
        while (true) {
            if (accept('*')) {
                unary();
                emit(Expression::Op::Mul);
            } else if (accept('/')) {
                unary();
                emit(Expression::Op::Div);
            } else {
                return;
            }
        }
    }
    void unary() {
        if (accept('-')) {
            unary();
            emit(Expression::Op::Neg);
        } else if (accept('+')) {
            unary();
        } else {
            power();
        }
    }
    void power() {
        primary();
        if (accept('^')) {
            unary();
            emit(Expression::Op::Pow);
        }
    }
    void primary() {
        skip();
        if (pos_ >= s_.size()) fail("unexpected end of input");
        char c = s_[pos_];
        if (accept('(')) {
            expr();
            if (!accept(')')) fail("missing ')'");
            return;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            const char* begin = s_.c_str() + pos_;
            char* end = nullptr;
            double v = std::strtod(begin, &end);
            if (end == begin) fail("bad number");
            pos_ += static_cast<std::size_t>(end - begin);
            emit(Expression::Op::Push, v);
            return;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t start = pos_;
            while (pos_ < s_.size() &&
                   (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
                ++pos_;
            std::string name = s_.substr(start, pos_ - start);
            if (accept('(')) {
                call(name);
                return;
            }
            for (std::size_t i = 0; i < vars_.size(); ++i)
                if (vars_[i] == name) {
                    emit(Expression::Op::Var, 0.0, static_cast<int>(i));
                    return;
                }
            if (auto it = consts_.find(name); it != consts_.end()) {
                emit(Expression::Op::Push, it->second);
                return;
            }
            if (name == "pi") {
                emit(Expression::Op::Push, M_PI);
                return;
            }
            pos_ = start;
            fail("unknown identifier '" + name + "'");
        }
        fail("unexpected '" + std::string(1, c) + "'");
    }
    void call(const std::string& name) {
        for (const auto& f : kFunctions) {
            if (name != f.name) continue;
            int args = 0;
            if (!accept(')')) {
                do {
                    expr();
                    ++args;
                } while (accept(','));
                if (!accept(')')) fail("missing ')' after arguments of " + name);
            }
            if (args != f.arity)
                fail(name + " takes " + std::to_string(f.arity) + " argument(s)");
            emit(f.op);
            return;
        }
        fail("unknown function '" + name + "'");
    }

    const std::string& s_;
    const std::vector<std::string>& vars_;
    const std::map<std::string, double>& consts_;
    std::vector<Expression::Instr>& code_;
    std::size_t pos_ = 0;
};

}  // namespace

Expression Expression::parse(const std::string& text, const std::vector<std::string>& variables,
                             const std::map<std::string, double>& constants) {
    Expression e;
    e.text_ = text;
    Parser(text, variables, constants, e.code_).run();
    std::size_t depth = 0;
    for (const auto& ins : e.code_) {
        switch (ins.op) {
            case Op::Push:
            case Op::Var: ++depth; break;
            case Op::Add: case Op::Sub: case Op::Mul: case Op::Div: case Op::Pow:
            case Op::Atan2: case Op::Min: case Op::Max: --depth; break;
            default: break;
        }
        e.max_depth_ = std::max(e.max_depth_, depth);
    }
    return e;
}

double Expression::eval(const double* vars) const {
    double stack[64] = {};
    double* heap = nullptr;
    std::vector<double> big;
    if (max_depth_ > 64) {
        big.resize(max_depth_);
        heap = big.data();
    }
    double* st = heap ? heap : stack;
    std::size_t sp = 0;
    for (const auto& ins : code_) {
        switch (ins.op) {
            case Op::Push: st[sp++] = ins.value; break;
            case Op::Var: st[sp++] = vars[ins.index]; break;
            case Op::Neg: st[sp - 1] = -st[sp - 1]; break;
            case Op::Add: --sp; st[sp - 1] += st[sp]; break;
            case Op::Sub: --sp; st[sp - 1] -= st[sp]; break;
            case Op::Mul: --sp; st[sp - 1] *= st[sp]; break;
            case Op::Div: --sp; st[sp - 1] /= st[sp]; break;
            case Op::Pow: --sp; st[sp - 1] = std::pow(st[sp - 1], st[sp]); break;
            case Op::Atan2: --sp; st[sp - 1] = std::atan2(st[sp - 1], st[sp]); break;
            case Op::Min: --sp; st[sp - 1] = std::min(st[sp - 1], st[sp]); break;
            case Op::Max: --sp; st[sp - 1] = std::max(st[sp - 1], st[sp]); break;
            case Op::Sin: st[sp - 1] = std::sin(st[sp - 1]); break;
            case Op::Cos: st[sp - 1] = std::cos(st[sp - 1]); break;
            case Op::Tan: st[sp - 1] = std::tan(st[sp - 1]); break;
            case Op::Asin: st[sp - 1] = std::asin(st[sp - 1]); break;
            case Op::Acos: st[sp - 1] = std::acos(st[sp - 1]); break;
            case Op::Atan: st[sp - 1] = std::atan(st[sp - 1]); break;
            case Op::Sinh: st[sp - 1] = std::sinh(st[sp - 1]); break;
            case Op::Cosh: st[sp - 1] = std::cosh(st[sp - 1]); break;
            case Op::Tanh: st[sp - 1] = std::tanh(st[sp - 1]); break;
            case Op::Exp: st[sp - 1] = std::exp(st[sp - 1]); break;
            case Op::Log: st[sp - 1] = std::log(st[sp - 1]); break;
            case Op::Sqrt: st[sp - 1] = std::sqrt(st[sp - 1]); break;
            case Op::Abs: st[sp - 1] = std::abs(st[sp - 1]); break;
        }
    }
    return st[0];
}

}  // namespace ncs
