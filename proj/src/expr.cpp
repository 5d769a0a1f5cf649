#include "optfb/expr.hpp"

#include <cctype>
#include <cstdlib>
#include <stdexcept>

namespace optfb {

namespace {

Matrix symbol_matrix(const std::string& sym, const Space& space) {
    if (sym == "a") return annihilation(space).mat;
    if (sym == "adag") return annihilation(space).mat.adjoint();
    if (sym == "x") return quadratures(space).first.mat;
    if (sym == "y") return quadratures(space).second.mat;
    if (sym == "n") return number_op(space).mat;
    if (sym == "I") return Matrix::Identity(space.dim, space.dim);
    throw std::invalid_argument("unknown operator symbol '" + sym +
                                "' (expected one of a, adag, x, y, n, I)");
}

} // namespace

Op parse_operator_expr(const std::string& text, const Space& space) {
    Matrix acc = Matrix::Zero(space.dim, space.dim);
    size_t pos = 0;
    auto skip_ws = [&] { while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos; };

    skip_ws();
    if (pos == text.size()) throw std::invalid_argument("empty operator expression");
    bool any_term = false;
    while (pos < text.size()) {
        skip_ws();
        double sign = 1.0;
        if (text[pos] == '+' || text[pos] == '-') {
            if (!any_term && text[pos] == '+')
                throw std::invalid_argument("operator expression may not start with '+'");
            sign = text[pos] == '-' ? -1.0 : 1.0;
            ++pos;
            skip_ws();
        } else if (any_term) {
            throw std::invalid_argument("expected '+' or '-' between terms in '" + text + "'");
        }
        double coef = 1.0;
        if (pos < text.size() &&
            (std::isdigit(static_cast<unsigned char>(text[pos])) || text[pos] == '.')) {
            char* end = nullptr;
            coef = std::strtod(text.c_str() + pos, &end);
            if (end == text.c_str() + pos)
                throw std::invalid_argument("bad coefficient in '" + text + "'");
            pos = end - text.c_str();
            skip_ws();
            if (pos < text.size() && text[pos] == '*') {
                ++pos;
                skip_ws();
            }
        }
        size_t start = pos;
        while (pos < text.size() && std::isalpha(static_cast<unsigned char>(text[pos]))) ++pos;
        if (start == pos)
            throw std::invalid_argument("expected operator symbol in '" + text + "'");
        acc += sign * coef * symbol_matrix(text.substr(start, pos - start), space);
        any_term = true;
        skip_ws();
    }
    return Op(space, acc);
}

} // namespace optfb
