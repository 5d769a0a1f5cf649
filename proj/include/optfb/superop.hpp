#pragma once

#include "optfb/fock.hpp"

namespace optfb {

// Column-major vectorization throughout: vec(A rho B) = (B^T (x) A) vec(rho).
Vector vec(const Matrix& rho);
Matrix unvec(const Vector& v, int dim);

Matrix spre(const Matrix& a);   // rho -> A rho
Matrix spost(const Matrix& b);  // rho -> rho B
Matrix sandwich(const Matrix& a, const Matrix& b); // rho -> A rho B'

// Generator on vectorized density matrices.
struct Liouvillian {
    Space space;
    Matrix mat;        // dim^2 x dim^2
    std::string label;

    Matrix apply(const Matrix& rho) const { return unvec(mat * vec(rho), space.dim); }
};

Matrix hamiltonian_superop(const Op& h);     // -i[H, .]
Matrix dissipator_superop(const Op& c);      // D[c]
Matrix commutator_superop(const Op& a);      // [A, .]

} // namespace optfb
