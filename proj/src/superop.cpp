#include "optfb/superop.hpp"

#include <unsupported/Eigen/KroneckerProduct>

namespace optfb {

Vector vec(const Matrix& rho) {
    return Eigen::Map<const Vector>(rho.data(), rho.size());
}

Matrix unvec(const Vector& v, int dim) {
    return Eigen::Map<const Matrix>(v.data(), dim, dim);
}

Matrix spre(const Matrix& a) {
    Matrix id = Matrix::Identity(a.rows(), a.cols());
    return Eigen::kroneckerProduct(id, a);
}

Matrix spost(const Matrix& b) {
    Matrix id = Matrix::Identity(b.rows(), b.cols());
    return Eigen::kroneckerProduct(b.transpose(), id);
}

Matrix sandwich(const Matrix& a, const Matrix& b) {
    // rho -> A rho B': vec -> (B* (x) A) vec
    return Eigen::kroneckerProduct(b.conjugate(), a);
}

Matrix hamiltonian_superop(const Op& h) {
    const Complex i(0.0, 1.0);
    return -i * (spre(h.mat) - spost(h.mat));
}

Matrix dissipator_superop(const Op& c) {
    Matrix cdc = c.mat.adjoint() * c.mat;
    return sandwich(c.mat, c.mat) - 0.5 * (spre(cdc) + spost(cdc));
}

Matrix commutator_superop(const Op& a) {
    return spre(a.mat) - spost(a.mat);
}

} // namespace optfb
