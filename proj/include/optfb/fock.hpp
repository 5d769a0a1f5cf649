#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <vector>

#include "optfb/policy.hpp"

namespace optfb {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

// Truncated Fock space (levels 0..dim-1), possibly a tensor product of
// atomic factors. factors empty <=> atomic.
struct Space {
    int dim = 0;
    std::vector<int> factors;

    bool atomic() const { return factors.empty(); }
    bool operator==(const Space& o) const { return dim == o.dim && factors == o.factors; }
};

Space make_space(int dim);
Space tensor_space(const std::vector<int>& dims);

// Dense operator tagged with its space.
struct Op {
    Space space;
    Matrix mat;

    Op() = default;
    Op(Space s, Matrix m) : space(std::move(s)), mat(std::move(m)) {
        if (mat.rows() != space.dim || mat.cols() != space.dim)
            throw std::invalid_argument("operator shape does not match its space");
    }

    Op dag() const { return Op(space, mat.adjoint()); }
    double hermiticity_defect() const { return (mat - mat.adjoint()).cwiseAbs().maxCoeff(); }
    bool is_hermitian(double tol = default_policy().state_tol) const {
        return hermiticity_defect() <= tol;
    }
};

Op operator+(const Op& a, const Op& b);
Op operator-(const Op& a, const Op& b);
Op operator*(const Op& a, const Op& b);
Op operator*(Complex s, const Op& a);
Op operator*(double s, const Op& a);

struct DensityMatrix {
    Space space;
    Matrix mat;

    DensityMatrix() = default;
    DensityMatrix(Space s, Matrix m) : space(std::move(s)), mat(std::move(m)) {
        if (mat.rows() != space.dim || mat.cols() != space.dim)
            throw std::invalid_argument("density matrix shape does not match its space");
    }

    // trace = 1, Hermitian, min eigenvalue >= -tol
    void validate(double tol = default_policy().state_tol) const;
    // population of the two highest Fock levels (max over tensor factors)
    double boundary_leakage() const;
};

// White-noise bath: thermal occupation N, squeezing correlation M,
// coherent amplitude beta. Physical iff |M|^2 <= N(N+1).
struct BathParams {
    double N = 0.0;
    Complex M{0.0, 0.0};
    Complex beta{0.0, 0.0};

    bool physical() const { return std::norm(M) <= N * (N + 1.0) + 1e-15; }
    bool classical() const { return std::abs(M) <= N + 1e-15; }
    // L = 2N+1+M+M*; can be below the vacuum value 1 for squeezed input
    double L() const { return 2.0 * N + 1.0 + 2.0 * M.real(); }
    void require_physical() const;

    static BathParams vacuum() { return {}; }
};

// a|n> = sqrt(n)|n-1>, top row truncated
Op annihilation(const Space& space);
Op number_op(const Space& space);
Op identity_op(const Space& space);
// (x, y) = (a+a', -ia+ia'), both Hermitian
std::pair<Op, Op> quadratures(const Space& space);

// Lift an atomic-space operator to a tensor space, identity on other slots.
Op embed(const Op& op, const Space& target, int slot);

// Partial trace over one slot of a two-factor space; returns state on the other.
DensityMatrix partial_trace(const DensityMatrix& rho, int traced_slot);

// D[c]rho = c rho c' - 1/2 {c'c, rho}; exactly traceless
Matrix dissipator_apply(const Op& c, const DensityMatrix& rho);
// H[c]rho = c rho + rho c' - Tr[c rho + rho c'] rho; traceless, nonlinear in rho
Matrix h_superop_apply(const Op& c, const DensityMatrix& rho);

Complex expect(const Op& op, const DensityMatrix& rho);
double variance(const Op& op, const DensityMatrix& rho);

// Convenience states
DensityMatrix fock_state(const Space& space, int n);
DensityMatrix vacuum_state(const Space& space);
DensityMatrix thermal_state(const Space& space, double nbar);
Vector coherent_vector(const Space& space, Complex alpha);
DensityMatrix pure_state(const Space& space, const Vector& psi);

} // namespace optfb
