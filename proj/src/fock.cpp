#include "optfb/fock.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <numeric>

namespace optfb {

Space make_space(int dim) {
    if (dim < 2) throw std::invalid_argument("Fock truncation must be at least 2");
    return Space{dim, {}};
}

Space tensor_space(const std::vector<int>& dims) {
    if (dims.size() < 2) throw std::invalid_argument("tensor space needs at least two factors");
    int total = 1;
    for (int d : dims) {
        if (d < 2) throw std::invalid_argument("each tensor factor must have dim >= 2");
        total *= d;
    }
    return Space{total, dims};
}

static void require_same_space(const Space& a, const Space& b) {
    if (!(a == b)) throw std::invalid_argument("operator/state space mismatch");
}

Op operator+(const Op& a, const Op& b) {
    require_same_space(a.space, b.space);
    return Op(a.space, a.mat + b.mat);
}
Op operator-(const Op& a, const Op& b) {
    require_same_space(a.space, b.space);
    return Op(a.space, a.mat - b.mat);
}
Op operator*(const Op& a, const Op& b) {
    require_same_space(a.space, b.space);
    return Op(a.space, a.mat * b.mat);
}
Op operator*(Complex s, const Op& a) { return Op(a.space, s * a.mat); }
Op operator*(double s, const Op& a) { return Op(a.space, s * a.mat); }

void DensityMatrix::validate(double tol) const {
    double tr_err = std::abs(mat.trace() - Complex(1.0, 0.0));
    if (tr_err > tol) throw std::runtime_error("density matrix trace differs from 1 by " + std::to_string(tr_err));
    double herm = (mat - mat.adjoint()).cwiseAbs().maxCoeff();
    if (herm > tol) throw std::runtime_error("density matrix not Hermitian, defect " + std::to_string(herm));
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (mat + mat.adjoint()), Eigen::EigenvaluesOnly);
    double min_eig = es.eigenvalues().minCoeff();
    if (min_eig < -tol) throw std::runtime_error("density matrix has eigenvalue " + std::to_string(min_eig));
}

double DensityMatrix::boundary_leakage() const {
    // population of the top two levels; for tensor spaces, max over factors
    std::vector<int> dims = space.atomic() ? std::vector<int>{space.dim} : space.factors;
    double worst = 0.0;
    int n_factors = static_cast<int>(dims.size());
    for (int f = 0; f < n_factors; ++f) {
        // stride pattern of factor f in the row index
        int after = 1;
        for (int g = f + 1; g < n_factors; ++g) after *= dims[g];
        double pop = 0.0;
        for (int i = 0; i < space.dim; ++i) {
            int level = (i / after) % dims[f];
            if (level >= dims[f] - 2) pop += mat(i, i).real();
        }
        worst = std::max(worst, pop);
    }
    return worst;
}

void BathParams::require_physical() const {
    if (N < 0.0) throw std::invalid_argument("bath occupation N must be nonnegative");
    if (!physical())
        throw std::invalid_argument("unphysical bath: |M|^2 > N(N+1)");
}

Op annihilation(const Space& space) {
    if (!space.atomic()) throw std::invalid_argument("annihilation needs an atomic space; use embed");
    Matrix m = Matrix::Zero(space.dim, space.dim);
    for (int n = 1; n < space.dim; ++n) m(n - 1, n) = std::sqrt(double(n));
    return Op(space, m);
}

Op number_op(const Space& space) {
    Matrix m = Matrix::Zero(space.dim, space.dim);
    if (space.atomic()) {
        for (int n = 0; n < space.dim; ++n) m(n, n) = double(n);
    } else {
        throw std::invalid_argument("number_op needs an atomic space; use embed");
    }
    return Op(space, m);
}

Op identity_op(const Space& space) {
    return Op(space, Matrix::Identity(space.dim, space.dim));
}

std::pair<Op, Op> quadratures(const Space& space) {
    Op a = annihilation(space);
    const Complex i(0.0, 1.0);
    Op x(space, a.mat + a.mat.adjoint());
    Op y(space, -i * a.mat + i * a.mat.adjoint());
    return {x, y};
}

Op embed(const Op& op, const Space& target, int slot) {
    if (target.atomic()) throw std::invalid_argument("embed target must be a tensor space");
    int n = static_cast<int>(target.factors.size());
    if (slot < 0 || slot >= n) throw std::invalid_argument("embed slot out of range");
    if (op.space.dim != target.factors[slot])
        throw std::invalid_argument("operator dim does not match the target factor");
    Matrix acc = Matrix::Identity(1, 1);
    for (int f = 0; f < n; ++f) {
        const Matrix& block = (f == slot)
            ? op.mat
            : Matrix(Matrix::Identity(target.factors[f], target.factors[f]));
        Matrix next(acc.rows() * block.rows(), acc.cols() * block.cols());
        for (int i = 0; i < acc.rows(); ++i)
            for (int j = 0; j < acc.cols(); ++j)
                next.block(i * block.rows(), j * block.cols(), block.rows(), block.cols()) = acc(i, j) * block;
        acc = std::move(next);
    }
    return Op(target, acc);
}

DensityMatrix partial_trace(const DensityMatrix& rho, int traced_slot) {
    const Space& sp = rho.space;
    if (sp.factors.size() != 2) throw std::invalid_argument("partial_trace expects a two-factor space");
    if (traced_slot != 0 && traced_slot != 1) throw std::invalid_argument("traced_slot must be 0 or 1");
    int d0 = sp.factors[0], d1 = sp.factors[1];
    int keep = traced_slot == 0 ? d1 : d0;
    Matrix out = Matrix::Zero(keep, keep);
    // row index i = i0*d1 + i1 with kron(A,B): slot 0 is the slow index
    for (int i0 = 0; i0 < d0; ++i0)
        for (int i1 = 0; i1 < d1; ++i1)
            for (int j0 = 0; j0 < d0; ++j0)
                for (int j1 = 0; j1 < d1; ++j1) {
                    Complex v = rho.mat(i0 * d1 + i1, j0 * d1 + j1);
                    if (traced_slot == 0) {
                        if (i0 == j0) out(i1, j1) += v;
                    } else {
                        if (i1 == j1) out(i0, j0) += v;
                    }
                }
    return DensityMatrix(make_space(keep), out);
}

Matrix dissipator_apply(const Op& c, const DensityMatrix& rho) {
    require_same_space(c.space, rho.space);
    Matrix cd = c.mat.adjoint();
    Matrix cdc = cd * c.mat;
    return c.mat * rho.mat * cd - 0.5 * (cdc * rho.mat + rho.mat * cdc);
}

Matrix h_superop_apply(const Op& c, const DensityMatrix& rho) {
    require_same_space(c.space, rho.space);
    Matrix lin = c.mat * rho.mat + rho.mat * c.mat.adjoint();
    return lin - lin.trace() * rho.mat;
}

Complex expect(const Op& op, const DensityMatrix& rho) {
    require_same_space(op.space, rho.space);
    return (op.mat * rho.mat).trace();
}

double variance(const Op& op, const DensityMatrix& rho) {
    if (!op.is_hermitian()) throw std::invalid_argument("variance requires a Hermitian operator");
    Complex m1 = expect(op, rho);
    Complex m2 = (op.mat * op.mat * rho.mat).trace();
    return m2.real() - m1.real() * m1.real();
}

DensityMatrix fock_state(const Space& space, int n) {
    if (n < 0 || n >= space.dim) throw std::invalid_argument("Fock level outside truncation");
    Matrix m = Matrix::Zero(space.dim, space.dim);
    m(n, n) = 1.0;
    return DensityMatrix(space, m);
}

DensityMatrix vacuum_state(const Space& space) {
    Matrix m = Matrix::Zero(space.dim, space.dim);
    m(0, 0) = 1.0;
    return DensityMatrix(space, m);
}

DensityMatrix thermal_state(const Space& space, double nbar) {
    if (nbar < 0.0) throw std::invalid_argument("thermal occupation must be nonnegative");
    Matrix m = Matrix::Zero(space.dim, space.dim);
    double r = nbar / (nbar + 1.0);
    double p = 1.0 / (nbar + 1.0);
    double total = 0.0;
    for (int n = 0; n < space.dim; ++n) {
        m(n, n) = p;
        total += p;
        p *= r;
    }
    m /= total; // renormalize over the truncated ladder
    return DensityMatrix(space, m);
}

Vector coherent_vector(const Space& space, Complex alpha) {
    Vector psi(space.dim);
    Complex amp = 1.0;
    for (int n = 0; n < space.dim; ++n) {
        psi(n) = amp;
        amp *= alpha / std::sqrt(double(n + 1));
    }
    psi.normalize();
    return psi;
}

DensityMatrix pure_state(const Space& space, const Vector& psi) {
    if (psi.size() != space.dim) throw std::invalid_argument("state vector dim mismatch");
    Vector p = psi.normalized();
    return DensityMatrix(space, p * p.adjoint());
}

} // namespace optfb
