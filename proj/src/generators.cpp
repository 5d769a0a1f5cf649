#include "optfb/generators.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

namespace optfb {

namespace {

const Complex kI(0.0, 1.0);

void require_hermitian(const Op& op, const char* name) {
    if (!op.is_hermitian())
        throw std::invalid_argument(std::string(name) + " must be Hermitian");
}

void require_no_drive(const BathParams& bath) {
    if (std::abs(bath.beta) != 0.0)
        throw std::invalid_argument("coherent drive is not supported in feedback generators");
}

// rho -> c rho + rho c'
Matrix lower_flank(const Op& c) { return spre(c.mat) + spost(c.mat.adjoint()); }

Matrix dcom(const Op& a) { return commutator_superop(a); }

Matrix bath_superop(const Op& c, double gamma, const BathParams& bath) {
    Op cd = c.dag();
    Matrix s = gamma * (bath.N + 1.0) * dissipator_superop(c);
    if (bath.N != 0.0) s += gamma * bath.N * dissipator_superop(cd);
    if (std::abs(bath.M) != 0.0)
        s += gamma * (0.5 * bath.M * dcom(cd) * dcom(cd)
                      + 0.5 * std::conj(bath.M) * dcom(c) * dcom(c));
    if (std::abs(bath.beta) != 0.0) {
        Op drive(c.space, std::conj(bath.beta) * c.mat - bath.beta * c.mat.adjoint());
        s += std::sqrt(gamma) * dcom(drive);
    }
    return s;
}

} // namespace

FeedbackSpec::FeedbackSpec(decltype(scheme) s, Op h0) : scheme(std::move(s)), H0(std::move(h0)) {
    require_hermitian(H0, "H0");
    if (auto* p = std::get_if<IntensitySpec>(&scheme)) require_hermitian(p->Z, "Z");
    if (auto* p = std::get_if<QuadratureSpec>(&scheme)) require_hermitian(p->Y, "Y");
    if (auto* p = std::get_if<HeterodyneAnalogSpec>(&scheme)) {
        require_hermitian(p->X, "X");
        require_hermitian(p->Y, "Y");
    }
}

Liouvillian single_cavity_liouvillian(const Op& c1, double gamma1,
                                      const BathParams& bath, const Op& H0) {
    bath.require_physical();
    require_hermitian(H0, "H0");
    if (gamma1 < 0.0) throw std::invalid_argument("decay rate must be nonnegative");
    Matrix s = bath_superop(c1, gamma1, bath) + hamiltonian_superop(H0);
    return Liouvillian{c1.space, std::move(s), "single-cavity"};
}

Liouvillian cascaded_liouvillian(double gamma1, double gamma2,
                                 const BathParams& bath, const Op& H) {
    bath.require_physical();
    require_hermitian(H, "H");
    const Space& sp = H.space;
    if (sp.factors.size() != 2)
        throw std::invalid_argument("cascaded generator needs a two-factor tensor space");
    Op c1 = embed(annihilation(make_space(sp.factors[0])), sp, 0);
    Op c2 = embed(annihilation(make_space(sp.factors[1])), sp, 1);
    Op c1d = c1.dag(), c2d = c2.dag();
    double g12 = std::sqrt(gamma1 * gamma2);

    // cross terms: [c1 W, c2'] + [c2, W c1'] for the (N+1) channel, etc.
    Matrix crossNp1 = spre(c2d.mat * c1.mat) * (-1.0) + sandwich(c1.mat, c2.mat)
                    + sandwich(c2.mat, c1.mat) - spost(c1d.mat * c2.mat);

    Matrix s = gamma1 * (bath.N + 1.0) * dissipator_superop(c1)
             + gamma2 * (bath.N + 1.0) * dissipator_superop(c2)
             + g12 * (bath.N + 1.0) * crossNp1
             + hamiltonian_superop(H);
    if (bath.N != 0.0) {
        Matrix crossN = spre(c2.mat * c1d.mat) * (-1.0) + sandwich(c1d.mat, c2d.mat)
                      + sandwich(c2d.mat, c1d.mat) - spost(c1.mat * c2d.mat);
        s += gamma1 * bath.N * dissipator_superop(c1d)
           + gamma2 * bath.N * dissipator_superop(c2d)
           + g12 * bath.N * crossN;
    }
    if (std::abs(bath.M) != 0.0) {
        s += gamma1 * (0.5 * bath.M * dcom(c1d) * dcom(c1d)
                       + 0.5 * std::conj(bath.M) * dcom(c1) * dcom(c1))
           + gamma2 * (0.5 * bath.M * dcom(c2d) * dcom(c2d)
                       + 0.5 * std::conj(bath.M) * dcom(c2) * dcom(c2))
           + g12 * (bath.M * dcom(c2d) * dcom(c1d)
                    + std::conj(bath.M) * dcom(c2) * dcom(c1));
    }
    if (std::abs(bath.beta) != 0.0) {
        Matrix drive1 = std::conj(bath.beta) * c1.mat - bath.beta * c1d.mat;
        Matrix drive2 = std::conj(bath.beta) * c2.mat - bath.beta * c2d.mat;
        s += std::sqrt(gamma1) * (spre(drive1) - spost(drive1))
           + std::sqrt(gamma2) * (spre(drive2) - spost(drive2));
    }
    return Liouvillian{sp, std::move(s), "cascaded"};
}

Liouvillian two_mode_feedback_liouvillian(const TwoModeCoupling& coupling,
                                          double gamma2, const Op& H0,
                                          int driven_dim) {
    require_hermitian(H0, "H0");
    Space sp = tensor_space({H0.space.dim, driven_dim});
    Op c1 = embed(annihilation(H0.space), sp, 0);
    Op c2 = embed(annihilation(make_space(driven_dim)), sp, 1);
    Op H = embed(H0, sp, 0);
    if (auto* p = std::get_if<IntensityCoupling>(&coupling)) {
        require_hermitian(p->K, "K");
        H = H + Op(sp, (c2.dag() * c2).mat * embed(p->K, sp, 0).mat);
    } else if (auto* p = std::get_if<QuadratureCoupling>(&coupling)) {
        require_hermitian(p->J, "J");
        H = H + Op(sp, (c2.mat + c2.dag().mat) * embed(p->J, sp, 0).mat);
    } else {
        auto& ca = std::get<ComplexAmplitudeCoupling>(coupling);
        // V = c2 B' + c2' B, B = -i g (c1 + mu c1')
        Op B(sp, -kI * ca.g * (c1.mat + ca.mu * c1.dag().mat));
        H = H + Op(sp, c2.mat * B.dag().mat + c2.dag().mat * B.mat);
    }
    Liouvillian L = cascaded_liouvillian(1.0, gamma2, BathParams::vacuum(), H);
    L.label = "two-mode-feedback";
    return L;
}

Liouvillian intensity_feedback_liouvillian(const Op& Z, const Op& H0,
                                           IntensityForm form) {
    require_hermitian(Z, "Z");
    require_hermitian(H0, "H0");
    Op c1 = annihilation(Z.space);
    Matrix s;
    if (form == IntensityForm::Expanded) {
        Matrix feed = sandwich(c1.mat, c1.mat); // rho -> c rho c'
        s = -kI * dcom(Z) * feed - 0.5 * dcom(Z) * dcom(Z) * feed
          + dissipator_superop(c1) + hamiltonian_superop(H0);
    } else {
        // exp(-iZ) by eigendecomposition, exact at any Z
        Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (Z.mat + Z.mat.adjoint()));
        Matrix phases = (-kI * es.eigenvalues().cast<Complex>().array()).exp().matrix().asDiagonal();
        Matrix expmiZ = es.eigenvectors() * phases * es.eigenvectors().adjoint();
        Op jump(Z.space, expmiZ * c1.mat);
        s = dissipator_superop(jump) + hamiltonian_superop(H0);
    }
    return Liouvillian{Z.space, std::move(s),
                       form == IntensityForm::Expanded ? "intensity-expanded" : "intensity-lindblad"};
}

Liouvillian quadrature_feedback_liouvillian(const Op& Y, const Op& H0,
                                            const BathParams& bath) {
    require_hermitian(Y, "Y");
    require_hermitian(H0, "H0");
    bath.require_physical();
    require_no_drive(bath);
    Op c = annihilation(Y.space);
    Op cd = c.dag();
    Matrix comY = dcom(Y);
    Matrix s = (bath.N + 1.0) * (dissipator_superop(c) - kI * comY * lower_flank(c))
             + bath.N * (dissipator_superop(cd) + kI * comY * lower_flank(cd))
             + bath.M * (0.5 * dcom(cd) * dcom(cd) + kI * comY * dcom(cd))
             + std::conj(bath.M) * (0.5 * dcom(c) * dcom(c) - kI * comY * dcom(c))
             + bath.L() * dissipator_superop(Y)
             + hamiltonian_superop(H0);
    return Liouvillian{Y.space, std::move(s), "quadrature-feedback"};
}

Liouvillian complex_feedback_liouvillian(const Op& A, const Op& H0,
                                         const BathParams& bath) {
    require_hermitian(H0, "H0");
    bath.require_physical();
    require_no_drive(bath);
    if (!(A.space == H0.space)) throw std::invalid_argument("A and H0 live on different spaces");
    Op c = annihilation(A.space);
    Op cd = c.dag();
    Op Ad = A.dag();
    Op cA(A.space, c.mat + A.mat);
    Op cAd = cA.dag();
    Matrix h1 = 0.5 * kI * (cd.mat * A.mat - Ad.mat * c.mat);
    Matrix h2 = 0.5 * kI * (c.mat * Ad.mat - A.mat * cd.mat);
    Matrix hM = 0.5 * kI * (cd.mat * Ad.mat - Ad.mat * cd.mat);
    Matrix hMs = 0.5 * kI * (c.mat * A.mat - A.mat * c.mat);
    Matrix s = (bath.N + 1.0) * (dissipator_superop(cA) - kI * (spre(h1) - spost(h1)))
             + bath.N * (dissipator_superop(cAd) - kI * (spre(h2) - spost(h2)))
             + bath.M * (0.5 * dcom(cAd) * dcom(cAd) + kI * (spre(hM) - spost(hM)))
             + std::conj(bath.M) * (0.5 * dcom(cA) * dcom(cA) + kI * (spre(hMs) - spost(hMs)))
             + hamiltonian_superop(H0);
    return Liouvillian{A.space, std::move(s), "complex-feedback"};
}

Liouvillian mirror_loop_liouvillian(const Space& space, double gamma, double phi) {
    if (gamma <= 0.0) throw std::invalid_argument("mirror loop rate must be positive");
    Op a = annihilation(space);
    Op n(space, a.mat.adjoint() * a.mat);
    Matrix s = 2.0 * gamma * (1.0 + std::cos(phi)) * dissipator_superop(a)
             - kI * gamma * std::sin(phi) * dcom(n);
    return Liouvillian{space, std::move(s), "mirror-loop"};
}

Liouvillian heterodyne_feedback_liouvillian(const Op& X, const Op& Y,
                                            const Op& H0, const BathParams& bath) {
    require_hermitian(X, "X");
    require_hermitian(Y, "Y");
    require_hermitian(H0, "H0");
    bath.require_physical();
    require_no_drive(bath);
    Op c = annihilation(X.space);
    Op cd = c.dag();
    Matrix comX = dcom(X), comY = dcom(Y);
    // rho -> -i c rho + i rho c' and rho -> i c' rho - i rho c
    Matrix yflank = -kI * spre(c.mat) + kI * spost(cd.mat);
    Matrix yflankd = kI * spre(cd.mat) - kI * spost(c.mat);
    double Lx = 2.0 * bath.N + 1.0 + 2.0 * bath.M.real();
    double Ly = 2.0 * bath.N + 1.0 - 2.0 * bath.M.real();
    Matrix s = (bath.N + 1.0) * (dissipator_superop(c) - kI * comY * lower_flank(c) - kI * comX * yflank)
             + bath.N * (dissipator_superop(cd) + kI * comY * lower_flank(cd) - kI * comX * yflankd)
             + bath.M * (0.5 * dcom(cd) * dcom(cd) + kI * comY * dcom(cd) - kI * comX * (kI * dcom(cd)))
             + std::conj(bath.M) * (0.5 * dcom(c) * dcom(c) - kI * comY * dcom(c) + kI * comX * (-kI * dcom(c)))
             + 2.0 * Lx * dissipator_superop(Y) + 2.0 * Ly * dissipator_superop(X)
             + hamiltonian_superop(H0);
    return Liouvillian{X.space, std::move(s), "heterodyne-feedback"};
}

Liouvillian heterodyne_mirror_analog_liouvillian(const Space& space,
                                                 double gamma, double phi) {
    Liouvillian L = mirror_loop_liouvillian(space, gamma, phi);
    Op a = annihilation(space);
    L.mat += gamma * (dissipator_superop(a) + dissipator_superop(a.dag()));
    L.label = "heterodyne-mirror-analog";
    return L;
}

std::vector<Matrix> gell_mann_basis(int dim) {
    std::vector<Matrix> basis;
    basis.reserve(dim * dim);
    basis.push_back(Matrix::Identity(dim, dim) / std::sqrt(double(dim)));
    for (int l = 1; l < dim; ++l) {
        Matrix d = Matrix::Zero(dim, dim);
        for (int m = 0; m < l; ++m) d(m, m) = 1.0;
        d(l, l) = -double(l);
        basis.push_back(d / std::sqrt(double(l) * (l + 1.0)));
    }
    for (int j = 0; j < dim; ++j)
        for (int k = j + 1; k < dim; ++k) {
            Matrix m = Matrix::Zero(dim, dim);
            m(j, k) = m(k, j) = 1.0 / std::sqrt(2.0);
            basis.push_back(m);
        }
    for (int j = 0; j < dim; ++j)
        for (int k = j + 1; k < dim; ++k) {
            Matrix m = Matrix::Zero(dim, dim);
            m(j, k) = -kI / std::sqrt(2.0);
            m(k, j) = kI / std::sqrt(2.0);
            basis.push_back(m);
        }
    return basis;
}

LindbladCheckResult lindblad_form_check(const Liouvillian& L, double tol) {
    int d = L.space.dim;
    int d2 = d * d;
    const Matrix& S = L.mat;

    // trace preservation: vec(I)' S = 0
    Vector vecI = Vector::Zero(d2);
    for (int i = 0; i < d; ++i) vecI(i + d * i) = 1.0;
    double tp = (vecI.adjoint() * S).cwiseAbs().maxCoeff();
    if (tp > 1e-8) throw std::invalid_argument("generator is not trace preserving");

    // rearrange S into T with L(rho) = sum T_(ik),(jl) E_ik rho E_jl'
    Matrix T(d2, d2);
    for (int i = 0; i < d; ++i)
        for (int k = 0; k < d; ++k)
            for (int j = 0; j < d; ++j)
                for (int l = 0; l < d; ++l)
                    T(i + d * k, j + d * l) = S(i + d * j, k + d * l);
    double hp = (T - T.adjoint()).cwiseAbs().maxCoeff();
    if (hp > 1e-8) throw std::invalid_argument("generator does not preserve Hermiticity");

    auto basis = gell_mann_basis(d);
    Matrix V(d2, d2);
    for (int a = 0; a < d2; ++a) V.col(a) = vec(basis[a]);
    Matrix c = V.adjoint() * T * V;
    // Kossakowski block excludes F_0 = I/sqrt(d)
    Matrix koss = 0.5 * (c.block(1, 1, d2 - 1, d2 - 1)
                         + c.block(1, 1, d2 - 1, d2 - 1).adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix> es(koss, Eigen::EigenvaluesOnly);
    double min_eig = es.eigenvalues().minCoeff();
    return {min_eig >= -tol, min_eig};
}

} // namespace optfb
