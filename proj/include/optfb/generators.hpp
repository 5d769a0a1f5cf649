#pragma once

#include <variant>

#include "optfb/superop.hpp"

namespace optfb {

// Feedback schemes. Operators required Hermitian are checked at construction.
struct MirrorLoopSpec {
    double gamma;
    double phi;
};
struct IntensitySpec {
    Op Z;
};
struct QuadratureSpec {
    Op Y;
};
struct ComplexAmplitudeSpec {
    Op A;
};
struct HeterodyneAnalogSpec {
    Op X;
    Op Y;
};

struct FeedbackSpec {
    std::variant<MirrorLoopSpec, IntensitySpec, QuadratureSpec,
                 ComplexAmplitudeSpec, HeterodyneAnalogSpec> scheme;
    Op H0;

    FeedbackSpec(decltype(scheme) s, Op h0);
};

enum class IntensityForm { Expanded, Lindblad };

// Single damped cavity in a broadband (N, M, beta) bath:
//   rho' = g1[(N+1)D[c] + N D[c'] + (M/2)[c',[c',rho]] + (M*/2)[c,[c,rho]]]
//          + sqrt(g1)[b* c - b c', rho] - i[H0, rho]
Liouvillian single_cavity_liouvillian(const Op& c1, double gamma1,
                                      const BathParams& bath, const Op& H0);

// Two cavities driven unidirectionally by the same bath. H acts on the
// two-factor tensor space (slot 0 = source, slot 1 = driven).
Liouvillian cascaded_liouvillian(double gamma1, double gamma2,
                                 const BathParams& bath, const Op& H);

// Intracavity coupling for the two-mode feedback model, vacuum bath, gamma1=1.
struct IntensityCoupling {
    Op K; // V = c2'c2 K
};
struct QuadratureCoupling {
    Op J; // V = (c2 + c2') J
};
struct ComplexAmplitudeCoupling {
    double g;  // V = c2 B' + c2' B with B = -i g (c1 + mu c1')
    double mu;
};
using TwoModeCoupling = std::variant<IntensityCoupling, QuadratureCoupling,
                                     ComplexAmplitudeCoupling>;

Liouvillian two_mode_feedback_liouvillian(const TwoModeCoupling& coupling,
                                          double gamma2, const Op& H0,
                                          int driven_dim);

// rho' = -i[Z, c rho c'] - 1/2 [Z,[Z, c rho c']] + D[c]rho - i[H0,rho]  (Expanded)
// rho' = D[exp(-iZ) c]rho - i[H0,rho]                                   (Lindblad)
Liouvillian intensity_feedback_liouvillian(const Op& Z, const Op& H0,
                                           IntensityForm form);

// Current-proportional quadrature feedback in a general bath:
//   (N+1){D[c] - i[Y, c rho + rho c']} + N{D[c'] + i[Y, c' rho + rho c]}
//   + M{1/2[c',[c',rho]] + i[Y,[c',rho]]} + M*{1/2[c,[c,rho]] - i[Y,[c,rho]]}
//   + (2N+1+M+M*) D[Y] rho - i[H0, rho]
Liouvillian quadrature_feedback_liouvillian(const Op& Y, const Op& H0,
                                            const BathParams& bath);

// Coherent feedback of both quadratures through the operator A:
//   (N+1){D[c+A] - i[(i/2)(c'A - A'c), rho]} + N{D[c'+A'] - i[(i/2)(cA' - Ac'), rho]}
//   + M{1/2[c'+A',[c'+A',rho]] + i[(i/2)[c',A'], rho]}
//   + M*{1/2[c+A,[c+A,rho]] + i[(i/2)[c,A], rho]} - i[H0, rho]
Liouvillian complex_feedback_liouvillian(const Op& A, const Op& H0,
                                         const BathParams& bath);

// Output of one mirror fed straight back into the other:
//   rho' = 2 g (1 + cos phi) D[a] rho - i g sin phi [a'a, rho]
Liouvillian mirror_loop_liouvillian(const Space& space, double gamma, double phi);

// Heterodyne-current-driven feedback through X (y-current) and Y (x-current):
// same linear terms as the A = X - iY coherent generator, plus the
// measurement diffusion 2Lx D[Y] + 2Ly D[X], Lq = 2N+1 +- (M+M*).
Liouvillian heterodyne_feedback_liouvillian(const Op& X, const Op& Y,
                                            const Op& H0, const BathParams& bath);

// The heterodyne imitation of the mirror loop: the loop generator plus the
// measurement back-action g(D[a] + D[a']).
Liouvillian heterodyne_mirror_analog_liouvillian(const Space& space,
                                                 double gamma, double phi);

struct LindbladCheckResult {
    bool valid;
    double min_kossakowski_eigenvalue;
};

// Decompose L over the generalized Gell-Mann basis into Hamiltonian part
// plus Kossakowski matrix; valid iff that matrix is PSD within cp_tol.
LindbladCheckResult lindblad_form_check(const Liouvillian& L,
                                        double tol = default_policy().cp_tol);

// HS-orthonormal Hermitian basis used by the check: F_0 = I/sqrt(d), then
// diagonal, then (j<k) symmetric, then antisymmetric elements, each pair in
// row-major (j,k) order. Exposed so the decomposition is reproducible.
std::vector<Matrix> gell_mann_basis(int dim);

} // namespace optfb
