#pragma once

#include <complex>
#include <vector>

namespace optfb {

// Scalar Langevin model for the two decoupled quadratures of a linearly
// fed-back cavity, A = (lambda/2)(c1 + mu c1'):
//   q' = -drift * q - input_gain * nu_q
// with the y row obtained from the x row by mu -> -mu.
struct QuadratureRow {
    double drift;       // coefficient of q
    double input_gain;  // coefficient of the vacuum noise nu_q
    double output_gain; // system coefficient in the reflected field b3
};

struct LinearQuadratureModel {
    double lambda;
    double mu;
    double tau; // loop delay; enters spectra as lambda -> lambda e^{i w tau}
    QuadratureRow x;
    QuadratureRow y;
};

struct Spectrum {
    std::vector<double> omegas;
    std::vector<double> Sx;
    std::vector<double> Sy;
};

LinearQuadratureModel build_linear_model(double lambda, double mu, double tau = 0.0);

// Closed forms: Vq = [1 + l(1-m) + (l/2)^2 (1-m)^2] / [1 + l(1-m) + (l/2)^2 (1-m^2)],
// evaluated at m = mu for x and m = -mu for y.
std::pair<double, double> steady_variance_analytic(double lambda, double mu);

// Printed closed forms. mu = -1 uses the delay-aware quadrature-loop formula
//   Sx = (1/4 + w^2)/|1/2 + l e^{i w tau} - i w|^2,  Sy = 1/Sx;
// otherwise Sx = [ (sigma + l mu)^2/4 + w^2 ] / [ (sigma - l mu)^2/4 + w^2 ],
// sigma = 1 + l + (l/2)^2 (1 - mu^2), and Sy by mu -> -mu.
Spectrum output_spectrum(const LinearQuadratureModel& model,
                         const std::vector<double>& omegas);

// Independent route: scalar transfer function of the model rows,
// Sq(w) = |1 - output_gain * input_gain / (drift - i w)|^2. Valid at tau = 0.
Spectrum transfer_function_spectrum(const LinearQuadratureModel& model,
                                    const std::vector<double>& omegas);

// In-loop commutator correction (1/4 + w^2)/(1/4 + w^2 + l'(1/2 + i w)),
// l' = lambda e^{i w tau}.
std::complex<double> inloop_commutator_factor(double lambda, double omega,
                                              double tau = 0.0);

struct DiffusionEigenvalues {
    double e_plus;       // (lambda^2/4)(|mu|^2 + |mu|)
    double e_minus;      // (lambda^2/4)(|mu|^2 - |mu|)
    bool nonclassical;   // min eigenvalue < -1e-12
};

// Eigenvalues of the phase-space diffusion matrix contributed by D[A].
DiffusionEigenvalues pfunction_diffusion_eigenvalues(double lambda, double mu);

} // namespace optfb
