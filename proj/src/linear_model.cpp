#include "optfb/linear_model.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

namespace optfb {

namespace {

QuadratureRow make_row(double lambda, double m) {
    QuadratureRow row;
    row.drift = 0.5 * (1.0 + lambda * (1.0 - m)
                       + 0.25 * lambda * lambda * (1.0 - m * m));
    row.input_gain = 1.0 + 0.5 * lambda * (1.0 - m);
    // b3 = -(nu + c1 + A); quadrature component of c1 + A + h.c.
    row.output_gain = 1.0 + 0.5 * lambda * (1.0 + m);
    return row;
}

} // namespace

LinearQuadratureModel build_linear_model(double lambda, double mu, double tau) {
    if (lambda < 0.0) throw std::invalid_argument("lambda must be nonnegative");
    if (tau < 0.0) throw std::invalid_argument("tau must be nonnegative");
    LinearQuadratureModel m;
    m.lambda = lambda;
    m.mu = mu;
    m.tau = tau;
    m.x = make_row(lambda, mu);
    m.y = make_row(lambda, -mu);
    return m;
}

std::pair<double, double> steady_variance_analytic(double lambda, double mu) {
    auto v_of = [lambda](double m) {
        QuadratureRow r = make_row(lambda, m);
        return r.input_gain * r.input_gain / (2.0 * r.drift);
    };
    return {v_of(mu), v_of(-mu)};
}

Spectrum output_spectrum(const LinearQuadratureModel& model,
                         const std::vector<double>& omegas) {
    Spectrum s;
    s.omegas = omegas;
    s.Sx.reserve(omegas.size());
    s.Sy.reserve(omegas.size());
    const double l = model.lambda, mu = model.mu;
    const std::complex<double> i(0.0, 1.0);
    if (mu == -1.0) {
        // quadrature loop, delay enters as l -> l e^{i w tau}
        for (double w : omegas) {
            std::complex<double> lphase = l * std::exp(i * w * model.tau);
            double sx = (0.25 + w * w) / std::norm(0.5 + lphase - i * w);
            s.Sx.push_back(sx);
            s.Sy.push_back(1.0 / sx);
        }
    } else {
        if (model.tau != 0.0)
            throw std::invalid_argument("loop delay is only modelled for the mu = -1 spectra");
        auto closed = [l](double m, double w) {
            double sigma = 1.0 + l + 0.25 * l * l * (1.0 - m * m);
            double num = 0.25 * (sigma + l * m) * (sigma + l * m) + w * w;
            double den = 0.25 * (sigma - l * m) * (sigma - l * m) + w * w;
            return num / den;
        };
        for (double w : omegas) {
            s.Sx.push_back(closed(mu, w));
            s.Sy.push_back(closed(-mu, w));
        }
    }
    return s;
}

Spectrum transfer_function_spectrum(const LinearQuadratureModel& model,
                                    const std::vector<double>& omegas) {
    if (model.tau != 0.0)
        throw std::invalid_argument("transfer-function route assumes tau = 0");
    Spectrum s;
    s.omegas = omegas;
    const std::complex<double> i(0.0, 1.0);
    auto eval = [&](const QuadratureRow& r, double w) {
        // q~ = -input_gain nu~/(drift - iw); b3 = -(nu + output_gain q)
        std::complex<double> t = 1.0 - r.output_gain * r.input_gain / (r.drift - i * w);
        return std::norm(t);
    };
    for (double w : omegas) {
        s.Sx.push_back(eval(model.x, w));
        s.Sy.push_back(eval(model.y, w));
    }
    return s;
}

std::complex<double> inloop_commutator_factor(double lambda, double omega,
                                              double tau) {
    if (lambda < 0.0) throw std::invalid_argument("lambda must be nonnegative");
    const std::complex<double> i(0.0, 1.0);
    std::complex<double> lphase = lambda * std::exp(i * omega * tau);
    double base = 0.25 + omega * omega;
    return base / (base + lphase * (0.5 + i * omega));
}

DiffusionEigenvalues pfunction_diffusion_eigenvalues(double lambda, double mu) {
    if (lambda < 0.0) throw std::invalid_argument("lambda must be nonnegative");
    // D[A] with A = u c + v c', u = lambda/2, v = lambda mu / 2 adds
    // v(v-u) d^2/dx^2 + v(v+u) d^2/dy^2 to the phase-space equation
    double u = 0.5 * lambda, v = 0.5 * lambda * mu;
    Eigen::Matrix2d d;
    d << v * (v - u), 0.0,
         0.0, v * (v + u);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(d, Eigen::EigenvaluesOnly);
    DiffusionEigenvalues out;
    out.e_minus = es.eigenvalues()(0);
    out.e_plus = es.eigenvalues()(1);
    out.nonclassical = out.e_minus < -1e-12;
    return out;
}

} // namespace optfb
