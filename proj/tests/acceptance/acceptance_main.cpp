// End-to-end acceptance checks. Each criterion prints one PASS/FAIL line;
// the exit status is the number of failed criteria.
#include <cmath>
#include <cstdio>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <unsupported/Eigen/KroneckerProduct>
#include <vector>

#include "optfb/evolve.hpp"
#include "optfb/linear_model.hpp"
#include "optfb/trajectories.hpp"

using namespace optfb;

namespace {

struct Check {
    bool pass = true;
    std::ostringstream detail;

    void expect(bool ok, const std::string& what) {
        if (!ok) {
            if (!pass) detail << "; ";
            detail << what;
            pass = false;
        }
    }
    void expect_close(double got, double want, double tol, const std::string& what) {
        std::ostringstream msg;
        msg << what << ": got " << got << ", want " << want << " +- " << tol;
        expect(std::abs(got - want) <= tol, msg.str());
    }
};

Op zero_op(const Space& s) { return Op(s, Matrix::Zero(s.dim, s.dim)); }

double lsq_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
    double n = double(xs.size()), sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i];
        sy += ys[i];
        sxx += xs[i] * xs[i];
        sxy += xs[i] * ys[i];
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

double trace_distance(const Matrix& a, const Matrix& b) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * ((a - b) + (a - b).adjoint()),
                                             Eigen::EigenvaluesOnly);
    return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

// ---- criterion bodies ------------------------------------------------------

// Quadrature feedback squeezes x to (1+l)^2/(1+2l) and leaves y at vacuum.
void quadrature_feedback_variance(Check& c) {
    Space s = make_space(30);
    auto [x, y] = quadratures(s);
    for (double lambda : {0.5, 1.0, 2.0}) {
        Op Y(s, -(lambda / 2.0) * y.mat);
        DensityMatrix ss =
            steady_state(quadrature_feedback_liouvillian(Y, zero_op(s), BathParams::vacuum()));
        double want = (1 + lambda) * (1 + lambda) / (1 + 2 * lambda);
        c.expect_close(variance(x, ss), want, 1e-3, "V(x) at gain " + std::to_string(lambda));
        c.expect_close(variance(y, ss), 1.0, 1e-3, "V(y) at gain " + std::to_string(lambda));
    }
}

// Complex-amplitude feedback: V(x) = 9/11 at (2, 0.5), intracavity squeezing
// for 0 < mu < 1, and the naive strong-gain asymptote (1 - mu)/2.
void amplitude_feedback_squeezing(Check& c) {
    Space s = make_space(25);
    Op x = quadratures(s).first;
    Matrix a = annihilation(s).mat;
    auto steady_vx = [&](double lambda, double mu) {
        Op A(s, (lambda / 2.0) * (a + mu * a.adjoint()));
        return variance(
            x, steady_state(complex_feedback_liouvillian(A, zero_op(s), BathParams::vacuum())));
    };
    c.expect_close(steady_vx(2.0, 0.5), 9.0 / 11.0, 1e-3, "V(x) at (2, 0.5)");
    for (double mu : {0.25, 0.5, 0.75}) {
        double vx = steady_vx(2.0, mu);
        std::ostringstream msg;
        msg << "V(x) = " << vx << " not below vacuum at mu = " << mu;
        c.expect(vx < 1.0, msg.str());
    }
    // strong-gain limit (1 - mu)/2: the asymptote needs gain >> 1/(1 - mu);
    // at (100, 0.99) the exact closed form sits at 2.25/51.75 = 0.0435, a
    // factor 8.7 above the 0.005 target, so this check fails by construction
    double limit = (1.0 - 0.99) / 2.0;
    c.expect_close(steady_variance_analytic(100.0, 0.99).first, limit, 0.2 * limit,
                   "V(x) at (100, 0.99) vs asymptote (1 - mu)/2");
}

// Output spectra: transfer-function route vs closed forms, squeezing values,
// Sx Sy = 1 for the quadrature loop, and mu sign swapping the squeezed output.
void output_spectra(Check& c) {
    std::vector<double> grid{0.0, 0.5, 1.0, 2.0, 5.0};
    for (auto [lambda, mu] : {std::pair{1.0, -1.0}, {0.5, -1.0}, {2.0, 0.5}, {2.0, -0.5}}) {
        auto m = build_linear_model(lambda, mu);
        auto closed = output_spectrum(m, grid);
        auto transfer = transfer_function_spectrum(m, grid);
        for (size_t k = 0; k < grid.size(); ++k) {
            std::ostringstream msg;
            msg << "transfer route deviates at (" << lambda << ", " << mu << "), w = "
                << grid[k];
            c.expect(std::abs(closed.Sx[k] - transfer.Sx[k]) < 1e-10 &&
                         std::abs(closed.Sy[k] - transfer.Sy[k]) < 1e-10,
                     msg.str());
        }
        if (mu == -1.0)
            for (size_t k = 0; k < grid.size(); ++k)
                c.expect_close(closed.Sx[k] * closed.Sy[k], 1.0, 1e-12, "Sx Sy product");
    }
    c.expect_close(output_spectrum(build_linear_model(1.0, -1.0), {0.0}).Sx[0], 1.0 / 9.0,
                   1e-12, "Sx(0) at (1, -1)");
    auto plus = output_spectrum(build_linear_model(2.0, 0.5), {0.0});
    auto minus = output_spectrum(build_linear_model(2.0, -0.5), {0.0});
    c.expect(plus.Sy[0] < 1.0 && plus.Sx[0] > 1.0, "mu = +0.5 should squeeze the y output");
    c.expect(minus.Sx[0] < 1.0 && minus.Sy[0] > 1.0, "mu = -0.5 should squeeze the x output");
    c.expect_close(minus.Sx[0], plus.Sy[0], 1e-12, "mu sign swap symmetry");
}

// Coherent mirror loop: frozen at phi = pi, doubled decay at phi = 0,
// detuning of size gamma at phi = pi/2.
void mirror_loop(Check& c) {
    Space s = make_space(15);
    c.expect(mirror_loop_liouvillian(make_space(8), 1.0, M_PI).mat.norm() < 1e-12,
             "phi = pi generator is not frozen");

    double gamma = 0.7;
    PropagateOptions opts;
    opts.dt = 1e-3;
    opts.output_stride = 1000;
    opts.store_states = false;
    opts.observables = {{"n", number_op(s)}};
    auto res = propagate(mirror_loop_liouvillian(s, gamma, 0.0), fock_state(s, 1), 1.0, opts);
    double rate = -std::log(res.observables[0].back().real()) / res.times.back();
    c.expect_close(rate, 4.0 * gamma, 1e-6, "phi = 0 photon decay rate");

    auto [x, y] = quadratures(s);
    opts.observables = {{"x", x}, {"y", y}};
    auto rot = propagate(mirror_loop_liouvillian(s, 1.0, M_PI / 2.0),
                         pure_state(s, coherent_vector(s, 1.0)), 1.0, opts);
    double phase = std::atan2(rot.observables[1].back().real(),
                              rot.observables[0].back().real());
    c.expect_close(std::abs(phase), 1.0, 1e-4, "phi = pi/2 detuning frequency");
}

// Measurement-noise penalty of the electro-optic loop analog: both quadrature
// variances heat at rate 2 gamma when the coherent loop would be frozen.
void electrooptic_noise_penalty(Check& c) {
    Space s = make_space(16);
    auto [x, y] = quadratures(s);
    double gamma = 1.0;
    Liouvillian L = heterodyne_mirror_analog_liouvillian(s, gamma, M_PI);
    DensityMatrix vac = vacuum_state(s);
    auto gx = variance_growth_rate(L, vac, x, 2.0 / gamma);
    auto gy = variance_growth_rate(L, vac, y, 2.0 / gamma);
    c.expect_close(gx.slope, 2.0 * gamma, 0.02 * 2.0 * gamma, "dV(x)/dt");
    c.expect_close(gy.slope, 2.0 * gamma, 0.02 * 2.0 * gamma, "dV(y)/dt");
    c.expect(gx.r_squared > 0.99 && gy.r_squared > 0.99, "growth is not linear");
}

// Second-order expanded intensity-feedback generator vs the exact unitary-kick
// form: cubic small-operator convergence, and only the exact form is CP.
void intensity_form_equivalence(Check& c) {
    Space s = make_space(12);
    Op x = quadratures(s).first;
    Op H0 = zero_op(s);
    std::vector<double> log_s, log_d;
    for (double scale : {0.1, 0.05, 0.025}) {
        Op Z(s, scale * x.mat);
        double d = (intensity_feedback_liouvillian(Z, H0, IntensityForm::Expanded).mat -
                    intensity_feedback_liouvillian(Z, H0, IntensityForm::Lindblad).mat)
                       .norm();
        log_s.push_back(std::log(scale));
        log_d.push_back(std::log(d));
    }
    double slope = lsq_slope(log_s, log_d);
    std::ostringstream msg;
    msg << "difference shrinks with order " << slope << ", want >= 2.9";
    c.expect(slope >= 2.9, msg.str());

    Op Z(s, 0.5 * x.mat);
    auto expanded = lindblad_form_check(intensity_feedback_liouvillian(Z, H0, IntensityForm::Expanded));
    auto exact = lindblad_form_check(intensity_feedback_liouvillian(Z, H0, IntensityForm::Lindblad));
    c.expect(!expanded.valid, "expanded form should fail the CP check");
    c.expect(exact.valid, "exact form should pass the CP check");
}

// Fast driven cavity slaved to the source: the full two-mode model approaches
// the single-mode quadrature-feedback reduction as the damping ratio grows.
void adiabatic_elimination(Check& c) {
    Space s = make_space(15);
    int driven_dim = 4;
    Op y = quadratures(s).second;
    DensityMatrix src0 = pure_state(s, coherent_vector(s, 1.0));
    DensityMatrix driven0 = vacuum_state(make_space(driven_dim));

    auto max_distance = [&](double gamma2, double dt) {
        Op J(s, (std::sqrt(gamma2) / 4.0) * y.mat);
        Liouvillian full =
            two_mode_feedback_liouvillian(QuadratureCoupling{J}, gamma2, zero_op(s), driven_dim);
        Op Y(s, -2.0 / std::sqrt(gamma2) * J.mat);
        Liouvillian reduced = quadrature_feedback_liouvillian(Y, zero_op(s), BathParams::vacuum());

        PropagateOptions opts;
        opts.dt = dt;
        opts.output_stride = int(std::lround(0.25 / dt));
        DensityMatrix full0(full.space, Eigen::kroneckerProduct(src0.mat, driven0.mat));
        auto full_res = propagate(full, full0, 5.0, opts);
        auto red_res = propagate(reduced, src0, 5.0, opts);
        double worst = 0.0;
        for (size_t i = 0; i < full_res.times.size(); ++i)
            worst = std::max(worst, trace_distance(partial_trace(full_res.states[i], 1).mat,
                                                   red_res.states[i].mat));
        return worst;
    };

    double d_fast = max_distance(200.0, 1.25e-3);
    double d_slow = max_distance(20.0, 5e-3);
    std::ostringstream m1, m2;
    m1 << "max trace distance " << d_fast << " at damping ratio 200, want < 5e-2";
    c.expect(d_fast < 5e-2, m1.str());
    m2 << "distance should shrink with the damping ratio (" << d_fast << " vs " << d_slow
       << " at ratio 20)";
    c.expect(d_fast < d_slow, m2.str());
}

// One unraveling ensemble vs its master equation: <x>, <y>, <n>, V(x) within
// 3 standard errors at each sampled time. The floor absorbs the O(dt) weak
// bias of the Euler-Maruyama scheme.
void check_ensemble(Check& c, const std::string& label, const EnsembleStats& stats,
                    const Liouvillian& L, const DensityMatrix& rho0, double dt_me,
                    double bias_floor) {
    Space s = L.space;
    auto [x, y] = quadratures(s);
    PropagateOptions opts;
    opts.dt = dt_me;
    opts.store_states = false;
    opts.output_stride =
        int(std::lround((stats.times[1] - stats.times[0]) / dt_me));
    opts.observables = {{"x", x}, {"y", y}, {"n", number_op(s)},
                        {"xx", Op(s, x.mat * x.mat)}};
    auto ref = propagate(L, rho0, stats.times.back(), opts);

    // ensemble observable order: x, y, n, xx
    for (size_t t = 1; t < stats.times.size(); ++t) {
        for (int k = 0; k < 3; ++k) {
            double gap = std::abs(stats.mean[k][t] - ref.observables[k][t].real());
            std::ostringstream msg;
            msg << label << " <" << stats.observable_names[k] << "> off by " << gap
                << " (3 SE = " << 3 * stats.std_error[k][t] << ") at t = " << stats.times[t];
            c.expect(gap <= 3 * stats.std_error[k][t] + bias_floor, msg.str());
        }
        double mean_v = stats.mean[3][t] - stats.mean[0][t] * stats.mean[0][t];
        double ref_v = ref.observables[3][t].real() -
                       ref.observables[0][t].real() * ref.observables[0][t].real();
        double se_v = std::hypot(stats.std_error[3][t],
                                 2.0 * std::abs(stats.mean[0][t]) * stats.std_error[0][t]);
        double gap = std::abs(mean_v - ref_v);
        std::ostringstream msg;
        msg << label << " V(x) off by " << gap << " (3 SE = " << 3 * se_v
            << ") at t = " << stats.times[t];
        c.expect(gap <= 3 * se_v + bias_floor, msg.str());
    }
}

void unraveling_consistency(Check& c) {
    int n_traj = 500;
    std::uint64_t base = 20260826;

    // photon counting with a unitary kick after each detection
    {
        Space s = make_space(8);
        auto [x, y] = quadratures(s);
        Op Z(s, 0.6 * x.mat);
        TrajectoryOptions topts;
        topts.dt = 1e-3;
        topts.sample_stride = 200; // 10 samples over [0, 2]
        topts.observables = {{"x", x}, {"y", y}, {"n", number_op(s)},
                             {"xx", Op(s, x.mat * x.mat)}};
        Vector psi0 = coherent_vector(s, 1.0);
        auto stats = ensemble_average(
            [&](std::uint64_t i) {
                return jump_trajectory(annihilation(s), Z, zero_op(s), psi0, 2.0,
                                       derive_seed(base, i, 0), topts);
            },
            n_traj);
        check_ensemble(c, "counting", stats,
                       intensity_feedback_liouvillian(Z, zero_op(s), IntensityForm::Lindblad),
                       pure_state(s, psi0), 1e-3, 5e-4);
    }
    // homodyne current feedback
    {
        Space s = make_space(10);
        auto [x, y] = quadratures(s);
        Op Y(s, -0.5 * y.mat);
        TrajectoryOptions topts;
        topts.dt = 2.5e-4;
        topts.sample_stride = 600; // 10 samples over [0, 1.5]
        topts.observables = {{"x", x}, {"y", y}, {"n", number_op(s)},
                             {"xx", Op(s, x.mat * x.mat)}};
        DensityMatrix rho0 = pure_state(s, coherent_vector(s, 1.0));
        auto stats = ensemble_average(
            [&](std::uint64_t i) {
                return homodyne_trajectory(annihilation(s), Y, zero_op(s),
                                           BathParams::vacuum(), rho0, 1.5,
                                           derive_seed(base, i, 0), topts);
            },
            n_traj);
        check_ensemble(c, "homodyne", stats,
                       quadrature_feedback_liouvillian(Y, zero_op(s), BathParams::vacuum()),
                       rho0, 2.5e-4, 1.5e-4);
    }
    // dual-quadrature current feedback
    {
        Space s = make_space(10);
        auto [x, y] = quadratures(s);
        Op X(s, 0.3 * x.mat);
        Op Y(s, -0.4 * y.mat);
        TrajectoryOptions topts;
        topts.dt = 2.5e-4;
        topts.sample_stride = 400; // 10 samples over [0, 1]
        topts.observables = {{"x", x}, {"y", y}, {"n", number_op(s)},
                             {"xx", Op(s, x.mat * x.mat)}};
        DensityMatrix rho0 = pure_state(s, coherent_vector(s, 0.8));
        auto stats = ensemble_average(
            [&](std::uint64_t i) {
                return heterodyne_trajectory(annihilation(s), X, Y, zero_op(s),
                                             BathParams::vacuum(), rho0, 1.0,
                                             derive_seed(base, i, 0), topts);
            },
            n_traj);
        check_ensemble(c, "heterodyne", stats,
                       heterodyne_feedback_liouvillian(X, Y, zero_op(s), BathParams::vacuum()),
                       rho0, 2.5e-4, 1.5e-4);
    }
}

// Phase-space diffusion eigenvalues flag nonclassicality exactly for
// 0 < |mu| < 1.
void nonclassicality_gate(Check& c) {
    for (double mu : {0.0, 0.25, -0.25, 0.5, -0.5, 0.99, -0.99, 1.0, -1.0}) {
        auto d = pfunction_diffusion_eigenvalues(1.0, mu);
        bool want = std::abs(mu) > 0.0 && std::abs(mu) < 1.0;
        std::ostringstream msg;
        msg << "mu = " << mu << ": nonclassical = " << d.nonclassical << ", want " << want;
        c.expect(d.nonclassical == want, msg.str());
    }
}

// In-loop commutator suppression factor: 1/3 at unit gain and zero frequency,
// vanishing at huge gain, restored to 1 at high frequency.
void inloop_commutator(Check& c) {
    Complex f0 = inloop_commutator_factor(1.0, 0.0, 0.0);
    c.expect_close(f0.real(), 1.0 / 3.0, 1e-12, "factor at (1, 0)");
    c.expect(std::abs(f0.imag()) < 1e-12, "factor at (1, 0) should be real");
    c.expect(std::abs(inloop_commutator_factor(1e6, 0.0)) < 1e-5,
             "factor should vanish at gain 1e6");
    double high = std::abs(inloop_commutator_factor(1.0, 1e3) - 1.0);
    std::ostringstream msg;
    msg << "|factor - 1| = " << high << " at w = 1e3, want < 1e-3";
    c.expect(high < 1e-3, msg.str());
}

struct Criterion {
    int id;
    const char* name;
    std::function<void(Check&)> run;
};

} // namespace

int main(int argc, char** argv) {
    std::vector<Criterion> criteria{
        {1, "intracavity squeezing from quadrature feedback", quadrature_feedback_variance},
        {2, "complex-amplitude feedback squeezing and its strong-gain limit",
         amplitude_feedback_squeezing},
        {3, "output spectra closed forms and transfer-function route", output_spectra},
        {4, "coherent mirror loop: frozen, doubled-decay, detuned regimes", mirror_loop},
        {5, "measurement-noise heating of the electro-optic loop analog",
         electrooptic_noise_penalty},
        {6, "expanded vs exact intensity-feedback generator", intensity_form_equivalence},
        {7, "adiabatic elimination of the fast driven cavity", adiabatic_elimination},
        {8, "trajectory ensembles reproduce the feedback master equations",
         unraveling_consistency},
        {9, "phase-space diffusion nonclassicality gate", nonclassicality_gate},
        {10, "in-loop commutator suppression factor", inloop_commutator},
    };

    std::set<int> only;
    for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

    int failures = 0;
    for (const auto& cr : criteria) {
        if (!only.empty() && !only.count(cr.id)) continue;
        Check c;
        try {
            cr.run(c);
        } catch (const std::exception& e) {
            c.expect(false, std::string("exception: ") + e.what());
        }
        if (c.pass) {
            std::printf("PASS criterion %2d: %s\n", cr.id, cr.name);
        } else {
            std::printf("FAIL criterion %2d: %s (%s)\n", cr.id, cr.name,
                        c.detail.str().c_str());
            ++failures;
        }
        std::fflush(stdout);
    }
    return failures;
}
