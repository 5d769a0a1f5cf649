#include "optfb/evolve.hpp"

#include <Eigen/SVD>
#include <Eigen/SparseCore>
#include <cmath>

namespace optfb {

namespace {

using SparseM = Eigen::SparseMatrix<Complex>;

SparseM sparsify(const Matrix& m, double drop_tol = 1e-14) {
    SparseM s(m.rows(), m.cols());
    std::vector<Eigen::Triplet<Complex>> trips;
    for (int j = 0; j < m.cols(); ++j)
        for (int i = 0; i < m.rows(); ++i)
            if (std::abs(m(i, j)) > drop_tol) trips.emplace_back(i, j, m(i, j));
    s.setFromTriplets(trips.begin(), trips.end());
    return s;
}

} // namespace

EvolutionResult propagate(const Liouvillian& L, const DensityMatrix& rho0,
                          double t_final, const PropagateOptions& opts) {
    if (opts.dt <= 0.0) throw std::invalid_argument("dt must be positive");
    if (t_final < 0.0) throw std::invalid_argument("t_final must be nonnegative");
    if (!(rho0.space == L.space)) throw std::invalid_argument("state/generator space mismatch");
    rho0.validate();
    for (const auto& obs : opts.observables)
        if (!(obs.op.space == L.space))
            throw std::invalid_argument("observable space mismatch: " + obs.name);

    const NumericPolicy& policy = default_policy();
    int d = L.space.dim;
    // generators are mostly few-band in the Fock basis; sparse matvec is much
    // cheaper than dense at dim^2 x dim^2
    SparseM Ls = sparsify(L.mat);

    auto n_steps = static_cast<long>(std::ceil(t_final / opts.dt - 1e-12));
    Vector v = vec(rho0.mat);

    EvolutionResult result;
    result.observable_names.reserve(opts.observables.size());
    for (const auto& obs : opts.observables) result.observable_names.push_back(obs.name);
    result.observables.resize(opts.observables.size());

    auto record = [&](double t, const Vector& state) {
        Matrix rho = unvec(state, d);
        DensityMatrix dm(L.space, 0.5 * (rho + rho.adjoint()));
        double tr_err = std::abs(rho.trace() - Complex(1.0));
        result.trace_drift = std::max(result.trace_drift, tr_err);
        if (tr_err > policy.propagate_abort_tol)
            throw std::runtime_error("trace drifted by " + std::to_string(tr_err) +
                                     " at t=" + std::to_string(t));
        result.boundary_leakage = std::max(result.boundary_leakage, dm.boundary_leakage());
        result.times.push_back(t);
        for (size_t k = 0; k < opts.observables.size(); ++k)
            result.observables[k].push_back((opts.observables[k].op.mat * rho).trace());
        if (opts.store_states) result.states.push_back(std::move(dm));
    };

    record(0.0, v);
    Vector k1(v.size()), k2(v.size()), k3(v.size()), k4(v.size());
    for (long step = 1; step <= n_steps; ++step) {
        double h = opts.dt;
        k1 = Ls * v;
        k2 = Ls * (v + 0.5 * h * k1);
        k3 = Ls * (v + 0.5 * h * k2);
        k4 = Ls * (v + h * k3);
        v += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (step % opts.output_stride == 0 || step == n_steps)
            record(step * opts.dt, v);
    }
    return result;
}

DensityMatrix steady_state(const Liouvillian& L) {
    const NumericPolicy& policy = default_policy();
    Eigen::BDCSVD<Matrix> svd(L.mat, Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    int n = static_cast<int>(sv.size());
    if (n < 2 || sv(n - 2) < policy.steady_gap_min)
        throw std::runtime_error("no unique steady state: generator is (near-)degenerate");
    Vector null_vec = svd.matrixV().col(n - 1);
    Matrix rho = unvec(null_vec, L.space.dim);
    rho = 0.5 * (rho + rho.adjoint());
    Complex tr = rho.trace();
    if (std::abs(tr) < 1e-12)
        throw std::runtime_error("steady-state candidate is traceless");
    rho /= tr;
    return DensityMatrix(L.space, rho);
}

GrowthRate variance_growth_rate(const Liouvillian& L, const DensityMatrix& rho0,
                                const Op& op, double window, double dt) {
    PropagateOptions opts;
    opts.dt = dt;
    opts.store_states = true;
    EvolutionResult res = propagate(L, rho0, window, opts);
    size_t n = res.times.size();
    std::vector<double> v(n);
    for (size_t i = 0; i < n; ++i) v[i] = variance(op, res.states[i]);
    // least squares fit v = a + b t
    double st = 0, sv2 = 0, stt = 0, stv = 0;
    for (size_t i = 0; i < n; ++i) {
        st += res.times[i];
        sv2 += v[i];
        stt += res.times[i] * res.times[i];
        stv += res.times[i] * v[i];
    }
    double nn = double(n);
    double denom = nn * stt - st * st;
    double b = (nn * stv - st * sv2) / denom;
    double a = (sv2 - b * st) / nn;
    double ss_res = 0, ss_tot = 0, mean = sv2 / nn;
    for (size_t i = 0; i < n; ++i) {
        double fit = a + b * res.times[i];
        ss_res += (v[i] - fit) * (v[i] - fit);
        ss_tot += (v[i] - mean) * (v[i] - mean);
    }
    double r2 = ss_tot < 1e-30 ? 1.0 : 1.0 - ss_res / ss_tot;
    return {b, r2};
}

} // namespace optfb
