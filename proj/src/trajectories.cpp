#include "optfb/trajectories.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <random>
#include <unsupported/Eigen/MatrixFunctions>

namespace optfb {

namespace {

const Complex kI(0.0, 1.0);

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// deterministic part of every diffusive scheme: bath + H0 + unmeasured channels
struct Deterministic {
    Matrix c, cd, H0;
    double N;
    Complex M;
    std::vector<Matrix> extras;

    Matrix apply(const Matrix& rho) const {
        auto diss = [&](const Matrix& l, const Matrix& ld) {
            Matrix ldl = ld * l;
            return Matrix(l * rho * ld - 0.5 * (ldl * rho + rho * ldl));
        };
        Matrix out = (N + 1.0) * diss(c, cd);
        if (N != 0.0) out += N * diss(cd, c);
        if (std::abs(M) != 0.0) {
            Matrix inner = cd * rho - rho * cd;
            out += 0.5 * M * (cd * inner - inner * cd);
            Matrix inner2 = c * rho - rho * c;
            out += 0.5 * std::conj(M) * (c * inner2 - inner2 * c);
        }
        out += -kI * (H0 * rho - rho * H0);
        for (const auto& e : extras) out += diss(e, Matrix(e.adjoint()));
        return out;
    }
};

Matrix h_apply(const Matrix& m, const Matrix& md, const Matrix& rho) {
    Matrix lin = m * rho + rho * md;
    return lin - lin.trace() * rho;
}

struct Recorder {
    const TrajectoryOptions& opts;
    TrajectoryRecord& rec;

    void sample(double t, const Matrix& rho) {
        rec.times.push_back(t);
        for (size_t k = 0; k < opts.observables.size(); ++k)
            rec.observables[k].push_back((opts.observables[k].second.mat * rho).trace());
    }
};

void init_record(TrajectoryRecord& rec, const TrajectoryOptions& opts,
                 std::uint64_t seed) {
    rec.seed = seed;
    for (const auto& [name, op] : opts.observables) rec.observable_names.push_back(name);
    rec.observables.resize(opts.observables.size());
}

void check_positive(const Matrix& rho, double t, std::uint64_t seed) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (rho + rho.adjoint()),
                                             Eigen::EigenvaluesOnly);
    double min_eig = es.eigenvalues().minCoeff();
    if (min_eig < -default_policy().traj_positivity_tol)
        throw std::runtime_error("conditioned state lost positivity (eig " +
                                 std::to_string(min_eig) + ") at t=" + std::to_string(t) +
                                 ", seed " + std::to_string(seed));
}

} // namespace

std::uint64_t derive_seed(std::uint64_t base_seed, std::uint64_t traj_index,
                          std::uint64_t channel) {
    std::uint64_t s = splitmix64(base_seed);
    s = splitmix64(s ^ (0xd1342543de82ef95ULL * (traj_index + 1)));
    s = splitmix64(s ^ (0xaf251af3b0f025b5ULL * (channel + 1)));
    return s;
}

TrajectoryRecord jump_trajectory(const Op& c1, const Op& Z, const Op& H0,
                                 const Vector& psi0, double t_final,
                                 std::uint64_t seed,
                                 const TrajectoryOptions& opts) {
    if (!Z.is_hermitian()) throw std::invalid_argument("Z must be Hermitian");
    if (!H0.is_hermitian()) throw std::invalid_argument("H0 must be Hermitian");
    const Space& sp = c1.space;
    Matrix cdc = c1.mat.adjoint() * c1.mat;

    // no-detection propagator over one step
    Matrix gen = (-kI * H0.mat - 0.5 * cdc) * opts.dt;
    Matrix drift = gen.exp();
    // detection kick exp(-iZ) c
    Eigen::SelfAdjointEigenSolver<Matrix> es(Z.mat);
    Matrix phases = (-kI * es.eigenvalues().cast<Complex>().array()).exp().matrix().asDiagonal();
    Matrix kick = es.eigenvectors() * phases * es.eigenvectors().adjoint() * c1.mat;

    TrajectoryRecord rec;
    init_record(rec, opts, seed);
    Recorder recorder{opts, rec};

    std::mt19937_64 rng(derive_seed(seed, 0, 0));
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    Vector psi = psi0.normalized();
    auto n_steps = static_cast<long>(std::ceil(t_final / opts.dt - 1e-12));
    recorder.sample(0.0, Matrix(psi * psi.adjoint()));
    for (long step = 1; step <= n_steps; ++step) {
        double p_jump = (psi.adjoint() * cdc * psi).real()(0) * opts.dt;
        if (p_jump > 0.1)
            throw std::runtime_error("jump probability per step exceeds 0.1; reduce dt");
        if (unif(rng) < p_jump) {
            psi = kick * psi;
            rec.jump_times.push_back(step * opts.dt);
        } else {
            psi = drift * psi;
        }
        psi.normalize();
        if (step % opts.sample_stride == 0 || step == n_steps)
            recorder.sample(step * opts.dt, Matrix(psi * psi.adjoint()));
    }
    rec.final_state = DensityMatrix(sp, psi * psi.adjoint());
    return rec;
}

TrajectoryRecord homodyne_trajectory(const Op& c1, const Op& Y, const Op& H0,
                                     const BathParams& bath,
                                     const DensityMatrix& rho0, double t_final,
                                     std::uint64_t seed,
                                     const TrajectoryOptions& opts) {
    if (!Y.is_hermitian()) throw std::invalid_argument("Y must be Hermitian");
    if (!H0.is_hermitian()) throw std::invalid_argument("H0 must be Hermitian");
    bath.require_physical();
    double L = bath.L();
    if (L <= 0.0) throw std::invalid_argument("measurement noise L must be positive");
    rho0.validate();

    Deterministic det{c1.mat, c1.mat.adjoint(), H0.mat, bath.N, bath.M, {}};
    for (const auto& e : opts.extra_channels) det.extras.push_back(e.mat);
    Matrix x_op = c1.mat + c1.mat.adjoint();
    Matrix minn = (bath.N + bath.M + 1.0) * c1.mat
                - (bath.N + std::conj(bath.M)) * c1.mat.adjoint();
    Matrix minnd = minn.adjoint();

    // feedback exp(-i Y I dt) from a fixed eigendecomposition of Y
    Eigen::SelfAdjointEigenSolver<Matrix> esy(Y.mat);
    Matrix Vy = esy.eigenvectors();
    Eigen::VectorXd theta = esy.eigenvalues();
    bool has_feedback = Y.mat.cwiseAbs().maxCoeff() > 0.0;

    TrajectoryRecord rec;
    init_record(rec, opts, seed);
    Recorder recorder{opts, rec};

    std::mt19937_64 rng(derive_seed(seed, 0, 0));
    std::normal_distribution<double> gauss(0.0, 1.0);

    Matrix rho = rho0.mat;
    double sqrt_dt = std::sqrt(opts.dt);
    auto n_steps = static_cast<long>(std::ceil(t_final / opts.dt - 1e-12));
    recorder.sample(0.0, rho);
    double current_acc = 0.0;
    for (long step = 1; step <= n_steps; ++step) {
        double dW = sqrt_dt * gauss(rng);
        double xbar = (x_op * rho).trace().real();
        double i_dt = xbar * opts.dt + std::sqrt(L) * dW; // I dt, the fed-back signal
        rho += opts.dt * det.apply(rho) + (dW / std::sqrt(L)) * h_apply(minn, minnd, rho);
        if (has_feedback) {
            Vector ph(theta.size());
            for (int k = 0; k < theta.size(); ++k) ph(k) = std::exp(-kI * theta(k) * i_dt);
            Matrix U = Vy * ph.asDiagonal() * Vy.adjoint();
            rho = U * rho * U.adjoint();
        }
        rho /= rho.trace();
        current_acc += i_dt;
        if (step % opts.sample_stride == 0 || step == n_steps) {
            double t = step * opts.dt;
            check_positive(rho, t, seed);
            recorder.sample(t, rho);
            rec.current_x.push_back(current_acc);
            current_acc = 0.0;
        }
    }
    rec.final_state = DensityMatrix(rho0.space, 0.5 * (rho + rho.adjoint()));
    return rec;
}

TrajectoryRecord heterodyne_trajectory(const Op& c1, const Op& X, const Op& Y,
                                       const Op& H0, const BathParams& bath,
                                       const DensityMatrix& rho0, double t_final,
                                       std::uint64_t seed,
                                       const TrajectoryOptions& opts) {
    if (!X.is_hermitian()) throw std::invalid_argument("X must be Hermitian");
    if (!Y.is_hermitian()) throw std::invalid_argument("Y must be Hermitian");
    if (!H0.is_hermitian()) throw std::invalid_argument("H0 must be Hermitian");
    bath.require_physical();
    double Lx = 2.0 * bath.N + 1.0 + 2.0 * bath.M.real();
    double Ly = 2.0 * bath.N + 1.0 - 2.0 * bath.M.real();
    if (Lx <= 0.0 || Ly <= 0.0) throw std::invalid_argument("measurement noise L must be positive");
    rho0.validate();

    Deterministic det{c1.mat, c1.mat.adjoint(), H0.mat, bath.N, bath.M, {}};
    for (const auto& e : opts.extra_channels) det.extras.push_back(e.mat);
    Matrix x_op = c1.mat + c1.mat.adjoint();
    Matrix y_op = -kI * c1.mat + kI * c1.mat.adjoint();
    Matrix mx = (bath.N + bath.M + 1.0) * c1.mat
              - (bath.N + std::conj(bath.M)) * c1.mat.adjoint();
    Matrix my = (bath.N - bath.M + 1.0) * (-kI * c1.mat)
              - (bath.N - std::conj(bath.M)) * (kI * c1.mat.adjoint());
    Matrix mxd = mx.adjoint(), myd = my.adjoint();
    bool has_feedback = X.mat.cwiseAbs().maxCoeff() > 0.0 || Y.mat.cwiseAbs().maxCoeff() > 0.0;

    TrajectoryRecord rec;
    init_record(rec, opts, seed);
    Recorder recorder{opts, rec};

    std::mt19937_64 rng_x(derive_seed(seed, 0, 0));
    std::mt19937_64 rng_y(derive_seed(seed, 0, 1));
    std::normal_distribution<double> gauss(0.0, 1.0);

    Matrix rho = rho0.mat;
    double sqrt_dt = std::sqrt(opts.dt);
    auto n_steps = static_cast<long>(std::ceil(t_final / opts.dt - 1e-12));
    recorder.sample(0.0, rho);
    double acc_x = 0.0, acc_y = 0.0;
    for (long step = 1; step <= n_steps; ++step) {
        double dWx = sqrt_dt * gauss(rng_x);
        double dWy = sqrt_dt * gauss(rng_y);
        double ix_dt = (x_op * rho).trace().real() * opts.dt + std::sqrt(2.0 * Lx) * dWx;
        double iy_dt = (y_op * rho).trace().real() * opts.dt + std::sqrt(2.0 * Ly) * dWy;
        rho += opts.dt * det.apply(rho)
             + (dWx / std::sqrt(2.0 * Lx)) * h_apply(mx, mxd, rho)
             + (dWy / std::sqrt(2.0 * Ly)) * h_apply(my, myd, rho);
        if (has_feedback) {
            Matrix F = ix_dt * Y.mat + iy_dt * X.mat; // exp(-iF), F already carries dt
            Eigen::SelfAdjointEigenSolver<Matrix> esf(F);
            Vector ph(F.rows());
            for (int k = 0; k < F.rows(); ++k)
                ph(k) = std::exp(-kI * esf.eigenvalues()(k));
            Matrix U = esf.eigenvectors() * ph.asDiagonal() * esf.eigenvectors().adjoint();
            rho = U * rho * U.adjoint();
        }
        rho /= rho.trace();
        acc_x += ix_dt;
        acc_y += iy_dt;
        if (step % opts.sample_stride == 0 || step == n_steps) {
            double t = step * opts.dt;
            check_positive(rho, t, seed);
            recorder.sample(t, rho);
            rec.current_x.push_back(acc_x);
            rec.current_y.push_back(acc_y);
            acc_x = acc_y = 0.0;
        }
    }
    rec.final_state = DensityMatrix(rho0.space, 0.5 * (rho + rho.adjoint()));
    return rec;
}

EnsembleStats ensemble_average(
    const std::function<TrajectoryRecord(std::uint64_t)>& make, int n_traj) {
    if (n_traj < 2) throw std::invalid_argument("ensemble needs at least 2 trajectories");
    EnsembleStats stats;
    std::vector<std::vector<double>> sum, sum_sq;
    for (int i = 0; i < n_traj; ++i) {
        TrajectoryRecord rec = make(static_cast<std::uint64_t>(i));
        if (i == 0) {
            stats.times = rec.times;
            stats.observable_names = rec.observable_names;
            sum.assign(rec.observables.size(),
                       std::vector<double>(rec.times.size(), 0.0));
            sum_sq = sum;
        }
        if (rec.times.size() != stats.times.size())
            throw std::runtime_error("trajectory time grids differ within one ensemble");
        for (size_t k = 0; k < rec.observables.size(); ++k)
            for (size_t t = 0; t < rec.times.size(); ++t) {
                double v = rec.observables[k][t].real();
                sum[k][t] += v;
                sum_sq[k][t] += v * v;
            }
    }
    stats.n_traj = n_traj;
    stats.mean.resize(sum.size());
    stats.std_error.resize(sum.size());
    double n = double(n_traj);
    for (size_t k = 0; k < sum.size(); ++k) {
        stats.mean[k].resize(stats.times.size());
        stats.std_error[k].resize(stats.times.size());
        for (size_t t = 0; t < stats.times.size(); ++t) {
            double mean = sum[k][t] / n;
            double var = std::max(0.0, sum_sq[k][t] / n - mean * mean) * n / (n - 1.0);
            stats.mean[k][t] = mean;
            stats.std_error[k][t] = std::sqrt(var / n);
        }
    }
    return stats;
}

} // namespace optfb
