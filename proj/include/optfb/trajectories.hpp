#pragma once

#include <cstdint>
#include <functional>

#include "optfb/generators.hpp"

namespace optfb {

struct TrajectoryRecord {
    std::vector<double> times;
    std::vector<std::string> observable_names;
    std::vector<std::vector<Complex>> observables; // [obs][time]
    // integrated photocurrent over each recorded interval: I dt = <q> dt + sqrt(.) dW
    std::vector<double> current_x;
    std::vector<double> current_y; // heterodyne only
    std::vector<double> jump_times; // jump unraveling only
    std::uint64_t seed = 0;
    DensityMatrix final_state;
};

struct TrajectoryOptions {
    double dt = 1e-4;
    int sample_stride = 100; // record every stride-th step
    std::vector<std::pair<std::string, Op>> observables;
    // additional unmeasured decay channels in the deterministic part
    std::vector<Op> extra_channels;
};

// Stream seed for (base, trajectory, noise channel): splitmix64 mix, so every
// stream is distinct and runs are reproducible at any thread count.
std::uint64_t derive_seed(std::uint64_t base_seed, std::uint64_t traj_index,
                          std::uint64_t channel);

// Photon-counting unraveling with a unitary kick after each detection:
// drift exp[(-iH0 - c'c/2)dt] + renormalize; jump prob <c'c>dt; on jump apply
// exp(-iZ) c and renormalize.
TrajectoryRecord jump_trajectory(const Op& c1, const Op& Z, const Op& H0,
                                 const Vector& psi0, double t_final,
                                 std::uint64_t seed,
                                 const TrajectoryOptions& opts = {});

// Homodyne x-quadrature measurement with current-proportional feedback
// exp(-i I Y dt) applied after the innovation. Innovation operator
// (N+M+1)c - (N+M*)c', weight dW/sqrt(L); I = <x> + sqrt(L) xi.
TrajectoryRecord homodyne_trajectory(const Op& c1, const Op& Y, const Op& H0,
                                     const BathParams& bath,
                                     const DensityMatrix& rho0, double t_final,
                                     std::uint64_t seed,
                                     const TrajectoryOptions& opts = {});

// Dual-quadrature measurement; two independent Wiener channels, feedback
// exp[-i(I_x Y + I_y X)dt] after the innovations. Noise weights sqrt(2 L_q).
TrajectoryRecord heterodyne_trajectory(const Op& c1, const Op& X, const Op& Y,
                                       const Op& H0, const BathParams& bath,
                                       const DensityMatrix& rho0, double t_final,
                                       std::uint64_t seed,
                                       const TrajectoryOptions& opts = {});

struct EnsembleStats {
    std::vector<double> times;
    std::vector<std::string> observable_names;
    std::vector<std::vector<double>> mean;      // [obs][time], real parts
    std::vector<std::vector<double>> std_error; // sample std / sqrt(n)
    int n_traj = 0;
};

// Runs make(i) for i in [0, n_traj) and reduces in index order (bit-stable).
EnsembleStats ensemble_average(
    const std::function<TrajectoryRecord(std::uint64_t)>& make, int n_traj);

} // namespace optfb
