#pragma once

#include <functional>
#include <string>
#include <vector>

#include "optfb/generators.hpp"

namespace optfb {

struct ObservableRequest {
    std::string name;
    Op op;
};

struct EvolutionResult {
    std::vector<double> times;
    std::vector<DensityMatrix> states;
    // observables[k][t] = Tr[op_k rho(t)]
    std::vector<std::string> observable_names;
    std::vector<std::vector<Complex>> observables;
    double boundary_leakage = 0.0; // max top-two-level population seen
    double trace_drift = 0.0;      // max |Tr rho - 1| seen (no renormalization applied)
};

struct PropagateOptions {
    double dt = 1e-3;
    int output_stride = 1; // record every stride-th step
    std::vector<ObservableRequest> observables;
    bool store_states = true;
};

// Fixed-step RK4 on vec(rho)' = L vec(rho). The trace is never renormalized;
// drift beyond propagate_abort_tol aborts.
EvolutionResult propagate(const Liouvillian& L, const DensityMatrix& rho0,
                          double t_final, const PropagateOptions& opts = {});

// Null vector of L via SVD; requires a spectral gap (second-smallest singular
// value above steady_gap_min). Output is Hermitized and trace-normalized.
DensityMatrix steady_state(const Liouvillian& L);

struct GrowthRate {
    double slope;
    double r_squared;
};

// Least-squares slope of V(op)(t) over [0, window] starting from rho0.
GrowthRate variance_growth_rate(const Liouvillian& L, const DensityMatrix& rho0,
                                const Op& op, double window, double dt = 1e-3);

} // namespace optfb
