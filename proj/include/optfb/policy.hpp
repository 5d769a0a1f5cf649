#pragma once

namespace optfb {

// Central numeric tolerances. One instance is threaded through validation so
// every module agrees on what "equal" and "physical" mean.
struct NumericPolicy {
    double state_tol = 1e-9;       // density-matrix trace/hermiticity/positivity
    double algebra_tol = 1e-12;    // exact algebraic identities
    double cp_tol = 1e-9;          // Kossakowski PSD threshold
    double leakage_warn = 1e-4;    // top-two Fock level population flag
    double propagate_abort_tol = 1e-6;   // state-invariant violation during integration
    // transient negativity allowed in SME steps: the Euler-Maruyama strong
    // error is O(sqrt(dt)), so conditioned pure states routinely pick up
    // spurious eigenvalues of a few 1e-3 that average out over the ensemble
    double traj_positivity_tol = 1e-2;
    double steady_gap_min = 1e-8;  // second-smallest singular value of the Liouvillian
};

inline const NumericPolicy& default_policy() {
    static const NumericPolicy p{};
    return p;
}

} // namespace optfb
