#pragma once

// Central knobs: every tolerance the checks budget against, plus the scheme
// constants that the underlying estimates leave abstract. Tests and the CLI
// read these from one place so a change here is visible everywhere.

namespace qpsl2 {

struct Tolerances {
    double unimodular = 1e-12;       // |det - 1| for matrices tagged unimodular
    double cone_slack = 1e-12;       // slack in cone membership tests
    double grid_sample_det = 1e-10;  // unimodularity of cached map samples
    double ad_invariance = 1e-10;    // relative defect of q under Ad
    double acs_identity = 1e-10;     // q(v)q(w) = kappa^2 + q([v,w]), relative
    double traceless = 1e-8;         // trace of spectral-derivative output
    double commutation = 1e-8;       // fibered-action commutation defect
    double commutation_rescaled = 1e-7;
    double cf_beta = 1e-12;          // beta identities, scaled by q_{k+1}
    double lift_node = 1e-8;         // lift table vs direct direction image
    double pole = 1e-300;            // Moebius denominator cutoff
    double small_divisor = 1e-12;    // |e^{2pi i k a} - 1| floor in solvers
    double resonance_floor = 1e-9;   // KAM divisor floor before RESONANCE_HIT
};

struct SchemeConstants {
    int grid_default = 4096;         // samples per period, power of two
    int grid_min_l_operator = 256;
    int lyapunov_samples = 64;       // theta samples for Lyapunov averages
    double nf_a = 2.0;               // N^a exponent in the normal-form gate
    double nf_eps0 = 500.0;          // normal-form entry threshold for |U|_2 N^a
    double window_lo = -5.0;         // real-line sampling window after rescale
    double window_hi = 6.0;
    int window_per_unit = 372;       // window grid nodes per unit length
    int shift_grid = 64;             // coarse nu-grid for the shift search
    double cone_reject = 1e-10;      // q(v) < reject*|v|^2 refused as light-like
};

inline const Tolerances& tol() {
    static const Tolerances t{};
    return t;
}

inline const SchemeConstants& scheme() {
    static const SchemeConstants s{};
    return s;
}

inline constexpr double kTwoPi = 6.283185307179586476925286766559;
inline constexpr double kPi = 3.1415926535897932384626433832795;

}  // namespace qpsl2
