#pragma once

#include "nlsv/dispersive.hpp"

namespace nlsv {

/// sigma |f|^2 f pointwise; sigma = +1 focusing, -1 defocusing.
Field nonlinearity(const Field& f, int sign);

/// M[f] = ||f||_2^2.
double mass(const Field& f);

/// E[f] = int 1/2 |grad f|^2 + 1/2 V |f|^2 - (sigma/4) |f|^4.
double energy(const Potential& V, const Field& f, int sign);

struct PicardConfig {
    double T = 0.1;
    int n_t = 16;            // stored slices (including t = 0)
    double tol = 1e-8;
    int max_iter = 25;
    double ball_radius = 0.0;  // 0: use 2 c_measured ||u0||
    double dt_lin = 1e-3;      // internal propagator step cap
    double s = 1.0;            // monitored regularity
};

/// One application of the Duhamel map (4.1): linear flow plus the trapezoid
/// time integral of the nonlinearity, P_c part propagated with the full flow
/// and bound-state modes integrated with their exact phases.
EvolutionTrace duhamel_map(const Potential& V, const SpectralData& spec, const Field& u0,
                           const EvolutionTrace& trace_in, const PicardConfig& cfg, int sign);

struct PicardResult {
    EvolutionTrace trace;
    std::vector<double> distances;    // d_k = proxy distance of successive iterates
    std::vector<double> ratios;       // d_{k+1} / d_k
    bool contracted = false;
    int iterations = 0;
    double c_measured = 0.0;          // ||linear flow||_proxy / ||u0||_{distorted H^s}
    double ball_radius = 0.0;
    double h2_of_limit = 0.0;         // sup_t distorted H^2 norm of the limit
};

/// Picard iteration u^{k+1} = Phi(u^k) from the linear flow; throws
/// NumericalError when the map fails to contract (T too large for the data).
PicardResult picard_solve(const Potential& V, const SpectralData& spec, const Field& u0,
                          const PicardConfig& cfg, int sign);

/// Split-step production integrator: e^{i dt Delta/2}, exact pointwise phase
/// e^{i dt(-V + sigma |u|^2)}, e^{i dt Delta/2}; records M, E, H^1 per slice.
/// Aborts when ||u||_inf exceeds guard_factor x its initial value.
EvolutionTrace evolve(const Potential& V, const Field& u0, double T, double dt, int sign,
                      int n_store = 17, double guard_factor = 1e6);

/// (mass drift, energy drift): sup over slices of the relative deviations.
std::pair<double, double> conservation_report(const EvolutionTrace& trace);

/// Theorem-4.6 check: ||(1+a+H)^{1/2} u(t)||^2 <= 2 E0 + (1+a) M0 (+1e-4 rel)
/// at every slice; defocusing traces only.
bool h1_bound_check(const EvolutionTrace& trace, const Potential& V, double a, double M0,
                    double E0);

}  // namespace nlsv
