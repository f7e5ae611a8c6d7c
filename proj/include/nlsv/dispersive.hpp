#pragma once

#include "nlsv/funcalc.hpp"
#include "nlsv/trace.hpp"

namespace nlsv {

/// e^{-itH} f by Strang splitting e^{i(dt/2)Delta} e^{-i dt V} e^{i(dt/2)Delta},
/// |t|/dt steps (conjugated for t < 0); exactly unitary up to round-off.
/// Collapses to the single exact multiplier when V == 0.
Field schrodinger_propagate(const Potential& V, double t, const Field& f, double dt);

/// Wrap-around horizon L / (2 xi_99) where xi_99 is the radius holding 99% of
/// the datum's spectral energy: past it, periodic images pollute decay fits.
double wrap_horizon(const Field& f);

struct DecayFit {
    double exponent = 0.0;   // least-squares slope of log ||u||_inf vs log t
    double amplitude = 0.0;  // exp(intercept)
    double t_wrap = 0.0;
    std::vector<std::pair<double, double>> samples;  // (t, sup norm)
};

/// Evolve P_c f and fit the L^inf decay; f must satisfy ||f||_1 = 1 and all
/// times must sit below the wrap horizon and on the dt lattice.
DecayFit dispersive_decay_fit(const Potential& V, const SpectralData& spec, const Field& f,
                              const std::vector<double>& times, double dt);

struct AdmissiblePair {
    double q, r, s;  // 2/q + 3/r = 3/2
};

/// count pairs with r equally spaced in [2, min(3/s, 6)); always contains (inf, 2).
std::vector<AdmissiblePair> admissible_pairs(double s, int count);

struct StrichartzReport {
    std::vector<AdmissiblePair> pairs;
    std::vector<double> per_pair_norm;  // L^q_t of the spatial (1+a+...)^{s/2} norm in L^r
    double sup_norm = 0.0;
};

/// L^q-in-time (trapezoid; q=inf takes the sampled max) of the spatial W^{s,r}
/// norm (standard) or distorted 𝔚^{s,r} norm along a stored trace.
StrichartzReport strichartz_norm(const EvolutionTrace& trace, double s,
                                 const std::vector<AdmissiblePair>& pairs, bool distorted,
                                 const Potential& V, double a, const SpectralData& spec);

}  // namespace nlsv
