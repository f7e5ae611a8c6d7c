#pragma once

#include <cstdint>
#include <optional>

#include "nlsv/potential.hpp"

namespace nlsv {

/// H f = -Laplacian f (spectral) + V.f (pointwise).
Field apply_hamiltonian(const Potential& V, const Field& f);

/// q(u,u) = ||grad u||_2^2 + h^3 sum V |u|^2  (real).
double quadratic_form(const Potential& V, const Field& u);

/// Smallest grid-searched a with  sup_x int |V(y)| e^{-sqrt(2a)|x-y|} / (4pi|x-y|) dy <= 1/2,
/// located by bisection (minimal within a factor ~1.05).  a_max guards the search.
double find_form_constant(const Potential& V, double a_max = 1e6);

/// Left side of the form-constant condition at a given a (exposed for tests).
double form_constant_condition(const Potential& V, double a);

/// || |V|^{1/2} R_0(-2a) |V|^{1/2} ||_{L^2 -> L^2} via power iteration on the
/// symmetric positive kernel; deterministic start vector, <= 500 iterations.
double birman_schwinger_norm(const Potential& V, double a);

struct EigenPair {
    double lambda;
    Field psi;  // ||psi||_{L^2} = 1
};

/// Eigenvalues in (-eig_tol, 0] are finite-box continuum artifacts; the
/// threshold combines the box scale with the torus zero-mode shift mean(V).
double continuum_artifact_tol(const Potential& V);

/// Up to k_max eigenpairs of H with lambda < -eig_tol, ascending, orthonormal,
/// residual ||H psi - lambda psi||_2 <= 1e-6.  Shift-invert Lanczos with a
/// spectrally preconditioned CG inner solve.
std::vector<EigenPair> bound_states(const Potential& V, int k_max);

struct ResonanceIndicator {
    double sigma_min;   // smallest singular value of I + V R_0(0) on the coarse lattice
    double sigma_l1;    // 1 / (Hager estimate of ||(I + V R_0(0))^{-1}||_1)
    int lattice_n;
};

/// Invertibility diagnostic for I + V R_0(0), dense on a coarsened lattice.
ResonanceIndicator resonance_indicator(const Potential& V, int coarse_n = 24,
                                       std::size_t mem_cap_bytes = std::size_t(6) << 30);

struct SpectralData {
    double form_constant = 0.0;              // a
    std::vector<EigenPair> eigenpairs;       // lambda ascending
    double bs_norm = 0.0;                    // at -2a
    std::optional<ResonanceIndicator> resonance;
    double eig_tol = 0.0;

    int count() const { return int(eigenpairs.size()); }
};

struct SpectralOptions {
    int k_max = 8;
    int resonance_n = 0;  // 0 skips the dense resonance diagnostic
};

SpectralData analyze_spectrum(const Potential& V, const SpectralOptions& opt = {});

/// P_c f = f - sum_j <psi_j, f> psi_j.
Field continuous_projection(const SpectralData& spec, const Field& f);

}  // namespace nlsv
