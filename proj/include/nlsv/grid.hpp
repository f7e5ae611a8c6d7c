#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "nlsv/common.hpp"

namespace nlsv {

/// Periodic box discretization of R^3: n points per axis on [-L/2, L/2),
/// spacing h = L/n, frequency lattice xi_k = 2*pi*k/L, k in {-n/2,...,n/2-1}.
struct Grid {
    int n = 0;
    double box_length = 0.0;

    double spacing() const { return box_length / n; }
    std::size_t size() const { return std::size_t(n) * n * n; }
    double cell_volume() const { double h = spacing(); return h * h * h; }
    double coord(int i) const { return -0.5 * box_length + i * spacing(); }
    /// Signed frequency of FFT index k (FFTW storage order).
    double freq(int k) const {
        int s = (k < n / 2) ? k : k - n;
        return 2.0 * M_PI * s / box_length;
    }
    /// Minimum-image distance between grid offsets (di,dj,dk).
    double min_image_dist(int di, int dj, int dk) const {
        double h = spacing();
        auto fold = [this](int d) { d %= n; if (d < 0) d += n; return (d <= n / 2) ? d : d - n; };
        double x = h * fold(di), y = h * fold(dj), z = h * fold(dk);
        return std::sqrt(x * x + y * y + z * z);
    }
    std::size_t index(int i, int j, int k) const {
        return (std::size_t(i) * n + j) * n + k;
    }
    bool operator==(const Grid&) const = default;
};

Grid make_grid(int n, double box_length);

/// Complex scalar field sampled on a Grid, index (ix*n + iy)*n + iz.
struct Field {
    Grid grid;
    std::vector<cdouble> values;
};

Field make_field(const Grid& g);

/// Fourier-side symbol, same storage layout as Field but indexed by frequency.
struct SpectralMultiplier {
    Grid grid;
    std::vector<cdouble> symbol;
};

/// Build a multiplier from a callable symbol(xi_x, xi_y, xi_z).
template <class F>
SpectralMultiplier make_multiplier(const Grid& g, F&& symbol) {
    SpectralMultiplier m{g, std::vector<cdouble>(g.size())};
    for (int i = 0; i < g.n; ++i)
        for (int j = 0; j < g.n; ++j)
            for (int k = 0; k < g.n; ++k)
                m.symbol[g.index(i, j, k)] = symbol(g.freq(i), g.freq(j), g.freq(k));
    return m;
}

/// Unnormalized DFT in place (FFTW sign conventions); inverse divides by n^3.
void fft_forward(Field& f);
void fft_backward(Field& f);

Field apply_multiplier(const Field& f, const SpectralMultiplier& m);
/// In-place variant used by inner loops.
void apply_multiplier_inplace(Field& f, const SpectralMultiplier& m);

/// Riemann-sum L^p norm (h^3 * sum |f|^p)^(1/p); p = inf returns max modulus.
double lp_norm(const Field& f, double p);

double l2_inner_real(const Field& a, const Field& b);     // Re <a,b> with h^3 weight
cdouble l2_inner(const Field& a, const Field& b);         // <a,b> = h^3 sum conj(a) b

/// ||(1+a+|xi|^2)^{s/2} f||_{L^r}.  Preconditions: s in [0,2], r in (1,inf), a >= 0.
double sobolev_norm_standard(const Field& f, double s, double r, double a);
/// Homogeneous variant |xi|^s with the xi=0 mode zeroed.
double sobolev_norm_homogeneous(const Field& f, double s, double r);

/// ||grad f||_{L^2}^2 evaluated on the frequency side.
double grad_norm_sq(const Field& f);

/// Deterministic band-limited complex field: unit-variance Gaussian modes on
/// |xi| <= kcut_frac * (pi n/L), zero elsewhere, normalized to ||f||_2 = 1.
Field random_band_limited(const Grid& g, std::uint64_t seed, double kcut_frac = 0.33);

}  // namespace nlsv
