#include "nlsv/grid.hpp"

#include <fftw3.h>
#ifdef _OPENMP
#include <omp.h>
#endif

#include <algorithm>
#include <map>
#include <mutex>
#include <random>

namespace nlsv {

namespace {

int g_threads = 1;

struct FftPlans {
    fftw_plan fwd = nullptr;
    fftw_plan bwd = nullptr;
};

std::mutex& plan_mutex() {
    static std::mutex m;
    return m;
}

// One in-place c2c plan pair per grid size, executed via the new-array API.
FftPlans& plans_for(int n) {
    static std::map<int, FftPlans> cache;
    std::lock_guard<std::mutex> lock(plan_mutex());
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
#ifdef NLSV_HAVE_FFTW_OMP
    static bool threads_ready = [] { fftw_init_threads(); return true; }();
    (void)threads_ready;
    fftw_plan_with_nthreads(g_threads);
#endif
    std::vector<cdouble> buf(std::size_t(n) * n * n);
    auto* p = reinterpret_cast<fftw_complex*>(buf.data());
    FftPlans pl;
    unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    pl.fwd = fftw_plan_dft_3d(n, n, n, p, p, FFTW_FORWARD, flags);
    pl.bwd = fftw_plan_dft_3d(n, n, n, p, p, FFTW_BACKWARD, flags);
    return cache.emplace(n, pl).first->second;
}

}  // namespace

void set_threads(int k) {
    g_threads = std::max(1, k);
#ifdef _OPENMP
    omp_set_num_threads(g_threads);
#endif
}

int thread_count() { return g_threads; }

Grid make_grid(int n, double box_length) {
    if (n % 2 != 0) throw std::invalid_argument("make_grid: n must be even");
    if (n < 8) throw std::invalid_argument("make_grid: n must be >= 8");
    if (!(box_length > 0.0)) throw std::invalid_argument("make_grid: box length must be positive");
    return Grid{n, box_length};
}

Field make_field(const Grid& g) { return Field{g, std::vector<cdouble>(g.size())}; }

void fft_forward(Field& f) {
    auto* p = reinterpret_cast<fftw_complex*>(f.values.data());
    fftw_execute_dft(plans_for(f.grid.n).fwd, p, p);
}

void fft_backward(Field& f) {
    auto* p = reinterpret_cast<fftw_complex*>(f.values.data());
    fftw_execute_dft(plans_for(f.grid.n).bwd, p, p);
}

void apply_multiplier_inplace(Field& f, const SpectralMultiplier& m) {
    if (!(f.grid == m.grid)) throw std::invalid_argument("apply_multiplier: grid mismatch");
    fft_forward(f);
    const double inv = 1.0 / double(f.grid.size());
    const std::size_t nn = f.grid.size();
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < std::ptrdiff_t(nn); ++i)
        f.values[i] *= m.symbol[i] * inv;
    fft_backward(f);
}

Field apply_multiplier(const Field& f, const SpectralMultiplier& m) {
    Field out = f;
    apply_multiplier_inplace(out, m);
    return out;
}

double lp_norm(const Field& f, double p) {
    if (p < 1.0) throw std::invalid_argument("lp_norm: p must be >= 1");
    if (std::isinf(p)) {
        double mx = 0.0;
        for (const auto& v : f.values) mx = std::max(mx, std::abs(v));
        return mx;
    }
    double acc = 0.0;
    if (p == 2.0) {
        for (const auto& v : f.values) acc += std::norm(v);
    } else {
        for (const auto& v : f.values) acc += std::pow(std::abs(v), p);
    }
    return std::pow(f.grid.cell_volume() * acc, 1.0 / p);
}

cdouble l2_inner(const Field& a, const Field& b) {
    if (!(a.grid == b.grid)) throw std::invalid_argument("l2_inner: grid mismatch");
    cdouble acc = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) acc += std::conj(a.values[i]) * b.values[i];
    return acc * a.grid.cell_volume();
}

double l2_inner_real(const Field& a, const Field& b) { return l2_inner(a, b).real(); }

double grad_norm_sq(const Field& f) {
    Field hat = f;
    fft_forward(hat);
    const Grid& g = f.grid;
    double acc = 0.0;
    for (int i = 0; i < g.n; ++i) {
        double xi2 = g.freq(i) * g.freq(i);
        for (int j = 0; j < g.n; ++j) {
            double xj2 = g.freq(j) * g.freq(j);
            for (int k = 0; k < g.n; ++k) {
                double k2 = xi2 + xj2 + g.freq(k) * g.freq(k);
                acc += k2 * std::norm(hat.values[g.index(i, j, k)]);
            }
        }
    }
    // Parseval with unnormalized DFT: h^3 sum |f|^2 = (h^3/n^3) sum |fhat|^2.
    return acc * g.cell_volume() / double(g.size());
}

namespace {

double sobolev_norm_impl(const Field& f, double s, double r, double a, bool homogeneous) {
    if (s < 0.0 || s > 2.0) throw std::invalid_argument("sobolev norm: s must be in [0,2]");
    if (!(r > 1.0) || std::isinf(r)) throw std::invalid_argument("sobolev norm: r must be in (1,inf)");
    if (a < 0.0) throw std::invalid_argument("sobolev norm: shift a must be >= 0");
    const Grid& g = f.grid;
    auto m = make_multiplier(g, [&](double x, double y, double z) -> cdouble {
        double k2 = x * x + y * y + z * z;
        if (homogeneous) return (k2 == 0.0) ? 0.0 : std::pow(k2, 0.5 * s);
        return std::pow(1.0 + a + k2, 0.5 * s);
    });
    return lp_norm(apply_multiplier(f, m), r);
}

}  // namespace

double sobolev_norm_standard(const Field& f, double s, double r, double a) {
    return sobolev_norm_impl(f, s, r, a, false);
}

double sobolev_norm_homogeneous(const Field& f, double s, double r) {
    return sobolev_norm_impl(f, s, r, 0.0, true);
}

Field random_band_limited(const Grid& g, std::uint64_t seed, double kcut_frac) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    const double kcut = kcut_frac * M_PI * g.n / g.box_length;
    Field hat = make_field(g);
    for (int i = 0; i < g.n; ++i)
        for (int j = 0; j < g.n; ++j)
            for (int k = 0; k < g.n; ++k) {
                double xx = g.freq(i), yy = g.freq(j), zz = g.freq(k);
                double re = normal(rng), im = normal(rng);  // drawn unconditionally: layout-stable
                if (xx * xx + yy * yy + zz * zz <= kcut * kcut)
                    hat.values[g.index(i, j, k)] = cdouble(re, im);
            }
    fft_backward(hat);
    double nrm = lp_norm(hat, 2.0);
    if (nrm == 0.0) throw NumericalError("random_band_limited: empty band");
    for (auto& v : hat.values) v /= nrm;
    return hat;
}

}  // namespace nlsv
