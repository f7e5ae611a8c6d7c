#include "nlsv/dispersive.hpp"

#include <algorithm>
#include <cmath>

namespace nlsv {

namespace {

std::vector<double> laplacian_symbol(const Grid& g) {
    std::vector<double> sym(g.size());
    for (int i = 0; i < g.n; ++i) {
        double a = g.freq(i) * g.freq(i);
        for (int j = 0; j < g.n; ++j) {
            double b = a + g.freq(j) * g.freq(j);
            for (int k = 0; k < g.n; ++k)
                sym[g.index(i, j, k)] = b + g.freq(k) * g.freq(k);
        }
    }
    return sym;
}

long long step_count(double t, double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("schrodinger_propagate: dt must be positive");
    double ratio = std::abs(t) / dt;
    long long m = std::llround(ratio);
    if (std::abs(ratio - double(m)) > 1e-9 * std::max(1.0, ratio))
        throw std::invalid_argument("schrodinger_propagate: |t|/dt is not an integer");
    return m;
}

}  // namespace

Field schrodinger_propagate(const Potential& V, double t, const Field& f, double dt) {
    if (!(V.grid == f.grid)) throw std::invalid_argument("schrodinger_propagate: grid mismatch");
    if (t == 0.0) return f;
    auto lap = laplacian_symbol(f.grid);
    const double inv = 1.0 / double(f.grid.size());
    Field u = f;
    if (is_zero(V)) {
        (void)step_count(t, dt);  // keep the lattice contract even on the exact path
        fft_forward(u);
        for (std::size_t i = 0; i < lap.size(); ++i)
            u.values[i] *= std::exp(cdouble(0.0, -t * lap[i])) * inv;
        fft_backward(u);
        return u;
    }
    const long long m = step_count(t, dt);
    const double sdt = (t > 0.0) ? dt : -dt;
    std::vector<cdouble> kin_half(lap.size()), kin_full(lap.size()), pot(lap.size());
    for (std::size_t i = 0; i < lap.size(); ++i) {
        kin_half[i] = std::exp(cdouble(0.0, -0.5 * sdt * lap[i]));
        kin_full[i] = kin_half[i] * kin_half[i];
        pot[i] = std::exp(cdouble(0.0, -sdt * V.values[i]));
    }
    // K(dt/2) [P K(dt)]^{m-1} P K(dt/2), interior kinetic halves merged.
    fft_forward(u);
    for (std::size_t i = 0; i < lap.size(); ++i) u.values[i] *= kin_half[i] * inv;
    fft_backward(u);
    for (long long s = 0; s < m; ++s) {
        for (std::size_t i = 0; i < pot.size(); ++i) u.values[i] *= pot[i];
        const auto& kin = (s + 1 < m) ? kin_full : kin_half;
        fft_forward(u);
        for (std::size_t i = 0; i < lap.size(); ++i) u.values[i] *= kin[i] * inv;
        fft_backward(u);
    }
    return u;
}

double wrap_horizon(const Field& f) {
    const Grid& g = f.grid;
    Field hat = f;
    fft_forward(hat);
    std::vector<std::pair<double, double>> modes;  // (|xi|, energy)
    modes.reserve(g.size());
    double total = 0.0;
    for (int i = 0; i < g.n; ++i)
        for (int j = 0; j < g.n; ++j)
            for (int k = 0; k < g.n; ++k) {
                double xi = std::sqrt(g.freq(i) * g.freq(i) + g.freq(j) * g.freq(j) +
                                      g.freq(k) * g.freq(k));
                double e = std::norm(hat.values[g.index(i, j, k)]);
                modes.emplace_back(xi, e);
                total += e;
            }
    std::sort(modes.begin(), modes.end());
    double acc = 0.0, xi99 = 0.0;
    for (const auto& [xi, e] : modes) {
        acc += e;
        if (acc >= 0.99 * total) {
            xi99 = xi;
            break;
        }
    }
    xi99 = std::min(xi99, M_PI * g.n / g.box_length);
    if (xi99 <= 0.0) return HUGE_VAL;
    return g.box_length / (2.0 * xi99);
}

DecayFit dispersive_decay_fit(const Potential& V, const SpectralData& spec, const Field& f,
                              const std::vector<double>& times, double dt) {
    if (times.empty() || !std::is_sorted(times.begin(), times.end()) || times.front() <= 0.0)
        throw std::invalid_argument("dispersive_decay_fit: times must be positive and sorted");
    double l1 = lp_norm(f, 1.0);
    if (std::abs(l1 - 1.0) > 1e-8)
        throw std::invalid_argument("dispersive_decay_fit: data must be L^1-normalized");
    DecayFit fit;
    fit.t_wrap = wrap_horizon(f);
    if (times.back() > fit.t_wrap)
        throw std::invalid_argument("dispersive_decay_fit: requested time " +
                                    std::to_string(times.back()) +
                                    " exceeds the wrap horizon T_wrap = " +
                                    std::to_string(fit.t_wrap));
    Field u = continuous_projection(spec, f);
    double t_prev = 0.0;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (double t : times) {
        u = schrodinger_propagate(V, t - t_prev, u, dt);
        t_prev = t;
        double sup = lp_norm(u, HUGE_VAL);
        fit.samples.emplace_back(t, sup);
        double lx = std::log(t), ly = std::log(sup);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double m = double(times.size());
    fit.exponent = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    fit.amplitude = std::exp((sy - fit.exponent * sx) / m);
    return fit;
}

std::vector<AdmissiblePair> admissible_pairs(double s, int count) {
    if (!(s >= 0.0 && s < 1.5))
        throw std::invalid_argument("admissible_pairs: s must be in [0, 3/2)");
    if (count < 1) throw std::invalid_argument("admissible_pairs: count must be >= 1");
    const double r_max = (s > 0.0) ? std::min(3.0 / s, 6.0) : 6.0;
    std::vector<AdmissiblePair> out;
    for (int i = 0; i < count; ++i) {
        double r = 2.0 + (r_max - 2.0) * double(i) / double(count);
        double denom = 1.5 - 3.0 / r;
        double q = (denom <= 0.0) ? HUGE_VAL : 2.0 / denom;
        out.push_back(AdmissiblePair{q, r, s});
    }
    return out;
}

StrichartzReport strichartz_norm(const EvolutionTrace& trace, double s,
                                 const std::vector<AdmissiblePair>& pairs, bool distorted,
                                 const Potential& V, double a, const SpectralData& spec) {
    if (trace.times.empty()) throw std::invalid_argument("strichartz_norm: empty trace");
    StrichartzReport rep;
    rep.pairs = pairs;

    // The spatial operator (1+a+H)^{s/2} or (1+a+|xi|^2)^{s/2} is r-independent:
    // apply it once per slice, then take every pair's L^r norm.
    std::vector<Field> weighted;
    if (s == 0.0) {
        weighted = trace.fields;
    } else if (distorted) {
        weighted = fractional_power_apply_many(V, a, s, trace.fields, spec);
    } else {
        auto mult = make_multiplier(trace.fields.front().grid, [&](double x, double y, double z) {
            return std::pow(1.0 + a + x * x + y * y + z * z, 0.5 * s);
        });
        for (const auto& f : trace.fields) weighted.push_back(apply_multiplier(f, mult));
    }

    for (const auto& pair : pairs) {
        std::vector<double> g(trace.times.size());
        for (std::size_t i = 0; i < weighted.size(); ++i) g[i] = lp_norm(weighted[i], pair.r);
        double val;
        if (std::isinf(pair.q)) {
            val = *std::max_element(g.begin(), g.end());
        } else {
            double acc = 0.0;
            for (std::size_t i = 0; i + 1 < g.size(); ++i)
                acc += 0.5 * (std::pow(g[i], pair.q) + std::pow(g[i + 1], pair.q)) *
                       (trace.times[i + 1] - trace.times[i]);
            val = std::pow(acc, 1.0 / pair.q);
        }
        rep.per_pair_norm.push_back(val);
    }
    rep.sup_norm = rep.per_pair_norm.empty()
                       ? 0.0
                       : *std::max_element(rep.per_pair_norm.begin(), rep.per_pair_norm.end());
    return rep;
}

}  // namespace nlsv
