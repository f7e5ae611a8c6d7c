#include "nlsv/funcalc.hpp"

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

/// One Strang heat step K(tau/2) P(tau) K(tau/2) on a block, multipliers cached
/// until tau changes.
class HeatStepper {
public:
    HeatStepper(const Potential& V) : V_(V), lap_(laplacian_symbol(V.grid)) {}

    void step(std::vector<Field>& block, double tau) {
        refresh(tau);
        for (auto& f : block) {
            kinetic_half(f);
            for (std::size_t i = 0; i < f.values.size(); ++i) f.values[i] *= pot_[i];
            kinetic_half(f);
        }
    }

    /// Exact e^{t Delta} for the V == 0 case: one multiplier, any t.
    void free_flow(std::vector<Field>& block, double t) {
        const Grid& g = V_.grid;
        const double inv = 1.0 / double(g.size());
        for (auto& f : block) {
            fft_forward(f);
            for (std::size_t i = 0; i < lap_.size(); ++i)
                f.values[i] *= std::exp(-t * lap_[i]) * inv;
            fft_backward(f);
        }
    }

private:
    void refresh(double tau) {
        if (tau == tau_cached_) return;
        tau_cached_ = tau;
        kin_.resize(lap_.size());
        pot_.resize(lap_.size());
        for (std::size_t i = 0; i < lap_.size(); ++i) kin_[i] = std::exp(-0.5 * tau * lap_[i]);
        for (std::size_t i = 0; i < lap_.size(); ++i) pot_[i] = std::exp(-tau * V_.values[i]);
    }

    void kinetic_half(Field& f) {
        const double inv = 1.0 / double(f.grid.size());
        fft_forward(f);
        for (std::size_t i = 0; i < kin_.size(); ++i) f.values[i] *= kin_[i] * inv;
        fft_backward(f);
    }

    const Potential& V_;
    std::vector<double> lap_;
    std::vector<double> kin_, pot_;
    double tau_cached_ = -1.0;
};

void project_out(std::vector<Field>& block, const std::vector<EigenPair>& pairs) {
    for (auto& f : block)
        for (const auto& [lam, psi] : pairs) {
            cdouble c = l2_inner(psi, f);
            for (std::size_t i = 0; i < f.values.size(); ++i) f.values[i] -= c * psi.values[i];
        }
}

}  // namespace

namespace detail {

void heat_advance(const Potential& V, double t0, double t1, std::vector<Field>& block,
                  const HeatChainOptions& opt) {
    if (t1 < t0) throw std::invalid_argument("heat_advance: backwards interval");
    if (t1 == t0 || block.empty()) return;
    HeatStepper stepper(V);
    if (is_zero(V)) {
        stepper.free_flow(block, t1 - t0);
        return;
    }
    double t = t0;
    std::vector<Field> half;
    while (t < t1 - 1e-300) {
        double cap = (t < opt.t_knee) ? opt.tau0 : std::max(opt.tau0, opt.rho * t);
        double tau = std::min(t1 - t, cap);
        if (opt.richardson) {
            half = block;  // two half steps vs one full step, combined at order 4
            stepper.step(half, 0.5 * tau);
            stepper.step(half, 0.5 * tau);
            stepper.step(block, tau);
            for (std::size_t b = 0; b < block.size(); ++b)
                for (std::size_t i = 0; i < block[b].values.size(); ++i)
                    block[b].values[i] =
                        (4.0 * half[b].values[i] - block[b].values[i]) / 3.0;
        } else {
            stepper.step(block, tau);
        }
        if (opt.deflate) project_out(block, *opt.deflate);
        t += tau;
    }
}

std::vector<Field> bochner_negative_power(const Potential& V, double shift, double sigma,
                                          const std::vector<Field>& block,
                                          const std::vector<EigenPair>& deflate,
                                          int base_nodes) {
    if (!(sigma > 0.0 && sigma <= 1.0))
        throw std::invalid_argument("bochner_negative_power: sigma must be in (0,1]");
    const double tau_lo = -30.0, tau_hi = 5.0;
    HeatChainOptions chain;
    chain.deflate = deflate.empty() ? nullptr : &deflate;

    auto run = [&](int nodes) {
        const double dtau = (tau_hi - tau_lo) / (nodes - 1);
        std::vector<Field> acc(block.size());
        for (std::size_t b = 0; b < block.size(); ++b) acc[b] = make_field(block[b].grid);

        // Analytic correction for t in (0, e^{tau_lo}]:
        //   t0^sigma/sigma * f - t0^{sigma+1}/(sigma+1) * (shift + H) f.
        const double t0 = std::exp(tau_lo);
        const double c0 = std::pow(t0, sigma) / sigma;
        const double c1 = std::pow(t0, sigma + 1.0) / (sigma + 1.0);
        for (std::size_t b = 0; b < block.size(); ++b) {
            Field hf = apply_hamiltonian(V, block[b]);
            for (std::size_t i = 0; i < hf.values.size(); ++i)
                acc[b].values[i] = c0 * block[b].values[i] -
                                   c1 * (hf.values[i] + shift * block[b].values[i]);
        }

        std::vector<Field> state = block;
        double t_prev = 0.0;
        double acc_scale = 0.0;
        for (int j = 0; j < nodes; ++j) {
            double t = std::exp(tau_lo + j * dtau);
            heat_advance(V, t_prev, t, state, chain);
            t_prev = t;
            double w = (j == 0 || j == nodes - 1) ? 0.5 * dtau : dtau;
            double coeff = w * std::pow(t, sigma) * std::exp(-t * shift);
            double state_norm = 0.0;
            for (std::size_t b = 0; b < state.size(); ++b) {
                for (std::size_t i = 0; i < state[b].values.size(); ++i)
                    acc[b].values[i] += coeff * state[b].values[i];
                state_norm = std::max(state_norm, lp_norm(state[b], 2.0));
                acc_scale = std::max(acc_scale, lp_norm(acc[b], 2.0));
            }
            if (t > 1.0 && coeff * state_norm < 1e-17 * acc_scale) break;
        }
        const double gamma = std::tgamma(sigma);
        for (auto& f : acc)
            for (auto& v : f.values) v /= gamma;
        return acc;
    };

    std::vector<Field> prev = run(base_nodes);
    for (int nodes = 2 * base_nodes; nodes <= 8 * base_nodes; nodes *= 2) {
        std::vector<Field> cur = run(nodes);
        double rel = 0.0;
        for (std::size_t b = 0; b < cur.size(); ++b) {
            Field diff = cur[b];
            for (std::size_t i = 0; i < diff.values.size(); ++i)
                diff.values[i] -= prev[b].values[i];
            double denom = lp_norm(cur[b], 2.0);
            if (denom > 0.0) rel = std::max(rel, lp_norm(diff, 2.0) / denom);
        }
        if (rel < 1e-6) return cur;
        prev = std::move(cur);
    }
    throw NumericalError("bochner_negative_power: ladder refinement did not converge");
}

}  // namespace detail

Field heat_apply(const Potential& V, double t, const Field& f) {
    if (t < 0.0) throw std::invalid_argument("heat_apply: t must be >= 0");
    if (!(V.grid == f.grid)) throw std::invalid_argument("heat_apply: grid mismatch");
    if (t == 0.0) return f;
    std::vector<Field> block{f};
    if (is_zero(V)) {
        HeatStepper(V).free_flow(block, t);
        return std::move(block[0]);
    }
    const int m = int(std::ceil(t / 1e-2));
    const double tau = t / m;
    HeatStepper stepper(V);
    for (int i = 0; i < m; ++i) stepper.step(block, tau);
    return std::move(block[0]);
}

namespace {

struct EigenSplit {
    std::vector<cdouble> coeff;
    Field continuous;
};

EigenSplit split_bound_states(const SpectralData& spec, const Field& f) {
    EigenSplit out{{}, f};
    for (const auto& [lam, psi] : spec.eigenpairs) {
        cdouble c = l2_inner(psi, f);
        out.coeff.push_back(c);
        for (std::size_t i = 0; i < f.values.size(); ++i)
            out.continuous.values[i] -= c * psi.values[i];
    }
    return out;
}

Field fractional_power_impl(const Potential& V, double a, double s, const Field& f,
                            const SpectralData& spec, bool homogeneous) {
    if (s < -2.0 || s > 2.0)
        throw std::invalid_argument("fractional_power_apply: s must be in [-2,2]");
    if (a < 0.0) throw std::invalid_argument("fractional_power_apply: a must be >= 0");
    if (!spec.eigenpairs.empty() && 1.0 + a + spec.eigenpairs.front().lambda <= 0.0)
        throw std::invalid_argument("fractional_power_apply: 1+a+H is not positive definite");
    if (s == 0.0) return f;

    const double shift = homogeneous ? 0.0 : 1.0 + a;
    EigenSplit parts = split_bound_states(spec, f);

    if (homogeneous) {
        double fn = lp_norm(f, 2.0);
        for (auto c : parts.coeff)
            if (std::abs(c) > 1e-6 * std::max(fn, 1e-300))
                throw std::invalid_argument(
                    "homogeneous fractional power requires P_c data (bound-state component found)");
        parts.coeff.assign(parts.coeff.size(), 0.0);
    }

    Field out = make_field(f.grid);
    const int k = (s > 0.0) ? int(std::ceil(0.5 * s)) : 0;
    const double rem = 0.5 * s - k;  // in (-1, 0]

    if (rem == 0.0) {
        out = parts.continuous;
    } else {
        auto res = detail::bochner_negative_power(V, shift, -rem, {parts.continuous},
                                                  spec.eigenpairs);
        out = std::move(res[0]);
    }
    for (int p = 0; p < k; ++p) {
        Field h = apply_hamiltonian(V, out);
        for (std::size_t i = 0; i < h.values.size(); ++i)
            h.values[i] += shift * out.values[i];
        out = std::move(h);
    }
    // Bound-state components carry exact eigenvalue factors.
    for (std::size_t j = 0; j < parts.coeff.size(); ++j) {
        double base = shift + spec.eigenpairs[j].lambda;
        cdouble c = parts.coeff[j] * std::pow(base, 0.5 * s);
        const Field& psi = spec.eigenpairs[j].psi;
        for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] += c * psi.values[i];
    }
    return out;
}

}  // namespace

Field fractional_power_apply(const Potential& V, double a, double s, const Field& f,
                             const SpectralData& spec) {
    return fractional_power_impl(V, a, s, f, spec, false);
}

std::vector<Field> fractional_power_apply_many(const Potential& V, double a, double s,
                                               const std::vector<Field>& fields,
                                               const SpectralData& spec, bool homogeneous) {
    if (s == 0.0) return fields;
    const double shift = homogeneous ? 0.0 : 1.0 + a;
    const int k = (s > 0.0) ? int(std::ceil(0.5 * s)) : 0;
    const double rem = 0.5 * s - k;

    std::vector<EigenSplit> splits;
    std::vector<Field> cont;
    splits.reserve(fields.size());
    for (const auto& f : fields) {
        splits.push_back(split_bound_states(spec, f));
        cont.push_back(splits.back().continuous);
    }
    std::vector<Field> out;
    if (rem == 0.0)
        out = std::move(cont);
    else
        out = detail::bochner_negative_power(V, shift, -rem, cont, spec.eigenpairs);
    for (auto& f : out)
        for (int p = 0; p < k; ++p) {
            Field h = apply_hamiltonian(V, f);
            for (std::size_t i = 0; i < h.values.size(); ++i)
                h.values[i] += shift * f.values[i];
            f = std::move(h);
        }
    for (std::size_t b = 0; b < out.size(); ++b)
        for (std::size_t j = 0; j < splits[b].coeff.size(); ++j) {
            if (homogeneous) break;
            double base = shift + spec.eigenpairs[j].lambda;
            cdouble c = splits[b].coeff[j] * std::pow(base, 0.5 * s);
            const Field& psi = spec.eigenpairs[j].psi;
            for (std::size_t i = 0; i < out[b].values.size(); ++i)
                out[b].values[i] += c * psi.values[i];
        }
    return out;
}

double distorted_sobolev_norm(const Potential& V, double a, double s, double r, const Field& f,
                              const SpectralData& spec, bool homogeneous) {
    if (s < 0.0 || s > 2.0)
        throw std::invalid_argument("distorted_sobolev_norm: s must be in [0,2]");
    if (!(r > 1.0) || std::isinf(r))
        throw std::invalid_argument("distorted_sobolev_norm: r must be in (1,inf)");
    if (s == 0.0) return lp_norm(f, r);

    if (!homogeneous && r == 2.0) {
        if (s == 1.0) {
            // ||(1+a+H)^{1/2} f||_2^2 = (1+a)||f||^2 + q(f,f), exact identity.
            double m2 = lp_norm(f, 2.0);
            return std::sqrt((1.0 + a) * m2 * m2 + quadratic_form(V, f));
        }
        if (s == 2.0) {
            Field h = apply_hamiltonian(V, f);
            for (std::size_t i = 0; i < h.values.size(); ++i)
                h.values[i] += (1.0 + a) * f.values[i];
            return lp_norm(h, 2.0);
        }
    }
    Field g = homogeneous ? fractional_power_impl(V, a, s, continuous_projection(spec, f), spec,
                                                  true)
                          : fractional_power_impl(V, a, s, f, spec, false);
    return lp_norm(g, r);
}

EquivalenceReport norm_equivalence_scan(const Potential& V, double a, double s, double r,
                                        int ensemble_size, const SpectralData& spec,
                                        std::uint64_t seed) {
    if (ensemble_size < 1) throw std::invalid_argument("norm_equivalence_scan: empty ensemble");
    EquivalenceReport rep{s, r, HUGE_VAL, 0.0, ensemble_size};
    for (int i = 0; i < ensemble_size; ++i) {
        Field u = random_band_limited(V.grid, seed + std::uint64_t(i));
        double distorted = distorted_sobolev_norm(V, a, s, r, u, spec);
        double standard = (s == 0.0) ? lp_norm(u, r) : sobolev_norm_standard(u, s, r, a);
        double ratio = distorted / standard;
        rep.ratio_min = std::min(rep.ratio_min, ratio);
        rep.ratio_max = std::max(rep.ratio_max, ratio);
    }
    return rep;
}

GaussianBoundFit gaussian_bound_fit(const Potential& V, double a,
                                    const std::vector<double>& t_ladder,
                                    double residual_threshold) {
    if (t_ladder.empty() || !std::is_sorted(t_ladder.begin(), t_ladder.end()) ||
        t_ladder.front() <= 0.0)
        throw std::invalid_argument("gaussian_bound_fit: ladder must be positive and sorted");
    const Grid& g = V.grid;
    const int c = g.n / 2;  // coord(n/2) = 0, the data/kernel center
    Field delta = make_field(g);
    delta.values[g.index(c, c, c)] = 1.0 / g.cell_volume();

    // Column samples (z = log K_op + (3/2) log t + t, x = d^2/t) for the model
    // z = log A1 - A2 x.
    std::vector<double> xs, zs;
    std::vector<Field> state{delta};
    double t_prev = 0.0;
    detail::HeatChainOptions chain;  // no deflation: ladder times are O(1)
    for (double t : t_ladder) {
        detail::heat_advance(V, t_prev, t, state, chain);
        t_prev = t;
        double colmax = lp_norm(state[0], HUGE_VAL);
        const double rmax = 0.25 * g.box_length;
        // Stay above the band-limited delta's ringing floor; the most negative
        // column value measures that floor directly.
        double ring = 0.0;
        for (const auto& v : state[0].values) ring = std::max(ring, -v.real());
        const double floor = std::max(1e-6 * colmax, 10.0 * ring);
        for (int i = 0; i < g.n; i += 1)
            for (int j = 0; j < g.n; ++j)
                for (int k = 0; k < g.n; ++k) {
                    double val = state[0].values[g.index(i, j, k)].real();
                    if (val < floor) continue;
                    double dx = g.coord(i), dy = g.coord(j), dz = g.coord(k);
                    double d2 = dx * dx + dy * dy + dz * dz;
                    if (d2 > rmax * rmax) continue;
                    double kop = val * std::exp(-t * (1.0 + a));
                    zs.push_back(std::log(kop) + 1.5 * std::log(t) + t);
                    xs.push_back(d2 / t);
                }
    }
    if (xs.size() < 8) throw NumericalError("gaussian_bound_fit: too few usable samples");

    double sx = 0, sz = 0, sxx = 0, sxz = 0;
    const double m = double(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i];
        sz += zs[i];
        sxx += xs[i] * xs[i];
        sxz += xs[i] * zs[i];
    }
    double slope = (m * sxz - sx * sz) / (m * sxx - sx * sx);
    double intercept = (sz - slope * sx) / m;
    GaussianBoundFit fit;
    fit.A2 = -slope;
    if (!(fit.A2 > 0.0)) throw NumericalError("gaussian_bound_fit: non-Gaussian decay profile");
    double resid2 = 0.0, amax = -HUGE_VAL;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        double pred = intercept - fit.A2 * xs[i];
        resid2 += (zs[i] - pred) * (zs[i] - pred);
        amax = std::max(amax, zs[i] + fit.A2 * xs[i]);
    }
    fit.fit_residual = std::sqrt(resid2 / m);
    fit.A1 = std::exp(amax);  // smallest amplitude making the bound hold on every sample
    if (fit.fit_residual > residual_threshold)
        throw NumericalError("gaussian_bound_fit: residual above threshold");
    return fit;
}

}  // namespace nlsv
