#include "nlsv/potential.hpp"

#include <algorithm>
#include <cmath>

namespace nlsv {

PotentialKind potential_kind_from_string(const std::string& s) {
    if (s == "gaussian_well") return PotentialKind::gaussian_well;
    if (s == "yukawa") return PotentialKind::yukawa;
    if (s == "bump") return PotentialKind::bump;
    if (s == "inverse_square_truncated") return PotentialKind::inverse_square_truncated;
    if (s == "sum") return PotentialKind::sum;
    throw std::invalid_argument("unknown potential kind: " + s);
}

std::string to_string(PotentialKind k) {
    switch (k) {
        case PotentialKind::gaussian_well: return "gaussian_well";
        case PotentialKind::yukawa: return "yukawa";
        case PotentialKind::bump: return "bump";
        case PotentialKind::inverse_square_truncated: return "inverse_square_truncated";
        case PotentialKind::sum: return "sum";
    }
    return "?";
}

namespace {

void validate_spec(const PotentialSpec& spec) {
    if (spec.kind == PotentialKind::sum) {
        if (spec.children.empty()) throw std::invalid_argument("sum potential needs >= 1 child");
        for (const auto& c : spec.children) validate_spec(c);
        return;
    }
    if (!(spec.width > 0.0)) throw std::invalid_argument("potential width must be positive");
    if (!(spec.decay > 0.0)) throw std::invalid_argument("potential decay must be positive");
}

double eval_one(const PotentialSpec& spec, double r, double h) {
    switch (spec.kind) {
        case PotentialKind::gaussian_well: {
            double u = r / spec.width;
            return -spec.depth * std::exp(-u * u);
        }
        case PotentialKind::yukawa:
            return spec.depth * std::exp(-spec.decay * r) / std::max(r, h);
        case PotentialKind::bump:
            return (r <= spec.width) ? spec.depth : 0.0;
        case PotentialKind::inverse_square_truncated: {
            if (r > spec.width) return 0.0;
            double rc = std::max(r, h);
            return spec.depth / (rc * rc);
        }
        case PotentialKind::sum:
            break;
    }
    return 0.0;
}

double eval_spec(const PotentialSpec& spec, const std::array<double, 3>& x, double h) {
    if (spec.kind == PotentialKind::sum) {
        double acc = 0.0;
        for (const auto& c : spec.children) acc += eval_spec(c, x, h);
        return acc;
    }
    double dx = x[0] - spec.center[0], dy = x[1] - spec.center[1], dz = x[2] - spec.center[2];
    return eval_one(spec, std::sqrt(dx * dx + dy * dy + dz * dz), h);
}

}  // namespace

Potential sample_potential(const PotentialSpec& spec, const Grid& g) {
    validate_spec(spec);
    Potential V{spec, g, std::vector<double>(g.size())};
    const double h = g.spacing();
#pragma omp parallel for schedule(static)
    for (int i = 0; i < g.n; ++i)
        for (int j = 0; j < g.n; ++j)
            for (int k = 0; k < g.n; ++k)
                V.values[g.index(i, j, k)] =
                    eval_spec(spec, {g.coord(i), g.coord(j), g.coord(k)}, h);
    // Boundary shell: the 6 faces of the box.
    double boundary_max = 0.0;
    for (int i = 0; i < g.n; ++i)
        for (int j = 0; j < g.n; ++j) {
            boundary_max = std::max({boundary_max, std::abs(V.values[g.index(0, i, j)]),
                                     std::abs(V.values[g.index(i, 0, j)]),
                                     std::abs(V.values[g.index(i, j, 0)])});
        }
    if (boundary_max > 1e-8)
        throw std::invalid_argument("sample_potential: |V| = " + std::to_string(boundary_max) +
                                    " on the box boundary exceeds 1e-8; enlarge L");
    return V;
}

Potential zero_potential(const Grid& g) {
    PotentialSpec s;
    s.kind = PotentialKind::bump;
    s.depth = 0.0;
    return Potential{s, g, std::vector<double>(g.size(), 0.0)};
}

bool is_zero(const Potential& V) {
    return std::all_of(V.values.begin(), V.values.end(), [](double v) { return v == 0.0; });
}

namespace detail {

std::vector<double> radial_kernel_convolution(const Grid& g, const std::vector<double>& absV,
                                              const std::vector<double>& kernel) {
    Field a = make_field(g), b = make_field(g);
    for (std::size_t i = 0; i < g.size(); ++i) a.values[i] = absV[i];
    for (std::size_t i = 0; i < g.size(); ++i) b.values[i] = kernel[i];
    fft_forward(a);
    fft_forward(b);
    const double scale = g.cell_volume() / double(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) a.values[i] *= b.values[i] * scale;
    fft_backward(a);
    std::vector<double> out(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) out[i] = a.values[i].real();
    return out;
}

// Equal-volume ball radius of one cell; the 1/|z| integral over that ball is 2*pi*r_h^2.
static double cell_ball_radius(const Grid& g) {
    return std::cbrt(3.0 * g.cell_volume() / (4.0 * M_PI));
}

std::vector<double> newton_kernel(const Grid& g) {
    std::vector<double> ker(g.size());
    const double rh = cell_ball_radius(g);
    const double diag = 2.0 * M_PI * rh * rh / g.cell_volume();
#pragma omp parallel for schedule(static)
    for (int i = 0; i < g.n; ++i)
        for (int j = 0; j < g.n; ++j)
            for (int k = 0; k < g.n; ++k) {
                double r = g.min_image_dist(i, j, k);
                ker[g.index(i, j, k)] = (r == 0.0) ? diag : 1.0 / r;
            }
    return ker;
}

std::vector<double> newton_kernel_truncated(const Grid& g, double radius) {
    std::vector<double> ker(g.size());
    const double rh = cell_ball_radius(g);
    const double diag = 2.0 * M_PI * rh * rh / g.cell_volume();
#pragma omp parallel for schedule(static)
    for (int i = 0; i < g.n; ++i)
        for (int j = 0; j < g.n; ++j)
            for (int k = 0; k < g.n; ++k) {
                double r = g.min_image_dist(i, j, k);
                double v = 0.0;
                if (r == 0.0) v = diag;
                else if (r <= radius) v = 1.0 / r;
                ker[g.index(i, j, k)] = v;
            }
    return ker;
}

std::vector<double> yukawa_resolvent_kernel(const Grid& g, double kappa) {
    std::vector<double> ker(g.size());
    const double rh = cell_ball_radius(g);
    // Cell rule: exact integral of e^{-kappa|z|}/(4pi|z|) over the equal-volume
    // ball, int_0^{rh} e^{-kappa rho} rho drho = (1 - e^{-k rh}(1 + k rh))/k^2;
    // reduces to the Newton rule rh^2/2 as kappa -> 0.
    const double cell_int =
        (kappa > 0.0)
            ? (1.0 - std::exp(-kappa * rh) * (1.0 + kappa * rh)) / (kappa * kappa)
            : 0.5 * rh * rh;
    const double diag = cell_int / g.cell_volume();
#pragma omp parallel for schedule(static)
    for (int i = 0; i < g.n; ++i)
        for (int j = 0; j < g.n; ++j)
            for (int k = 0; k < g.n; ++k) {
                double r = g.min_image_dist(i, j, k);
                ker[g.index(i, j, k)] =
                    (r == 0.0) ? diag : std::exp(-kappa * r) / (4.0 * M_PI * r);
            }
    return ker;
}

}  // namespace detail

namespace {

std::vector<double> abs_values(const Potential& V) {
    std::vector<double> a(V.values.size());
    for (std::size_t i = 0; i < a.size(); ++i) a[i] = std::abs(V.values[i]);
    return a;
}

}  // namespace

double kato_norm(const Potential& V) {
    if (is_zero(V)) return 0.0;
    auto conv = detail::radial_kernel_convolution(V.grid, abs_values(V),
                                                  detail::newton_kernel(V.grid));
    return *std::max_element(conv.begin(), conv.end());
}

std::vector<double> local_kato_modulus(const Potential& V, const std::vector<double>& radii) {
    const double h = V.grid.spacing();
    std::vector<double> out;
    out.reserve(radii.size());
    auto absV = abs_values(V);
    for (double r : radii) {
        if (!(r > h))
            throw std::invalid_argument("local_kato_modulus: radius must exceed grid spacing");
        if (is_zero(V)) {
            out.push_back(0.0);
            continue;
        }
        auto conv = detail::radial_kernel_convolution(V.grid, absV,
                                                      detail::newton_kernel_truncated(V.grid, r));
        out.push_back(*std::max_element(conv.begin(), conv.end()));
    }
    return out;
}

double weak_l32_quasinorm(const Potential& V) {
    double vmax = 0.0, vmin_pos = HUGE_VAL;
    for (double v : V.values) {
        double a = std::abs(v);
        vmax = std::max(vmax, a);
        if (a > 0.0) vmin_pos = std::min(vmin_pos, a);
    }
    if (vmax == 0.0) return 0.0;
    const int levels = 64;
    const double h3 = V.grid.cell_volume();
    double best = 0.0;
    for (int l = 0; l < levels; ++l) {
        double lam = vmin_pos * std::pow(vmax / vmin_pos, double(l) / (levels - 1));
        // strict super-level set; nudge the top level below vmax so it is nonempty
        if (l == levels - 1) lam = std::nextafter(vmax, 0.0);
        std::size_t count = 0;
        for (double v : V.values)
            if (std::abs(v) > lam) ++count;
        best = std::max(best, lam * std::pow(h3 * double(count), 2.0 / 3.0));
    }
    return best;
}

Potential negative_part(const Potential& V) {
    Potential W = V;
    for (auto& v : W.values) v = std::max(-v, 0.0);
    return W;
}

KatoReport kato_report(const Potential& V, const std::vector<double>& radii) {
    KatoReport rep;
    rep.global_norm = kato_norm(V);
    auto mods = local_kato_modulus(V, radii);
    for (std::size_t i = 0; i < radii.size(); ++i) rep.local_modulus.emplace_back(radii[i], mods[i]);
    rep.negative_part_norm = kato_norm(negative_part(V));
    rep.weak_l32 = weak_l32_quasinorm(V);
    return rep;
}

}  // namespace nlsv
