#pragma once

#include <array>
#include <string>
#include <vector>

#include "nlsv/grid.hpp"

namespace nlsv {

enum class PotentialKind { gaussian_well, yukawa, bump, inverse_square_truncated, sum };

PotentialKind potential_kind_from_string(const std::string& s);
std::string to_string(PotentialKind k);

/// Analytic potential family descriptor.
///   gaussian_well:            V(x) = -depth * exp(-|x-c|^2 / width^2)
///   yukawa:                   V(x) =  depth * exp(-decay*|x-c|) / max(|x-c|, h)
///   bump (ball indicator):    V(x) =  depth * 1_{|x-c| <= width}
///   inverse_square_truncated: V(x) =  depth / max(|x-c|, h)^2 for |x-c| <= width, else 0
///   sum:                      pointwise sum of children
/// The singular families clamp at the grid spacing h when sampled.
struct PotentialSpec {
    PotentialKind kind = PotentialKind::gaussian_well;
    double depth = 1.0;
    double width = 1.0;
    double decay = 1.0;
    std::array<double, 3> center{0.0, 0.0, 0.0};
    std::vector<PotentialSpec> children;
};

struct Potential {
    PotentialSpec spec;
    Grid grid;
    std::vector<double> values;
};

/// Pointwise evaluation on the grid; rejects spec/grid pairs whose boundary
/// shell magnitude exceeds 1e-8 (the box no longer stands in for R^3).
Potential sample_potential(const PotentialSpec& spec, const Grid& g);

/// Zero potential on g (always admissible).
Potential zero_potential(const Grid& g);

bool is_zero(const Potential& V);

/// Global Kato norm sup_x  h^3 sum_y |V(y)| / |x-y|  with the singular-cell rule:
/// the y=x cell contributes |V(x)| * 2*pi*r_h^2, r_h = (3 h^3 / 4pi)^{1/3}.
double kato_norm(const Potential& V);

/// Kato-class modulus at finite radii: sup_x of the Newton-kernel integral
/// restricted to |x-y| <= r.  Requires every r > h.
std::vector<double> local_kato_modulus(const Potential& V, const std::vector<double>& radii);

/// sup over a 64-level logarithmic lambda ladder of lambda * |{|V|>lambda}|^{2/3}.
double weak_l32_quasinorm(const Potential& V);

/// max(-V, 0) pointwise (stored nonnegative); feeds the ||V_-||_K < 4pi check.
Potential negative_part(const Potential& V);

struct KatoReport {
    double global_norm = 0.0;
    std::vector<std::pair<double, double>> local_modulus;  // (radius, value)
    double negative_part_norm = 0.0;
    double weak_l32 = 0.0;
};

KatoReport kato_report(const Potential& V, const std::vector<double>& radii);

namespace detail {
/// h^3-weighted circular convolution of |V| with a radial kernel given by
/// rule(r_min_image); rule(0) must already encode the singular-cell weight
/// divided by h^3.  Returns the full convolution field (real part).
std::vector<double> radial_kernel_convolution(const Grid& g, const std::vector<double>& absV,
                                              const std::vector<double>& kernel);
std::vector<double> newton_kernel(const Grid& g);                       // 1/r, cell rule
std::vector<double> newton_kernel_truncated(const Grid& g, double r);   // 1/r on r<=radius
std::vector<double> yukawa_resolvent_kernel(const Grid& g, double kappa);  // e^{-kappa r}/(4 pi r)
}  // namespace detail

}  // namespace nlsv
