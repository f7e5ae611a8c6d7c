#include "doctest.h"
#include "nlsv/dispersive.hpp"
#include "oracles.hpp"

using namespace nlsv;

namespace {

PotentialSpec gaussian_well(double depth) {
    PotentialSpec s;
    s.kind = PotentialKind::gaussian_well;
    s.depth = depth;
    return s;
}

Field gaussian_field(const Grid& g, double w = 1.0) {
    Field f = make_field(g);
    for (int i = 0; i < g.n; ++i)
        for (int j = 0; j < g.n; ++j)
            for (int k = 0; k < g.n; ++k) {
                double r2 = g.coord(i) * g.coord(i) + g.coord(j) * g.coord(j) +
                            g.coord(k) * g.coord(k);
                f.values[g.index(i, j, k)] = std::exp(-r2 / (w * w));
            }
    return f;
}

double rel_l2_diff(const Field& a, const Field& b) {
    Field d = a;
    for (std::size_t i = 0; i < d.values.size(); ++i) d.values[i] -= b.values[i];
    return lp_norm(d, 2.0) / lp_norm(b, 2.0);
}

}  // namespace

TEST_SUITE("dispersive") {

TEST_CASE("free Gaussian evolution matches the closed form") {
    Grid g = make_grid(128, 40.0);
    Field f = gaussian_field(g);
    Field same = schrodinger_propagate(zero_potential(g), 0.0, f, 1e-3);
    for (std::size_t i = 0; i < f.values.size(); ++i) CHECK(same.values[i] == f.values[i]);

    double t = 1.0;
    Field out = schrodinger_propagate(zero_potential(g), t, f, 1e-3);
    Field exact = make_field(g);
    for (int i = 0; i < g.n; ++i)
        for (int j = 0; j < g.n; ++j)
            for (int k = 0; k < g.n; ++k) {
                double r2 = g.coord(i) * g.coord(i) + g.coord(j) * g.coord(j) +
                            g.coord(k) * g.coord(k);
                exact.values[g.index(i, j, k)] = oracles::schrodinger_gaussian(t, r2);
            }
    CHECK(rel_l2_diff(out, exact) < 1e-6);
    CHECK_THROWS_AS(schrodinger_propagate(zero_potential(g), 0.0015, f, 1e-3),
                    std::invalid_argument);
}

TEST_CASE("unitarity, group law, time reversal, bound-state phase") {
    Grid g = make_grid(32, 20.0);
    Potential V = sample_potential(gaussian_well(2.0), g);
    Field f = random_band_limited(g, 61);
    double dt = 1e-3;

    Field u1 = schrodinger_propagate(V, 0.2, f, dt);
    CHECK(lp_norm(u1, 2.0) == doctest::Approx(lp_norm(f, 2.0)).epsilon(1e-10));

    Field u2 = schrodinger_propagate(V, 0.1, schrodinger_propagate(V, 0.1, f, dt), dt);
    CHECK(rel_l2_diff(u2, u1) < 1e-8);

    Field back = schrodinger_propagate(V, -0.2, u1, dt);
    CHECK(rel_l2_diff(back, f) < 1e-8);

    Potential V10 = sample_potential(gaussian_well(10.0), g);
    SpectralData sd = analyze_spectrum(V10, {4, 0});
    REQUIRE(sd.count() >= 1);
    const auto& [lam, psi] = sd.eigenpairs.front();
    double t = 0.5;
    Field evolved = schrodinger_propagate(V10, t, psi, dt);
    Field phase = psi;
    cdouble rot = std::exp(cdouble(0.0, -lam * t));
    for (auto& v : phase.values) v *= rot;
    CHECK(rel_l2_diff(evolved, phase) < 1e-4);

    // P_c commutes with the flow within the eigenpair accuracy budget.
    Field a = continuous_projection(sd, schrodinger_propagate(V10, t, f, dt));
    Field b = schrodinger_propagate(V10, t, continuous_projection(sd, f), dt);
    Field d = a;
    for (std::size_t i = 0; i < d.values.size(); ++i) d.values[i] -= b.values[i];
    CHECK(lp_norm(d, 2.0) <= 1e-4);
}

TEST_CASE("wrap horizon guards decay fits") {
    Grid g = make_grid(64, 20.0);
    Field f = gaussian_field(g, 0.6);
    double l1 = lp_norm(f, 1.0);
    for (auto& v : f.values) v /= l1;
    double tw = wrap_horizon(f);
    CHECK(tw > 1.0);
    CHECK(std::isfinite(tw));

    SpectralData sd0;
    CHECK_THROWS_WITH_AS(
        dispersive_decay_fit(zero_potential(g), sd0, f, {0.5, 2.0 * tw}, 1e-2),
        doctest::Contains("T_wrap"), std::invalid_argument);
    Field un = gaussian_field(g, 0.6);
    CHECK_THROWS_AS(dispersive_decay_fit(zero_potential(g), sd0, un, {0.5}, 1e-2),
                    std::invalid_argument);
}

TEST_CASE("free decay exponent matches the closed-form slope") {
    Grid g = make_grid(64, 20.0);
    Field f = gaussian_field(g, 0.6);
    double l1 = lp_norm(f, 1.0);
    for (auto& v : f.values) v /= l1;
    // All times below the wrap horizon (~1.78 for this datum on L = 20).
    std::vector<double> times = {0.4, 0.6, 0.9, 1.3};
    SpectralData sd0;
    auto fit = dispersive_decay_fit(zero_potential(g), sd0, f, times, 1e-2);
    double oracle = oracles::free_decay_slope(0.6, times);
    CHECK(fit.exponent == doctest::Approx(oracle).epsilon(0.04));
    CHECK(fit.samples.size() == times.size());
}

TEST_CASE("unprojected bound state does not decay") {
    Grid g = make_grid(32, 20.0);
    Potential V = sample_potential(gaussian_well(10.0), g);
    SpectralData sd = analyze_spectrum(V, {4, 0});
    REQUIRE(sd.count() >= 1);
    Field psi = sd.eigenpairs.front().psi;
    double l1 = lp_norm(psi, 1.0);
    for (auto& v : psi.values) v /= l1;
    SpectralData no_projection;  // deliberately skip P_c
    auto fit = dispersive_decay_fit(V, no_projection, psi, {0.5, 1.0, 1.5, 2.0}, 1e-3);
    CHECK(std::abs(fit.exponent) < 0.05);
}

TEST_CASE("admissible pairs") {
    auto single = admissible_pairs(0.7, 1);
    REQUIRE(single.size() == 1);
    CHECK(std::isinf(single[0].q));
    CHECK(single[0].r == 2.0);

    auto pairs = admissible_pairs(1.0, 5);
    REQUIRE(pairs.size() == 5);
    CHECK(pairs[2].r == doctest::Approx(2.4));
    CHECK(pairs[2].q == doctest::Approx(8.0));
    for (const auto& p : pairs) {
        if (!std::isinf(p.q)) CHECK(2.0 / p.q + 3.0 / p.r == doctest::Approx(1.5).epsilon(1e-12));
        CHECK(p.r >= 2.0);
        CHECK(p.r < 3.0 / p.s);
        CHECK((std::isinf(p.q) || p.q >= 2.0));
    }
    // s = 0: cap r at 6, where q = 2 solves the scaling identity.
    CHECK(2.0 / 2.0 + 3.0 / 6.0 == doctest::Approx(1.5));
    CHECK_THROWS_AS(admissible_pairs(1.5, 3), std::invalid_argument);
}

TEST_CASE("strichartz norms: zero trace, conservation, homogeneity") {
    Grid g = make_grid(24, 12.0);
    Potential V0 = zero_potential(g);
    SpectralData sd0;
    double dt = 1e-2;

    EvolutionTrace tr;
    tr.sign = -1;
    Field u = gaussian_field(g, 1.2);
    for (int k = 0; k <= 8; ++k) {
        if (k > 0) u = schrodinger_propagate(V0, 0.05, u, dt);
        tr.times.push_back(0.05 * k);
        tr.fields.push_back(u);
    }
    auto pairs = admissible_pairs(0.0, 3);
    auto rep = strichartz_norm(tr, 0.0, pairs, false, V0, 0.0, sd0);

    // Pair (inf, 2) at s=0 is plain L^2 conservation under the free flow.
    CHECK(rep.per_pair_norm[0] ==
          doctest::Approx(lp_norm(tr.fields[0], 2.0)).epsilon(1e-8));
    CHECK(rep.sup_norm == *std::max_element(rep.per_pair_norm.begin(), rep.per_pair_norm.end()));

    EvolutionTrace scaled = tr;
    for (auto& f : scaled.fields)
        for (auto& v : f.values) v *= 2.5;
    auto rep2 = strichartz_norm(scaled, 0.0, pairs, false, V0, 0.0, sd0);
    for (std::size_t i = 0; i < rep.per_pair_norm.size(); ++i)
        CHECK(rep2.per_pair_norm[i] == doctest::Approx(2.5 * rep.per_pair_norm[i]).epsilon(1e-12));

    EvolutionTrace zero_tr;
    zero_tr.times = {0.0, 0.1};
    zero_tr.fields = {make_field(g), make_field(g)};
    auto rep0 = strichartz_norm(zero_tr, 0.0, pairs, false, V0, 0.0, sd0);
    for (double v : rep0.per_pair_norm) CHECK(v == 0.0);

    EvolutionTrace empty;
    CHECK_THROWS_AS(strichartz_norm(empty, 0.0, pairs, false, V0, 0.0, sd0),
                    std::invalid_argument);
}

TEST_CASE("distorted strichartz measurement stays bounded on an ensemble") {
    Grid g = make_grid(16, 12.0);
    Potential V = sample_potential(gaussian_well(2.0), g);
    SpectralData sd = analyze_spectrum(V, {4, 0});
    auto pairs = admissible_pairs(0.6, 2);
    double dt = 1e-2;
    double worst = 0.0;
    for (int trial = 0; trial < 3; ++trial) {
        Field f = continuous_projection(sd, random_band_limited(g, 90 + trial));
        EvolutionTrace tr;
        tr.sign = -1;
        Field u = f;
        for (int k = 0; k <= 6; ++k) {
            if (k > 0) u = schrodinger_propagate(V, 0.05, u, dt);
            tr.times.push_back(0.05 * k);
            tr.fields.push_back(u);
        }
        auto rep = strichartz_norm(tr, 0.6, pairs, true, V, sd.form_constant, sd);
        double data_norm = distorted_sobolev_norm(V, sd.form_constant, 0.6, 2.0, f, sd);
        worst = std::max(worst, rep.sup_norm / data_norm);
    }
    CHECK(worst > 0.0);
    CHECK(worst < 50.0);
}

}  // TEST_SUITE
