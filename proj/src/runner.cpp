#include "nlsv/runner.hpp"

#include <fstream>

#include "nlsv/nls.hpp"

namespace nlsv {

namespace {

json default_params(const std::string& task) {
    if (task == "kato") return {{"radii", {0.5, 1.0, 2.0}}};
    if (task == "spectrum") return {{"k_max", 8}};
    if (task == "resonance") return {{"lattice_n", 24}};
    if (task == "heat-fit")
        return {{"t_ladder", {0.1, 0.2, 0.4, 0.8}}, {"residual_threshold", 1.0}};
    if (task == "norm-equiv") return {{"s", 1.0}, {"r", 2.0}, {"ensemble", 50}};
    if (task == "decay") return {{"times", json::array()}, {"dt", 1e-3}};
    if (task == "strichartz")
        return {{"s", 0.0}, {"pairs", 3}, {"T", 1.0}, {"dt", 1e-3}, {"n_t", 9},
                {"distorted", false}};
    if (task == "picard")
        return {{"T", 0.1}, {"n_t", 16}, {"tol", 1e-8}, {"max_iter", 25}, {"s", 1.0},
                {"sign", -1}, {"dt_lin", 1e-3}};
    if (task == "evolve")
        return {{"T", 1.0}, {"dt", 1e-3}, {"sign", -1}, {"n_store", 17}};
    throw ConfigError("unknown task: " + task);
}

Grid grid_from(const json& cfg) {
    if (!cfg.contains("grid")) throw ConfigError("config: missing grid {n, L}");
    try {
        return make_grid(cfg.at("grid").at("n").get<int>(), cfg.at("grid").at("L").get<double>());
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("config.grid: ") + e.what());
    }
}

Potential potential_from(const json& cfg, const Grid& g) {
    if (!cfg.contains("potential")) throw ConfigError("config: missing potential");
    PotentialSpec spec;
    try {
        from_json(cfg.at("potential"), spec);
        return sample_potential(spec, g);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("config.potential: ") + e.what());
    }
}

/// initial: {kind: gaussian|plane_wave|random_band, ...}.
Field initial_from(const json& cfg, const Grid& g) {
    if (!cfg.contains("initial")) throw ConfigError("config: missing initial data");
    const json& ic = cfg.at("initial");
    std::string kind = ic.value("kind", "gaussian");
    Field f = make_field(g);
    if (kind == "gaussian") {
        double amp = ic.value("amplitude", 1.0);
        double width = ic.value("width", 1.0);
        std::array<double, 3> c = ic.value("center", std::array<double, 3>{0, 0, 0});
        for (int i = 0; i < g.n; ++i)
            for (int j = 0; j < g.n; ++j)
                for (int k = 0; k < g.n; ++k) {
                    double dx = g.coord(i) - c[0], dy = g.coord(j) - c[1], dz = g.coord(k) - c[2];
                    f.values[g.index(i, j, k)] =
                        amp * std::exp(-(dx * dx + dy * dy + dz * dz) / (width * width));
                }
    } else if (kind == "plane_wave") {
        double amp = ic.value("amplitude", 1.0);
        auto kidx = ic.value("k", std::array<int, 3>{1, 0, 0});
        double kx = 2.0 * M_PI * kidx[0] / g.box_length,
               ky = 2.0 * M_PI * kidx[1] / g.box_length,
               kz = 2.0 * M_PI * kidx[2] / g.box_length;
        for (int i = 0; i < g.n; ++i)
            for (int j = 0; j < g.n; ++j)
                for (int k = 0; k < g.n; ++k)
                    f.values[g.index(i, j, k)] = amp * std::exp(cdouble(
                        0.0, kx * g.coord(i) + ky * g.coord(j) + kz * g.coord(k)));
    } else if (kind == "random_band") {
        if (!ic.contains("seed")) throw ConfigError("initial.random_band: seed is mandatory");
        f = random_band_limited(g, ic.at("seed").get<std::uint64_t>(),
                                ic.value("kcut_frac", 0.33));
        double amp = ic.value("amplitude", 1.0);
        for (auto& v : f.values) v *= amp;
    } else {
        throw ConfigError("initial.kind must be gaussian | plane_wave | random_band");
    }
    return f;
}

json spectral_json(const SpectralData& sd) {
    json j;
    j["a"] = sd.form_constant;
    j["eig_tol"] = sd.eig_tol;
    j["count"] = sd.count();
    j["lambda"] = json::array();
    for (const auto& p : sd.eigenpairs) j["lambda"].push_back(p.lambda);
    j["bs_norm"] = sd.bs_norm;
    if (sd.resonance) {
        j["resonance_sigma"] = sd.resonance->sigma_min;
        j["resonance_sigma_l1"] = sd.resonance->sigma_l1;
        j["resonance_lattice_n"] = sd.resonance->lattice_n;
    }
    return j;
}

void write_json_artifact(const RunConfig& cfg, const std::string& name, json j) {
    j["config"] = cfg.raw;
    write_text_file(cfg.out_dir / name, j.dump(2) + "\n");
}

void write_csv_artifact(const RunConfig& cfg, const std::string& name,
                        const std::string& header, const std::vector<std::vector<double>>& rows) {
    std::string csv = "# config: " + cfg.raw.dump() + "\n" + header + "\n";
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i)
            csv += (i ? "," : "") + format_double(row[i]);
        csv += "\n";
    }
    write_text_file(cfg.out_dir / name, csv);
}

SpectralData spectrum_for(const json& raw, const Potential& V) {
    SpectralOptions opt;
    opt.k_max = raw.value("k_max", 8);
    return analyze_spectrum(V, opt);
}

void task_kato(const RunConfig& cfg) {
    Grid g = grid_from(cfg.raw);
    Potential V = potential_from(cfg.raw, g);
    auto radii = cfg.raw.value("radii", std::vector<double>{0.5, 1.0, 2.0});
    KatoReport rep = kato_report(V, radii);
    json j;
    j["global_norm"] = rep.global_norm;
    j["negative_part_norm"] = rep.negative_part_norm;
    j["weak_l32"] = rep.weak_l32;
    j["negative_part_small"] = rep.negative_part_norm < 4.0 * M_PI;
    j["local_modulus"] = json::array();
    for (auto& [r, v] : rep.local_modulus) j["local_modulus"].push_back({{"r", r}, {"value", v}});
    write_json_artifact(cfg, "kato.json", j);
}

void task_spectrum(const RunConfig& cfg) {
    Grid g = grid_from(cfg.raw);
    Potential V = potential_from(cfg.raw, g);
    SpectralData sd = spectrum_for(cfg.raw, V);
    write_json_artifact(cfg, "spectrum.json", spectral_json(sd));
    for (std::size_t j = 0; j < sd.eigenpairs.size(); ++j) {
        char name[32];
        std::snprintf(name, sizeof(name), "psi_%02zu.field", j);
        write_field_file(cfg.out_dir / name, sd.eigenpairs[j].psi, 0.0);
    }
}

void task_resonance(const RunConfig& cfg) {
    Grid g = grid_from(cfg.raw);
    Potential V = potential_from(cfg.raw, g);
    auto ind = resonance_indicator(V, cfg.raw.value("lattice_n", 24));
    json j;
    j["sigma_min"] = ind.sigma_min;
    j["sigma_l1"] = ind.sigma_l1;
    j["lattice_n"] = ind.lattice_n;
    write_json_artifact(cfg, "resonance.json", j);
}

void task_heat_fit(const RunConfig& cfg) {
    Grid g = grid_from(cfg.raw);
    Potential V = potential_from(cfg.raw, g);
    double a = find_form_constant(V);
    auto ladder = cfg.raw.value("t_ladder", std::vector<double>{0.1, 0.2, 0.4, 0.8});
    auto fit = gaussian_bound_fit(V, a, ladder, cfg.raw.value("residual_threshold", 1.0));
    json j;
    j["A1"] = fit.A1;
    j["A2"] = fit.A2;
    j["residual"] = fit.fit_residual;
    j["a"] = a;
    write_json_artifact(cfg, "heatfit.json", j);
}

void task_norm_equiv(const RunConfig& cfg) {
    Grid g = grid_from(cfg.raw);
    Potential V = potential_from(cfg.raw, g);
    if (!cfg.raw.contains("seed")) throw ConfigError("norm-equiv: seed is mandatory");
    SpectralData sd = spectrum_for(cfg.raw, V);
    auto rep = norm_equivalence_scan(V, sd.form_constant, cfg.raw.value("s", 1.0),
                                     cfg.raw.value("r", 2.0), cfg.raw.value("ensemble", 50), sd,
                                     cfg.raw.at("seed").get<std::uint64_t>());
    json j;
    j["s"] = rep.s;
    j["r"] = rep.r;
    j["ratio_min"] = rep.ratio_min;
    j["ratio_max"] = rep.ratio_max;
    j["ensemble"] = rep.ensemble_size;
    j["a"] = sd.form_constant;
    write_json_artifact(cfg, "normequiv.json", j);
}

void task_decay(const RunConfig& cfg) {
    Grid g = grid_from(cfg.raw);
    Potential V = potential_from(cfg.raw, g);
    Field f = initial_from(cfg.raw, g);
    double l1 = lp_norm(f, 1.0);
    if (l1 <= 0.0) throw ConfigError("decay: zero initial data");
    for (auto& v : f.values) v /= l1;  // the fit expects ||f||_1 = 1
    if (!cfg.raw.contains("times") || cfg.raw.at("times").empty())
        throw ConfigError("decay: missing times");
    SpectralData sd = spectrum_for(cfg.raw, V);
    auto fit = dispersive_decay_fit(V, sd, f, cfg.raw.at("times").get<std::vector<double>>(),
                                    cfg.raw.value("dt", 1e-3));
    std::vector<std::vector<double>> rows;
    for (auto& [t, s] : fit.samples) rows.push_back({t, s});
    write_csv_artifact(cfg, "decay.csv", "t,sup_norm", rows);
    json j;
    j["exponent"] = fit.exponent;
    j["amplitude"] = fit.amplitude;
    j["t_wrap"] = fit.t_wrap;
    write_json_artifact(cfg, "decay.json", j);
}

void task_strichartz(const RunConfig& cfg) {
    Grid g = grid_from(cfg.raw);
    Potential V = potential_from(cfg.raw, g);
    Field f = initial_from(cfg.raw, g);
    SpectralData sd = spectrum_for(cfg.raw, V);
    double s = cfg.raw.value("s", 0.0);
    double T = cfg.raw.value("T", 1.0);
    double dt = cfg.raw.value("dt", 1e-3);
    int n_t = cfg.raw.value("n_t", 9);
    // Linear flow of the projected datum: the left side of the Strichartz bound.
    EvolutionTrace tr;
    tr.sign = -1;
    Field u = continuous_projection(sd, f);
    double slice = T / (n_t - 1);
    for (int k = 0; k < n_t; ++k) {
        if (k > 0) u = schrodinger_propagate(V, slice, u, dt);
        tr.times.push_back(k * slice);
        tr.fields.push_back(u);
        tr.mass.push_back(mass(u));
        tr.energy.push_back(energy(V, u, -1));
        tr.sobolev_h1.push_back(std::sqrt(mass(u) + grad_norm_sq(u)));
    }
    auto pairs = admissible_pairs(s, cfg.raw.value("pairs", 3));
    auto rep = strichartz_norm(tr, s, pairs, cfg.raw.value("distorted", false), V,
                               sd.form_constant, sd);
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < pairs.size(); ++i)
        rows.push_back({s, pairs[i].q, pairs[i].r, rep.per_pair_norm[i]});
    write_csv_artifact(cfg, "strichartz.csv", "s,q,r,norm", rows);
    json j;
    j["sup_norm"] = rep.sup_norm;
    write_json_artifact(cfg, "strichartz.json", j);
}

void task_picard(const RunConfig& cfg) {
    Grid g = grid_from(cfg.raw);
    Potential V = potential_from(cfg.raw, g);
    Field u0 = initial_from(cfg.raw, g);
    SpectralData sd = spectrum_for(cfg.raw, V);
    PicardConfig pc;
    pc.T = cfg.raw.value("T", 0.1);
    pc.n_t = cfg.raw.value("n_t", 16);
    pc.tol = cfg.raw.value("tol", 1e-8);
    pc.max_iter = cfg.raw.value("max_iter", 25);
    pc.s = cfg.raw.value("s", 1.0);
    pc.dt_lin = cfg.raw.value("dt_lin", 1e-3);
    int sign = cfg.raw.value("sign", -1);
    auto res = picard_solve(V, sd, u0, pc, sign);
    std::vector<std::vector<double>> rows;
    for (std::size_t k = 0; k < res.distances.size(); ++k)
        rows.push_back({double(k + 1), res.distances[k],
                        k > 0 ? res.ratios[k - 1] : std::nan("")});
    write_csv_artifact(cfg, "picard_ratios.csv", "iter,distance,ratio", rows);
    json j;
    j["contracted"] = res.contracted;
    j["iterations"] = res.iterations;
    j["c_measured"] = res.c_measured;
    j["ball_radius"] = res.ball_radius;
    j["h2_of_limit"] = res.h2_of_limit;
    write_json_artifact(cfg, "picard.json", j);
    write_trace(cfg.out_dir, "picard", res.trace, cfg.raw);
}

void task_evolve(const RunConfig& cfg) {
    Grid g = grid_from(cfg.raw);
    Potential V = potential_from(cfg.raw, g);
    Field u0 = initial_from(cfg.raw, g);
    auto tr = evolve(V, u0, cfg.raw.value("T", 1.0), cfg.raw.value("dt", 1e-3),
                     cfg.raw.value("sign", -1), cfg.raw.value("n_store", 17));
    auto [dm, de] = conservation_report(tr);
    json j;
    j["mass_drift"] = dm;
    j["energy_drift"] = de;
    write_json_artifact(cfg, "evolve.json", j);
    write_trace(cfg.out_dir, "evolve", tr, cfg.raw);
}

}  // namespace

RunConfig load_config(const std::filesystem::path& config_path, const std::string& task,
                      const std::filesystem::path& out_dir, int threads, bool refine) {
    std::ifstream is(config_path);
    if (!is) throw ConfigError("cannot open config file " + config_path.string());
    RunConfig cfg;
    try {
        cfg.raw = json::parse(is);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    cfg.task = task;
    if (cfg.raw.contains("task") && cfg.raw.at("task").get<std::string>() != task)
        throw ConfigError("config.task disagrees with the CLI subcommand");
    cfg.out_dir = out_dir;
    cfg.threads = threads;
    cfg.refine = refine;

    // Fill documented defaults so the echoed config is fully resolved.
    json defaults = default_params(task);
    for (auto& [key, value] : defaults.items())
        if (!cfg.raw.contains(key)) cfg.raw[key] = value;
    cfg.raw["task"] = task;
    cfg.raw["threads"] = threads;

    if (refine) {
        cfg.raw["grid"]["n"] = cfg.raw.at("grid").at("n").get<int>() * 2;
        for (const char* key : {"dt", "dt_lin"})
            if (cfg.raw.contains(key)) cfg.raw[key] = cfg.raw.at(key).get<double>() / 2.0;
        cfg.raw["quad_nodes"] = cfg.raw.value("quad_nodes", 256) * 2;
        cfg.raw["refined"] = true;
    }
    return cfg;
}

void run_task(const RunConfig& cfg) {
    set_threads(cfg.threads);
    std::filesystem::create_directories(cfg.out_dir);
    if (cfg.task == "kato") return task_kato(cfg);
    if (cfg.task == "spectrum") return task_spectrum(cfg);
    if (cfg.task == "resonance") return task_resonance(cfg);
    if (cfg.task == "heat-fit") return task_heat_fit(cfg);
    if (cfg.task == "norm-equiv") return task_norm_equiv(cfg);
    if (cfg.task == "decay") return task_decay(cfg);
    if (cfg.task == "strichartz") return task_strichartz(cfg);
    if (cfg.task == "picard") return task_picard(cfg);
    if (cfg.task == "evolve") return task_evolve(cfg);
    throw ConfigError("unknown task: " + cfg.task);
}

int run_cli(const std::filesystem::path& config_path, const std::string& task,
            const std::filesystem::path& out_dir, int threads, bool refine) {
    auto write_error = [&](const std::string& type, const std::string& what) {
        std::filesystem::create_directories(out_dir);
        json j{{"error", {{"type", type}, {"what", what}, {"task", task}}}};
        write_text_file(out_dir / "error.json", j.dump(2) + "\n");
    };
    try {
        RunConfig cfg = load_config(config_path, task, out_dir, threads, refine);
        run_task(cfg);
        return 0;
    } catch (const NumericalError& e) {
        write_error("numerical", e.what());
        return 3;
    } catch (const std::invalid_argument& e) {  // ConfigError and module preconditions
        write_error("config", e.what());
        return 2;
    } catch (const std::exception& e) {
        write_error("internal", e.what());
        return 3;
    }
}

}  // namespace nlsv
