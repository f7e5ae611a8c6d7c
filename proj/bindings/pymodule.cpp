// Python bindings: numpy-backed views of Field plus the main toolkit
// operations.  Fields cross the boundary as (n, n, n) complex128 arrays.

#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "nlsv/nls.hpp"
#include "nlsv/runner.hpp"

namespace py = pybind11;
using namespace nlsv;

namespace {

py::array_t<cdouble> field_to_numpy(const Field& f) {
    const int n = f.grid.n;
    py::array_t<cdouble> out({n, n, n});
    std::copy(f.values.begin(), f.values.end(), out.mutable_data());
    return out;
}

Field field_from_numpy(const Grid& g, const py::array_t<cdouble, py::array::c_style>& arr) {
    if (arr.ndim() != 3 || arr.shape(0) != g.n || arr.shape(1) != g.n || arr.shape(2) != g.n)
        throw std::invalid_argument("expected a (n, n, n) complex array matching the grid");
    Field f = make_field(g);
    std::copy(arr.data(), arr.data() + g.size(), f.values.begin());
    return f;
}

PotentialSpec spec_from_dict(const py::dict& d) {
    json j;
    for (auto item : d) {
        std::string key = py::str(item.first);
        if (key == "kind")
            j[key] = py::cast<std::string>(item.second);
        else if (key == "center")
            j[key] = py::cast<std::array<double, 3>>(item.second);
        else if (key == "children") {
            j[key] = json::array();
            for (auto child : py::cast<py::list>(item.second)) {
                PotentialSpec cs = spec_from_dict(py::cast<py::dict>(child));
                json cj;
                to_json(cj, cs);
                j[key].push_back(cj);
            }
        } else {
            j[key] = py::cast<double>(item.second);
        }
    }
    PotentialSpec spec;
    from_json(j, spec);
    return spec;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Spectral toolkit for the 3d cubic NLS with a decaying potential";

    py::class_<Grid>(m, "Grid")
        .def_readonly("n", &Grid::n)
        .def_readonly("box_length", &Grid::box_length)
        .def_property_readonly("spacing", &Grid::spacing)
        .def("__repr__", [](const Grid& g) {
            return "Grid(n=" + std::to_string(g.n) + ", L=" + std::to_string(g.box_length) + ")";
        });
    m.def("make_grid", &make_grid, py::arg("n"), py::arg("box_length"));
    m.def("set_threads", &set_threads, py::arg("k"));

    py::class_<Potential>(m, "Potential")
        .def_property_readonly("grid", [](const Potential& v) { return v.grid; })
        .def_property_readonly("values", [](const Potential& v) {
            const int n = v.grid.n;
            py::array_t<double> out({n, n, n});
            std::copy(v.values.begin(), v.values.end(), out.mutable_data());
            return out;
        });
    m.def("sample_potential",
          [](const py::dict& spec, const Grid& g) { return sample_potential(spec_from_dict(spec), g); },
          py::arg("spec"), py::arg("grid"));
    m.def("zero_potential", &zero_potential, py::arg("grid"));

    m.def("kato_norm", &kato_norm);
    m.def("local_kato_modulus", &local_kato_modulus, py::arg("V"), py::arg("radii"));
    m.def("weak_l32_quasinorm", &weak_l32_quasinorm);
    m.def("negative_part", &negative_part);
    m.def("kato_report", [](const Potential& V, const std::vector<double>& radii) {
        KatoReport rep = kato_report(V, radii);
        py::dict d;
        d["global_norm"] = rep.global_norm;
        d["negative_part_norm"] = rep.negative_part_norm;
        d["weak_l32"] = rep.weak_l32;
        d["local_modulus"] = rep.local_modulus;
        return d;
    }, py::arg("V"), py::arg("radii"));

    m.def("lp_norm", [](const Grid& g, py::array_t<cdouble, py::array::c_style> arr, double p) {
        return lp_norm(field_from_numpy(g, arr), p);
    }, py::arg("grid"), py::arg("field"), py::arg("p"));
    m.def("sobolev_norm_standard",
          [](const Grid& g, py::array_t<cdouble, py::array::c_style> arr, double s, double r,
             double a) { return sobolev_norm_standard(field_from_numpy(g, arr), s, r, a); },
          py::arg("grid"), py::arg("field"), py::arg("s"), py::arg("r"), py::arg("a") = 0.0);
    m.def("random_band_limited",
          [](const Grid& g, std::uint64_t seed, double kcut_frac) {
              return field_to_numpy(random_band_limited(g, seed, kcut_frac));
          },
          py::arg("grid"), py::arg("seed"), py::arg("kcut_frac") = 0.33);

    py::class_<SpectralData>(m, "SpectralData")
        .def_property_readonly("a", [](const SpectralData& sd) { return sd.form_constant; })
        .def_property_readonly("bs_norm", [](const SpectralData& sd) { return sd.bs_norm; })
        .def_property_readonly("eig_tol", [](const SpectralData& sd) { return sd.eig_tol; })
        .def_property_readonly("count", &SpectralData::count)
        .def_property_readonly("eigenvalues", [](const SpectralData& sd) {
            std::vector<double> out;
            for (const auto& p : sd.eigenpairs) out.push_back(p.lambda);
            return out;
        })
        .def("eigenvector", [](const SpectralData& sd, int j) {
            return field_to_numpy(sd.eigenpairs.at(j).psi);
        });
    m.def("analyze_spectrum",
          [](const Potential& V, int k_max, int resonance_n) {
              return analyze_spectrum(V, SpectralOptions{k_max, resonance_n});
          },
          py::arg("V"), py::arg("k_max") = 8, py::arg("resonance_n") = 0);
    m.def("apply_hamiltonian",
          [](const Potential& V, py::array_t<cdouble, py::array::c_style> arr) {
              return field_to_numpy(apply_hamiltonian(V, field_from_numpy(V.grid, arr)));
          });
    m.def("quadratic_form", [](const Potential& V, py::array_t<cdouble, py::array::c_style> arr) {
        return quadratic_form(V, field_from_numpy(V.grid, arr));
    });
    m.def("find_form_constant", &find_form_constant, py::arg("V"), py::arg("a_max") = 1e6);
    m.def("birman_schwinger_norm", &birman_schwinger_norm, py::arg("V"), py::arg("a"));
    m.def("bound_states", [](const Potential& V, int k_max) {
        py::list out;
        for (const auto& p : bound_states(V, k_max))
            out.append(py::make_tuple(p.lambda, field_to_numpy(p.psi)));
        return out;
    }, py::arg("V"), py::arg("k_max") = 8);
    m.def("resonance_indicator", [](const Potential& V, int coarse_n) {
        auto ind = resonance_indicator(V, coarse_n);
        py::dict d;
        d["sigma_min"] = ind.sigma_min;
        d["sigma_l1"] = ind.sigma_l1;
        d["lattice_n"] = ind.lattice_n;
        return d;
    }, py::arg("V"), py::arg("coarse_n") = 24);
    m.def("continuous_projection",
          [](const SpectralData& sd, const Grid& g, py::array_t<cdouble, py::array::c_style> arr) {
              return field_to_numpy(continuous_projection(sd, field_from_numpy(g, arr)));
          });

    m.def("heat_apply", [](const Potential& V, double t, py::array_t<cdouble, py::array::c_style> arr) {
        return field_to_numpy(heat_apply(V, t, field_from_numpy(V.grid, arr)));
    });
    m.def("fractional_power_apply",
          [](const Potential& V, double a, double s, py::array_t<cdouble, py::array::c_style> arr,
             const SpectralData& sd) {
              return field_to_numpy(fractional_power_apply(V, a, s, field_from_numpy(V.grid, arr), sd));
          });
    m.def("distorted_sobolev_norm",
          [](const Potential& V, double a, double s, double r,
             py::array_t<cdouble, py::array::c_style> arr, const SpectralData& sd,
             bool homogeneous) {
              return distorted_sobolev_norm(V, a, s, r, field_from_numpy(V.grid, arr), sd,
                                            homogeneous);
          },
          py::arg("V"), py::arg("a"), py::arg("s"), py::arg("r"), py::arg("field"),
          py::arg("spec"), py::arg("homogeneous") = false);
    m.def("norm_equivalence_scan",
          [](const Potential& V, double a, double s, double r, int ensemble,
             const SpectralData& sd, std::uint64_t seed) {
              auto rep = norm_equivalence_scan(V, a, s, r, ensemble, sd, seed);
              py::dict d;
              d["s"] = rep.s;
              d["r"] = rep.r;
              d["ratio_min"] = rep.ratio_min;
              d["ratio_max"] = rep.ratio_max;
              d["ensemble"] = rep.ensemble_size;
              return d;
          });
    m.def("gaussian_bound_fit",
          [](const Potential& V, double a, const std::vector<double>& ladder) {
              auto fit = gaussian_bound_fit(V, a, ladder);
              py::dict d;
              d["A1"] = fit.A1;
              d["A2"] = fit.A2;
              d["residual"] = fit.fit_residual;
              return d;
          });

    m.def("schrodinger_propagate",
          [](const Potential& V, double t, py::array_t<cdouble, py::array::c_style> arr, double dt) {
              return field_to_numpy(schrodinger_propagate(V, t, field_from_numpy(V.grid, arr), dt));
          },
          py::arg("V"), py::arg("t"), py::arg("field"), py::arg("dt") = 1e-3);
    m.def("wrap_horizon", [](const Grid& g, py::array_t<cdouble, py::array::c_style> arr) {
        return wrap_horizon(field_from_numpy(g, arr));
    });
    m.def("admissible_pairs", [](double s, int count) {
        py::list out;
        for (const auto& p : admissible_pairs(s, count)) out.append(py::make_tuple(p.q, p.r));
        return out;
    }, py::arg("s"), py::arg("count"));
    m.def("dispersive_decay_fit",
          [](const Potential& V, const SpectralData& sd, py::array_t<cdouble, py::array::c_style> arr,
             const std::vector<double>& times, double dt) {
              auto fit = dispersive_decay_fit(V, sd, field_from_numpy(V.grid, arr), times, dt);
              py::dict d;
              d["exponent"] = fit.exponent;
              d["amplitude"] = fit.amplitude;
              d["t_wrap"] = fit.t_wrap;
              d["samples"] = fit.samples;
              return d;
          });

    py::class_<EvolutionTrace>(m, "EvolutionTrace")
        .def_readonly("sign", &EvolutionTrace::sign)
        .def_readonly("times", &EvolutionTrace::times)
        .def_readonly("mass", &EvolutionTrace::mass)
        .def_readonly("energy", &EvolutionTrace::energy)
        .def_readonly("sobolev_h1", &EvolutionTrace::sobolev_h1)
        .def("field", [](const EvolutionTrace& tr, int k) {
            return field_to_numpy(tr.fields.at(k));
        });
    m.def("nonlinearity", [](const Grid& g, py::array_t<cdouble, py::array::c_style> arr, int sign) {
        return field_to_numpy(nonlinearity(field_from_numpy(g, arr), sign));
    });
    m.def("mass", [](const Grid& g, py::array_t<cdouble, py::array::c_style> arr) {
        return mass(field_from_numpy(g, arr));
    });
    m.def("energy", [](const Potential& V, py::array_t<cdouble, py::array::c_style> arr, int sign) {
        return energy(V, field_from_numpy(V.grid, arr), sign);
    });
    m.def("evolve",
          [](const Potential& V, py::array_t<cdouble, py::array::c_style> arr, double T, double dt,
             int sign, int n_store) {
              return evolve(V, field_from_numpy(V.grid, arr), T, dt, sign, n_store);
          },
          py::arg("V"), py::arg("u0"), py::arg("T"), py::arg("dt"), py::arg("sign") = -1,
          py::arg("n_store") = 17);
    m.def("conservation_report", [](const EvolutionTrace& tr) {
        auto [dm, de] = conservation_report(tr);
        return py::make_tuple(dm, de);
    });
    m.def("h1_bound_check", &h1_bound_check, py::arg("trace"), py::arg("V"), py::arg("a"),
          py::arg("M0"), py::arg("E0"));
    m.def("picard_solve",
          [](const Potential& V, const SpectralData& sd, py::array_t<cdouble, py::array::c_style> arr,
             double T, int n_t, double tol, int max_iter, int sign) {
              PicardConfig cfg;
              cfg.T = T;
              cfg.n_t = n_t;
              cfg.tol = tol;
              cfg.max_iter = max_iter;
              auto res = picard_solve(V, sd, field_from_numpy(V.grid, arr), cfg, sign);
              py::dict d;
              d["contracted"] = res.contracted;
              d["iterations"] = res.iterations;
              d["ratios"] = res.ratios;
              d["distances"] = res.distances;
              d["c_measured"] = res.c_measured;
              d["ball_radius"] = res.ball_radius;
              d["h2_of_limit"] = res.h2_of_limit;
              d["trace"] = py::cast(res.trace);
              return d;
          },
          py::arg("V"), py::arg("spec"), py::arg("u0"), py::arg("T") = 0.1, py::arg("n_t") = 16,
          py::arg("tol") = 1e-8, py::arg("max_iter") = 25, py::arg("sign") = -1);

    py::register_exception<NumericalError>(m, "NumericalError", PyExc_RuntimeError);
}
