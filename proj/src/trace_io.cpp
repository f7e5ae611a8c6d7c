#include "nlsv/trace_io.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>

namespace nlsv {

void to_json(json& j, const PotentialSpec& spec) {
    j = json{{"kind", to_string(spec.kind)},
             {"depth", spec.depth},
             {"width", spec.width},
             {"decay", spec.decay},
             {"center", spec.center}};
    if (spec.kind == PotentialKind::sum) {
        j["children"] = json::array();
        for (const auto& c : spec.children) {
            json cj;
            to_json(cj, c);
            j["children"].push_back(cj);
        }
    }
}

void from_json(const json& j, PotentialSpec& spec) {
    spec.kind = potential_kind_from_string(j.at("kind").get<std::string>());
    spec.depth = j.value("depth", 1.0);
    spec.width = j.value("width", 1.0);
    spec.decay = j.value("decay", 1.0);
    if (j.contains("center")) spec.center = j.at("center").get<std::array<double, 3>>();
    spec.children.clear();
    if (j.contains("children"))
        for (const auto& cj : j.at("children")) {
            PotentialSpec c;
            from_json(cj, c);
            spec.children.push_back(std::move(c));
        }
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace {

void put_f64(std::ofstream& os, double v) {
    static_assert(sizeof(double) == 8);
    os.write(reinterpret_cast<const char*>(&v), 8);  // little-endian on this target
}

double get_f64(std::ifstream& is) {
    double v;
    is.read(reinterpret_cast<char*>(&v), 8);
    return v;
}

}  // namespace

void write_field_file(const std::filesystem::path& path, const Field& f, double time) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
    put_f64(os, double(f.grid.n));
    put_f64(os, f.grid.box_length);
    put_f64(os, time);
    for (const auto& v : f.values) {
        put_f64(os, v.real());
        put_f64(os, v.imag());
    }
}

std::pair<Field, double> read_field_file(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open " + path.string());
    int n = int(get_f64(is));
    double L = get_f64(is);
    double time = get_f64(is);
    Field f = make_field(make_grid(n, L));
    for (auto& v : f.values) {
        double re = get_f64(is);
        double im = get_f64(is);
        v = cdouble(re, im);
    }
    if (!is) throw std::runtime_error("truncated field file " + path.string());
    return {std::move(f), time};
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
    os << content;
}

void write_trace(const std::filesystem::path& dir, const std::string& stem,
                 const EvolutionTrace& trace, const json& config_echo) {
    std::filesystem::create_directories(dir);
    json manifest;
    manifest["config"] = config_echo;
    manifest["sign"] = trace.sign;
    manifest["times"] = trace.times;
    if (!trace.fields.empty()) {
        manifest["grid"] = {{"n", trace.fields.front().grid.n},
                            {"L", trace.fields.front().grid.box_length}};
    }
    json slices = json::array();
    for (std::size_t k = 0; k < trace.fields.size(); ++k) {
        char name[64];
        std::snprintf(name, sizeof(name), "%s_slice_%03zu.field", stem.c_str(), k);
        write_field_file(dir / name, trace.fields[k], trace.times[k]);
        slices.push_back(name);
    }
    manifest["slices"] = slices;
    write_text_file(dir / (stem + "_manifest.json"), manifest.dump(2) + "\n");

    std::string csv = "# config: " + config_echo.dump() + "\n";
    csv += "t,mass,energy,h1\n";
    for (std::size_t k = 0; k < trace.times.size(); ++k)
        csv += format_double(trace.times[k]) + "," + format_double(trace.mass[k]) + "," +
               format_double(trace.energy[k]) + "," + format_double(trace.sobolev_h1[k]) + "\n";
    write_text_file(dir / (stem + "_summary.csv"), csv);
}

EvolutionTrace read_trace(const std::filesystem::path& manifest_path) {
    std::ifstream is(manifest_path);
    if (!is) throw std::runtime_error("cannot open " + manifest_path.string());
    json manifest = json::parse(is);
    EvolutionTrace tr;
    tr.sign = manifest.at("sign").get<int>();
    tr.times = manifest.at("times").get<std::vector<double>>();
    auto dir = manifest_path.parent_path();
    for (const auto& name : manifest.at("slices")) {
        auto [f, t] = read_field_file(dir / name.get<std::string>());
        tr.fields.push_back(std::move(f));
        (void)t;
    }
    return tr;
}

}  // namespace nlsv
