// nlsv: spectral diagnostics and solvers for the 3d cubic NLS with a decaying
// potential.  Every subcommand reads one JSON config and writes its artifacts
// (JSON/CSV/binary slices) into --out.

#include "CLI11.hpp"
#include "nlsv/runner.hpp"

int main(int argc, char** argv) {
    CLI::App app{"3d cubic NLS-with-potential toolkit"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = "out";
    int threads = 1;
    bool refine = false;

    const std::vector<std::string> tasks = {"kato",       "spectrum",   "resonance",
                                            "heat-fit",   "norm-equiv", "decay",
                                            "strichartz", "picard",     "evolve"};
    for (const auto& t : tasks) {
        auto* sub = app.add_subcommand(t);
        sub->add_option("--config", config_path, "JSON config file")->required();
        sub->add_option("--out", out_dir, "output directory");
        sub->add_option("--threads", threads, "worker threads");
        sub->add_flag("--refine", refine, "double n, halve dt, double quadrature nodes");
    }

    CLI11_PARSE(app, argc, argv);
    const std::string task = app.get_subcommands().front()->get_name();
    int rc = nlsv::run_cli(config_path, task, out_dir, threads, refine);
    if (rc != 0) std::fprintf(stderr, "nlsv %s failed; see %s/error.json\n", task.c_str(),
                              out_dir.c_str());
    return rc;
}
