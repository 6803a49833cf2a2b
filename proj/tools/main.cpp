#include <CLI11.hpp>

#include "epduct/pipeline.hpp"

int main(int argc, char** argv) {
    CLI::App app{"epduct: supersonic Euler-Poisson potential flow in a rectangular duct"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    int threads = -1;
    double L = -1.0;
    int n1 = 0, n2 = 0, n3 = 0;
    std::vector<std::string> sets;

    app.add_option("--config", config_path, "run configuration file (key = value lines)");
    app.add_option("--out", out_dir, "output directory (overrides output.dir)");
    app.add_option("--threads", threads, "worker threads (overrides solver.threads and EPDUCT_THREADS)");
    app.add_option("--L", L, "duct length override");
    app.add_option("--n1", n1, "x1 node count override");
    app.add_option("--n2", n2, "x2 node count override");
    app.add_option("--n3", n3, "x3 node count override");
    app.add_option("--set", sets, "extra 'key=value' overrides (repeatable)")->take_all();

    bool weight_sweep = false;
    bool inject = false;
    auto* c_bg = app.add_subcommand("background", "integrate the 1D background flow");
    auto* c_w = app.add_subcommand("weight", "synthesize the energy weight");
    c_w->add_flag("--sweep", weight_sweep, "also sweep L up to the detected L1");
    auto* c_lin = app.add_subcommand("solve-linear", "solve one frozen linear problem");
    auto* c_nl = app.add_subcommand("solve", "Picard iteration for the nonlinear problem");
    auto* c_ver = app.add_subcommand("verify", "manufactured-solution and energy checks");
    c_ver->add_flag("--inject-corruption", inject, "negative controls: corrupt and expect detection");
    auto* c_sw = app.add_subcommand("sweep", "sigma scaling sweep");

    CLI11_PARSE(app, argc, argv);

    try {
        epduct::RunConfig cfg;
        if (!config_path.empty()) cfg = epduct::parse_config_file(config_path);
        for (const auto& s : sets) {
            const auto eq = s.find('=');
            if (eq == std::string::npos)
                throw epduct::ConfigError("--set expects key=value, got '" + s + "'");
            epduct::apply_setting(cfg, s.substr(0, eq), s.substr(eq + 1));
        }
        if (!out_dir.empty()) cfg.out_dir = out_dir;
        if (threads >= 0) cfg.threads = threads;
        if (L > 0.0) cfg.length = L;
        if (n1 > 0) cfg.n1 = n1;
        if (n2 > 0) cfg.n2 = n2;
        if (n3 > 0) cfg.n3 = n3;
        if (inject) cfg.inject_corruption = true;

        std::string name;
        for (auto* sc : {c_bg, c_w, c_lin, c_nl, c_ver, c_sw})
            if (sc->parsed()) name = sc->get_name();
        return epduct::run_command(name, cfg, weight_sweep);
    } catch (const epduct::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return epduct::exit_code::config;
    }
}
