#include "epduct/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <iostream>
#include <sstream>

#include "epduct/outputs.hpp"
#include "epduct/verification.hpp"

namespace epduct {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

nlohmann::json config_echo(const RunConfig& c) {
    return nlohmann::json{
        {"gas", {{"gamma", c.gamma}, {"j0", c.j0}}},
        {"background",
         {{"b0", c.b0}, {"u0", c.u0}, {"e0", c.e0}, {"delta", c.delta},
          {"length", c.bg_length}, {"step", c.bg_step}}},
        {"duct", {{"length", c.length}, {"n1", c.n1}, {"n2", c.n2}, {"n3", c.n3}}},
        {"solver",
         {{"m_max", c.m_max}, {"max_iter", c.max_iter}, {"epsilon", c.epsilon},
          {"sigma_bar", c.sigma_bar}, {"contraction_tol", c.contraction_tol},
          {"residual_tol", c.residual_tol}, {"under_relax", c.under_relax},
          {"r_factor", c.r_factor}, {"threads", c.threads}}},
        {"data", {{"source", c.data_source}, {"sigma_target", c.sigma_target}}},
    };
}

const char* kVersion = "0.1.0";

}  // namespace

Workspace make_workspace(const RunConfig& cfg) {
    Workspace ws;
    ws.cfg = cfg;
    const BackgroundParams params = cfg.background_params();
    ws.orbit = classify_orbit(params);
    ws.bg_full = integrate(params);
    if (cfg.length > ws.bg_full.l1_detected + 1e-12) {
        std::ostringstream os;
        os << "duct length L = " << cfg.length << " exceeds the admissible length L1 = "
           << ws.bg_full.l1_detected;
        throw TruncatedError(os.str());
    }
    ws.grid = cfg.duct_grid();
    ws.bg = integrate_at(params, ws.grid.x1_nodes());
    ws.base = base_coefficients(ws.bg);
    ws.base_full = base_coefficients(ws.bg_full);
    return ws;
}

BoundaryData build_data(const RunConfig& cfg, const Workspace& ws) {
    if (cfg.data_source == "files") {
        if (cfg.data_manifest.empty())
            throw ConfigError("data.source = files requires data.manifest");
        return load_boundary_data(cfg.data_manifest, ws.bg, ws.grid);
    }
    std::vector<SyntheticMode> modes = cfg.modes;
    if (cfg.sigma_target > 0.0 && modes.empty()) {
        // canonical low-mode mix touching all four data
        modes = {{SyntheticMode::Target::UEn, 1, 0, 1.0, 0, false},
                 {SyntheticMode::Target::EEn, 1, 1, 1.0, 0, false},
                 {SyntheticMode::Target::PhiEx, 0, 1, 1.0, 0, false},
                 {SyntheticMode::Target::B, 1, 0, 1.0, 1, false}};
    }
    BoundaryData data = generate_synthetic(modes, ws.bg, ws.grid);
    if (cfg.sigma_target > 0.0) {
        const double s = sigma(data).sigma;
        if (s <= 0.0) throw ConfigError("data.sigma_target set but the mode list is empty");
        const double scale = cfg.sigma_target / s;
        for (auto& m : modes) m.amplitude *= scale;
        data = generate_synthetic(modes, ws.bg, ws.grid);
    }
    return data;
}

int cmd_background(const RunConfig& cfg) {
    const auto t0 = Clock::now();
    const BackgroundParams params = cfg.background_params();
    const OrbitClass orbit = classify_orbit(params);
    const BackgroundSolution bg = integrate(params);

    ensure_dir(cfg.out_dir);
    write_background_csv(cfg.out_dir + "/background.csv", bg);
    nlohmann::json j{
        {"version", kVersion},
        {"L1", bg.l1_detected},
        {"truncated", bg.truncated},
        {"invariant_drift", bg.invariant_drift},
        {"orbit_class", orbit == OrbitClass::Periodic ? "periodic" : "finite_L1"},
        {"energy0", bg.energy0},
        {"config", config_echo(cfg)},
        {"timing_sec", seconds_since(t0)},
    };
    write_json(cfg.out_dir + "/background.json", j);
    std::cout << "background: L1 = " << bg.l1_detected << ", drift = " << bg.invariant_drift
              << (bg.truncated ? " (truncated)" : "") << "\n";
    return bg.truncated ? exit_code::truncated : exit_code::ok;
}

int cmd_weight(const RunConfig& cfg, bool sweep) {
    const auto t0 = Clock::now();
    Workspace ws = make_workspace(cfg);
    const WeightPolicy policy{cfg.weight_w0, cfg.weight_margin, 4};
    const EnergyWeight w = synthesize_weight(ws.base_full, cfg.length, policy);

    ensure_dir(cfg.out_dir);
    if (w.feasible) write_weight_csv(cfg.out_dir + "/weight.csv", w);
    nlohmann::json j{
        {"version", kVersion},
        {"feasible", w.feasible},
        {"feasible_length", w.feasible_length},
        {"L", cfg.length},
        {"min_margin", w.feasible ? w.min_margin() : 0.0},
        {"config", config_echo(cfg)},
        {"timing_sec", seconds_since(t0)},
    };

    if (sweep) {
        std::ostringstream os;
        os << "L,feasible,min_margin\n";
        for (int s = 1; s <= cfg.weight_sweep_points; ++s) {
            const double L = ws.bg_full.l1_detected * s / cfg.weight_sweep_points;
            const EnergyWeight wl = synthesize_weight(ws.base_full, L, policy);
            os << format_double(L) << ',' << (wl.feasible ? 1 : 0) << ','
               << format_double(wl.feasible ? wl.min_margin() : 0.0) << '\n';
        }
        atomic_write(cfg.out_dir + "/weight_sweep.csv", os.str());
    }
    write_json(cfg.out_dir + "/weight.json", j);
    std::cout << "weight: feasible = " << (w.feasible ? "yes" : "no")
              << ", L1* = " << w.feasible_length << "\n";
    return w.feasible ? exit_code::ok : exit_code::infeasible;
}

int cmd_solve_linear(const RunConfig& cfg) {
    const auto t0 = Clock::now();
    Workspace ws = make_workspace(cfg);
    const BoundaryData data = build_data(cfg, ws);
    const IterationConfig icfg = cfg.iteration_config();

    // first Picard step's frozen linear problem (zero iterate)
    const IterationState zero = zero_state(ws.grid);
    Field3 shift;
    const LinearProblem pb = build_linear_problem(zero, data, ws.bg, ws.base, icfg, &shift);
    const ModalSolution sol = solve(pb);

    ensure_dir(cfg.out_dir);
    write_modal_csv(cfg.out_dir + "/modal.csv", sol);
    if (cfg.write_fields) {
        write_field_csv(cfg.out_dir + "/psi.csv", sol.psi);
        Field3 cap = sol.cap_psi;
        cap += shift;  // back to the inhomogeneous boundary values
        write_field_csv(cfg.out_dir + "/Psi.csv", cap);
    }
    const auto& r = sol.residual;
    nlohmann::json j{
        {"version", kVersion},
        {"residual",
         {{"l2_eq1", r.l2_eq1}, {"max_eq1", r.max_eq1}, {"l2_eq2", r.l2_eq2},
          {"max_eq2", r.max_eq2}, {"ratio", r.ratio}, {"data_norm", r.data_norm},
          {"bc",
           {{"psi_gamma0", r.bc.psi_gamma0}, {"dpsi_gamma0", r.bc.dpsi_gamma0},
            {"dcap_gamma0", r.bc.dcap_gamma0}, {"cap_gammaL", r.bc.cap_gammaL},
            {"slip_psi", r.bc.slip_psi}, {"slip_cap", r.bc.slip_cap}}}}},
        {"config", config_echo(cfg)},
        {"timing_sec", seconds_since(t0)},
    };
    write_json(cfg.out_dir + "/linear.json", j);
    std::cout << "solve-linear: interior residual " << r.l2_eq1 + r.l2_eq2 << "\n";
    return exit_code::ok;
}

namespace {

nlohmann::json solve_one(const RunConfig& cfg, Workspace& ws, const BoundaryData& data,
                         std::ostream* iter_log, NonlinearResult* out = nullptr) {
    const IterationConfig icfg = cfg.iteration_config();
    IterLogger logger;
    if (iter_log) {
        logger = [iter_log](int iter, const StepInfo& info) {
            nlohmann::json line{{"iter", iter},
                                {"step_diff", info.step_diff},
                                {"lin_residual", info.lin_residual},
                                {"norm_phi", info.norm_phi},
                                {"norm_w", info.norm_w},
                                {"regime_margin", info.regime_margin}};
            (*iter_log) << line.dump() << "\n";
        };
    }
    NonlinearResult res = solve_nonlinear(data, ws.bg, ws.base, icfg, logger);
    const auto rep = res.report;
    if (out) *out = std::move(res);
    if (std::max(rep.res_div_form, rep.res_poisson) > icfg.residual_tol) {
        std::ostringstream os;
        os << "nonlinear residual " << std::max(rep.res_div_form, rep.res_poisson)
           << " exceeds residual_tol " << icfg.residual_tol;
        throw SolverError(os.str());
    }
    return nlohmann::json{
        {"sigma", rep.sigma},
        {"iterations", rep.iterations},
        {"q_fit", rep.q_fit},
        {"final_step", rep.final_step},
        {"residual_div_form", rep.res_div_form},
        {"residual_poisson", rep.res_poisson},
        {"residual_nondiv_form", rep.res_nondiv_form},
        {"supersonic_margin", rep.supersonic_margin},
        {"norm_psi_h1", rep.norm_psi},
        {"norm_Psi_h1", rep.norm_cap},
        {"ratio", rep.ratio},
        {"lambda0", rep.lambda0},
    };
}

}  // namespace

int cmd_solve(const RunConfig& cfg) {
    const auto t0 = Clock::now();
    Workspace ws = make_workspace(cfg);
    const BoundaryData data = build_data(cfg, ws);

    ensure_dir(cfg.out_dir);
    std::ostringstream iter_log;
    NonlinearResult res;
    nlohmann::json summary = solve_one(cfg, ws, data, &iter_log, &res);
    atomic_write(cfg.out_dir + "/iterations.jsonl", iter_log.str());

    if (cfg.write_fields) {
        write_field_csv(cfg.out_dir + "/psi.csv", res.psi);
        write_field_csv(cfg.out_dir + "/Psi.csv", res.cap_psi);
    }
    const EnergyWeight wfull = synthesize_weight(ws.base_full, cfg.length,
                                                 {cfg.weight_w0, cfg.weight_margin, 4});
    nlohmann::json manifest{
        {"version", kVersion},
        {"L1", ws.bg_full.l1_detected},
        {"L1_star", wfull.feasible_length},
        {"orbit_class", ws.orbit == OrbitClass::Periodic ? "periodic" : "finite_L1"},
        {"summary", summary},
        {"config", config_echo(cfg)},
        {"timing_sec", seconds_since(t0)},
    };
    write_json(cfg.out_dir + "/manifest.json", manifest);
    std::cout << "solve: sigma = " << summary["sigma"].get<double>() << ", iterations = "
              << summary["iterations"].get<int>() << ", ratio = "
              << summary["ratio"].get<double>() << "\n";
    return exit_code::ok;
}

int cmd_sweep(const RunConfig& cfg) {
    const auto t0 = Clock::now();
    Workspace ws = make_workspace(cfg);
    ensure_dir(cfg.out_dir);

    nlohmann::json rows = nlohmann::json::array();
    std::ostringstream csv;
    csv << "sigma,iterations,q_fit,residual_div,residual_poisson,ratio,supersonic_margin\n";
    for (const double f : cfg.sigma_factors) {
        RunConfig c = cfg;
        c.sigma_target = f * cfg.sigma_bar;
        const BoundaryData data = build_data(c, ws);
        nlohmann::json row = solve_one(c, ws, data, nullptr);
        csv << format_double(row["sigma"].get<double>()) << ','
            << row["iterations"].get<int>() << ','
            << format_double(row["q_fit"].get<double>()) << ','
            << format_double(row["residual_div_form"].get<double>()) << ','
            << format_double(row["residual_poisson"].get<double>()) << ','
            << format_double(row["ratio"].get<double>()) << ','
            << format_double(row["supersonic_margin"].get<double>()) << '\n';
        rows.push_back(row);
    }

    double rmin = 1e300, rmax = 0.0;
    for (const auto& row : rows) {
        const double r = row["ratio"].get<double>();
        rmin = std::min(rmin, r);
        rmax = std::max(rmax, r);
    }
    const double spread = rmin > 0.0 ? rmax / rmin - 1.0 : 0.0;

    atomic_write(cfg.out_dir + "/scaling.csv", csv.str());
    write_json(cfg.out_dir + "/sweep.json",
               nlohmann::json{{"version", kVersion},
                              {"rows", rows},
                              {"ratio_spread", spread},
                              {"config", config_echo(cfg)},
                              {"timing_sec", seconds_since(t0)}});
    std::cout << "sweep: ratio spread = " << spread << " over " << rows.size() << " runs\n";
    return exit_code::ok;
}

int cmd_verify(const RunConfig& cfg) {
    const auto t0 = Clock::now();
    Workspace ws = make_workspace(cfg);
    ensure_dir(cfg.out_dir);

    bool ok = true;
    nlohmann::json j{{"version", kVersion}, {"config", config_echo(cfg)}};

    // coefficient audit at the zero iterate
    {
        CoefficientSet set = assemble_set(ws.bg, ws.base, Field3(ws.grid), Field3(ws.grid),
                                          Field3(ws.grid, cfg.b0), "verify");
        if (cfg.inject_corruption) set.a(1, 2)(1, 1, 1) += 1e-3;  // negative control
        const AuditReport rep = audit(set);
        nlohmann::json items = nlohmann::json::array();
        for (const auto& it : rep.items)
            items.push_back({{"name", it.name}, {"worst", it.worst}, {"pass", it.pass}});
        j["audit"] = {{"pass", rep.pass}, {"items", items}};
        if (cfg.inject_corruption) {
            j["audit"]["expected_failure"] = true;
            ok = ok && !rep.pass;  // the corruption must be caught
        } else {
            ok = ok && rep.pass;
        }
    }

    // compatibility of the configured boundary data
    {
        const BoundaryData data = build_data(cfg, ws);
        const CompatReport rep = validate_compatibility(data);
        j["compatibility"] = {{"pass", rep.pass}, {"worst", rep.worst}, {"tol", rep.tol}};
        ok = ok && rep.pass;
    }

    // manufactured-solution convergence + energy identity
    {
        const auto rows = mms_convergence(cfg.background_params(), cfg.length, cfg.n2, cfg.n3,
                                          cfg.m_max, cfg.verify_n1, true, cfg.threads);
        std::vector<double> epsi, gaps;
        nlohmann::json jr = nlohmann::json::array();
        std::ostringstream csv;
        csv << "n1,err_psi,err_Psi,energy_gap,lambda0,ih_dual_gap,runtime_sec\n";
        for (const auto& r : rows) {
            epsi.push_back(r.err_psi);
            gaps.push_back(r.energy_gap);
            jr.push_back({{"n1", r.n1},
                          {"err_psi", r.err_psi},
                          {"err_Psi", r.err_cap},
                          {"energy_gap", r.energy_gap},
                          {"lambda0", r.lambda0},
                          {"ih_dual_gap", r.ih_dual_gap},
                          {"runtime_sec", r.runtime_sec}});
            csv << r.n1 << ',' << format_double(r.err_psi) << ',' << format_double(r.err_cap)
                << ',' << format_double(r.energy_gap) << ',' << format_double(r.lambda0)
                << ',' << format_double(r.ih_dual_gap) << ','
                << format_double(r.runtime_sec) << '\n';
        }
        atomic_write(cfg.out_dir + "/convergence.csv", csv.str());
        const auto ord_err = observed_orders(epsi);
        const auto ord_gap = observed_orders(gaps);
        bool mms_ok = true;
        for (const double o : ord_err) mms_ok = mms_ok && o >= 1.7 && o <= 2.5;
        bool energy_ok = true;
        for (const double o : ord_gap) energy_ok = energy_ok && o >= 1.5;
        for (const auto& r : rows) energy_ok = energy_ok && r.lambda0 > 0.0;
        j["mms"] = {{"rows", jr}, {"orders_err_psi", ord_err}, {"pass", mms_ok}};
        j["energy"] = {{"orders_gap", ord_gap}, {"pass", energy_ok}};
        ok = ok && mms_ok && energy_ok;

        // negative control: a spurious high mode must show in the residual
        if (cfg.inject_corruption && !rows.empty()) {
            const int n1c = cfg.verify_n1.front();
            const DuctGrid grid(n1c, cfg.n2, cfg.n3, cfg.length);
            const BackgroundSolution bgc =
                integrate_at(cfg.background_params(), grid.x1_nodes());
            const BaseCoefficients basec = base_coefficients(bgc);
            MmsCase mms = build_mms(bgc, basec, grid, cfg.m_max, 1.0, 0.0, cfg.threads);
            ModalSolution sol = solve(mms.problem);
            const double clean = sol.residual.l2_eq1 + sol.residual.l2_eq2;
            const int last = sol.basis->num_modes() - 1;
            for (int i = 0; i < sol.n1(); ++i)
                sol.theta(last, i) += 0.01 * std::sin(3.0 * grid.x1(i) / grid.length);
            const double corrupted =
                residual(sol, mms.problem).l2_eq1 + residual(sol, mms.problem).l2_eq2;
            const bool detected = corrupted > 10.0 * clean;
            j["residual_negative_control"] = {{"clean", clean},
                                              {"corrupted", corrupted},
                                              {"detected", detected}};
            ok = ok && detected;
        }
    }

    j["pass"] = ok;
    j["timing_sec"] = seconds_since(t0);
    write_json(cfg.out_dir + "/verify.json", j);
    std::cout << "verify: " << (ok ? "PASS" : "FAIL") << "\n";
    return ok ? exit_code::ok : exit_code::verify_failed;
}

int run_command(const std::string& name, const RunConfig& cfg, bool weight_sweep) {
    try {
        if (name == "background") return cmd_background(cfg);
        if (name == "weight") return cmd_weight(cfg, weight_sweep);
        if (name == "solve-linear") return cmd_solve_linear(cfg);
        if (name == "solve") return cmd_solve(cfg);
        if (name == "verify") return cmd_verify(cfg);
        if (name == "sweep") return cmd_sweep(cfg);
        std::cerr << "unknown command: " << name << "\n";
        return exit_code::generic;
    } catch (const TruncatedError& e) {
        std::cerr << "truncated: " << e.what() << "\n";
        return exit_code::truncated;
    } catch (const WeightInfeasibleError& e) {
        std::cerr << "infeasible: " << e.what() << "\n";
        return exit_code::infeasible;
    } catch (const NonContractionError& e) {
        std::cerr << "non-contraction: " << e.what() << "\n";
        return exit_code::non_contraction;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return exit_code::config;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code::generic;
    }
}

}  // namespace epduct
