#pragma once

// Command-line front end. Subcommands:
//   certify <config>         certificate report only
//   simulate <config>        full run with monitors and file outputs
//   check-schedule <config>  admissibility verdict with the worst window
//   repro <scenario>         end-to-end experiment reproduction
//   sweep <config> --param --range lo:hi:n
// Exit codes: 0 success, 1 verdict failure, 2 config error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hybris/runner.hpp"

namespace hybris {

namespace detail {

inline ScenarioConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path, "cannot open config file");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError(path, std::string("JSON parse error: ") + e.what());
    }
    return scenario_from_json(j);
}

}  // namespace detail

inline int cli_main(std::vector<std::string> args) {
    CLI::App app{"hybris: certificates and hybrid simulation for feedback optimization under switching attacks"};
    app.require_subcommand(1);

    std::string config_path, out_dir = "out", repro_name, sweep_param, sweep_range;

    auto* certify_cmd = app.add_subcommand("certify", "compute the stability certificate");
    certify_cmd->add_option("config", config_path, "scenario config (JSON)")->required();
    certify_cmd->add_option("-o,--out", out_dir, "output directory");

    auto* sim_cmd = app.add_subcommand("simulate", "simulate and monitor one scenario");
    sim_cmd->add_option("config", config_path, "scenario config (JSON)")->required();
    sim_cmd->add_option("-o,--out", out_dir, "output directory");

    auto* check_cmd = app.add_subcommand("check-schedule", "check schedule admissibility");
    check_cmd->add_option("config", config_path, "scenario config (JSON)")->required();

    auto* repro_cmd = app.add_subcommand("repro", "reproduce a published experiment");
    repro_cmd
        ->add_option("scenario", repro_name,
                     "synthetic-static | synthetic-dynamic | power-grid-controller | "
                     "power-grid-plant")
        ->required();
    repro_cmd->add_option("-o,--out", out_dir, "output directory");

    auto* sweep_cmd = app.add_subcommand("sweep", "run a one-parameter batch");
    sweep_cmd->add_option("config", config_path, "scenario config (JSON)")->required();
    sweep_cmd->add_option("--param", sweep_param, "dotted config path, e.g. eps.value")
        ->required();
    sweep_cmd->add_option("--range", sweep_range, "lo:hi:n inclusive")->required();
    sweep_cmd->add_option("-o,--out", out_dir, "output directory");

    std::vector<const char*> argv;
    argv.push_back("hybris");
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(int(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        if (*certify_cmd) {
            auto cfg = detail::load_config(config_path);
            auto rs = resolve_scenario(cfg);
            std::filesystem::create_directories(out_dir);
            const auto path = std::filesystem::path(out_dir) / "certificate.json";
            std::ofstream(path) << certificate_to_json(rs).dump(2) << '\n';
            std::cout << "certificate written to " << path.string() << "\n"
                      << "  feasible: " << (rs.cert.kappa_feasible ? "yes" : "no")
                      << "  rho: " << rs.cert.rho << "  eps*: " << rs.cert.eps_star << "\n";
            return rs.cert.kappa_feasible ? 0 : 1;
        }
        if (*sim_cmd) {
            auto cfg = detail::load_config(config_path);
            auto a = run_scenario(cfg, out_dir);
            std::cout << "run '" << cfg.name << "': "
                      << (a.sim.status == SimStatus::completed ? "completed" : "diverged")
                      << ", jumps " << a.sim.jumps << ", final tracking error "
                      << a.mon.rows.back().tracking_error << "\n"
                      << "artifacts in " << a.dir.string() << "\n";
            for (const auto& w : a.sim.warnings) std::cout << "warning: " << w << "\n";
            const bool ok = a.sim.status == SimStatus::completed &&
                            (!a.mon.verdicts.residual_radius_valid ||
                             a.mon.verdicts.jump_nonincrease);
            return ok ? 0 : 1;
        }
        if (*check_cmd) {
            auto cfg = detail::load_config(config_path);
            auto rs = resolve_scenario(cfg);
            const auto sched = rs.clock_scale == 1.0 ? rs.setup.schedule
                                                     : rs.setup.schedule.scaled(rs.clock_scale);
            auto rep = check_admissible(sched, cfg.adm, rs.setup.attack_ids);
            if (rep.admissible) {
                std::cout << "schedule admissible (min slack " << rep.min_slack << ")\n";
                return 0;
            }
            std::cout << "schedule INADMISSIBLE";
            if (rep.worst)
                std::cout << ": condition " << rep.worst->condition << " violated on ["
                          << rep.worst->s << ", " << rep.worst->t << "] (lhs " << rep.worst->lhs
                          << " > rhs " << rep.worst->rhs << ")";
            std::cout << "\n";
            return 1;
        }
        if (*repro_cmd) {
            auto rr = repro(repro_name, out_dir);
            std::cout << "repro '" << repro_name << "' " << (rr.ok ? "completed" : "FAILED")
                      << "; summary in " << (std::filesystem::path(out_dir) / "repro_summary.json").string()
                      << "\n";
            return rr.ok ? 0 : 1;
        }
        if (*sweep_cmd) {
            std::ifstream in(config_path);
            if (!in) throw ConfigError(config_path, "cannot open config file");
            json base;
            in >> base;
            double lo, hi;
            int n;
            {
                std::istringstream ss(sweep_range);
                std::string part;
                std::getline(ss, part, ':');
                lo = std::stod(part);
                std::getline(ss, part, ':');
                hi = std::stod(part);
                std::getline(ss, part, ':');
                n = std::stoi(part);
            }
            if (n < 2) throw ConfigError("--range", "need at least two points");
            std::string ptr = "/" + sweep_param;
            for (auto& ch : ptr)
                if (ch == '.') ch = '/';
            std::filesystem::create_directories(out_dir);
            std::ofstream csv(std::filesystem::path(out_dir) / "sweep.csv");
            csv << sweep_param << ",status,final_tracking_error,tail_sup,eps_star\n";
            for (int i = 0; i < n; ++i) {
                const double v = lo + (hi - lo) * double(i) / double(n - 1);
                json j = base;
                j[json::json_pointer(ptr)] = v;
                auto cfg = scenario_from_json(j);
                cfg.name += "-sweep" + std::to_string(i);
                auto a = run_scenario(cfg, std::filesystem::path(out_dir) / cfg.name);
                csv << detail::fmt17(v) << ','
                    << (a.sim.status == SimStatus::completed ? "completed" : "non_finite") << ','
                    << detail::fmt17(a.mon.rows.back().tracking_error) << ','
                    << detail::fmt17(a.mon.verdicts.tail_sup_tracking) << ','
                    << detail::fmt17(a.resolved.cert.eps_star) << '\n';
            }
            std::cout << "sweep written to " << (std::filesystem::path(out_dir) / "sweep.csv").string()
                      << "\n";
            return 0;
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const json::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}

}  // namespace hybris
