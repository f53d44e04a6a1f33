#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "heatcert/cli.hpp"

namespace {

struct Flags {
    std::string config;
    std::map<std::string, std::string> values;  // only flags given on the command line
};

void add_common(CLI::App* cmd, Flags& f) {
    cmd->add_option("--config", f.config, "key = value configuration file");
    for (const char* key : {"geometry", "estimates", "out", "threads", "delta", "epsilon"}) {
        cmd->add_option_function<std::string>(
            std::string("--") + key, [&f, key](const std::string& v) { f.values[key] = v; }, key);
    }
    cmd->add_option_function<std::string>(
        "--fit-csv", [&f](const std::string& v) { f.values["fit_csv"] = v; }, "fit table path");
    cmd->add_option_function<std::string>(
        "--margins-csv", [&f](const std::string& v) { f.values["margins_csv"] = v; }, "per-estimate margin CSV");
    for (const auto& name : heatcert::plan_keys()) {
        const std::string key = "plan." + name;
        cmd->add_option_function<std::string>(
            "--" + key, [&f, key](const std::string& v) { f.values[key] = v; }, "sampling plan override");
    }
    cmd->add_option_function<std::vector<std::string>>(
           "--set",
           [&f](const std::vector<std::string>& items) {
               for (const auto& item : items) {
                   const auto eq = item.find('=');
                   if (eq == std::string::npos) throw CLI::ValidationError("--set", "expected key=value");
                   f.values[item.substr(0, eq)] = item.substr(eq + 1);
               }
           },
           "any setting as key=value")
        ->expected(1, -1);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"heatcert: numerical certificates for heat-equation estimates on model geometries"};
    app.require_subcommand(1);
    Flags flags;
    std::map<std::string, CLI::App*> cmds;
    cmds["verify"] = app.add_subcommand("verify", "evaluate estimates and write a JSON report");
    cmds["fit"] = app.add_subcommand("fit", "fit the implicit constants and write a CSV table");
    cmds["sharpness"] = app.add_subcommand("sharpness", "small-time scan of the kernel Laplacian bound");
    cmds["solve"] = app.add_subcommand("solve", "Crank-Nicolson solve on a warped surface, exported as CSV");
    for (auto& [name, cmd] : cmds) add_common(cmd, flags);
    cmds["sharpness"]->add_option_function<std::string>(
        "--d", [&](const std::string& v) { flags.values["sharpness.d"] = v; }, "fixed distance");
    cmds["solve"]->add_option_function<std::string>(
        "--t-end", [&](const std::string& v) { flags.values["solve.t_end"] = v; }, "final time");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : heatcert::kExitConfigError;
    }

    std::string command;
    for (auto& [name, cmd] : cmds) {
        if (cmd->parsed()) command = name;
    }
    heatcert::Settings settings;
    try {
        if (!flags.config.empty()) heatcert::merge_settings(settings, heatcert::load_config_file(flags.config));
    } catch (const heatcert::Error& e) {
        std::cerr << e.what() << '\n';
        return heatcert::kExitConfigError;
    }
    heatcert::merge_settings(settings, flags.values);
    return heatcert::run_command(command, settings, std::cout, std::cerr);
}
