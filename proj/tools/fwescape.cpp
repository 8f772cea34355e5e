// Command line driver: parses a JSON run configuration, executes one
// pipeline, writes the file set under the output directory, and prints the
// summary (which embeds the fully resolved configuration) to stdout.
//
// Exit codes: 0 success, 1 usage or configuration error, 2 runtime failure.

#include <cstdint>
#include <exception>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "fwescape/pipelines.hpp"

namespace {

struct CliArgs {
    std::string config;
    std::string out;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int threads = 0;
};

void add_common_flags(CLI::App* sub, CliArgs& args) {
    sub->add_option("--config", args.config, "JSON run configuration file");
    sub->add_option("--out", args.out, "output directory (overrides config)");
    sub->add_option("--seed", args.seed, "master seed (overrides config)");
    sub->add_option("--threads", args.threads,
                    "worker threads (overrides config)");
}

int emit_error(const char* kind, const std::string& what, int code) {
    fwescape::json err{{"format_version", fwescape::kFormatVersion},
                       {"error", kind},
                       {"what", what}};
    std::cerr << err.dump() << '\n';
    return code;
}

int run_one(const std::string& command, const CliArgs& args) {
    fwescape::json obj = fwescape::json::object();
    if (!args.config.empty()) {
        std::ifstream is(args.config);
        if (!is)
            throw std::invalid_argument("cannot read config file '" +
                                        args.config + "'");
        is >> obj;
    }
    fwescape::RunConfig rc = fwescape::parse_run_config(obj, command);
    rc.command = command;
    if (!args.out.empty()) rc.out_dir = args.out;
    if (args.seed_set) rc.seed = args.seed;
    if (args.threads > 0) rc.threads = args.threads;

    const fwescape::json summary = fwescape::run_command(rc);
    std::cout << summary.dump(2) << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "most-probable escape paths, drift-norm landscapes, and direct "
        "noisy simulation"};
    app.require_subcommand(1);
    CliArgs args;

    add_common_flags(
        app.add_subcommand("instanton",
                           "shoot a fan of zero-energy escape paths and "
                           "detect path crossings"),
        args);
    add_common_flags(
        app.add_subcommand("norm-map",
                           "map the drift norm on a grid and classify its "
                           "critical points"),
        args);
    add_common_flags(
        app.add_subcommand("bifurcation",
                           "scan the planar family for the flattening of "
                           "the on-axis saddle"),
        args);
    add_common_flags(
        app.add_subcommand("langevin",
                           "simulate noisy escapes (planar) or check the "
                           "stationary law (spin)"),
        args);
    add_common_flags(
        app.add_subcommand("oracle-check",
                           "compare an easy-axis escape shot against the "
                           "closed forms"),
        args);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    CLI::App* sub = app.get_subcommands().front();
    args.seed_set = sub->count("--seed") > 0;

    try {
        return run_one(sub->get_name(), args);
    } catch (const fwescape::json::exception& e) {
        return emit_error("config", e.what(), 1);
    } catch (const std::invalid_argument& e) {
        return emit_error("config", e.what(), 1);
    } catch (const std::domain_error& e) {
        return emit_error("config", e.what(), 1);
    } catch (const std::exception& e) {
        return emit_error("runtime", e.what(), 2);
    }
}
