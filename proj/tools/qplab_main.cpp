#include <iostream>

#include "CLI11.hpp"
#include "qplab/runner.hpp"

int main(int argc, char** argv) {
    CLI::App app{"qplab: stochastic and quantum hydrodynamics on a 1-D grid"};
    app.require_subcommand(1, 1);

    std::optional<std::string> config, out;
    std::optional<std::uint64_t> seed;
    std::optional<double> dt;
    std::optional<std::size_t> steps;
    for (const auto& name : qplab::subcommands()) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("--config", config, "scenario file (key = value with [section] headers)");
        sub->add_option("--out", out, "output directory, overrides run.outputs");
        sub->add_option("--seed", seed, "overrides run.seed");
        sub->add_option("--dt", dt, "overrides run.dt");
        sub->add_option("--steps", steps, "overrides run.steps");
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        // usage problems count as configuration errors
        const int code = app.exit(e);
        return code == 0 ? 0 : qplab::kExitConfig;
    }
    const std::string name = app.get_subcommands().front()->get_name();
    return qplab::execute(name, config, {out, seed, dt, steps}, std::cout, std::cerr);
}
