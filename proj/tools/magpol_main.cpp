#include <cstdint>
#include <functional>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "magpol/cli.hpp"
#include "magpol/model_core.hpp"

namespace {

using magpol::cli::Overrides;

struct CommonArgs {
    std::string config;
    std::string out = ".";
    std::int64_t seed = -1;
    std::string variant;
    bool emit_plots = false;
};

// registers --config/--out/--seed/--variant/--emit-plots on one subcommand
void add_common(CLI::App* sub, CommonArgs& args) {
    sub->add_option("--config", args.config, "run configuration (JSON)")
        ->required()
        ->check(CLI::ExistingFile);
    sub->add_option("--out", args.out, "output directory (created if missing)");
    sub->add_option("--seed", args.seed, "override the config seed (non-negative)");
    sub->add_option("--variant", args.variant, "override the model variant")
        ->check(CLI::IsMember({"hopfield", "dicke", "rwa"}));
    sub->add_flag("--emit-plots", args.emit_plots, "write SVG plots next to the data files");
}

int make_overrides(const CommonArgs& args, Overrides& o) {
    if (args.seed >= 0) o.seed = static_cast<std::uint64_t>(args.seed);
    if (!args.variant.empty()) {
        if (args.variant == "hopfield") o.variant = magpol::ModelVariant::hopfield;
        else if (args.variant == "dicke") o.variant = magpol::ModelVariant::dicke;
        else if (args.variant == "rwa") o.variant = magpol::ModelVariant::rwa;
        else {
            std::cerr << "error: unknown variant \"" << args.variant << "\"\n";
            return 2;
        }
    }
    o.emit_plots = args.emit_plots;
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"magnon-polariton spectra: simulation, fitting, and coupling diagnostics"};
    app.require_subcommand(1);

    CommonArgs sim_args, fit_args, bs_args, report_args, scaling_args;

    auto* sim = app.add_subcommand("simulate", "synthesize a transmission grid and dispersion");
    add_common(sim, sim_args);
    auto* fit = app.add_subcommand("fit", "fit dispersion, resonator, or linewidth data");
    add_common(fit, fit_args);
    auto* bs = app.add_subcommand("bloch-siegert",
                                  "counter-rotating branch shifts over a field sweep");
    add_common(bs, bs_args);
    auto* report = app.add_subcommand("report", "coupling-regime diagnostics at one field");
    add_common(report, report_args);
    auto* scaling = app.add_subcommand("scaling", "sqrt(n) coupling-scaling fit");
    add_common(scaling, scaling_args);

    CLI11_PARSE(app, argc, argv);

    const CommonArgs* args = nullptr;
    std::function<int(const std::string&, const std::string&, const Overrides&)> run;
    if (sim->parsed()) {
        args = &sim_args;
        run = magpol::cli::cmd_simulate;
    } else if (fit->parsed()) {
        args = &fit_args;
        run = magpol::cli::cmd_fit;
    } else if (bs->parsed()) {
        args = &bs_args;
        run = magpol::cli::cmd_bloch_siegert;
    } else if (report->parsed()) {
        args = &report_args;
        run = magpol::cli::cmd_report;
    } else {
        args = &scaling_args;
        run = magpol::cli::cmd_scaling;
    }

    Overrides overrides;
    if (const int rc = make_overrides(*args, overrides); rc != 0) return rc;
    try {
        return run(args->config, args->out, overrides);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
