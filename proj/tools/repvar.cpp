// repvar: replicate variance estimation for two-PSU-per-stratum designs.

#include "repvar/commands.hpp"
#include "repvar/error.hpp"
#include "repvar/io.hpp"

#include "CLI11.hpp"

#include <fstream>
#include <iostream>

namespace {

void write_output(const std::string& text, const std::string& output) {
    if (output.empty() || output == "-") {
        std::cout << text;
        return;
    }
    const auto path = repvar::cli::resolve_output_path(output);
    std::ofstream out(path);
    if (!out) throw repvar::Error(repvar::ErrorCode::IoError, "cannot write '" + path.string() + "'");
    out << text;
    if (!out) throw repvar::Error(repvar::ErrorCode::IoError, "write to '" + path.string() + "' failed");
}

repvar::SchemeSpec make_scheme(const std::string& name, double epsilon, bool epsilon_given, std::size_t order) {
    const auto kind = repvar::parse_scheme_kind(name);
    const bool fay = kind == repvar::SchemeKind::FayBrr || kind == repvar::SchemeKind::FayJk;
    if (epsilon_given && !fay && epsilon != 1.0) {
        throw repvar::Error(repvar::ErrorCode::EpsilonOutOfRange, "--epsilon only applies to fay-brr and fay-jk");
    }
    const std::optional<std::size_t> hadamard = order ? std::optional<std::size_t>(order) : std::nullopt;
    if (kind == repvar::SchemeKind::Jk1) {
        throw repvar::Error(repvar::ErrorCode::SchemeMismatch, "jk1 needs single-unit zones, not a two-PSU sample");
    }
    if (hadamard && !(kind == repvar::SchemeKind::Brr || kind == repvar::SchemeKind::FayBrr)) {
        throw repvar::Error(repvar::ErrorCode::SchemeMismatch, "--order only applies to brr and fay-brr");
    }
    return repvar::SchemeSpec::make(kind, epsilon, hadamard);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Replicate variance estimation (BRR, Fay, paired jackknife) with Welch-Satterthwaite degrees of freedom"};
    app.require_subcommand(1);

    std::string input, output, scheme = "brr", dof_rule = "corrected", config;
    double epsilon = repvar::kDefaultFayEpsilon;
    double level = 0.95;
    bool cap_at_h = false;
    std::size_t order = 0;

    auto* estimate = app.add_subcommand("estimate", "Variance, degrees of freedom and confidence interval for the total");
    estimate->add_option("-i,--input", input, "Sample CSV (stratum,psu,weight,y)")->required();
    estimate->add_option("-s,--scheme", scheme, "brr | fay-brr | paired-jk | fay-jk")->capture_default_str();
    auto* estimate_eps = estimate->add_option("-e,--epsilon", epsilon, "Fay perturbation factor in (0, 1]")->capture_default_str();
    estimate->add_option("--order", order, "Hadamard order for the BRR family (default: smallest that fits)");
    estimate->add_option("-l,--level", level, "Confidence level")->capture_default_str();
    estimate->add_option("--dof-rule", dof_rule, "corrected | naive | fixed-h | normal")->capture_default_str();
    estimate->add_flag("--cap-at-h", cap_at_h, "Cap the corrected degrees of freedom at the number of strata");
    estimate->add_option("-o,--output", output, "Write the JSON report here (default: stdout)");

    auto* replicates = app.add_subcommand("replicates", "Export replicate weights as CSV");
    replicates->add_option("-i,--input", input, "Sample CSV (stratum,psu,weight,y)")->required();
    replicates->add_option("-s,--scheme", scheme, "brr | fay-brr | paired-jk | fay-jk")->capture_default_str();
    auto* replicates_eps = replicates->add_option("-e,--epsilon", epsilon, "Fay perturbation factor in (0, 1]")->capture_default_str();
    replicates->add_option("--order", order, "Hadamard order for the BRR family");
    replicates->add_option("-o,--output", output, "Output CSV (default: stdout)");

    auto* hadamard = app.add_subcommand("hadamard", "Print a verified Hadamard matrix as CSV");
    hadamard->add_option("-n,--order", order, "Matrix order")->required();
    hadamard->add_option("-o,--output", output, "Output CSV (default: stdout)");

    auto* simulate = app.add_subcommand("simulate", "Monte Carlo coverage run from a JSON config");
    simulate->add_option("-c,--config", config, "Simulation config JSON")->required();
    simulate->add_option("-o,--output", output, "Report JSON (default: stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (estimate->parsed()) {
            repvar::cli::EstimateOptions opts;
            opts.scheme = make_scheme(scheme, epsilon, estimate_eps->count() > 0, order);
            opts.level = level;
            opts.interval.rule = repvar::parse_dof_rule(dof_rule);
            opts.interval.cap_at_h = cap_at_h;
            const auto report = repvar::cli::cmd_estimate(repvar::io::parse_sample(input), opts);
            write_output(repvar::io::to_json(report).dump(2) + "\n", output);
            std::cerr << repvar::io::summarize(report);
        } else if (replicates->parsed()) {
            const auto sample = repvar::io::parse_sample(input);
            write_output(repvar::cli::cmd_replicates(sample, make_scheme(scheme, epsilon, replicates_eps->count() > 0, order)), output);
        } else if (hadamard->parsed()) {
            write_output(repvar::cli::cmd_hadamard(order), output);
        } else if (simulate->parsed()) {
            repvar::sim::SimulationReport report;
            const auto text = repvar::cli::cmd_simulate(repvar::io::load_simulation_config(config), &report);
            if (output.empty() || output == "-") {
                std::cout << text;
                std::cerr << repvar::io::summarize(report);
            } else {
                write_output(text, output);
                std::cout << repvar::io::summarize(report);
            }
        }
    } catch (const repvar::Error& e) {
        std::cerr << "repvar: " << e.what() << '\n';
        return e.exit_code();
    } catch (const std::exception& e) {
        std::cerr << "repvar: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
