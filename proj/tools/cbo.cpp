// Command-line front end: cbo <subcommand> --config <path> [options].
// Exit codes: 0 success, 1 configuration or precondition error, 2 numeric failure.

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "cbo.hpp"

namespace {

namespace ex = cbo::experiments;

int execute(const std::string& kind, const std::string& config_path, const std::vector<std::string>& overrides,
            const std::optional<std::uint64_t>& seed, const std::string& out, bool allow_supercritical,
            std::size_t workers) {
    ex::json doc = config_path.empty() ? ex::json::object() : ex::load_config_document(config_path);
    if (doc.contains("kind") && doc["kind"].is_string() && doc["kind"].get<std::string>() != kind)
        throw cbo::ConfigError("config kind '" + doc["kind"].get<std::string>() + "' does not match subcommand '" +
                               kind + "'");
    doc["kind"] = kind;
    for (const auto& o : overrides) ex::apply_override(doc, o);
    if (seed) doc["seed"] = *seed;
    if (allow_supercritical) doc["allow_supercritical"] = true;
    if (!out.empty()) doc["output_dir"] = out;
    const ex::ExperimentConfig cfg = ex::parse_config(doc);

    const ex::ExperimentResult result = ex::run_experiment(cfg, ex::RunOptions{workers});
    ex::write_result(result, cfg.output_dir);

    if (result.constants && cfg.kind == ex::ExperimentKind::constants) std::cout << cbo::to_text(*result.constants);
    for (const auto& [name, fit] : result.fits)
        std::cout << "fit " << name << ": estimate = " << ex::format_double(fit.estimate)
                  << ", r_squared = " << ex::format_double(fit.r_squared) << "\n";
    for (const auto& note : result.notes) std::cerr << "note: " << note << "\n";
    std::cout << "wrote " << cfg.output_dir << " (" << ex::format_double(result.wall_seconds) << " s)\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Consensus-based optimization particle laboratory"};
    app.set_version_flag("--version", std::string(cbo::kVersion));
    app.require_subcommand(1);

    std::string config_path, out;
    std::vector<std::string> overrides;
    std::uint64_t seed_value = 0;
    bool allow_supercritical = false;
    std::size_t workers = 0;

    for (const auto& [name, kind] : ex::experiment_kinds()) {
        CLI::App* sub = app.add_subcommand(name, "run the '" + name + "' experiment");
        sub->add_option("--config", config_path, "JSON config file");
        sub->add_option("--seed", seed_value, "master seed (overrides the config)");
        sub->add_option("--out", out, "output directory (overrides the config)");
        sub->add_option("--override", overrides, "dotted key=value assignment, repeatable");
        sub->add_flag("--allow-supercritical", allow_supercritical, "run even when sigma >= sigma_tilde");
        sub->add_option("--workers", workers, "worker threads (0 = all cores); results do not depend on it");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    const std::string kind = app.get_subcommands().front()->get_name();
    CLI::App* sub = app.get_subcommands().front();
    const std::optional<std::uint64_t> seed =
        sub->count("--seed") > 0 ? std::optional<std::uint64_t>(seed_value) : std::nullopt;
    try {
        return execute(kind, config_path, overrides, seed, out, allow_supercritical, workers);
    } catch (const cbo::NumericError& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return 2;
    } catch (const cbo::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
