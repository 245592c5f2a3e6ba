#pragma once

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rsf/cli/commands.hpp"

namespace rsf::cli {

enum ExitCode : int { kOk = 0, kInternal = 1, kInputError = 2, kNumericError = 3 };

/// Values given on the command line; each one overrides the config file.
struct Overrides {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<int> runs;
    std::optional<int> jobs;
    std::optional<std::string> out;
    std::vector<std::string> assignments;  ///< "section.key=value"
};

inline util::KeyValueConfig assemble_config(const Overrides& o) {
    util::KeyValueConfig cfg;
    if (!o.config_path.empty()) cfg = util::KeyValueConfig::load(o.config_path);
    for (const auto& assignment : o.assignments) {
        const auto eq = assignment.find('=');
        const auto dot = assignment.find('.');
        if (eq == std::string::npos || dot == std::string::npos || dot > eq) {
            throw InvalidArgument("--set expects section.key=value, got '" + assignment + "'");
        }
        cfg.set(util::trim(assignment.substr(0, dot)), util::trim(assignment.substr(dot + 1, eq - dot - 1)),
                util::trim(assignment.substr(eq + 1)));
    }
    if (o.seed) cfg.set("run", "seed", std::to_string(*o.seed));
    if (o.runs) cfg.set("run", "n_runs", std::to_string(*o.runs));
    if (o.jobs) cfg.set("run", "jobs", std::to_string(*o.jobs));
    if (o.out) cfg.set("run", "out", *o.out);
    return cfg;
}

inline void add_common_flags(CLI::App* cmd, Overrides& o) {
    cmd->add_option("--config", o.config_path, "Experiment config file (key = value with [section] headers)");
    cmd->add_option("--seed", o.seed, "Base seed of the run sweep");
    cmd->add_option("--runs", o.runs, "Number of seeds per configuration");
    cmd->add_option("--jobs", o.jobs, "Parallel grid cells");
    cmd->add_option("--out", o.out, "Output directory");
    cmd->add_option("--set", o.assignments, "Override one setting, e.g. --set probe.epochs=50")->take_all();
}

/**
 * @brief Parse arguments, run one subcommand and map failures to exit codes:
 * 2 for configuration or input errors, 3 for numeric failures.
 */
inline int run(int argc, char** argv) {
    CLI::App app{"Random set-function embeddings for point clouds"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kToolVersion);
    Overrides o;
    std::string table_name;

    struct Entry {
        std::string name;
        std::string help;
    };
    const std::vector<Entry> entries{{"prepare", "Build dataset caches for the train and test splits"},
                                     {"embed", "Embed both splits with the configured encoder"},
                                     {"probe", "Train the configured probe for every run seed"},
                                     {"cluster", "K-Means++ on embeddings, scored by AMI"},
                                     {"tsne", "Exact t-SNE of test embeddings"},
                                     {"reconstruct", "Train a point-cloud decoder on frozen embeddings"},
                                     {"table", "Run one table grid: table1 .. table5"}};
    std::vector<CLI::App*> commands;
    for (const auto& e : entries) {
        CLI::App* cmd = app.add_subcommand(e.name, e.help);
        add_common_flags(cmd, o);
        if (e.name == "table") {
            cmd->add_option("name", table_name, "table1, table2, table3, table4 or table5")->required();
        }
        commands.push_back(cmd);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kInputError;
    }

    try {
        const Context ctx = make_context(assemble_config(o));
        std::filesystem::create_directories(ctx.out());
        if (commands[0]->parsed()) return cmd_prepare(ctx);
        if (commands[1]->parsed()) return cmd_embed(ctx);
        if (commands[2]->parsed()) return cmd_probe(ctx);
        if (commands[3]->parsed()) return cmd_cluster(ctx);
        if (commands[4]->parsed()) return cmd_tsne(ctx);
        if (commands[5]->parsed()) return cmd_reconstruct(ctx);
        if (commands[6]->parsed()) return cmd_table(ctx, table_name);
        return kInputError;
    } catch (const NumericError& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return kNumericError;
    } catch (const DegenerateStatistics& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return kNumericError;
    } catch (const FormatError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kInputError;
    } catch (const std::invalid_argument& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kInputError;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kInputError;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return kInternal;
    }
}

}  // namespace rsf::cli
