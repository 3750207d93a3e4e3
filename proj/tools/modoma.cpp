// modoma: command-line front end for running and comparing acquisition sessions.

#include <filesystem>
#include <functional>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "modoma/cluster.hpp"
#include "modoma/error.hpp"
#include "modoma/session.hpp"

namespace fs = std::filesystem;
using namespace modoma;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;

// Flags left unset keep the value from the config file (or the default).
struct RunFlags {
    std::optional<std::string> config;
    std::optional<std::size_t> utterances, window_before, window_after, min_freq, column_min_freq,
        clusters, min_corpus, exchange_turns, max_utterance_length;
    std::optional<int> confidence;
    std::optional<std::uint64_t> mc_iterations, seed, mc_seed;
    std::optional<std::int64_t> session_id;
    std::optional<std::string> out, corpus, grammar_spec, mode, grammar, constraints, reference;
};

session::SessionConfig build_config(const RunFlags& f) {
    session::SessionConfig c = f.config ? session::load_config(*f.config) : session::SessionConfig{};
    if (f.corpus) {
        c.corpus = *f.corpus;
        c.grammar_spec.reset();
    }
    if (f.grammar_spec) {
        c.grammar_spec = *f.grammar_spec;
        c.corpus.reset();
    }
    auto set = [&](const char* key, const auto& v) {
        if (!v) return;
        if constexpr (std::is_same_v<std::decay_t<decltype(*v)>, std::string>) {
            session::apply_setting(c, key, *v);
        } else {
            session::apply_setting(c, key, std::to_string(*v));
        }
    };
    set("utterances", f.utterances);
    set("window_before", f.window_before);
    set("window_after", f.window_after);
    set("min_freq", f.min_freq);
    set("column_min_freq", f.column_min_freq);
    set("clusters", f.clusters);
    set("min_corpus", f.min_corpus);
    set("confidence", f.confidence);
    set("mc_iterations", f.mc_iterations);
    set("seed", f.seed);
    set("mc_seed", f.mc_seed);
    set("session_id", f.session_id);
    set("output_dir", f.out);
    set("mode", f.mode);
    set("exchange_turns", f.exchange_turns);
    set("max_utterance_length", f.max_utterance_length);
    set("grammar", f.grammar);
    set("constraints", f.constraints);
    set("reference", f.reference);
    return c;
}

int run_guarded(const std::function<void()>& body) {
    try {
        body();
        return 0;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const PreconditionError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const Error& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return kExitData;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return kExitData;
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Mother/daughter language acquisition laboratory"};
    app.require_subcommand(1);

    RunFlags rf;
    auto* run = app.add_subcommand("run", "Run one acquisition session");
    run->add_option("--config", rf.config, "Config file (key=value or JSON); flags override it");
    run->add_option("--utterances", rf.utterances, "Utterances to generate (default 10000)");
    run->add_option("--window-before", rf.window_before, "Context words before the key word (default 2)");
    run->add_option("--window-after", rf.window_after, "Context words after the key word (default 2)");
    run->add_option("--min-freq", rf.min_freq, "Minimum key-word frequency (default 10)");
    run->add_option("--column-min-freq", rf.column_min_freq, "Minimum context-column total (default 0)");
    run->add_option("--clusters", rf.clusters, "Number of categories to cut (default 14)");
    run->add_option("--min-corpus", rf.min_corpus, "Fewest utterances acquisition runs on (default 10000)");
    run->add_option("--confidence", rf.confidence, "Confidence of acquired properties (default 60)");
    run->add_option("--mc-iterations", rf.mc_iterations, "Monte-Carlo Fisher samples (default 500000)");
    run->add_option("--seed", rf.seed, "Generator seed (default 1)");
    run->add_option("--mc-seed", rf.mc_seed, "Monte-Carlo seed (default: --seed)");
    run->add_option("--session-id", rf.session_id, "Fixed session id instead of the clock");
    run->add_option("--out", rf.out, "Output directory (default ./sessions)");
    auto* corpus_opt = run->add_option("--corpus", rf.corpus, "Corpus file, one utterance per line");
    auto* spec_opt = run->add_option("--grammar-spec", rf.grammar_spec, "Mother generator grammar spec");
    corpus_opt->excludes(spec_opt);
    run->add_option("--mode", rf.mode, "acquire-only | exchange");
    run->add_option("--exchange-turns", rf.exchange_turns, "Turns in exchange mode (default 10)");
    run->add_option("--max-utterance-length", rf.max_utterance_length, "Daughter utterance length cap");
    run->add_option("--grammar", rf.grammar, "Starting daughter grammar (JSON)");
    run->add_option("--constraints", rf.constraints, "Constraint table (JSON)");
    run->add_option("--reference", rf.reference, "Session directory to compare the result with");

    std::string dir_a, dir_b;
    std::uint64_t cmp_iterations = 500000, cmp_seed = 1;
    auto* compare = app.add_subcommand("compare", "Compare the categories of two sessions");
    compare->add_option("dirA", dir_a, "First session directory (crosstab rows)")->required();
    compare->add_option("dirB", dir_b, "Second session directory (crosstab columns)")->required();
    compare->add_option("--mc-iterations", cmp_iterations, "Monte-Carlo Fisher samples");
    compare->add_option("--seed", cmp_seed, "Monte-Carlo seed");

    std::string dendro_dir, dendro_format = "newick";
    std::optional<std::string> dendro_output;
    auto* dendro = app.add_subcommand("dendrogram", "Export a session dendrogram");
    dendro->add_option("dir", dendro_dir, "Session directory")->required();
    dendro->add_option("--format", dendro_format, "newick | svg | json")
        ->check(CLI::IsMember({"newick", "svg", "json"}));
    dendro->add_option("-o,--output", dendro_output, "Output file (default <dir>/dendrogram.<format>)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    if (*run) {
        return run_guarded([&] {
            const auto outcome = session::run_experiment(build_config(rf));
            std::cout << "session " << outcome.session_id << " -> " << outcome.directory.string() << '\n';
            for (const auto& g : outcome.report.clusters) {
                std::cout << "  " << g.id << "  " << outcome.report.feature << ':' << g.value << "  ";
                for (std::size_t i = 0; i < g.words.size(); ++i) std::cout << (i ? ", " : "") << g.words[i];
                std::cout << '\n';
            }
        });
    }
    if (*compare) {
        return run_guarded([&] {
            const auto cmp = session::compare_sessions(dir_a, dir_b, cmp_iterations, cmp_seed);
            std::cout << "Fisher (Monte Carlo, B=" << cmp_iterations << "): p = " << cmp.overall.p << '\n';
            std::size_t significant = 0;
            for (const auto& p : cmp.posthoc.pairs) significant += p.p < 0.05;
            std::cout << "post-hoc: " << significant << " of " << cmp.posthoc.pairs.size()
                      << " subtables significant after Bonferroni (m=" << cmp.posthoc.correction_factor << ")\n";
        });
    }
    return run_guarded([&] {
        const auto format = cluster::parse_dendrogram_format(dendro_format);
        const fs::path dir{dendro_dir};
        const auto d = cluster::load_dendrogram_json(dir / session::artifact::dendrogram_json);
        const fs::path target =
            dendro_output ? fs::path(*dendro_output) : dir / ("dendrogram." + std::string(cluster::extension(format)));
        cluster::export_dendrogram(d, format, target);
        std::cout << target.string() << '\n';
    });
}
