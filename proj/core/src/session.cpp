#include "modoma/session.hpp"

#include <charconv>
#include <chrono>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "modoma/error.hpp"
#include "modoma/grammar.hpp"
#include "modoma/random.hpp"
#include "modoma/text.hpp"

namespace modoma::session {

using nlohmann::json;
using nlohmann::ordered_json;
namespace fs = std::filesystem;

std::string_view to_string(TurnMode mode) {
    return mode == TurnMode::exchange ? "exchange" : "acquire-only";
}

TurnMode to_turn_mode(std::string_view name) {
    if (name == "acquire-only") return TurnMode::acquire_only;
    if (name == "exchange") return TurnMode::exchange;
    throw ConfigError("unknown turn-taking mode '" + std::string(name) + "'");
}

void validate(const SessionConfig& c) {
    if (c.grammar_spec.has_value() == c.corpus.has_value()) {
        throw ConfigError("exactly one of grammar_spec and corpus must be set");
    }
    if (c.grammar_spec && c.utterances < 1) throw ConfigError("utterances must be positive");
    const auto& p = c.params;
    if (p.window_before == 0 && p.window_after == 0) {
        throw ConfigError("window_before and window_after cannot both be 0");
    }
    if (p.k < 1) throw ConfigError("clusters must be positive");
    if (p.confidence < 0 || p.confidence > 100) throw ConfigError("confidence must be within 0..100");
    if (c.mc_iterations < 1) throw ConfigError("mc_iterations must be positive");
    if (c.max_utterance_length < 1) throw ConfigError("max_utterance_length must be positive");
    if (c.output_dir.empty()) throw ConfigError("output directory is empty");
}

namespace {

template <typename T>
T parse_number(std::string_view key, std::string_view value) {
    T out{};
    const auto v = text::trim(value);
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || p != v.data() + v.size() || v.empty()) {
        throw ConfigError("setting '" + std::string(key) + "': '" + std::string(value) + "' is not a valid number");
    }
    return out;
}

fs::path resolve(const fs::path& base, std::string_view value) {
    fs::path p{std::string(text::trim(value))};
    if (p.is_relative() && !base.empty()) p = base / p;
    return p.lexically_normal();
}

std::int64_t now_ms() {
    using namespace std::chrono;
    return duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
}

void apply_setting_at(SessionConfig& c, std::string_view key, std::string_view value, const fs::path& base) {
    auto& p = c.params;
    const auto size = [&] { return parse_number<std::size_t>(key, value); };
    if (key == "session_id") c.session_id = parse_number<std::int64_t>(key, value);
    else if (key == "grammar_spec") c.grammar_spec = resolve(base, value);
    else if (key == "corpus") c.corpus = resolve(base, value);
    else if (key == "utterances") c.utterances = size();
    else if (key == "seed") c.seed = parse_number<std::uint64_t>(key, value);
    else if (key == "window_before") p.window_before = size();
    else if (key == "window_after") p.window_after = size();
    else if (key == "min_freq") p.min_freq = size();
    else if (key == "column_min_freq") p.column_min_freq = size();
    else if (key == "clusters" || key == "k") p.k = size();
    else if (key == "confidence") p.confidence = parse_number<int>(key, value);
    else if (key == "min_corpus") p.min_corpus = size();
    else if (key == "mc_iterations") c.mc_iterations = parse_number<std::uint64_t>(key, value);
    else if (key == "mc_seed") c.mc_seed = parse_number<std::uint64_t>(key, value);
    else if (key == "out" || key == "output_dir") c.output_dir = resolve(base, value);
    else if (key == "mode") c.mode = to_turn_mode(text::trim(value));
    else if (key == "exchange_turns") c.exchange_turns = size();
    else if (key == "max_utterance_length") c.max_utterance_length = size();
    else if (key == "grammar") c.grammar = resolve(base, value);
    else if (key == "constraints") c.constraints = resolve(base, value);
    else if (key == "reference") c.reference = resolve(base, value);
    else throw ConfigError("unknown setting '" + std::string(key) + "'");
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const fs::path& path, std::string_view body) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    out << body;
    if (!out) throw IoError("write failed for '" + path.string() + "'");
}

} // namespace

void apply_setting(SessionConfig& config, std::string_view key, std::string_view value) {
    apply_setting_at(config, key, value, {});
}

SessionConfig parse_config(std::string_view text, const fs::path& base_dir) {
    SessionConfig c;
    const auto body = text::trim(text);
    if (body.starts_with("{")) {
        json doc;
        try {
            doc = json::parse(body);
        } catch (const json::exception& e) {
            throw ConfigError(std::string("malformed JSON config: ") + e.what());
        }
        for (const auto& [key, value] : doc.items()) {
            if (value.is_null()) continue;
            apply_setting_at(c, key, value.is_string() ? value.get<std::string>() : value.dump(), base_dir);
        }
    } else {
        std::istringstream in{std::string(body)};
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            const auto hash = line.find('#');
            const auto content = text::trim(std::string_view(line).substr(0, hash));
            if (content.empty()) continue;
            const auto eq = content.find('=');
            if (eq == std::string_view::npos) {
                throw ConfigError("config line " + std::to_string(line_no) + ": expected key=value");
            }
            apply_setting_at(c, text::trim(content.substr(0, eq)), text::trim(content.substr(eq + 1)), base_dir);
        }
    }
    return c;
}

SessionConfig load_config(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), fs::absolute(path).parent_path());
}

std::string to_json(const SessionConfig& c, bool include_session_id) {
    ordered_json j;
    auto path = [](const std::optional<fs::path>& p) {
        return p ? ordered_json(fs::absolute(*p).lexically_normal().string()) : ordered_json(nullptr);
    };
    if (include_session_id && c.session_id) j["session_id"] = *c.session_id;
    j["grammar_spec"] = path(c.grammar_spec);
    j["corpus"] = path(c.corpus);
    j["utterances"] = c.utterances;
    j["seed"] = c.seed;
    j["window_before"] = c.params.window_before;
    j["window_after"] = c.params.window_after;
    j["min_freq"] = c.params.min_freq;
    j["column_min_freq"] = c.params.column_min_freq;
    j["clusters"] = c.params.k;
    j["confidence"] = c.params.confidence;
    j["min_corpus"] = c.params.min_corpus;
    j["mc_iterations"] = c.mc_iterations;
    j["mc_seed"] = c.effective_mc_seed();
    j["output_dir"] = fs::absolute(c.output_dir).lexically_normal().string();
    j["mode"] = std::string(to_string(c.mode));
    j["exchange_turns"] = c.exchange_turns;
    j["max_utterance_length"] = c.max_utterance_length;
    j["grammar"] = path(c.grammar);
    j["constraints"] = path(c.constraints);
    j["reference"] = path(c.reference);
    return j.dump(2) + "\n";
}

std::int64_t next_session_id(const fs::path& output_dir) {
    fs::create_directories(output_dir);
    const fs::path marker = output_dir / ".last_session_id";
    std::int64_t last = 0;
    if (std::ifstream in(marker); in) in >> last;
    std::int64_t id = std::max(now_ms(), last + 1);
    while (fs::exists(output_dir / std::to_string(id))) ++id;
    write_file(marker, std::to_string(id) + "\n");
    return id;
}

namespace {

// Append-only NDJSON writer; every record carries `kind` and `time`.
class SessionLog {
public:
    explicit SessionLog(const fs::path& path) : out_(path, std::ios::binary | std::ios::app) {
        if (!out_) throw IoError("cannot open log '" + path.string() + "'");
    }

    void append(std::string_view kind, ordered_json payload = ordered_json::object()) {
        ordered_json rec;
        rec["kind"] = std::string(kind);
        rec["time"] = now_ms();
        for (auto& [k, v] : payload.items()) rec[k] = v;
        out_ << rec.dump() << '\n';
        out_.flush();
    }

    void artifact(std::string_view name, std::string_view role) {
        append("artifact", {{"role", std::string(role)}, {"path", std::string(name)}});
    }

private:
    std::ofstream out_;
};

ordered_json report_json(const acquisition::AcquisitionReport& r) {
    return ordered_json::parse(acquisition::to_json(r));
}

void write_artifacts(const fs::path& dir, const acquisition::AcquisitionResult& result,
                     const acquisition::Parameters& params, SessionLog& log) {
    const auto& a = result.artifacts;
    kwic::write_kwic_csv(dir / artifact::kwic, a.records, params.window());
    log.artifact(artifact::kwic, "kwic");
    kwic::write_table_csv(dir / artifact::table, a.table);
    log.artifact(artifact::table, "frequency_table");
    cluster::write_matrix_csv(dir / artifact::distance, a.distance);
    log.artifact(artifact::distance, "distance_matrix");
    cluster::export_dendrogram(a.dendrogram, cluster::DendrogramFormat::json, dir / artifact::dendrogram_json);
    log.artifact(artifact::dendrogram_json, "dendrogram");
    cluster::export_dendrogram(a.dendrogram, cluster::DendrogramFormat::newick, dir / artifact::dendrogram_newick);
    log.artifact(artifact::dendrogram_newick, "dendrogram");
    cluster::export_dendrogram(a.dendrogram, cluster::DendrogramFormat::svg, dir / artifact::dendrogram_svg);
    log.artifact(artifact::dendrogram_svg, "dendrogram");
    acquisition::save_report(result.report, dir / artifact::report);
    log.artifact(artifact::report, "report");
}

void exchange_turns(const SessionConfig& config, const grammar::Grammar& g,
                    const std::vector<Utterance>& mother, std::int64_t session_id, SessionLog& log) {
    for (std::size_t turn = 0; turn < config.exchange_turns; ++turn) {
        // Daughter speaks.
        try {
            auto u = grammar::generate(g, config.max_utterance_length, split_seed(config.seed, 1000 + turn));
            u.session_id = session_id;
            u.index = turn;
            log.append("utterance", {{"source", "daughter"}, {"session_id", session_id},
                                     {"index", turn}, {"text", u.text()}});
        } catch (const GenerationError& e) {
            log.append("warning", {{"message", std::string("daughter could not generate: ") + e.what()}});
        }

        // Mother speaks; the daughter judges and annotates.
        if (turn >= mother.size()) continue;
        const auto& m = mother[turn];
        const auto parsed = grammar::parse(g, m.tokens);
        ordered_json ann = ordered_json::array();
        for (const auto& a : grammar::annotate(g, m.tokens)) {
            ordered_json props = ordered_json::array();
            for (const auto& p : a.properties) props.push_back(p.type + ":" + p.value);
            ann.push_back({{"token", a.token}, {"known", a.known}, {"properties", std::move(props)}});
        }
        log.append("judgment", {{"source", "mother"}, {"index", m.index}, {"text", m.text()},
                                {"judgment", std::string(grammar::to_string(parsed.judgment))},
                                {"derivations", parsed.derivations.size()},
                                {"unknown_positions", parsed.unknown_positions},
                                {"annotation", std::move(ann)}});
        // Feedback from mother to daughter is not modelled.
        log.append("feedback", {{"turn", turn}, {"action", "none"}});
    }
}

std::string stem(const fs::path& dir) {
    auto name = fs::absolute(dir).lexically_normal().filename().string();
    if (name.empty()) name = fs::absolute(dir).lexically_normal().parent_path().filename().string();
    return name;
}

} // namespace

SessionOutcome run_experiment(const SessionConfig& config) {
    validate(config);
    SessionOutcome outcome;
    outcome.session_id = config.session_id ? *config.session_id : next_session_id(config.output_dir);
    outcome.directory = config.output_dir / std::to_string(outcome.session_id);
    if (fs::exists(outcome.directory / artifact::log)) {
        throw ConfigError("session directory '" + outcome.directory.string() + "' already holds a session");
    }
    fs::create_directories(outcome.directory);
    const fs::path& dir = outcome.directory;
    const std::int64_t sid = outcome.session_id;

    SessionLog log(dir / artifact::log);
    write_file(dir / artifact::config, to_json(config));
    log.append("session", {{"session_id", sid}, {"directory", fs::absolute(dir).string()}});
    log.append("parameters", {{"config", ordered_json::parse(to_json(config))}});

    try {
        std::vector<Utterance> corpus;
        if (config.grammar_spec) {
            const auto model = mother::load_generator(*config.grammar_spec);
            log.append("mother", {{"source", "generator"}, {"grammar_spec", fs::absolute(*config.grammar_spec).string()},
                                  {"utterances", config.utterances}, {"seed", config.seed}});
            corpus = mother::generate_utterances(model, config.utterances, config.seed, sid);
        } else {
            log.append("mother", {{"source", "corpus"}, {"corpus", fs::absolute(*config.corpus).string()}});
            corpus = mother::ingest_corpus(*config.corpus, sid);
        }
        mother::write_corpus(corpus, dir / artifact::corpus);
        log.artifact(artifact::corpus, "corpus");
        for (const auto& u : corpus) {
            log.append("utterance", {{"source", std::string(to_string(u.source))}, {"session_id", sid},
                                     {"index", u.index}, {"text", u.text()}});
        }

        grammar::Grammar g = config.grammar ? grammar::load_grammar(*config.grammar) : grammar::Grammar{};
        if (config.constraints) {
            const auto table = grammar::constraints_from_json(read_file(*config.constraints));
            for (const auto& [feature, rule] : table.rules()) g.constraints().set(feature, rule);
        }
        grammar::save_grammar(g, dir / artifact::grammar_before);
        log.artifact(artifact::grammar_before, "grammar_snapshot_before");

        const std::size_t overwrites_before = g.overwrite_log().size();
        auto result = acquisition::acquire_categories(g, corpus, config.params, sid);
        for (const auto& w : result.artifacts.warnings) log.append("warning", {{"message", w}});
        for (std::size_t i = overwrites_before; i < g.overwrite_log().size(); ++i) {
            const auto& o = g.overwrite_log()[i];
            log.append("overwrite", {{"entry", o.entry.str()}, {"feature", o.feature},
                                     {"old_value", o.old_value}, {"new_value", o.new_value},
                                     {"confidence", o.confidence}});
        }
        write_artifacts(dir, result, config.params, log);
        log.append("report", {{"report", report_json(result.report)}});
        grammar::save_grammar(g, dir / artifact::grammar_after);
        log.artifact(artifact::grammar_after, "grammar_snapshot_after");

        if (config.mode == TurnMode::exchange) exchange_turns(config, g, corpus, sid, log);

        if (config.reference) {
            const auto reference = load_session_report(*config.reference);
            const auto cmp = compare_reports(result.report, reference, config.mc_iterations,
                                             config.effective_mc_seed());
            stats::write_crosstab_csv(dir / "crosstab_reference.csv", cmp.crosstab);
            log.artifact("crosstab_reference.csv", "crosstab");
            write_file(dir / "comparison_reference.json",
                       stats::results_json(cmp.crosstab, cmp.overall, cmp.posthoc));
            log.artifact("comparison_reference.json", "statistics");
            log.append("statistics", {{"reference", fs::absolute(*config.reference).string()},
                                      {"method", std::string(to_string(cmp.overall.method))},
                                      {"p", cmp.overall.p}});
        }
        outcome.report = std::move(result.report);
    } catch (const Error& e) {
        log.append("error", {{"message", e.what()}});
        throw;
    } catch (const std::exception& e) {
        log.append("error", {{"message", e.what()}});
        throw;
    }
    log.append("end", {{"session_id", sid}});
    return outcome;
}

Comparison compare_reports(const acquisition::AcquisitionReport& a, const acquisition::AcquisitionReport& b,
                           std::uint64_t mc_iterations, std::uint64_t seed) {
    Comparison c;
    c.crosstab = stats::crosstab(a.assignment(), b.assignment(), a.feature, b.feature);
    if (c.crosstab.counts.rows < 2 || c.crosstab.counts.cols < 2) {
        throw InsufficientDataError("comparison needs at least 2 categories in each session");
    }
    c.overall = stats::fisher_mc(c.crosstab.counts, mc_iterations, seed);
    c.posthoc = stats::posthoc_pairwise(c.crosstab.counts);
    return c;
}

acquisition::AcquisitionReport load_session_report(const fs::path& path) {
    const fs::path file = fs::is_directory(path) ? path / artifact::report : path;
    if (!fs::exists(file)) throw DataError("no acquisition report at '" + file.string() + "'");
    return acquisition::load_report(file);
}

Comparison compare_sessions(const fs::path& dir_a, const fs::path& dir_b, std::uint64_t mc_iterations,
                            std::uint64_t seed) {
    const auto a = load_session_report(dir_a);
    const auto b = load_session_report(dir_b);
    const auto cmp = compare_reports(a, b, mc_iterations, seed);
    const auto body = stats::results_json(cmp.crosstab, cmp.overall, cmp.posthoc);
    for (const auto& [dir, other] : {std::pair{dir_a, dir_b}, std::pair{dir_b, dir_a}}) {
        const auto tag = stem(other);
        write_file(dir / ("comparison_" + tag + ".json"), body);
        stats::write_crosstab_csv(dir / ("crosstab_" + tag + ".csv"), cmp.crosstab);
        SessionLog log(dir / artifact::log);
        log.append("statistics", {{"compared_with", fs::absolute(other).lexically_normal().string()},
                                  {"rows", fs::absolute(dir_a).lexically_normal().string()},
                                  {"method", std::string(to_string(cmp.overall.method))},
                                  {"p", cmp.overall.p},
                                  {"iterations", mc_iterations},
                                  {"seed", seed},
                                  {"artifact", "comparison_" + tag + ".json"}});
    }
    return cmp;
}

std::vector<LogRecord> read_log(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open log '" + path.string() + "'");
    std::vector<LogRecord> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        try {
            const auto j = json::parse(line);
            out.push_back({j.at("kind").get<std::string>(), line});
        } catch (const json::exception& e) {
            throw DataError(std::string("malformed log line: ") + e.what());
        }
    }
    return out;
}

} // namespace modoma::session
