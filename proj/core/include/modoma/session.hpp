#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "modoma/acquisition.hpp"
#include "modoma/stats.hpp"

namespace modoma::session {

enum class TurnMode { acquire_only, exchange };

std::string_view to_string(TurnMode mode);
TurnMode to_turn_mode(std::string_view name);

/// Everything needed to run (and rerun) one session.
struct SessionConfig {
    /// Fixed id; normally left empty and derived from the wall clock.
    std::optional<std::int64_t> session_id;

    /// Exactly one corpus source: a generator spec or a corpus file.
    std::optional<std::filesystem::path> grammar_spec;
    std::optional<std::filesystem::path> corpus;
    std::size_t utterances = 10000;
    std::uint64_t seed = 1;

    acquisition::Parameters params;

    std::uint64_t mc_iterations = 500000;
    std::optional<std::uint64_t> mc_seed;  // defaults to `seed`

    std::filesystem::path output_dir = "sessions";
    TurnMode mode = TurnMode::acquire_only;
    std::size_t exchange_turns = 10;
    std::size_t max_utterance_length = 12;

    /// Optional starting grammar for the daughter.
    std::optional<std::filesystem::path> grammar;
    /// Optional constraint table applied to the daughter grammar.
    std::optional<std::filesystem::path> constraints;
    /// Earlier session directory (or report.json) to compare against.
    std::optional<std::filesystem::path> reference;

    std::uint64_t effective_mc_seed() const { return mc_seed.value_or(seed); }

    friend bool operator==(const SessionConfig&, const SessionConfig&) = default;
};

/// Throws ConfigError describing the first invalid field.
void validate(const SessionConfig& config);

/// Sets one field from its textual form. Keys match the JSON field names
/// (`clusters`, `min_freq`, `window_before`, ...). Throws ConfigError.
void apply_setting(SessionConfig& config, std::string_view key, std::string_view value);

/// JSON object or `key=value` lines (`#` comments). Relative paths resolve
/// against `base_dir`.
SessionConfig parse_config(std::string_view text, const std::filesystem::path& base_dir = {});
SessionConfig load_config(const std::filesystem::path& path);

/// Replayable JSON form; `session_id` is omitted unless `include_session_id`.
std::string to_json(const SessionConfig& config, bool include_session_id = false);

/// Millisecond wall-clock id, bumped past the last id handed out for
/// `output_dir` so ids strictly increase across sequential runs.
std::int64_t next_session_id(const std::filesystem::path& output_dir);

/// File names of the per-session artifacts.
namespace artifact {
inline constexpr std::string_view config = "config.json";
inline constexpr std::string_view log = "session.log.jsonl";
inline constexpr std::string_view corpus = "corpus.txt";
inline constexpr std::string_view kwic = "kwic.csv";
inline constexpr std::string_view table = "table.csv";
inline constexpr std::string_view distance = "distance.csv";
inline constexpr std::string_view dendrogram_json = "dendrogram.json";
inline constexpr std::string_view dendrogram_newick = "dendrogram.newick";
inline constexpr std::string_view dendrogram_svg = "dendrogram.svg";
inline constexpr std::string_view report = "report.json";
inline constexpr std::string_view grammar_before = "grammar_before.json";
inline constexpr std::string_view grammar_after = "grammar_after.json";
} // namespace artifact

struct SessionOutcome {
    std::int64_t session_id = 0;
    std::filesystem::path directory;
    acquisition::AcquisitionReport report;
};

/// Mother generation/ingestion, acquisition, grammar update, optional
/// exchange turns and statistics. Every artifact lands in
/// `output_dir/<session id>/`; every step is appended to the session log.
/// Errors are logged before they propagate.
SessionOutcome run_experiment(const SessionConfig& config);

struct Comparison {
    stats::Crosstab crosstab;
    stats::TestResult overall;
    stats::PosthocResult posthoc;
};

/// Crosstab (rows: a, columns: b), Monte-Carlo Fisher and Bonferroni
/// post-hoc over two acquisition reports.
Comparison compare_reports(const acquisition::AcquisitionReport& a,
                           const acquisition::AcquisitionReport& b, std::uint64_t mc_iterations,
                           std::uint64_t seed);

/// compare_reports over two session directories. Writes
/// `comparison_<other>.json` and `crosstab_<other>.csv` into both and
/// appends a statistics record to both logs. Throws DataError when a
/// directory has no report.
Comparison compare_sessions(const std::filesystem::path& dir_a, const std::filesystem::path& dir_b,
                            std::uint64_t mc_iterations, std::uint64_t seed);

/// Report from a session directory or a report.json path.
acquisition::AcquisitionReport load_session_report(const std::filesystem::path& path);

struct LogRecord {
    std::string kind;
    std::string json;  // full record
};

std::vector<LogRecord> read_log(const std::filesystem::path& path);

} // namespace modoma::session
