#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace modoma {

enum class Agent { mother, daughter };

std::string_view to_string(Agent agent);

/// One exchanged utterance. Tokens never contain whitespace.
struct Utterance {
    std::vector<std::string> tokens;
    Agent source = Agent::mother;
    std::int64_t session_id = 0;
    std::size_t index = 0;

    std::string text() const;

    friend bool operator==(const Utterance&, const Utterance&) = default;
};

std::size_t total_tokens(const std::vector<Utterance>& corpus);

} // namespace modoma

namespace modoma::mother {

struct Rule {
    std::string lhs;
    std::vector<std::string> rhs;
    double weight = 1.0;
};

struct WordChoice {
    std::string token;
    double weight = 1.0;
};

/// Weighted context-free sampler that stands in for the adult language model.
///
/// `categories` is the ground-truth token -> label map. It exists for
/// evaluation only; nothing on the learner side reads it.
struct GeneratorModel {
    std::vector<Rule> rules;
    std::map<std::string, std::vector<WordChoice>> lexicon;
    std::string start;
    std::map<std::string, std::string> categories;

    std::set<std::string> tokens() const;
    std::set<std::string> category_labels() const;
};

/// Maximum nesting depth of a single derivation before it is abandoned.
inline constexpr std::size_t kMaxDerivationDepth = 64;
/// Abandoned derivations are resampled this many times before giving up.
inline constexpr std::size_t kMaxDerivationRetries = 1000;
/// Upper bound on the symbols a derivation may expand.
inline constexpr std::size_t kMaxDerivationSymbols = 4096;

/// Parses the line-oriented grammar-spec format:
///
///     # comment
///     START S
///     RULE S -> NP VP @1
///     WORD NP ik @2
///     CAT ik pron
///
/// Weights default to 1 when the `@weight` suffix is omitted. Tokens without
/// a CAT line take their WORD class as ground-truth category.
///
/// Throws SpecParseError (with line number) on syntax errors and
/// ValidationError naming the offending symbol when an invariant fails.
GeneratorModel parse_generator(std::string_view spec);
GeneratorModel load_generator(const std::filesystem::path& path);

/// Checks every model invariant; throws ValidationError.
void validate(const GeneratorModel& model);

/// Samples `n` utterances. Pure function of (model, n, seed).
std::vector<Utterance> generate_utterances(const GeneratorModel& model, std::size_t n,
                                           std::uint64_t seed, std::int64_t session_id = 0);

/// One utterance per nonempty line, tokenized with kwic::tokenize.
std::vector<Utterance> read_corpus(std::istream& in, std::int64_t session_id = 0);
std::vector<Utterance> ingest_corpus(const std::filesystem::path& path,
                                     std::int64_t session_id = 0);

/// Writes one utterance per line, tokens separated by single spaces.
void write_corpus(const std::vector<Utterance>& corpus, const std::filesystem::path& path);

} // namespace modoma::mother
