#include "modoma/mother.hpp"

#include <cctype>
#include <cmath>
#include <deque>
#include <fstream>
#include <optional>
#include <sstream>
#include <unordered_map>

#include "modoma/error.hpp"
#include "modoma/kwic.hpp"
#include "modoma/random.hpp"
#include "modoma/text.hpp"

namespace modoma {

std::string_view to_string(Agent agent) {
    return agent == Agent::mother ? "mother" : "daughter";
}

std::string Utterance::text() const {
    std::string out;
    for (const auto& t : tokens) {
        if (!out.empty()) out += ' ';
        out += t;
    }
    return out;
}

std::size_t total_tokens(const std::vector<Utterance>& corpus) {
    std::size_t n = 0;
    for (const auto& u : corpus) n += u.tokens.size();
    return n;
}

} // namespace modoma

namespace modoma::mother {

std::set<std::string> GeneratorModel::tokens() const {
    std::set<std::string> out;
    for (const auto& [cls, words] : lexicon) {
        for (const auto& w : words) out.insert(w.token);
    }
    return out;
}

std::set<std::string> GeneratorModel::category_labels() const {
    std::set<std::string> out;
    for (const auto& [tok, label] : categories) out.insert(label);
    return out;
}

namespace {

std::vector<std::string> split_words(std::string_view line) {
    std::vector<std::string> words;
    std::istringstream in{std::string(line)};
    std::string w;
    while (in >> w) words.push_back(w);
    return words;
}

std::string_view strip_comment(std::string_view line) {
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '#' && (i == 0 || std::isspace(static_cast<unsigned char>(line[i - 1])))) {
            return line.substr(0, i);
        }
    }
    return line;
}

double parse_weight(std::string_view word, std::size_t line_no) {
    const std::string digits(word.substr(1));
    try {
        std::size_t used = 0;
        const double w = std::stod(digits, &used);
        if (used != digits.size()) throw std::invalid_argument(digits);
        return w;
    } catch (const std::exception&) {
        throw SpecParseError(line_no, "malformed weight '" + std::string(word) + "'");
    }
}

// Splits off a trailing `@weight` word, if present.
double take_weight(std::vector<std::string>& words, std::size_t line_no) {
    if (!words.empty() && !words.back().empty() && words.back()[0] == '@') {
        const double w = parse_weight(words.back(), line_no);
        words.pop_back();
        return w;
    }
    return 1.0;
}

} // namespace

GeneratorModel parse_generator(std::string_view spec) {
    GeneratorModel model;
    std::map<std::string, std::string> explicit_categories;
    std::map<std::string, std::string> first_class;
    bool have_start = false;

    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= spec.size()) {
        const auto eol = spec.find('\n', pos);
        const auto raw = spec.substr(pos, eol == std::string_view::npos ? spec.size() - pos : eol - pos);
        pos = eol == std::string_view::npos ? spec.size() + 1 : eol + 1;
        ++line_no;

        auto words = split_words(strip_comment(raw));
        if (words.empty()) continue;
        const std::string keyword = words.front();
        words.erase(words.begin());

        if (keyword == "START") {
            if (words.size() != 1) throw SpecParseError(line_no, "START takes exactly one symbol");
            if (have_start) throw SpecParseError(line_no, "duplicate START");
            model.start = words[0];
            have_start = true;
        } else if (keyword == "RULE") {
            const double w = take_weight(words, line_no);
            if (words.size() < 2 || words[1] != "->") {
                throw SpecParseError(line_no, "expected 'RULE <LHS> -> <RHS...> @<weight>'");
            }
            Rule rule{words[0], {words.begin() + 2, words.end()}, w};
            model.rules.push_back(std::move(rule));
        } else if (keyword == "WORD") {
            const double w = take_weight(words, line_no);
            if (words.size() != 2) throw SpecParseError(line_no, "expected 'WORD <class> <token> @<weight>'");
            model.lexicon[words[0]].push_back({words[1], w});
            first_class.emplace(words[1], words[0]);
        } else if (keyword == "CAT") {
            if (words.size() != 2) throw SpecParseError(line_no, "expected 'CAT <token> <label>'");
            if (!explicit_categories.emplace(words[0], words[1]).second) {
                throw SpecParseError(line_no, "duplicate CAT for '" + words[0] + "'");
            }
        } else {
            throw SpecParseError(line_no, "unknown directive '" + keyword + "'");
        }
    }
    if (!have_start) throw ValidationError("grammar spec has no START symbol");

    for (const auto& [token, label] : explicit_categories) {
        if (!first_class.contains(token)) {
            throw ValidationError("CAT given for '" + token + "', which no WORD line defines");
        }
    }
    model.categories = first_class;
    for (const auto& [token, label] : explicit_categories) model.categories[token] = label;

    validate(model);
    return model;
}

GeneratorModel load_generator(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open grammar spec '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_generator(buf.str());
}

void validate(const GeneratorModel& model) {
    std::map<std::string, double> totals;
    auto add_weight = [&](const std::string& symbol, double w) {
        if (!std::isfinite(w) || w < 0.0) {
            throw ValidationError("nonterminal '" + symbol + "' has invalid weight " +
                                  text::format_double(w));
        }
        totals[symbol] += w;
    };
    for (const auto& rule : model.rules) add_weight(rule.lhs, rule.weight);
    for (const auto& [cls, words] : model.lexicon) {
        for (const auto& w : words) {
            if (w.token.empty() || text::contains_whitespace(w.token)) {
                throw ValidationError("class '" + cls + "' has an empty or whitespace token");
            }
            add_weight(cls, w.weight);
        }
    }
    for (const auto& [symbol, total] : totals) {
        if (!(total > 0.0) || !std::isfinite(total)) {
            throw ValidationError("nonterminal '" + symbol + "' has no positive finite weight total");
        }
    }

    // Every symbol reachable from START must expand to something.
    std::set<std::string> seen{model.start};
    std::deque<std::string> queue{model.start};
    while (!queue.empty()) {
        const std::string symbol = queue.front();
        queue.pop_front();
        if (!totals.contains(symbol)) {
            throw ValidationError("nonterminal '" + symbol + "' has no rule or lexicon entry");
        }
        for (const auto& rule : model.rules) {
            if (rule.lhs != symbol) continue;
            for (const auto& s : rule.rhs) {
                if (seen.insert(s).second) queue.push_back(s);
            }
        }
    }

    for (const auto& token : model.tokens()) {
        if (!model.categories.contains(token)) {
            throw ValidationError("token '" + token + "' has no ground-truth category");
        }
    }
}

namespace {

// Alternatives for one nonterminal: rule expansions first, then words.
struct Expansion {
    std::vector<double> weights;
    std::vector<const Rule*> rules;
    std::vector<const WordChoice*> words;
};

class Sampler {
public:
    explicit Sampler(const GeneratorModel& model) {
        for (const auto& rule : model.rules) table_[rule.lhs].rules.push_back(&rule);
        for (const auto& [cls, words] : model.lexicon) {
            for (const auto& w : words) table_[cls].words.push_back(&w);
        }
        for (auto& [symbol, e] : table_) {
            for (const Rule* r : e.rules) e.weights.push_back(r->weight);
            for (const WordChoice* w : e.words) e.weights.push_back(w->weight);
        }
    }

    // Returns nullopt if the derivation exceeds a resource bound.
    std::optional<std::vector<std::string>> derive(const std::string& start, Rng& rng) const {
        std::vector<std::string> out;
        // (symbol, depth) frames expanded left to right
        std::vector<std::pair<const std::string*, std::size_t>> stack{{&start, 1}};
        std::size_t expanded = 0;
        while (!stack.empty()) {
            auto [symbol, depth] = stack.back();
            stack.pop_back();
            if (depth > kMaxDerivationDepth || ++expanded > kMaxDerivationSymbols) {
                return std::nullopt;
            }
            const Expansion& e = table_.at(*symbol);
            const std::size_t pick = rng.weighted(e.weights);
            if (pick < e.rules.size()) {
                const auto& rhs = e.rules[pick]->rhs;
                for (auto it = rhs.rbegin(); it != rhs.rend(); ++it) {
                    stack.emplace_back(&*it, depth + 1);
                }
            } else {
                out.push_back(e.words[pick - e.rules.size()]->token);
            }
        }
        return out;
    }

private:
    std::unordered_map<std::string, Expansion> table_;
};

} // namespace

std::vector<Utterance> generate_utterances(const GeneratorModel& model, std::size_t n,
                                           std::uint64_t seed, std::int64_t session_id) {
    if (n == 0) throw PreconditionError("generate_utterances: n must be at least 1");
    const Sampler sampler(model);
    Rng rng(seed);
    std::vector<Utterance> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::optional<std::vector<std::string>> tokens;
        for (std::size_t attempt = 0; attempt <= kMaxDerivationRetries; ++attempt) {
            tokens = sampler.derive(model.start, rng);
            if (tokens && !tokens->empty()) break;
            tokens.reset();
        }
        if (!tokens) {
            throw GenerationError("derivation limit exceeded " +
                                  std::to_string(kMaxDerivationRetries) +
                                  " times in a row; grammar recursion is too deep");
        }
        out.push_back({std::move(*tokens), Agent::mother, session_id, i});
    }
    return out;
}

std::vector<Utterance> read_corpus(std::istream& in, std::int64_t session_id) {
    std::vector<Utterance> out;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (first && line.starts_with("\xEF\xBB\xBF")) line.erase(0, 3);
        first = false;
        auto tokens = kwic::tokenize(line);
        if (tokens.empty()) continue;
        out.push_back({std::move(tokens), Agent::mother, session_id, out.size()});
    }
    if (in.bad()) throw IoError("read error while reading corpus");
    if (out.empty()) throw EmptyCorpusError("corpus contains no utterances");
    return out;
}

std::vector<Utterance> ingest_corpus(const std::filesystem::path& path, std::int64_t session_id) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open corpus '" + path.string() + "'");
    return read_corpus(in, session_id);
}

void write_corpus(const std::vector<Utterance>& corpus, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    for (const auto& u : corpus) out << u.text() << '\n';
}

} // namespace modoma::mother
