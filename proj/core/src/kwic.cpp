#include "modoma/kwic.hpp"

#include <fstream>
#include <sstream>

#include "modoma/error.hpp"
#include "modoma/text.hpp"

namespace modoma::kwic {

namespace {

constexpr std::string_view kSentencePunct = ".,!?;:";

std::string position_label(int position) {
    return position > 0 ? "+" + std::to_string(position) : std::to_string(position);
}

} // namespace

std::vector<std::string> tokenize(std::string_view raw) {
    std::vector<std::string> tokens;
    std::istringstream in{std::string(raw)};
    std::string word;
    while (in >> word) {
        const auto first = word.find_first_not_of(kSentencePunct);
        if (first == std::string::npos) continue;
        const auto last = word.find_last_not_of(kSentencePunct);
        tokens.push_back(word.substr(first, last - first + 1));
    }
    return tokens;
}

std::vector<int> Window::positions() const {
    std::vector<int> out;
    for (std::size_t i = before; i > 0; --i) out.push_back(-static_cast<int>(i));
    for (std::size_t i = 1; i <= after; ++i) out.push_back(static_cast<int>(i));
    return out;
}

KwicRecord::KwicRecord(std::string target, Window window)
    : target_(std::move(target)), window_(window), slots_(window.before + window.after) {}

std::size_t KwicRecord::slot(int position) const {
    if (position < 0 && static_cast<std::size_t>(-position) <= window_.before) {
        return window_.before - static_cast<std::size_t>(-position);
    }
    if (position > 0 && static_cast<std::size_t>(position) <= window_.after) {
        return window_.before + static_cast<std::size_t>(position) - 1;
    }
    throw PreconditionError("KWIC position " + std::to_string(position) + " outside window");
}

const std::optional<std::string>& KwicRecord::at(int position) const {
    return slots_[slot(position)];
}

void KwicRecord::set(int position, std::optional<std::string> token) {
    slots_[slot(position)] = std::move(token);
}

std::vector<KwicRecord> extract_kwic(const std::vector<Utterance>& utterances, Window window) {
    if (window.before == 0 && window.after == 0) {
        throw PreconditionError("extract_kwic: window must include at least one position");
    }
    std::vector<KwicRecord> records;
    records.reserve(total_tokens(utterances));
    const auto positions = window.positions();
    for (const auto& u : utterances) {
        const auto n = static_cast<long>(u.tokens.size());
        for (long i = 0; i < n; ++i) {
            KwicRecord rec(u.tokens[static_cast<std::size_t>(i)], window);
            for (int p : positions) {
                const long j = i + p;
                if (j >= 0 && j < n) rec.set(p, u.tokens[static_cast<std::size_t>(j)]);
            }
            records.push_back(std::move(rec));
        }
    }
    return records;
}

std::string ContextKey::label() const { return token + "@" + position_label(position); }

void FrequencyTally::add(const KwicRecord& record) {
    ++target_freq_[record.target()];
    auto& row = cooc_[record.target()];
    for (int p : record.window().positions()) {
        if (const auto& ctx = record.at(p)) ++row[ContextKey{*ctx, p}];
    }
}

void FrequencyTally::merge(const FrequencyTally& other) {
    for (const auto& [t, n] : other.target_freq_) target_freq_[t] += n;
    for (const auto& [t, row] : other.cooc_) {
        auto& mine = cooc_[t];
        for (const auto& [key, n] : row) mine[key] += n;
    }
}

std::size_t FrequencyTally::target_frequency(const std::string& target) const {
    const auto it = target_freq_.find(target);
    return it == target_freq_.end() ? 0 : it->second;
}

ContextFrequencyTable FrequencyTally::finalize(std::size_t min_freq,
                                               std::size_t column_min_freq) const {
    ContextFrequencyTable table;
    std::map<ContextKey, std::size_t> column_totals;
    for (const auto& [target, freq] : target_freq_) {
        if (freq < min_freq) continue;
        table.rows.push_back(target);
        const auto it = cooc_.find(target);
        if (it == cooc_.end()) continue;
        for (const auto& [key, n] : it->second) column_totals[key] += n;
    }
    if (table.rows.size() < 2) {
        throw InsufficientDataError("only " + std::to_string(table.rows.size()) +
                                    " target(s) reach the frequency threshold of " +
                                    std::to_string(min_freq) + "; need at least 2");
    }

    std::map<ContextKey, std::size_t> column_index;
    for (const auto& [key, total] : column_totals) {
        if (total < column_min_freq) continue;
        column_index.emplace(key, table.columns.size());
        table.columns.push_back(key);
    }

    table.counts.assign(table.rows.size() * table.columns.size(), 0);
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto it = cooc_.find(table.rows[r]);
        if (it == cooc_.end()) continue;
        for (const auto& [key, n] : it->second) {
            const auto col = column_index.find(key);
            if (col != column_index.end()) table.counts[r * table.columns.size() + col->second] = n;
        }
    }
    return table;
}

ContextFrequencyTable build_frequency_table(const std::vector<KwicRecord>& records,
                                            std::size_t min_freq, std::size_t column_min_freq) {
    FrequencyTally tally;
    for (const auto& r : records) tally.add(r);
    return tally.finalize(min_freq, column_min_freq);
}

void write_kwic_csv(std::ostream& out, const std::vector<KwicRecord>& records, Window window) {
    const auto positions = window.positions();
    out << "target";
    for (int p : positions) out << ",pos" << position_label(p);
    out << '\n';
    for (const auto& r : records) {
        out << text::csv_field(r.target());
        for (int p : positions) {
            out << ',';
            if (const auto& ctx = r.at(p)) out << text::csv_field(*ctx);
        }
        out << '\n';
    }
}

void write_kwic_csv(const std::filesystem::path& path, const std::vector<KwicRecord>& records,
                    Window window) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    write_kwic_csv(out, records, window);
}

void write_table_csv(std::ostream& out, const ContextFrequencyTable& table) {
    out << "target";
    for (const auto& c : table.columns) out << ',' << text::csv_field(c.label());
    out << '\n';
    for (std::size_t r = 0; r < table.row_count(); ++r) {
        out << text::csv_field(table.rows[r]);
        for (auto n : table.row(r)) out << ',' << n;
        out << '\n';
    }
}

void write_table_csv(const std::filesystem::path& path, const ContextFrequencyTable& table) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    write_table_csv(out, table);
}

} // namespace modoma::kwic
