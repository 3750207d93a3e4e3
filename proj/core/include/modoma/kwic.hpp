#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "modoma/mother.hpp"

namespace modoma::kwic {

/// Whitespace split; strips leading/trailing `. , ! ? ; :` from each token.
/// Case and apostrophes are preserved; tokens that strip to nothing are dropped.
std::vector<std::string> tokenize(std::string_view raw);

/// Size of the context window around a key word.
struct Window {
    std::size_t before = 2;
    std::size_t after = 2;

    /// Relative positions in ascending order, e.g. -2 -1 +1 +2.
    std::vector<int> positions() const;
};

/// A key word with the words around it. Slots that would fall outside the
/// utterance are empty.
class KwicRecord {
public:
    KwicRecord(std::string target, Window window);

    const std::string& target() const { return target_; }
    const Window& window() const { return window_; }

    /// Context at a nonzero relative position inside the window.
    const std::optional<std::string>& at(int position) const;
    void set(int position, std::optional<std::string> token);

    friend bool operator==(const KwicRecord&, const KwicRecord&) = default;

private:
    std::size_t slot(int position) const;

    std::string target_;
    Window window_;
    std::vector<std::optional<std::string>> slots_;
};

/// One record per token; windows never cross utterance boundaries.
std::vector<KwicRecord> extract_kwic(const std::vector<Utterance>& utterances, Window window);

/// A context word at a relative position, i.e. one table column.
struct ContextKey {
    std::string token;
    int position = 0;

    std::string label() const;  // "token@-1", "token@+2"

    friend auto operator<=>(const ContextKey&, const ContextKey&) = default;
};

/// Dense targets x (context word, position) count matrix.
struct ContextFrequencyTable {
    std::vector<std::string> rows;
    std::vector<ContextKey> columns;
    std::vector<std::uint32_t> counts;  // row-major

    std::size_t row_count() const { return rows.size(); }
    std::size_t column_count() const { return columns.size(); }
    std::uint32_t at(std::size_t row, std::size_t column) const {
        return counts[row * columns.size() + column];
    }
    std::span<const std::uint32_t> row(std::size_t r) const {
        return {counts.data() + r * columns.size(), columns.size()};
    }

    friend bool operator==(const ContextFrequencyTable&, const ContextFrequencyTable&) = default;
};

/// Mergeable tally behind build_frequency_table. Partial tallies over
/// disjoint slices of a corpus can be merged in any order.
class FrequencyTally {
public:
    void add(const KwicRecord& record);
    void merge(const FrequencyTally& other);

    /// Keeps targets seen at least `min_freq` times, then context columns
    /// whose total over the kept rows is at least `column_min_freq`.
    /// Throws InsufficientDataError if fewer than two rows survive.
    ContextFrequencyTable finalize(std::size_t min_freq, std::size_t column_min_freq = 0) const;

    std::size_t target_frequency(const std::string& target) const;

private:
    std::map<std::string, std::size_t> target_freq_;
    std::map<std::string, std::map<ContextKey, std::uint32_t>> cooc_;
};

ContextFrequencyTable build_frequency_table(const std::vector<KwicRecord>& records,
                                            std::size_t min_freq,
                                            std::size_t column_min_freq = 0);

/// Header `target,pos-2,pos-1,pos+1,pos+2` (adapts to the window).
void write_kwic_csv(std::ostream& out, const std::vector<KwicRecord>& records, Window window);
void write_kwic_csv(const std::filesystem::path& path, const std::vector<KwicRecord>& records,
                    Window window);

/// Header `target,<token@position>...`.
void write_table_csv(std::ostream& out, const ContextFrequencyTable& table);
void write_table_csv(const std::filesystem::path& path, const ContextFrequencyTable& table);

} // namespace modoma::kwic
