#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "modoma/mother.hpp"

namespace modoma::grammar {

/// Whether a head is linearized before (left) or after (right) its argument.
/// `none` means not yet known.
enum class HeadDirectionality { none, left, right };

/// Direction requested for a single combination.
enum class Direction { left, right };

std::string_view to_string(HeadDirectionality d);
HeadDirectionality to_directionality(Direction d);

/// (session id, lexical entry number) identifies an entry across sessions.
struct EntryKey {
    std::int64_t session_id = 0;
    std::int64_t number = 0;

    std::string str() const;  // "1601581107338:1"
    static EntryKey parse(std::string_view text);

    friend auto operator<=>(const EntryKey&, const EntryKey&) = default;
};

struct Property {
    std::string type;   // feature, e.g. "A"
    std::string value;  // e.g. "n"
    int confidence = 60;

    friend bool operator==(const Property&, const Property&) = default;
};

inline constexpr int kDefaultConfidence = 60;

/// A template in the daughter grammar: a word (terminal) or a construction
/// holding a head and an argument of the same shape.
///
/// A terminal has no `head` pointer; it heads itself.
struct LexicalEntry {
    int memory_stack_position = 0;
    std::int64_t lexical_entry_number = 0;
    std::int64_t session_id = 0;
    int confidence_lexical_entry = kDefaultConfidence;
    HeadDirectionality head_directionality = HeadDirectionality::none;
    int confidence_head_directionality = 0;
    bool terminal = true;
    std::optional<std::string> phonform;
    std::optional<std::string> semform;
    std::optional<std::int64_t> semform_index;
    std::vector<Property> grammatical_properties;
    std::shared_ptr<const LexicalEntry> head;
    std::shared_ptr<const LexicalEntry> argument;

    EntryKey key() const { return {session_id, lexical_entry_number}; }

    /// "winkelen.1" style label, used for self-referencing heads.
    std::string display_label() const;

    const Property* property(std::string_view type) const;

    /// Adds (type, value). Same value: only the confidence changes.
    /// A different existing value throws FeatureConflictError.
    void set_property(const std::string& type, const std::string& value, int confidence);

    /// Replaces whatever value `type` holds; returns the replaced property.
    std::optional<Property> overwrite_property(const std::string& type, const std::string& value,
                                               int confidence);

    /// Walks head pointers down to the word that heads this structure.
    const LexicalEntry& lexical_head() const;

    /// Deep structural equality (children compared by content).
    friend bool operator==(const LexicalEntry& a, const LexicalEntry& b);
};

/// Checks the per-entry invariants; throws GrammarError.
void validate(const LexicalEntry& entry);

/// Rule deciding whether a head and an argument that both carry a feature
/// may combine.
struct FeatureConstraint {
    enum class Kind { allow_all, require_equal, require_distinct, pair_list };

    Kind kind = Kind::allow_all;
    /// (head value, argument value) pairs accepted under pair_list.
    std::set<std::pair<std::string, std::string>> allowed;

    bool permits(const std::string& head_value, const std::string& argument_value) const;

    friend bool operator==(const FeatureConstraint&, const FeatureConstraint&) = default;
};

std::string_view to_string(FeatureConstraint::Kind kind);
FeatureConstraint::Kind to_constraint_kind(std::string_view name);

/// Per-feature combination rules. Unlisted features allow everything.
class ConstraintTable {
public:
    void set(const std::string& feature, FeatureConstraint rule);
    const FeatureConstraint& rule(const std::string& feature) const;
    const std::map<std::string, FeatureConstraint>& rules() const { return rules_; }

    /// True unless a feature shared by head and argument is rejected.
    bool compatible(const LexicalEntry& head, const LexicalEntry& argument) const;

    friend bool operator==(const ConstraintTable&, const ConstraintTable&) = default;

private:
    std::map<std::string, FeatureConstraint> rules_;
};

/// Replaced feature value, recorded by Grammar::overwrite_property.
struct OverwriteRecord {
    EntryKey entry;
    std::string feature;
    std::string old_value;
    std::string new_value;
    int confidence = 0;
};

/// The daughter's lexicon and constructions.
///
/// Single writer: mutating calls must be serialized by the caller; const
/// members may run concurrently between writes.
class Grammar {
public:
    Grammar() = default;
    /// Deep copy: the new grammar owns its own entries.
    Grammar(const Grammar& other);
    Grammar& operator=(const Grammar& other);
    Grammar(Grammar&&) noexcept = default;
    Grammar& operator=(Grammar&&) noexcept = default;

    /// Creates a terminal with the default template values and a fresh
    /// semform label. Throws PreconditionError on an empty phonform and
    /// DuplicateEntryError if (session, number) is taken.
    const LexicalEntry& new_entry(const std::string& phonform, std::int64_t session_id,
                                  std::int64_t number);

    /// Inserts a fully formed entry. Head/argument of constructions must
    /// already be in the grammar.
    const LexicalEntry& add(LexicalEntry entry);

    std::shared_ptr<const LexicalEntry> find(const EntryKey& key) const;
    const LexicalEntry& at(const EntryKey& key) const;

    /// Terminals with this phonform, ordered by key.
    std::vector<std::shared_ptr<const LexicalEntry>> lookup(std::string_view phonform) const;

    /// All entries ordered by key.
    std::vector<std::shared_ptr<const LexicalEntry>> entries() const;
    std::size_t size() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }

    void set_property(const EntryKey& key, const std::string& feature, const std::string& value,
                      int confidence);
    /// Replaces the value and appends to overwrite_log() when it changed.
    void overwrite_property(const EntryKey& key, const std::string& feature,
                            const std::string& value, int confidence);
    const std::vector<OverwriteRecord>& overwrite_log() const { return overwrite_log_; }

    bool uses_feature(std::string_view feature) const;
    std::int64_t next_entry_number(std::int64_t session_id) const;

    ConstraintTable& constraints() { return constraints_; }
    const ConstraintTable& constraints() const { return constraints_; }

    friend bool operator==(const Grammar& a, const Grammar& b);

private:
    std::string fresh_semform();
    LexicalEntry& mutable_entry(const EntryKey& key);

    std::map<EntryKey, std::shared_ptr<LexicalEntry>> entries_;
    std::map<std::string, std::vector<EntryKey>, std::less<>> index_;
    std::set<std::string> semforms_;
    std::size_t semform_counter_ = 0;
    ConstraintTable constraints_;
    std::vector<OverwriteRecord> overwrite_log_;
};

/// Capital-letter label sequence: 0 -> A, 25 -> Z, 26 -> AA.
std::string upper_label(std::size_t index);
/// Lower-case variant: 0 -> a, 26 -> aa.
std::string lower_label(std::size_t index);

/// Combines head and argument into a construction. Fails when the
/// constraint table rejects a shared feature, or when the lexical head has a
/// known directionality that contradicts `direction`.
std::optional<LexicalEntry> unify(std::shared_ptr<const LexicalEntry> head,
                                  std::shared_ptr<const LexicalEntry> argument, Direction direction,
                                  const ConstraintTable& constraints);

/// Surface tokens: left puts head tokens first, right puts them last.
/// Throws LinearizeError on a construction without directionality.
std::vector<std::string> linearize(const LexicalEntry& entry);

enum class Judgment { grammatical, ungrammatical };
std::string_view to_string(Judgment j);

struct Derivation {
    std::shared_ptr<const LexicalEntry> root;
    bool contains_unknown = false;
};

struct ParseResult {
    Judgment judgment = Judgment::ungrammatical;
    /// Complete analyses, at most ParseOptions::max_derivations of them.
    std::vector<Derivation> derivations;
    /// Token positions with no grammar entry (parsed as unconstrained words).
    std::vector<std::size_t> unknown_positions;
};

struct ParseOptions {
    std::size_t max_derivations = 32;
};

/// CKY-style chart parse over binary unifications in both head positions.
ParseResult parse(const Grammar& grammar, std::span<const std::string> tokens,
                  const ParseOptions& options = {});

/// Maximum unification attempts per generate() call.
inline constexpr std::size_t kMaxGenerationAttempts = 10000;

/// Random derivation built by seeded unification attempts. The target
/// length is drawn uniformly from 1..max_len.
///
/// Throws GenerationError if the grammar has no word with a phonform, or a
/// multi-word target was drawn and every attempt failed.
std::shared_ptr<const LexicalEntry> generate_structure(const Grammar& grammar, std::size_t max_len,
                                                       std::uint64_t seed);

Utterance generate(const Grammar& grammar, std::size_t max_len, std::uint64_t seed);

struct Annotation {
    std::string token;
    std::vector<Property> properties;
    bool known = false;
};

/// Labels each token with the properties of the first entry carrying its
/// phonform; unknown tokens get an empty list.
std::vector<Annotation> annotate(const Grammar& grammar, std::span<const std::string> tokens);

/// Grammar persistence: entries use the template field names verbatim.
std::string to_json(const Grammar& grammar);
Grammar grammar_from_json(std::string_view json);
void save_grammar(const Grammar& grammar, const std::filesystem::path& path);
Grammar load_grammar(const std::filesystem::path& path);

/// Reads only a `constraints` object (same shape as in grammar files).
ConstraintTable constraints_from_json(std::string_view json);

} // namespace modoma::grammar
