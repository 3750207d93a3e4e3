#include "modoma/grammar.hpp"

#include <algorithm>
#include <charconv>
#include <functional>

#include "modoma/error.hpp"
#include "modoma/random.hpp"

namespace modoma::grammar {

std::string_view to_string(HeadDirectionality d) {
    switch (d) {
    case HeadDirectionality::left: return "left";
    case HeadDirectionality::right: return "right";
    case HeadDirectionality::none: break;
    }
    return "null";
}

HeadDirectionality to_directionality(Direction d) {
    return d == Direction::left ? HeadDirectionality::left : HeadDirectionality::right;
}

std::string EntryKey::str() const {
    return std::to_string(session_id) + ":" + std::to_string(number);
}

EntryKey EntryKey::parse(std::string_view text) {
    const auto colon = text.find(':');
    EntryKey key;
    auto num = [&](std::string_view part, std::int64_t& out) {
        auto [p, ec] = std::from_chars(part.data(), part.data() + part.size(), out);
        return ec == std::errc{} && p == part.data() + part.size() && !part.empty();
    };
    if (colon == std::string_view::npos || !num(text.substr(0, colon), key.session_id) ||
        !num(text.substr(colon + 1), key.number)) {
        throw DataError("malformed entry reference '" + std::string(text) + "'");
    }
    return key;
}

std::string LexicalEntry::display_label() const {
    return phonform.value_or(semform.value_or("?")) + "." + std::to_string(lexical_entry_number);
}

const Property* LexicalEntry::property(std::string_view type) const {
    for (const auto& p : grammatical_properties) {
        if (p.type == type) return &p;
    }
    return nullptr;
}

namespace {

void check_confidence(int confidence) {
    if (confidence < 0 || confidence > 100) {
        throw PreconditionError("confidence " + std::to_string(confidence) + " outside 0..100");
    }
}

bool same_child(const std::shared_ptr<const LexicalEntry>& a,
                const std::shared_ptr<const LexicalEntry>& b) {
    if (a == b) return true;
    if (!a || !b) return false;
    return *a == *b;
}

} // namespace

void LexicalEntry::set_property(const std::string& type, const std::string& value, int confidence) {
    check_confidence(confidence);
    for (auto& p : grammatical_properties) {
        if (p.type != type) continue;
        if (p.value != value) {
            throw FeatureConflictError("entry " + display_label() + " already has " + type + ":" +
                                       p.value + "; cannot also be " + type + ":" + value);
        }
        p.confidence = confidence;
        return;
    }
    grammatical_properties.push_back({type, value, confidence});
}

std::optional<Property> LexicalEntry::overwrite_property(const std::string& type,
                                                         const std::string& value, int confidence) {
    check_confidence(confidence);
    for (auto& p : grammatical_properties) {
        if (p.type != type) continue;
        Property old = p;
        p.value = value;
        p.confidence = confidence;
        return old;
    }
    grammatical_properties.push_back({type, value, confidence});
    return std::nullopt;
}

const LexicalEntry& LexicalEntry::lexical_head() const {
    const LexicalEntry* e = this;
    while (!e->terminal && e->head) e = e->head.get();
    return *e;
}

bool operator==(const LexicalEntry& a, const LexicalEntry& b) {
    return a.memory_stack_position == b.memory_stack_position &&
           a.lexical_entry_number == b.lexical_entry_number && a.session_id == b.session_id &&
           a.confidence_lexical_entry == b.confidence_lexical_entry &&
           a.head_directionality == b.head_directionality &&
           a.confidence_head_directionality == b.confidence_head_directionality &&
           a.terminal == b.terminal && a.phonform == b.phonform && a.semform == b.semform &&
           a.semform_index == b.semform_index &&
           a.grammatical_properties == b.grammatical_properties && same_child(a.head, b.head) &&
           same_child(a.argument, b.argument);
}

void validate(const LexicalEntry& e) {
    for (int c : {e.confidence_lexical_entry, e.confidence_head_directionality}) {
        if (c < 0 || c > 100) throw GrammarError("entry " + e.key().str() + ": confidence outside 0..100");
    }
    std::set<std::string> seen;
    for (const auto& p : e.grammatical_properties) {
        if (p.confidence < 0 || p.confidence > 100) {
            throw GrammarError("entry " + e.key().str() + ": property confidence outside 0..100");
        }
        if (!seen.insert(p.type).second) {
            throw GrammarError("entry " + e.key().str() + " has more than one value for " + p.type);
        }
    }
    if (e.terminal) {
        if (!e.phonform || e.phonform->empty()) {
            throw GrammarError("terminal entry " + e.key().str() + " has no phonform");
        }
        if (e.argument) throw GrammarError("terminal entry " + e.key().str() + " has an argument");
    } else if (!e.head) {
        throw GrammarError("construction " + e.key().str() + " has no head");
    }
}

bool FeatureConstraint::permits(const std::string& head_value, const std::string& arg_value) const {
    switch (kind) {
    case Kind::allow_all: return true;
    case Kind::require_equal: return head_value == arg_value;
    case Kind::require_distinct: return head_value != arg_value;
    case Kind::pair_list: return allowed.contains({head_value, arg_value});
    }
    return false;
}

std::string_view to_string(FeatureConstraint::Kind kind) {
    using K = FeatureConstraint::Kind;
    switch (kind) {
    case K::allow_all: return "allow-all";
    case K::require_equal: return "require-equal";
    case K::require_distinct: return "require-distinct";
    case K::pair_list: return "pairs";
    }
    return "";
}

FeatureConstraint::Kind to_constraint_kind(std::string_view name) {
    using K = FeatureConstraint::Kind;
    if (name == "allow-all") return K::allow_all;
    if (name == "require-equal") return K::require_equal;
    if (name == "require-distinct") return K::require_distinct;
    if (name == "pairs") return K::pair_list;
    throw ConfigError("unknown constraint kind '" + std::string(name) + "'");
}

void ConstraintTable::set(const std::string& feature, FeatureConstraint rule) {
    rules_[feature] = std::move(rule);
}

const FeatureConstraint& ConstraintTable::rule(const std::string& feature) const {
    static const FeatureConstraint allow_all{};
    const auto it = rules_.find(feature);
    return it == rules_.end() ? allow_all : it->second;
}

bool ConstraintTable::compatible(const LexicalEntry& head, const LexicalEntry& argument) const {
    for (const auto& hp : head.grammatical_properties) {
        const Property* ap = argument.property(hp.type);
        if (ap && !rule(hp.type).permits(hp.value, ap->value)) return false;
    }
    return true;
}

std::string upper_label(std::size_t index) {
    std::string out;
    ++index;
    while (index > 0) {
        --index;
        out.insert(out.begin(), static_cast<char>('A' + index % 26));
        index /= 26;
    }
    return out;
}

std::string lower_label(std::size_t index) {
    std::string out = upper_label(index);
    for (char& c : out) c = static_cast<char>(c - 'A' + 'a');
    return out;
}

Grammar::Grammar(const Grammar& other)
    : index_(other.index_),
      semforms_(other.semforms_),
      semform_counter_(other.semform_counter_),
      constraints_(other.constraints_),
      overwrite_log_(other.overwrite_log_) {
    std::map<const LexicalEntry*, std::shared_ptr<LexicalEntry>> cloned;
    std::function<std::shared_ptr<LexicalEntry>(const LexicalEntry*)> clone =
        [&](const LexicalEntry* e) -> std::shared_ptr<LexicalEntry> {
        if (auto it = cloned.find(e); it != cloned.end()) return it->second;
        auto copy = std::make_shared<LexicalEntry>(*e);
        if (e->head) copy->head = clone(e->head.get());
        if (e->argument) copy->argument = clone(e->argument.get());
        cloned.emplace(e, copy);
        return copy;
    };
    for (const auto& [key, e] : other.entries_) entries_.emplace(key, clone(e.get()));
}

Grammar& Grammar::operator=(const Grammar& other) {
    if (this != &other) *this = Grammar(other);
    return *this;
}

std::string Grammar::fresh_semform() {
    std::string label;
    do {
        label = upper_label(semform_counter_++);
    } while (semforms_.contains(label));
    return label;
}

const LexicalEntry& Grammar::new_entry(const std::string& phonform, std::int64_t session_id,
                                       std::int64_t number) {
    if (phonform.empty()) throw PreconditionError("new_entry: phonform must be nonempty");
    if (entries_.contains({session_id, number})) {
        throw DuplicateEntryError("entry " + EntryKey{session_id, number}.str() + " already exists");
    }
    LexicalEntry e;
    e.session_id = session_id;
    e.lexical_entry_number = number;
    e.phonform = phonform;
    e.semform = fresh_semform();
    return add(std::move(e));
}

const LexicalEntry& Grammar::add(LexicalEntry entry) {
    validate(entry);
    const EntryKey key = entry.key();
    if (entries_.contains(key)) throw DuplicateEntryError("entry " + key.str() + " already exists");
    for (const auto* child : {&entry.head, &entry.argument}) {
        if (!*child) continue;
        const auto it = entries_.find((*child)->key());
        if (it == entries_.end() || it->second.get() != child->get()) {
            throw GrammarError("entry " + key.str() + " references " + (*child)->key().str() +
                               ", which is not in the grammar");
        }
    }
    if (entry.semform) semforms_.insert(*entry.semform);
    if (entry.terminal) {
        auto& keys = index_[*entry.phonform];
        keys.insert(std::upper_bound(keys.begin(), keys.end(), key), key);
    }
    auto ptr = std::make_shared<LexicalEntry>(std::move(entry));
    entries_.emplace(key, ptr);
    return *ptr;
}

std::shared_ptr<const LexicalEntry> Grammar::find(const EntryKey& key) const {
    const auto it = entries_.find(key);
    return it == entries_.end() ? nullptr : it->second;
}

const LexicalEntry& Grammar::at(const EntryKey& key) const {
    const auto it = entries_.find(key);
    if (it == entries_.end()) throw GrammarError("no entry " + key.str());
    return *it->second;
}

LexicalEntry& Grammar::mutable_entry(const EntryKey& key) {
    const auto it = entries_.find(key);
    if (it == entries_.end()) throw GrammarError("no entry " + key.str());
    return *it->second;
}

std::vector<std::shared_ptr<const LexicalEntry>> Grammar::lookup(std::string_view phonform) const {
    std::vector<std::shared_ptr<const LexicalEntry>> out;
    const auto it = index_.find(phonform);
    if (it == index_.end()) return out;
    for (const auto& key : it->second) out.push_back(entries_.at(key));
    return out;
}

std::vector<std::shared_ptr<const LexicalEntry>> Grammar::entries() const {
    std::vector<std::shared_ptr<const LexicalEntry>> out;
    out.reserve(entries_.size());
    for (const auto& [key, e] : entries_) out.push_back(e);
    return out;
}

void Grammar::set_property(const EntryKey& key, const std::string& feature, const std::string& value,
                           int confidence) {
    mutable_entry(key).set_property(feature, value, confidence);
}

void Grammar::overwrite_property(const EntryKey& key, const std::string& feature,
                                 const std::string& value, int confidence) {
    auto old = mutable_entry(key).overwrite_property(feature, value, confidence);
    if (old && old->value != value) {
        overwrite_log_.push_back({key, feature, old->value, value, confidence});
    }
}

bool Grammar::uses_feature(std::string_view feature) const {
    for (const auto& [key, e] : entries_) {
        if (e->property(feature)) return true;
    }
    return false;
}

std::int64_t Grammar::next_entry_number(std::int64_t session_id) const {
    const auto it = entries_.lower_bound({session_id + 1, INT64_MIN});
    if (it == entries_.begin()) return 1;
    const auto& last = std::prev(it)->first;
    return last.session_id == session_id ? last.number + 1 : 1;
}

bool operator==(const Grammar& a, const Grammar& b) {
    if (a.constraints_ != b.constraints_ || a.entries_.size() != b.entries_.size()) return false;
    return std::equal(a.entries_.begin(), a.entries_.end(), b.entries_.begin(),
                      [](const auto& x, const auto& y) { return x.first == y.first && *x.second == *y.second; });
}

std::optional<LexicalEntry> unify(std::shared_ptr<const LexicalEntry> head,
                                  std::shared_ptr<const LexicalEntry> argument, Direction direction,
                                  const ConstraintTable& constraints) {
    if (!head || !argument) throw PreconditionError("unify: null entry");
    const LexicalEntry& word = head->lexical_head();
    if (word.head_directionality != HeadDirectionality::none &&
        word.head_directionality != to_directionality(direction)) {
        return std::nullopt;
    }
    if (!constraints.compatible(*head, *argument)) return std::nullopt;

    LexicalEntry c;
    c.terminal = false;
    c.head_directionality = to_directionality(direction);
    c.confidence_head_directionality = word.confidence_head_directionality;
    c.confidence_lexical_entry = std::min(head->confidence_lexical_entry, argument->confidence_lexical_entry);
    c.semform = head->semform;
    c.grammatical_properties = head->grammatical_properties;
    c.head = std::move(head);
    c.argument = std::move(argument);
    return c;
}

std::vector<std::string> linearize(const LexicalEntry& entry) {
    std::vector<std::string> out;
    std::function<void(const LexicalEntry&)> walk = [&](const LexicalEntry& e) {
        if (e.terminal) {
            if (!e.phonform) throw LinearizeError("terminal " + e.key().str() + " has no phonform");
            out.push_back(*e.phonform);
            return;
        }
        if (!e.head || !e.argument) throw LinearizeError("construction without head or argument");
        switch (e.head_directionality) {
        case HeadDirectionality::left:
            walk(*e.head);
            walk(*e.argument);
            break;
        case HeadDirectionality::right:
            walk(*e.argument);
            walk(*e.head);
            break;
        case HeadDirectionality::none:
            throw LinearizeError("construction headed by " + e.lexical_head().display_label() +
                                 " has no head directionality");
        }
    };
    walk(entry);
    return out;
}

std::string_view to_string(Judgment j) {
    return j == Judgment::grammatical ? "grammatical" : "ungrammatical";
}

namespace {

// Analyses of one span that behave identically in further combination:
// unify only looks at (type, value) pairs and the lexical head's direction.
struct PackedItem {
    std::vector<std::pair<std::string, std::string>> signature;
    HeadDirectionality direction = HeadDirectionality::none;
    std::vector<std::shared_ptr<const LexicalEntry>> analyses;
};

void add_analysis(std::vector<PackedItem>& cell, std::shared_ptr<const LexicalEntry> e,
                  std::size_t cap) {
    std::vector<std::pair<std::string, std::string>> sig;
    for (const auto& p : e->grammatical_properties) sig.emplace_back(p.type, p.value);
    std::sort(sig.begin(), sig.end());
    const auto dir = e->lexical_head().head_directionality;
    for (auto& item : cell) {
        if (item.signature == sig && item.direction == dir) {
            if (item.analyses.size() < cap) item.analyses.push_back(std::move(e));
            return;
        }
    }
    cell.push_back({std::move(sig), dir, {std::move(e)}});
}

} // namespace

ParseResult parse(const Grammar& grammar, std::span<const std::string> tokens,
                  const ParseOptions& options) {
    ParseResult result;
    const std::size_t n = tokens.size();
    if (n == 0) return result;
    const std::size_t cap = std::max<std::size_t>(1, options.max_derivations);

    // chart[i][len-1] covers tokens [i, i+len)
    std::vector<std::vector<std::vector<PackedItem>>> chart(n);
    for (std::size_t i = 0; i < n; ++i) {
        chart[i].resize(n - i);
        auto words = grammar.lookup(tokens[i]);
        if (words.empty()) {
            LexicalEntry anon;
            anon.phonform = tokens[i];
            words.push_back(std::make_shared<const LexicalEntry>(std::move(anon)));
            result.unknown_positions.push_back(i);
        }
        for (auto& w : words) add_analysis(chart[i][0], std::move(w), cap);
    }

    const auto& constraints = grammar.constraints();
    for (std::size_t len = 2; len <= n; ++len) {
        for (std::size_t i = 0; i + len <= n; ++i) {
            auto& cell = chart[i][len - 1];
            for (std::size_t split = 1; split < len; ++split) {
                const auto& lefts = chart[i][split - 1];
                const auto& rights = chart[i + split][len - split - 1];
                for (const auto& l : lefts) {
                    for (const auto& r : rights) {
                        // left item heads (head precedes), or right item heads
                        for (const bool left_heads : {true, false}) {
                            const auto& h = left_heads ? l : r;
                            const auto& a = left_heads ? r : l;
                            const auto dir = left_heads ? Direction::left : Direction::right;
                            if (!unify(h.analyses.front(), a.analyses.front(), dir, constraints)) continue;
                            std::size_t made = 0;
                            for (const auto& ha : h.analyses) {
                                for (const auto& aa : a.analyses) {
                                    if (made++ >= cap) break;
                                    auto c = unify(ha, aa, dir, constraints);
                                    add_analysis(cell, std::make_shared<const LexicalEntry>(std::move(*c)), cap);
                                }
                            }
                        }
                    }
                }
            }
        }
    }

    const bool unknown = !result.unknown_positions.empty();
    for (const auto& item : chart[0][n - 1]) {
        for (const auto& a : item.analyses) {
            if (result.derivations.size() >= cap) break;
            result.derivations.push_back({a, unknown});
        }
    }
    result.judgment = chart[0][n - 1].empty() ? Judgment::ungrammatical : Judgment::grammatical;
    return result;
}

std::shared_ptr<const LexicalEntry> generate_structure(const Grammar& grammar, std::size_t max_len,
                                                       std::uint64_t seed) {
    if (max_len == 0) throw PreconditionError("generate: max_len must be at least 1");
    std::vector<std::shared_ptr<const LexicalEntry>> words;
    for (auto& e : grammar.entries()) {
        if (e->terminal && e->phonform) words.push_back(std::move(e));
    }
    if (words.empty()) throw GenerationError("no generable structure: grammar has no words");

    Rng rng(seed);
    const std::size_t target = 1 + rng.below(max_len);
    std::shared_ptr<const LexicalEntry> current = words[rng.below(words.size())];
    std::size_t length = 1;
    std::size_t successes = 0;
    for (std::size_t attempt = 0; length < target && attempt < kMaxGenerationAttempts; ++attempt) {
        const auto& word = words[rng.below(words.size())];
        const bool current_heads = rng.below(2) == 0;
        const Direction dir = rng.below(2) == 0 ? Direction::left : Direction::right;
        auto c = current_heads ? unify(current, word, dir, grammar.constraints())
                               : unify(word, current, dir, grammar.constraints());
        if (!c) continue;
        current = std::make_shared<const LexicalEntry>(std::move(*c));
        ++length;
        ++successes;
    }
    if (target > 1 && successes == 0) {
        throw GenerationError("no generable structure: every unification attempt failed");
    }
    return current;
}

Utterance generate(const Grammar& grammar, std::size_t max_len, std::uint64_t seed) {
    Utterance u;
    u.tokens = linearize(*generate_structure(grammar, max_len, seed));
    u.source = Agent::daughter;
    return u;
}

std::vector<Annotation> annotate(const Grammar& grammar, std::span<const std::string> tokens) {
    std::vector<Annotation> out;
    out.reserve(tokens.size());
    for (const auto& t : tokens) {
        Annotation a{t, {}, false};
        const auto matches = grammar.lookup(t);
        if (!matches.empty()) {
            a.known = true;
            a.properties = matches.front()->grammatical_properties;
        }
        out.push_back(std::move(a));
    }
    return out;
}

} // namespace modoma::grammar
