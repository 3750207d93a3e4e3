#include <fstream>
#include <sstream>

#include <json.hpp>

#include "modoma/error.hpp"
#include "modoma/grammar.hpp"

namespace modoma::grammar {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

ordered_json entry_to_json(const LexicalEntry& e) {
    ordered_json props = ordered_json::array();
    for (const auto& p : e.grammatical_properties) {
        props.push_back({{"property_type", p.type},
                         {"property_value", p.value},
                         {"confidence_property", p.confidence}});
    }
    auto opt = [](const auto& v) { return v ? ordered_json(*v) : ordered_json(nullptr); };
    ordered_json j;
    j["memory_stack_position"] = e.memory_stack_position;
    j["lexical_entry_number"] = e.lexical_entry_number;
    j["session_id"] = e.session_id;
    j["confidence_lexical_entry"] = e.confidence_lexical_entry;
    j["head_directionality"] = e.head_directionality == HeadDirectionality::none
                                   ? ordered_json(nullptr)
                                   : ordered_json(std::string(to_string(e.head_directionality)));
    j["confidence_head_directionality"] = e.confidence_head_directionality;
    j["terminal"] = e.terminal;
    j["phonform"] = opt(e.phonform);
    j["semform"] = opt(e.semform);
    j["semform_index"] = opt(e.semform_index);
    j["grammatical_properties"] = std::move(props);
    // A terminal heads itself.
    j["head"] = e.terminal ? e.key().str() : e.head->key().str();
    j["argument"] = e.argument ? ordered_json(e.argument->key().str()) : ordered_json(nullptr);
    return j;
}

ordered_json constraints_to_json(const ConstraintTable& table) {
    ordered_json out = ordered_json::object();
    for (const auto& [feature, rule] : table.rules()) {
        ordered_json r = {{"kind", std::string(to_string(rule.kind))}};
        if (rule.kind == FeatureConstraint::Kind::pair_list) {
            ordered_json pairs = ordered_json::array();
            for (const auto& [h, a] : rule.allowed) pairs.push_back({h, a});
            r["pairs"] = std::move(pairs);
        }
        out[feature] = std::move(r);
    }
    return out;
}

ConstraintTable parse_constraints(const json& j) {
    ConstraintTable table;
    for (const auto& [feature, r] : j.items()) {
        FeatureConstraint rule;
        rule.kind = to_constraint_kind(r.is_string() ? r.get<std::string>() : r.at("kind").get<std::string>());
        if (rule.kind == FeatureConstraint::Kind::pair_list) {
            for (const auto& p : r.at("pairs")) {
                rule.allowed.emplace(p.at(0).get<std::string>(), p.at(1).get<std::string>());
            }
        }
        table.set(feature, std::move(rule));
    }
    return table;
}

template <typename T>
std::optional<T> optional_field(const json& j, const char* name) {
    if (!j.contains(name) || j.at(name).is_null()) return std::nullopt;
    return j.at(name).get<T>();
}

HeadDirectionality parse_directionality(const json& j) {
    if (j.is_null()) return HeadDirectionality::none;
    const auto s = j.get<std::string>();
    if (s == "left") return HeadDirectionality::left;
    if (s == "right") return HeadDirectionality::right;
    if (s == "null") return HeadDirectionality::none;
    throw DataError("unknown head_directionality '" + s + "'");
}

} // namespace

std::string to_json(const Grammar& grammar) {
    ordered_json entries = ordered_json::array();
    for (const auto& e : grammar.entries()) entries.push_back(entry_to_json(*e));
    ordered_json doc;
    doc["entries"] = std::move(entries);
    doc["constraints"] = constraints_to_json(grammar.constraints());
    return doc.dump(2) + "\n";
}

Grammar grammar_from_json(std::string_view text) {
    Grammar g;
    try {
        const json doc = json::parse(text);
        if (doc.contains("constraints")) g.constraints() = parse_constraints(doc.at("constraints"));

        // Constructions may precede their children in the file; insert in
        // passes until every reference resolves.
        std::vector<const json*> pending;
        for (const auto& e : doc.at("entries")) pending.push_back(&e);
        while (!pending.empty()) {
            std::vector<const json*> deferred;
            for (const json* pj : pending) {
                const json& j = *pj;
                LexicalEntry e;
                e.memory_stack_position = j.at("memory_stack_position").get<int>();
                e.lexical_entry_number = j.at("lexical_entry_number").get<std::int64_t>();
                e.session_id = j.at("session_id").get<std::int64_t>();
                e.confidence_lexical_entry = j.at("confidence_lexical_entry").get<int>();
                e.head_directionality = parse_directionality(j.at("head_directionality"));
                e.confidence_head_directionality = j.at("confidence_head_directionality").get<int>();
                e.terminal = j.at("terminal").get<bool>();
                e.phonform = optional_field<std::string>(j, "phonform");
                e.semform = optional_field<std::string>(j, "semform");
                e.semform_index = optional_field<std::int64_t>(j, "semform_index");
                for (const auto& p : j.at("grammatical_properties")) {
                    e.grammatical_properties.push_back({p.at("property_type").get<std::string>(),
                                                        p.at("property_value").get<std::string>(),
                                                        p.at("confidence_property").get<int>()});
                }
                const auto head = optional_field<std::string>(j, "head");
                const auto arg = optional_field<std::string>(j, "argument");
                bool ready = true;
                if (e.terminal) {
                    if (head && EntryKey::parse(*head) != e.key()) {
                        throw DataError("terminal " + e.key().str() + " must head itself");
                    }
                } else {
                    if (!head) throw DataError("construction " + e.key().str() + " has no head");
                    e.head = g.find(EntryKey::parse(*head));
                    ready = ready && e.head != nullptr;
                }
                if (arg) {
                    e.argument = g.find(EntryKey::parse(*arg));
                    ready = ready && e.argument != nullptr;
                }
                if (ready) {
                    g.add(std::move(e));
                } else {
                    deferred.push_back(pj);
                }
            }
            if (deferred.size() == pending.size()) {
                throw DataError("grammar has dangling or cyclic head/argument references (entry " +
                                deferred.front()->at("session_id").dump() + ":" +
                                deferred.front()->at("lexical_entry_number").dump() + ")");
            }
            pending = std::move(deferred);
        }
    } catch (const json::exception& e) {
        throw DataError(std::string("malformed grammar JSON: ") + e.what());
    } catch (const GrammarError& e) {
        throw DataError(std::string("invalid grammar: ") + e.what());
    }
    return g;
}

ConstraintTable constraints_from_json(std::string_view text) {
    try {
        const json doc = json::parse(text);
        return parse_constraints(doc.contains("constraints") ? doc.at("constraints") : doc);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed constraint table: ") + e.what());
    }
}

void save_grammar(const Grammar& grammar, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    out << to_json(grammar);
}

Grammar load_grammar(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return grammar_from_json(buf.str());
}

} // namespace modoma::grammar
