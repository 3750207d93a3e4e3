#include <doctest.h>

#include "fixtures.hpp"
#include "modoma/acquisition.hpp"
#include "modoma/error.hpp"

using namespace modoma;
using namespace modoma::acquisition;

namespace {

std::vector<Utterance> small_corpus(std::uint64_t seed, std::size_t n = 2000) {
    const auto model = mother::load_generator(fixture::dir() / "three_categories.grammar");
    return mother::generate_utterances(model, n, seed);
}

Parameters small_params() {
    auto p = defaults();
    p.k = 3;
    p.min_corpus = 1000;
    return p;
}

} // namespace

TEST_CASE("defaults") {
    const auto p = defaults();
    CHECK(p.k == 14);
    CHECK(p.window_before == 2);
    CHECK(p.window_after == 2);
    CHECK(p.min_freq == 10);
    CHECK(p.column_min_freq == 0);
    CHECK(p.confidence == 60);
    CHECK(p.min_corpus == 10000);
}

TEST_CASE("allocate_feature") {
    grammar::Grammar g;
    CHECK(allocate_feature(g) == "A");
    g.new_entry("winkelen", 1, 1);
    g.set_property({1, 1}, "A", "n", 60);
    CHECK(allocate_feature(g) == "B");
    for (std::size_t i = 1; i < 26; ++i) g.set_property({1, 1}, grammar::upper_label(i), "a", 60);
    CHECK(allocate_feature(g) == "AA");
}

TEST_CASE("label_clusters") {
    cluster::ClusterAssignment a;
    a.k = 3;
    a.cluster_of = {{"x", 2}, {"y", 1}, {"z", 3}, {"w", 1}};
    const auto groups = label_clusters(a);
    REQUIRE(groups.size() == 3);
    CHECK(groups[0] == ClusterGroup{1, "a", {"w", "y"}});
    CHECK(groups[1] == ClusterGroup{2, "b", {"x"}});
    CHECK(groups[2] == ClusterGroup{3, "c", {"z"}});
}

TEST_CASE("acquire_categories: corpus below the minimum") {
    grammar::Grammar g;
    auto p = defaults();
    CHECK_THROWS_AS(acquire_categories(g, small_corpus(1, 100), p, 1), InsufficientDataError);
    CHECK(g.empty());
}

TEST_CASE("acquire_categories: too few words for k") {
    grammar::Grammar g;
    auto p = small_params();
    p.k = 200;
    CHECK_THROWS_AS(acquire_categories(g, small_corpus(1), p, 1), InsufficientDataError);
    CHECK(g.empty());
}

TEST_CASE("acquire_categories: report, grammar update and invariants") {
    grammar::Grammar g;
    g.new_entry("de", 7, 1);
    g.set_property({7, 1}, "A", "z", 60);  // earlier feature must survive

    const auto corpus = small_corpus(3);
    const auto result = acquire_categories(g, corpus, small_params(), 9);
    const auto& r = result.report;
    CHECK(r.feature == "B");
    CHECK(r.clusters.size() == 3);
    CHECK(r.corpus_size == corpus.size());
    CHECK(r.token_count == total_tokens(corpus));
    CHECK(r.token_count == result.artifacts.records.size());
    CHECK(r.updated_entries == 1);
    CHECK(r.created_entries + r.updated_entries == result.artifacts.assignment.cluster_of.size());

    // report equals the cut verbatim
    CHECK(r.assignment() == result.artifacts.assignment);
    CHECK(result.artifacts.assignment == cluster::cut(result.artifacts.dendrogram, 3));

    // every clustered word carries exactly one B value, equal to its group
    for (const auto& group : r.clusters) {
        for (const auto& w : group.words) {
            const auto entries = g.lookup(w);
            REQUIRE(entries.size() == 1);
            const auto* prop = entries[0]->property("B");
            REQUIRE(prop);
            CHECK(prop->value == group.value);
            CHECK(prop->confidence == 60);
        }
    }
    CHECK(g.at({7, 1}).property("A")->value == "z");
    for (const auto& e : g.entries()) CHECK_NOTHROW(grammar::validate(*e));

    // second run allocates C and leaves B alone
    const auto before = g;
    const auto second = acquire_categories(g, small_corpus(4), small_params(), 10);
    CHECK(second.report.feature == "C");
    for (const auto& e : before.entries()) {
        const auto now = g.find(e->key());
        for (const auto& p : e->grammatical_properties) CHECK(now->property(p.type)->value == p.value);
    }
}

TEST_CASE("apply_assignment overwrites a previous value of the same feature") {
    grammar::Grammar g;
    g.new_entry("x", 1, 1);
    g.set_property({1, 1}, "A", "b", 60);
    cluster::ClusterAssignment a;
    a.k = 2;
    a.cluster_of = {{"x", 1}, {"y", 2}};
    const auto r = apply_assignment(g, a, "A", defaults(), 1);
    CHECK(g.at({1, 1}).property("A")->value == "a");
    CHECK(g.overwrite_log().size() == 1);
    CHECK(r.created_entries == 1);
    CHECK(g.lookup("y").front()->key() == grammar::EntryKey{1, 2});
}

TEST_CASE("report JSON round-trip") {
    grammar::Grammar g;
    const auto result = acquire_categories(g, small_corpus(5), small_params(), 1);
    const auto text = to_json(result.report);
    CHECK(report_from_json(text) == result.report);
    CHECK(text.find("\"#\": 1") != std::string::npos);
    const auto path = std::filesystem::temp_directory_path() / "modoma_test_report.json";
    save_report(result.report, path);
    CHECK(load_report(path) == result.report);
    CHECK_THROWS_AS(report_from_json("{}"), DataError);
}
