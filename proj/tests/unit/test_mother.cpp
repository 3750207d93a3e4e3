#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "fixtures.hpp"
#include "modoma/error.hpp"
#include "modoma/mother.hpp"

using namespace modoma;
namespace fs = std::filesystem;

namespace {

fs::path write_temp(const std::string& name, const std::string& body) {
    const auto p = fs::temp_directory_path() / ("modoma_test_" + name);
    std::ofstream(p, std::ios::binary) << body;
    return p;
}

} // namespace

TEST_CASE("load_generator: minimal grammar") {
    const auto m = mother::load_generator(fixture::dir() / "minimal.grammar");
    CHECK(m.rules.size() == 1);
    CHECK(m.lexicon.size() == 2);
    CHECK(m.start == "S");
    // no CAT lines: tokens take their class as category
    CHECK(m.categories.at("ik") == "NP");
    CHECK(m.categories.at("werkt") == "VP");
}

TEST_CASE("load_generator: negative weight is a validation error naming the symbol") {
    try {
        mother::load_generator(fixture::dir() / "negative_weight.grammar");
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("'S'") != std::string::npos);
    }
}

TEST_CASE("load_generator: three-category fixture has three labels") {
    const auto m = mother::load_generator(fixture::dir() / "three_categories.grammar");
    CHECK(m.category_labels() == std::set<std::string>{"det", "noun", "verb"});
    CHECK(m.tokens().size() == 25);
}

TEST_CASE("parse_generator: syntax errors carry the line number") {
    try {
        mother::parse_generator("START S\nRULE S NP\n");
        FAIL("expected SpecParseError");
    } catch (const SpecParseError& e) {
        CHECK(e.line() == 2);
    }
    CHECK_THROWS_AS(mother::parse_generator("START S\nBOGUS x\n"), SpecParseError);
    CHECK_THROWS_AS(mother::parse_generator("START S\nWORD S x @abc\n"), SpecParseError);
    CHECK_THROWS_AS(mother::parse_generator("START S\nSTART T\n"), SpecParseError);
}

TEST_CASE("parse_generator: validation failures") {
    // undefined nonterminal reachable from START
    try {
        mother::parse_generator("START S\nRULE S -> NP VP\nWORD NP ik\n");
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("'VP'") != std::string::npos);
    }
    CHECK_THROWS_AS(mother::parse_generator("RULE S -> NP\nWORD NP ik\n"), ValidationError);
    CHECK_THROWS_AS(mother::parse_generator("START S\nWORD S ik @0\n"), ValidationError);
    CHECK_THROWS_AS(mother::parse_generator("START S\nWORD S ik\nCAT jij pron\n"), ValidationError);
    // comments and explicit categories
    const auto m = mother::parse_generator("# c\nSTART S # start\nWORD S ik @2\nCAT ik pron\n");
    CHECK(m.categories.at("ik") == "pron");
    CHECK(m.lexicon.at("S").front().weight == 2.0);
}

TEST_CASE("generate_utterances: minimal grammar yields 'ik werkt'") {
    const auto m = mother::load_generator(fixture::dir() / "minimal.grammar");
    const auto out = mother::generate_utterances(m, 1, 0);
    REQUIRE(out.size() == 1);
    CHECK(out[0].text() == "ik werkt");
    CHECK(out[0].source == Agent::mother);
    CHECK(out[0].index == 0);
}

TEST_CASE("generate_utterances: determinism and lexicon closure") {
    const auto m = mother::load_generator(fixture::dir() / "three_categories.grammar");
    const auto a = mother::generate_utterances(m, 500, 42);
    const auto b = mother::generate_utterances(m, 500, 42);
    const auto c = mother::generate_utterances(m, 500, 43);
    CHECK(a == b);
    CHECK(a != c);
    CHECK(a.size() == 500);
    const auto lexicon = m.tokens();
    for (const auto& u : a) {
        CHECK_FALSE(u.tokens.empty());
        for (const auto& t : u.tokens) CHECK(lexicon.contains(t));
    }
    CHECK_THROWS_AS(mother::generate_utterances(m, 0, 1), PreconditionError);
}

TEST_CASE("generate_utterances: runaway recursion hits the depth cap") {
    // S -> S S almost always; derivations essentially never terminate.
    const auto m = mother::parse_generator("START S\nRULE S -> S S @1000000\nWORD S x @1e-9\n");
    CHECK_THROWS_AS(mother::generate_utterances(m, 1, 3), GenerationError);
}

TEST_CASE("generate_utterances: recursive grammar within the cap terminates") {
    const auto m = mother::parse_generator("START S\nRULE S -> x S @1\nWORD x a\nWORD S b @1\n");
    const auto out = mother::generate_utterances(m, 200, 5);
    for (const auto& u : out) CHECK(u.tokens.back() == "b");
}

TEST_CASE("ingest_corpus") {
    SUBCASE("one line with four tokens") {
        const auto p = write_temp("corpus1.txt", "werkt niet elke fiets\n");
        const auto c = mother::ingest_corpus(p);
        REQUIRE(c.size() == 1);
        CHECK(c[0].tokens == std::vector<std::string>{"werkt", "niet", "elke", "fiets"});
    }
    SUBCASE("empty file") {
        const auto p = write_temp("corpus_empty.txt", "");
        CHECK_THROWS_AS(mother::ingest_corpus(p), EmptyCorpusError);
    }
    SUBCASE("blank lines are skipped") {
        const auto p = write_temp("corpus_blank.txt", "ik werkt\n\n  \njij leest.\n\n\n");
        const auto c = mother::ingest_corpus(p);
        REQUIRE(c.size() == 2);
        CHECK(c[1].index == 1);
        CHECK(c[1].text() == "jij leest");
        CHECK(total_tokens(c) == 4);
    }
    SUBCASE("missing file") {
        CHECK_THROWS_AS(mother::ingest_corpus("/nonexistent/modoma/corpus.txt"), IoError);
    }
}
