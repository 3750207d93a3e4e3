#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include "modoma/cluster.hpp"
#include "modoma/error.hpp"
#include "oracles.hpp"

using namespace modoma;
using namespace modoma::cluster;

namespace {

kwic::ContextFrequencyTable table_of(const std::vector<std::vector<std::uint32_t>>& rows) {
    kwic::ContextFrequencyTable t;
    for (std::size_t r = 0; r < rows.size(); ++r) t.rows.push_back("r" + std::to_string(r));
    for (std::size_t c = 0; c < rows.at(0).size(); ++c) t.columns.push_back({"c" + std::to_string(c), 1});
    for (const auto& row : rows) t.counts.insert(t.counts.end(), row.begin(), row.end());
    return t;
}

DistanceMatrix distance_of(const std::vector<std::string>& labels, const std::vector<std::vector<double>>& d) {
    DistanceMatrix m;
    m.labels = labels;
    for (const auto& row : d) m.values.insert(m.values.end(), row.begin(), row.end());
    return m;
}

DistanceMatrix three_leaf() {
    return distance_of({"a", "b", "c"}, {{0, 0.1, 0.9}, {0.1, 0, 0.8}, {0.9, 0.8, 0}});
}

DistanceMatrix random_distance(std::mt19937& rng, std::size_t n) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<std::vector<double>> d(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) d[i][j] = d[j][i] = u(rng);
    std::vector<std::string> labels;
    for (std::size_t i = 0; i < n; ++i) labels.push_back("x" + std::to_string(i));
    return distance_of(labels, d);
}

} // namespace

TEST_CASE("spearman_matrix: identity, reversal, and the rank oracle") {
    const auto same = spearman_matrix(table_of({{1, 4, 2}, {1, 4, 2}}));
    CHECK(same.at(0, 1) == doctest::Approx(1.0));
    const auto rev = spearman_matrix(table_of({{1, 2, 3}, {3, 2, 1}}));
    CHECK(rev.at(0, 1) == doctest::Approx(-1.0));

    const auto m = spearman_matrix(table_of({{2, 0, 5, 1}, {1, 1, 4, 0}}));
    const double expected = oracle::spearman({2, 0, 5, 1}, {1, 1, 4, 0});
    CHECK(std::abs(m.at(0, 1) - expected) < 1e-12);
    CHECK(std::abs(m.at(1, 0) - expected) < 1e-12);
    CHECK(m.at(0, 0) == 1.0);
}

TEST_CASE("average_ranks") {
    const std::vector<double> v{10, 20, 10, 30};
    CHECK(average_ranks(v) == std::vector<double>{1.5, 3, 1.5, 4});
}

TEST_CASE("spearman_matrix: zero rows dropped, constant rows correlate 0") {
    const auto m = spearman_matrix(table_of({{1, 2, 3}, {0, 0, 0}, {2, 2, 2}, {3, 2, 1}}));
    CHECK(m.labels == std::vector<std::string>{"r0", "r2", "r3"});
    CHECK(m.dropped == std::vector<std::string>{"r1"});
    CHECK(m.at(0, 1) == 0.0);
    CHECK(m.at(1, 1) == 1.0);
    CHECK(m.at(0, 2) == doctest::Approx(-1.0));
}

TEST_CASE("spearman_matrix: invariants and thread independence") {
    std::mt19937 rng(3);
    std::uniform_int_distribution<std::uint32_t> cell(0, 6);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<std::vector<std::uint32_t>> rows(9, std::vector<std::uint32_t>(12));
        for (auto& r : rows)
            for (auto& x : r) x = cell(rng);
        for (auto& r : rows) r[0] += 1;  // no all-zero rows
        const auto base = spearman_matrix(table_of(rows), 1);
        CHECK(spearman_matrix(table_of(rows), 4) == base);

        for (std::size_t i = 0; i < base.size(); ++i) {
            CHECK(base.at(i, i) == 1.0);
            for (std::size_t j = 0; j < base.size(); ++j)
                CHECK(std::abs(base.at(i, j) - base.at(j, i)) <= 1e-12);
        }

        // column permutation
        std::vector<std::size_t> perm(12);
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), rng);
        auto permuted = rows;
        for (std::size_t r = 0; r < rows.size(); ++r)
            for (std::size_t c = 0; c < 12; ++c) permuted[r][c] = rows[r][perm[c]];
        const auto pm = spearman_matrix(table_of(permuted));
        for (std::size_t k = 0; k < base.values.size(); ++k) CHECK(pm.values[k] == doctest::Approx(base.values[k]).epsilon(1e-12));

        // positive row scaling
        auto scaled = rows;
        for (auto& x : scaled[2]) x *= 7;
        const auto sm = spearman_matrix(table_of(scaled));
        for (std::size_t k = 0; k < base.values.size(); ++k) CHECK(sm.values[k] == doctest::Approx(base.values[k]).epsilon(1e-12));
    }
}

TEST_CASE("to_distance") {
    CorrelationMatrix c;
    c.labels = {"a", "b", "c", "d"};
    c.values = {1, 1, -1, 0.5, 1, 1, 0.2, 0, -1, 0.2, 1, 0.3, 0.5, 0, 0.3, 1};
    const auto d = to_distance(c);
    CHECK(d.at(0, 1) == 0.0);
    CHECK(d.at(0, 2) == 0.0);
    CHECK(d.at(0, 3) == doctest::Approx(0.75));
    CHECK(d.at(1, 3) == 1.0);
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(d.at(i, i) == 0.0);
        for (std::size_t j = 0; j < 4; ++j) {
            CHECK(d.at(i, j) == d.at(j, i));
            CHECK(d.at(i, j) >= 0.0);
            CHECK(d.at(i, j) <= 1.0);
            if (i != j) CHECK(d.at(i, j) == doctest::Approx(1 - c.at(i, j) * c.at(i, j)));
        }
    }
}

TEST_CASE("agglomerate_complete_link: small examples") {
    const auto two = agglomerate_complete_link(distance_of({"a", "b"}, {{0, 0.4}, {0.4, 0}}));
    REQUIRE(two.merges.size() == 1);
    CHECK(two.merges[0] == Merge{0, 1, 0.4});

    const auto three = agglomerate_complete_link(three_leaf());
    REQUIRE(three.merges.size() == 2);
    CHECK(three.merges[0] == Merge{0, 1, 0.1});
    CHECK(three.merges[1] == Merge{3, 2, 0.9});
    CHECK(three.root() == 4);
    CHECK(three.height(4) == 0.9);
}

TEST_CASE("agglomerate_complete_link: ties resolve to the smallest leaf pair") {
    const auto d = agglomerate_complete_link(
        distance_of({"a", "b", "c", "d"}, {{0, 0.5, 0.5, 0.5}, {0.5, 0, 0.5, 0.5}, {0.5, 0.5, 0, 0.5}, {0.5, 0.5, 0.5, 0}}));
    CHECK(d.merges[0] == Merge{0, 1, 0.5});
    CHECK(d.merges[1] == Merge{4, 2, 0.5});
    CHECK(d.merges[2] == Merge{5, 3, 0.5});
}

TEST_CASE("agglomerate_complete_link: matches the naive reference on random 15x15") {
    std::mt19937 rng(15);
    for (int trial = 0; trial < 25; ++trial) {
        const auto dist = random_distance(rng, 15);
        std::vector<std::vector<double>> raw(15, std::vector<double>(15));
        for (std::size_t i = 0; i < 15; ++i)
            for (std::size_t j = 0; j < 15; ++j) raw[i][j] = dist.at(i, j);
        const auto got = agglomerate_complete_link(dist);
        const auto want = oracle::complete_link(raw);
        REQUIRE(got.merges.size() == want.size());
        for (std::size_t m = 0; m < want.size(); ++m) {
            CHECK(got.merges[m].left == want[m].left);
            CHECK(got.merges[m].right == want[m].right);
            CHECK(got.merges[m].height == want[m].height);
        }
        for (std::size_t m = 1; m < got.merges.size(); ++m)
            CHECK(got.merges[m].height >= got.merges[m - 1].height);
        CHECK_NOTHROW(validate(got));
    }
}

TEST_CASE("agglomerate_complete_link: fewer than two leaves") {
    CHECK_THROWS_AS(agglomerate_complete_link(distance_of({"a"}, {{0}})), PreconditionError);
    CHECK_THROWS_AS(agglomerate_complete_link(DistanceMatrix{}), PreconditionError);
}

TEST_CASE("cut") {
    const auto d = agglomerate_complete_link(three_leaf());
    const auto k2 = cut(d, 2);
    CHECK(k2.cluster_of == std::map<std::string, int>{{"a", 1}, {"b", 1}, {"c", 2}});
    const auto k1 = cut(d, 1);
    CHECK(k1.clusters() == std::vector<std::vector<std::string>>{{"a", "b", "c"}});
    const auto k3 = cut(d, 3);
    CHECK(k3.cluster_of == std::map<std::string, int>{{"a", 1}, {"b", 2}, {"c", 3}});
    CHECK_THROWS_AS(cut(d, 0), PreconditionError);
    CHECK_THROWS_AS(cut(d, 4), PreconditionError);
}

TEST_CASE("cut: refining k to k+1 splits exactly one cluster") {
    std::mt19937 rng(21);
    for (int trial = 0; trial < 10; ++trial) {
        const auto d = agglomerate_complete_link(random_distance(rng, 12));
        for (std::size_t k = 1; k < 12; ++k) {
            const auto coarse = cut(d, k);
            const auto fine = cut(d, k + 1);
            std::set<int> used;
            for (const auto& [w, id] : fine.cluster_of) used.insert(id);
            CHECK(used.size() == k + 1);
            // each fine cluster sits inside one coarse cluster
            std::map<int, std::set<int>> parents;
            for (const auto& [w, id] : fine.cluster_of) parents[id].insert(coarse.cluster_of.at(w));
            for (const auto& [id, ps] : parents) CHECK(ps.size() == 1);
            // exactly one coarse cluster has two fine children
            std::map<int, std::set<int>> children;
            for (const auto& [w, id] : fine.cluster_of) children[coarse.cluster_of.at(w)].insert(id);
            std::size_t split = 0;
            for (const auto& [id, cs] : children) split += cs.size() == 2 ? 1 : 0;
            CHECK(split == 1);
        }
    }
}

TEST_CASE("export: newick and json") {
    const auto two = agglomerate_complete_link(distance_of({"a", "b"}, {{0, 0.4}, {0.4, 0}}));
    CHECK(to_newick(two) == "(a:0.4,b:0.4);");
    const auto three = agglomerate_complete_link(three_leaf());
    CHECK(to_newick(three) == "((a:0.1,b:0.1):0.8,c:0.9);");
    CHECK(to_newick(agglomerate_complete_link(distance_of({"it's", "b"}, {{0, 0.5}, {0.5, 0}}))) ==
          "('it''s':0.5,b:0.5);");

    std::mt19937 rng(8);
    for (int trial = 0; trial < 10; ++trial) {
        const auto d = agglomerate_complete_link(random_distance(rng, 2 + trial));
        CHECK(dendrogram_from_json(to_json(d)) == d);
    }
    CHECK_THROWS_AS(dendrogram_from_json("{\"leaves\":[\"a\",\"b\"],\"merges\":[{\"left\":0,\"right\":7,\"height\":1}]}"),
                    DataError);
}

TEST_CASE("export: svg and files") {
    const auto d = agglomerate_complete_link(three_leaf());
    const auto svg = to_svg(d);
    CHECK(svg.starts_with("<svg"));
    CHECK(svg.find(">c</text>") != std::string::npos);
    CHECK(parse_dendrogram_format("newick") == DendrogramFormat::newick);
    CHECK_THROWS_AS(parse_dendrogram_format("png"), ConfigError);

    const auto path = std::filesystem::temp_directory_path() / "modoma_test_dendrogram.json";
    export_dendrogram(d, DendrogramFormat::json, path);
    CHECK(load_dendrogram_json(path) == d);
}

TEST_CASE("write_matrix_csv") {
    std::ostringstream out;
    write_matrix_csv(out, distance_of({"a", "b"}, {{0, 0.25}, {0.25, 0}}));
    CHECK(out.str() == ",a,b\na,0,0.25\nb,0.25,0\n");
}
