#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "modoma/cluster.hpp"
#include "modoma/stats.hpp"

namespace fixture {

inline std::filesystem::path dir() { return MODOMA_FIXTURE_DIR; }

// Two Dutch sentences; 13 KWIC records between them.
inline const std::vector<std::string> kKwicSentences = {
    "werkt niet elke fiets",
    "opnieuw dient begeleiding te zeggen of mooien ineens zongen",
};

// Overlap of test (rows) and training (columns) categories A:a..A:n.
inline const std::vector<std::vector<std::uint64_t>> kOverlap = {
    {3, 12, 0, 0, 1, 8, 5, 0, 2, 0, 0, 1, 1, 0},
    {0, 23, 0, 0, 0, 2, 1, 0, 0, 0, 0, 0, 0, 0},
    {1, 0, 0, 2, 0, 0, 0, 0, 4, 0, 0, 0, 0, 1},
    {0, 0, 1, 3, 0, 0, 0, 0, 0, 0, 4, 0, 0, 0},
    {0, 0, 1, 0, 0, 0, 0, 0, 0, 2, 1, 0, 0, 0},
    {0, 0, 0, 0, 33, 0, 0, 0, 0, 0, 0, 0, 0, 0},
    {1, 0, 0, 0, 0, 1, 0, 0, 2, 0, 0, 0, 0, 0},
    {0, 0, 0, 0, 0, 0, 7, 0, 0, 0, 0, 0, 7, 0},
    {0, 0, 0, 1, 0, 1, 1, 0, 7, 0, 0, 0, 0, 2},
    {0, 0, 0, 0, 0, 3, 1, 30, 0, 0, 0, 1, 0, 0},
    {0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 3, 0, 0, 0},
    {0, 0, 0, 0, 0, 0, 0, 0, 0, 8, 0, 0, 1, 0},
    {0, 0, 0, 0, 0, 2, 1, 0, 0, 0, 1, 7, 0, 0},
    {9, 0, 0, 0, 0, 1, 0, 0, 0, 0, 0, 11, 0, 0},
};

inline modoma::stats::CountTable overlap_table() {
    modoma::stats::CountTable t(14, 14);
    for (std::size_t i = 0; i < 14; ++i)
        for (std::size_t j = 0; j < 14; ++j) t.at(i, j) = kOverlap[i][j];
    return t;
}

// Two assignments over synthetic words whose overlap is exactly kOverlap:
// cell (i, j) contributes kOverlap[i][j] words w<i>_<j>_<n>.
inline std::pair<modoma::cluster::ClusterAssignment, modoma::cluster::ClusterAssignment> overlap_assignments() {
    modoma::cluster::ClusterAssignment test, training;
    test.k = training.k = 14;
    for (std::size_t i = 0; i < 14; ++i) {
        for (std::size_t j = 0; j < 14; ++j) {
            for (std::uint64_t n = 0; n < kOverlap[i][j]; ++n) {
                const auto w = "w" + std::to_string(i) + "_" + std::to_string(j) + "_" + std::to_string(n);
                test.cluster_of[w] = static_cast<int>(i + 1);
                training.cluster_of[w] = static_cast<int>(j + 1);
            }
        }
    }
    return {test, training};
}

} // namespace fixture
