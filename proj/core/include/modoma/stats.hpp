#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "modoma/cluster.hpp"
#include "modoma/random.hpp"

namespace modoma::stats {

/// Nonnegative r x c count matrix, row-major.
struct CountTable {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<std::uint64_t> cells;

    CountTable() = default;
    CountTable(std::size_t r, std::size_t c) : rows(r), cols(c), cells(r * c, 0) {}
    CountTable(std::size_t r, std::size_t c, std::vector<std::uint64_t> values);

    std::uint64_t at(std::size_t i, std::size_t j) const { return cells[i * cols + j]; }
    std::uint64_t& at(std::size_t i, std::size_t j) { return cells[i * cols + j]; }
    std::vector<std::uint64_t> row_sums() const;
    std::vector<std::uint64_t> col_sums() const;
    std::uint64_t total() const;

    friend bool operator==(const CountTable&, const CountTable&) = default;
};

/// Overlap counts: rows are categories of the first assignment, columns
/// those of the second, both ordered by cluster id.
struct Crosstab {
    std::vector<std::string> row_labels;
    std::vector<std::string> column_labels;
    CountTable counts;

    friend bool operator==(const Crosstab&, const Crosstab&) = default;
};

/// Counts words clustered in both assignments. Labels read
/// "<feature>:<value>" with values a, b, c... by cluster id.
Crosstab crosstab(const cluster::ClusterAssignment& rows, const cluster::ClusterAssignment& columns,
                  std::string_view row_feature = "A", std::string_view column_feature = "A");

enum class Method { exact, monte_carlo };
std::string_view to_string(Method m);

struct TestResult {
    double p = 1.0;
    Method method = Method::exact;
    std::optional<std::uint64_t> iterations;        // Monte Carlo only
    std::optional<std::uint64_t> seed;              // Monte Carlo only
    std::optional<std::uint64_t> extreme;           // Monte Carlo only: tables as extreme
    std::optional<std::uint64_t> correction_factor; // post-hoc only
};

/// Relative tolerance used when comparing table probabilities.
inline constexpr double kProbabilityTolerance = 1e-7;

/// Two-sided Fisher exact test on [[a, b], [c, d]]: sum of the hypergeometric
/// probabilities of all tables with the same margins that are no more likely
/// than the observed one.
TestResult fisher_exact_2x2(std::uint64_t a, std::uint64_t b, std::uint64_t c, std::uint64_t d);
TestResult fisher_exact_2x2(const CountTable& table);

/// Monte-Carlo Fisher test for an r x c table. Samples `iterations` tables
/// with the observed margins (Patefield's algorithm) and returns
/// p = (x + 1) / (B + 1), x = number of samples no more probable than the
/// observed table. Work is split into fixed seeded chunks so the result is
/// independent of `threads` (0 = hardware concurrency).
TestResult fisher_mc(const CountTable& table, std::uint64_t iterations, std::uint64_t seed,
                     unsigned threads = 0);

/// Draws one table with the given margins uniformly from the fixed-margin
/// (multiple hypergeometric) distribution.
class MarginSampler {
public:
    MarginSampler(std::vector<std::uint64_t> row_sums, std::vector<std::uint64_t> col_sums);
    void sample(Rng& rng, CountTable& out) const;

private:
    std::vector<std::uint64_t> row_sums_;
    std::vector<std::uint64_t> col_sums_;
    std::uint64_t total_ = 0;
    std::vector<double> log_factorial_;
};

struct PairwiseResult {
    std::array<std::size_t, 2> rows{};
    std::array<std::size_t, 2> columns{};
    double raw_p = 1.0;
    double p = 1.0;  // Bonferroni corrected
};

struct PosthocResult {
    std::uint64_t correction_factor = 1;  // C(R,2) * C(C,2)
    std::vector<PairwiseResult> pairs;

    const PairwiseResult* find(std::size_t row_a, std::size_t row_b, std::size_t col_a,
                               std::size_t col_b) const;
};

/// Exact 2x2 Fisher test on every (row pair, column pair) subtable with
/// Bonferroni correction over all C(R,2) * C(C,2) of them.
PosthocResult posthoc_pairwise(const CountTable& table);

void write_crosstab_csv(std::ostream& out, const Crosstab& ct);
void write_crosstab_csv(const std::filesystem::path& path, const Crosstab& ct);

/// {method, p, iterations, seed, extreme, correction_factor, pairs:[...]}
std::string results_json(const Crosstab& ct, const TestResult& overall, const PosthocResult& posthoc);

} // namespace modoma::stats
