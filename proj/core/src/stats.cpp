#include "modoma/stats.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <thread>
#include <tuple>

#include <json.hpp>

#include "modoma/error.hpp"
#include "modoma/grammar.hpp"
#include "modoma/text.hpp"

namespace modoma::stats {

CountTable::CountTable(std::size_t r, std::size_t c, std::vector<std::uint64_t> values)
    : rows(r), cols(c), cells(std::move(values)) {
    if (cells.size() != r * c) throw PreconditionError("CountTable: cell count does not match shape");
}

std::vector<std::uint64_t> CountTable::row_sums() const {
    std::vector<std::uint64_t> out(rows, 0);
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j) out[i] += at(i, j);
    return out;
}

std::vector<std::uint64_t> CountTable::col_sums() const {
    std::vector<std::uint64_t> out(cols, 0);
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j) out[j] += at(i, j);
    return out;
}

std::uint64_t CountTable::total() const {
    return std::accumulate(cells.begin(), cells.end(), std::uint64_t{0});
}

Crosstab crosstab(const cluster::ClusterAssignment& rows, const cluster::ClusterAssignment& columns,
                  std::string_view row_feature, std::string_view column_feature) {
    Crosstab ct;
    for (std::size_t i = 0; i < rows.k; ++i) {
        ct.row_labels.push_back(std::string(row_feature) + ":" + grammar::lower_label(i));
    }
    for (std::size_t j = 0; j < columns.k; ++j) {
        ct.column_labels.push_back(std::string(column_feature) + ":" + grammar::lower_label(j));
    }
    ct.counts = CountTable(rows.k, columns.k);
    for (const auto& [word, row_id] : rows.cluster_of) {
        const auto it = columns.cluster_of.find(word);
        if (it == columns.cluster_of.end()) continue;
        ++ct.counts.at(static_cast<std::size_t>(row_id - 1), static_cast<std::size_t>(it->second - 1));
    }
    return ct;
}

std::string_view to_string(Method m) { return m == Method::exact ? "exact" : "monte_carlo"; }

namespace {

double log_factorial(std::uint64_t n) { return std::lgamma(static_cast<double>(n) + 1.0); }

double log_choose(std::uint64_t n, std::uint64_t k) {
    return log_factorial(n) - log_factorial(k) - log_factorial(n - k);
}

} // namespace

TestResult fisher_exact_2x2(std::uint64_t a, std::uint64_t b, std::uint64_t c, std::uint64_t d) {
    // Row swaps, column swaps and transposition leave p unchanged; summing
    // over one canonical orientation makes that hold bit for bit.
    using Cells = std::array<std::uint64_t, 4>;
    Cells best{a, b, c, d};
    for (const Cells& v : {Cells{a, c, b, d}, Cells{c, d, a, b}, Cells{b, a, d, c}, Cells{d, c, b, a},
                           Cells{c, a, d, b}, Cells{b, d, a, c}, Cells{d, b, c, a}}) {
        best = std::min(best, v);
    }
    std::tie(a, b, c, d) = std::tuple{best[0], best[1], best[2], best[3]};

    TestResult r;
    r.method = Method::exact;
    const std::uint64_t r1 = a + b, r2 = c + d, c1 = a + c, n = a + b + c + d;
    if (r1 == 0 || r2 == 0 || c1 == 0 || c1 == n) {
        r.p = 1.0;  // only one table has these margins
        return r;
    }
    const double log_denominator = log_choose(n, c1);
    auto log_prob = [&](std::uint64_t x) { return log_choose(r1, x) + log_choose(r2, c1 - x) - log_denominator; };

    const double observed = log_prob(a);
    const double threshold = observed + std::log1p(kProbabilityTolerance);
    const std::uint64_t lo = c1 > r2 ? c1 - r2 : 0;
    const std::uint64_t hi = std::min(r1, c1);
    double p = 0.0;
    for (std::uint64_t x = lo; x <= hi; ++x) {
        const double lp = log_prob(x);
        if (lp <= threshold) p += std::exp(lp);
    }
    r.p = std::min(1.0, p);
    return r;
}

TestResult fisher_exact_2x2(const CountTable& t) {
    if (t.rows != 2 || t.cols != 2) throw PreconditionError("fisher_exact_2x2: table must be 2x2");
    return fisher_exact_2x2(t.at(0, 0), t.at(0, 1), t.at(1, 0), t.at(1, 1));
}

MarginSampler::MarginSampler(std::vector<std::uint64_t> row_sums, std::vector<std::uint64_t> col_sums)
    : row_sums_(std::move(row_sums)), col_sums_(std::move(col_sums)) {
    total_ = std::accumulate(row_sums_.begin(), row_sums_.end(), std::uint64_t{0});
    if (total_ != std::accumulate(col_sums_.begin(), col_sums_.end(), std::uint64_t{0})) {
        throw PreconditionError("MarginSampler: row and column totals differ");
    }
    if (row_sums_.size() < 2 || col_sums_.size() < 2) {
        throw PreconditionError("MarginSampler: need at least 2 rows and 2 columns");
    }
    log_factorial_.resize(total_ + 1);
    for (std::uint64_t i = 0; i <= total_; ++i) log_factorial_[i] = log_factorial(i);
}

// Patefield (1981), algorithm AS 159: fills the table row by row, drawing
// each cell from its conditional hypergeometric given the cells so far.
void MarginSampler::sample(Rng& rng, CountTable& out) const {
    const std::size_t nrow = row_sums_.size(), ncol = col_sums_.size();
    out.rows = nrow;
    out.cols = ncol;
    out.cells.assign(nrow * ncol, 0);
    const auto& fact = log_factorial_;

    std::vector<std::int64_t> col_left(col_sums_.begin(), col_sums_.end());
    std::int64_t remaining = static_cast<std::int64_t>(total_);
    for (std::size_t l = 0; l + 1 < nrow; ++l) {
        std::int64_t ia = static_cast<std::int64_t>(row_sums_[l]);  // left to place in this row
        std::int64_t ic = remaining;                                 // total in columns m..end, rows l..end
        remaining -= ia;
        for (std::size_t m = 0; m + 1 < ncol; ++m) {
            const std::int64_t id = col_left[m];
            const std::int64_t ie = ic;
            ic -= id;
            const std::int64_t ib = ie - ia;
            const std::int64_t ii = ib - id;
            if (ie == 0) {
                ia = 0;
                break;
            }
            double u = rng.uniform01();
            std::int64_t nlm;
            for (;;) {
                // Start at the conditional mode and search outward.
                nlm = static_cast<std::int64_t>(static_cast<double>(ia) * (static_cast<double>(id) / static_cast<double>(ie)) + 0.5);
                double x = std::exp(fact[ia] + fact[ib] + fact[ic] + fact[id] - fact[ie] - fact[nlm] -
                                    fact[id - nlm] - fact[ia - nlm] - fact[ii + nlm]);
                if (x >= u) break;
                if (x == 0.0) throw Error("Patefield sampler: probability underflow");
                double sum = x, y = x;
                std::int64_t nll = nlm;
                bool done = false, up_blocked, down_blocked;
                do {
                    const double j_up = static_cast<double>(id - nlm) * static_cast<double>(ia - nlm);
                    up_blocked = j_up == 0.0;
                    if (!up_blocked) {
                        ++nlm;
                        x = x * j_up / (static_cast<double>(nlm) * static_cast<double>(ii + nlm));
                        sum += x;
                        if (sum >= u) {
                            done = true;
                            break;
                        }
                    }
                    do {
                        const double j_down = static_cast<double>(nll) * static_cast<double>(ii + nll);
                        down_blocked = j_down == 0.0;
                        if (!down_blocked) {
                            --nll;
                            y = y * j_down / (static_cast<double>(id - nll) * static_cast<double>(ia - nll));
                            sum += y;
                            if (sum >= u) {
                                nlm = nll;
                                done = true;
                                break;
                            }
                            if (!up_blocked) break;
                        }
                    } while (!down_blocked);
                } while (!done && !up_blocked);
                if (done) break;
                u = sum * rng.uniform01();
            }
            out.at(l, m) = static_cast<std::uint64_t>(nlm);
            ia -= nlm;
            col_left[m] -= nlm;
        }
        out.at(l, ncol - 1) = static_cast<std::uint64_t>(ia);
        col_left[ncol - 1] -= ia;
    }
    for (std::size_t m = 0; m < ncol; ++m) out.at(nrow - 1, m) = static_cast<std::uint64_t>(col_left[m]);
}

namespace {

double sum_log_factorials(const CountTable& t, const std::vector<double>& fact) {
    double s = 0.0;
    for (auto v : t.cells) s += fact[v];
    return s;
}

constexpr std::uint64_t kChunks = 16;

} // namespace

TestResult fisher_mc(const CountTable& table, std::uint64_t iterations, std::uint64_t seed,
                     unsigned threads) {
    if (iterations < 1) throw PreconditionError("fisher_mc: need at least one iteration");
    if (table.rows < 2 || table.cols < 2) throw PreconditionError("fisher_mc: table must be at least 2x2");

    // Empty rows/columns carry no information and are dropped.
    const auto rs = table.row_sums(), cs = table.col_sums();
    std::vector<std::size_t> keep_r, keep_c;
    for (std::size_t i = 0; i < table.rows; ++i) if (rs[i] > 0) keep_r.push_back(i);
    for (std::size_t j = 0; j < table.cols; ++j) if (cs[j] > 0) keep_c.push_back(j);

    TestResult r;
    r.method = Method::monte_carlo;
    r.iterations = iterations;
    r.seed = seed;
    if (keep_r.size() < 2 || keep_c.size() < 2) {
        // A single possible table: every sample equals the observation.
        r.extreme = iterations;
        r.p = 1.0;
        return r;
    }
    CountTable observed(keep_r.size(), keep_c.size());
    for (std::size_t i = 0; i < keep_r.size(); ++i)
        for (std::size_t j = 0; j < keep_c.size(); ++j) observed.at(i, j) = table.at(keep_r[i], keep_c[j]);

    const MarginSampler sampler(observed.row_sums(), observed.col_sums());
    std::vector<double> fact(observed.total() + 1);
    for (std::size_t i = 0; i < fact.size(); ++i) fact[i] = log_factorial(i);
    // Larger sum of log factorials = less probable table.
    const double stat_obs = sum_log_factorials(observed, fact);
    const double cutoff = stat_obs - kProbabilityTolerance * std::abs(stat_obs);

    std::vector<std::uint64_t> extreme(kChunks, 0);
    auto run_chunk = [&](std::uint64_t chunk) {
        const std::uint64_t begin = iterations * chunk / kChunks;
        const std::uint64_t end = iterations * (chunk + 1) / kChunks;
        Rng rng(split_seed(seed, chunk));
        CountTable sim;
        std::uint64_t hits = 0;
        for (std::uint64_t b = begin; b < end; ++b) {
            sampler.sample(rng, sim);
            if (sum_log_factorials(sim, fact) >= cutoff) ++hits;
        }
        extreme[chunk] = hits;
    };

    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::uint64_t>(threads, kChunks));
    if (threads <= 1) {
        for (std::uint64_t c = 0; c < kChunks; ++c) run_chunk(c);
    } else {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < threads; ++w) {
            pool.emplace_back([&, w] {
                for (std::uint64_t c = w; c < kChunks; c += threads) run_chunk(c);
            });
        }
    }
    const std::uint64_t x = std::accumulate(extreme.begin(), extreme.end(), std::uint64_t{0});
    r.extreme = x;
    r.p = static_cast<double>(x + 1) / static_cast<double>(iterations + 1);
    return r;
}

const PairwiseResult* PosthocResult::find(std::size_t row_a, std::size_t row_b, std::size_t col_a,
                                          std::size_t col_b) const {
    const std::array<std::size_t, 2> rows{std::min(row_a, row_b), std::max(row_a, row_b)};
    const std::array<std::size_t, 2> cols{std::min(col_a, col_b), std::max(col_a, col_b)};
    for (const auto& p : pairs) {
        if (p.rows == rows && p.columns == cols) return &p;
    }
    return nullptr;
}

PosthocResult posthoc_pairwise(const CountTable& t) {
    if (t.rows < 2 || t.cols < 2) throw PreconditionError("posthoc_pairwise: need at least 2 rows and 2 columns");
    PosthocResult out;
    out.correction_factor = (t.rows * (t.rows - 1) / 2) * (t.cols * (t.cols - 1) / 2);
    const double m = static_cast<double>(out.correction_factor);
    out.pairs.reserve(out.correction_factor);
    for (std::size_t i = 0; i < t.rows; ++i) {
        for (std::size_t j = i + 1; j < t.rows; ++j) {
            for (std::size_t k = 0; k < t.cols; ++k) {
                for (std::size_t l = k + 1; l < t.cols; ++l) {
                    const double raw = fisher_exact_2x2(t.at(i, k), t.at(i, l), t.at(j, k), t.at(j, l)).p;
                    out.pairs.push_back({{i, j}, {k, l}, raw, std::min(1.0, raw * m)});
                }
            }
        }
    }
    return out;
}

void write_crosstab_csv(std::ostream& out, const Crosstab& ct) {
    for (const auto& l : ct.column_labels) out << ',' << text::csv_field(l);
    out << '\n';
    for (std::size_t i = 0; i < ct.counts.rows; ++i) {
        out << text::csv_field(ct.row_labels[i]);
        for (std::size_t j = 0; j < ct.counts.cols; ++j) out << ',' << ct.counts.at(i, j);
        out << '\n';
    }
}

void write_crosstab_csv(const std::filesystem::path& path, const Crosstab& ct) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    write_crosstab_csv(out, ct);
}

std::string results_json(const Crosstab& ct, const TestResult& overall, const PosthocResult& posthoc) {
    using nlohmann::ordered_json;
    ordered_json doc;
    doc["method"] = std::string(to_string(overall.method));
    doc["p"] = overall.p;
    doc["iterations"] = overall.iterations ? ordered_json(*overall.iterations) : ordered_json(nullptr);
    doc["seed"] = overall.seed ? ordered_json(*overall.seed) : ordered_json(nullptr);
    doc["extreme"] = overall.extreme ? ordered_json(*overall.extreme) : ordered_json(nullptr);
    doc["correction_factor"] = posthoc.correction_factor;
    ordered_json pairs = ordered_json::array();
    for (const auto& p : posthoc.pairs) {
        ordered_json e;
        e["rows"] = {ct.row_labels[p.rows[0]], ct.row_labels[p.rows[1]]};
        e["columns"] = {ct.column_labels[p.columns[0]], ct.column_labels[p.columns[1]]};
        e["raw_p"] = p.raw_p;
        e["p"] = p.p;
        pairs.push_back(std::move(e));
    }
    doc["pairs"] = std::move(pairs);
    return doc.dump(2) + "\n";
}

} // namespace modoma::stats
