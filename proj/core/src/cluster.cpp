#include "modoma/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <thread>

#include "modoma/error.hpp"
#include "modoma/text.hpp"

namespace modoma::cluster {

std::vector<double> average_ranks(std::span<const double> values) {
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(values.size());
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i + 1;
        while (j < order.size() && values[order[j]] == values[order[i]]) ++j;
        // positions i..j-1 (0-based) share rank mean((i+1)..j)
        const double rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
        for (std::size_t t = i; t < j; ++t) ranks[order[t]] = rank;
        i = j;
    }
    return ranks;
}

namespace {

// Splits [0, n) into contiguous chunks and runs fn(begin, end) on each.
template <typename Fn>
void parallel_rows(std::size_t n, unsigned threads, Fn fn) {
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));
    if (threads <= 1) {
        fn(std::size_t{0}, n);
        return;
    }
    std::vector<std::jthread> workers;
    const std::size_t chunk = (n + threads - 1) / threads;
    for (std::size_t begin = 0; begin < n; begin += chunk) {
        workers.emplace_back(fn, begin, std::min(n, begin + chunk));
    }
}

} // namespace

CorrelationMatrix spearman_matrix(const kwic::ContextFrequencyTable& table, unsigned threads) {
    if (table.row_count() < 2 || table.column_count() < 2) {
        throw PreconditionError("spearman_matrix: need at least 2 rows and 2 columns");
    }
    CorrelationMatrix corr;
    const std::size_t m = table.column_count();

    // Centered rank vectors; norm 0 marks a constant row.
    std::vector<std::vector<double>> centered;
    std::vector<double> norms;
    std::vector<double> row(m);
    for (std::size_t r = 0; r < table.row_count(); ++r) {
        const auto counts = table.row(r);
        if (std::all_of(counts.begin(), counts.end(), [](auto c) { return c == 0; })) {
            corr.dropped.push_back(table.rows[r]);
            continue;
        }
        std::copy(counts.begin(), counts.end(), row.begin());
        auto ranks = average_ranks(row);
        const double mean = (static_cast<double>(m) + 1.0) / 2.0;
        double ss = 0.0;
        for (double& x : ranks) {
            x -= mean;
            ss += x * x;
        }
        corr.labels.push_back(table.rows[r]);
        centered.push_back(std::move(ranks));
        norms.push_back(std::sqrt(ss));
    }
    const std::size_t n = corr.labels.size();
    if (n < 2) {
        throw InsufficientDataError("fewer than 2 rows with nonzero context counts");
    }
    corr.values.assign(n * n, 0.0);

    parallel_rows(n, threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            corr.at(i, i) = 1.0;
            for (std::size_t j = i + 1; j < n; ++j) {
                double rho = 0.0;
                if (norms[i] > 0.0 && norms[j] > 0.0) {
                    const double dot = std::inner_product(centered[i].begin(), centered[i].end(),
                                                          centered[j].begin(), 0.0);
                    rho = std::clamp(dot / (norms[i] * norms[j]), -1.0, 1.0);
                }
                corr.at(i, j) = rho;
            }
        }
    });
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < i; ++j) corr.at(i, j) = corr.at(j, i);
    }
    return corr;
}

DistanceMatrix to_distance(const CorrelationMatrix& corr) {
    DistanceMatrix dist;
    dist.labels = corr.labels;
    dist.values.resize(corr.values.size());
    const std::size_t n = corr.size();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const double rho = corr.at(i, j);
            dist.at(i, j) = i == j ? 0.0 : std::clamp(1.0 - rho * rho, 0.0, 1.0);
        }
    }
    return dist;
}

double Dendrogram::height(std::size_t node) const {
    return is_leaf(node) ? 0.0 : merges.at(node - leaves.size()).height;
}

void validate(const Dendrogram& d) {
    const std::size_t n = d.leaves.size();
    if (n < 2) throw PreconditionError("dendrogram needs at least 2 leaves");
    if (d.merges.size() != n - 1) {
        throw PreconditionError("dendrogram with " + std::to_string(n) + " leaves must have " +
                                std::to_string(n - 1) + " merges");
    }
    std::vector<bool> used(2 * n - 1, false);
    double previous = -INFINITY;
    for (std::size_t i = 0; i < d.merges.size(); ++i) {
        const auto& m = d.merges[i];
        const std::size_t self = n + i;
        for (std::size_t child : {m.left, m.right}) {
            if (child >= self || used[child]) {
                throw PreconditionError("merge " + std::to_string(i) + " references invalid node " +
                                        std::to_string(child));
            }
            used[child] = true;
        }
        if (m.left == m.right) throw PreconditionError("merge joins a node with itself");
        if (!(m.height >= previous)) throw PreconditionError("merge heights must be nondecreasing");
        previous = m.height;
    }
}

Dendrogram agglomerate_complete_link(const DistanceMatrix& dist) {
    const std::size_t n = dist.size();
    if (n < 2) throw PreconditionError("agglomerate_complete_link: need at least 2 leaves");

    Dendrogram out;
    out.leaves = dist.labels;
    out.merges.reserve(n - 1);

    // Slot i holds the active cluster whose smallest leaf index is i.
    std::vector<double> d = dist.values;
    std::vector<bool> active(n, true);
    std::vector<std::size_t> node(n);
    std::iota(node.begin(), node.end(), std::size_t{0});
    std::vector<std::size_t> nearest(n, 0);
    std::vector<double> nearest_dist(n, INFINITY);

    auto refresh = [&](std::size_t i) {
        nearest_dist[i] = INFINITY;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i || !active[j]) continue;
            // strict < keeps the smallest index among ties
            if (d[i * n + j] < nearest_dist[i]) {
                nearest_dist[i] = d[i * n + j];
                nearest[i] = j;
            }
        }
    };
    for (std::size_t i = 0; i < n; ++i) refresh(i);

    for (std::size_t step = 0; step + 1 < n; ++step) {
        std::size_t a = n, b = n;
        double best = INFINITY;
        for (std::size_t i = 0; i < n; ++i) {
            if (!active[i]) continue;
            const std::size_t lo = std::min(i, nearest[i]);
            const std::size_t hi = std::max(i, nearest[i]);
            const double di = nearest_dist[i];
            if (a == n || di < best || (di == best && std::pair(lo, hi) < std::pair(a, b))) {
                best = di;
                a = lo;
                b = hi;
            }
        }

        out.merges.push_back({node[a], node[b], best});
        node[a] = n + step;
        active[b] = false;
        for (std::size_t k = 0; k < n; ++k) {
            if (!active[k] || k == a) continue;
            const double merged = std::max(d[a * n + k], d[b * n + k]);
            d[a * n + k] = merged;
            d[k * n + a] = merged;
        }
        // Distances only grow under complete link, so only clusters whose
        // nearest neighbour was a or b can have a stale entry.
        for (std::size_t k = 0; k < n; ++k) {
            if (!active[k]) continue;
            if (k == a || nearest[k] == a || nearest[k] == b) refresh(k);
        }
    }
    return out;
}

std::vector<std::vector<std::string>> ClusterAssignment::clusters() const {
    std::vector<std::vector<std::string>> out(k);
    for (const auto& [token, id] : cluster_of) out.at(static_cast<std::size_t>(id - 1)).push_back(token);
    return out;
}

ClusterAssignment cut(const Dendrogram& dendrogram, std::size_t k) {
    validate(dendrogram);
    const std::size_t n = dendrogram.leaves.size();
    if (k < 1 || k > n) {
        throw PreconditionError("cut: k=" + std::to_string(k) + " outside 1.." + std::to_string(n));
    }
    // Union-find over nodes; apply the first n-k merges.
    std::vector<std::size_t> parent(2 * n - 1);
    std::iota(parent.begin(), parent.end(), std::size_t{0});
    auto find = [&](std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    for (std::size_t i = 0; i < n - k; ++i) {
        const auto& m = dendrogram.merges[i];
        parent[find(m.left)] = n + i;
        parent[find(m.right)] = n + i;
    }

    ClusterAssignment out;
    out.k = k;
    std::map<std::size_t, int> id_of_root;
    for (std::size_t leaf = 0; leaf < n; ++leaf) {
        const auto root = find(leaf);
        auto [it, inserted] = id_of_root.emplace(root, static_cast<int>(id_of_root.size()) + 1);
        out.cluster_of[dendrogram.leaves[leaf]] = it->second;
    }
    return out;
}

void write_matrix_csv(std::ostream& out, const LabeledMatrix& matrix) {
    for (const auto& l : matrix.labels) out << ',' << text::csv_field(l);
    out << '\n';
    for (std::size_t i = 0; i < matrix.size(); ++i) {
        out << text::csv_field(matrix.labels[i]);
        for (std::size_t j = 0; j < matrix.size(); ++j) out << ',' << text::format_double(matrix.at(i, j));
        out << '\n';
    }
}

void write_matrix_csv(const std::filesystem::path& path, const LabeledMatrix& matrix) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    write_matrix_csv(out, matrix);
}

} // namespace modoma::cluster
