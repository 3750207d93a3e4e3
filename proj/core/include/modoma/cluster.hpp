#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "modoma/kwic.hpp"

namespace modoma::cluster {

/// Square matrix with one label per row/column.
struct LabeledMatrix {
    std::vector<std::string> labels;
    std::vector<double> values;  // row-major, labels.size()^2

    std::size_t size() const { return labels.size(); }
    double at(std::size_t i, std::size_t j) const { return values[i * labels.size() + j]; }
    double& at(std::size_t i, std::size_t j) { return values[i * labels.size() + j]; }

    friend bool operator==(const LabeledMatrix&, const LabeledMatrix&) = default;
};

/// Spearman correlations between table rows.
struct CorrelationMatrix : LabeledMatrix {
    /// Rows that were all zero and therefore left out.
    std::vector<std::string> dropped;
};

/// d = 1 - rho^2, in [0, 1] with a zero diagonal.
struct DistanceMatrix : LabeledMatrix {};

/// 1-based average ranks (ties share the mean of their positions).
std::vector<double> average_ranks(std::span<const double> values);

/// Pearson correlation of average-tie ranks for every pair of rows.
///
/// All-zero rows are dropped and reported in `dropped`. A remaining row with
/// zero rank variance correlates 0 with every other row. Pairs are computed
/// on `threads` workers (0 = hardware concurrency); output does not depend on
/// the worker count.
CorrelationMatrix spearman_matrix(const kwic::ContextFrequencyTable& table, unsigned threads = 0);

DistanceMatrix to_distance(const CorrelationMatrix& corr);

/// One agglomeration step. Node ids below the leaf count are leaves; merge
/// `i` creates node `leaf_count + i`.
struct Merge {
    std::size_t left = 0;
    std::size_t right = 0;
    double height = 0.0;

    friend bool operator==(const Merge&, const Merge&) = default;
};

struct Dendrogram {
    std::vector<std::string> leaves;
    std::vector<Merge> merges;

    std::size_t root() const { return leaves.size() + merges.size() - 1; }
    /// Height of a node; leaves sit at 0.
    double height(std::size_t node) const;
    bool is_leaf(std::size_t node) const { return node < leaves.size(); }

    friend bool operator==(const Dendrogram&, const Dendrogram&) = default;
};

/// Throws PreconditionError unless the dendrogram is a well-formed binary
/// merge tree with nondecreasing heights.
void validate(const Dendrogram& dendrogram);

/// Complete-link agglomerative clustering.
///
/// Each step joins the two clusters whose farthest members are closest. Equal
/// candidate distances are resolved by the pair of smallest leaf indices in
/// the clusters, compared lexicographically; the cluster with the smaller
/// leaf index becomes the left child.
Dendrogram agglomerate_complete_link(const DistanceMatrix& dist);

/// Cluster ids 1..k for every leaf.
struct ClusterAssignment {
    std::map<std::string, int> cluster_of;
    std::size_t k = 0;

    /// Members of each cluster, index 0 holding cluster 1.
    std::vector<std::vector<std::string>> clusters() const;

    friend bool operator==(const ClusterAssignment&, const ClusterAssignment&) = default;
};

/// Undoes the last k-1 merges. Ids follow the order in which clusters first
/// appear when scanning the leaves in input order.
ClusterAssignment cut(const Dendrogram& dendrogram, std::size_t k);

enum class DendrogramFormat { newick, svg, json };

DendrogramFormat parse_dendrogram_format(std::string_view name);
std::string_view extension(DendrogramFormat format);

std::string to_newick(const Dendrogram& dendrogram);
std::string to_json(const Dendrogram& dendrogram);
Dendrogram dendrogram_from_json(std::string_view json);
std::string to_svg(const Dendrogram& dendrogram);

void export_dendrogram(const Dendrogram& dendrogram, DendrogramFormat format,
                       const std::filesystem::path& path);
Dendrogram load_dendrogram_json(const std::filesystem::path& path);

/// Labels in the first row and column.
void write_matrix_csv(std::ostream& out, const LabeledMatrix& matrix);
void write_matrix_csv(const std::filesystem::path& path, const LabeledMatrix& matrix);

} // namespace modoma::cluster
