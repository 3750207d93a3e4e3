#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "modoma/cluster.hpp"
#include "modoma/grammar.hpp"
#include "modoma/kwic.hpp"
#include "modoma/mother.hpp"

namespace modoma::acquisition {

struct Parameters {
    std::size_t window_before = 2;
    std::size_t window_after = 2;
    std::size_t min_freq = 10;
    std::size_t column_min_freq = 0;
    std::size_t k = 14;
    int confidence = grammar::kDefaultConfidence;
    /// Fewest utterances acquisition will run on.
    std::size_t min_corpus = 10000;

    kwic::Window window() const { return {window_before, window_after}; }

    friend bool operator==(const Parameters&, const Parameters&) = default;
};

/// Single run, 2+2 word window, 14 clusters, frequency threshold 10,
/// confidence 60, at least 10,000 utterances.
Parameters defaults();

/// First capital-letter label (A..Z, AA, ...) no entry uses as a feature.
std::string allocate_feature(const grammar::Grammar& grammar);

/// Every intermediate product of one acquisition run.
struct PipelineArtifacts {
    std::vector<kwic::KwicRecord> records;
    kwic::ContextFrequencyTable table;
    cluster::CorrelationMatrix correlation;
    cluster::DistanceMatrix distance;
    cluster::Dendrogram dendrogram;
    cluster::ClusterAssignment assignment;
    std::vector<std::string> warnings;
};

/// KWIC -> frequency table -> Spearman -> distance -> complete link -> cut(k).
/// Does not touch any grammar.
PipelineArtifacts run_pipeline(const std::vector<Utterance>& corpus, const Parameters& params);

/// One row of the groupings table: cluster number, value and its words.
struct ClusterGroup {
    int id = 0;
    std::string value;
    std::vector<std::string> words;

    friend bool operator==(const ClusterGroup&, const ClusterGroup&) = default;
};

struct AcquisitionReport {
    std::string feature;
    std::vector<ClusterGroup> clusters;
    Parameters parameters;
    std::size_t corpus_size = 0;
    std::size_t token_count = 0;
    std::size_t created_entries = 0;
    std::size_t updated_entries = 0;

    /// Clustered words mapped back to cluster ids.
    cluster::ClusterAssignment assignment() const;

    friend bool operator==(const AcquisitionReport&, const AcquisitionReport&) = default;
};

/// Value labels a, b, c, ... in cluster-id order.
std::vector<ClusterGroup> label_clusters(const cluster::ClusterAssignment& assignment);

/// Writes (feature, value, confidence) onto every entry of each clustered
/// word, creating terminals for words the grammar lacks. An entry holding
/// another value for `feature` is overwritten, which the grammar logs.
AcquisitionReport apply_assignment(grammar::Grammar& grammar,
                                   const cluster::ClusterAssignment& assignment,
                                   const std::string& feature, const Parameters& params,
                                   std::int64_t session_id);

struct AcquisitionResult {
    AcquisitionReport report;
    PipelineArtifacts artifacts;
};

/// Full procedure. Throws InsufficientDataError if the corpus has fewer than
/// `min_corpus` utterances or fewer than k words survive to clustering; the
/// grammar is left untouched on error.
AcquisitionResult acquire_categories(grammar::Grammar& grammar, const std::vector<Utterance>& corpus,
                                     const Parameters& params, std::int64_t session_id);

std::string to_json(const AcquisitionReport& report);
AcquisitionReport report_from_json(std::string_view json);
void save_report(const AcquisitionReport& report, const std::filesystem::path& path);
AcquisitionReport load_report(const std::filesystem::path& path);

} // namespace modoma::acquisition
