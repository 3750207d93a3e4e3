#include "modoma/acquisition.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "modoma/error.hpp"

namespace modoma::acquisition {

using nlohmann::json;
using nlohmann::ordered_json;

Parameters defaults() { return Parameters{}; }

std::string allocate_feature(const grammar::Grammar& g) {
    for (std::size_t i = 0;; ++i) {
        auto label = grammar::upper_label(i);
        if (!g.uses_feature(label)) return label;
    }
}

PipelineArtifacts run_pipeline(const std::vector<Utterance>& corpus, const Parameters& params) {
    if (corpus.size() < params.min_corpus) {
        throw InsufficientDataError("corpus has " + std::to_string(corpus.size()) +
                                    " utterances; acquisition needs at least " +
                                    std::to_string(params.min_corpus));
    }
    if (params.k < 1) throw PreconditionError("k must be at least 1");

    PipelineArtifacts a;
    a.records = kwic::extract_kwic(corpus, params.window());
    a.table = kwic::build_frequency_table(a.records, params.min_freq, params.column_min_freq);
    if (a.table.row_count() < params.k) {
        throw InsufficientDataError(std::to_string(a.table.row_count()) +
                                    " words reach the frequency threshold; " + std::to_string(params.k) +
                                    " clusters were requested");
    }
    a.correlation = cluster::spearman_matrix(a.table);
    for (const auto& w : a.correlation.dropped) {
        a.warnings.push_back("dropped '" + w + "': no context counts survive the column threshold");
    }
    if (a.correlation.size() < params.k) {
        throw InsufficientDataError(std::to_string(a.correlation.size()) +
                                    " words have usable context profiles; " + std::to_string(params.k) +
                                    " clusters were requested");
    }
    a.distance = cluster::to_distance(a.correlation);
    a.dendrogram = cluster::agglomerate_complete_link(a.distance);
    a.assignment = cluster::cut(a.dendrogram, params.k);
    return a;
}

cluster::ClusterAssignment AcquisitionReport::assignment() const {
    cluster::ClusterAssignment out;
    out.k = clusters.size();
    for (const auto& c : clusters) {
        for (const auto& w : c.words) out.cluster_of[w] = c.id;
    }
    return out;
}

std::vector<ClusterGroup> label_clusters(const cluster::ClusterAssignment& assignment) {
    std::vector<ClusterGroup> out;
    const auto members = assignment.clusters();
    for (std::size_t i = 0; i < members.size(); ++i) {
        out.push_back({static_cast<int>(i + 1), grammar::lower_label(i), members[i]});
    }
    return out;
}

AcquisitionReport apply_assignment(grammar::Grammar& g, const cluster::ClusterAssignment& assignment,
                                   const std::string& feature, const Parameters& params,
                                   std::int64_t session_id) {
    if (params.confidence < 0 || params.confidence > 100) {
        throw PreconditionError("confidence must be within 0..100");
    }
    AcquisitionReport report;
    report.feature = feature;
    report.parameters = params;
    report.clusters = label_clusters(assignment);

    std::int64_t next_number = g.next_entry_number(session_id);
    for (const auto& group : report.clusters) {
        for (const auto& word : group.words) {
            auto entries = g.lookup(word);
            if (entries.empty()) {
                g.new_entry(word, session_id, next_number++);
                entries = g.lookup(word);
                ++report.created_entries;
            } else {
                report.updated_entries += entries.size();
            }
            for (const auto& e : entries) {
                g.overwrite_property(e->key(), feature, group.value, params.confidence);
            }
        }
    }
    return report;
}

AcquisitionResult acquire_categories(grammar::Grammar& g, const std::vector<Utterance>& corpus,
                                     const Parameters& params, std::int64_t session_id) {
    AcquisitionResult result;
    result.artifacts = run_pipeline(corpus, params);
    const auto feature = allocate_feature(g);
    result.report = apply_assignment(g, result.artifacts.assignment, feature, params, session_id);
    result.report.corpus_size = corpus.size();
    result.report.token_count = result.artifacts.records.size();
    return result;
}

std::string to_json(const AcquisitionReport& r) {
    ordered_json params;
    params["window_before"] = r.parameters.window_before;
    params["window_after"] = r.parameters.window_after;
    params["min_freq"] = r.parameters.min_freq;
    params["column_min_freq"] = r.parameters.column_min_freq;
    params["k"] = r.parameters.k;
    params["confidence"] = r.parameters.confidence;
    params["min_corpus"] = r.parameters.min_corpus;
    params["corpus_size"] = r.corpus_size;
    params["token_count"] = r.token_count;

    ordered_json groups = ordered_json::array();
    for (const auto& c : r.clusters) {
        ordered_json g;
        g["#"] = c.id;
        g["feature"] = r.feature;
        g["value"] = c.value;
        g["words"] = c.words;
        groups.push_back(std::move(g));
    }
    ordered_json doc;
    doc["feature"] = r.feature;
    doc["parameters"] = std::move(params);
    doc["groups"] = std::move(groups);
    doc["created_entries"] = r.created_entries;
    doc["updated_entries"] = r.updated_entries;
    return doc.dump(2) + "\n";
}

AcquisitionReport report_from_json(std::string_view text) {
    AcquisitionReport r;
    try {
        const json doc = json::parse(text);
        r.feature = doc.at("feature").get<std::string>();
        const auto& p = doc.at("parameters");
        r.parameters.window_before = p.at("window_before").get<std::size_t>();
        r.parameters.window_after = p.at("window_after").get<std::size_t>();
        r.parameters.min_freq = p.at("min_freq").get<std::size_t>();
        r.parameters.column_min_freq = p.value("column_min_freq", std::size_t{0});
        r.parameters.k = p.at("k").get<std::size_t>();
        r.parameters.confidence = p.at("confidence").get<int>();
        r.parameters.min_corpus = p.at("min_corpus").get<std::size_t>();
        r.corpus_size = p.value("corpus_size", std::size_t{0});
        r.token_count = p.value("token_count", std::size_t{0});
        for (const auto& g : doc.at("groups")) {
            r.clusters.push_back({g.at("#").get<int>(), g.at("value").get<std::string>(),
                                  g.at("words").get<std::vector<std::string>>()});
        }
        r.created_entries = doc.value("created_entries", std::size_t{0});
        r.updated_entries = doc.value("updated_entries", std::size_t{0});
    } catch (const json::exception& e) {
        throw DataError(std::string("malformed acquisition report: ") + e.what());
    }
    return r;
}

void save_report(const AcquisitionReport& report, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    out << to_json(report);
}

AcquisitionReport load_report(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return report_from_json(buf.str());
}

} // namespace modoma::acquisition
