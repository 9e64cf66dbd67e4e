#pragma once

// On-disk formats. Graphs, models and manifests are JSON; datasets and
// feature matrices are CSV. Every writer goes through a temporary file in
// the destination directory and renames it into place, so a failed write
// leaves nothing behind.

#include "ml4c/graph.hpp"
#include "ml4c/learner.hpp"
#include "ml4c/synth.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace ml4c {

namespace fs = std::filesystem;

inline constexpr const char* kModelSchema = "ml4c-model-v1";
inline constexpr const char* kCorpusSchema = "ml4c-corpus-v1";

/// Throws IoError.
std::string read_text(const fs::path& path);
void write_text_atomic(const fs::path& path, const std::string& content);

/// 64-bit FNV-1a, printed as 16 hex digits.
std::string content_hash(const std::string& bytes);

// Graph file: {"nodes": [...], "directed_edges": [[from, to], ...],
// "undirected_edges": [[a, b], ...]} with edges given by node name.
std::string pdag_to_json(const Pdag& g);
Pdag pdag_from_json(const std::string& text);
void write_pdag(const fs::path& path, const Pdag& g);
Pdag read_pdag(const fs::path& path);

/// Throws DataError if the file has undirected edges.
Dag read_dag(const fs::path& path);
void write_dag(const fs::path& path, const Dag& dag);

/// Any graph file, orientation ignored.
Skeleton read_skeleton(const fs::path& path);
void write_skeleton(const fs::path& path, const Skeleton& skel);

/// CSV with a header of column names and integer state codes. The
/// cardinalities go to a sidecar "<path>.meta.json"; when the sidecar is
/// missing on read they are inferred as max value + 1.
void write_dataset(const fs::path& path, const DiscreteDataset& data);
DiscreteDataset read_dataset(const fs::path& path);
fs::path dataset_meta_path(const fs::path& path);

std::string model_to_json(const UtModel& model);
UtModel model_from_json(const std::string& text);
void write_model(const fs::path& path, const UtModel& model);
UtModel read_model(const fs::path& path);

struct CorpusEntry {
    int id = 0;
    std::uint64_t seed = 0;
    GraphModel model = GraphModel::ER;
    int nodes = 0;
    int edges = 0;
    std::string graph_file;
    std::string data_file;
};

struct CorpusManifest {
    SynthConfig config;
    std::vector<CorpusEntry> graphs;
};

std::string manifest_to_json(const CorpusManifest& m);
CorpusManifest manifest_from_json(const std::string& text);

/// Writes into "<dir>.partial" and renames it to `dir`, which must not
/// exist or be empty.
CorpusManifest write_corpus(const fs::path& dir, const SynthConfig& config, std::span<const CorpusItem> items);

/// Items carry the DAG and data; CPTs are not stored.
std::vector<CorpusItem> read_corpus(const fs::path& dir);

/// Header: graph, x, t, y, label, then the feature names. Triple members
/// are written as names from node_names[graph], or as indices when
/// node_names is empty.
void write_feature_csv(const fs::path& path, std::span<const UtExample> examples,
                       std::span<const std::vector<std::string>> node_names = {});

struct LabelRow {
    int graph = 0;
    std::string x, t, y;
    int label = 0;
};
/// Header: graph, x, t, y, label.
void write_label_csv(const fs::path& path, std::span<const LabelRow> rows);

} // namespace ml4c
