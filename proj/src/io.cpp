#include "ml4c/io.hpp"

#include "ml4c/errors.hpp"

#include <json.hpp>

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>
#include <unistd.h>

namespace ml4c {

using nlohmann::json;

namespace {

/// Wraps nlohmann parse/type errors as DataError so callers see one family.
template <typename F>
auto json_guard(const std::string& what, F&& f) {
    try {
        return f();
    } catch (const json::exception& e) {
        throw DataError(what + ": " + e.what());
    }
}

std::string format_double(double v) {
    char buf[32];
    const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, end);
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ','))
        out.push_back(cell);
    if (!line.empty() && line.back() == ',')
        out.emplace_back();
    return out;
}

std::map<std::string, NodeId> name_index(const std::vector<std::string>& names) {
    std::map<std::string, NodeId> idx;
    for (std::size_t i = 0; i < names.size(); ++i)
        if (!idx.emplace(names[i], static_cast<NodeId>(i)).second)
            throw InvalidNodes("duplicate node name '" + names[i] + "'");
    return idx;
}

std::vector<Edge> edges_from_json(const json& arr, const std::map<std::string, NodeId>& idx) {
    std::vector<Edge> out;
    for (const auto& e : arr) {
        if (!e.is_array() || e.size() != 2)
            throw DataError("edge must be a [from, to] pair");
        const auto a = idx.find(e[0].get<std::string>());
        const auto b = idx.find(e[1].get<std::string>());
        if (a == idx.end() || b == idx.end())
            throw InvalidNodes("edge refers to an unknown node");
        out.emplace_back(a->second, b->second);
    }
    return out;
}

json edges_to_json(const std::vector<Edge>& edges, const std::vector<std::string>& names) {
    json arr = json::array();
    for (const auto& [a, b] : edges)
        arr.push_back({names[static_cast<std::size_t>(a)], names[static_cast<std::size_t>(b)]});
    return arr;
}

struct GraphJson {
    std::vector<std::string> names;
    std::vector<Edge> directed;
    std::vector<Edge> undirected;
};

GraphJson parse_graph(const std::string& text) {
    return json_guard("graph file", [&] {
        const json j = json::parse(text);
        GraphJson g;
        g.names = j.at("nodes").get<std::vector<std::string>>();
        const auto idx = name_index(g.names);
        if (j.contains("directed_edges"))
            g.directed = edges_from_json(j.at("directed_edges"), idx);
        if (j.contains("undirected_edges"))
            g.undirected = edges_from_json(j.at("undirected_edges"), idx);
        for (const auto& [key, value] : j.items())
            if (key != "nodes" && key != "directed_edges" && key != "undirected_edges")
                throw DataError("graph file: unknown key '" + key + "'");
        return g;
    });
}

json config_to_json(const SynthConfig& c) {
    return {{"node_count_range", {c.node_count_range.first, c.node_count_range.second}},
            {"sparsity_range", {c.sparsity_range.first, c.sparsity_range.second}},
            {"graph_model", to_string(c.graph_model)},
            {"sample_size", c.sample_size},
            {"dirichlet_alpha_range", {c.dirichlet_alpha_range.first, c.dirichlet_alpha_range.second}},
            {"seed", c.seed}};
}

SynthConfig config_from_json(const json& j) {
    SynthConfig c;
    c.node_count_range = {j.at("node_count_range").at(0).get<int>(), j.at("node_count_range").at(1).get<int>()};
    c.sparsity_range = {j.at("sparsity_range").at(0).get<double>(), j.at("sparsity_range").at(1).get<double>()};
    c.graph_model = graph_model_from_string(j.at("graph_model").get<std::string>());
    c.sample_size = j.at("sample_size").get<int>();
    c.dirichlet_alpha_range = {j.at("dirichlet_alpha_range").at(0).get<double>(),
                               j.at("dirichlet_alpha_range").at(1).get<double>()};
    c.seed = j.at("seed").get<std::uint64_t>();
    return c;
}

std::string fixed_width(int i) {
    std::string s = std::to_string(i);
    return std::string(s.size() < 5 ? 5 - s.size() : 0, '0') + s;
}

} // namespace

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot read '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad())
        throw IoError("error reading '" + path.string() + "'");
    return ss.str();
}

void write_text_atomic(const fs::path& path, const std::string& content) {
    const fs::path parent = path.has_parent_path() ? path.parent_path() : fs::path(".");
    std::error_code ec;
    if (!fs::is_directory(parent, ec))
        throw IoError("directory '" + parent.string() + "' does not exist");
    const fs::path tmp = parent / ("." + path.filename().string() + ".tmp" + std::to_string(::getpid()));
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw IoError("cannot write '" + tmp.string() + "'");
        out << content;
        out.flush();
        if (!out) {
            out.close();
            fs::remove(tmp, ec);
            throw IoError("error writing '" + tmp.string() + "'");
        }
    }
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw IoError("cannot move output into '" + path.string() + "'");
    }
}

std::string content_hash(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i, h >>= 4)
        out[static_cast<std::size_t>(i)] = digits[h & 0xf];
    return out;
}

std::string pdag_to_json(const Pdag& g) {
    const json j{{"nodes", g.names()},
                 {"directed_edges", edges_to_json(g.directed_edges(), g.names())},
                 {"undirected_edges", edges_to_json(g.undirected_edges(), g.names())}};
    return j.dump(2) + "\n";
}

Pdag pdag_from_json(const std::string& text) {
    auto g = parse_graph(text);
    return Pdag(std::move(g.names), std::move(g.directed), std::move(g.undirected));
}

void write_pdag(const fs::path& path, const Pdag& g) { write_text_atomic(path, pdag_to_json(g)); }

Pdag read_pdag(const fs::path& path) { return pdag_from_json(read_text(path)); }

Dag read_dag(const fs::path& path) {
    auto g = parse_graph(read_text(path));
    if (!g.undirected.empty())
        throw DataError("'" + path.string() + "' has undirected edges; expected a DAG");
    return Dag(std::move(g.names), std::move(g.directed));
}

void write_dag(const fs::path& path, const Dag& dag) { write_pdag(path, Pdag(dag.names(), dag.edges(), {})); }

Skeleton read_skeleton(const fs::path& path) {
    auto g = parse_graph(read_text(path));
    auto edges = std::move(g.directed);
    edges.insert(edges.end(), g.undirected.begin(), g.undirected.end());
    return Skeleton(std::move(g.names), std::move(edges));
}

void write_skeleton(const fs::path& path, const Skeleton& skel) { write_pdag(path, Pdag::from_skeleton(skel)); }

fs::path dataset_meta_path(const fs::path& path) { return fs::path(path.string() + ".meta.json"); }

void write_dataset(const fs::path& path, const DiscreteDataset& data) {
    std::string out;
    for (int c = 0; c < data.n_cols(); ++c) {
        if (c > 0)
            out += ',';
        out += data.names()[static_cast<std::size_t>(c)];
    }
    out += '\n';
    out.reserve(out.size() + static_cast<std::size_t>(data.n_rows()) * static_cast<std::size_t>(data.n_cols()) * 2);
    for (int r = 0; r < data.n_rows(); ++r) {
        for (int c = 0; c < data.n_cols(); ++c) {
            if (c > 0)
                out += ',';
            out += std::to_string(data.at(r, c));
        }
        out += '\n';
    }
    write_text_atomic(dataset_meta_path(path), json{{"cardinalities", data.cardinalities()}}.dump() + "\n");
    write_text_atomic(path, out);
}

DiscreteDataset read_dataset(const fs::path& path) {
    const std::string text = read_text(path);
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line))
        throw DataError("'" + path.string() + "' is empty");
    if (!line.empty() && line.back() == '\r')
        line.pop_back();
    std::vector<std::string> names = split_csv_line(line);
    name_index(names);
    std::vector<std::vector<Value>> columns(names.size());
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        const auto cells = split_csv_line(line);
        if (cells.size() != names.size())
            throw DataError("'" + path.string() + "' line " + std::to_string(line_no) + ": expected " +
                            std::to_string(names.size()) + " values");
        for (std::size_t c = 0; c < cells.size(); ++c) {
            unsigned v = 0;
            const auto* first = cells[c].data();
            const auto* last = first + cells[c].size();
            const auto [ptr, ec] = std::from_chars(first, last, v);
            if (ec != std::errc() || ptr != last || v > 65535)
                throw DataError("'" + path.string() + "' line " + std::to_string(line_no) + ": '" + cells[c] +
                                "' is not a state code");
            columns[c].push_back(static_cast<Value>(v));
        }
    }
    std::vector<int> cards;
    const fs::path meta = dataset_meta_path(path);
    if (fs::exists(meta)) {
        cards = json_guard("dataset metadata", [&] {
            return json::parse(read_text(meta)).at("cardinalities").get<std::vector<int>>();
        });
        if (cards.size() != names.size())
            throw DataError("'" + meta.string() + "' lists " + std::to_string(cards.size()) + " cardinalities for " +
                            std::to_string(names.size()) + " columns");
    } else {
        for (const auto& col : columns) {
            int hi = 0;
            for (Value v : col)
                hi = std::max(hi, static_cast<int>(v));
            cards.push_back(hi + 1);
        }
    }
    return DiscreteDataset(std::move(names), std::move(cards), std::move(columns));
}

std::string model_to_json(const UtModel& model) {
    json trees = json::array();
    for (const auto& tree : model.ensemble.trees) {
        json feature = json::array(), threshold = json::array(), left = json::array(), right = json::array(),
             value = json::array();
        for (const auto& n : tree.nodes) {
            feature.push_back(n.feature);
            threshold.push_back(n.threshold);
            left.push_back(n.left);
            right.push_back(n.right);
            value.push_back(n.value);
        }
        trees.push_back({{"feature", feature}, {"threshold", threshold}, {"left", left}, {"right", right}, {"value", value}});
    }
    const auto& p = model.params;
    const json j{
        {"schema_version", kModelSchema},
        {"feature_schema", model.schema},
        {"threshold", model.threshold},
        {"basis", {{"seed", model.basis.seed}, {"w", model.basis.w}, {"b", model.basis.b}}},
        {"params",
         {{"n_rounds", p.n_rounds},
          {"max_depth", p.max_depth},
          {"learning_rate", p.learning_rate},
          {"lambda", p.lambda},
          {"gamma", p.gamma},
          {"min_child_weight", p.min_child_weight},
          {"base_score", p.base_score},
          {"seed", p.seed}}},
        {"ensemble",
         {{"learning_rate", model.ensemble.learning_rate},
          {"n_rounds", model.ensemble.n_rounds},
          {"n_features", model.ensemble.n_features},
          {"base_margin", model.ensemble.base_margin},
          {"training_loss", model.ensemble.training_loss},
          {"trees", trees}}},
    };
    return j.dump() + "\n";
}

UtModel model_from_json(const std::string& text) {
    return json_guard("model file", [&] {
        const json j = json::parse(text);
        if (j.at("schema_version").get<std::string>() != kModelSchema)
            throw SchemaMismatch("model schema '" + j.at("schema_version").get<std::string>() + "' is not " + kModelSchema);
        UtModel m;
        m.schema = j.at("feature_schema").get<std::string>();
        m.threshold = j.at("threshold").get<double>();
        const auto& b = j.at("basis");
        m.basis.seed = b.at("seed").get<std::uint64_t>();
        m.basis.w = b.at("w").get<decltype(m.basis.w)>();
        m.basis.b = b.at("b").get<decltype(m.basis.b)>();
        const auto& p = j.at("params");
        m.params.n_rounds = p.at("n_rounds").get<int>();
        m.params.max_depth = p.at("max_depth").get<int>();
        m.params.learning_rate = p.at("learning_rate").get<double>();
        m.params.lambda = p.at("lambda").get<double>();
        m.params.gamma = p.at("gamma").get<double>();
        m.params.min_child_weight = p.at("min_child_weight").get<double>();
        m.params.base_score = p.at("base_score").get<double>();
        m.params.seed = p.at("seed").get<std::uint64_t>();
        const auto& e = j.at("ensemble");
        m.ensemble.learning_rate = e.at("learning_rate").get<double>();
        m.ensemble.n_rounds = e.at("n_rounds").get<int>();
        m.ensemble.n_features = e.at("n_features").get<int>();
        m.ensemble.base_margin = e.at("base_margin").get<double>();
        m.ensemble.training_loss = e.at("training_loss").get<std::vector<double>>();
        for (const auto& t : e.at("trees")) {
            const auto feature = t.at("feature").get<std::vector<int>>();
            const auto threshold = t.at("threshold").get<std::vector<double>>();
            const auto left = t.at("left").get<std::vector<int>>();
            const auto right = t.at("right").get<std::vector<int>>();
            const auto value = t.at("value").get<std::vector<double>>();
            const std::size_t n = feature.size();
            if (threshold.size() != n || left.size() != n || right.size() != n || value.size() != n)
                throw DataError("model file: tree arrays differ in length");
            RegressionTree tree;
            for (std::size_t i = 0; i < n; ++i) {
                const auto in_range = [n](int c) { return c >= 0 && static_cast<std::size_t>(c) < n; };
                if (feature[i] >= m.ensemble.n_features ||
                    (feature[i] >= 0 && (!in_range(left[i]) || !in_range(right[i]))))
                    throw DataError("model file: malformed tree node");
                tree.nodes.push_back(TreeNode{feature[i], threshold[i], left[i], right[i], value[i]});
            }
            m.ensemble.trees.push_back(std::move(tree));
        }
        return m;
    });
}

void write_model(const fs::path& path, const UtModel& model) { write_text_atomic(path, model_to_json(model)); }

UtModel read_model(const fs::path& path) { return model_from_json(read_text(path)); }

std::string manifest_to_json(const CorpusManifest& m) {
    json graphs = json::array();
    for (const auto& g : m.graphs)
        graphs.push_back({{"id", g.id},
                          {"seed", g.seed},
                          {"model", to_string(g.model)},
                          {"nodes", g.nodes},
                          {"edges", g.edges},
                          {"graph", g.graph_file},
                          {"data", g.data_file}});
    return json{{"schema_version", kCorpusSchema}, {"config", config_to_json(m.config)}, {"graphs", graphs}}.dump(2) + "\n";
}

CorpusManifest manifest_from_json(const std::string& text) {
    return json_guard("corpus manifest", [&] {
        const json j = json::parse(text);
        if (j.at("schema_version").get<std::string>() != kCorpusSchema)
            throw SchemaMismatch("corpus schema '" + j.at("schema_version").get<std::string>() + "' is not " + kCorpusSchema);
        CorpusManifest m;
        m.config = config_from_json(j.at("config"));
        for (const auto& g : j.at("graphs"))
            m.graphs.push_back(CorpusEntry{g.at("id").get<int>(), g.at("seed").get<std::uint64_t>(),
                                           graph_model_from_string(g.at("model").get<std::string>()),
                                           g.at("nodes").get<int>(), g.at("edges").get<int>(),
                                           g.at("graph").get<std::string>(), g.at("data").get<std::string>()});
        return m;
    });
}

CorpusManifest write_corpus(const fs::path& dir, const SynthConfig& config, std::span<const CorpusItem> items) {
    std::error_code ec;
    if (fs::exists(dir, ec) && !(fs::is_directory(dir, ec) && fs::is_empty(dir, ec)))
        throw IoError("'" + dir.string() + "' exists and is not an empty directory");
    const fs::path staging = fs::path(dir.string() + ".partial");
    fs::remove_all(staging, ec);
    if (!fs::create_directories(staging, ec) || ec)
        throw IoError("cannot create '" + staging.string() + "'");
    try {
        CorpusManifest manifest;
        manifest.config = config;
        for (std::size_t i = 0; i < items.size(); ++i) {
            const auto& item = items[i];
            CorpusEntry e;
            e.id = static_cast<int>(i);
            e.seed = item.seed;
            e.model = item.model;
            e.nodes = item.net.dag.size();
            e.edges = static_cast<int>(item.net.dag.edges().size());
            e.graph_file = "graph_" + fixed_width(e.id) + ".json";
            e.data_file = "data_" + fixed_width(e.id) + ".csv";
            write_dag(staging / e.graph_file, item.net.dag);
            write_dataset(staging / e.data_file, item.data);
            manifest.graphs.push_back(std::move(e));
        }
        write_text_atomic(staging / "manifest.json", manifest_to_json(manifest));
        if (fs::exists(dir, ec))
            fs::remove(dir, ec);
        fs::rename(staging, dir, ec);
        if (ec)
            throw IoError("cannot move corpus into '" + dir.string() + "'");
        return manifest;
    } catch (...) {
        fs::remove_all(staging, ec);
        throw;
    }
}

std::vector<CorpusItem> read_corpus(const fs::path& dir) {
    const auto manifest = manifest_from_json(read_text(dir / "manifest.json"));
    std::vector<CorpusItem> items;
    for (const auto& e : manifest.graphs) {
        CorpusItem item;
        item.seed = e.seed;
        item.model = e.model;
        item.net.dag = read_dag(dir / e.graph_file);
        item.data = read_dataset(dir / e.data_file);
        if (item.data.names() != item.net.dag.names())
            throw NodeMismatch("corpus graph " + std::to_string(e.id) + ": data columns do not match graph nodes");
        item.net.cardinalities = item.data.cardinalities();
        items.push_back(std::move(item));
    }
    return items;
}

void write_feature_csv(const fs::path& path, std::span<const UtExample> examples,
                       std::span<const std::vector<std::string>> node_names) {
    std::string out = "graph,x,t,y,label";
    for (const auto& n : feature_names())
        out += "," + n;
    out += '\n';
    for (const auto& ex : examples) {
        const auto& p = ex.provenance;
        const auto node = [&](NodeId v) {
            if (node_names.empty())
                return std::to_string(v);
            return node_names[static_cast<std::size_t>(p.graph)][static_cast<std::size_t>(v)];
        };
        out += std::to_string(p.graph) + "," + node(p.triple.x) + "," + node(p.triple.t) + "," + node(p.triple.y) + "," +
               std::to_string(ex.label);
        for (double v : ex.features.values)
            out += "," + format_double(v);
        out += '\n';
    }
    write_text_atomic(path, out);
}

void write_label_csv(const fs::path& path, std::span<const LabelRow> rows) {
    std::string out = "graph,x,t,y,label\n";
    for (const auto& r : rows)
        out += std::to_string(r.graph) + "," + r.x + "," + r.t + "," + r.y + "," + std::to_string(r.label) + "\n";
    write_text_atomic(path, out);
}

} // namespace ml4c
