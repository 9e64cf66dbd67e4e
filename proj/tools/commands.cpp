#include "commands.hpp"

#include "ml4c/bif.hpp"
#include "ml4c/errors.hpp"
#include "ml4c/io.hpp"
#include "ml4c/metrics.hpp"
#include "ml4c/pipeline.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <charconv>
#include <functional>
#include <map>
#include <memory>
#include <sstream>

namespace ml4c::cli {

namespace {

using nlohmann::json;

enum class Kind { Int, Double, U64, String, Bool };

struct Key {
    std::string name;
    Kind kind;
    std::string help;
};

/// Settings for one command: config file values overridden by flags.
class Settings {
public:
    explicit Settings(json values) : values_(std::move(values)) {}

    bool has(const std::string& k) const { return values_.contains(k); }
    const json& raw() const { return values_; }

    std::string str(const std::string& k, const std::string& fallback = "") const {
        return has(k) ? values_.at(k).get<std::string>() : fallback;
    }
    std::string required(const std::string& k) const {
        if (!has(k))
            throw ConfigError("missing required setting '" + k + "' (flag --" + flag_name(k) + ")");
        return values_.at(k).get<std::string>();
    }
    int integer(const std::string& k, int fallback) const { return has(k) ? values_.at(k).get<int>() : fallback; }
    double real(const std::string& k, double fallback) const { return has(k) ? values_.at(k).get<double>() : fallback; }
    std::uint64_t u64(const std::string& k, std::uint64_t fallback) const {
        return has(k) ? values_.at(k).get<std::uint64_t>() : fallback;
    }
    bool flag(const std::string& k) const { return has(k) && values_.at(k).get<bool>(); }

    static std::string flag_name(std::string k) {
        std::replace(k.begin(), k.end(), '_', '-');
        return k;
    }

private:
    json values_;
};

const std::vector<Key>& sepset_keys() {
    static const std::vector<Key> keys{
        {"alpha", Kind::Double, "significance level of the G2 test (default 0.05)"},
        {"sepset_max_size", Kind::Int, "largest conditioning set searched for sepsets; -1 for unbounded (default 4)"},
        {"sepset_exhaustive_limit", Kind::Int, "pools up to this size are searched exhaustively (default 8)"},
    };
    return keys;
}

std::vector<Key> with_sepset_keys(std::vector<Key> keys) {
    keys.insert(keys.end(), sepset_keys().begin(), sepset_keys().end());
    return keys;
}

json convert_flag(const Key& key, const std::string& text) {
    auto bad = [&]() -> json { throw ConfigError("--" + Settings::flag_name(key.name) + ": invalid value '" + text + "'"); };
    const char* first = text.data();
    const char* last = first + text.size();
    switch (key.kind) {
    case Kind::Int: {
        int v = 0;
        const auto [p, ec] = std::from_chars(first, last, v);
        return ec == std::errc() && p == last ? json(v) : bad();
    }
    case Kind::Double: {
        double v = 0;
        const auto [p, ec] = std::from_chars(first, last, v);
        return ec == std::errc() && p == last ? json(v) : bad();
    }
    case Kind::U64: {
        std::uint64_t v = 0;
        const auto [p, ec] = std::from_chars(first, last, v);
        return ec == std::errc() && p == last ? json(v) : bad();
    }
    case Kind::String:
        return json(text);
    case Kind::Bool:
        return json(true);
    }
    return bad();
}

void check_file_value(const Key& key, const json& v) {
    bool ok = false;
    switch (key.kind) {
    case Kind::Int: ok = v.is_number_integer(); break;
    case Kind::Double: ok = v.is_number(); break;
    case Kind::U64: ok = v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0); break;
    case Kind::String: ok = v.is_string(); break;
    case Kind::Bool: ok = v.is_boolean(); break;
    }
    if (!ok)
        throw ConfigError("config key '" + key.name + "' has the wrong type");
}

SepsetOptions sepset_options(const Settings& s) {
    SepsetOptions o;
    o.max_size = s.integer("sepset_max_size", o.max_size);
    o.exhaustive_limit = s.integer("sepset_exhaustive_limit", o.exhaustive_limit);
    if (o.exhaustive_limit < 0)
        throw ConfigError("sepset_exhaustive_limit must be non-negative");
    return o;
}

double alpha_of(const Settings& s) {
    const double a = s.real("alpha", 0.05);
    if (!(a > 0.0 && a < 1.0))
        throw ConfigError("alpha must lie in (0, 1)");
    return a;
}

void emit(const Settings& s, std::ostream& out, const std::string& text) {
    if (s.has("out"))
        write_text_atomic(s.str("out"), text);
    else
        out << text;
}

std::string format_number(double v) {
    std::ostringstream ss;
    ss.precision(6);
    ss << v;
    return ss.str();
}

int cmd_synth(const Settings& s, std::ostream& out) {
    SynthConfig c;
    c.node_count_range = {s.integer("nodes_min", c.node_count_range.first), s.integer("nodes_max", c.node_count_range.second)};
    c.sparsity_range = {s.real("sparsity_min", c.sparsity_range.first), s.real("sparsity_max", c.sparsity_range.second)};
    c.graph_model = graph_model_from_string(s.str("graph_model", to_string(c.graph_model)));
    c.sample_size = s.integer("sample_size", c.sample_size);
    c.dirichlet_alpha_range = {s.real("dirichlet_min", c.dirichlet_alpha_range.first),
                               s.real("dirichlet_max", c.dirichlet_alpha_range.second)};
    c.seed = s.u64("seed", c.seed);
    c.validate();
    const int n = s.integer("n_graphs", 10);
    if (n < 0)
        throw ConfigError("n_graphs must be non-negative");
    const auto dir = s.required("out");
    const auto items = build_corpus(c, n);
    const auto manifest = write_corpus(dir, c, items);
    out << "wrote " << manifest.graphs.size() << " graphs to " << dir << " (manifest "
        << content_hash(manifest_to_json(manifest)) << ")\n";
    return 0;
}

int cmd_train(const Settings& s, std::ostream& out) {
    const auto corpus_dir = s.required("corpus");
    const auto model_path = s.required("out");
    BoostParams p;
    p.n_rounds = s.integer("rounds", p.n_rounds);
    p.max_depth = s.integer("depth", p.max_depth);
    p.learning_rate = s.real("learning_rate", p.learning_rate);
    p.lambda = s.real("lambda", p.lambda);
    p.gamma = s.real("gamma", p.gamma);
    p.min_child_weight = s.real("min_child_weight", p.min_child_weight);
    p.seed = s.u64("seed", p.seed);
    const double threshold = s.real("threshold", kDefaultThreshold);
    if (!(threshold >= 0.0 && threshold <= 1.0))
        throw ConfigError("threshold must lie in [0, 1]");

    const auto items = read_corpus(corpus_dir);
    UtModel model;
    model.basis = EmbeddingBasis::from_seed(p.seed);
    model.threshold = threshold;
    model.params = p;
    const auto examples = build_training_set(items, model.basis, sepset_options(s), alpha_of(s), corpus_dir);
    model.ensemble = train(examples, p);
    const std::string text = model_to_json(model);
    write_text_atomic(model_path, text);
    const auto positives = std::count_if(examples.begin(), examples.end(), [](const UtExample& e) { return e.label == 1; });
    out << "trained on " << examples.size() << " triples (" << positives << " v-structures) from " << items.size()
        << " graphs; final loss " << format_number(model.ensemble.training_loss.empty() ? 0.0 : model.ensemble.training_loss.back())
        << "; model " << content_hash(text) << "\n";
    return 0;
}

int cmd_infer(const Settings& s, std::ostream& out) {
    const bool has_model = s.has("model");
    const bool has_predicate = s.has("predicate");
    if (has_model == has_predicate)
        throw ConfigError("give exactly one of --model and --predicate");
    const std::string tester_kind = s.str("tester", s.has("oracle") ? "oracle" : "g2");
    if (tester_kind != "g2" && tester_kind != "oracle")
        throw ConfigError("tester must be 'g2' or 'oracle'");
    if (tester_kind == "oracle" && !s.has("oracle"))
        throw ConfigError("the oracle tester needs --oracle DAG_FILE");

    // Load everything before computing so a bad input never leaves output.
    std::optional<Dag> dag;
    if (tester_kind == "oracle")
        dag = read_dag(s.str("oracle"));
    Skeleton skel;
    if (s.has("skeleton"))
        skel = read_skeleton(s.str("skeleton"));
    else if (dag)
        skel = skeleton_of(*dag);
    else
        throw ConfigError("missing required setting 'skeleton' (flag --skeleton)");

    std::string model_hash;
    std::optional<Classifier> classifier;
    double threshold = kDefaultThreshold;
    if (has_model) {
        const std::string text = read_text(s.str("model"));
        model_hash = content_hash(text);
        auto model = model_from_json(text);
        if (model.schema != kFeatureSchema)
            throw SchemaMismatch("model expects features '" + model.schema + "', this build produces '" + kFeatureSchema + "'");
        threshold = model.threshold;
        classifier.emplace(std::move(model));
    } else {
        classifier.emplace(predicate_kind_from_string(s.str("predicate")));
    }
    threshold = s.real("threshold", threshold);

    PipelineConfig config;
    config.sepsets = sepset_options(s);
    config.threshold = threshold;
    const double alpha = alpha_of(s);

    std::optional<DiscreteDataset> data;
    std::unique_ptr<CiTester> tester;
    if (dag) {
        if (dag->names() != skel.names())
            throw NodeMismatch("oracle DAG and skeleton have different nodes");
        tester = std::make_unique<OracleTester>(*dag);
    } else {
        data = read_dataset(s.required("data"));
        if (data->names() != skel.names())
            throw NodeMismatch("dataset columns do not match skeleton nodes");
        tester = std::make_unique<G2Tester>(*data, alpha);
    }

    const auto result = run_ml4c_detailed(*tester, skel, *classifier, config);
    emit(s, out, pdag_to_json(result.cpdag));
    if (s.has("manifest")) {
        const json m{{"command", "infer"},
                     {"settings", s.raw()},
                     {"tester", tester_kind},
                     {"classifier", has_model ? "model" : s.str("predicate")},
                     {"model_hash", model_hash},
                     {"threshold", threshold},
                     {"triples", result.scored.size()},
                     {"candidates", result.candidates.size()},
                     {"survivors", result.survivors.size()},
                     {"admitted", result.admitted.size()},
                     {"empty_sepsets", result.empty_sepsets},
                     {"timings_seconds",
                      {{"score", result.timings.score_seconds},
                       {"resolve", result.timings.resolve_seconds},
                       {"orient", result.timings.orient_seconds}}}};
        write_text_atomic(s.str("manifest"), m.dump(2) + "\n");
    }
    return 0;
}

std::string eval_row(const std::string& name, const Pdag& truth, const Pdag& pred) {
    const auto c = edge_confusion(truth, pred);
    std::string ut = "NA";
    if (truth.skeleton() == pred.skeleton()) {
        std::vector<int> t, p;
        for (const auto& u : unshielded_triples(truth.skeleton())) {
            t.push_back(truth.has_directed(u.x, u.t) && truth.has_directed(u.y, u.t) ? 1 : 0);
            p.push_back(pred.has_directed(u.x, u.t) && pred.has_directed(u.y, u.t) ? 1 : 0);
        }
        ut = format_number(ut_f1(t, p));
    }
    std::string row = name + "," + std::to_string(shd(c)) + "," + format_number(edge_f1(c)) + "," + ut;
    for (auto cell : c.cells)
        row += "," + std::to_string(cell);
    return row + "\n";
}

int cmd_eval(const Settings& s, std::ostream& out) {
    const bool single = s.has("pred") || s.has("truth");
    const bool batch = s.has("pred_dir") || s.has("truth_dir");
    if (single == batch)
        throw ConfigError("give either --pred and --truth, or --pred-dir and --truth-dir");
    const bool truth_is_dag = s.flag("truth_is_dag");
    auto load_truth = [&](const fs::path& p) { return truth_is_dag ? cpdag_of(read_dag(p)) : read_pdag(p); };

    std::string report = "name,shd,edge_f1,ut_f1,c1,c2,c3,c4,c5,c6,c7,c8,c9,c10\n";
    if (single) {
        const fs::path pred = s.required("pred");
        report += eval_row(pred.filename().string(), load_truth(s.required("truth")), read_pdag(pred));
    } else {
        const fs::path pred_dir = s.required("pred_dir");
        const fs::path truth_dir = s.required("truth_dir");
        std::error_code ec;
        if (!fs::is_directory(pred_dir, ec) || !fs::is_directory(truth_dir, ec))
            throw IoError("--pred-dir and --truth-dir must be directories");
        std::vector<std::string> names;
        for (const auto& entry : fs::directory_iterator(pred_dir))
            if (entry.is_regular_file() && entry.path().extension() == ".json")
                names.push_back(entry.path().filename().string());
        std::sort(names.begin(), names.end());
        for (const auto& n : names) {
            if (!fs::exists(truth_dir / n))
                throw IoError("no truth graph '" + (truth_dir / n).string() + "' for prediction '" + n + "'");
            report += eval_row(n, load_truth(truth_dir / n), read_pdag(pred_dir / n));
        }
    }
    emit(s, out, report);
    return 0;
}

int cmd_featurize(const Settings& s, std::ostream& out) {
    const auto corpus_dir = s.required("corpus");
    const auto out_path = s.required("out");
    const EmbeddingBasis basis =
        s.has("model") ? read_model(s.str("model")).basis : EmbeddingBasis::from_seed(s.u64("seed", 0));
    const auto items = read_corpus(corpus_dir);
    const auto examples = build_training_set(items, basis, sepset_options(s), alpha_of(s), corpus_dir);
    std::vector<std::vector<std::string>> names;
    for (const auto& item : items)
        names.push_back(item.net.dag.names());
    write_feature_csv(out_path, examples, names);
    out << "wrote " << examples.size() << " feature rows of width " << kFeatureDim << " to " << out_path << "\n";
    return 0;
}

int cmd_label(const Settings& s, std::ostream& out) {
    if (s.has("corpus") == s.has("dag"))
        throw ConfigError("give exactly one of --corpus and --dag");
    std::vector<Dag> dags;
    if (s.has("dag")) {
        dags.push_back(read_dag(s.str("dag")));
    } else {
        for (auto& item : read_corpus(s.str("corpus")))
            dags.push_back(std::move(item.net.dag));
    }
    std::vector<LabelRow> rows;
    for (std::size_t g = 0; g < dags.size(); ++g) {
        const auto& names = dags[g].names();
        for (const auto& [ut, label] : label_uts(dags[g], skeleton_of(dags[g])))
            rows.push_back(LabelRow{static_cast<int>(g), names[static_cast<std::size_t>(ut.x)],
                                    names[static_cast<std::size_t>(ut.t)], names[static_cast<std::size_t>(ut.y)], label});
    }
    if (s.has("out")) {
        write_label_csv(s.str("out"), rows);
    } else {
        out << "graph,x,t,y,label\n";
        for (const auto& r : rows)
            out << r.graph << "," << r.x << "," << r.t << "," << r.y << "," << r.label << "\n";
    }
    return 0;
}

struct Command {
    std::string name;
    std::string help;
    std::vector<Key> keys;
    std::function<int(const Settings&, std::ostream&)> run;
};

std::vector<Command> commands() {
    return {
        {"synth", "Generate a corpus of random Bayesian networks with samples",
         {{"out", Kind::String, "output corpus directory (must not exist or be empty)"},
          {"n_graphs", Kind::Int, "number of graphs (default 10)"},
          {"nodes_min", Kind::Int, "smallest node count (default 10)"},
          {"nodes_max", Kind::Int, "largest node count (default 20)"},
          {"sparsity_min", Kind::Double, "smallest edges-per-node ratio (default 1.2)"},
          {"sparsity_max", Kind::Double, "largest edges-per-node ratio (default 1.7)"},
          {"graph_model", Kind::String, "ER, SF or mixed (default mixed)"},
          {"sample_size", Kind::Int, "rows per dataset (default 10000)"},
          {"dirichlet_min", Kind::Double, "smallest Dirichlet concentration (default 0.1)"},
          {"dirichlet_max", Kind::Double, "largest Dirichlet concentration (default 1.0)"},
          {"seed", Kind::U64, "root seed (default 0)"}},
         cmd_synth},
        {"train", "Train a triple classifier on a corpus",
         with_sepset_keys({{"corpus", Kind::String, "corpus directory written by synth"},
                           {"out", Kind::String, "model file to write"},
                           {"seed", Kind::U64, "embedding basis seed (default 0)"},
                           {"rounds", Kind::Int, "boosting rounds (default 100)"},
                           {"depth", Kind::Int, "maximum tree depth (default 6)"},
                           {"learning_rate", Kind::Double, "shrinkage (default 0.3)"},
                           {"lambda", Kind::Double, "L2 penalty on leaf values (default 1)"},
                           {"gamma", Kind::Double, "minimum split gain (default 0)"},
                           {"min_child_weight", Kind::Double, "minimum hessian per child (default 1)"},
                           {"threshold", Kind::Double, "score threshold stored in the model (default 0.1)"}}),
         cmd_train},
        {"infer", "Orient a skeleton into a CPDAG",
         with_sepset_keys({{"skeleton", Kind::String, "graph file giving the skeleton (orientation ignored)"},
                           {"data", Kind::String, "dataset CSV (G2 tester)"},
                           {"model", Kind::String, "trained model file"},
                           {"predicate", Kind::String, "STRONG_CPC, STRONG_MPC, STRONG_GMB, WEAK_1, WEAK_2 or WEAK_3"},
                           {"oracle", Kind::String, "DAG file for the d-separation tester"},
                           {"tester", Kind::String, "g2 or oracle (default: oracle when --oracle is given)"},
                           {"threshold", Kind::Double, "score threshold (default: the model's)"},
                           {"out", Kind::String, "output graph file (default stdout)"},
                           {"manifest", Kind::String, "run manifest file to write"}}),
         cmd_infer},
        {"eval", "Compare predicted and true CPDAGs",
         {{"pred", Kind::String, "predicted graph file"},
          {"truth", Kind::String, "true graph file"},
          {"pred_dir", Kind::String, "directory of predicted graph files"},
          {"truth_dir", Kind::String, "directory of true graph files with the same names"},
          {"truth_is_dag", Kind::Bool, "truth files are DAGs; compare against their CPDAGs"},
          {"out", Kind::String, "report CSV (default stdout)"}},
         cmd_eval},
        {"featurize", "Write the feature matrix of every triple in a corpus",
         with_sepset_keys({{"corpus", Kind::String, "corpus directory"},
                           {"out", Kind::String, "feature CSV to write"},
                           {"seed", Kind::U64, "embedding basis seed (default 0)"},
                           {"model", Kind::String, "take the embedding basis from this model"}}),
         cmd_featurize},
        {"label", "Write the v-structure label of every triple",
         {{"corpus", Kind::String, "corpus directory"},
          {"dag", Kind::String, "single DAG file"},
          {"out", Kind::String, "label CSV (default stdout)"}},
         cmd_label},
    };
}

Settings merge_settings(const Command& cmd, const std::string& config_path,
                        const std::map<std::string, CLI::Option*>& options, const std::map<std::string, std::string>& raw) {
    json values = json::object();
    if (!config_path.empty()) {
        json file;
        try {
            file = json::parse(read_text(config_path));
        } catch (const json::exception& e) {
            throw ConfigError("config file '" + config_path + "': " + e.what());
        }
        if (!file.is_object())
            throw ConfigError("config file '" + config_path + "' must hold a JSON object");
        for (const auto& [k, v] : file.items()) {
            const auto it = std::find_if(cmd.keys.begin(), cmd.keys.end(), [&](const Key& key) { return key.name == k; });
            if (it == cmd.keys.end())
                throw ConfigError("config file '" + config_path + "': unknown key '" + k + "' for " + cmd.name);
            check_file_value(*it, v);
            values[k] = v;
        }
    }
    for (const auto& key : cmd.keys)
        if (options.at(key.name)->count() > 0)
            values[key.name] = key.kind == Kind::Bool ? json(true) : convert_flag(key, raw.at(key.name));
    return Settings(std::move(values));
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    const auto cmds = commands();
    CLI::App app{"Supervised orientation of causal skeletons on discrete data"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "ml4c 1.0.0");

    std::map<std::string, std::map<std::string, std::string>> raw;
    std::map<std::string, std::map<std::string, CLI::Option*>> options;
    std::map<std::string, std::string> config_paths;
    std::map<std::string, CLI::App*> subs;
    for (const auto& cmd : cmds) {
        auto* sub = app.add_subcommand(cmd.name, cmd.help);
        subs[cmd.name] = sub;
        sub->add_option("--config", config_paths[cmd.name], "JSON settings file; flags override it");
        for (const auto& key : cmd.keys) {
            const std::string flag = "--" + Settings::flag_name(key.name);
            if (key.kind == Kind::Bool)
                options[cmd.name][key.name] = sub->add_flag(flag, key.help);
            else
                options[cmd.name][key.name] = sub->add_option(flag, raw[cmd.name][key.name], key.help);
        }
    }

    std::vector<const char*> argv;
    for (const auto& a : args)
        argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 1;
    }

    for (const auto& cmd : cmds) {
        if (!subs.at(cmd.name)->parsed())
            continue;
        try {
            const auto settings = merge_settings(cmd, config_paths[cmd.name], options[cmd.name], raw[cmd.name]);
            return cmd.run(settings, out);
        } catch (const Error& e) {
            err << "error: " << e.what() << "\n";
            return e.exit_code();
        } catch (const std::exception& e) {
            err << "internal error: " << e.what() << "\n";
            return 3;
        }
    }
    return 1;
}

} // namespace ml4c::cli
