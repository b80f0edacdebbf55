#include "cli.hpp"

#include "hostility/corpus.hpp"
#include "hostility/embed.hpp"
#include "hostility/error.hpp"
#include "hostility/experiment.hpp"
#include "hostility/features.hpp"
#include "hostility/io.hpp"
#include "hostility/ksc.hpp"
#include "hostility/linmodel.hpp"
#include "hostility/report.hpp"
#include "hostility/stats.hpp"
#include "hostility/synth.hpp"
#include "hostility/text.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <map>
#include <sstream>

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace hostility {

namespace {

json command_defaults(const std::string& cmd)
{
    json d = {{"seed", 1}, {"out", ""}};
    const json embed = {{"embeddings", ""}, {"dim", 100}, {"epochs", 5}};
    const json experiment = {{"corpus", ""}, {"lexicons", ""}, {"folds", 10}, {"lambda", 1.0},
                             {"permute_labels", false}};
    if (cmd == "synth") {
        d["synth"] = json::object();
    } else if (cmd == "stats") {
        d["corpus"] = "";
    } else if (cmd == "embed") {
        d["corpus"] = "";
        d["dim"] = 100;
        d["epochs"] = 5;
    } else if (cmd == "cluster") {
        d["corpus"] = "";
        d["k"] = 4;
        d["max_shift"] = 24;
    } else {
        d.update(embed);
        d.update(experiment);
        if (cmd == "task1") {
            d["lead_hours"] = {3.0};
            d["features"] = {"U", "U+prev-post", "best1", "full"};
            d["greedy"] = false;
        } else if (cmd == "task2") {
            d["n_threshold"] = {10};
            d["features"] = {"U", "best2", "full"};
            d["greedy"] = false;
        } else if (cmd == "sweep") {
            d["lead_hours"] = {1.0, 3.0, 5.0, 8.0, 10.0};
            d["n_threshold"] = {5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15};
            d["features"] = {"full", "best1", "best2"};
        } else if (cmd == "inspect") {
            d["task"] = "task1";
            d["lead_hours"] = {3.0};
            d["n_threshold"] = {10};
            d["features"] = {"best1"};
            d["top"] = 20;
        }
    }
    return d;
}

/// Typed view of the resolved configuration.
class Config {
public:
    explicit Config(json j) : j_(std::move(j)) {}
    const json& raw() const { return j_; }

    template <typename T>
    T get(const std::string& key) const
    {
        try {
            return j_.at(key).get<T>();
        } catch (const json::exception& e) {
            throw ConfigError("config key '" + key + "': " + e.what());
        }
    }

private:
    json j_;
};

json read_config_file(const std::string& path)
{
    json j;
    try {
        j = json::parse(read_file(path));
    } catch (const json::exception& e) {
        throw ConfigError("config " + path + ": " + e.what());
    } catch (const DataError& e) {
        throw ConfigError(e.what());
    }
    if (!j.is_object()) {
        throw ConfigError("config " + path + " must hold a JSON object");
    }
    // A run manifest carries its configuration under "config".
    if (j.contains("config") && j.contains("command")) {
        j = j.at("config");
    }
    return j;
}

fs::path default_out(const std::string& cmd, std::uint64_t seed)
{
    const char* root = std::getenv("HOSTILITY_OUT_ROOT");
    return fs::path(root && *root ? root : "runs") / (cmd + "-seed" + std::to_string(seed));
}

bool inside(const fs::path& child, const fs::path& parent)
{
    const auto c = fs::weakly_canonical(child);
    const auto p = fs::weakly_canonical(parent);
    auto ci = c.begin();
    for (auto pi = p.begin(); pi != p.end(); ++pi, ++ci) {
        if (ci == c.end() || *ci != *pi) {
            return false;
        }
    }
    return true;
}

/// Collects outputs in a staging directory that replaces `out` on commit.
class RunDir {
public:
    explicit RunDir(fs::path out) : out_(std::move(out)), stage_(out_)
    {
        stage_ += ".partial";
        fs::remove_all(stage_);
        fs::create_directories(stage_);
    }
    ~RunDir()
    {
        if (!committed_) {
            std::error_code ec;
            fs::remove_all(stage_, ec);
        }
    }
    const fs::path& path() const { return stage_; }
    void write(const std::string& name, const std::string& contents) { write_file_atomic(stage_ / name, contents); }

    void commit(const std::string& command, const Config& cfg, const std::map<std::string, std::string>& inputs)
    {
        json outputs = json::object();
        for (const auto& e : fs::recursive_directory_iterator(stage_)) {
            if (e.is_regular_file()) {
                outputs[fs::relative(e.path(), stage_).generic_string()] = file_sha256(e.path());
            }
        }
        json manifest = {{"command", command},
                         {"config", cfg.raw()},
                         {"seed", cfg.get<std::uint64_t>("seed")},
                         {"inputs", inputs},
                         {"outputs", outputs}};
        write("manifest.json", manifest.dump(2) + "\n");
        fs::remove_all(out_);
        if (out_.has_parent_path()) {
            fs::create_directories(out_.parent_path());
        }
        fs::rename(stage_, out_);
        committed_ = true;
    }

private:
    fs::path out_;
    fs::path stage_;
    bool committed_ = false;
};

struct Inputs {
    std::map<std::string, std::string> digests;

    void add_file(const fs::path& p) { digests[p.generic_string()] = file_sha256(p); }
    void add_dir(const fs::path& dir)
    {
        std::vector<fs::path> files;
        for (const auto& e : fs::directory_iterator(dir)) {
            if (e.is_regular_file()) {
                files.push_back(e.path());
            }
        }
        std::sort(files.begin(), files.end());
        for (const auto& f : files) {
            add_file(f);
        }
    }
};

fs::path require_path(const Config& cfg, const std::string& key)
{
    const auto p = cfg.get<std::string>(key);
    if (p.empty()) {
        throw ConfigError("--" + std::string(key == "max_shift" ? "max-shift" : key) + " is required");
    }
    if (!fs::exists(p)) {
        throw ConfigError(key + " path not found: " + p);
    }
    return p;
}

SgnsOptions embed_options(const Config& cfg)
{
    SgnsOptions o;
    o.dim = cfg.get<int>("dim");
    o.epochs = cfg.get<int>("epochs");
    o.seed = cfg.get<std::uint64_t>("seed");
    if (o.dim < 1 || o.epochs < 1) {
        throw ConfigError("embedding dimension and epochs must be positive");
    }
    return o;
}

std::vector<TokenSeq> all_sentences(const TokenizedCorpus& tokens, const Corpus& corpus)
{
    std::vector<TokenSeq> out;
    for (std::size_t p = 0; p < corpus.size(); ++p) {
        for (const auto& s : tokens.post_tokens(p)) {
            out.push_back(s);
        }
    }
    return out;
}

std::string embed_log_csv(const SgnsLog& words, const SgnsLog& subwords)
{
    std::ostringstream out;
    out << "model,epoch,loss\n";
    for (std::size_t e = 0; e < words.epoch_loss.size(); ++e) {
        out << "words," << e << ',' << format_double(words.epoch_loss[e]) << '\n';
    }
    for (std::size_t e = 0; e < subwords.epoch_loss.size(); ++e) {
        out << "subwords," << e << ',' << format_double(subwords.epoch_loss[e]) << '\n';
    }
    return out.str();
}

int cmd_synth(const Config& cfg, const fs::path& out_dir, std::ostream& out)
{
    SynthConfig sc = synth_config_from_json(cfg.raw().at("synth").dump());
    sc.seed = cfg.get<std::uint64_t>("seed");
    const auto result = generate_synthetic(sc);

    RunDir run(out_dir);
    std::ostringstream corpus;
    write_corpus(result.corpus, corpus);
    run.write("corpus.jsonl", corpus.str());
    save_lexicons(result.lexicons, run.path() / "lexicons");
    std::ostringstream arche;
    arche << "post_id,archetype\n";
    for (std::size_t p = 0; p < result.corpus.size(); ++p) {
        arche << result.corpus.post(p).id << ',' << result.archetype[p] << '\n';
    }
    run.write("archetypes.csv", arche.str());
    run.write("synth_config.json", synth_config_to_json(sc));
    run.commit("synth", cfg, {});

    std::size_t hostile = 0;
    for (const auto& p : result.corpus.posts()) {
        hostile += p.hostile_count();
    }
    out << "posts " << result.corpus.size() << " comments " << result.corpus.comment_count() << " hostile "
        << hostile << " corpus_sha256 " << file_sha256(out_dir / "corpus.jsonl") << '\n';
    return 0;
}

int cmd_stats(const Config& cfg, const fs::path& out_dir, std::ostream& out)
{
    const auto path = require_path(cfg, "corpus");
    const auto corpus = load_corpus(path);
    const auto report = corpus_stats(corpus);
    Inputs in;
    in.add_file(path);
    RunDir run(out_dir);
    write_stats(report, run.path());
    run.commit("stats", cfg, in.digests);
    out << "posts " << corpus.size() << " hostile_posts " << report.hostile_posts << " hostile_comments "
        << report.hostile_comments << '\n';
    return 0;
}

int cmd_embed(const Config& cfg, const fs::path& out_dir, std::ostream& out)
{
    const auto path = require_path(cfg, "corpus");
    const auto corpus = load_corpus(path);
    const TokenizedCorpus tokens(corpus);
    const auto sentences = all_sentences(tokens, corpus);
    const auto opts = embed_options(cfg);
    SgnsLog wlog, slog;
    const auto words = train_sgns(sentences, opts, &wlog);
    const auto subwords = train_subword_sgns(sentences, opts, &slog);
    Inputs in;
    in.add_file(path);
    RunDir run(out_dir);
    save_table(words, run.path() / "words.vec");
    save_table(subwords, run.path() / "subwords.vec");
    run.write("embed_log.csv", embed_log_csv(wlog, slog));
    run.commit("embed", cfg, in.digests);
    out << "words " << words.word_count() << " subword_ngrams " << subwords.ngram_count() << '\n';
    return 0;
}

int cmd_cluster(const Config& cfg, const fs::path& out_dir, std::ostream& out)
{
    const auto path = require_path(cfg, "corpus");
    const auto corpus = load_corpus(path);
    std::vector<HostilitySeries> raw;
    std::vector<HostilitySeries> smoothed;
    std::vector<Eigen::VectorXd> values;
    for (std::size_t p = 0; p < corpus.size(); ++p) {
        const auto& post = corpus.post(p);
        const auto first = post.first_hostile();
        if (!first || post.comments[*first].t >= kSeriesHours * 3600.0) {
            continue;
        }
        raw.push_back(build_series(corpus, p));
        auto s = raw.back();
        s.values = smooth(s.values);
        s.smoothed = true;
        values.push_back(s.values);
        smoothed.push_back(std::move(s));
    }
    if (raw.empty()) {
        throw DataError("corpus has no post with a hostile comment in its first 10 days");
    }
    KscOptions opts;
    opts.k = cfg.get<int>("k");
    opts.max_shift = cfg.get<int>("max_shift");
    opts.seed = cfg.get<std::uint64_t>("seed");
    if (opts.k < 2 || opts.k > 10) {
        throw ConfigError("--k must lie in [2, 10]");
    }
    const auto result = ksc_cluster(values, opts);

    Inputs in;
    in.add_file(path);
    RunDir run(out_dir);
    export_clusters(result, raw, smoothed, run.path());
    std::ostringstream assign;
    assign << "post_id,cluster,shift,distance\n";
    for (std::size_t i = 0; i < raw.size(); ++i) {
        assign << raw[i].post_id << ',' << result.assignment[i] << ',' << result.shift[i] << ','
               << format_double(result.distance[i]) << '\n';
    }
    run.write("assignments.csv", assign.str());
    run.commit("cluster", cfg, in.digests);
    out << "series " << raw.size() << " clusters " << result.k << " iterations " << result.iterations
        << " objective " << format_double(result.objective_history.back()) << '\n';
    return 0;
}

/// Corpus, lexicons and embeddings shared by the experiment commands.
struct Workspace {
    Corpus corpus;
    std::unique_ptr<TokenizedCorpus> tokens;
    Lexicons lexicons;
    std::unique_ptr<EmbeddingTable> words;
    std::unique_ptr<EmbeddingTable> subwords;
    Inputs inputs;
    std::unique_ptr<FeatureCache> cache;

    explicit Workspace(const Config& cfg)
    {
        const auto path = require_path(cfg, "corpus");
        corpus = load_corpus(path);
        inputs.add_file(path);
        tokens = std::make_unique<TokenizedCorpus>(corpus);

        auto lex = fs::path(cfg.get<std::string>("lexicons"));
        if (lex.empty()) {
            lex = path.parent_path() / "lexicons";
        }
        if (!fs::is_directory(lex)) {
            throw ConfigError("lexicon directory not found: " + lex.string());
        }
        lexicons = load_lexicons(lex);
        inputs.add_dir(lex);

        const auto emb = cfg.get<std::string>("embeddings");
        if (!emb.empty()) {
            words = std::make_unique<EmbeddingTable>(load_table(fs::path(emb) / "words.vec"));
            subwords = std::make_unique<EmbeddingTable>(load_table(fs::path(emb) / "subwords.vec"));
            inputs.add_dir(emb);
        } else {
            // Label-free, so training on the whole corpus leaks nothing.
            const auto sentences = all_sentences(*tokens, corpus);
            const auto opts = embed_options(cfg);
            words = std::make_unique<EmbeddingTable>(train_sgns(sentences, opts));
            subwords = std::make_unique<EmbeddingTable>(train_subword_sgns(sentences, opts));
        }
        cache = std::make_unique<FeatureCache>(
            ExperimentResources{&corpus, tokens.get(), &lexicons, words.get(), subwords.get()});
    }
};

ExperimentOptions experiment_options(const Config& cfg)
{
    ExperimentOptions o;
    o.folds = cfg.get<int>("folds");
    o.seed = cfg.get<std::uint64_t>("seed");
    o.train.lambda = cfg.get<double>("lambda");
    o.comment.seed = o.seed;
    if (o.folds < 2) {
        throw ConfigError("--folds must be >= 2");
    }
    if (!(o.train.lambda >= 0)) {
        throw ConfigError("--lambda must be non-negative");
    }
    return o;
}

std::vector<GroupSet> feature_sets(const Config& cfg)
{
    std::vector<GroupSet> sets;
    for (const auto& name : cfg.get<std::vector<std::string>>("features")) {
        sets.push_back(named_feature_set(name));
    }
    if (sets.empty()) {
        throw ConfigError("--features needs at least one feature set");
    }
    return sets;
}

void print_summary(const std::vector<ExperimentRun>& runs, std::ostream& out)
{
    for (const auto& run : runs) {
        for (const auto& r : run.results) {
            out << task_name(run.dataset.task) << ' ' << format_double(run.dataset.param) << ' ' << r.name
                << " auc " << format_double(r.auc.mean) << " se " << format_double(r.auc.se) << '\n';
        }
    }
}

std::string greedy_csv(const std::vector<GreedyStep>& steps)
{
    std::ostringstream out;
    out << "step,feature_set,auc\n";
    for (std::size_t i = 0; i < steps.size(); ++i) {
        out << i + 1 << ',' << steps[i].groups.name() << ',' << format_double(steps[i].auc) << '\n';
    }
    return out.str();
}

int cmd_task(const std::string& cmd, const Config& cfg, const fs::path& out_dir, std::ostream& out)
{
    const auto opts = experiment_options(cfg);
    const auto sets = feature_sets(cfg);
    const bool permute = cfg.get<bool>("permute_labels");
    Workspace ws(cfg);

    std::vector<ExperimentRun> runs;
    if (cmd == "task1" || cmd == "sweep") {
        const auto leads = cfg.get<std::vector<double>>("lead_hours");
        auto r = sweep_lead_time(*ws.cache, leads, sets, opts, permute);
        runs.insert(runs.end(), std::make_move_iterator(r.begin()), std::make_move_iterator(r.end()));
    }
    if (cmd == "task2" || cmd == "sweep") {
        const auto ns = cfg.get<std::vector<int>>("n_threshold");
        auto r = sweep_intensity(*ws.cache, ns, sets, opts, permute);
        runs.insert(runs.end(), std::make_move_iterator(r.begin()), std::make_move_iterator(r.end()));
    }

    RunDir run(out_dir);
    write_reports(runs, run.path());
    if (cmd != "sweep" && cfg.get<bool>("greedy")) {
        GroupSet candidates = ws.cache->available();
        run.write("greedy.csv", greedy_csv(greedy_forward(*ws.cache, runs.front().dataset, candidates, opts)));
    }
    run.commit(cmd, cfg, ws.inputs.digests);
    print_summary(runs, out);
    return 0;
}

int cmd_inspect(const Config& cfg, const fs::path& out_dir, std::ostream& out)
{
    const auto opts = experiment_options(cfg);
    const auto sets = feature_sets(cfg);
    const auto task = cfg.get<std::string>("task");
    Workspace ws(cfg);
    TaskDataset ds;
    if (task == "task1") {
        ds = build_task1(ws.corpus, cfg.get<std::vector<double>>("lead_hours").at(0), opts.seed);
    } else if (task == "task2") {
        ds = build_task2(ws.corpus, cfg.get<std::vector<int>>("n_threshold").at(0));
    } else {
        throw ConfigError("--task must be task1 or task2");
    }
    const auto full = fit_full_model(*ws.cache, ds, sets.front(), opts);
    const auto top = static_cast<std::size_t>(std::max(1, cfg.get<int>("top")));

    std::ostringstream csv;
    csv << "sign,rank,name,weight\n";
    for (auto sign : {CoefficientSign::Positive, CoefficientSign::Negative}) {
        const auto list = top_coefficients(full.model, top, sign);
        for (std::size_t i = 0; i < list.size(); ++i) {
            csv << (sign == CoefficientSign::Positive ? "positive" : "negative") << ',' << i + 1 << ','
                << list[i].first << ',' << format_double(list[i].second) << '\n';
            if (sign == CoefficientSign::Positive) {
                out << list[i].first << ' ' << format_double(list[i].second) << '\n';
            }
        }
    }
    RunDir run(out_dir);
    run.write("coefficients.csv", csv.str());
    run.write("model.json", model_to_json(full.model));
    run.commit("inspect", cfg, ws.inputs.digests);
    return 0;
}

struct Flags {
    std::string config;
    std::uint64_t seed = 0;
    std::string out, corpus, lexicons, embeddings, task;
    std::vector<double> lead_hours;
    std::vector<int> n_threshold;
    std::vector<std::string> features;
    int folds = 0, k = 0, max_shift = 0, dim = 0, epochs = 0, top = 0;
    double lambda = 0.0;
    bool permute = false, greedy = false;
};

} // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Hostility forecasting on comment threads"};
    app.require_subcommand(1);
    Flags f;
    std::map<std::string, std::map<std::string, CLI::Option*>> given;

    const std::vector<std::pair<std::string, std::string>> commands = {
        {"synth", "Generate a synthetic corpus and lexicons"},
        {"stats", "Descriptive statistics of a corpus"},
        {"embed", "Train word and subword embeddings"},
        {"cluster", "K-SC clustering of hourly hostility series"},
        {"task1", "Hostility presence forecasting"},
        {"task2", "Hostility intensity forecasting"},
        {"sweep", "Lead-time and intensity-threshold sweeps"},
        {"inspect", "Fit one model and list its top coefficients"}};

    for (const auto& [name, help] : commands) {
        auto* sub = app.add_subcommand(name, help);
        const auto defaults = command_defaults(name);
        auto& opts = given[name];
        sub->add_option("--config", f.config, "JSON config (or a run manifest); flags take precedence");
        opts["seed"] = sub->add_option("--seed", f.seed, "Random seed");
        opts["out"] = sub->add_option("--out", f.out, "Output directory");
        auto has = [&](const char* key) { return defaults.contains(key); };
        if (has("corpus")) opts["corpus"] = sub->add_option("--corpus", f.corpus, "Corpus JSONL");
        if (has("lexicons")) opts["lexicons"] = sub->add_option("--lexicons", f.lexicons, "Lexicon directory");
        if (has("embeddings")) {
            opts["embeddings"] = sub->add_option("--embeddings", f.embeddings, "Directory from the embed command");
        }
        if (has("dim")) opts["dim"] = sub->add_option("--dim", f.dim, "Embedding dimension");
        if (has("epochs")) opts["epochs"] = sub->add_option("--epochs", f.epochs, "Embedding epochs");
        if (has("lead_hours")) opts["lead_hours"] = sub->add_option("--lead-hours", f.lead_hours, "Lead times in hours");
        if (has("n_threshold")) {
            opts["n_threshold"] = sub->add_option("--n-threshold", f.n_threshold, "Intensity thresholds");
        }
        if (has("features")) opts["features"] = sub->add_option("--features", f.features, "Feature sets");
        if (has("folds")) opts["folds"] = sub->add_option("--folds", f.folds, "Cross-validation folds");
        if (has("lambda")) opts["lambda"] = sub->add_option("--lambda", f.lambda, "L2 strength");
        if (has("k")) opts["k"] = sub->add_option("--k", f.k, "Cluster count");
        if (has("max_shift")) opts["max_shift"] = sub->add_option("--max-shift", f.max_shift, "Largest shift in hours");
        if (has("permute_labels")) {
            opts["permute_labels"] = sub->add_flag("--permute-labels", f.permute, "Permute instance labels");
        }
        if (has("greedy")) opts["greedy"] = sub->add_flag("--greedy", f.greedy, "Greedy forward group search");
        if (has("task")) opts["task"] = sub->add_option("--task", f.task, "task1 or task2");
        if (has("top")) opts["top"] = sub->add_option("--top", f.top, "Coefficients per sign");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }

    const std::string cmd = app.get_subcommands().front()->get_name();
    try {
        json resolved = command_defaults(cmd);
        if (!f.config.empty()) {
            const json file = read_config_file(f.config);
            for (const auto& [key, value] : file.items()) {
                if (!resolved.contains(key)) {
                    throw ConfigError("config key '" + key + "' does not apply to " + cmd);
                }
                resolved[key] = value;
            }
        }
        const json flag_values = {{"seed", f.seed},
                                  {"out", f.out},
                                  {"corpus", f.corpus},
                                  {"lexicons", f.lexicons},
                                  {"embeddings", f.embeddings},
                                  {"dim", f.dim},
                                  {"epochs", f.epochs},
                                  {"lead_hours", f.lead_hours},
                                  {"n_threshold", f.n_threshold},
                                  {"features", f.features},
                                  {"folds", f.folds},
                                  {"lambda", f.lambda},
                                  {"k", f.k},
                                  {"max_shift", f.max_shift},
                                  {"permute_labels", f.permute},
                                  {"greedy", f.greedy},
                                  {"task", f.task},
                                  {"top", f.top}};
        for (const auto& [key, opt] : given[cmd]) {
            if (opt->count() > 0) {
                resolved[key] = flag_values.at(key);
            }
        }
        const Config cfg(resolved);
        fs::path out_dir = cfg.get<std::string>("out");
        if (out_dir.empty()) {
            out_dir = default_out(cmd, cfg.get<std::uint64_t>("seed"));
        }
        for (const char* key : {"corpus", "lexicons", "embeddings"}) {
            if (resolved.contains(key)) {
                const auto p = cfg.get<std::string>(key);
                if (!p.empty() && fs::exists(p) && inside(p, out_dir)) {
                    throw ConfigError("output directory " + out_dir.string() + " contains input " + p);
                }
            }
        }

        if (cmd == "synth") return cmd_synth(cfg, out_dir, out);
        if (cmd == "stats") return cmd_stats(cfg, out_dir, out);
        if (cmd == "embed") return cmd_embed(cfg, out_dir, out);
        if (cmd == "cluster") return cmd_cluster(cfg, out_dir, out);
        if (cmd == "inspect") return cmd_inspect(cfg, out_dir, out);
        return cmd_task(cmd, cfg, out_dir, out);
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    } catch (const DataError& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }
}

} // namespace hostility
