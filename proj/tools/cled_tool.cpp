// cled: command-line front end for the fault-injection and error-detection
// toolkit. Every subcommand is deterministic given its full flag set, writes
// its artifacts under --out with fixed file names, and records the resolved
// configuration in run_config.json next to them.
//
// Exit codes: 0 success, 1 usage error (bad flags or violated operation
// preconditions), 2 malformed input data, 3 internal error (exhausted
// search guards, unexpected failures).

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "cled/campaign.hpp"
#include "cled/corpus.hpp"
#include "cled/errors.hpp"
#include "cled/floatbits.hpp"
#include "cled/forest.hpp"
#include "cled/lingfeat.hpp"
#include "cled/rng.hpp"
#include "cled/transformer.hpp"

using namespace cled;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Parses "1,31" and "0-8,31" style position lists.
std::vector<int> parse_positions(const std::string& text) {
    std::vector<int> positions;
    std::string token;
    std::istringstream ss(text);
    while (std::getline(ss, token, ',')) {
        if (token.empty()) continue;
        const auto dash = token.find('-', token.front() == '-' ? 1 : 0);
        try {
            if (dash == std::string::npos) {
                positions.push_back(std::stoi(token));
            } else {
                const int lo = std::stoi(token.substr(0, dash));
                const int hi = std::stoi(token.substr(dash + 1));
                if (hi < lo) throw PreconditionError("empty position range " + token);
                for (int p = lo; p <= hi; ++p) positions.push_back(p);
            }
        } catch (const std::invalid_argument&) {
            throw PreconditionError("cannot parse bit position list entry '" + token + "'");
        }
    }
    if (positions.empty()) throw PreconditionError("no bit positions given");
    for (int p : positions) require_valid(BitPosition{p});
    return positions;
}

// "25:6,50:10" -> hyperparameter grid over (num_trees, max_depth).
std::vector<ForestHyperparams> parse_grid(const std::string& text) {
    std::vector<ForestHyperparams> grid;
    std::string token;
    std::istringstream ss(text);
    while (std::getline(ss, token, ',')) {
        if (token.empty()) continue;
        const auto colon = token.find(':');
        if (colon == std::string::npos) {
            throw PreconditionError("grid entries are trees:depth, got '" + token + "'");
        }
        ForestHyperparams hp;
        try {
            hp.num_trees = std::stoi(token.substr(0, colon));
            hp.max_depth = std::stoi(token.substr(colon + 1));
        } catch (const std::invalid_argument&) {
            throw PreconditionError("cannot parse grid entry '" + token + "'");
        }
        hp.validate();
        grid.push_back(hp);
    }
    if (grid.empty()) throw PreconditionError("empty hyperparameter grid");
    return grid;
}

void write_run_config(const fs::path& dir, const std::string& subcommand, json config) {
    config["subcommand"] = subcommand;
    config["tool_version"] = "0.1.0";
    std::ofstream out(dir / "run_config.json");
    out << config.dump(2) << "\n";
}

fs::path prepare_out_dir(const std::string& out) {
    const fs::path dir(out);
    fs::create_directories(dir);
    return dir;
}

MiniTransformer build_model(const std::string& model_path, const std::string& variant,
                            std::uint64_t model_seed) {
    if (!model_path.empty()) return MiniTransformer::load(model_path);
    return MiniTransformer(ModelConfig::toy(variant_from_string(variant), model_seed));
}

FeatureTable labeled_table(const std::vector<LabeledSample>& samples) {
    FeatureTable table;
    for (const LabeledSample& s : samples) {
        table.rows.push_back(extract_features(s.text));
        table.labels.push_back(s.label);
    }
    return table;
}

// ---------------------------------------------------------------------------

struct SweepArgs {
    std::string variant = "t5";
    std::uint64_t model_seed = 1;
    std::string model_path;
    std::uint64_t seed = 7;
    std::string positions = "0-31";
    long trials = 50;
    long min_relevant = 0;
    long max_trials = 20000;
    int input_count = 3;
    std::uint64_t input_seed = 42;
    double baseline = 1.0;
    double degradation = 0.2;
    std::string out = "cled-out";
};

int cmd_sweep(const SweepArgs& args) {
    const fs::path dir = prepare_out_dir(args.out);
    MiniTransformer model = build_model(args.model_path, args.variant, args.model_seed);
    const auto inputs = make_toy_inputs(model.config(), args.input_count, args.input_seed);

    std::vector<SweepResult> results;
    for (int pos : parse_positions(args.positions)) {
        const std::uint64_t pos_seed = derive_seed(args.seed, static_cast<std::uint64_t>(pos));
        if (args.min_relevant > 0) {
            results.push_back(sweep_until(model, inputs, BitPosition{pos}, args.min_relevant,
                                          args.max_trials, pos_seed));
        } else {
            results.push_back(sweep(model, inputs, BitPosition{pos}, args.trials, pos_seed));
        }
    }
    write_sweep_csv(dir / "sweep.csv", results);

    const std::set<BitPosition> critical =
        identify_critical_bits(results, args.baseline, args.degradation);
    json report;
    report["baseline_score"] = args.baseline;
    report["degradation_threshold"] = args.degradation;
    report["cutoff"] = args.baseline * (1.0 - args.degradation);
    report["critical_positions"] = json::array();
    for (const BitPosition& p : critical) report["critical_positions"].push_back(p.index);
    std::ofstream(dir / "critical_bits.json") << report.dump(2) << "\n";

    write_run_config(dir, "sweep",
                     {{"variant", args.variant},
                      {"model_seed", args.model_seed},
                      {"model_path", args.model_path},
                      {"seed", args.seed},
                      {"positions", args.positions},
                      {"trials", args.trials},
                      {"min_relevant", args.min_relevant},
                      {"max_trials", args.max_trials},
                      {"input_count", args.input_count},
                      {"input_seed", args.input_seed},
                      {"baseline", args.baseline},
                      {"degradation", args.degradation}});

    std::printf("swept %zu position(s); %zu critical; wrote %s\n", results.size(),
                critical.size(), (dir / "sweep.csv").string().c_str());
    return 0;
}

struct FeaturesArgs {
    std::string in;
    std::string out = "cled-out";
};

int cmd_features(const FeaturesArgs& args) {
    const fs::path dir = prepare_out_dir(args.out);
    const auto samples = load_jsonl(args.in);
    write_feature_csv(dir / "features.csv", labeled_table(samples));
    write_run_config(dir, "features", {{"in", args.in}});
    std::printf("extracted %zu feature row(s) -> %s\n", samples.size(),
                (dir / "features.csv").string().c_str());
    return 0;
}

struct TrainArgs {
    std::string in;
    std::string out = "cled-out";
    std::uint64_t seed = 3;
    ForestHyperparams hp;
    bool no_bootstrap = false;
    double threshold = 0.5;
    std::string grid;
    int folds = 3;
};

int cmd_train(const TrainArgs& args) {
    const fs::path dir = prepare_out_dir(args.out);
    const FeatureTable table = read_feature_csv(args.in);
    if (!table.has_labels()) throw DataError("training input has no label column: " + args.in);

    ForestHyperparams hp = args.hp;
    hp.bootstrap = !args.no_bootstrap;
    if (!args.grid.empty()) {
        hp = cross_validate(table.rows, table.labels, parse_grid(args.grid), args.folds,
                            args.seed);
        hp.bootstrap = !args.no_bootstrap;
    }

    RandomForest forest = RandomForest::train(table.rows, table.labels, hp, args.seed);
    forest.set_threshold(args.threshold);
    forest.save(dir / "model.json");

    const ConfusionMatrix cm = evaluate(forest, table.rows, table.labels);
    json report;
    report["train_accuracy"] = cm.accuracy();
    report["train_recall"] = cm.recall();
    report["num_trees"] = hp.num_trees;
    report["max_depth"] = hp.max_depth;
    report["threshold"] = args.threshold;
    std::ofstream(dir / "train_report.json") << report.dump(2) << "\n";

    write_run_config(dir, "train",
                     {{"in", args.in},
                      {"seed", args.seed},
                      {"num_trees", hp.num_trees},
                      {"max_depth", hp.max_depth},
                      {"min_samples_leaf", hp.min_samples_leaf},
                      {"min_samples_split", hp.min_samples_split},
                      {"bootstrap", hp.bootstrap},
                      {"threshold", args.threshold},
                      {"grid", args.grid},
                      {"folds", args.folds}});

    std::printf("trained %d tree(s); train accuracy %.4f, recall %.4f -> %s\n", hp.num_trees,
                cm.accuracy(), cm.recall(), (dir / "model.json").string().c_str());
    return 0;
}

struct PredictArgs {
    std::string model;
    std::string in;
    std::string out = "cled-out";
    double threshold = -1.0; // <0 = use the model's stored threshold
};

int cmd_predict(const PredictArgs& args) {
    const fs::path dir = prepare_out_dir(args.out);
    const RandomForest forest = RandomForest::load(args.model);
    const FeatureTable table = read_feature_csv(args.in);
    const std::optional<double> threshold =
        args.threshold < 0.0 ? std::nullopt : std::optional<double>(args.threshold);

    std::ofstream csv(dir / "predictions.csv");
    csv << "index,proba,verdict" << (table.has_labels() ? ",label\n" : "\n");
    ConfusionMatrix cm;
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const double proba = forest.predict_proba(table.rows[i]);
        const bool flagged = forest.classify(table.rows[i], threshold);
        csv << i << "," << format_double(proba) << "," << (flagged ? "erroneous" : "clean");
        if (table.has_labels()) {
            const int label = table.labels[i];
            csv << "," << label;
            if (flagged && label == 1) ++cm.tp;
            if (flagged && label == 0) ++cm.fp;
            if (!flagged && label == 1) ++cm.fn;
            if (!flagged && label == 0) ++cm.tn;
        }
        csv << "\n";
    }
    csv.close();

    json report;
    report["samples"] = table.rows.size();
    report["threshold"] = threshold.has_value() ? *threshold : forest.threshold();
    if (table.has_labels() && cm.total() > 0) {
        report["accuracy"] = cm.accuracy();
        report["recall"] = cm.recall();
        report["false_positive_rate"] = cm.fpr();
        std::printf("accuracy %.4f, recall %.4f over %ld labeled sample(s)\n", cm.accuracy(),
                    cm.recall(), cm.total());
    } else {
        std::printf("predicted %zu unlabeled sample(s)\n", table.rows.size());
    }
    std::ofstream(dir / "predict_report.json") << report.dump(2) << "\n";

    write_run_config(dir, "predict",
                     {{"model", args.model}, {"in", args.in}, {"threshold", args.threshold}});
    return 0;
}

struct RocArgs {
    std::string model;
    std::string in;
    std::string out = "cled-out";
    int thresholds = 101;
};

int cmd_roc(const RocArgs& args) {
    const fs::path dir = prepare_out_dir(args.out);
    const RandomForest forest = RandomForest::load(args.model);
    const FeatureTable table = read_feature_csv(args.in);
    if (!table.has_labels()) throw DataError("roc needs a labeled feature file: " + args.in);

    const auto roc = roc_curve(forest, table.rows, table.labels, args.thresholds);
    write_roc_csv(dir / "roc.csv", roc);
    write_run_config(dir, "roc",
                     {{"model", args.model}, {"in", args.in}, {"thresholds", args.thresholds}});
    std::printf("wrote %d ROC point(s) -> %s\n", args.thresholds,
                (dir / "roc.csv").string().c_str());
    return 0;
}

struct SimulateArgs {
    int clean = 100;
    int corrupt = 100;
    std::uint64_t seed = 1;
    std::string out = "cled-out";
};

int cmd_simulate(const SimulateArgs& args) {
    const fs::path dir = prepare_out_dir(args.out);
    const auto samples = make_synthetic_dataset(args.clean, args.corrupt, args.seed);
    save_jsonl(dir / "dataset.jsonl", samples);
    write_run_config(dir, "simulate",
                     {{"clean", args.clean}, {"corrupt", args.corrupt}, {"seed", args.seed}});
    std::printf("wrote %zu sample(s) -> %s\n", samples.size(),
                (dir / "dataset.jsonl").string().c_str());
    return 0;
}

struct InjectArgs {
    std::string variant = "t5";
    std::uint64_t model_seed = 1;
    std::string model_path;
    std::size_t flat_index = 0;
    int position = 1;
    int input_count = 3;
    std::uint64_t input_seed = 42;
    std::string out = "cled-out";
};

int cmd_inject(const InjectArgs& args) {
    const fs::path dir = prepare_out_dir(args.out);
    MiniTransformer model = build_model(args.model_path, args.variant, args.model_seed);
    const auto inputs = make_toy_inputs(model.config(), args.input_count, args.input_seed);

    const InjectionRecord rec =
        inject_once(model, inputs, args.flat_index, BitPosition{args.position});

    std::printf("flat index %zu, bit position %d: 0x%08X -> 0x%08X (%g -> %g)\n", rec.flat_index,
                rec.position.index, rec.pre_bits.raw, rec.post_bits.raw,
                static_cast<double>(rec.pre_bits.to_float()),
                static_cast<double>(rec.post_bits.to_float()));
    std::printf("%s (score %.4f)\n", rec.relevant ? "relevant: output changed" : "irrelevant",
                rec.score);
    const ToyVocab vocab;
    for (std::size_t i = 0; i < rec.outputs.size(); ++i) {
        std::printf("input %zu ->", i);
        for (int t : rec.outputs[i]) std::printf(" %d", t);
        if (model.config().vocab_size == vocab.size()) {
            std::printf("  (\"%s\")", vocab.decode(rec.outputs[i]).c_str());
        }
        std::printf("\n");
    }

    write_injection_jsonl(dir / "injection.jsonl", {rec});
    write_run_config(dir, "inject",
                     {{"variant", args.variant},
                      {"model_seed", args.model_seed},
                      {"model_path", args.model_path},
                      {"flat_index", args.flat_index},
                      {"position", args.position},
                      {"input_count", args.input_count},
                      {"input_seed", args.input_seed}});
    return 0;
}

struct SplitArgs {
    std::string in;
    double fraction = 0.8;
    std::uint64_t seed = 2;
    std::string out = "cled-out";
};

int cmd_split(const SplitArgs& args) {
    const fs::path dir = prepare_out_dir(args.out);
    const auto samples = load_jsonl(args.in);
    const SplitResult split = stratified_split(samples, args.fraction, args.seed);
    if (split.test.empty()) {
        std::fprintf(stderr, "warning: test split is empty at fraction %g\n", args.fraction);
    }
    save_jsonl(dir / "train.jsonl", split.train);
    save_jsonl(dir / "test.jsonl", split.test);
    write_run_config(dir, "split",
                     {{"in", args.in}, {"fraction", args.fraction}, {"seed", args.seed}});
    std::printf("split %zu sample(s) into %zu train / %zu test\n", samples.size(),
                split.train.size(), split.test.size());
    return 0;
}

struct E2eArgs {
    std::string variant = "t5";
    std::uint64_t model_seed = 1;
    std::uint64_t seed = 1;
    int input_count = 32;
    std::uint64_t input_seed = 42;
    int relevant_errors = 10;
    long max_attempts = 100000;
    double fraction = 0.8;
    int thresholds = 101;
    std::string out = "cled-out";
};

int cmd_e2e(const E2eArgs& args) {
    const fs::path dir = prepare_out_dir(args.out);
    MiniTransformer model(ModelConfig::toy(variant_from_string(args.variant), args.model_seed));
    const auto inputs = make_toy_inputs(model.config(), args.input_count, args.input_seed);
    const ToyVocab vocab;

    ErrorDatasetOptions options;
    options.num_relevant_errors = args.relevant_errors;
    options.max_attempts = args.max_attempts;
    const auto samples =
        generate_error_dataset(model, vocab, inputs, options, derive_seed(args.seed, 1));
    save_jsonl(dir / "dataset.jsonl", samples);

    const FeatureTable table = labeled_table(samples);
    write_feature_csv(dir / "features.csv", table);

    const SplitResult split = stratified_split(samples, args.fraction, derive_seed(args.seed, 2));
    const FeatureTable train = labeled_table(split.train);
    const FeatureTable test = labeled_table(split.test);

    RandomForest forest =
        RandomForest::train(train.rows, train.labels, ForestHyperparams{}, derive_seed(args.seed, 3));
    forest.save(dir / "model.json");

    const ConfusionMatrix cm = evaluate(forest, test.rows, test.labels);
    const auto roc = roc_curve(forest, test.rows, test.labels, args.thresholds);
    write_roc_csv(dir / "roc.csv", roc);

    json metrics;
    metrics["samples"] = samples.size();
    metrics["test_samples"] = test.rows.size();
    metrics["accuracy"] = cm.accuracy();
    metrics["recall"] = cm.recall();
    metrics["false_positive_rate"] = cm.fpr();
    std::ofstream(dir / "metrics.json") << metrics.dump(2) << "\n";

    write_run_config(dir, "e2e",
                     {{"variant", args.variant},
                      {"model_seed", args.model_seed},
                      {"seed", args.seed},
                      {"input_count", args.input_count},
                      {"input_seed", args.input_seed},
                      {"relevant_errors", args.relevant_errors},
                      {"max_attempts", args.max_attempts},
                      {"fraction", args.fraction},
                      {"thresholds", args.thresholds}});

    std::printf("e2e: %zu sample(s), test accuracy %.4f, recall %.4f -> %s\n", samples.size(),
                cm.accuracy(), cm.recall(), dir.string().c_str());
    return 0;
}

struct IngestArgs {
    std::string in;
    std::string out = "cled-out";
};

int cmd_ingest(const IngestArgs& args) {
    const fs::path dir = prepare_out_dir(args.out);
    const auto samples = ingest_dataset(args.in);
    long erroneous = 0;
    for (const LabeledSample& s : samples) erroneous += s.label;
    save_jsonl(dir / "ingested.jsonl", samples);
    write_run_config(dir, "ingest", {{"in", args.in}});
    std::printf("ingested %zu sample(s) (%ld erroneous) -> %s\n", samples.size(), erroneous,
                (dir / "ingested.jsonl").string().c_str());
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "Single-bit fault injection on a toy float32 transformer plus "
        "linguistic-feature error detection"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "0.1.0");
    int jobs = 1;
    app.add_option("--jobs", jobs,
                   "Worker count ceiling (accepted for forward compatibility; execution is "
                   "currently single-threaded)")
        ->check(CLI::PositiveNumber);

    SweepArgs sweep_args;
    CLI::App* sweep_cmd =
        app.add_subcommand("sweep", "Sweep bit positions with random single-bit flips");
    sweep_cmd->add_option("--variant", sweep_args.variant, "Toy model wiring: opus or t5")
        ->check(CLI::IsMember({"opus", "t5"}));
    sweep_cmd->add_option("--model-seed", sweep_args.model_seed, "Toy model init seed");
    sweep_cmd->add_option("--model", sweep_args.model_path, "Load a saved parameter dump instead");
    sweep_cmd->add_option("--seed", sweep_args.seed, "Campaign seed");
    sweep_cmd->add_option("--positions", sweep_args.positions, "Bit positions, e.g. 1,31 or 0-8");
    sweep_cmd->add_option("--trials", sweep_args.trials, "Trials per position");
    sweep_cmd->add_option("--min-relevant", sweep_args.min_relevant,
                          "Stop each position early after this many relevant trials (0 = fixed "
                          "trial count)");
    sweep_cmd->add_option("--max-trials", sweep_args.max_trials,
                          "Trial budget when --min-relevant is set");
    sweep_cmd->add_option("--inputs", sweep_args.input_count, "Number of probe inputs");
    sweep_cmd->add_option("--input-seed", sweep_args.input_seed, "Probe input seed");
    sweep_cmd->add_option("--baseline", sweep_args.baseline, "Baseline similarity score");
    sweep_cmd->add_option("--degradation", sweep_args.degradation,
                          "Critical-bit degradation threshold");
    sweep_cmd->add_option("--out", sweep_args.out, "Output directory");

    FeaturesArgs features_args;
    CLI::App* features_cmd =
        app.add_subcommand("features", "Extract linguistic features from a JSONL sample file");
    features_cmd->add_option("--in", features_args.in, "Input JSONL")->required();
    features_cmd->add_option("--out", features_args.out, "Output directory");

    TrainArgs train_args;
    CLI::App* train_cmd = app.add_subcommand("train", "Train the detection forest");
    train_cmd->add_option("--in", train_args.in, "Labeled feature CSV")->required();
    train_cmd->add_option("--out", train_args.out, "Output directory");
    train_cmd->add_option("--seed", train_args.seed, "Training seed");
    train_cmd->add_option("--trees", train_args.hp.num_trees, "Number of trees");
    train_cmd->add_option("--depth", train_args.hp.max_depth, "Maximum tree depth");
    train_cmd->add_option("--max-features", train_args.hp.max_features,
                          "Features per split (0 = ceil(sqrt(n)))");
    train_cmd->add_option("--min-leaf", train_args.hp.min_samples_leaf, "Min samples per leaf");
    train_cmd->add_option("--min-split", train_args.hp.min_samples_split,
                          "Min samples to split a node");
    train_cmd->add_flag("--no-bootstrap", train_args.no_bootstrap, "Disable bootstrap resampling");
    train_cmd->add_option("--threshold", train_args.threshold, "Stored decision threshold")
        ->check(CLI::Range(0.0, 1.0));
    train_cmd->add_option("--grid", train_args.grid,
                          "Cross-validate over trees:depth pairs, e.g. 25:6,50:10");
    train_cmd->add_option("--folds", train_args.folds, "Cross-validation folds");

    PredictArgs predict_args;
    CLI::App* predict_cmd = app.add_subcommand("predict", "Classify feature rows with a model");
    predict_cmd->add_option("--model", predict_args.model, "Model JSON")->required();
    predict_cmd->add_option("--in", predict_args.in, "Feature CSV")->required();
    predict_cmd->add_option("--out", predict_args.out, "Output directory");
    predict_cmd->add_option("--threshold", predict_args.threshold,
                            "Decision threshold override (default: the model's stored one)")
        ->check(CLI::Range(0.0, 1.0));

    RocArgs roc_args;
    CLI::App* roc_cmd = app.add_subcommand("roc", "Threshold sweep over a labeled feature file");
    roc_cmd->add_option("--model", roc_args.model, "Model JSON")->required();
    roc_cmd->add_option("--in", roc_args.in, "Labeled feature CSV")->required();
    roc_cmd->add_option("--out", roc_args.out, "Output directory");
    roc_cmd->add_option("--thresholds", roc_args.thresholds, "Number of threshold points");

    SimulateArgs simulate_args;
    CLI::App* simulate_cmd =
        app.add_subcommand("simulate", "Generate a synthetic clean/corrupted dataset");
    simulate_cmd->add_option("--clean", simulate_args.clean, "Clean sample count");
    simulate_cmd->add_option("--corrupt", simulate_args.corrupt, "Corrupted sample count");
    simulate_cmd->add_option("--seed", simulate_args.seed, "Dataset seed");
    simulate_cmd->add_option("--out", simulate_args.out, "Output directory");

    InjectArgs inject_args;
    CLI::App* inject_cmd =
        app.add_subcommand("inject", "Flip one bit of one parameter and show the effect");
    inject_cmd->add_option("--variant", inject_args.variant, "Toy model wiring: opus or t5")
        ->check(CLI::IsMember({"opus", "t5"}));
    inject_cmd->add_option("--model-seed", inject_args.model_seed, "Toy model init seed");
    inject_cmd->add_option("--model", inject_args.model_path, "Load a saved parameter dump");
    inject_cmd->add_option("--flat-index", inject_args.flat_index, "Flat parameter index")
        ->required();
    inject_cmd->add_option("--position", inject_args.position, "Bit position 0-31")->required();
    inject_cmd->add_option("--inputs", inject_args.input_count, "Number of probe inputs");
    inject_cmd->add_option("--input-seed", inject_args.input_seed, "Probe input seed");
    inject_cmd->add_option("--out", inject_args.out, "Output directory");

    SplitArgs split_args;
    CLI::App* split_cmd = app.add_subcommand("split", "Stratified train/test split of a JSONL file");
    split_cmd->add_option("--in", split_args.in, "Input JSONL")->required();
    split_cmd->add_option("--fraction", split_args.fraction, "Train fraction")
        ->check(CLI::Range(0.0, 1.0));
    split_cmd->add_option("--seed", split_args.seed, "Shuffle seed");
    split_cmd->add_option("--out", split_args.out, "Output directory");

    E2eArgs e2e_args;
    CLI::App* e2e_cmd = app.add_subcommand(
        "e2e", "Toy model -> injected error dataset -> features -> train -> ROC");
    e2e_cmd->add_option("--variant", e2e_args.variant, "Toy model wiring: opus or t5")
        ->check(CLI::IsMember({"opus", "t5"}));
    e2e_cmd->add_option("--model-seed", e2e_args.model_seed, "Toy model init seed");
    e2e_cmd->add_option("--seed", e2e_args.seed, "Pipeline seed");
    e2e_cmd->add_option("--inputs", e2e_args.input_count, "Number of probe inputs");
    e2e_cmd->add_option("--input-seed", e2e_args.input_seed, "Probe input seed");
    e2e_cmd->add_option("--relevant-errors", e2e_args.relevant_errors,
                        "Relevant injections to collect");
    e2e_cmd->add_option("--max-attempts", e2e_args.max_attempts, "Injection attempt guard");
    e2e_cmd->add_option("--fraction", e2e_args.fraction, "Train fraction")
        ->check(CLI::Range(0.0, 1.0));
    e2e_cmd->add_option("--thresholds", e2e_args.thresholds, "ROC threshold points");
    e2e_cmd->add_option("--out", e2e_args.out, "Output directory");

    IngestArgs ingest_args;
    CLI::App* ingest_cmd = app.add_subcommand(
        "ingest", "Normalize an externally published error dataset (local JSONL file)");
    ingest_cmd->add_option("--in", ingest_args.in, "Input JSONL")->required();
    ingest_cmd->add_option("--out", ingest_args.out, "Output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (sweep_cmd->parsed()) return cmd_sweep(sweep_args);
        if (features_cmd->parsed()) return cmd_features(features_args);
        if (train_cmd->parsed()) return cmd_train(train_args);
        if (predict_cmd->parsed()) return cmd_predict(predict_args);
        if (roc_cmd->parsed()) return cmd_roc(roc_args);
        if (simulate_cmd->parsed()) return cmd_simulate(simulate_args);
        if (inject_cmd->parsed()) return cmd_inject(inject_args);
        if (split_cmd->parsed()) return cmd_split(split_args);
        if (e2e_cmd->parsed()) return cmd_e2e(e2e_args);
        if (ingest_cmd->parsed()) return cmd_ingest(ingest_args);
    } catch (const PreconditionError& e) {
        std::fprintf(stderr, "usage error: %s\n", e.what());
        return 1;
    } catch (const DataError& e) {
        std::fprintf(stderr, "data error: %s\n", e.what());
        return 2;
    } catch (const GuardLimitError& e) {
        std::fprintf(stderr, "guard limit: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "internal error: %s\n", e.what());
        return 3;
    }
    return 1;
}
