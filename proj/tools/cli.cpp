#include "cli.hpp"

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "wombat/wombat.hpp"

namespace wombat::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Config {
    std::string root;
    bool create = false;
    std::string format = "text";
};

struct ImportArgs {
    std::string file;
    std::string identifier;
    std::string on_duplicate = "reject";
    std::string header = "auto";
    bool lenient = false;
    std::string tokenizer = "default";
    bool strip_special = false;
    std::string stopwords;
    std::string external;
    std::string phrases = "off";
};

struct VectorsArgs {
    std::string query;
    std::vector<std::string> words;
    std::string input;
    bool raw = false;
    bool in_order = false;
    bool no_tuple = false;
    bool no_phrases = false;
};

struct TrainArgs {
    std::string corpus;
    double delta = 0.0;
    double threshold = 10.0;
    int passes = 1;
    std::string out;
    std::string attach;
    bool fold = false;
};

struct StsArgs {
    std::string query;
    std::string tsv;
    std::string metric = "cosine";
    bool reverse = false;
    std::string stopwords = "english";
    std::string out_dir = ".";
};

struct HeatmapArgs {
    std::string query;
    std::string sentence1;
    std::string sentence2;
    std::string format = "csv";
    std::string metric = "cosine_similarity";
    std::string out_dir = ".";
    bool no_phrases = false;
};

std::string format_ratio(double value)
{
    std::ostringstream s;
    s << std::fixed << std::setprecision(2) << value;
    return s.str();
}

PhraseConfig parse_phrase_option(const std::string& spec, std::optional<PhraseModel>& model)
{
    if (spec == "off") return {};
    if (spec == "vocab") return {PhraseConfig::Mode::Vocab, "", 4};
    if (spec.rfind("vocab:", 0) == 0) return {PhraseConfig::Mode::Vocab, "", std::stoi(spec.substr(6))};
    if (spec.rfind("model:", 0) == 0) {
        model = PhraseModel::load(spec.substr(6));
        return {PhraseConfig::Mode::Model, model->content_hash(), 4};
    }
    throw Error("--phrases expects off, vocab, vocab:N or model:FILE");
}

StopwordList stopword_option(const std::string& spec)
{
    if (spec == "english") return StopwordList::english();
    if (spec == "none") return StopwordList("none", {});
    return StopwordList::load(spec);
}

int cmd_import(const Config& config, const ImportArgs& args, std::ostream& out)
{
    Connector connector(config.root, config.create);
    auto id = parse_identifier(args.identifier);

    std::vector<Stage> stages;
    if (!args.external.empty()) {
        stages.push_back(ExternalStage::make(args.external));
    } else {
        stages.push_back(TokenizeStage{args.tokenizer});
    }
    stages.push_back(CaseFoldStage{id.folded()});
    stages.push_back(StemStage{id.unit() == "stem"});
    if (!args.stopwords.empty()) {
        stages.push_back(StopwordStage{stopword_option(args.stopwords)});
    }
    if (args.strip_special) {
        stages.push_back(StripSpecialStage{"default"});
    }
    std::optional<PhraseModel> model;
    auto phrases = parse_phrase_option(args.phrases, model);
    PipelineDescriptor pipeline(std::move(stages), model ? PhraseConfig{} : phrases);

    ImportOptions options;
    options.on_duplicate = args.on_duplicate == "keep-first" ? DuplicatePolicy::KeepFirst : DuplicatePolicy::Reject;
    options.expect_header = args.header == "yes" ? HeaderMode::Yes : args.header == "no" ? HeaderMode::No : HeaderMode::Auto;
    options.strict = !args.lenient;

    auto report = connector.import_from_file(args.file, args.identifier, options, pipeline, model ? &*model : nullptr);
    double ratio = report.bytes_text > 0 ? static_cast<double>(report.bytes_store) / static_cast<double>(report.bytes_text) : 0.0;
    if (config.format == "json") {
        json malformed = json::array();
        for (const auto& m : report.malformed_lines) malformed.push_back({{"line", m.line}, {"reason", m.reason}});
        out << json{{"identifier", id.normalized()},
                    {"imported", report.imported},
                    {"skipped_duplicates", report.skipped_duplicates},
                    {"malformed_lines", malformed},
                    {"header", report.header},
                    {"elapsed_seconds", report.elapsed.count()},
                    {"bytes_text", report.bytes_text},
                    {"bytes_store", report.bytes_store},
                    {"store_to_text_ratio", ratio}}
                   .dump(2)
            << '\n';
    } else {
        out << "identifier: " << id.normalized() << '\n'
            << "imported: " << report.imported << '\n'
            << "skipped_duplicates: " << report.skipped_duplicates << '\n'
            << "malformed_lines: " << report.malformed_lines.size() << '\n';
        for (const auto& m : report.malformed_lines) {
            out << "  line " << m.line << ": " << m.reason << '\n';
        }
        out << "header: " << (report.header ? "yes" : "no") << '\n'
            << "elapsed: " << format_ratio(report.elapsed.count()) << " s\n"
            << "size: " << report.bytes_text << " bytes text -> " << report.bytes_store << " bytes store (ratio "
            << format_ratio(ratio) << ")\n";
    }
    return kOk;
}

int cmd_list(const Config& config, const std::string& filter, std::ostream& out)
{
    Catalog catalog(config.root, config.create);
    auto entries = catalog.list_entries(parse_attribute_filter(filter));
    if (config.format == "json") {
        json doc = json::array();
        for (const auto& e : entries) {
            doc.push_back({{"identifier", e.identifier.normalized()},
                           {"dims", e.dims},
                           {"vocab_size", e.vocab_size},
                           {"pipeline_hash", e.pipeline_hash()},
                           {"phrase_model", e.phrase_model_ref ? json(*e.phrase_model_ref) : json(nullptr)},
                           {"created_at", e.created_at},
                           {"source_file", e.source_file}});
        }
        out << doc.dump(2) << '\n';
    } else {
        for (const auto& e : entries) {
            out << e.identifier.normalized() << '\t' << e.dims << '\t' << e.vocab_size << '\t'
                << e.pipeline_hash().substr(0, 12) << '\t' << e.source_file << '\n';
        }
    }
    return kOk;
}

std::vector<std::string> read_lines(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error("cannot read '" + path + "'");
    }
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(std::move(line));
    }
    return lines;
}

int cmd_vectors(const Config& config, const VectorsArgs& args, std::ostream& out)
{
    Connector connector(config.root, config.create);
    std::vector<InputUnit> inputs;
    if (!args.input.empty()) {
        for (auto& line : read_lines(args.input)) {
            if (args.raw) {
                inputs.emplace_back(std::move(line));
            } else {
                std::istringstream words(line);
                Tokens tokens{std::istream_iterator<std::string>(words), std::istream_iterator<std::string>()};
                inputs.emplace_back(std::move(tokens));
            }
        }
    }
    if (!args.words.empty()) {
        if (args.raw) {
            std::string joined;
            for (const auto& w : args.words) joined += (joined.empty() ? "" : " ") + w;
            inputs.emplace_back(joined);
        } else {
            inputs.emplace_back(Tokens(args.words));
        }
    }
    PreprocessCache cache;
    RetrievalOptions options{args.raw, args.in_order, !args.no_tuple, !args.no_phrases};
    auto result = connector.get_vectors(args.query, cache, inputs, options);
    if (config.format == "json") {
        out << to_json(result).dump() << '\n';
        return kOk;
    }
    for (const auto& wec : result.per_wec) {
        for (std::size_t u = 0; u < wec.units.size(); ++u) {
            const auto& unit = wec.units[u];
            for (std::size_t i = 0; i < unit.vectors.size(); ++i) {
                out << wec.identifier << '\t' << u << '\t' << (unit.words.empty() ? "" : unit.words[i]) << '\t';
                for (std::size_t d = 0; d < unit.vectors[i].size(); ++d) {
                    out << (d ? " " : "") << unit.vectors[i][d];
                }
                out << '\n';
            }
            for (const auto& m : unit.missing) {
                out << wec.identifier << '\t' << u << '\t' << m << "\t<missing>\n";
            }
        }
    }
    return kOk;
}

int cmd_train_phrases(const Config& config, const TrainArgs& args, std::ostream& out)
{
    if (args.out.empty() && args.attach.empty()) {
        throw Error("train-phrases needs --out and/or --attach");
    }
    std::optional<Connector> connector;
    std::optional<WecIdentifier> attach;
    PipelineDescriptor pipeline({TokenizeStage{"default"}, CaseFoldStage{args.fold}});
    if (!args.attach.empty()) {
        connector.emplace(config.root, config.create);
        attach = parse_identifier(args.attach);
        auto entry = connector->catalog().lookup(*attach);
        if (!entry) {
            throw CatalogError("WEC '" + attach->normalized() + "' is not in the catalog");
        }
        pipeline = entry->pipeline.with_phrases({});
    }
    if (!fs::is_regular_file(args.corpus)) {
        throw Error("cannot read '" + args.corpus + "'");
    }
    PreprocessCache cache;
    auto source = [&](const std::function<void(const Tokens&)>& visit) {
        std::ifstream in(args.corpus, std::ios::binary);
        std::string line;
        while (std::getline(in, line)) {
            visit(run_pipeline(pipeline, line, &cache));
        }
    };
    auto model = train_phrase_model(source, PhraseParams{args.delta, args.threshold, args.passes});
    if (!args.out.empty()) {
        model.save(args.out);
    }
    if (attach) {
        connector->catalog().attach_phrase_model(*attach, model);
    }
    std::size_t bigrams = 0;
    for (const auto& layer : model.layers()) bigrams += layer.bigram_counts.size();
    if (config.format == "json") {
        out << json{{"passes", model.passes()}, {"bigrams", bigrams}, {"content_hash", model.content_hash()}}.dump(2)
            << '\n';
    } else {
        out << "passes: " << model.passes() << "\nbigrams: " << bigrams << "\ncontent_hash: " << model.content_hash()
            << '\n';
    }
    return kOk;
}

int cmd_sts(const Config& config, const StsArgs& args, std::ostream& out)
{
    auto started = std::chrono::steady_clock::now();
    Connector connector(config.root, config.create);
    auto metric = metric_by_name(args.metric);
    auto stopwords = stopword_option(args.stopwords);

    std::vector<InputUnit> first;
    std::vector<InputUnit> second;
    std::ifstream in(args.tsv, std::ios::binary);
    if (!in) {
        throw Error("cannot read '" + args.tsv + "'");
    }
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        auto tab = line.find('\t');
        if (tab == std::string::npos || line.find('\t', tab + 1) != std::string::npos) {
            throw Error(args.tsv + ":" + std::to_string(line_no) + ": expected exactly two tab-separated sentences");
        }
        first.emplace_back(line.substr(0, tab));
        second.emplace_back(line.substr(tab + 1));
    }
    if (first.empty()) {
        throw Error(args.tsv + ": empty input");
    }

    PreprocessCache cache;
    RetrievalOptions options;
    options.raw = true;
    auto vecs1 = connector.get_vectors(args.query, cache, first, options);
    auto vecs2 = connector.get_vectors(args.query, cache, second, options);
    auto ranking = pairwise_distances(vecs1, vecs2, metric, args.reverse, stopwords);

    fs::create_directories(args.out_dir);
    json summary = {{"metric", args.metric},
                    {"reverse", args.reverse},
                    {"pairs", first.size()},
                    {"stopwords", {{"id", stopwords.id()}, {"content_hash", stopwords.content_hash()}}},
                    {"cache", {{"hits", cache.hits()}, {"misses", cache.misses()}}}};
    json wecs = json::array();
    for (const auto& wec : ranking.per_wec) {
        auto id = parse_identifier(wec.identifier);
        auto path = fs::path(args.out_dir) / (id.directory_name() + ".tsv");
        std::ofstream file(path, std::ios::binary | std::ios::trunc);
        write_ranking(wec, file);
        file.flush();
        if (!file) {
            throw Error("cannot write '" + path.string() + "'");
        }
        wecs.push_back({{"identifier", wec.identifier},
                        {"file", path.filename().string()},
                        {"ranked", wec.ranked.size()},
                        {"undefined_pairs", wec.undefined_pairs}});
    }
    summary["wecs"] = wecs;
    std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - started;
    summary["elapsed_seconds"] = elapsed.count();
    {
        std::ofstream file(fs::path(args.out_dir) / "sts-summary.json", std::ios::binary | std::ios::trunc);
        file << summary.dump(2) << '\n';
    }
    if (config.format == "json") {
        out << summary.dump(2) << '\n';
    } else {
        for (const auto& w : wecs) {
            out << w["identifier"].get<std::string>() << '\t' << w["ranked"].get<std::size_t>() << " ranked\t"
                << w["undefined_pairs"].size() << " undefined\t" << w["file"].get<std::string>() << '\n';
        }
        out << "cache: " << cache.hits() << " hits, " << cache.misses() << " misses\n"
            << "elapsed: " << format_ratio(elapsed.count()) << " s\n";
    }
    return kOk;
}

int cmd_heatmap(const Config& config, const HeatmapArgs& args, std::ostream& out)
{
    Connector connector(config.root, config.create);
    auto metric = metric_by_name(args.metric);
    PreprocessCache cache;
    RetrievalOptions options;
    options.raw = true;
    options.in_order = true;
    options.phrases = !args.no_phrases;
    auto result = connector.get_vectors(args.query, cache, {args.sentence1, args.sentence2}, options);
    fs::create_directories(args.out_dir);
    for (const auto& wec : result.per_wec) {
        auto matrix = similarity_matrix(wec.units[0], wec.units[1], metric);
        auto base = fs::path(args.out_dir) / parse_identifier(wec.identifier).directory_name();
        std::vector<std::pair<HeatmapFormat, std::string>> formats;
        if (args.format == "csv" || args.format == "both") formats.emplace_back(HeatmapFormat::Csv, ".csv");
        if (args.format == "svg" || args.format == "both") formats.emplace_back(HeatmapFormat::Svg, ".svg");
        for (const auto& [format, extension] : formats) {
            auto path = base;
            path += extension;
            export_heatmap(matrix, path, format);
            out << wec.identifier << '\t' << matrix.rows() << 'x' << matrix.cols() << '\t' << path.string() << '\n';
        }
    }
    return kOk;
}

int cmd_remove(const Config& config, const std::string& identifier, bool force, std::ostream& out)
{
    Catalog catalog(config.root, config.create);
    auto id = parse_identifier(identifier);
    catalog.remove(id, force);
    out << "removed " << id.normalized() << '\n';
    return kOk;
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"wombat: word embedding collection store and retrieval"};
    app.require_subcommand(1);
    Config config;
    app.add_option("--root", config.root, "Catalog root directory")->envname("WOMBAT_ROOT");
    app.add_flag("--create", config.create, "Create the catalog root if missing");
    app.add_option("--format", config.format, "Output format")->check(CLI::IsMember({"text", "json"}));

    ImportArgs import_args;
    auto* import_cmd = app.add_subcommand("import", "Import a plain-text WEC file");
    import_cmd->add_option("file", import_args.file, "Embedding text file")->required();
    import_cmd->add_option("identifier", import_args.identifier, "key:value;... identifier")->required();
    import_cmd->add_option("--on-duplicate", import_args.on_duplicate)->check(CLI::IsMember({"reject", "keep-first"}));
    import_cmd->add_option("--header", import_args.header)->check(CLI::IsMember({"auto", "yes", "no"}));
    import_cmd->add_flag("--lenient", import_args.lenient, "Skip and report malformed lines");
    import_cmd->add_option("--tokenizer", import_args.tokenizer)->check(CLI::IsMember({"default", "whitespace"}));
    import_cmd->add_flag("--strip-special", import_args.strip_special, "Drop punctuation-only tokens");
    import_cmd->add_option("--stopwords", import_args.stopwords, "Stopword stage: 'english' or a list file");
    import_cmd->add_option("--external", import_args.external, "External tokenizer command (line in, tokens out)");
    import_cmd->add_option("--phrases", import_args.phrases, "off | vocab | vocab:N | model:FILE");

    std::string list_filter;
    auto* list_cmd = app.add_subcommand("list", "List catalogued WECs");
    list_cmd->add_option("filter", list_filter, "Partial key:value;... filter");

    VectorsArgs vectors_args;
    auto* vectors_cmd = app.add_subcommand("vectors", "Retrieve vectors");
    vectors_cmd->add_option("query", vectors_args.query, "WEC query")->required();
    vectors_cmd->add_option("words", vectors_args.words, "Words forming one input unit");
    vectors_cmd->add_option("--input", vectors_args.input, "File with one input unit per line");
    vectors_cmd->add_flag("--raw", vectors_args.raw, "Input is raw text");
    vectors_cmd->add_flag("--in-order", vectors_args.in_order, "Keep token order and repetitions");
    vectors_cmd->add_flag("--no-tuple", vectors_args.no_tuple, "Return vectors without words");
    vectors_cmd->add_flag("--no-phrases", vectors_args.no_phrases, "Disable phrase joining");

    TrainArgs train_args;
    auto* train_cmd = app.add_subcommand("train-phrases", "Train a bigram phrase model");
    train_cmd->add_option("corpus", train_args.corpus, "Raw corpus, one sentence per line")->required();
    train_cmd->add_option("--delta", train_args.delta)->check(CLI::NonNegativeNumber);
    train_cmd->add_option("--threshold", train_args.threshold)->check(CLI::NonNegativeNumber);
    train_cmd->add_option("--passes", train_args.passes)->check(CLI::PositiveNumber);
    train_cmd->add_option("--out", train_args.out, "Write the model to this file");
    train_cmd->add_option("--attach", train_args.attach, "Bind the model to this WEC");
    train_cmd->add_flag("--fold", train_args.fold, "Case-fold the corpus (without --attach)");

    StsArgs sts_args;
    auto* sts_cmd = app.add_subcommand("sts", "Rank sentence pairs by averaged-vector distance");
    sts_cmd->add_option("query", sts_args.query, "WEC query")->required();
    sts_cmd->add_option("tsv", sts_args.tsv, "Two tab-separated sentences per line")->required();
    sts_cmd->add_option("--metric", sts_args.metric)->check(CLI::IsMember({"cosine", "cosine_similarity", "euclidean"}));
    sts_cmd->add_flag("--reverse", sts_args.reverse, "Sort descending (for similarities)");
    sts_cmd->add_option("--stopwords", sts_args.stopwords, "'english', 'none' or a list file");
    sts_cmd->add_option("--out-dir", sts_args.out_dir, "Directory for ranking files");

    HeatmapArgs heatmap_args;
    auto* heatmap_cmd = app.add_subcommand("heatmap", "Word-level similarity heatmap of two sentences");
    heatmap_cmd->add_option("query", heatmap_args.query, "WEC query")->required();
    heatmap_cmd->add_option("sentence1", heatmap_args.sentence1)->required();
    heatmap_cmd->add_option("sentence2", heatmap_args.sentence2)->required();
    heatmap_cmd->add_option("--format", heatmap_args.format)->check(CLI::IsMember({"csv", "svg", "both"}));
    heatmap_cmd->add_option("--metric", heatmap_args.metric)->check(CLI::IsMember({"cosine", "cosine_similarity", "euclidean"}));
    heatmap_cmd->add_option("--out-dir", heatmap_args.out_dir);
    heatmap_cmd->add_flag("--no-phrases", heatmap_args.no_phrases, "Disable phrase joining");

    std::string remove_id;
    bool remove_force = false;
    auto* remove_cmd = app.add_subcommand("remove", "Delete a WEC (requires --force)");
    remove_cmd->add_option("identifier", remove_id)->required();
    remove_cmd->add_flag("--force", remove_force);

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err) == 0 ? kOk : kUsage;
    }
    if (config.root.empty()) {
        err << "error: no catalog root (use --root or set WOMBAT_ROOT)\n";
        return kUsage;
    }

    try {
        if (*import_cmd) return cmd_import(config, import_args, out);
        if (*list_cmd) return cmd_list(config, list_filter, out);
        if (*vectors_cmd) return cmd_vectors(config, vectors_args, out);
        if (*train_cmd) return cmd_train_phrases(config, train_args, out);
        if (*sts_cmd) return cmd_sts(config, sts_args, out);
        if (*heatmap_cmd) return cmd_heatmap(config, heatmap_args, out);
        if (*remove_cmd) return cmd_remove(config, remove_id, remove_force, out);
    } catch (const GrammarError& e) {
        err << "error: " << e.what() << '\n';
        return kGrammar;
    } catch (const CatalogError& e) {
        err << "error: " << e.what() << '\n';
        return kCatalog;
    } catch (const StoreError& e) {
        err << "error: " << e.what() << '\n';
        return kStore;
    } catch (const PipelineError& e) {
        err << "error: " << e.what() << '\n';
        return kPipeline;
    } catch (const AnalysisError& e) {
        err << "error: " << e.what() << '\n';
        return kAnalysis;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kFailure;
    }
    return kFailure;
}

} // namespace wombat::cli
