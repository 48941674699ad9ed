// comet: just-in-time comment updating from code edits.
//
// Subcommands: train, predict, eval, inspect. Corpora are JSONL files with
// {id, old_code, new_code, old_comment, new_comment} objects per line.

#include <iostream>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "comet/json_io.hpp"
#include "comet/pipeline.hpp"

namespace {

std::map<std::string, std::string> parse_field_map(
    const std::vector<std::string>& entries) {
    std::map<std::string, std::string> map;
    for (const std::string& e : entries) {
        auto eq = e.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("--field-map expects internal=external: " + e);
        map[e.substr(0, eq)] = e.substr(eq + 1);
    }
    return map;
}

comet::Model load_model(const std::string& path) {
    return comet::Model::from_json(comet::read_text_file(path));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"just-in-time comment updater"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path;
    unsigned long long seed_override = 0;
    bool seed_set = false;
    bool dump_masks = false;
    app.add_option("--config", config_path, "JSON config file");
    app.add_option("--seed", seed_override, "override the config seed")
        ->each([&](const std::string&) { seed_set = true; });
    app.add_flag("--dump-masks", dump_masks,
                 "include mask matrices in inspect output");

    // train
    auto* train = app.add_subcommand("train", "train a model");
    std::string train_corpus, valid_corpus, model_out = "model.json";
    std::vector<std::string> field_map_entries;
    train->add_option("--corpus", train_corpus, "training JSONL")->required();
    train->add_option("--valid", valid_corpus, "validation JSONL");
    train->add_option("--out", model_out, "checkpoint output path");
    train->add_option("--field-map", field_map_entries,
                      "rename corpus fields, internal=external");

    // predict
    auto* predict = app.add_subcommand("predict", "update comments");
    std::string model_path, input_path;
    predict->add_option("--model", model_path, "checkpoint")->required();
    predict->add_option("--input", input_path, "JSONL samples")->required();
    predict->add_option("--field-map", field_map_entries,
                        "rename corpus fields, internal=external");

    // eval
    auto* eval = app.add_subcommand("eval", "evaluate on a corpus");
    std::string eval_out;
    eval->add_option("--model", model_path, "checkpoint")->required();
    eval->add_option("--corpus", input_path, "JSONL corpus")->required();
    eval->add_option("--out", eval_out, "write the JSON report here too");
    eval->add_option("--field-map", field_map_entries,
                     "rename corpus fields, internal=external");

    // inspect
    auto* inspect = app.add_subcommand(
        "inspect", "dump edit scripts, change graph, flow edges and masks");
    inspect->add_option("--input", input_path, "JSONL samples")->required();
    inspect->add_option("--field-map", field_map_entries,
                        "rename corpus fields, internal=external");

    CLI11_PARSE(app, argc, argv);

    try {
        comet::ModelConfig config;
        if (!config_path.empty())
            config = comet::load_config_file(config_path);
        if (seed_set) config.seed = seed_override;
        auto field_map = parse_field_map(field_map_entries);

        if (train->parsed()) {
            auto corpus =
                comet::load_corpus(train_corpus, comet::CorpusMode::Train,
                                   field_map);
            for (const auto& w : corpus.warnings) std::cerr << w << "\n";
            if (corpus.skipped)
                std::cerr << "skipped " << corpus.skipped << " corpus lines\n";
            std::vector<comet::Sample> valid;
            if (!valid_corpus.empty()) {
                auto vc = comet::load_corpus(
                    valid_corpus, comet::CorpusMode::Train, field_map);
                valid = std::move(vc.samples);
            }
            std::unique_ptr<comet::Model> model;
            auto artifacts =
                comet::run_train(config, corpus.samples, valid, model);
            comet::write_text_file(model_out, model->to_json());
            comet::write_text_file(model_out + ".losslog.json",
                                   comet::epoch_log_to_json(artifacts.log));
            std::cerr << "trained on " << artifacts.used_samples
                      << " samples (" << artifacts.rejected_samples
                      << " rejected); checkpoint written to " << model_out
                      << "\n";
            for (const auto& e : artifacts.log)
                std::cerr << "epoch " << e.epoch << " loss " << e.train_loss
                          << " valid-ppl " << e.valid_perplexity << "\n";
        } else if (predict->parsed()) {
            comet::Model model = load_model(model_path);
            auto corpus = comet::load_corpus(
                input_path, comet::CorpusMode::Predict, field_map);
            for (const comet::Sample& s : corpus.samples) {
                auto p = comet::predict_sample(model, s, model.config());
                std::cout << comet::prediction_to_json(p) << "\n";
            }
        } else if (eval->parsed()) {
            comet::Model model = load_model(model_path);
            auto corpus = comet::load_corpus(
                input_path, comet::CorpusMode::Train, field_map);
            auto report =
                comet::run_eval(model, corpus.samples, model.config());
            std::string json = comet::eval_report_to_json(report);
            std::cout << json << "\n";
            if (!eval_out.empty()) comet::write_text_file(eval_out, json);
        } else if (inspect->parsed()) {
            auto corpus = comet::load_corpus(
                input_path, comet::CorpusMode::Predict, field_map);
            for (const comet::Sample& s : corpus.samples) {
                bool with_target = !s.new_comment.empty();
                auto pre = comet::preprocess(s, config, with_target);
                std::cout << comet::inspect_to_json(pre, dump_masks) << "\n";
            }
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
