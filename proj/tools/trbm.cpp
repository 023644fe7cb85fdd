// Command-line front end: experiment sweeps, single-model training,
// reconstruction scoring, filter export, model inspection, and the
// Caltech silhouettes converter.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "trbm/sweep.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitInternal = 4;

// Every ExperimentConfig field is reachable as a --flag mirroring its
// config-file key; flags override the file.
struct ConfigCli {
    std::string config_path;
    std::string preset;
    std::vector<std::pair<std::string, std::string>> overrides;

    void attach(CLI::App* app) {
        app->add_option("--config", config_path, "flat key=value config file");
        app->add_option("--preset", preset, "preset name (semeion-small, mnist-small, caltech-small, paper-full)");
        static const char* keys[] = {
            "dataset", "semeion_path", "mnist_train_images", "mnist_train_labels",
            "mnist_test_images", "mnist_test_labels", "caltech_path", "mnist_train_fraction",
            "mnist_binarize_threshold", "semeion_train_fraction", "split_seed", "architecture",
            "temperatures", "algorithms", "kinds", "eta", "lambda", "alpha", "k", "epochs",
            "batch_size", "bias_tempered", "decay_scaled_by_eta", "seed", "weight_sigma",
            "propagate_samples", "tempering", "mean_field_iterations", "binarize_reconstruction",
            "runs", "workers", "filter_tiles", "output_dir"};
        for (const char* key : keys) {
            std::string flag = "--" + std::string(key);
            for (char& c : flag) {
                if (c == '_') c = '-';
            }
            app->add_option_function<std::string>(
                flag,
                [this, key](const std::string& value) { overrides.emplace_back(key, value); },
                std::string("config key ") + key);
        }
    }

    trbm::ExperimentConfig resolve() const {
        trbm::ExperimentConfig cfg;
        if (!preset.empty()) cfg = trbm::preset_config(preset);
        if (!config_path.empty()) {
            trbm::ExperimentConfig from_file = trbm::load_config_file(config_path);
            if (!preset.empty()) {
                throw trbm::ConfigError("give either --preset or --config, not both");
            }
            cfg = std::move(from_file);
        }
        for (const auto& [key, value] : overrides) trbm::apply_config_line(cfg, key, value);
        return cfg;
    }
};

int cmd_sweep(const ConfigCli& cli) {
    trbm::ExperimentConfig cfg = cli.resolve();
    trbm::BinaryDataset dataset = trbm::load_dataset(cfg.dataset);
    trbm::SweepOutcome outcome = trbm::run_sweep(cfg, dataset, &std::cout);
    std::cout << "results: " << outcome.results_csv.string() << '\n'
              << "table:   " << outcome.table_txt.string() << '\n';
    return 0;
}

int cmd_train(const ConfigCli& cli, const std::string& out_path) {
    trbm::ExperimentConfig cfg = cli.resolve();
    trbm::BinaryDataset dataset = trbm::load_dataset(cfg.dataset);
    cfg.validate(dataset.pixel_count());

    trbm::StackConfig sc;
    sc.train = cfg.train;
    sc.train.temperature = cfg.temperatures.front();
    sc.train.algorithm = cfg.algorithms.front();
    sc.propagate_samples = cfg.propagate_samples;
    sc.tempering = cfg.tempering;
    sc.mean_field_iterations = cfg.mean_field_iterations;

    trbm::StackedModel model = trbm::train_stack(
        dataset.train, cfg.architecture, sc, cfg.kinds.front(),
        [](std::size_t layer, const trbm::EpochMetrics& em) {
            std::cout << "layer " << layer << " epoch " << em.epoch << " train_mse "
                      << em.train_mse << '\n';
        });
    trbm::save_stack_file(model, out_path);

    trbm::EvalOptions eo;
    eo.binarize_reconstruction = cfg.binarize_reconstruction;
    eo.mean_field_iterations = cfg.mean_field_iterations;
    std::cout << "test mse: " << trbm::dataset_mse(model, dataset.test, eo) << '\n'
              << "model saved: " << out_path << '\n';
    return 0;
}

int cmd_reconstruct(const ConfigCli& cli, const std::string& model_path, long item) {
    trbm::ExperimentConfig cfg = cli.resolve();
    trbm::BinaryDataset dataset = trbm::load_dataset(cfg.dataset);
    trbm::StackedModel model = trbm::load_stack_file(model_path);

    if (item >= 0) {
        if (static_cast<std::size_t>(item) >= dataset.test.size()) {
            throw trbm::DataFormatError("test item index out of range");
        }
        const trbm::BitVector& v = dataset.test[static_cast<std::size_t>(item)];
        trbm::RealVector r = trbm::reconstruct(model, v, cfg.mean_field_iterations);
        std::cout << "item " << item << " mse: " << trbm::mse(v, r) << '\n';
        return 0;
    }
    trbm::EvalOptions eo;
    eo.binarize_reconstruction = cfg.binarize_reconstruction;
    eo.mean_field_iterations = cfg.mean_field_iterations;
    std::cout << "test mse: " << trbm::dataset_mse(model, dataset.test, eo) << '\n';
    return 0;
}

int cmd_export_filters(const std::string& model_path, std::size_t layer, std::size_t tiles,
                       std::size_t width, std::size_t height, std::uint64_t seed,
                       const std::string& out_path) {
    trbm::StackedModel model = trbm::load_stack_file(model_path);
    trbm::RngState rng(seed);
    trbm::export_filters(model, layer, tiles, width, height, rng, out_path);
    const trbm::FilterGeometry g = trbm::filter_geometry(tiles, width, height);
    std::cout << "wrote " << out_path << " (" << g.image_width << "x" << g.image_height << ")\n";
    return 0;
}

// One item per text row: split flag (0 train / 1 test), class label,
// then 784 binary pixels.  A scipy one-liner produces this from the
// official .mat distribution; see README.
int cmd_convert_caltech(const std::string& in_path, const std::string& out_path) {
    std::ifstream in(in_path);
    if (!in) throw trbm::DataFormatError("cannot open: " + in_path);
    std::vector<trbm::CaltechItem> items;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
        std::istringstream row(line);
        long split, label;
        if (!(row >> split >> label) || (split != 0 && split != 1) || label < 0) {
            throw trbm::DataFormatError(in_path + ": line " + std::to_string(line_no) +
                                        ": expected '<split> <label> <784 pixels>'");
        }
        trbm::CaltechItem item;
        item.is_test = split == 1;
        item.label = static_cast<std::uint16_t>(label);
        item.pixels.resize(784);
        for (std::size_t p = 0; p < 784; ++p) {
            long bit;
            if (!(row >> bit) || (bit != 0 && bit != 1)) {
                throw trbm::DataFormatError(in_path + ": line " + std::to_string(line_no) +
                                            ": bad pixel column " + std::to_string(p));
            }
            item.pixels[p] = static_cast<std::uint8_t>(bit);
        }
        items.push_back(std::move(item));
    }
    if (items.empty()) throw trbm::DataFormatError(in_path + ": no items");
    trbm::write_caltech_container(items, out_path);
    std::cout << "wrote " << out_path << " (" << items.size() << " items)\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"temperature-parameterized RBM/DBN/DBM experiment harness"};
    app.require_subcommand(1);

    ConfigCli sweep_cli;
    CLI::App* sweep = app.add_subcommand("sweep", "run the full experiment grid");
    sweep_cli.attach(sweep);

    ConfigCli train_cli;
    std::string train_out = "model.tdbm";
    CLI::App* train = app.add_subcommand("train", "train a single stacked model");
    train_cli.attach(train);
    train->add_option("--out", train_out, "output model path");

    ConfigCli rec_cli;
    std::string rec_model;
    long rec_item = -1;
    CLI::App* rec = app.add_subcommand("reconstruct", "score reconstructions of the test set");
    rec_cli.attach(rec);
    rec->add_option("--model", rec_model, "serialized stack")->required();
    rec->add_option("--item", rec_item, "single test item index (default: whole test set)");

    std::string ef_model, ef_out = "filters.pgm";
    std::size_t ef_layer = 0, ef_tiles = 225, ef_width = 0, ef_height = 0;
    std::uint64_t ef_seed = 0;
    CLI::App* ef = app.add_subcommand("export-filters", "render hidden-unit weight filters as PGM");
    ef->add_option("--model", ef_model, "serialized stack")->required();
    ef->add_option("--layer", ef_layer, "layer index");
    ef->add_option("--tiles", ef_tiles, "number of hidden units to render");
    ef->add_option("--width", ef_width, "tile width in pixels")->required();
    ef->add_option("--height", ef_height, "tile height in pixels")->required();
    ef->add_option("--seed", ef_seed, "unit selection seed");
    ef->add_option("--out", ef_out, "output PGM path");

    std::string ins_model;
    CLI::App* ins = app.add_subcommand("inspect", "summarize a serialized model");
    ins->add_option("--model", ins_model, "model file")->required();

    std::string cc_in, cc_out;
    CLI::App* cc = app.add_subcommand("convert-caltech",
                                      "convert silhouettes text export to the CSIL1 container");
    cc->add_option("--in", cc_in, "text export path")->required();
    cc->add_option("--out", cc_out, "CSIL1 output path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitConfig;
    }

    try {
        if (sweep->parsed()) return cmd_sweep(sweep_cli);
        if (train->parsed()) return cmd_train(train_cli, train_out);
        if (rec->parsed()) return cmd_reconstruct(rec_cli, rec_model, rec_item);
        if (ef->parsed())
            return cmd_export_filters(ef_model, ef_layer, ef_tiles, ef_width, ef_height, ef_seed,
                                      ef_out);
        if (ins->parsed()) {
            std::cout << trbm::inspect_model(ins_model);
            return 0;
        }
        if (cc->parsed()) return cmd_convert_caltech(cc_in, cc_out);
    } catch (const trbm::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const trbm::DataFormatError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInternal;
    }
    return 0;
}
