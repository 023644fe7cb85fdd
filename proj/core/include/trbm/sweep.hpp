#pragma once

#include <filesystem>

#include "trbm/datasets.hpp"
#include "trbm/eval.hpp"

namespace trbm {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct DatasetSpec {
    std::string name;  // semeion | mnist | caltech
    std::string semeion_path;
    std::string mnist_train_images, mnist_train_labels;
    std::string mnist_test_images, mnist_test_labels;
    std::string caltech_path;
    double mnist_train_fraction = 0.02;
    double mnist_binarize_threshold = 127.5;
    double semeion_train_fraction = 0.7;
    std::uint64_t split_seed = 42;
};

struct ExperimentConfig {
    DatasetSpec dataset;
    std::vector<std::size_t> architecture;  // input size first
    std::vector<double> temperatures;
    std::vector<Algorithm> algorithms;
    std::vector<StackKind> kinds;
    TrainConfig train;
    bool propagate_samples = false;
    TemperingMode tempering = TemperingMode::Literal;
    std::size_t mean_field_iterations = 0;
    bool binarize_reconstruction = false;
    std::size_t runs = 20;
    std::size_t workers = 1;
    std::size_t filter_tiles = 225;
    std::filesystem::path output_dir = "out";

    void validate(std::size_t dataset_pixels) const;
};

// Flat key = value text, comma-separated lists, '#' comments.  Unknown
// keys are an error.
ExperimentConfig parse_config_text(std::istream& in);
ExperimentConfig load_config_file(const std::string& path);
void apply_config_line(ExperimentConfig& cfg, const std::string& key, const std::string& value);

// Shipped presets: semeion-small, mnist-small, caltech-small, paper-full.
ExperimentConfig preset_config(const std::string& name);
std::vector<std::string> preset_names();

BinaryDataset load_dataset(const DatasetSpec& spec);

// Stable per-cell seed: hash of (master seed, kind, algorithm,
// temperature index, run index), so sweeps resume order-independently.
std::uint64_t cell_seed(std::uint64_t master, StackKind kind, Algorithm alg,
                        std::size_t temp_index, std::size_t run_index);

std::string cell_id(StackKind kind, Algorithm alg, double temperature, std::size_t run_index);

struct SweepOutcome {
    std::vector<RunResult> results;
    std::filesystem::path results_csv;
    std::filesystem::path table_txt;
};

// Full experiment grid.  Completed cells are skipped via the on-disk
// manifest, so an interrupted sweep resumes to an identical results
// file.
SweepOutcome run_sweep(const ExperimentConfig& cfg, const BinaryDataset& dataset,
                       std::ostream* log = nullptr);

// Renders tile_count randomly chosen hidden units of the given layer as
// min-max normalized width x height tiles in a near-square grid with
// 1-pixel separators; writes binary PGM (P5).
void export_filters(const StackedModel& model, std::size_t layer, std::size_t tile_count,
                    std::size_t tile_width, std::size_t tile_height, RngState& rng,
                    const std::string& out_path);

// PGM geometry for a given tile layout.
struct FilterGeometry {
    std::size_t grid_cols = 0;
    std::size_t grid_rows = 0;
    std::size_t image_width = 0;
    std::size_t image_height = 0;
};
FilterGeometry filter_geometry(std::size_t tile_count, std::size_t tile_width,
                               std::size_t tile_height);

// Text summary of a serialized TRBM1/TDBM1 container.
std::string inspect_model(const std::string& model_path);

}  // namespace trbm
