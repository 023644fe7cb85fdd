#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "trbm/numerics.hpp"

namespace trbm {

// Thrown for malformed or truncated dataset files.
class DataFormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Grayscale values kept as doubles in [0,255] so a 2x2-block mean stays
// exact.
struct GrayImage {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<double> pixels;  // row-major
};

// Named collection of binary pixel vectors with image geometry and a
// train/test split.
struct BinaryDataset {
    std::string name;
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<BitVector> train;
    std::vector<BitVector> test;
    std::vector<std::uint16_t> train_labels;  // empty when unlabeled
    std::vector<std::uint16_t> test_labels;

    std::size_t pixel_count() const { return width * height; }
    void validate() const;
};

struct IdxImages {
    std::vector<GrayImage> images;
    std::vector<std::uint16_t> labels;
};

// MNIST-style IDX pair: big-endian magic 0x803 for images, 0x801 for
// labels, counts must agree.
IdxImages load_idx(const std::string& images_path, const std::string& labels_path);

// Each output pixel is the rounded mean of its 2x2 input block.
GrayImage downsample_2x(const GrayImage& image);

// pixel > threshold => 1.
BitVector binarize(const GrayImage& image, double threshold);

// Uniform sample of the training set without replacement; labels follow.
BinaryDataset subsample_train(const BinaryDataset& dataset, double fraction, RngState& rng);

struct SemeionOptions {
    double train_fraction = 0.7;  // no official split exists
    std::uint64_t split_seed = 42;
};

// Whitespace-separated text, 256 binary pixels + 10 one-hot label
// columns per row, 16x16 geometry.
BinaryDataset load_semeion(const std::string& path, const SemeionOptions& opts = {});

// Converted silhouettes container "CSIL1": counts as 64-bit LE, one
// byte per pixel, 16-bit labels, one split flag byte per item.
BinaryDataset load_caltech_silhouettes(const std::string& path);

struct CaltechItem {
    BitVector pixels;  // 28x28
    std::uint16_t label = 0;
    bool is_test = false;
};

void write_caltech_container(const std::vector<CaltechItem>& items, const std::string& path);

struct MnistOptions {
    double train_fraction = 0.02;  // 60000 * 0.02 = 1200 images
    double binarize_threshold = 127.5;
    std::uint64_t subsample_seed = 7;
};

// Full pipeline: IDX load, 2x downsample to 14x14, binarize, subsample
// the training set.
BinaryDataset load_mnist(const std::string& train_images, const std::string& train_labels,
                         const std::string& test_images, const std::string& test_labels,
                         const MnistOptions& opts = {});

}  // namespace trbm
