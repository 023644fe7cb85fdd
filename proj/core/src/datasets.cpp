#include "trbm/datasets.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <sstream>

#include "binary_io.hpp"

namespace trbm {

void BinaryDataset::validate() const {
    const std::size_t want = pixel_count();
    for (const BitVector& v : train) {
        if (v.size() != want) throw DataFormatError(name + ": train vector length mismatch");
    }
    for (const BitVector& v : test) {
        if (v.size() != want) throw DataFormatError(name + ": test vector length mismatch");
    }
    if (!train_labels.empty() && train_labels.size() != train.size())
        throw DataFormatError(name + ": train label count mismatch");
    if (!test_labels.empty() && test_labels.size() != test.size())
        throw DataFormatError(name + ": test label count mismatch");
}

namespace {

std::uint32_t read_u32_be(std::istream& in, const std::string& what) {
    unsigned char buf[4];
    in.read(reinterpret_cast<char*>(buf), 4);
    if (!in) throw DataFormatError(what + ": truncated file");
    return (std::uint32_t(buf[0]) << 24) | (std::uint32_t(buf[1]) << 16) |
           (std::uint32_t(buf[2]) << 8) | std::uint32_t(buf[3]);
}

}  // namespace

IdxImages load_idx(const std::string& images_path, const std::string& labels_path) {
    std::ifstream img(images_path, std::ios::binary);
    if (!img) throw DataFormatError("cannot open: " + images_path);
    if (read_u32_be(img, images_path) != 0x00000803u)
        throw DataFormatError(images_path + ": bad IDX image magic");
    const std::uint32_t count = read_u32_be(img, images_path);
    const std::uint32_t rows = read_u32_be(img, images_path);
    const std::uint32_t cols = read_u32_be(img, images_path);

    std::ifstream lab(labels_path, std::ios::binary);
    if (!lab) throw DataFormatError("cannot open: " + labels_path);
    if (read_u32_be(lab, labels_path) != 0x00000801u)
        throw DataFormatError(labels_path + ": bad IDX label magic");
    const std::uint32_t label_count = read_u32_be(lab, labels_path);
    if (label_count != count)
        throw DataFormatError("IDX image/label counts differ: " + std::to_string(count) +
                              " vs " + std::to_string(label_count));

    IdxImages out;
    out.images.reserve(count);
    out.labels.reserve(count);
    std::vector<unsigned char> buf(std::size_t(rows) * cols);
    for (std::uint32_t i = 0; i < count; ++i) {
        img.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
        if (!img) throw DataFormatError(images_path + ": truncated file");
        GrayImage g{cols, rows, {}};
        g.pixels.assign(buf.begin(), buf.end());
        out.images.push_back(std::move(g));
        const int l = lab.get();
        if (l < 0) throw DataFormatError(labels_path + ": truncated file");
        out.labels.push_back(static_cast<std::uint16_t>(l));
    }
    return out;
}

GrayImage downsample_2x(const GrayImage& image) {
    if (image.width % 2 != 0 || image.height % 2 != 0)
        throw std::invalid_argument("downsample_2x: dimensions must be even");
    GrayImage out{image.width / 2, image.height / 2, {}};
    out.pixels.resize(out.width * out.height);
    for (std::size_t y = 0; y < out.height; ++y) {
        for (std::size_t x = 0; x < out.width; ++x) {
            const std::size_t sy = 2 * y, sx = 2 * x;
            const double sum = image.pixels[sy * image.width + sx] +
                               image.pixels[sy * image.width + sx + 1] +
                               image.pixels[(sy + 1) * image.width + sx] +
                               image.pixels[(sy + 1) * image.width + sx + 1];
            out.pixels[y * out.width + x] = sum / 4.0;
        }
    }
    return out;
}

BitVector binarize(const GrayImage& image, double threshold) {
    BitVector out(image.pixels.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = image.pixels[i] > threshold ? 1 : 0;
    }
    return out;
}

BinaryDataset subsample_train(const BinaryDataset& dataset, double fraction, RngState& rng) {
    if (!(fraction > 0.0 && fraction <= 1.0))
        throw std::invalid_argument("subsample_train: fraction must lie in (0,1]");
    BinaryDataset out = dataset;
    if (fraction == 1.0) return out;
    const std::size_t keep =
        static_cast<std::size_t>(fraction * static_cast<double>(dataset.train.size()) + 0.5);
    std::vector<std::size_t> order = shuffled_indices(dataset.train.size(), rng);
    order.resize(keep);
    std::sort(order.begin(), order.end());
    out.train.clear();
    out.train_labels.clear();
    for (std::size_t idx : order) {
        out.train.push_back(dataset.train[idx]);
        if (!dataset.train_labels.empty()) out.train_labels.push_back(dataset.train_labels[idx]);
    }
    return out;
}

BinaryDataset load_semeion(const std::string& path, const SemeionOptions& opts) {
    std::ifstream in(path);
    if (!in) throw DataFormatError("cannot open: " + path);

    std::vector<BitVector> items;
    std::vector<std::uint16_t> labels;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
        std::istringstream row(line);
        std::vector<double> vals;
        double x;
        while (row >> x) vals.push_back(x);
        if (vals.size() != 266) {
            throw DataFormatError(path + ": line " + std::to_string(line_no) + " has " +
                                  std::to_string(vals.size()) + " columns, expected 266");
        }
        BitVector bits(256);
        for (std::size_t i = 0; i < 256; ++i) {
            if (vals[i] != 0.0 && vals[i] != 1.0)
                throw DataFormatError(path + ": line " + std::to_string(line_no) +
                                      ": non-binary pixel value");
            bits[i] = vals[i] != 0.0 ? 1 : 0;
        }
        int label = -1;
        for (std::size_t c = 0; c < 10; ++c) {
            if (vals[256 + c] == 1.0) {
                if (label >= 0)
                    throw DataFormatError(path + ": line " + std::to_string(line_no) +
                                          ": label is not one-hot");
                label = static_cast<int>(c);
            }
        }
        if (label < 0)
            throw DataFormatError(path + ": line " + std::to_string(line_no) + ": missing label");
        items.push_back(std::move(bits));
        labels.push_back(static_cast<std::uint16_t>(label));
    }
    if (items.empty()) throw DataFormatError(path + ": no data rows");

    BinaryDataset ds;
    ds.name = "semeion";
    ds.width = 16;
    ds.height = 16;
    RngState rng(opts.split_seed);
    const std::vector<std::size_t> order = shuffled_indices(items.size(), rng);
    const std::size_t n_train =
        static_cast<std::size_t>(opts.train_fraction * static_cast<double>(items.size()) + 0.5);
    for (std::size_t t = 0; t < order.size(); ++t) {
        const std::size_t idx = order[t];
        if (t < n_train) {
            ds.train.push_back(items[idx]);
            ds.train_labels.push_back(labels[idx]);
        } else {
            ds.test.push_back(items[idx]);
            ds.test_labels.push_back(labels[idx]);
        }
    }
    ds.validate();
    return ds;
}

void write_caltech_container(const std::vector<CaltechItem>& items, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataFormatError("cannot open for write: " + path);
    out.write("CSIL1", 5);
    io::write_u64(out, items.size());
    io::write_u64(out, 28);
    io::write_u64(out, 28);
    for (const CaltechItem& item : items) {
        if (item.pixels.size() != 784)
            throw std::invalid_argument("caltech item must have 784 pixels");
        for (std::uint8_t b : item.pixels) out.put(static_cast<char>(b));
        out.put(static_cast<char>(item.label & 0xff));
        out.put(static_cast<char>((item.label >> 8) & 0xff));
        out.put(item.is_test ? 1 : 0);
    }
    if (!out) throw DataFormatError("failed writing: " + path);
}

BinaryDataset load_caltech_silhouettes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataFormatError("cannot open: " + path);
    char magic[5];
    in.read(magic, 5);
    if (!in || std::memcmp(magic, "CSIL1", 5) != 0)
        throw DataFormatError(path + ": not a CSIL1 container");
    const std::uint64_t count = io::read_u64(in);
    const std::uint64_t width = io::read_u64(in);
    const std::uint64_t height = io::read_u64(in);
    if (width != 28 || height != 28) throw DataFormatError(path + ": unexpected geometry");

    BinaryDataset ds;
    ds.name = "caltech101-silhouettes";
    ds.width = width;
    ds.height = height;
    std::vector<char> buf(width * height + 3);
    for (std::uint64_t i = 0; i < count; ++i) {
        in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
        if (!in) throw DataFormatError(path + ": truncated file");
        BitVector bits(width * height);
        for (std::size_t p = 0; p < bits.size(); ++p) {
            const unsigned char c = static_cast<unsigned char>(buf[p]);
            if (c > 1) throw DataFormatError(path + ": non-binary pixel");
            bits[p] = c;
        }
        const std::uint16_t label =
            static_cast<std::uint16_t>(static_cast<unsigned char>(buf[bits.size()]) |
                                       (static_cast<unsigned char>(buf[bits.size() + 1]) << 8));
        const unsigned char split = static_cast<unsigned char>(buf[bits.size() + 2]);
        if (split > 1) throw DataFormatError(path + ": bad split flag");
        if (split) {
            ds.test.push_back(std::move(bits));
            ds.test_labels.push_back(label);
        } else {
            ds.train.push_back(std::move(bits));
            ds.train_labels.push_back(label);
        }
    }
    ds.validate();
    return ds;
}

BinaryDataset load_mnist(const std::string& train_images, const std::string& train_labels,
                         const std::string& test_images, const std::string& test_labels,
                         const MnistOptions& opts) {
    BinaryDataset ds;
    ds.name = "mnist";
    ds.width = 14;
    ds.height = 14;

    const auto convert = [&](const std::string& ip, const std::string& lp,
                             std::vector<BitVector>& out, std::vector<std::uint16_t>& lbl) {
        IdxImages raw = load_idx(ip, lp);
        for (std::size_t i = 0; i < raw.images.size(); ++i) {
            out.push_back(binarize(downsample_2x(raw.images[i]), opts.binarize_threshold));
            lbl.push_back(raw.labels[i]);
        }
    };
    convert(train_images, train_labels, ds.train, ds.train_labels);
    convert(test_images, test_labels, ds.test, ds.test_labels);
    ds.validate();

    if (opts.train_fraction < 1.0) {
        RngState rng(opts.subsample_seed);
        ds = subsample_train(ds, opts.train_fraction, rng);
    }
    return ds;
}

}  // namespace trbm
