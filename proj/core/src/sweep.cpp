#include "trbm/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstring>
#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

namespace trbm {

namespace fs = std::filesystem;

void ExperimentConfig::validate(std::size_t dataset_pixels) const {
    if (temperatures.empty()) throw ConfigError("no temperatures configured");
    for (double t : temperatures)
        if (!(t > 0.0)) throw ConfigError("temperatures must be > 0");
    if (architecture.size() < 2) throw ConfigError("architecture needs input plus >= 1 hidden layer");
    if (architecture[0] != dataset_pixels) {
        throw ConfigError("architecture input size " + std::to_string(architecture[0]) +
                          " does not match dataset dimension " + std::to_string(dataset_pixels));
    }
    for (std::size_t s : architecture)
        if (s == 0) throw ConfigError("architecture sizes must be >= 1");
    if (algorithms.empty()) throw ConfigError("no algorithms configured");
    if (kinds.empty()) throw ConfigError("no model kinds configured");
    if (runs == 0) throw ConfigError("runs must be >= 1");
    if (workers == 0) throw ConfigError("workers must be >= 1");
    try {
        TrainConfig probe = train;
        probe.temperature = temperatures.front();
        probe.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
}

namespace {

std::string trim(const std::string& s) {
    const std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

bool parse_bool(const std::string& v, const std::string& key) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError(key + ": expected a boolean, got '" + v + "'");
}

double parse_real(const std::string& v, const std::string& key) {
    try {
        std::size_t used = 0;
        const double x = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw ConfigError(key + ": expected a number, got '" + v + "'");
    }
}

std::uint64_t parse_count(const std::string& v, const std::string& key) {
    try {
        // stoull wraps negative input instead of rejecting it
        if (v.find('-') != std::string::npos) throw std::invalid_argument(v);
        std::size_t used = 0;
        const unsigned long long x = std::stoull(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw ConfigError(key + ": expected a non-negative integer, got '" + v + "'");
    }
}

std::string format_temp(double t) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", t);
    return buf;
}

}  // namespace

void apply_config_line(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
    if (key == "dataset") cfg.dataset.name = value;
    else if (key == "semeion_path") cfg.dataset.semeion_path = value;
    else if (key == "mnist_train_images") cfg.dataset.mnist_train_images = value;
    else if (key == "mnist_train_labels") cfg.dataset.mnist_train_labels = value;
    else if (key == "mnist_test_images") cfg.dataset.mnist_test_images = value;
    else if (key == "mnist_test_labels") cfg.dataset.mnist_test_labels = value;
    else if (key == "caltech_path") cfg.dataset.caltech_path = value;
    else if (key == "mnist_train_fraction") cfg.dataset.mnist_train_fraction = parse_real(value, key);
    else if (key == "mnist_binarize_threshold")
        cfg.dataset.mnist_binarize_threshold = parse_real(value, key);
    else if (key == "semeion_train_fraction")
        cfg.dataset.semeion_train_fraction = parse_real(value, key);
    else if (key == "split_seed") cfg.dataset.split_seed = parse_count(value, key);
    else if (key == "architecture") {
        cfg.architecture.clear();
        for (const std::string& s : split_list(value))
            cfg.architecture.push_back(parse_count(s, key));
    } else if (key == "temperatures") {
        cfg.temperatures.clear();
        for (const std::string& s : split_list(value)) cfg.temperatures.push_back(parse_real(s, key));
    } else if (key == "algorithms") {
        cfg.algorithms.clear();
        for (const std::string& s : split_list(value)) {
            if (s == "CD") cfg.algorithms.push_back(Algorithm::CD);
            else if (s == "PCD") cfg.algorithms.push_back(Algorithm::PCD);
            else throw ConfigError("algorithms: unknown value '" + s + "'");
        }
    } else if (key == "kinds") {
        cfg.kinds.clear();
        for (const std::string& s : split_list(value)) {
            if (s == "DBM") cfg.kinds.push_back(StackKind::DBM);
            else if (s == "DBN") cfg.kinds.push_back(StackKind::DBN);
            else throw ConfigError("kinds: unknown value '" + s + "'");
        }
    }
    else if (key == "eta") cfg.train.eta = parse_real(value, key);
    else if (key == "lambda") cfg.train.lambda = parse_real(value, key);
    else if (key == "alpha") cfg.train.alpha = parse_real(value, key);
    else if (key == "k") cfg.train.k = parse_count(value, key);
    else if (key == "epochs") cfg.train.epochs = parse_count(value, key);
    else if (key == "batch_size") cfg.train.batch_size = parse_count(value, key);
    else if (key == "bias_tempered") cfg.train.bias_tempered = parse_bool(value, key);
    else if (key == "decay_scaled_by_eta") cfg.train.decay_scaled_by_eta = parse_bool(value, key);
    else if (key == "seed") cfg.train.seed = parse_count(value, key);
    else if (key == "weight_sigma") cfg.train.weight_sigma = parse_real(value, key);
    else if (key == "propagate_samples") cfg.propagate_samples = parse_bool(value, key);
    else if (key == "tempering") {
        if (value == "literal") cfg.tempering = TemperingMode::Literal;
        else if (value == "uniform") cfg.tempering = TemperingMode::Uniform;
        else throw ConfigError("tempering: expected literal or uniform");
    }
    else if (key == "mean_field_iterations") cfg.mean_field_iterations = parse_count(value, key);
    else if (key == "binarize_reconstruction") cfg.binarize_reconstruction = parse_bool(value, key);
    else if (key == "runs") cfg.runs = parse_count(value, key);
    else if (key == "workers") cfg.workers = parse_count(value, key);
    else if (key == "filter_tiles") cfg.filter_tiles = parse_count(value, key);
    else if (key == "output_dir") cfg.output_dir = value;
    else throw ConfigError("unknown config key '" + key + "'");
}

ExperimentConfig parse_config_text(std::istream& in) {
    ExperimentConfig cfg;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
        }
        apply_config_line(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return cfg;
}

ExperimentConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    return parse_config_text(in);
}

std::vector<std::string> preset_names() {
    return {"semeion-small", "mnist-small", "caltech-small", "paper-full"};
}

ExperimentConfig preset_config(const std::string& name) {
    ExperimentConfig cfg;
    cfg.temperatures = {0.1, 0.2, 0.5, 0.8, 1.0, 1.2, 1.5, 2.0};
    cfg.algorithms = {Algorithm::CD, Algorithm::PCD};
    cfg.kinds = {StackKind::DBM, StackKind::DBN};
    if (name == "semeion-small") {
        cfg.dataset.name = "semeion";
        cfg.architecture = {256, 50, 50, 200};
        cfg.train.epochs = 10;
        cfg.runs = 10;
    } else if (name == "mnist-small") {
        cfg.dataset.name = "mnist";
        cfg.architecture = {196, 50, 50, 200};
        cfg.train.epochs = 10;
        cfg.runs = 10;
    } else if (name == "caltech-small") {
        cfg.dataset.name = "caltech";
        cfg.architecture = {784, 50, 50, 200};
        cfg.train.epochs = 10;
        cfg.runs = 10;
    } else if (name == "paper-full") {
        // literal experimental settings; long-running
        cfg.dataset.name = "semeion";
        cfg.architecture = {256, 500, 500, 2000};
        cfg.train.epochs = 30;
        cfg.runs = 20;
    } else {
        throw ConfigError("unknown preset '" + name + "'");
    }
    return cfg;
}

BinaryDataset load_dataset(const DatasetSpec& spec) {
    if (spec.name == "semeion") {
        if (spec.semeion_path.empty()) throw ConfigError("semeion_path not set");
        SemeionOptions opts;
        opts.train_fraction = spec.semeion_train_fraction;
        opts.split_seed = spec.split_seed;
        return load_semeion(spec.semeion_path, opts);
    }
    if (spec.name == "mnist") {
        if (spec.mnist_train_images.empty() || spec.mnist_train_labels.empty() ||
            spec.mnist_test_images.empty() || spec.mnist_test_labels.empty()) {
            throw ConfigError("mnist_* paths not fully set");
        }
        MnistOptions opts;
        opts.train_fraction = spec.mnist_train_fraction;
        opts.binarize_threshold = spec.mnist_binarize_threshold;
        opts.subsample_seed = spec.split_seed;
        return load_mnist(spec.mnist_train_images, spec.mnist_train_labels,
                          spec.mnist_test_images, spec.mnist_test_labels, opts);
    }
    if (spec.name == "caltech") {
        if (spec.caltech_path.empty()) throw ConfigError("caltech_path not set");
        return load_caltech_silhouettes(spec.caltech_path);
    }
    throw ConfigError("unknown dataset '" + spec.name + "'");
}

std::uint64_t cell_seed(std::uint64_t master, StackKind kind, Algorithm alg,
                        std::size_t temp_index, std::size_t run_index) {
    std::uint64_t x = master;
    const auto mix = [&x](std::uint64_t v) {
        RngState r(x ^ (v + 0x9e3779b97f4a7c15ULL));
        x = r.next_u64();
    };
    mix(kind == StackKind::DBM ? 1 : 2);
    mix(alg == Algorithm::CD ? 3 : 4);
    mix(0x100 + temp_index);
    mix(0x10000 + run_index);
    return x;
}

std::string cell_id(StackKind kind, Algorithm alg, double temperature, std::size_t run_index) {
    std::ostringstream ss;
    ss << (kind == StackKind::DBM ? "DBM" : "DBN") << '_'
       << (alg == Algorithm::CD ? "CD" : "PCD") << "_T" << format_temp(temperature) << "_run"
       << run_index;
    return ss.str();
}

namespace {

struct CellJob {
    StackKind kind;
    Algorithm alg;
    std::size_t temp_index;
    std::size_t run_index;
    std::string id;
};

std::map<std::string, double> read_manifest(const fs::path& path) {
    std::map<std::string, double> done;
    std::ifstream in(path);
    std::string id;
    double v;
    while (in >> id >> v) done[id] = v;
    return done;
}

}  // namespace

SweepOutcome run_sweep(const ExperimentConfig& cfg, const BinaryDataset& dataset,
                       std::ostream* log) {
    cfg.validate(dataset.pixel_count());
    if (dataset.train.empty() || dataset.test.empty())
        throw DataFormatError(dataset.name + ": empty train or test split");

    fs::create_directories(cfg.output_dir);
    const fs::path manifest_path = cfg.output_dir / "manifest.txt";
    std::map<std::string, double> done = read_manifest(manifest_path);

    std::vector<CellJob> jobs;
    for (std::size_t ki = 0; ki < cfg.kinds.size(); ++ki)
        for (std::size_t ai = 0; ai < cfg.algorithms.size(); ++ai)
            for (std::size_t ti = 0; ti < cfg.temperatures.size(); ++ti)
                for (std::size_t run = 0; run < cfg.runs; ++run) {
                    CellJob j{cfg.kinds[ki], cfg.algorithms[ai], ti, run, {}};
                    j.id = cell_id(j.kind, j.alg, cfg.temperatures[ti], run);
                    jobs.push_back(std::move(j));
                }

    std::vector<double> cell_mse(jobs.size());
    std::ofstream manifest(manifest_path, std::ios::app);
    if (!manifest) throw std::runtime_error("cannot open manifest for append");
    std::mutex io_mutex;
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::string failure;

    const auto worker = [&] {
        for (;;) {
            const std::size_t idx = next.fetch_add(1);
            if (idx >= jobs.size() || failed.load()) return;
            const CellJob& job = jobs[idx];
            {
                std::lock_guard<std::mutex> lock(io_mutex);
                auto it = done.find(job.id);
                if (it != done.end()) {
                    cell_mse[idx] = it->second;
                    continue;
                }
            }
            try {
                StackConfig sc;
                sc.train = cfg.train;
                sc.train.temperature = cfg.temperatures[job.temp_index];
                sc.train.algorithm = job.alg;
                sc.train.seed = cell_seed(cfg.train.seed, job.kind, job.alg, job.temp_index,
                                          job.run_index);
                sc.propagate_samples = cfg.propagate_samples;
                sc.tempering = cfg.tempering;
                sc.mean_field_iterations = cfg.mean_field_iterations;

                std::ostringstream metrics;
                metrics << "layer,epoch,train_mse,mean_weight,mean_hidden_activation\n";
                StackedModel model = train_stack(
                    dataset.train, cfg.architecture, sc, job.kind,
                    [&metrics](std::size_t layer, const EpochMetrics& em) {
                        metrics << layer << ',' << em.epoch << ',' << em.train_mse << ','
                                << em.mean_weight << ',' << em.mean_hidden_activation << '\n';
                    });

                EvalOptions eo;
                eo.binarize_reconstruction = cfg.binarize_reconstruction;
                eo.mean_field_iterations = cfg.mean_field_iterations;
                const double v = dataset_mse(model, dataset.test, eo);
                cell_mse[idx] = v;

                save_stack_file(model, (cfg.output_dir / ("model_" + job.id + ".tdbm")).string());
                {
                    std::ofstream mf(cfg.output_dir / ("metrics_" + job.id + ".csv"));
                    mf << metrics.str();
                }
                std::lock_guard<std::mutex> lock(io_mutex);
                char buf[64];
                std::snprintf(buf, sizeof buf, "%.17g", v);
                manifest << job.id << ' ' << buf << '\n' << std::flush;
                done[job.id] = v;
                if (log) *log << job.id << " mse=" << v << '\n' << std::flush;
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lock(io_mutex);
                if (!failed.exchange(true)) failure = std::string(job.id) + ": " + e.what();
            }
        }
    };

    if (cfg.workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < cfg.workers; ++w) pool.emplace_back(worker);
        for (std::thread& t : pool) t.join();
    }
    if (failed.load()) throw std::runtime_error("sweep cell failed: " + failure);

    SweepOutcome outcome;
    for (std::size_t idx = 0; idx < jobs.size(); ++idx) {
        const CellJob& job = jobs[idx];
        RunResult r;
        r.model_kind = job.kind == StackKind::DBM ? "DBM" : "DBN";
        r.algorithm = job.alg == Algorithm::CD ? "CD" : "PCD";
        r.temperature = cfg.temperatures[job.temp_index];
        r.run_index = job.run_index;
        r.test_mse = cell_mse[idx];
        outcome.results.push_back(std::move(r));
    }

    outcome.results_csv = cfg.output_dir / "results.csv";
    {
        std::ofstream out(outcome.results_csv);
        write_results_csv(outcome.results, out);
    }
    outcome.table_txt = cfg.output_dir / "table.txt";
    {
        std::ofstream out(outcome.table_txt);
        render_results_table(outcome.results, out);
    }

    // weight filters from run 0 of the first kind/algorithm combination
    for (std::size_t ti = 0; ti < cfg.temperatures.size(); ++ti) {
        const std::string id = cell_id(cfg.kinds[0], cfg.algorithms[0], cfg.temperatures[ti], 0);
        const fs::path model_path = cfg.output_dir / ("model_" + id + ".tdbm");
        if (!fs::exists(model_path)) continue;
        StackedModel model = load_stack_file(model_path.string());
        const std::size_t tiles = std::min<std::size_t>(cfg.filter_tiles, model.layers[0].hidden_size());
        RngState rng = RngState(cfg.train.seed).derive(0xf117e2 + ti);
        export_filters(model, 0, tiles, dataset.width, dataset.height, rng,
                       (cfg.output_dir / ("filters_T" + format_temp(cfg.temperatures[ti]) + ".pgm"))
                           .string());
    }
    return outcome;
}

FilterGeometry filter_geometry(std::size_t tile_count, std::size_t tile_width,
                               std::size_t tile_height) {
    FilterGeometry g;
    g.grid_cols = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(tile_count))));
    g.grid_rows = (tile_count + g.grid_cols - 1) / g.grid_cols;
    g.image_width = g.grid_cols * tile_width + (g.grid_cols - 1);
    g.image_height = g.grid_rows * tile_height + (g.grid_rows - 1);
    return g;
}

void export_filters(const StackedModel& model, std::size_t layer, std::size_t tile_count,
                    std::size_t tile_width, std::size_t tile_height, RngState& rng,
                    const std::string& out_path) {
    if (layer >= model.layers.size())
        throw std::invalid_argument("export_filters: invalid layer index");
    const RealMatrix& w = model.layers[layer].w;
    if (tile_count == 0 || tile_count > w.cols())
        throw std::invalid_argument("export_filters: tile_count must lie in [1, hidden units]");
    if (tile_width * tile_height != w.rows())
        throw DimensionError("export_filters: tile geometry does not match incoming weight count");

    std::vector<std::size_t> units = shuffled_indices(w.cols(), rng);
    units.resize(tile_count);

    const FilterGeometry g = filter_geometry(tile_count, tile_width, tile_height);
    std::vector<std::uint8_t> image(g.image_width * g.image_height, 0);

    for (std::size_t t = 0; t < tile_count; ++t) {
        const std::size_t unit = units[t];
        double lo = w(0, unit), hi = w(0, unit);
        for (std::size_t i = 1; i < w.rows(); ++i) {
            lo = std::min(lo, w(i, unit));
            hi = std::max(hi, w(i, unit));
        }
        const std::size_t gx = (t % g.grid_cols) * (tile_width + 1);
        const std::size_t gy = (t / g.grid_cols) * (tile_height + 1);
        for (std::size_t p = 0; p < w.rows(); ++p) {
            std::uint8_t value = 128;  // constant tile renders mid-gray
            if (hi > lo) {
                value = static_cast<std::uint8_t>(
                    std::lround(255.0 * (w(p, unit) - lo) / (hi - lo)));
            }
            const std::size_t px = gx + p % tile_width;
            const std::size_t py = gy + p / tile_width;
            image[py * g.image_width + px] = value;
        }
    }

    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for write: " + out_path);
    out << "P5\n" << g.image_width << ' ' << g.image_height << "\n255\n";
    out.write(reinterpret_cast<const char*>(image.data()),
              static_cast<std::streamsize>(image.size()));
    if (!out) throw std::runtime_error("failed writing: " + out_path);
}

namespace {

void append_layer_stats(std::ostringstream& ss, std::size_t index, const LayerParams& p) {
    double lo = p.w.data().front(), hi = lo, sum = 0.0;
    for (double x : p.w.data()) {
        lo = std::min(lo, x);
        hi = std::max(hi, x);
        sum += x;
    }
    ss << "  layer " << index << ": " << p.visible_size() << " x " << p.hidden_size()
       << "  w min/mean/max = " << lo << " / "
       << sum / static_cast<double>(p.w.data().size()) << " / " << hi << '\n';
}

}  // namespace

std::string inspect_model(const std::string& model_path) {
    std::ifstream in(model_path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open: " + model_path);
    char magic[5];
    in.read(magic, 5);
    if (!in) throw std::runtime_error(model_path + ": truncated file");
    in.seekg(0);

    std::ostringstream ss;
    if (std::memcmp(magic, "TDBM1", 5) == 0) {
        StackedModel model = load_stack(in);
        ss << "stack kind: " << (model.kind == StackKind::DBM ? "DBM" : "DBN") << '\n'
           << "layers: " << model.layers.size() << '\n'
           << "temperature: " << model.temperature.value() << '\n';
        for (std::size_t l = 0; l < model.layers.size(); ++l)
            append_layer_stats(ss, l, model.layers[l]);
    } else if (std::memcmp(magic, "TRBM1", 5) == 0) {
        RbmModel model = load_rbm(in);
        ss << "single RBM\n"
           << "temperature: " << model.temperature.value() << '\n';
        append_layer_stats(ss, 0, model.params);
    } else {
        throw std::runtime_error(model_path + ": unrecognized container");
    }
    return ss.str();
}

}  // namespace trbm
