#include "nnsteal/timing_dataset.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "nnsteal/network.hpp"
#include "nnsteal/rng.hpp"

namespace nnsteal::attack {

namespace {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string make_arch_id(int index) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "arch-%04d", index);
    return buf;
}

}  // namespace

TimingDataset build_timing_dataset(const ArchSpace& space, int n_archs,
                                   const timing::CostModel& model, int n_runs, uint64_t seed) {
    if (n_archs < 1) throw std::invalid_argument("build_timing_dataset: n_archs must be >= 1");
    if (n_runs < 1) throw std::invalid_argument("build_timing_dataset: n_runs must be >= 1");
    space.validate();
    model.validate();

    TimingDataset ds;
    ds.mode = TimingMode::CostModel;
    ds.cost_model_id = model.id;
    ds.samples.resize(static_cast<size_t>(n_archs));

    Rng base(seed);
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n_archs; ++i) {
        const uint64_t arch_seed = base.split(static_cast<uint64_t>(i)).next_u64();
        auto arch = sample_random_architecture(space, arch_seed);
        double sum = 0.0;
        for (int r = 0; r < n_runs; ++r)
            sum += timing::simulate_time(arch, model,
                                         static_cast<uint64_t>(i) * static_cast<uint64_t>(n_runs) +
                                             static_cast<uint64_t>(r));
        TimingSample s;
        s.arch_id = make_arch_id(i);
        s.depth = nn::depth(arch);
        s.n_params = nn::param_count(arch);
        s.mean_time_s = sum / n_runs;
        s.n_runs = n_runs;
        s.hardware_tag = "cm:" + model.id;
        ds.samples[static_cast<size_t>(i)] = std::move(s);
    }
    return ds;
}

TimingDataset build_timing_dataset_wall(const ArchSpace& space, int n_archs, int n_runs,
                                        uint64_t seed, const std::string& hardware_tag) {
    if (n_archs < 1) throw std::invalid_argument("build_timing_dataset: n_archs must be >= 1");
    space.validate();

    TimingDataset ds;
    ds.mode = TimingMode::Wall;
    Rng base(seed);
    for (int i = 0; i < n_archs; ++i) {
        const uint64_t arch_seed = base.split(static_cast<uint64_t>(i)).next_u64();
        try {
            auto arch = sample_random_architecture(space, arch_seed);
            auto net = nn::init_network(arch, arch_seed ^ 0xABCDULL);
            Tensor input(arch.input_shape);
            Rng in_rng = base.split(0x10000ULL + static_cast<uint64_t>(i));
            for (auto& v : input.data) v = in_rng.uniform();
            auto m = timing::measure_wall(net, input, n_runs);
            TimingSample s;
            s.arch_id = make_arch_id(i);
            s.depth = nn::depth(arch);
            s.n_params = nn::param_count(arch);
            s.mean_time_s = m.mean_s;
            s.n_runs = n_runs;
            s.hardware_tag = "hw:" + hardware_tag;
            ds.samples.push_back(std::move(s));
        } catch (const std::exception& e) {
            std::cerr << "timing probe " << i << " skipped: " << e.what() << "\n";
            ds.complete = false;
        }
    }
    return ds;
}

TimingDataset build_depth_sweep_dataset(int depth_min, int depth_max, int per_depth, int filters,
                                        int kernel, Shape input_shape, int num_classes,
                                        const timing::CostModel& model, int n_runs) {
    if (depth_min < 1 || depth_max < depth_min)
        throw std::invalid_argument("depth sweep: bad depth range");
    if (per_depth < 1 || n_runs < 1)
        throw std::invalid_argument("depth sweep: per_depth and n_runs must be >= 1");
    TimingDataset ds;
    ds.mode = TimingMode::CostModel;
    ds.cost_model_id = model.id;
    uint64_t draw = 0;
    int idx = 0;
    for (int d = depth_min; d <= depth_max; ++d) {
        auto arch = fixed_width_arch(d, filters, kernel, input_shape, num_classes);
        for (int rep = 0; rep < per_depth; ++rep) {
            double sum = 0.0;
            for (int r = 0; r < n_runs; ++r) sum += timing::simulate_time(arch, model, draw++);
            TimingSample s;
            s.arch_id = make_arch_id(idx++);
            s.depth = d;
            s.n_params = nn::param_count(arch);
            s.mean_time_s = sum / n_runs;
            s.n_runs = n_runs;
            s.hardware_tag = "cm:" + model.id;
            ds.samples.push_back(std::move(s));
        }
    }
    return ds;
}

TimingDataset poison_timing_dataset(const TimingDataset& ds, double fraction,
                                    PoisonStrategy strategy, uint64_t seed) {
    if (fraction < 0.0 || fraction > 1.0)
        throw std::invalid_argument("poison_timing_dataset: fraction must be in [0, 1]");
    TimingDataset out = ds;
    const size_t n = ds.samples.size();
    const size_t n_poison = static_cast<size_t>(std::floor(fraction * static_cast<double>(n)));
    if (n_poison == 0) return out;

    int depth_lo = ds.samples[0].depth, depth_hi = ds.samples[0].depth;
    for (const auto& s : ds.samples) {
        depth_lo = std::min(depth_lo, s.depth);
        depth_hi = std::max(depth_hi, s.depth);
    }

    Rng rng(seed);
    std::vector<size_t> order(n);
    for (size_t i = 0; i < n; ++i) order[i] = i;
    rng.shuffle(order);

    for (size_t i = 0; i < n_poison; ++i) {
        auto& s = out.samples[order[i]];
        if (strategy == PoisonStrategy::LabelFlip) {
            if (depth_hi > depth_lo) {
                int wrong;
                do {
                    wrong = depth_lo +
                            static_cast<int>(rng.uniform_int(
                                static_cast<uint64_t>(depth_hi - depth_lo + 1)));
                } while (wrong == s.depth);
                s.depth = wrong;
            } else {
                s.depth = s.depth + 1 + static_cast<int>(rng.uniform_int(5));
            }
        } else {
            // log-uniform factor in [0.25, 4]
            const double factor = std::exp(rng.uniform(std::log(0.25), std::log(4.0)));
            s.mean_time_s *= factor;
        }
    }
    return out;
}

void write_timing_csv(const TimingDataset& ds, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << "arch_id,depth,n_params,mean_time_s,n_runs,hardware_tag\n";
    for (const auto& s : ds.samples) {
        out << s.arch_id << "," << s.depth << "," << s.n_params << ","
            << format_double(s.mean_time_s) << "," << s.n_runs << "," << s.hardware_tag << "\n";
    }
    if (!out) throw std::runtime_error("short write to " + path.string());
}

TimingDataset read_timing_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line))
        throw std::runtime_error(path.string() + ": empty file");
    if (line != "arch_id,depth,n_params,mean_time_s,n_runs,hardware_tag")
        throw std::runtime_error(path.string() + ": unexpected CSV header '" + line + "'");

    TimingDataset ds;
    size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string field;
        std::vector<std::string> fields;
        while (std::getline(ss, field, ',')) fields.push_back(field);
        if (fields.size() != 6)
            throw std::runtime_error(path.string() + ": line " + std::to_string(line_no) +
                                     " has " + std::to_string(fields.size()) + " fields");
        TimingSample s;
        s.arch_id = fields[0];
        s.depth = std::stoi(fields[1]);
        s.n_params = std::stoll(fields[2]);
        s.mean_time_s = std::stod(fields[3]);
        s.n_runs = std::stoi(fields[4]);
        s.hardware_tag = fields[5];
        ds.samples.push_back(std::move(s));
    }
    if (!ds.samples.empty()) {
        const auto& tag = ds.samples[0].hardware_tag;
        if (tag.rfind("cm:", 0) == 0) {
            ds.mode = TimingMode::CostModel;
            ds.cost_model_id = tag.substr(3);
        } else {
            ds.mode = TimingMode::Wall;
        }
    }
    return ds;
}

}  // namespace nnsteal::attack
